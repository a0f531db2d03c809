// redy_fixture: writes the synthetic test CNN and a set of random input tensors.

#include "redy/fixture.hpp"
#include "redy/model_io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Write a synthetic RDTN model and inputs"};
    std::string out;
    std::size_t count = 16;
    std::uint64_t seed = 7;
    bool flat = false;
    app.add_option("--out", out, "Output directory (model/ and inputs/ are created inside)")->required();
    app.add_option("--inputs", count, "Number of input tensors")->capture_default_str();
    app.add_option("--seed", seed, "Seed for weights and inputs")->capture_default_str();
    app.add_flag("--flat", flat, "Linear convolutions, spread activation distributions");
    CLI11_PARSE(app, argc, argv);

    try {
        const std::filesystem::path root(out);
        const redy::Network net = redy::make_synthetic_network(seed, flat);
        redy::save_model(root / "model", net);
        std::filesystem::create_directories(root / "inputs");
        const auto inputs = redy::make_synthetic_inputs(net, count, seed + 1);
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof(name), "in_%04zu.rdtn", i);
            redy::write_tensor(root / "inputs" / name, inputs[i]);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
