#include "redy/model_io.hpp"

#include "redy/error.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

namespace redy {

namespace {

using json = nlohmann::ordered_json;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[off + i]) << (8 * i);
    return v;
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open tensor file " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string tensor_file(const json& j, const char* key, const std::string& layer) {
    if (!j.contains(key) || !j[key].is_string())
        throw ModelError("manifest layer " + layer + ": missing tensor file '" + key + "'");
    return j[key].get<std::string>();
}

} // namespace

std::vector<std::uint8_t> encode_tensor(const Tensor& t) {
    if (t.rank() > 255) throw ModelError("RDTN: rank exceeds 255");
    std::vector<std::uint8_t> out(kTensorMagic, kTensorMagic + 4);
    out.push_back(kTensorVersion);
    out.push_back(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.dims()) put_u32(out, static_cast<std::uint32_t>(d));
    out.reserve(out.size() + 4 * t.size());
    for (double v : t.data()) put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    return out;
}

Tensor decode_tensor(std::span<const std::uint8_t> b) {
    if (b.size() < 6 || std::memcmp(b.data(), kTensorMagic, 4) != 0) throw ModelError("RDTN: bad magic");
    if (b[4] != kTensorVersion) throw ModelError("RDTN: unsupported version " + std::to_string(b[4]));
    const std::size_t rank = b[5];
    const std::size_t header = 6 + 4 * rank;
    if (b.size() < header) throw ModelError("RDTN: truncated header");
    std::vector<std::size_t> dims(rank);
    for (std::size_t i = 0; i < rank; ++i) dims[i] = get_u32(b, 6 + 4 * i);
    const std::size_t n = element_count(dims);
    if (b.size() != header + 4 * n) throw ModelError("RDTN: payload length does not match dims");
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<float>(get_u32(b, header + 4 * i));
    return Tensor(std::move(dims), std::move(data));
}

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
    const auto bytes = encode_tensor(t);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write tensor file " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("cannot write tensor file " + path.string());
}

Tensor read_tensor(const std::filesystem::path& path) {
    const auto bytes = read_bytes(path);
    try {
        return decode_tensor(bytes);
    } catch (const ModelError& e) {
        throw ModelError(path.string() + ": " + e.what());
    }
}

Network load_model(const std::filesystem::path& dir) {
    const auto manifest_path = dir / kManifestName;
    std::ifstream in(manifest_path);
    if (!in) throw ModelError("cannot open manifest " + manifest_path.string());
    json m;
    try {
        m = json::parse(in);
    } catch (const json::exception& e) {
        throw ModelError("malformed manifest: " + std::string(e.what()));
    }

    Network net;
    try {
        if (m.value("format", "") != "redy-model") throw ModelError("manifest: format must be \"redy-model\"");
        if (m.value("version", 0) != 1) throw ModelError("manifest: unsupported version");
        const auto input = m.at("input").get<std::vector<std::size_t>>();
        if (input.size() != 3) throw ModelError("manifest: input must be [W, H, C]");
        net.input = {input[0], input[1], input[2]};

        for (const auto& jl : m.at("layers")) {
            Layer layer;
            LayerSpec& spec = layer.spec;
            spec.name = jl.value("name", "layer" + std::to_string(net.layers.size()));
            spec.kind = parse_layer_kind(jl.at("kind").get<std::string>());
            spec.activation = parse_activation(jl.value("activation", "none"));
            spec.stride = jl.value("stride", std::size_t{1});
            spec.padding = jl.value("padding", std::size_t{0});
            if (jl.contains("add_from") && !jl["add_from"].is_null())
                spec.add_from = jl["add_from"].get<std::size_t>();
            if (spec.has_weights()) {
                const auto k = jl.at("kernel").get<std::vector<std::size_t>>();
                if (k.size() != 4) throw ModelError("manifest layer " + spec.name + ": kernel must be [R, S, C, K]");
                spec.R = k[0];
                spec.S = k[1];
                spec.C = k[2];
                spec.K = k[3];
                layer.weights = read_tensor(dir / tensor_file(jl, "weights", spec.name));
                if (jl.contains("bias") && !jl["bias"].is_null()) {
                    const Tensor b = read_tensor(dir / tensor_file(jl, "bias", spec.name));
                    layer.bias.assign(b.data().begin(), b.data().end());
                }
            } else if (spec.kind != LayerKind::activation) {
                const auto w = jl.at("window").get<std::vector<std::size_t>>();
                if (w.size() != 2) throw ModelError("manifest layer " + spec.name + ": window must be [R, S]");
                spec.R = w[0];
                spec.S = w[1];
            }
            net.layers.push_back(std::move(layer));
        }
    } catch (const json::exception& e) {
        throw ModelError("malformed manifest: " + std::string(e.what()));
    }
    net.shapes();
    return net;
}

void save_model(const std::filesystem::path& dir, const Network& net) {
    std::filesystem::create_directories(dir);
    json m;
    m["format"] = "redy-model";
    m["version"] = 1;
    m["input"] = {net.input[0], net.input[1], net.input[2]};
    json layers = json::array();
    for (const Layer& layer : net.layers) {
        const LayerSpec& spec = layer.spec;
        json jl;
        jl["name"] = spec.name;
        jl["kind"] = to_string(spec.kind);
        jl["activation"] = to_string(spec.activation);
        jl["stride"] = spec.stride;
        jl["padding"] = spec.padding;
        if (spec.add_from) jl["add_from"] = *spec.add_from;
        if (spec.has_weights()) {
            jl["kernel"] = {spec.R, spec.S, spec.C, spec.K};
            jl["weights"] = spec.name + ".w.rdtn";
            write_tensor(dir / (spec.name + ".w.rdtn"), layer.weights);
            if (!layer.bias.empty()) {
                jl["bias"] = spec.name + ".b.rdtn";
                write_tensor(dir / (spec.name + ".b.rdtn"), Tensor({layer.bias.size()}, layer.bias));
            }
        } else if (spec.kind != LayerKind::activation) {
            jl["window"] = {spec.R, spec.S};
        }
        layers.push_back(std::move(jl));
    }
    m["layers"] = std::move(layers);
    std::ofstream out(dir / kManifestName, std::ios::trunc);
    if (!out) throw Error("cannot write manifest in " + dir.string());
    out << m.dump(2) << '\n';
}

} // namespace redy
