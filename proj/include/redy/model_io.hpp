#pragma once

#include "redy/cnn.hpp"
#include "redy/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

namespace redy {

// RDTN tensor container:
//   "RDTN" | version u8 | rank u8 | dims u32 LE x rank | payload f32 LE, row-major, last dim innermost
inline constexpr char kTensorMagic[4] = {'R', 'D', 'T', 'N'};
inline constexpr std::uint8_t kTensorVersion = 1;

std::vector<std::uint8_t> encode_tensor(const Tensor& t);
Tensor decode_tensor(std::span<const std::uint8_t> bytes);

void write_tensor(const std::filesystem::path& path, const Tensor& t);
Tensor read_tensor(const std::filesystem::path& path);

inline constexpr const char* kManifestName = "manifest.json";

/// Loads <dir>/manifest.json and the tensor files it names.
Network load_model(const std::filesystem::path& dir);

/// Writes manifest.json plus one RDTN file per weight and bias tensor.
void save_model(const std::filesystem::path& dir, const Network& net);

} // namespace redy
