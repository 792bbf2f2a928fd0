#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "threadforge/common/random.hpp"
#include "threadforge/nn/matrix.hpp"

namespace threadforge::nn {

struct NamedTensor {
    std::string name;
    Matrix value;

    friend bool operator==(const NamedTensor&, const NamedTensor&) = default;
};

// CKPT: "CKPT", u32 tensor count, then per tensor u32 name length, name bytes,
// u32 rows, u32 cols, rows*cols f64; little-endian.
void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> read_checkpoint(std::istream& in, const std::string& source_name);
void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors);
std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path);

// Uniform(-a, a) with a = sqrt(6 / (rows + cols)).
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace threadforge::nn
