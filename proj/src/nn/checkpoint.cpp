#include "threadforge/nn/checkpoint.hpp"

#include <cmath>
#include <fstream>
#include <limits>

#include "threadforge/common/binary_io.hpp"
#include "threadforge/common/error.hpp"

namespace threadforge::nn {

void write_checkpoint(std::ostream& out, const std::vector<NamedTensor>& tensors) {
    constexpr auto kMax = std::numeric_limits<std::uint32_t>::max();
    if (tensors.size() > kMax) throw UsageError("too many tensors for a checkpoint");
    binio::write_magic(out, "CKPT");
    binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));
    for (const auto& t : tensors) {
        if (t.name.size() > kMax || t.value.rows() > kMax || t.value.cols() > kMax) {
            throw UsageError("tensor '" + t.name + "' is too large for a checkpoint");
        }
        binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.name.size()));
        out.write(t.name.data(), static_cast<std::streamsize>(t.name.size()));
        binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.rows()));
        binio::write_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.value.cols()));
        for (double v : t.value.data()) binio::write_le<double>(out, v);
    }
}

std::vector<NamedTensor> read_checkpoint(std::istream& in, const std::string& name) {
    binio::expect_magic(in, "CKPT", name);
    const auto count = binio::read_le<std::uint32_t>(in, "CKPT tensor count");
    std::vector<NamedTensor> tensors;
    tensors.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        const auto len = binio::read_le<std::uint32_t>(in, "CKPT name length");
        NamedTensor t;
        t.name = binio::read_bytes(in, len, "CKPT name");
        const auto rows = binio::read_le<std::uint32_t>(in, "CKPT rows");
        const auto cols = binio::read_le<std::uint32_t>(in, "CKPT cols");
        t.value = Matrix(rows, cols);
        for (double& v : t.value.data()) v = binio::read_le<double>(in, "CKPT values");
        tensors.push_back(std::move(t));
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError(name + ": trailing bytes after checkpoint tensors");
    }
    return tensors;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& tensors) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_checkpoint(out, tensors);
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    return read_checkpoint(in, path.string());
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    Matrix m(rows, cols);
    for (double& v : m.data()) v = rng.uniform(-limit, limit);
    return m;
}

}  // namespace threadforge::nn
