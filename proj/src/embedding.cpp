#include "gsmart/embedding.hpp"
#include "gsmart/error.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <vector>

namespace gsmart::embedding {

namespace {
constexpr char kMagic[4] = {'E', 'M', 'B', '1'};
}

EmbeddingVector load(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());
    f.seekg(0, std::ios::end);
    auto size = static_cast<std::size_t>(f.tellg());
    f.seekg(0);

    char magic[4];
    if (size < 8 || !f.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0)
        throw ParseError(path.string() + ": bad magic (expected EMB1)");
    std::uint32_t dim = 0;
    f.read(reinterpret_cast<char*>(&dim), 4);
    if (dim == 0) throw ParseError(path.string() + ": dim must be positive");
    if (size != 8 + std::size_t(dim) * 4)
        throw ParseError(path.string() + ": byte length " + std::to_string(size) +
                         " does not match header-implied " + std::to_string(8 + std::size_t(dim) * 4));

    std::vector<float> raw(dim);
    f.read(reinterpret_cast<char*>(raw.data()), std::streamsize(dim) * 4);
    EmbeddingVector v;
    v.values.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
        if (!std::isfinite(raw[i]))
            throw ParseError(path.string() + ": non-finite value at index " + std::to_string(i));
        v.values[i] = raw[i];
    }
    return v;
}

void save(const EmbeddingVector& v, const std::filesystem::path& path) {
    if (v.dim() <= 0) throw DataError("embedding dim must be positive");
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write " + path.string());
    f.write(kMagic, 4);
    auto dim = static_cast<std::uint32_t>(v.dim());
    f.write(reinterpret_cast<const char*>(&dim), 4);
    for (Eigen::Index i = 0; i < v.dim(); ++i) {
        auto x = static_cast<float>(v.values[i]);
        f.write(reinterpret_cast<const char*>(&x), 4);
    }
}

} // namespace gsmart::embedding
