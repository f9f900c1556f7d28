#include "sscd/embedding_io.hpp"

#include <fstream>
#include <limits>

#include "sscd/binary_io.hpp"

namespace sscd {
namespace {
constexpr std::string_view kMagic = "SSCDEMB1";
}

void save_embeddings(const std::filesystem::path& path, std::span<const EmbeddingVector> vectors) {
    const std::size_t dimension = vectors.empty() ? 0 : vectors.front().values.size();
    for (const auto& v : vectors) {
        if (v.values.size() != dimension) throw InputError("save_embeddings: vectors differ in dimension");
    }
    if (vectors.size() > std::numeric_limits<std::uint32_t>::max() ||
        dimension > std::numeric_limits<std::uint32_t>::max()) {
        throw InputError("save_embeddings: too many vectors for the cache format");
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    binary::Writer w(out);
    w.put_bytes(kMagic);
    w.put(static_cast<std::uint32_t>(vectors.size()));
    w.put(static_cast<std::uint32_t>(dimension));
    for (const auto& v : vectors) {
        w.put(static_cast<std::uint64_t>(v.fragment_id));
        w.put_floats(v.values);
    }
    out.flush();
    if (!out) throw InputError("write failure on " + path.string());
}

std::vector<EmbeddingVector> load_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open embedding cache " + path.string());
    binary::Reader r(in, path.string());
    if (r.get_bytes(kMagic.size(), "magic") != kMagic) {
        throw FormatError(path.string(), 0, "bad magic (not an embedding cache)");
    }
    const auto count = r.get<std::uint32_t>("count");
    const auto dimension = r.get<std::uint32_t>("dimension");
    if (count > 0 && dimension == 0) r.fail("zero dimension with a non-empty vector set");

    std::vector<EmbeddingVector> vectors;
    vectors.reserve(std::min<std::uint32_t>(count, 1u << 20));
    for (std::uint32_t i = 0; i < count; ++i) {
        EmbeddingVector v;
        v.fragment_id = r.get<std::uint64_t>("fragment id");
        v.values.resize(dimension);
        r.get_floats(v.values, "vector components");
        vectors.push_back(std::move(v));
    }
    r.expect_end();
    return vectors;
}

}  // namespace sscd
