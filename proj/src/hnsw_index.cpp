#include "sscd/hnsw_index.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "sscd/binary_io.hpp"
#include "sscd/error.hpp"
#include "sscd/vector_math.hpp"

namespace sscd {
namespace {

constexpr std::string_view kMagic = "SSCDHNSW";
constexpr std::uint32_t kFormatVersion = 1;

// Per-thread visited marks, reset in O(1) by bumping the epoch.
class VisitedMarks {
public:
    void reset(std::size_t n) {
        if (tags_.size() < n) tags_.resize(n, 0);
        if (++epoch_ == 0) {
            std::fill(tags_.begin(), tags_.end(), 0);
            epoch_ = 1;
        }
    }
    bool test_and_set(std::uint32_t row) {
        if (tags_[row] == epoch_) return true;
        tags_[row] = epoch_;
        return false;
    }

private:
    std::vector<std::uint32_t> tags_;
    std::uint32_t epoch_ = 0;
};

VisitedMarks& visited_marks() {
    thread_local VisitedMarks marks;
    return marks;
}

}  // namespace

void validate(const HnswParams& params) {
    if (params.m < 2) throw InputError("HNSW M must be >= 2");
    if (params.ef_construction < params.m) throw InputError("HNSW efConstruction must be >= M");
}

std::size_t assign_level(std::size_t m, double u) {
    if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("assign_level: u must lie in (0, 1]");
    const double ml = 1.0 / std::log(static_cast<double>(m));
    // A relative nudge keeps exact powers of 1/M on the intended level despite
    // rounding in the logarithms.
    const double level = -std::log(u) * ml;
    return static_cast<std::size_t>(std::floor(level + 1e-12 * std::max(1.0, level)));
}

HnswIndex::HnswIndex(std::size_t dimension, HnswParams params)
    : dimension_(dimension), params_(params), rng_(params.seed) {
    validate(params_);
    if (dimension_ == 0) throw InputError("HNSW index needs a positive dimension");
}

HnswIndex HnswIndex::build(std::span<const EmbeddingVector> vectors, HnswParams params) {
    check_unit_vectors(vectors);
    HnswIndex index(vectors.empty() ? 1 : vectors.front().values.size(), params);
    for (const auto& v : vectors) index.insert(v.fragment_id, v.values);
    return index;
}

std::span<const float> HnswIndex::vector_at(std::size_t row) const {
    return {vectors_.data() + row * dimension_, dimension_};
}

double HnswIndex::distance(std::span<const float> query, std::uint32_t row) const {
    return 1.0 - static_cast<double>(dot_f32(query, vector_at(row)));
}

void HnswIndex::prefetch_vector(std::uint32_t row) const {
    const char* p = reinterpret_cast<const char*>(vectors_.data() + row * dimension_);
    const std::size_t bytes = dimension_ * sizeof(float);
    for (std::size_t off = 0; off < bytes; off += 64) __builtin_prefetch(p + off);
}

double HnswIndex::distance(std::uint32_t a, std::uint32_t b) const { return distance(vector_at(a), b); }

std::uint32_t HnswIndex::greedy_closest(std::span<const float> query, std::uint32_t entry, std::size_t from_level,
                                        std::size_t to_level) const {
    std::uint32_t current = entry;
    double current_distance = distance(query, current);
    for (std::size_t level = from_level; level > to_level; --level) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::uint32_t nb : links_[current][level]) {
                double d = distance(query, nb);
                if (d < current_distance) {
                    current_distance = d;
                    current = nb;
                    improved = true;
                }
            }
        }
    }
    return current;
}

std::vector<HnswIndex::Candidate> HnswIndex::search_layer(std::span<const float> query,
                                                          const std::vector<Candidate>& entries, std::size_t ef,
                                                          std::size_t level) const {
    auto closer = [](const Candidate& a, const Candidate& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.row < b.row;
    };
    auto farther = [&](const Candidate& a, const Candidate& b) { return closer(b, a); };
    // frontier pops the closest; results keeps the farthest on top
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(farther)> frontier(farther);
    std::priority_queue<Candidate, std::vector<Candidate>, decltype(closer)> results(closer);

    std::vector<std::uint32_t> fresh;
    VisitedMarks& visited = visited_marks();
    visited.reset(ids_.size());
    for (const Candidate& e : entries) {
        if (visited.test_and_set(e.row)) continue;
        frontier.push(e);
        results.push(e);
        if (results.size() > ef) results.pop();
    }
    while (!frontier.empty()) {
        Candidate c = frontier.top();
        if (results.size() >= ef && c.distance > results.top().distance) break;
        frontier.pop();
        // Gather unvisited neighbours first so the next vector can be
        // prefetched while the current distance is computed.
        fresh.clear();
        for (std::uint32_t nb : links_[c.row][level]) {
            if (!visited.test_and_set(nb)) fresh.push_back(nb);
        }
        for (std::size_t i = 0; i < fresh.size(); ++i) {
            if (i + 1 < fresh.size()) prefetch_vector(fresh[i + 1]);
            const std::uint32_t nb = fresh[i];
            double d = distance(query, nb);
            if (results.size() < ef || d < results.top().distance) {
                frontier.push({d, nb});
                results.push({d, nb});
                if (results.size() > ef) results.pop();
            }
        }
    }
    std::vector<Candidate> out;
    out.reserve(results.size());
    while (!results.empty()) {
        out.push_back(results.top());
        results.pop();
    }
    std::reverse(out.begin(), out.end());
    return out;
}

// Distance-diversity heuristic: a candidate is kept only if it is closer to
// the base point than to every neighbour already kept.
std::vector<std::uint32_t> HnswIndex::select_neighbors(std::vector<Candidate> candidates, std::size_t limit) const {
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.row < b.row;
    });
    std::vector<std::uint32_t> selected;
    selected.reserve(limit);
    for (const Candidate& c : candidates) {
        if (selected.size() >= limit) break;
        bool diverse = std::none_of(selected.begin(), selected.end(),
                                    [&](std::uint32_t s) { return distance(c.row, s) < c.distance; });
        if (diverse) selected.push_back(c.row);
    }
    return selected;
}

void HnswIndex::unlink(std::uint32_t a, std::uint32_t b, std::size_t level) {
    std::erase(links_[a][level], b);
    std::erase(links_[b][level], a);
}

void HnswIndex::link(std::uint32_t a, std::uint32_t b, std::size_t level) {
    links_[a][level].push_back(b);
    links_[b][level].push_back(a);
    auto& list = links_[b][level];
    if (list.size() <= max_degree(level)) return;

    std::vector<Candidate> candidates;
    candidates.reserve(list.size());
    for (std::uint32_t x : list) candidates.push_back({distance(b, x), x});
    std::vector<std::uint32_t> kept = select_neighbors(candidates, max_degree(level));
    std::vector<std::uint32_t> dropped;
    for (std::uint32_t x : list) {
        if (std::find(kept.begin(), kept.end(), x) == kept.end()) dropped.push_back(x);
    }
    for (std::uint32_t x : dropped) unlink(b, x, level);
}

void HnswIndex::insert(FragmentId id, std::span<const float> values) {
    if (values.size() != dimension_) {
        throw InputError("HNSW insert: vector " + std::to_string(id) + " has dimension " +
                         std::to_string(values.size()) + ", index has " + std::to_string(dimension_));
    }
    if (ids_.size() >= std::numeric_limits<std::uint32_t>::max()) throw InputError("HNSW index is full");
    const auto row = static_cast<std::uint32_t>(ids_.size());
    register_id(id, row);
    ids_.push_back(id);
    vectors_.insert(vectors_.end(), values.begin(), values.end());

    const double u = static_cast<double>((rng_() >> 11) + 1) * 0x1.0p-53;
    const std::size_t level = assign_level(params_.m, u);
    links_.emplace_back(level + 1);

    if (max_level_ < 0) {
        entry_point_ = row;
        max_level_ = static_cast<int>(level);
        return;
    }
    const auto top = static_cast<std::size_t>(max_level_);
    std::span<const float> query = vector_at(row);
    std::uint32_t current = static_cast<std::uint32_t>(entry_point_);
    if (level < top) current = greedy_closest(query, current, top, level);

    std::vector<Candidate> entries = {{distance(query, current), current}};
    for (std::size_t lc = std::min(level, top) + 1; lc-- > 0;) {
        std::vector<Candidate> found = search_layer(query, entries, params_.ef_construction, lc);
        for (std::uint32_t nb : select_neighbors(found, params_.m)) link(row, nb, lc);
        entries = std::move(found);
    }
    if (level > top) {
        entry_point_ = row;
        max_level_ = static_cast<int>(level);
    }
}

std::vector<CloneCandidate> HnswIndex::search(std::span<const float> query, FragmentId query_id,
                                              const SearchParams& params, std::optional<FragmentId> exclude) const {
    if (ids_.empty()) return {};
    if (query.size() != dimension_) throw std::invalid_argument("query dimension mismatch");
    const std::size_t ef = std::max(params.ef_search, params.k + (exclude ? 1 : 0));
    auto entry = greedy_closest(query, static_cast<std::uint32_t>(entry_point_),
                                static_cast<std::size_t>(max_level_), 0);
    auto found = search_layer(query, {{distance(query, entry), entry}}, ef, 0);
    std::vector<ScoredHit> hits;
    hits.reserve(found.size());
    for (const Candidate& c : found) hits.push_back({ids_[c.row], dot(query, vector_at(c.row))});
    return rank_hits(query_id, std::move(hits), params.k, params.similarity_floor, exclude);
}

HnswAudit HnswIndex::audit() const {
    HnswAudit report;
    auto problem = [&](std::string msg) {
        report.ok = false;
        if (report.problems.size() < 50) report.problems.push_back(std::move(msg));
    };
    const std::size_t n = ids_.size();
    if (links_.size() != n) problem("adjacency table size differs from node count");
    if (n == 0) {
        if (max_level_ != -1) problem("empty index with a max level");
        return report;
    }
    std::size_t highest = 0;
    for (std::size_t row = 0; row < n; ++row) {
        if (links_[row].empty()) {
            problem("node " + std::to_string(row) + " missing from layer 0");
            continue;
        }
        highest = std::max(highest, level_of(row));
        for (std::size_t level = 0; level < links_[row].size(); ++level) {
            const auto& list = links_[row][level];
            if (list.size() > max_degree(level)) {
                problem("node " + std::to_string(row) + " exceeds degree bound on layer " + std::to_string(level));
            }
            std::vector<std::uint32_t> sorted = list;
            std::sort(sorted.begin(), sorted.end());
            if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
                problem("node " + std::to_string(row) + " has duplicate edges on layer " + std::to_string(level));
            }
            for (std::uint32_t nb : list) {
                if (nb >= n || nb == row) {
                    problem("node " + std::to_string(row) + " has an invalid edge");
                    continue;
                }
                if (links_[nb].size() <= level) {
                    problem("edge " + std::to_string(row) + "->" + std::to_string(nb) + " leaves layer " +
                            std::to_string(level));
                    continue;
                }
                const auto& back = links_[nb][level];
                if (std::find(back.begin(), back.end(), row) == back.end()) {
                    problem("asymmetric edge " + std::to_string(row) + "->" + std::to_string(nb) + " on layer " +
                            std::to_string(level));
                }
            }
        }
    }
    if (max_level_ < 0 || static_cast<std::size_t>(max_level_) != highest) problem("max level is stale");
    if (entry_point_ >= n || level_of(entry_point_) != highest) problem("entry point is not on the top layer");

    std::vector<char> seen(n, 0);
    std::vector<std::size_t> stack = {entry_point_ < n ? entry_point_ : 0};
    seen[stack.front()] = 1;
    std::size_t reached = 1;
    while (!stack.empty()) {
        std::size_t row = stack.back();
        stack.pop_back();
        if (links_[row].empty()) continue;
        for (std::uint32_t nb : links_[row][0]) {
            if (nb < n && !seen[nb]) {
                seen[nb] = 1;
                ++reached;
                stack.push_back(nb);
            }
        }
    }
    report.unreachable_layer0 = n - reached;
    return report;
}

void HnswIndex::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + path.string());
    binary::Writer w(out);
    w.put_bytes(kMagic);
    w.put(kFormatVersion);
    w.put(static_cast<std::uint32_t>(dimension_));
    w.put(static_cast<std::uint32_t>(params_.m));
    w.put(static_cast<std::uint32_t>(params_.ef_construction));
    w.put(static_cast<std::uint64_t>(params_.seed));
    std::ostringstream rng_state;
    rng_state << rng_;
    w.put(static_cast<std::uint32_t>(rng_state.str().size()));
    w.put_bytes(rng_state.str());
    w.put(static_cast<std::uint64_t>(ids_.size()));
    w.put(static_cast<std::int32_t>(max_level_));
    w.put(static_cast<std::uint64_t>(entry_point_));
    for (std::size_t row = 0; row < ids_.size(); ++row) {
        w.put(static_cast<std::uint64_t>(ids_[row]));
        w.put(static_cast<std::uint32_t>(links_[row].size() - 1));
        for (const auto& list : links_[row]) {
            w.put(static_cast<std::uint32_t>(list.size()));
            for (std::uint32_t nb : list) w.put(nb);
        }
    }
    w.put_floats(vectors_);
    out.flush();
    if (!out) throw InputError("write failure on " + path.string());
}

HnswIndex HnswIndex::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open index " + path.string());
    binary::Reader r(in, path.string());
    if (r.get_bytes(kMagic.size(), "magic") != kMagic) throw FormatError(path.string(), 0, "bad magic (not an HNSW index)");
    if (r.get<std::uint32_t>("version") != kFormatVersion) r.fail("unsupported index version");
    const auto dimension = r.get<std::uint32_t>("dimension");
    HnswParams params;
    params.m = r.get<std::uint32_t>("M");
    params.ef_construction = r.get<std::uint32_t>("efConstruction");
    params.seed = r.get<std::uint64_t>("seed");
    if (dimension == 0 || params.m < 2 || params.ef_construction < params.m) r.fail("invalid index parameters");
    HnswIndex index(dimension, params);
    const auto rng_len = r.get<std::uint32_t>("rng state length");
    if (rng_len > 1u << 16) r.fail("implausible rng state length");
    std::istringstream rng_state(r.get_bytes(rng_len, "rng state"));
    rng_state >> index.rng_;
    if (!rng_state) r.fail("corrupt rng state");

    const auto count = r.get<std::uint64_t>("node count");
    if (count >= std::numeric_limits<std::uint32_t>::max()) r.fail("implausible node count");
    index.max_level_ = r.get<std::int32_t>("max level");
    index.entry_point_ = r.get<std::uint64_t>("entry point");
    if ((count == 0) != (index.max_level_ < 0) || (count > 0 && index.entry_point_ >= count)) {
        r.fail("inconsistent entry point");
    }
    index.links_.resize(count);
    index.ids_.reserve(count);
    for (std::uint64_t row = 0; row < count; ++row) {
        const std::uint64_t at = r.offset();
        const auto id = r.get<std::uint64_t>("fragment id");
        const auto level = r.get<std::uint32_t>("level");
        if (static_cast<std::int64_t>(level) > index.max_level_) throw FormatError(path.string(), at, "level above max level");
        try {
            index.register_id(id, row);
        } catch (const InputError&) {
            throw FormatError(path.string(), at, "duplicate fragment id");
        }
        index.ids_.push_back(id);
        index.links_[row].resize(level + 1);
        for (auto& list : index.links_[row]) {
            const auto degree = r.get<std::uint32_t>("degree");
            if (degree > 2 * params.m) r.fail("degree above bound");
            list.resize(degree);
            for (auto& nb : list) {
                nb = r.get<std::uint32_t>("neighbour");
                if (nb >= count) r.fail("neighbour out of range");
            }
        }
    }
    index.vectors_.resize(count * dimension);
    r.get_floats(index.vectors_, "vector blob");
    r.expect_end();
    return index;
}

}  // namespace sscd
