#include "dcmix/halfedge.hpp"

#include <algorithm>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace dcmix {

DegreeSequence build_degree_sequence(const std::vector<std::uint32_t>& degrees,
                                     DegreeMode mode) {
    if (degrees.empty())
        throw std::invalid_argument("degree sequence is empty");
    const std::uint32_t floor = (mode == DegreeMode::R) ? 2u : 3u;
    std::uint64_t ell = 0;
    std::uint32_t d_max = 0;
    for (std::uint32_t d : degrees) {
        if (d < floor)
            throw std::invalid_argument("degree " + std::to_string(d) +
                                        " below mode floor " + std::to_string(floor));
        ell += d;
        d_max = std::max(d_max, d);
    }
    if (ell % 2 != 0)
        throw std::invalid_argument("half-edge count " + std::to_string(ell) +
                                    " is odd");

    DegreeSequence ds;
    ds.degrees_ = degrees;
    ds.mode_ = mode;
    ds.ell_ = ell;
    ds.d_max_ = d_max;
    ds.offsets_.resize(degrees.size() + 1);
    ds.offsets_[0] = 0;
    for (std::size_t v = 0; v < degrees.size(); ++v)
        ds.offsets_[v + 1] = ds.offsets_[v] + degrees[v];
    ds.vertex_of_.resize(ell);
    for (std::size_t v = 0; v < degrees.size(); ++v)
        for (HalfEdge x = ds.offsets_[v]; x < ds.offsets_[v + 1]; ++x)
            ds.vertex_of_[x] = static_cast<Vertex>(v);
    return ds;
}

std::vector<HalfEdge> siblings(const DegreeSequence& ds, HalfEdge x) {
    const Vertex v = ds.vertex_of(x);
    std::vector<HalfEdge> out;
    out.reserve(ds.degree(v) - 1);
    for (HalfEdge y = ds.offset(v); y < ds.offset(v) + ds.degree(v); ++y)
        if (y != x) out.push_back(y);
    return out;
}

bool Configuration::valid() const {
    const std::size_t ell = pair.size();
    if (ell % 2 != 0) return false;
    for (std::size_t x = 0; x < ell; ++x) {
        if (pair[x] >= ell) return false;
        if (pair[x] == x) return false;
        if (pair[pair[x]] != x) return false;
    }
    return true;
}

Configuration sample_uniform_configuration(const DegreeSequence& ds,
                                           RandomSource& rng) {
    const std::size_t ell = static_cast<std::size_t>(ds.half_edge_count());
    std::vector<HalfEdge> order(ell);
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);
    Configuration conf;
    conf.pair.resize(ell);
    for (std::size_t i = 0; i < ell; i += 2) {
        conf.pair[order[i]] = order[i + 1];
        conf.pair[order[i + 1]] = order[i];
    }
    return conf;
}

std::uint64_t hamming_distance(const Configuration& eta, const Configuration& zeta) {
    if (eta.size() != zeta.size())
        throw std::invalid_argument("configurations have different sizes");
    std::uint64_t missing = 0;
    for (HalfEdge x = 0; x < eta.size(); ++x) {
        if (x < eta.pair[x] && zeta.pair[x] != eta.pair[x]) ++missing;
    }
    return missing;
}

std::uint64_t double_factorial_odd(std::uint64_t ell) {
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i + 1 < ell; i += 2) r *= ell - i;
    return r;
}

namespace {

constexpr std::size_t kEnumerationCap = 12;

void enumerate_rec(std::vector<HalfEdge>& pair, std::vector<bool>& used,
                   std::size_t ell,
                   const std::function<void(const Configuration&)>& fn) {
    std::size_t first = ell;
    for (std::size_t x = 0; x < ell; ++x)
        if (!used[x]) { first = x; break; }
    if (first == ell) {
        Configuration conf;
        conf.pair = pair;
        fn(conf);
        return;
    }
    used[first] = true;
    for (std::size_t y = first + 1; y < ell; ++y) {
        if (used[y]) continue;
        used[y] = true;
        pair[first] = static_cast<HalfEdge>(y);
        pair[y] = static_cast<HalfEdge>(first);
        enumerate_rec(pair, used, ell, fn);
        used[y] = false;
    }
    used[first] = false;
}

}  // namespace

void for_each_configuration(const DegreeSequence& ds,
                            const std::function<void(const Configuration&)>& fn) {
    const std::size_t ell = static_cast<std::size_t>(ds.half_edge_count());
    if (ell > kEnumerationCap)
        throw std::invalid_argument("configuration enumeration limited to ell <= 12");
    std::vector<HalfEdge> pair(ell);
    std::vector<bool> used(ell, false);
    enumerate_rec(pair, used, ell, fn);
}

std::vector<Configuration> enumerate_configurations(const DegreeSequence& ds) {
    std::vector<Configuration> out;
    out.reserve(double_factorial_odd(ds.half_edge_count()));
    for_each_configuration(ds, [&](const Configuration& c) { out.push_back(c); });
    return out;
}

std::uint64_t configuration_index(const Configuration& conf) {
    const std::size_t ell = conf.size();
    std::vector<bool> used(ell, false);
    std::uint64_t index = 0;
    for (std::size_t x = 0; x < ell; ++x) {
        if (used[x]) continue;
        used[x] = true;
        const HalfEdge partner = conf.pair[x];
        std::uint64_t rank = 0;
        std::uint64_t candidates = 0;
        for (std::size_t y = x + 1; y < ell; ++y) {
            if (used[y]) continue;
            if (y == partner) rank = candidates;
            ++candidates;
        }
        index = index * candidates + rank;
        used[partner] = true;
    }
    return index;
}

Configuration configuration_from_index(std::uint64_t index, std::size_t ell) {
    // Mixed-radix digits with radices (ell-1), (ell-3), ..., 1.
    std::vector<std::uint64_t> digits;
    for (std::uint64_t r = 1; r + 1 < ell; r += 2) digits.push_back(ell - r);
    std::vector<std::uint64_t> rev(digits.rbegin(), digits.rend());
    std::vector<std::uint64_t> ranks(digits.size());
    for (std::size_t i = 0; i < rev.size(); ++i) {
        ranks[rev.size() - 1 - i] = index % rev[i];
        index /= rev[i];
    }
    if (index != 0) throw std::invalid_argument("configuration index out of range");

    Configuration conf;
    conf.pair.resize(ell);
    std::vector<bool> used(ell, false);
    std::size_t level = 0;
    for (std::size_t x = 0; x < ell; ++x) {
        if (used[x]) continue;
        used[x] = true;
        // The final pair is forced (radix 1) and carries no digit.
        std::uint64_t rank = level < ranks.size() ? ranks[level] : 0;
        ++level;
        for (std::size_t y = x + 1; y < ell; ++y) {
            if (used[y]) continue;
            if (rank == 0) {
                used[y] = true;
                conf.pair[x] = static_cast<HalfEdge>(y);
                conf.pair[y] = static_cast<HalfEdge>(x);
                break;
            }
            --rank;
        }
    }
    return conf;
}

void write_text(std::ostream& os, const Configuration& conf) {
    os << "ell=" << conf.size() << "\n";
    for (HalfEdge x = 0; x < conf.size(); ++x)
        if (x < conf.pair[x]) os << x << " " << conf.pair[x] << "\n";
}

std::string to_text(const Configuration& conf) {
    std::ostringstream os;
    write_text(os, conf);
    return os.str();
}

Configuration configuration_from_text(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("ell=", 0) != 0)
        throw std::invalid_argument("configuration text: missing ell= header");
    const std::size_t ell = std::stoul(header.substr(4));
    Configuration conf;
    conf.pair.assign(ell, 0);
    std::vector<bool> seen(ell, false);
    std::uint64_t x, y;
    std::size_t pairs = 0;
    while (is >> x >> y) {
        if (x >= ell || y >= ell || x == y || seen[x] || seen[y])
            throw std::invalid_argument("configuration text: bad pair");
        conf.pair[x] = static_cast<HalfEdge>(y);
        conf.pair[y] = static_cast<HalfEdge>(x);
        seen[x] = seen[y] = true;
        ++pairs;
    }
    if (pairs * 2 != ell)
        throw std::invalid_argument("configuration text: wrong pair count");
    return conf;
}

std::vector<std::uint32_t> read_degree_file(std::istream& is) {
    std::vector<std::uint32_t> degrees;
    long long d;
    while (is >> d) {
        if (d <= 0) throw std::invalid_argument("degree file: non-positive degree");
        degrees.push_back(static_cast<std::uint32_t>(d));
    }
    return degrees;
}

}  // namespace dcmix
