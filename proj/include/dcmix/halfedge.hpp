#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "dcmix/rng.hpp"

namespace dcmix {

using HalfEdge = std::uint32_t;
using Vertex = std::uint32_t;

// Degree floor required of every vertex: R mode needs d >= 2 (walk
// well-defined), R* mode needs d >= 3 (no deterministic stretches).
enum class DegreeMode { R, RStar };

// A prescribed degree sequence with the half-edge layout tables.
// Half-edges 0..ell-1 are vertex-major contiguous: vertex v owns the
// block [offset(v), offset(v+1)).
class DegreeSequence {
public:
    DegreeSequence() = default;

    const std::vector<std::uint32_t>& degrees() const { return degrees_; }
    std::uint32_t degree(Vertex v) const { return degrees_[v]; }
    std::size_t vertex_count() const { return degrees_.size(); }
    std::uint64_t half_edge_count() const { return ell_; }
    std::uint64_t edge_count() const { return ell_ / 2; }
    DegreeMode mode() const { return mode_; }
    std::uint32_t max_degree() const { return d_max_; }

    Vertex vertex_of(HalfEdge x) const { return vertex_of_[x]; }
    HalfEdge offset(Vertex v) const { return offsets_[v]; }

    // d(v(x)) - 1: the number of onward choices after arriving at x's vertex.
    std::uint32_t forward_degree(HalfEdge x) const {
        return degrees_[vertex_of_[x]] - 1;
    }

    friend DegreeSequence build_degree_sequence(const std::vector<std::uint32_t>&,
                                                DegreeMode);

private:
    std::vector<std::uint32_t> degrees_;
    std::vector<HalfEdge> offsets_;    // size n+1
    std::vector<Vertex> vertex_of_;    // size ell
    std::uint64_t ell_ = 0;
    std::uint32_t d_max_ = 0;
    DegreeMode mode_ = DegreeMode::R;
};

// Validates and lays out a degree sequence. Throws std::invalid_argument on
// an empty sequence, odd half-edge total, or a degree below the mode floor.
DegreeSequence build_degree_sequence(const std::vector<std::uint32_t>& degrees,
                                     DegreeMode mode);

inline std::uint32_t forward_degree(const DegreeSequence& ds, HalfEdge x) {
    return ds.forward_degree(x);
}

// All half-edges y != x with v(y) = v(x).
std::vector<HalfEdge> siblings(const DegreeSequence& ds, HalfEdge x);

// A configuration: fixed-point-free involution on the half-edges.
struct Configuration {
    std::vector<HalfEdge> pair;

    HalfEdge operator()(HalfEdge x) const { return pair[x]; }
    std::size_t size() const { return pair.size(); }
    bool valid() const;
};

// Uniform over all (ell-1)!! perfect matchings of H: full shuffle of
// 0..ell-1, consecutive entries paired. Self-loops and multi-edges allowed.
Configuration sample_uniform_configuration(const DegreeSequence& ds,
                                           RandomSource& rng);

// Number of edges present in eta but not in zeta. Symmetric; throws on
// length mismatch.
std::uint64_t hamming_distance(const Configuration& eta, const Configuration& zeta);

// (ell-1)!! for even ell.
std::uint64_t double_factorial_odd(std::uint64_t ell);

// Visits every fixed-point-free involution on ell half-edges exactly once.
// Guarded to ell <= 12 ((ell-1)!! blowup).
void for_each_configuration(const DegreeSequence& ds,
                            const std::function<void(const Configuration&)>& fn);

std::vector<Configuration> enumerate_configurations(const DegreeSequence& ds);

// Rank of a configuration in the for_each_configuration order, and back.
std::uint64_t configuration_index(const Configuration& conf);
Configuration configuration_from_index(std::uint64_t index, std::size_t ell);

// Canonical serialization: `ell=<ell>` header, then one "x y" line per edge
// with x < y, sorted ascending. Bit-exact golden-file format.
std::string to_text(const Configuration& conf);
void write_text(std::ostream& os, const Configuration& conf);
Configuration configuration_from_text(std::istream& is);

// Degree-sequence file format: one integer per line.
std::vector<std::uint32_t> read_degree_file(std::istream& is);

}  // namespace dcmix
