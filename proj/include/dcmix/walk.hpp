#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dcmix/dynamics.hpp"
#include "dcmix/halfedge.hpp"

namespace dcmix {

// One trajectory of a walk variant. tau is the first time s with
// X_{s-1} in R_{<=s}; self_avoiding means no two trajectory half-edges
// are incident to the same vertex.
struct WalkRecord {
    std::vector<HalfEdge> trajectory;  // X_0..X_t
    std::optional<std::uint32_t> tau;
    bool self_avoiding = true;
    std::vector<Vertex> visited_vertices;
};

// Reset times of the modified walk: T subset of [1, horizon].
struct ResetSet {
    std::vector<std::uint32_t> times;  // sorted, each in [1, horizon]
    std::uint32_t horizon = 0;

    std::uint32_t mask() const {
        std::uint32_t m = 0;
        for (auto s : times) m |= 1u << (s - 1);
        return m;
    }
    static ResetSet from_mask(std::uint32_t mask, std::uint32_t horizon) {
        ResetSet t;
        t.horizon = horizon;
        for (std::uint32_t s = 1; s <= horizon; ++s)
            if (mask & (1u << (s - 1))) t.times.push_back(s);
        return t;
    }
    bool contains(std::uint32_t s) const {
        return s >= 1 && s <= horizon && (mask() & (1u << (s - 1)));
    }
};

// One non-backtracking move in a fixed configuration: a uniform sibling of
// eta(x), excluding eta(x) itself.
HalfEdge nbrw_step(const DegreeSequence& ds, const Configuration& config,
                   HalfEdge x, RandomSource& rng);

// Dense transition matrix of the walk (rows x, columns y). Doubly
// stochastic; guarded to ell <= 2000.
std::vector<std::vector<double>> transition_matrix_P(const DegreeSequence& ds,
                                                     const Configuration& config);

struct JointRunOptions {
    bool rewire = true;        // false: static walk (tau never set)
    bool record_trace = false; // keep per-step R_t sets in the engine trace
};

// The joint chain: per time step, rewire k edges, test X_{s-1} against
// R_{<=s} to set tau on first occurrence, then make a non-backtracking step
// in the updated configuration. Deterministic given the seed.
WalkRecord run_joint(const DegreeSequence& ds, const Configuration& eta,
                     HalfEdge x, std::uint32_t horizon, std::uint32_t k,
                     RandomSource& rng, const JointRunOptions& opts = {});

// run_joint with an engine owned by the caller (exposes the trace).
WalkRecord run_joint(RewiringEngine& engine, const Configuration& eta,
                     HalfEdge x, std::uint32_t horizon, RandomSource& rng,
                     const JointRunOptions& opts = {});

// Static-graph walk: no rewiring, same code path as run_joint.
WalkRecord run_static(const DegreeSequence& ds, const Configuration& eta,
                      HalfEdge x, std::uint32_t horizon, RandomSource& rng);

// Modified walk: at s not in T a non-backtracking step in the static eta,
// at s in T a jump to a uniform half-edge (possibly the current one).
WalkRecord run_modified(const DegreeSequence& ds, const Configuration& eta,
                        HalfEdge x, std::uint32_t horizon, const ResetSet& resets,
                        RandomSource& rng);

// Samples T with the rewiring-history law p_t(T) by the annealed
// exploration process: fresh uniform configuration and uniform start,
// dynamics evolved, the tracked path revealed lazily with the deterministic
// first-sibling rule, T = {s : x_{s-1} in R_{<=s}}. Runs whose revealed
// path violates self-avoidance are rejected and resampled; throws when the
// rejection rate stays above 50% (t too large for ell).
ResetSet sample_reset_set(const DegreeSequence& ds, std::uint32_t k,
                          std::uint32_t t, RandomSource& rng);

// Exhaustive-history law of the reset pattern for a fixed self-avoiding
// eta-path: p[mask] = P(A(path; T)) with bit s-1 of mask standing for time
// s. followed[mask] additionally weights each history by the probability
// that the walk reproduces the fixed path, so followed/p is the exact
// conditional path probability given the rewiring history.
struct HistoryLaw {
    std::vector<double> pattern;   // p_t(T), indexed by T mask
    std::vector<double> followed;  // P(X follows path and A(path;T))
};

HistoryLaw exact_history_law(const DegreeSequence& ds, const Configuration& eta,
                             const std::vector<HalfEdge>& path, std::uint32_t k);

// p_t(T) and the followed mass for one fixed pattern T, pruning every
// history branch whose pattern already deviates. Much cheaper than the full
// law when only one T is needed, which makes larger k enumerable.
struct PatternConditional {
    double p_T = 0.0;       // P(A(path; T))
    double followed = 0.0;  // P(X follows path and A(path; T))
};

PatternConditional exact_pattern_conditional(const DegreeSequence& ds,
                                             const Configuration& eta,
                                             const std::vector<HalfEdge>& path,
                                             std::uint32_t k, std::uint32_t t_mask);

// p_t(T) for a canonical (configuration, path) pair found by search.
// Guarded to ell <= 8, t <= 3, k <= 3.
std::vector<double> exact_reset_law(const DegreeSequence& ds, std::uint32_t k,
                                    std::uint32_t t);

// First self-avoiding eta-path of t+1 half-edges, if any.
std::optional<std::vector<HalfEdge>> find_self_avoiding_path(
    const DegreeSequence& ds, const Configuration& eta, std::uint32_t t);

// All self-avoiding segmented paths x_0..x_t in eta w.r.t. T with x_0 = x
// and x_t = y: pairwise non-sibling half-edges, every step at a time not in
// T a legal non-backtracking move in eta. Guarded to ell <= 12, t <= 5.
std::vector<std::vector<HalfEdge>> enumerate_segmented_paths(
    const DegreeSequence& ds, const Configuration& eta, HalfEdge x, HalfEdge y,
    std::uint32_t t, const ResetSet& resets);

// Same, without the endpoint constraint.
std::vector<std::vector<HalfEdge>> enumerate_segmented_paths_from(
    const DegreeSequence& ds, const Configuration& eta, HalfEdge x,
    std::uint32_t t, const ResetSet& resets);

// Exact law P(X_t = y, SA_t | T = resets) of the modified walk, by
// enumeration over all step choices. Index y over H.
std::vector<double> modified_walk_exact_law(const DegreeSequence& ds,
                                            const Configuration& eta, HalfEdge x,
                                            std::uint32_t t, const ResetSet& resets);

// Replica-loop runner: one engine and one visited-vertex stamp array reused
// across replicas, so a replica costs the fresh-pairing shuffle plus
// O(horizon * k). Matches run_joint draw for draw.
class ReplicaRunner {
public:
    ReplicaRunner(const DegreeSequence& ds, std::uint32_t k);

    struct Outcome {
        HalfEdge end = 0;
        std::uint32_t tau = 0;  // valid when tau_set
        bool tau_set = false;
        bool self_avoiding = true;
    };

    // Fresh (eta, x) from Conf_H x U_H.
    Outcome run_fresh(std::uint32_t horizon, RandomSource& rng);
    // Fixed start.
    Outcome run_from(const Configuration& eta, HalfEdge x, std::uint32_t horizon,
                     RandomSource& rng);
    // Fixed-start replica loops: install eta once, then each run restores it
    // with a snapshot copy instead of an edge rebuild.
    void prepare_start(const Configuration& eta);
    Outcome run_prepared(HalfEdge x, std::uint32_t horizon, RandomSource& rng);

private:
    Outcome walk(HalfEdge x, std::uint32_t horizon, RandomSource& rng);

    const DegreeSequence* ds_;
    RewiringEngine engine_;
    std::vector<std::uint32_t> visited_;
    std::uint32_t epoch_ = 0;
};

}  // namespace dcmix
