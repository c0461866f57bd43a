#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "dcmix/halfedge.hpp"

namespace dcmix {

// First-rewire timestamps realizing R_t and R_{<=t}. Entries are epoch
// stamped (16-bit epoch, 16-bit time) so reset() is O(1); replica loops
// reuse one trace across millions of runs, clearing only when the epoch
// counter wraps. Horizons are capped at 65534 steps.
class RewiringTrace {
public:
    void init(std::size_t ell) {
        stamp_.assign(ell, 0);
        epoch_ = 1;
    }

    void reset() {
        if (++epoch_ == 0) {
            std::fill(stamp_.begin(), stamp_.end(), 0);
            epoch_ = 1;
        }
    }

    void record(HalfEdge x, std::uint32_t time) {
        if ((stamp_[x] >> 16) != epoch_)
            stamp_[x] = (static_cast<std::uint32_t>(epoch_) << 16) | (time + 1);
    }

    // x in R_{<=s}  <=>  first_rewire(x) <= s.
    bool rewired_by(HalfEdge x, std::uint32_t s) const {
        const std::uint32_t e = stamp_[x];
        return (e >> 16) == epoch_ && (e & 0xffffu) <= s + 1;
    }

    // First inclusion time, or nullopt if never rewired.
    std::optional<std::uint32_t> first_rewire(HalfEdge x) const {
        const std::uint32_t e = stamp_[x];
        if ((e >> 16) != epoch_) return std::nullopt;
        return (e & 0xffffu) - 1;
    }

    void set_recording(bool on) { recording_ = on; }
    bool recording() const { return recording_; }
    void record_step(std::vector<HalfEdge> r) { per_step_.push_back(std::move(r)); }
    void clear_steps() { per_step_.clear(); }
    const std::vector<std::vector<HalfEdge>>& per_step() const { return per_step_; }

private:
    std::vector<std::uint32_t> stamp_;
    std::uint16_t epoch_ = 1;
    bool recording_ = false;
    std::vector<std::vector<HalfEdge>> per_step_;
};

// The k-edge rewiring chain on configurations. Each step picks k current
// edges uniformly without replacement (partial Fisher-Yates on the edge
// array prefix) and re-pairs their 2k half-edges uniformly; O(k) per step.
// The configuration array is the source of truth, the edge array mirrors it.
class RewiringEngine {
public:
    // k = 0 disables rewiring (test mode); otherwise 2 <= k <= m.
    RewiringEngine(const DegreeSequence& ds, std::uint32_t k);

    void set_initial(const Configuration& eta);
    void resample_initial(RandomSource& rng);

    // Snapshot the current initial state so replica loops from a fixed
    // configuration restore it with two memcpys instead of an edge rebuild.
    void capture_baseline();
    void restore_baseline();

    // One rewiring step; advances time and returns R_t (2k half-edges).
    std::span<const HalfEdge> step(RandomSource& rng);

    const DegreeSequence& degree_sequence() const { return *ds_; }
    const Configuration& config() const { return config_; }
    HalfEdge pair_of(HalfEdge x) const { return config_.pair[x]; }
    std::uint32_t k() const { return k_; }
    std::uint32_t time() const { return time_; }
    const RewiringTrace& trace() const { return trace_; }
    RewiringTrace& trace() { return trace_; }
    const std::vector<std::array<HalfEdge, 2>>& edges() const { return edges_; }

    bool rewired_by(HalfEdge x, std::uint32_t s) const {
        return trace_.rewired_by(x, s);
    }

    // Edge array consistent with the configuration: every pair appears once.
    bool consistent() const;

private:
    void rebuild_edges();

    const DegreeSequence* ds_;
    Configuration config_;
    std::vector<std::array<HalfEdge, 2>> edges_;
    std::vector<HalfEdge> cut_;    // scratch, 2k
    std::vector<HalfEdge> order_;  // scratch for resample_initial
    Configuration baseline_config_;
    std::vector<std::array<HalfEdge, 2>> baseline_edges_;
    std::uint32_t k_ = 0;
    std::uint32_t time_ = 0;
    RewiringTrace trace_;
};

// Transition kernel of the rewiring chain, Q(eta, zeta): zero when the
// Hamming distance exceeds k, otherwise
//   [1/(2k-1)!!] * C(m-d, k-d) / C(m, k)      with d = d_Ham(eta, zeta).
// Exact integer arithmetic for m <= 8, log-space beyond.
double exact_Q(const Configuration& eta, const Configuration& zeta,
               std::uint32_t k, std::uint64_t m);

// Enumerates all C(m,k) * (2k-1)!! equally likely one-step outcomes from
// eta: every k-subset of edges crossed with every pairing of the cut
// half-edges. Independent of exact_Q; this is the oracle it is tested
// against. The visitor also receives the cut set (the R_t of that branch).
void for_each_rewire_outcome(
    const Configuration& eta, std::uint32_t k,
    const std::function<void(const Configuration&, std::span<const HalfEdge>)>& fn);

// One exact kernel step on a distribution over Conf_H, indexed in
// enumeration order. Guarded to ell <= 8.
std::vector<double> apply_Q(const DegreeSequence& ds, std::uint32_t k,
                            const std::vector<double>& dist);

// Dense kernel matrix in enumeration order (ell <= 8).
std::vector<std::vector<double>> exact_Q_matrix(const DegreeSequence& ds,
                                                std::uint32_t k);

}  // namespace dcmix
