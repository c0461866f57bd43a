#include "dcmix/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace dcmix {

RewiringEngine::RewiringEngine(const DegreeSequence& ds, std::uint32_t k)
    : ds_(&ds), k_(k) {
    const std::uint64_t m = ds.edge_count();
    if (k != 0 && (k < 2 || k > m))
        throw std::invalid_argument("k must be 0 (disabled) or in [2, m]");
    trace_.init(static_cast<std::size_t>(ds.half_edge_count()));
    cut_.resize(2 * static_cast<std::size_t>(k));
}

void RewiringEngine::set_initial(const Configuration& eta) {
    if (eta.size() != ds_->half_edge_count())
        throw std::invalid_argument("configuration size mismatch");
    config_ = eta;
    rebuild_edges();
    trace_.reset();
    trace_.clear_steps();
    time_ = 0;
}

void RewiringEngine::resample_initial(RandomSource& rng) {
    // Uniform matching with ell/2 bounded draws: pair the first unmatched
    // entry with a uniform choice among the rest. Same law as the full
    // shuffle, half the generator work; this loop dominates replica cost.
    const std::size_t ell = static_cast<std::size_t>(ds_->half_edge_count());
    if (order_.size() != ell) {
        order_.resize(ell);
        config_.pair.resize(ell);
        edges_.resize(ell / 2);
    }
    // Re-seed the scratch with the identity so the draw depends only on the
    // rng state, not on residue from earlier replicas (workers process
    // batches in arbitrary order).
    HalfEdge* order = order_.data();
    for (std::size_t i = 0; i < ell; ++i) order[i] = static_cast<HalfEdge>(i);
    for (std::size_t i = 0; i < ell; i += 2) {
        const std::size_t j = i + 1 + rng.next_below(ell - i - 1);
        std::swap(order[i + 1], order[j]);
        const HalfEdge a = order[i], b = order[i + 1];
        config_.pair[a] = b;
        config_.pair[b] = a;
        edges_[i / 2] = {a, b};
    }
    trace_.reset();
    trace_.clear_steps();
    time_ = 0;
}

void RewiringEngine::rebuild_edges() {
    edges_.resize(static_cast<std::size_t>(ds_->edge_count()));
    std::size_t i = 0;
    for (HalfEdge x = 0; x < config_.size(); ++x)
        if (x < config_.pair[x]) edges_[i++] = {x, config_.pair[x]};
}

void RewiringEngine::capture_baseline() {
    baseline_config_ = config_;
    baseline_edges_ = edges_;
}

void RewiringEngine::restore_baseline() {
    if (baseline_config_.size() != ds_->half_edge_count())
        throw std::logic_error("restore_baseline without capture_baseline");
    config_.pair.assign(baseline_config_.pair.begin(), baseline_config_.pair.end());
    edges_.assign(baseline_edges_.begin(), baseline_edges_.end());
    trace_.reset();
    trace_.clear_steps();
    time_ = 0;
}

std::span<const HalfEdge> RewiringEngine::step(RandomSource& rng) {
    if (k_ == 0)
        throw std::logic_error("rewiring disabled (k = 0)");
    if (time_ >= 65533)
        throw std::logic_error("rewiring horizon cap (65533 steps) exceeded");
    const std::size_t m = edges_.size();
    ++time_;

    // Uniform k-subset without replacement into the prefix.
    for (std::size_t i = 0; i < k_; ++i) {
        const std::size_t j = i + rng.next_below(m - i);
        std::swap(edges_[i], edges_[j]);
        cut_[2 * i] = edges_[i][0];
        cut_[2 * i + 1] = edges_[i][1];
    }

    // Uniform re-pairing of the 2k cut half-edges: match the first open
    // slot with a uniform choice among the remaining ones.
    for (std::size_t i = 0; i < k_; ++i) {
        const std::size_t j = 2 * i + 1 + rng.next_below(2 * (k_ - i) - 1);
        std::swap(cut_[2 * i + 1], cut_[j]);
        const HalfEdge a = cut_[2 * i], b = cut_[2 * i + 1];
        config_.pair[a] = b;
        config_.pair[b] = a;
        edges_[i] = {a, b};
        trace_.record(a, time_);
        trace_.record(b, time_);
    }
    if (trace_.recording())
        trace_.record_step(std::vector<HalfEdge>(cut_.begin(), cut_.end()));
    return {cut_.data(), cut_.size()};
}

bool RewiringEngine::consistent() const {
    if (edges_.size() != ds_->edge_count()) return false;
    std::vector<bool> seen(config_.size(), false);
    for (const auto& e : edges_) {
        if (config_.pair[e[0]] != e[1] || config_.pair[e[1]] != e[0]) return false;
        if (seen[e[0]] || seen[e[1]] || e[0] == e[1]) return false;
        seen[e[0]] = seen[e[1]] = true;
    }
    return config_.valid();
}

namespace {

double log_binomial(std::uint64_t n, std::uint64_t r) {
    return std::lgamma(static_cast<double>(n) + 1.0) -
           std::lgamma(static_cast<double>(r) + 1.0) -
           std::lgamma(static_cast<double>(n - r) + 1.0);
}

std::uint64_t binomial_u64(std::uint64_t n, std::uint64_t r) {
    if (r > n) return 0;
    r = std::min(r, n - r);
    std::uint64_t out = 1;
    for (std::uint64_t i = 1; i <= r; ++i) out = out * (n - r + i) / i;
    return out;
}

}  // namespace

double exact_Q(const Configuration& eta, const Configuration& zeta,
               std::uint32_t k, std::uint64_t m) {
    if (eta.size() != zeta.size() || eta.size() != 2 * m)
        throw std::invalid_argument("exact_Q: configuration/m mismatch");
    if (k < 2 || k > m) throw std::invalid_argument("exact_Q: k out of [2, m]");
    const std::uint64_t d = hamming_distance(eta, zeta);
    if (d > k) return 0.0;
    if (m <= 8) {
        const double pairings = static_cast<double>(double_factorial_odd(2 * k));
        const double choose = static_cast<double>(binomial_u64(m - d, k - d)) /
                              static_cast<double>(binomial_u64(m, k));
        return choose / pairings;
    }
    const double log_pairings =
        std::lgamma(2.0 * k + 1.0) - k * std::log(2.0) - std::lgamma(k + 1.0);
    const double lq = log_binomial(m - d, k - d) - log_binomial(m, k) - log_pairings;
    return std::exp(lq);
}

namespace {

void pairings_rec(std::vector<HalfEdge>& items, std::size_t begin,
                  Configuration& conf, std::span<const HalfEdge> cut,
                  const std::function<void(const Configuration&,
                                           std::span<const HalfEdge>)>& fn) {
    if (begin == items.size()) {
        fn(conf, cut);
        return;
    }
    const HalfEdge first = items[begin];
    for (std::size_t i = begin + 1; i < items.size(); ++i) {
        std::swap(items[begin + 1], items[i]);
        const HalfEdge partner = items[begin + 1];
        conf.pair[first] = partner;
        conf.pair[partner] = first;
        pairings_rec(items, begin + 2, conf, cut, fn);
        std::swap(items[begin + 1], items[i]);
    }
}

void subsets_rec(const std::vector<std::array<HalfEdge, 2>>& edges,
                 std::size_t next, std::uint32_t remaining,
                 std::vector<HalfEdge>& cut, Configuration& conf,
                 const std::function<void(const Configuration&,
                                          std::span<const HalfEdge>)>& fn) {
    if (remaining == 0) {
        std::vector<HalfEdge> items = cut;
        pairings_rec(items, 0, conf, {cut.data(), cut.size()}, fn);
        // Restore the pairs of the chosen edges.
        for (std::size_t i = 0; i + 1 < cut.size(); i += 2) {
            conf.pair[cut[i]] = cut[i + 1];
            conf.pair[cut[i + 1]] = cut[i];
        }
        return;
    }
    if (edges.size() - next < remaining) return;
    // Include edges[next].
    cut.push_back(edges[next][0]);
    cut.push_back(edges[next][1]);
    subsets_rec(edges, next + 1, remaining - 1, cut, conf, fn);
    cut.pop_back();
    cut.pop_back();
    // Skip edges[next].
    subsets_rec(edges, next + 1, remaining, cut, conf, fn);
}

}  // namespace

void for_each_rewire_outcome(
    const Configuration& eta, std::uint32_t k,
    const std::function<void(const Configuration&, std::span<const HalfEdge>)>& fn) {
    std::vector<std::array<HalfEdge, 2>> edges;
    for (HalfEdge x = 0; x < eta.size(); ++x)
        if (x < eta.pair[x]) edges.push_back({x, eta.pair[x]});
    if (k < 2 || k > edges.size())
        throw std::invalid_argument("for_each_rewire_outcome: k out of [2, m]");
    Configuration work = eta;
    std::vector<HalfEdge> cut;
    subsets_rec(edges, 0, k, cut, work, fn);
}

std::vector<std::vector<double>> exact_Q_matrix(const DegreeSequence& ds,
                                                std::uint32_t k) {
    if (ds.half_edge_count() > 8)
        throw std::invalid_argument("exact kernel limited to ell <= 8");
    const auto configs = enumerate_configurations(ds);
    const std::uint64_t m = ds.edge_count();
    std::vector<std::vector<double>> q(configs.size(),
                                       std::vector<double>(configs.size()));
    for (std::size_t i = 0; i < configs.size(); ++i)
        for (std::size_t j = 0; j < configs.size(); ++j)
            q[i][j] = exact_Q(configs[i], configs[j], k, m);
    return q;
}

std::vector<double> apply_Q(const DegreeSequence& ds, std::uint32_t k,
                            const std::vector<double>& dist) {
    const auto q = exact_Q_matrix(ds, k);
    if (dist.size() != q.size())
        throw std::invalid_argument("apply_Q: distribution size mismatch");
    std::vector<double> out(dist.size(), 0.0);
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist[i] == 0.0) continue;
        for (std::size_t j = 0; j < dist.size(); ++j)
            out[j] += dist[i] * q[i][j];
    }
    return out;
}

}  // namespace dcmix
