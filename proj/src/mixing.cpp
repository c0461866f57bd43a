#include "dcmix/mixing.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcmix {

namespace {

struct Kahan {
    double sum = 0.0, carry = 0.0;
    void add(double x) {
        const double y = x - carry;
        const double t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
};

double check_normalized(std::span<const double> p) {
    Kahan total;
    for (double v : p) total.add(v);
    if (std::abs(total.sum - 1.0) > 1e-9)
        throw std::invalid_argument("distribution not normalized");
    return total.sum;
}

}  // namespace

double tv_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size())
        throw std::invalid_argument("tv_distance: size mismatch");
    check_normalized(p);
    check_normalized(q);
    Kahan acc;
    for (std::size_t i = 0; i < p.size(); ++i) acc.add(std::abs(p[i] - q[i]));
    return 0.5 * acc.sum;
}

double tv_to_uniform(const EmpiricalDistribution& emp) {
    if (emp.n == 0) throw std::invalid_argument("empty empirical distribution");
    const double u = 1.0 / static_cast<double>(emp.counts.size());
    const double inv_n = 1.0 / static_cast<double>(emp.n);
    Kahan acc;
    for (const auto c : emp.counts)
        acc.add(std::abs(static_cast<double>(c) * inv_n - u));
    return 0.5 * acc.sum;
}

EstimateResult estimate_distribution(const DegreeSequence& ds,
                                     const Configuration& eta, HalfEdge x,
                                     std::uint32_t t, std::uint32_t k,
                                     std::uint64_t n_replicas, RandomSource& rng) {
    if (n_replicas == 0) throw std::invalid_argument("need at least one replica");
    const std::size_t ell = static_cast<std::size_t>(ds.half_edge_count());
    EstimateResult res;
    res.all = {std::vector<std::uint64_t>(ell, 0), 0, ConditioningTag::All};
    res.tau_gt = {std::vector<std::uint64_t>(ell, 0), 0, ConditioningTag::TauGt};
    res.tau_le = {std::vector<std::uint64_t>(ell, 0), 0, ConditioningTag::TauLe};

    ReplicaRunner runner(ds, k);
    runner.prepare_start(eta);
    std::uint64_t sa = 0;
    for (std::uint64_t i = 0; i < n_replicas; ++i) {
        const auto out = runner.run_prepared(x, t, rng);
        ++res.all.counts[out.end];
        if (out.tau_set && out.tau <= t)
            ++res.tau_le.counts[out.end];
        else
            ++res.tau_gt.counts[out.end];
        if (out.self_avoiding) ++sa;
    }
    res.all.n = n_replicas;
    std::uint64_t n_le = 0, n_gt = 0;
    for (auto c : res.tau_le.counts) n_le += c;
    for (auto c : res.tau_gt.counts) n_gt += c;
    res.tau_le.n = n_le;
    res.tau_gt.n = n_gt;
    res.sa_rate = static_cast<double>(sa) / static_cast<double>(n_replicas);
    res.p_tau_gt = static_cast<double>(n_gt) / static_cast<double>(n_replicas);
    return res;
}

namespace {

// Walker alias table for multinomial bootstrap resampling.
class AliasTable {
public:
    AliasTable(const std::vector<std::uint64_t>& counts, std::uint64_t total) {
        const std::size_t n = counts.size();
        prob_.resize(n);
        alias_.resize(n);
        std::vector<double> scaled(n);
        for (std::size_t i = 0; i < n; ++i)
            scaled[i] = static_cast<double>(counts[i]) / static_cast<double>(total) *
                        static_cast<double>(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t i = 0; i < n; ++i)
            (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));
        while (!small.empty() && !large.empty()) {
            const auto s = small.back();
            small.pop_back();
            const auto l = large.back();
            prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = (scaled[l] + scaled[s]) - 1.0;
            if (scaled[l] < 1.0) {
                large.pop_back();
                small.push_back(l);
            }
        }
        for (auto i : large) prob_[i] = 1.0;
        for (auto i : small) prob_[i] = 1.0;
    }

    std::uint32_t sample(RandomSource& rng) const {
        const auto i = rng.next_index(static_cast<std::uint32_t>(prob_.size()));
        return rng.next_double() < prob_[i] ? i : alias_[i];
    }

private:
    std::vector<double> prob_;
    std::vector<std::uint32_t> alias_;
};

}  // namespace

TvEstimate debiased_tv(const EmpiricalDistribution& emp, RandomSource& rng,
                       const DebiasOptions& opts) {
    if (emp.n == 0) throw std::invalid_argument("debiased_tv: N = 0");
    const std::size_t ell = emp.counts.size();
    TvEstimate est;
    est.tv_raw = tv_to_uniform(emp);

    // Noise floor: mean raw TV of matched-N samples from exact uniform.
    std::vector<std::uint64_t> scratch(ell);
    EmpiricalDistribution synth{std::vector<std::uint64_t>(), emp.n, emp.tag};
    double base_sum = 0.0, base_sq = 0.0;
    for (int b = 0; b < opts.baseline_reps; ++b) {
        std::fill(scratch.begin(), scratch.end(), 0);
        for (std::uint64_t i = 0; i < emp.n; ++i)
            ++scratch[rng.next_index(static_cast<std::uint32_t>(ell))];
        synth.counts = scratch;
        const double tv = tv_to_uniform(synth);
        base_sum += tv;
        base_sq += tv * tv;
    }
    const double nb = opts.baseline_reps;
    est.baseline = base_sum / nb;
    const double base_var = std::max(0.0, base_sq / nb - est.baseline * est.baseline);

    est.tv_debiased_preclamp = est.tv_raw - est.baseline;
    est.tv_debiased = std::min(1.0, std::max(0.0, est.tv_debiased_preclamp));

    // Sampling variability of tv_raw by multinomial bootstrap.
    const AliasTable alias(emp.counts, emp.n);
    double boot_sum = 0.0, boot_sq = 0.0;
    for (int b = 0; b < opts.bootstrap_reps; ++b) {
        std::fill(scratch.begin(), scratch.end(), 0);
        for (std::uint64_t i = 0; i < emp.n; ++i) ++scratch[alias.sample(rng)];
        synth.counts = scratch;
        const double tv = tv_to_uniform(synth);
        boot_sum += tv;
        boot_sq += tv * tv;
    }
    const double nboot = opts.bootstrap_reps;
    const double boot_mean = boot_sum / nboot;
    const double boot_var = std::max(0.0, boot_sq / nboot - boot_mean * boot_mean);
    est.stderr_value = std::sqrt(boot_var + base_var / nb);
    return est;
}

JointDistribution joint_point_mass(const DegreeSequence& ds,
                                   const Configuration& eta, HalfEdge x) {
    if (ds.half_edge_count() > 8)
        throw std::invalid_argument("exact joint kernel limited to ell <= 8");
    JointDistribution d;
    d.ell = static_cast<std::size_t>(ds.half_edge_count());
    d.n_configs = static_cast<std::size_t>(double_factorial_odd(ds.half_edge_count()));
    d.w.assign(d.n_configs * d.ell, 0.0);
    d.w[configuration_index(eta) * d.ell + x] = 1.0;
    return d;
}

JointDistribution joint_stationary(const DegreeSequence& ds) {
    if (ds.half_edge_count() > 8)
        throw std::invalid_argument("exact joint kernel limited to ell <= 8");
    JointDistribution d;
    d.ell = static_cast<std::size_t>(ds.half_edge_count());
    d.n_configs = static_cast<std::size_t>(double_factorial_odd(ds.half_edge_count()));
    d.w.assign(d.n_configs * d.ell,
               1.0 / (static_cast<double>(d.n_configs) * static_cast<double>(d.ell)));
    return d;
}

JointDistribution joint_step(const DegreeSequence& ds, std::uint32_t k,
                             const JointDistribution& dist) {
    const auto configs = enumerate_configurations(ds);
    if (configs.size() != dist.n_configs)
        throw std::invalid_argument("joint distribution size mismatch");
    const auto q = exact_Q_matrix(ds, k);
    const std::size_t ell = dist.ell;

    JointDistribution out;
    out.ell = ell;
    out.n_configs = dist.n_configs;
    out.w.assign(dist.w.size(), 0.0);

    std::vector<double> mid(ell);
    for (std::size_t zeta = 0; zeta < configs.size(); ++zeta) {
        // Rewire: mix configurations at fixed walker position.
        std::fill(mid.begin(), mid.end(), 0.0);
        for (std::size_t xi = 0; xi < configs.size(); ++xi) {
            const double qv = q[xi][zeta];
            if (qv == 0.0) continue;
            const double* row = &dist.w[xi * ell];
            for (std::size_t y = 0; y < ell; ++y) mid[y] += qv * row[y];
        }
        // Walk one non-backtracking step in zeta.
        double* orow = &out.w[zeta * ell];
        const Configuration& cz = configs[zeta];
        for (std::size_t y = 0; y < ell; ++y) {
            if (mid[y] == 0.0) continue;
            const HalfEdge p = cz.pair[y];
            const Vertex v = ds.vertex_of(p);
            const double w = mid[y] / static_cast<double>(ds.degree(v) - 1);
            for (HalfEdge z = ds.offset(v); z < ds.offset(v) + ds.degree(v); ++z)
                if (z != p) orow[z] += w;
        }
    }
    return out;
}

std::vector<double> halfedge_marginal(const JointDistribution& dist) {
    std::vector<double> out(dist.ell, 0.0);
    for (std::size_t c = 0; c < dist.n_configs; ++c)
        for (std::size_t y = 0; y < dist.ell; ++y) out[y] += dist.w[c * dist.ell + y];
    return out;
}

std::vector<double> exact_annealed_distribution(const DegreeSequence& ds,
                                                std::uint32_t k,
                                                const Configuration& eta,
                                                HalfEdge x, std::uint32_t t) {
    JointDistribution d = joint_point_mass(ds, eta, x);
    for (std::uint32_t s = 0; s < t; ++s) d = joint_step(ds, k, d);
    auto marginal = halfedge_marginal(d);
    double total = 0.0;
    for (double v : marginal) total += v;
    if (std::abs(total - 1.0) > 1e-12)
        throw std::runtime_error("exact_annealed_distribution: mass leak");
    return marginal;
}

double theory_profile(Regime regime, double beta, double c_stat, double c) {
    if (c < 0.0) throw std::invalid_argument("negative abscissa");
    if (beta < 0.0) throw std::invalid_argument("negative beta");
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    switch (regime) {
        case Regime::Supercritical:
            return std::exp(-0.5 * c * c);
        case Regime::Critical:
            if (std::abs(c - c_stat) <= 1e-12 * c_stat) return nan;
            return c < c_stat ? std::exp(-0.5 * beta * c * c) : 0.0;
        case Regime::Subcritical:
            if (std::abs(c - c_stat) <= 1e-12 * c_stat) return nan;
            return c < c_stat ? 1.0 : 0.0;
    }
    return nan;
}

std::pair<double, double> decomposition_bounds(double p_tau_gt,
                                               double tv_given_gt,
                                               double tv_given_le) {
    for (double v : {p_tau_gt, tv_given_gt, tv_given_le})
        if (!(v >= 0.0 && v <= 1.0))
            throw std::invalid_argument("decomposition_bounds: input out of [0,1]");
    const double upper = p_tau_gt * tv_given_gt + (1.0 - p_tau_gt) * tv_given_le;
    const double lower =
        std::max(0.0, p_tau_gt * tv_given_gt - (1.0 - p_tau_gt) * tv_given_le);
    return {lower, upper};
}

std::optional<std::int64_t> mixing_time(std::span<const MixingPoint> profile,
                                        double eps) {
    if (profile.empty()) throw std::invalid_argument("mixing_time: empty profile");
    if (!(eps > 0.0 && eps < 1.0))
        throw std::invalid_argument("mixing_time: eps out of (0,1)");
    for (const auto& pt : profile)
        if (pt.tv_debiased <= eps) return pt.t;
    return std::nullopt;
}

}  // namespace dcmix
