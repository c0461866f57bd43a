#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

#include "dcmix/experiments.hpp"

namespace dcmix {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

DegreeSequence all_twos(std::uint64_t m) {
    return build_degree_sequence(
        std::vector<std::uint32_t>(static_cast<std::size_t>(m), 2), DegreeMode::R);
}

}  // namespace

CheckResult check_q_against_enumeration(std::uint64_t m, std::uint32_t k,
                                        const QFunction& q) {
    CheckResult res;
    res.name = "Q matches outcome enumeration, m=" + std::to_string(m) +
               " k=" + std::to_string(k);
    const DegreeSequence ds = all_twos(m);
    const auto configs = enumerate_configurations(ds);
    const double outcome_prob =
        1.0 / (static_cast<double>(double_factorial_odd(2 * k)) *
               [&] {
                   double c = 1.0;
                   for (std::uint64_t i = 1; i <= k; ++i)
                       c = c * static_cast<double>(m - k + i) / static_cast<double>(i);
                   return c;
               }());
    double worst = 0.0;
    for (const auto& eta : configs) {
        std::vector<double> row(configs.size(), 0.0);
        for_each_rewire_outcome(eta, k,
                                [&](const Configuration& zeta, std::span<const HalfEdge>) {
                                    row[configuration_index(zeta)] += outcome_prob;
                                });
        for (std::size_t j = 0; j < configs.size(); ++j)
            worst = std::max(worst, std::abs(row[j] - q(eta, configs[j], k, m)));
    }
    res.pass = worst <= 1e-12;
    res.detail = "max |enumerated - Q| = " + fmt(worst);
    return res;
}

CheckResult check_q_row_sums(std::uint64_t m, std::uint32_t k, const QFunction& q) {
    CheckResult res;
    res.name = "Q row sums, m=" + std::to_string(m) + " k=" + std::to_string(k);
    const DegreeSequence ds = all_twos(m);
    const auto configs = enumerate_configurations(ds);
    double worst = 0.0;
    for (const auto& eta : configs) {
        double sum = 0.0;
        for (const auto& zeta : configs) sum += q(eta, zeta, k, m);
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    res.pass = worst <= 1e-12;
    res.detail = "max |row sum - 1| = " + fmt(worst);
    return res;
}

TauReplica default_tau_replica() {
    return [](const DegreeSequence& ds, std::uint32_t k, std::uint32_t horizon,
              RandomSource& rng) -> std::optional<std::uint32_t> {
        ReplicaRunner runner(ds, k);
        const auto out = runner.run_fresh(horizon, rng);
        if (out.tau_set) return out.tau;
        return std::nullopt;
    };
}

CheckResult check_tau_tail(const DegreeSequence& ds, std::uint32_t k,
                           std::uint32_t horizon, std::uint64_t replicas,
                           double tolerance, std::uint64_t seed,
                           const TauReplica& replica) {
    CheckResult res;
    res.name = "tau tail vs (1-alpha)^{t(t+1)/2} at t=" + std::to_string(horizon);
    const double alpha = static_cast<double>(k) / static_cast<double>(ds.edge_count());
    std::uint64_t survived = 0;
    RandomSource rng;
    for (std::uint64_t i = 0; i < replicas; ++i) {
        rng.reseed(derive_seed(seed, 0x7A0, i));
        if (!replica(ds, k, horizon, rng)) ++survived;
    }
    const double observed =
        static_cast<double>(survived) / static_cast<double>(replicas);
    const double expected = std::pow(
        1.0 - alpha, 0.5 * static_cast<double>(horizon) * (horizon + 1.0));
    res.pass = std::abs(observed - expected) <= tolerance;
    res.detail = "observed " + fmt(observed) + " vs theory " + fmt(expected) +
                 " (tol " + fmt(tolerance) + ")";
    return res;
}

namespace {

CheckResult check_q_symmetry() {
    CheckResult res{"Q symmetric over all pairs at ell=6", false, ""};
    const DegreeSequence ds = all_twos(3);
    const auto configs = enumerate_configurations(ds);
    double worst = 0.0;
    for (std::uint32_t k = 2; k <= 3; ++k)
        for (const auto& a : configs)
            for (const auto& b : configs)
                worst = std::max(worst,
                                 std::abs(exact_Q(a, b, k, 3) - exact_Q(b, a, k, 3)));
    res.pass = worst <= 1e-15;
    res.detail = "max |Q(a,b) - Q(b,a)| = " + fmt(worst);
    return res;
}

CheckResult check_irreducibility() {
    CheckResult res{"3-step kernel strictly positive at ell=6, k=2", false, ""};
    const DegreeSequence ds = all_twos(3);
    const auto q = exact_Q_matrix(ds, 2);
    const std::size_t n = q.size();
    // K^3 entrywise.
    std::vector<std::vector<double>> p = q;
    for (int step = 0; step < 2; ++step) {
        std::vector<std::vector<double>> next(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l) {
                if (p[i][l] == 0.0) continue;
                for (std::size_t j = 0; j < n; ++j) next[i][j] += p[i][l] * q[l][j];
            }
        p = std::move(next);
    }
    double min_entry = 1.0;
    for (const auto& row : p)
        for (double v : row) min_entry = std::min(min_entry, v);
    res.pass = min_entry > 0.0;
    res.detail = "min 3-step entry = " + fmt(min_entry);
    return res;
}

CheckResult check_apply_q_stationarity() {
    CheckResult res{"apply_Q: uniform fixed; point mass resampled uniformly at k=m",
                    false, ""};
    const DegreeSequence ds6 = all_twos(3);
    const std::size_t c6 = enumerate_configurations(ds6).size();
    std::vector<double> uni(c6, 1.0 / static_cast<double>(c6));
    const auto mapped = apply_Q(ds6, 2, uni);
    double worst = 0.0;
    for (double v : mapped) worst = std::max(worst, std::abs(v - uni[0]));

    const DegreeSequence ds4 = all_twos(2);
    const std::size_t c4 = enumerate_configurations(ds4).size();
    std::vector<double> point(c4, 0.0);
    point[0] = 1.0;
    const auto resampled = apply_Q(ds4, 2, point);
    for (double v : resampled)
        worst = std::max(worst, std::abs(v - 1.0 / static_cast<double>(c4)));

    res.pass = worst <= 1e-12;
    res.detail = "max deviation = " + fmt(worst);
    return res;
}

CheckResult check_p_doubly_stochastic() {
    CheckResult res{"P doubly stochastic with P(x,y) = P(eta(y),eta(x))", false, ""};
    std::vector<std::uint32_t> degrees;
    RandomSource rng(20260809);
    for (int v = 0; v < 20; ++v) degrees.push_back(3 + rng.next_index(2));
    if ((std::accumulate(degrees.begin(), degrees.end(), 0u)) % 2 != 0)
        degrees[0] += 1;
    const DegreeSequence ds = build_degree_sequence(degrees, DegreeMode::RStar);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
        const auto eta = sample_uniform_configuration(ds, rng);
        const auto p = transition_matrix_P(ds, eta);
        const std::size_t ell = p.size();
        for (std::size_t x = 0; x < ell; ++x) {
            double row = 0.0, col = 0.0;
            for (std::size_t y = 0; y < ell; ++y) {
                row += p[x][y];
                col += p[y][x];
                worst = std::max(worst,
                                 std::abs(p[x][y] - p[eta.pair[y]][eta.pair[x]]));
            }
            worst = std::max({worst, std::abs(row - 1.0), std::abs(col - 1.0)});
        }
    }
    res.pass = worst <= 1e-12;
    res.detail = "max deviation = " + fmt(worst);
    return res;
}

CheckResult check_annealed_stationarity() {
    CheckResult res{"joint kernel preserves U_H marginal at ell=8, k=2, t<=5",
                    false, ""};
    const DegreeSequence ds = all_twos(4);
    JointDistribution d = joint_stationary(ds);
    const double u = 1.0 / 8.0;
    double worst = 0.0;
    for (int t = 1; t <= 5; ++t) {
        d = joint_step(ds, 2, d);
        for (double v : halfedge_marginal(d)) worst = std::max(worst, std::abs(v - u));
    }
    res.pass = worst <= 1e-12;
    res.detail = "max |marginal - 1/8| = " + fmt(worst);
    return res;
}

CheckResult check_exact_vs_monte_carlo() {
    CheckResult res{"Monte Carlo matches exact annealed law at ell=8, t=3", false, ""};
    const DegreeSequence ds = all_twos(4);
    const Configuration eta = configuration_from_index(17, 8);
    const HalfEdge x0 = 2;
    const std::uint32_t t = 3, k = 2;
    const auto exact = exact_annealed_distribution(ds, k, eta, x0, t);

    const std::uint64_t n = 200000;
    RandomSource rng(derive_seed(424242, 0xAB));
    const auto est = estimate_distribution(ds, eta, x0, t, k, n, rng);
    double worst_sigma = 0.0;
    for (std::size_t y = 0; y < exact.size(); ++y) {
        const double p = exact[y];
        const double sigma = std::sqrt(std::max(p * (1 - p) / n, 1e-18));
        const double diff =
            std::abs(static_cast<double>(est.all.counts[y]) / n - p);
        worst_sigma = std::max(worst_sigma, diff / sigma);
    }
    res.pass = worst_sigma <= 3.0;
    res.detail = "max |emp - exact| = " + fmt(worst_sigma) + " sigma";
    return res;
}

CheckResult check_reset_law_invariance() {
    CheckResult res{"reset law identical across configurations and paths (ell=8)",
                    false, ""};
    const DegreeSequence ds = all_twos(4);
    // Two distinct 4-cycle configurations with hand-picked paths.
    Configuration a;
    a.pair = {7, 2, 1, 4, 3, 6, 5, 0};
    Configuration b;
    b.pair = {2, 6, 0, 4, 3, 7, 1, 5};
    const std::vector<HalfEdge> path_a1{0, 6, 4};
    const std::vector<HalfEdge> path_a2{2, 0, 6};
    const std::vector<HalfEdge> path_b{1, 7, 4};

    const auto law1 = exact_history_law(ds, a, path_a1, 2).pattern;
    const auto law2 = exact_history_law(ds, a, path_a2, 2).pattern;
    const auto law3 = exact_history_law(ds, b, path_b, 2).pattern;

    double worst = 0.0, total = 0.0;
    for (std::size_t i = 0; i < law1.size(); ++i) {
        worst = std::max({worst, std::abs(law1[i] - law2[i]),
                          std::abs(law1[i] - law3[i])});
        total += law1[i];
    }
    res.pass = worst <= 1e-12 && std::abs(total - 1.0) <= 1e-12;
    res.detail = "max law difference = " + fmt(worst) + ", sum = " + fmt(total);
    return res;
}

CheckResult check_modified_walk_identity() {
    CheckResult res{"modified-walk law equals segmented-path sum at ell=10, t=3",
                    false, ""};
    const DegreeSequence ds =
        build_degree_sequence({3, 3, 2, 2}, DegreeMode::R);
    Configuration eta;
    eta.pair = {3, 6, 8, 0, 9, 7, 1, 5, 2, 4};
    const HalfEdge x0 = 0;
    const std::uint32_t t = 3;
    double worst = 0.0;
    for (std::uint32_t mask = 0; mask < (1u << t); ++mask) {
        const auto resets = ResetSet::from_mask(mask, t);
        const auto lhs = modified_walk_exact_law(ds, eta, x0, t, resets);
        const double ell_pow =
            std::pow(static_cast<double>(ds.half_edge_count()),
                     -static_cast<double>(resets.times.size()));
        for (HalfEdge y = 0; y < ds.half_edge_count(); ++y) {
            double rhs = 0.0;
            for (const auto& path :
                 enumerate_segmented_paths(ds, eta, x0, y, t, resets)) {
                double w = ell_pow;
                for (std::uint32_t i = 1; i <= t; ++i)
                    if (!(mask & (1u << (i - 1))))
                        w /= static_cast<double>(ds.forward_degree(path[i]));
                rhs += w;
            }
            worst = std::max(worst, std::abs(lhs[y] - rhs));
        }
    }
    res.pass = worst <= 1e-12;
    res.detail = "max |walk law - path sum| = " + fmt(worst);
    return res;
}

CheckResult check_tau_offline() {
    CheckResult res{"tau recomputable offline from trace and trajectory", false, ""};
    std::vector<std::uint32_t> degrees(200, 3);
    const DegreeSequence ds = build_degree_sequence(degrees, DegreeMode::RStar);
    RandomSource rng(777);
    RewiringEngine engine(ds, 10);
    JointRunOptions opts;
    opts.record_trace = true;
    bool ok = true;
    for (int rep = 0; rep < 200 && ok; ++rep) {
        const auto eta = sample_uniform_configuration(ds, rng);
        const HalfEdge x = static_cast<HalfEdge>(rng.next_below(ds.half_edge_count()));
        const auto rec = run_joint(engine, eta, x, 12, rng, opts);
        // first inclusion times from the recorded per-step sets
        std::map<HalfEdge, std::uint32_t> first;
        const auto& steps = engine.trace().per_step();
        for (std::size_t s = 0; s < steps.size(); ++s)
            for (HalfEdge h : steps[s])
                first.emplace(h, static_cast<std::uint32_t>(s + 1));
        std::optional<std::uint32_t> offline;
        for (std::uint32_t s = 1; s <= 12; ++s) {
            const auto it = first.find(rec.trajectory[s - 1]);
            if (it != first.end() && it->second <= s) {
                offline = s;
                break;
            }
        }
        ok = (offline == rec.tau);
    }
    res.pass = ok;
    res.detail = ok ? "200 replicas agreed" : "mismatch found";
    return res;
}

CheckResult check_serialization() {
    CheckResult res{"configuration text round-trip", false, ""};
    const DegreeSequence ds = build_degree_sequence({3, 3, 2, 2, 2}, DegreeMode::R);
    RandomSource rng(99);
    bool ok = true;
    for (int rep = 0; rep < 50 && ok; ++rep) {
        const auto eta = sample_uniform_configuration(ds, rng);
        std::istringstream in(to_text(eta));
        ok = (configuration_from_text(in).pair == eta.pair);
    }
    res.pass = ok;
    res.detail = ok ? "50 round-trips exact" : "round-trip mismatch";
    return res;
}

}  // namespace

VerificationReport run_verification_suite() {
    VerificationReport report;
    const QFunction q = [](const Configuration& a, const Configuration& b,
                           std::uint32_t k, std::uint64_t m) {
        return exact_Q(a, b, k, m);
    };
    report.checks.push_back(check_q_against_enumeration(2, 2, q));
    report.checks.push_back(check_q_against_enumeration(3, 2, q));
    report.checks.push_back(check_q_against_enumeration(3, 3, q));
    report.checks.push_back(check_q_against_enumeration(4, 2, q));
    report.checks.push_back(check_q_symmetry());
    report.checks.push_back(check_q_row_sums(3, 2, q));
    report.checks.push_back(check_q_row_sums(4, 2, q));
    report.checks.push_back(check_irreducibility());
    report.checks.push_back(check_apply_q_stationarity());
    report.checks.push_back(check_p_doubly_stochastic());
    report.checks.push_back(check_annealed_stationarity());
    report.checks.push_back(check_exact_vs_monte_carlo());
    report.checks.push_back(check_reset_law_invariance());
    report.checks.push_back(check_modified_walk_identity());
    report.checks.push_back(check_tau_offline());
    report.checks.push_back(check_serialization());
    {
        std::vector<std::uint32_t> degrees(2000, 3);
        const DegreeSequence ds = build_degree_sequence(degrees, DegreeMode::RStar);
        report.checks.push_back(
            check_tau_tail(ds, 150, 8, 20000, 0.02, 1234, default_tau_replica()));
    }
    return report;
}

}  // namespace dcmix
