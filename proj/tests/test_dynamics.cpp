#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>

#include "dcmix/dynamics.hpp"
#include "support/stats.hpp"

using namespace dcmix;

TEST_CASE("rewire step basics") {
    const auto ds = build_degree_sequence({3, 3, 2, 2, 2}, DegreeMode::R);
    RandomSource rng(5);
    RewiringEngine engine(ds, 3);
    engine.resample_initial(rng);
    REQUIRE(engine.consistent());

    for (int s = 1; s <= 50; ++s) {
        const auto cut = engine.step(rng);
        CHECK(cut.size() == 6);  // |R_t| = 2k
        for (HalfEdge x : cut) CHECK(engine.rewired_by(x, s));
    }
    CHECK(engine.consistent());  // degree sequence preserved by construction
    CHECK(engine.time() == 50);

    CHECK_THROWS_AS(RewiringEngine(ds, 1), std::invalid_argument);
    CHECK_THROWS_AS(RewiringEngine(ds, 7), std::invalid_argument);
    CHECK_NOTHROW(RewiringEngine(ds, 0));  // disabled mode
}

TEST_CASE("k = m is a full resample: one step reaches uniform") {
    const auto ds = build_degree_sequence({2, 2, 2}, DegreeMode::R);
    RandomSource rng(99);
    RewiringEngine engine(ds, 3);
    const auto eta = sample_uniform_configuration(ds, rng);
    std::vector<std::uint64_t> counts(15, 0);
    const std::uint64_t n = 30000;
    for (std::uint64_t i = 0; i < n; ++i) {
        engine.set_initial(eta);
        engine.step(rng);
        ++counts[configuration_index(engine.config())];
    }
    CHECK(teststats::uniform_chi_square_pvalue(counts, n) > 0.001);
}

TEST_CASE("engine fresh resampling is uniform over matchings") {
    // The half-draw pairing in resample_initial must agree in law with the
    // full-shuffle sampler.
    const auto ds = build_degree_sequence({2, 2, 2}, DegreeMode::R);
    RandomSource rng(31337);
    RewiringEngine engine(ds, 2);
    std::vector<std::uint64_t> counts(15, 0);
    const std::uint64_t n = 30000;
    for (std::uint64_t i = 0; i < n; ++i) {
        engine.resample_initial(rng);
        ++counts[configuration_index(engine.config())];
    }
    CHECK(teststats::uniform_chi_square_pvalue(counts, n) > 0.001);
}

TEST_CASE("exact_Q values") {
    const auto ds4 = build_degree_sequence({2, 2}, DegreeMode::R);
    const auto configs4 = enumerate_configurations(ds4);

    SUBCASE("m=2, k=2: all transitions 1/3") {
        for (const auto& a : configs4)
            for (const auto& b : configs4)
                CHECK(exact_Q(a, b, 2, 2) == doctest::Approx(1.0 / 3).epsilon(1e-15));
    }

    SUBCASE("diagonal is 1/(2k-1)!!") {
        const auto ds6 = build_degree_sequence({2, 2, 2}, DegreeMode::R);
        for (const auto& a : enumerate_configurations(ds6)) {
            CHECK(exact_Q(a, a, 2, 3) == doctest::Approx(1.0 / 3).epsilon(1e-15));
            CHECK(exact_Q(a, a, 3, 3) == doctest::Approx(1.0 / 15).epsilon(1e-15));
        }
    }

    SUBCASE("distance beyond k is unreachable") {
        const auto ds8 = build_degree_sequence({2, 2, 2, 2}, DegreeMode::R);
        const auto configs = enumerate_configurations(ds8);
        int zero_count = 0;
        for (const auto& a : configs)
            for (const auto& b : configs)
                if (hamming_distance(a, b) > 2) {
                    CHECK(exact_Q(a, b, 2, 4) == 0.0);
                    ++zero_count;
                }
        CHECK(zero_count > 0);
    }
}

TEST_CASE("log-space path agrees with exact binomials at large m") {
    // At m > 8 exact_Q switches to lgamma; cross-check against exact
    // integer binomials evaluated directly.
    auto binom = [](std::uint64_t n, std::uint64_t r) {
        if (r > n) return 0.0;
        r = std::min(r, n - r);
        double out = 1.0;
        for (std::uint64_t i = 1; i <= r; ++i)
            out = out * static_cast<double>(n - r + i) / static_cast<double>(i);
        return out;
    };
    const std::uint64_t m = 100;
    const std::uint32_t k = 5;
    const double pairings = 9.0 * 7.0 * 5.0 * 3.0 * 1.0;
    // Build two configurations at hamming distance d by relinking d pairs.
    for (std::uint64_t d = 0; d <= k; ++d) {
        Configuration eta, zeta;
        eta.pair.resize(2 * m);
        zeta.pair.resize(2 * m);
        for (std::uint64_t i = 0; i < m; ++i) {
            eta.pair[2 * i] = static_cast<HalfEdge>(2 * i + 1);
            eta.pair[2 * i + 1] = static_cast<HalfEdge>(2 * i);
        }
        zeta.pair = eta.pair;
        // Rotate the partners of the first d+1 pairs (d >= 1 changes d+1 edges,
        // so relink a cycle over d edges needs d >= 2; use swap chains).
        if (d >= 2) {
            std::vector<HalfEdge> left(d), right(d);
            for (std::uint64_t i = 0; i < d; ++i) {
                left[i] = static_cast<HalfEdge>(2 * i);
                right[i] = static_cast<HalfEdge>(2 * i + 1);
            }
            for (std::uint64_t i = 0; i < d; ++i) {
                const HalfEdge a = left[i];
                const HalfEdge b = right[(i + 1) % d];
                zeta.pair[a] = b;
                zeta.pair[b] = a;
            }
        }
        const std::uint64_t dist = hamming_distance(eta, zeta);
        const double expected =
            binom(m - dist, k - dist) / binom(m, k) / pairings;
        CHECK(exact_Q(eta, zeta, k, m) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("one-step simulation frequencies match the exact row") {
    const auto ds = build_degree_sequence({2, 2, 2}, DegreeMode::R);
    const auto configs = enumerate_configurations(ds);
    RandomSource rng(2024);
    RewiringEngine engine(ds, 2);
    const Configuration& eta = configs[7];
    const std::uint64_t n = 100000;
    std::vector<std::uint64_t> counts(configs.size(), 0);
    for (std::uint64_t i = 0; i < n; ++i) {
        engine.set_initial(eta);
        engine.step(rng);
        ++counts[configuration_index(engine.config())];
    }
    for (std::size_t j = 0; j < configs.size(); ++j) {
        const double p = exact_Q(eta, configs[j], 2, 3);
        const double se = std::sqrt(p * (1 - p) / static_cast<double>(n));
        CHECK(std::abs(static_cast<double>(counts[j]) / n - p) <= 3.0 * se + 1e-12);
    }
}

TEST_CASE("apply_Q") {
    const auto ds = build_degree_sequence({2, 2, 2}, DegreeMode::R);
    const std::size_t nc = 15;

    SUBCASE("uniform is stationary") {
        std::vector<double> uni(nc, 1.0 / nc);
        const auto out = apply_Q(ds, 2, uni);
        for (double v : out) CHECK(v == doctest::Approx(1.0 / nc).epsilon(1e-12));
    }

    SUBCASE("row sums are 1 for k in {2,3}") {
        for (std::uint32_t k = 2; k <= 3; ++k) {
            const auto q = exact_Q_matrix(ds, k);
            for (const auto& row : q) {
                double sum = 0.0;
                for (double v : row) sum += v;
                CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
            }
        }
    }

    SUBCASE("size guard") {
        const auto big = build_degree_sequence({2, 2, 2, 2, 2}, DegreeMode::R);
        std::vector<double> dist(945, 1.0 / 945);
        CHECK_THROWS_AS(apply_Q(big, 2, dist), std::invalid_argument);
    }
}

TEST_CASE("first-rewire timestamps reconstructible from recorded steps") {
    const auto ds = build_degree_sequence({3, 3, 3, 3, 2, 2}, DegreeMode::R);
    RandomSource rng(8);
    RewiringEngine engine(ds, 2);
    engine.resample_initial(rng);
    engine.trace().set_recording(true);
    for (int s = 0; s < 30; ++s) engine.step(rng);

    const auto& steps = engine.trace().per_step();
    REQUIRE(steps.size() == 30);
    std::map<HalfEdge, std::uint32_t> first;
    for (std::size_t s = 0; s < steps.size(); ++s)
        for (HalfEdge x : steps[s])
            first.emplace(x, static_cast<std::uint32_t>(s + 1));

    for (HalfEdge x = 0; x < ds.half_edge_count(); ++x) {
        const auto t = engine.trace().first_rewire(x);
        const auto it = first.find(x);
        if (it == first.end()) {
            CHECK(!t.has_value());
        } else {
            REQUIRE(t.has_value());
            CHECK(*t == it->second);
        }
    }
}
