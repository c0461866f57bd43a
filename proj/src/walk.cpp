#include "dcmix/walk.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace dcmix {

HalfEdge nbrw_step(const DegreeSequence& ds, const Configuration& config,
                   HalfEdge x, RandomSource& rng) {
    const HalfEdge y = config.pair[x];
    const Vertex v = ds.vertex_of(y);
    const std::uint32_t d = ds.degree(v);
    if (d < 2) throw std::logic_error("nbrw_step: degree-1 target");
    const HalfEdge base = ds.offset(v);
    const std::uint32_t j = rng.next_index(d - 1);
    HalfEdge cand = base + j;
    if (cand >= y) ++cand;
    return cand;
}

std::vector<std::vector<double>> transition_matrix_P(const DegreeSequence& ds,
                                                     const Configuration& config) {
    const std::size_t ell = static_cast<std::size_t>(ds.half_edge_count());
    if (ell > 2000)
        throw std::invalid_argument("transition_matrix_P limited to ell <= 2000");
    std::vector<std::vector<double>> p(ell, std::vector<double>(ell, 0.0));
    for (HalfEdge x = 0; x < ell; ++x) {
        const HalfEdge y = config.pair[x];
        const Vertex v = ds.vertex_of(y);
        const double w = 1.0 / (ds.degree(v) - 1);
        for (HalfEdge z = ds.offset(v); z < ds.offset(v) + ds.degree(v); ++z)
            if (z != y) p[x][z] = w;
    }
    return p;
}

WalkRecord run_joint(RewiringEngine& engine, const Configuration& eta,
                     HalfEdge x, std::uint32_t horizon, RandomSource& rng,
                     const JointRunOptions& opts) {
    const DegreeSequence& ds = engine.degree_sequence();
    if (x >= ds.half_edge_count()) throw std::invalid_argument("start out of range");
    engine.set_initial(eta);
    engine.trace().set_recording(opts.record_trace);

    WalkRecord rec;
    rec.trajectory.reserve(horizon + 1);
    rec.trajectory.push_back(x);
    rec.visited_vertices.push_back(ds.vertex_of(x));

    std::vector<bool> visited(ds.vertex_count(), false);
    visited[ds.vertex_of(x)] = true;

    HalfEdge cur = x;
    for (std::uint32_t s = 1; s <= horizon; ++s) {
        if (opts.rewire) {
            engine.step(rng);
            if (!rec.tau && engine.rewired_by(cur, s)) rec.tau = s;
        }
        cur = nbrw_step(ds, engine.config(), cur, rng);
        rec.trajectory.push_back(cur);
        const Vertex v = ds.vertex_of(cur);
        if (visited[v]) {
            rec.self_avoiding = false;
        } else {
            visited[v] = true;
            rec.visited_vertices.push_back(v);
        }
    }
    return rec;
}

WalkRecord run_joint(const DegreeSequence& ds, const Configuration& eta,
                     HalfEdge x, std::uint32_t horizon, std::uint32_t k,
                     RandomSource& rng, const JointRunOptions& opts) {
    RewiringEngine engine(ds, opts.rewire ? k : 0);
    return run_joint(engine, eta, x, horizon, rng, opts);
}

WalkRecord run_static(const DegreeSequence& ds, const Configuration& eta,
                      HalfEdge x, std::uint32_t horizon, RandomSource& rng) {
    JointRunOptions opts;
    opts.rewire = false;
    return run_joint(ds, eta, x, horizon, 0, rng, opts);
}

WalkRecord run_modified(const DegreeSequence& ds, const Configuration& eta,
                        HalfEdge x, std::uint32_t horizon, const ResetSet& resets,
                        RandomSource& rng) {
    if (resets.horizon != horizon)
        throw std::invalid_argument("reset set horizon mismatch");
    const std::uint32_t mask = resets.mask();

    WalkRecord rec;
    rec.trajectory.reserve(horizon + 1);
    rec.trajectory.push_back(x);
    rec.visited_vertices.push_back(ds.vertex_of(x));
    std::vector<bool> visited(ds.vertex_count(), false);
    visited[ds.vertex_of(x)] = true;

    HalfEdge cur = x;
    for (std::uint32_t s = 1; s <= horizon; ++s) {
        if (mask & (1u << (s - 1)))
            cur = static_cast<HalfEdge>(rng.next_below(ds.half_edge_count()));
        else
            cur = nbrw_step(ds, eta, cur, rng);
        rec.trajectory.push_back(cur);
        const Vertex v = ds.vertex_of(cur);
        if (visited[v]) {
            rec.self_avoiding = false;
        } else {
            visited[v] = true;
            rec.visited_vertices.push_back(v);
        }
    }
    return rec;
}

ResetSet sample_reset_set(const DegreeSequence& ds, std::uint32_t k,
                          std::uint32_t t, RandomSource& rng) {
    if (t >= 31) throw std::invalid_argument("sample_reset_set: t too large");
    RewiringEngine engine(ds, k);
    const bool rewire = k != 0;
    std::vector<bool> visited(ds.vertex_count());
    std::uint64_t attempts = 0, rejects = 0;
    for (;;) {
        ++attempts;
        engine.resample_initial(rng);
        std::fill(visited.begin(), visited.end(), false);
        HalfEdge cur = static_cast<HalfEdge>(rng.next_below(ds.half_edge_count()));
        visited[ds.vertex_of(cur)] = true;
        std::uint32_t mask = 0;
        bool ok = true;
        for (std::uint32_t s = 1; s <= t; ++s) {
            if (rewire) {
                engine.step(rng);
                if (engine.rewired_by(cur, s)) mask |= 1u << (s - 1);
            }
            const HalfEdge y = engine.pair_of(cur);
            const Vertex v = ds.vertex_of(y);
            if (visited[v]) {
                ok = false;
                break;
            }
            visited[v] = true;
            // First-sibling rule: smallest half-edge of v(y) other than y.
            const HalfEdge base = ds.offset(v);
            cur = (base == y) ? base + 1 : base;
        }
        if (ok) return ResetSet::from_mask(mask, t);
        ++rejects;
        if (attempts >= 64 && 2 * rejects > attempts)
            throw std::runtime_error(
                "sample_reset_set: rejection rate above 50% (t too large for ell)");
    }
}

namespace {

struct HistoryEnumerator {
    const DegreeSequence& ds;
    const std::vector<HalfEdge>& path;
    std::uint32_t k;
    std::uint32_t t;
    double leaf_prob;
    HistoryLaw law;
    // First-rewire times, 0 = never.
    std::vector<std::uint32_t> first;

    void recurse(const Configuration& conf, std::uint32_t s, std::uint32_t mask,
                 double follow_weight) {
        if (s > t) {
            law.pattern[mask] += leaf_prob;
            law.followed[mask] += leaf_prob * follow_weight;
            return;
        }
        for_each_rewire_outcome(
            conf, k,
            [&](const Configuration& next, std::span<const HalfEdge> cut) {
                std::vector<std::uint32_t> saved;
                saved.reserve(cut.size());
                for (HalfEdge x : cut) {
                    saved.push_back(first[x]);
                    if (first[x] == 0) first[x] = s;
                }
                std::uint32_t m2 = mask;
                const HalfEdge prev = path[s - 1];
                if (first[prev] != 0 && first[prev] <= s) m2 |= 1u << (s - 1);
                double w2 = follow_weight;
                if (w2 > 0.0) {
                    const HalfEdge y = next.pair[prev];
                    const HalfEdge target = path[s];
                    if (target != y && ds.vertex_of(target) == ds.vertex_of(y))
                        w2 /= static_cast<double>(ds.degree(ds.vertex_of(y)) - 1);
                    else
                        w2 = 0.0;
                }
                recurse(next, s + 1, m2, w2);
                for (std::size_t i = 0; i < cut.size(); ++i)
                    first[cut[i]] = saved[i];
            });
    }
};

}  // namespace

HistoryLaw exact_history_law(const DegreeSequence& ds, const Configuration& eta,
                             const std::vector<HalfEdge>& path, std::uint32_t k) {
    if (path.empty()) throw std::invalid_argument("empty path");
    const auto t = static_cast<std::uint32_t>(path.size() - 1);
    const std::uint64_t m = ds.edge_count();
    if (k < 2 || k > m) throw std::invalid_argument("k out of [2, m]");
    const double per_step =
        static_cast<double>(double_factorial_odd(2 * k)) *
        static_cast<double>([&] {
            std::uint64_t c = 1;
            for (std::uint64_t i = 1; i <= k; ++i) c = c * (m - k + i) / i;
            return c;
        }());
    const double total = std::pow(per_step, static_cast<double>(t));
    if (total > 4e7)
        throw std::invalid_argument("exact_history_law: history space too large");

    HistoryEnumerator en{ds, path, k, t, 1.0 / total, HistoryLaw{}, {}};
    en.law.pattern.assign(std::size_t{1} << t, 0.0);
    en.law.followed.assign(std::size_t{1} << t, 0.0);
    en.first.assign(static_cast<std::size_t>(ds.half_edge_count()), 0);
    en.recurse(eta, 1, 0, 1.0);
    return en.law;
}

namespace {

struct PatternEnumerator {
    const DegreeSequence& ds;
    const std::vector<HalfEdge>& path;
    std::uint32_t k;
    std::uint32_t t;
    std::uint32_t target_mask;
    double leaf_prob;
    PatternConditional out;
    std::vector<std::uint32_t> first;

    void recurse(const Configuration& conf, std::uint32_t s, double follow_weight) {
        if (s > t) {
            out.p_T += leaf_prob;
            out.followed += leaf_prob * follow_weight;
            return;
        }
        for_each_rewire_outcome(
            conf, k,
            [&](const Configuration& next, std::span<const HalfEdge> cut) {
                std::vector<std::uint32_t> saved;
                saved.reserve(cut.size());
                for (HalfEdge x : cut) {
                    saved.push_back(first[x]);
                    if (first[x] == 0) first[x] = s;
                }
                const HalfEdge prev = path[s - 1];
                const bool rewired = first[prev] != 0 && first[prev] <= s;
                const bool want = (target_mask >> (s - 1)) & 1u;
                if (rewired == want) {
                    double w2 = follow_weight;
                    if (w2 > 0.0) {
                        const HalfEdge y = next.pair[prev];
                        const HalfEdge target = path[s];
                        if (target != y && ds.vertex_of(target) == ds.vertex_of(y))
                            w2 /= static_cast<double>(ds.degree(ds.vertex_of(y)) - 1);
                        else
                            w2 = 0.0;
                    }
                    recurse(next, s + 1, w2);
                }
                for (std::size_t i = 0; i < cut.size(); ++i)
                    first[cut[i]] = saved[i];
            });
    }
};

}  // namespace

PatternConditional exact_pattern_conditional(const DegreeSequence& ds,
                                             const Configuration& eta,
                                             const std::vector<HalfEdge>& path,
                                             std::uint32_t k, std::uint32_t t_mask) {
    if (path.empty()) throw std::invalid_argument("empty path");
    const auto t = static_cast<std::uint32_t>(path.size() - 1);
    const std::uint64_t m = ds.edge_count();
    if (k < 2 || k > m) throw std::invalid_argument("k out of [2, m]");
    double per_step = static_cast<double>(double_factorial_odd(2 * k));
    {
        double c = 1.0;
        for (std::uint64_t i = 1; i <= k; ++i)
            c = c * static_cast<double>(m - k + i) / static_cast<double>(i);
        per_step *= c;
    }
    if (std::pow(per_step, static_cast<double>(t)) > 4e7)
        throw std::invalid_argument("exact_pattern_conditional: history space too large");

    PatternEnumerator en{ds, path, k, t, t_mask,
                         1.0 / std::pow(per_step, static_cast<double>(t)),
                         PatternConditional{}, {}};
    en.first.assign(static_cast<std::size_t>(ds.half_edge_count()), 0);
    en.recurse(eta, 1, 1.0);
    return en.out;
}

std::optional<std::vector<HalfEdge>> find_self_avoiding_path(
    const DegreeSequence& ds, const Configuration& eta, std::uint32_t t) {
    std::vector<HalfEdge> path;
    std::vector<bool> visited(ds.vertex_count(), false);

    std::function<bool(HalfEdge, std::uint32_t)> extend =
        [&](HalfEdge cur, std::uint32_t depth) -> bool {
        if (depth == t) return true;
        const HalfEdge y = eta.pair[cur];
        const Vertex v = ds.vertex_of(y);
        if (visited[v]) return false;
        for (HalfEdge z = ds.offset(v); z < ds.offset(v) + ds.degree(v); ++z) {
            if (z == y) continue;
            visited[v] = true;
            path.push_back(z);
            if (extend(z, depth + 1)) return true;
            path.pop_back();
            visited[v] = false;
        }
        return false;
    };

    for (HalfEdge x = 0; x < ds.half_edge_count(); ++x) {
        path.assign(1, x);
        std::fill(visited.begin(), visited.end(), false);
        visited[ds.vertex_of(x)] = true;
        if (extend(x, 0)) return path;
    }
    return std::nullopt;
}

std::vector<double> exact_reset_law(const DegreeSequence& ds, std::uint32_t k,
                                    std::uint32_t t) {
    if (ds.half_edge_count() > 8 || t > 3 || k > 3)
        throw std::invalid_argument("exact_reset_law limited to ell <= 8, t <= 3, k <= 3");
    for (const auto& eta : enumerate_configurations(ds)) {
        if (auto path = find_self_avoiding_path(ds, eta, t))
            return exact_history_law(ds, eta, *path, k).pattern;
    }
    throw std::runtime_error("exact_reset_law: no self-avoiding path of length t");
}

namespace {

void segmented_rec(const DegreeSequence& ds, const Configuration& eta,
                   std::uint32_t t, std::uint32_t mask,
                   std::optional<HalfEdge> endpoint, std::vector<HalfEdge>& path,
                   std::vector<bool>& visited,
                   std::vector<std::vector<HalfEdge>>& out) {
    const auto i = static_cast<std::uint32_t>(path.size() - 1);
    if (i == t) {
        if (!endpoint || path.back() == *endpoint) out.push_back(path);
        return;
    }
    const std::uint32_t s = i + 1;
    auto try_extend = [&](HalfEdge z) {
        const Vertex v = ds.vertex_of(z);
        if (visited[v]) return;
        visited[v] = true;
        path.push_back(z);
        segmented_rec(ds, eta, t, mask, endpoint, path, visited, out);
        path.pop_back();
        visited[v] = false;
    };
    if (mask & (1u << (s - 1))) {
        for (HalfEdge z = 0; z < ds.half_edge_count(); ++z) try_extend(z);
    } else {
        const HalfEdge y = eta.pair[path.back()];
        const Vertex v = ds.vertex_of(y);
        for (HalfEdge z = ds.offset(v); z < ds.offset(v) + ds.degree(v); ++z)
            if (z != y) try_extend(z);
    }
}

std::vector<std::vector<HalfEdge>> enumerate_segmented_impl(
    const DegreeSequence& ds, const Configuration& eta, HalfEdge x,
    std::optional<HalfEdge> y, std::uint32_t t, const ResetSet& resets) {
    if (ds.half_edge_count() > 12 || t > 5)
        throw std::invalid_argument(
            "segmented path enumeration limited to ell <= 12, t <= 5");
    if (resets.horizon != t) throw std::invalid_argument("reset horizon mismatch");
    std::vector<std::vector<HalfEdge>> out;
    std::vector<HalfEdge> path{x};
    std::vector<bool> visited(ds.vertex_count(), false);
    visited[ds.vertex_of(x)] = true;
    segmented_rec(ds, eta, t, resets.mask(), y, path, visited, out);
    return out;
}

}  // namespace

std::vector<std::vector<HalfEdge>> enumerate_segmented_paths(
    const DegreeSequence& ds, const Configuration& eta, HalfEdge x, HalfEdge y,
    std::uint32_t t, const ResetSet& resets) {
    return enumerate_segmented_impl(ds, eta, x, y, t, resets);
}

std::vector<std::vector<HalfEdge>> enumerate_segmented_paths_from(
    const DegreeSequence& ds, const Configuration& eta, HalfEdge x,
    std::uint32_t t, const ResetSet& resets) {
    return enumerate_segmented_impl(ds, eta, x, std::nullopt, t, resets);
}

namespace {

void modified_law_rec(const DegreeSequence& ds, const Configuration& eta,
                      std::uint32_t t, std::uint32_t mask, HalfEdge cur,
                      std::uint32_t s, double weight, std::vector<bool>& visited,
                      std::vector<double>& out) {
    if (s > t) {
        out[cur] += weight;
        return;
    }
    auto descend = [&](HalfEdge z, double w) {
        const Vertex v = ds.vertex_of(z);
        if (visited[v]) return;  // restrict to SA trajectories
        visited[v] = true;
        modified_law_rec(ds, eta, t, mask, z, s + 1, weight * w, visited, out);
        visited[v] = false;
    };
    if (mask & (1u << (s - 1))) {
        const double w = 1.0 / static_cast<double>(ds.half_edge_count());
        for (HalfEdge z = 0; z < ds.half_edge_count(); ++z) descend(z, w);
    } else {
        const HalfEdge y = eta.pair[cur];
        const Vertex v = ds.vertex_of(y);
        const double w = 1.0 / static_cast<double>(ds.degree(v) - 1);
        for (HalfEdge z = ds.offset(v); z < ds.offset(v) + ds.degree(v); ++z)
            if (z != y) descend(z, w);
    }
}

}  // namespace

std::vector<double> modified_walk_exact_law(const DegreeSequence& ds,
                                            const Configuration& eta, HalfEdge x,
                                            std::uint32_t t, const ResetSet& resets) {
    if (ds.half_edge_count() > 12 || t > 5)
        throw std::invalid_argument("modified_walk_exact_law limited to ell <= 12, t <= 5");
    if (resets.horizon != t) throw std::invalid_argument("reset horizon mismatch");
    std::vector<double> out(ds.half_edge_count(), 0.0);
    std::vector<bool> visited(ds.vertex_count(), false);
    visited[ds.vertex_of(x)] = true;
    modified_law_rec(ds, eta, t, resets.mask(), x, 1, 1.0, visited, out);
    return out;
}

ReplicaRunner::ReplicaRunner(const DegreeSequence& ds, std::uint32_t k)
    : ds_(&ds), engine_(ds, k), visited_(ds.vertex_count(), 0) {}

ReplicaRunner::Outcome ReplicaRunner::walk(HalfEdge x, std::uint32_t horizon,
                                           RandomSource& rng) {
    if (++epoch_ == 0) {
        std::fill(visited_.begin(), visited_.end(), 0);
        epoch_ = 1;
    }
    const DegreeSequence& ds = *ds_;
    const bool rewire = engine_.k() != 0;

    Outcome out;
    visited_[ds.vertex_of(x)] = epoch_;
    HalfEdge cur = x;
    for (std::uint32_t s = 1; s <= horizon; ++s) {
        if (rewire) {
            engine_.step(rng);
            if (!out.tau_set && engine_.rewired_by(cur, s)) {
                out.tau = s;
                out.tau_set = true;
            }
        }
        const HalfEdge y = engine_.pair_of(cur);
        const Vertex v = ds.vertex_of(y);
        const std::uint32_t d = ds.degree(v);
        const HalfEdge base = ds.offset(v);
        const std::uint32_t j = rng.next_index(d - 1);
        cur = base + j;
        if (cur >= y) ++cur;
        if (visited_[v] == epoch_)
            out.self_avoiding = false;
        else
            visited_[v] = epoch_;
    }
    out.end = cur;
    return out;
}

ReplicaRunner::Outcome ReplicaRunner::run_fresh(std::uint32_t horizon,
                                                RandomSource& rng) {
    engine_.resample_initial(rng);
    const auto x = static_cast<HalfEdge>(rng.next_below(ds_->half_edge_count()));
    return walk(x, horizon, rng);
}

ReplicaRunner::Outcome ReplicaRunner::run_from(const Configuration& eta, HalfEdge x,
                                               std::uint32_t horizon,
                                               RandomSource& rng) {
    engine_.set_initial(eta);
    return walk(x, horizon, rng);
}

void ReplicaRunner::prepare_start(const Configuration& eta) {
    engine_.set_initial(eta);
    engine_.capture_baseline();
}

ReplicaRunner::Outcome ReplicaRunner::run_prepared(HalfEdge x, std::uint32_t horizon,
                                                   RandomSource& rng) {
    engine_.restore_baseline();
    return walk(x, horizon, rng);
}

}  // namespace dcmix
