#include "dcmix/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace dcmix {

DegreeSequence generate_degrees(const DegreeModel& model, std::uint64_t n,
                                RandomSource& rng) {
    if (n == 0) throw std::invalid_argument("generate_degrees: n = 0");
    std::vector<std::uint32_t> degrees;
    degrees.reserve(n);

    if (const auto* reg = std::get_if<RegularModel>(&model)) {
        if (reg->d < 2) throw std::invalid_argument("regular model needs d >= 2");
        degrees.assign(n, reg->d);
    } else if (const auto* bi = std::get_if<BivaluedModel>(&model)) {
        if (bi->d1 < 2 || bi->d2 < 2)
            throw std::invalid_argument("bivalued model needs degrees >= 2");
        if (!(bi->frac1 >= 0.0 && bi->frac1 <= 1.0))
            throw std::invalid_argument("frac1 out of [0, 1]");
        const auto n1 = static_cast<std::uint64_t>(
            std::llround(bi->frac1 * static_cast<double>(n)));
        degrees.assign(n, bi->d2);
        for (std::uint64_t v = 0; v < n1; ++v) degrees[v] = bi->d1;
    } else {
        const auto& pl = std::get<PowerLawModel>(model);
        if (!(pl.gamma > 2.0))
            throw std::invalid_argument("power law needs gamma > 2");
        const std::uint32_t floor_deg = 3;
        const double exponent = 1.0 / std::max(pl.gamma - 1.0, 2.0);
        auto cap = static_cast<std::uint32_t>(
            std::ceil(std::pow(static_cast<double>(n), exponent)));
        cap = std::max(cap, floor_deg);
        std::vector<double> cdf(cap - floor_deg + 1);
        double acc = 0.0;
        for (std::uint32_t d = floor_deg; d <= cap; ++d) {
            acc += std::pow(static_cast<double>(d), -pl.gamma);
            cdf[d - floor_deg] = acc;
        }
        for (std::uint64_t v = 0; v < n; ++v) {
            const double u = rng.next_double() * acc;
            const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
            degrees.push_back(floor_deg +
                              static_cast<std::uint32_t>(it - cdf.begin()));
        }
    }

    std::uint64_t ell = 0;
    for (auto d : degrees) ell += d;
    if (ell % 2 != 0) ++degrees[rng.next_below(n)];

    std::uint32_t min_deg = degrees[0];
    for (auto d : degrees) min_deg = std::min(min_deg, d);
    return build_degree_sequence(degrees,
                                 min_deg >= 3 ? DegreeMode::RStar : DegreeMode::R);
}

TypicalStart sample_typical_start(const DegreeSequence& ds, RandomSource& rng) {
    TypicalStart start;
    start.eta = sample_uniform_configuration(ds, rng);
    start.x = static_cast<HalfEdge>(rng.next_below(ds.half_edge_count()));
    return start;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

ExperimentConfig parse_config_file(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(is, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected key = value, got: " + line);
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }

    auto need = [&](const std::string& key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::invalid_argument("config: missing key '" + key + "'");
        return it->second;
    };
    auto get_or = [&](const std::string& key, const std::string& fallback) {
        auto it = kv.find(key);
        return it == kv.end() ? fallback : it->second;
    };

    ExperimentConfig cfg;
    const std::string model = need("model");
    if (model == "regular") {
        RegularModel m;
        m.d = static_cast<std::uint32_t>(std::stoul(get_or("d", "3")));
        cfg.model = m;
    } else if (model == "bivalued") {
        BivaluedModel m;
        m.d1 = static_cast<std::uint32_t>(std::stoul(need("d1")));
        m.d2 = static_cast<std::uint32_t>(std::stoul(need("d2")));
        m.frac1 = std::stod(get_or("frac1", "0.5"));
        cfg.model = m;
    } else if (model == "powerlaw") {
        PowerLawModel m;
        m.gamma = std::stod(need("gamma"));
        cfg.model = m;
    } else {
        throw std::invalid_argument("config: unknown model '" + model + "'");
    }

    cfg.n = std::stoull(need("n"));
    const std::string regime = need("regime");
    if (regime == "supercritical")
        cfg.regime = Regime::Supercritical;
    else if (regime == "critical")
        cfg.regime = Regime::Critical;
    else if (regime == "subcritical")
        cfg.regime = Regime::Subcritical;
    else
        throw std::invalid_argument("config: unknown regime '" + regime + "'");

    if (kv.count("beta")) cfg.beta = std::stod(kv["beta"]);
    else if (cfg.regime == Regime::Critical && !kv.count("alpha"))
        throw std::invalid_argument("config: critical regime needs beta or alpha");
    if (kv.count("alpha")) cfg.alpha = std::stod(kv["alpha"]);

    std::stringstream grid(need("c_grid"));
    std::string tok;
    while (std::getline(grid, tok, ',')) {
        tok = trim(tok);
        if (tok.empty()) continue;
        cfg.c_grid.push_back(std::stod(tok));
    }
    if (cfg.c_grid.empty()) throw std::invalid_argument("config: empty c_grid");
    for (std::size_t i = 0; i < cfg.c_grid.size(); ++i) {
        if (cfg.c_grid[i] <= 0.0)
            throw std::invalid_argument("config: c grid must be positive");
        if (i > 0 && cfg.c_grid[i] <= cfg.c_grid[i - 1])
            throw std::invalid_argument("config: c grid must be sorted ascending");
    }

    cfg.replicas = std::stoull(need("N"));
    cfg.baseline_reps = std::stoi(get_or("B", "20"));
    cfg.seed = std::stoull(need("seed"));
    cfg.out_path = get_or("out", "");
    return cfg;
}

DerivedParams derive_params(const ExperimentConfig& cfg, const DegreeSequence& ds) {
    DerivedParams p;
    p.ell = ds.half_edge_count();
    p.m = ds.edge_count();
    const double logn = std::log(static_cast<double>(cfg.n));

    if (cfg.alpha) {
        p.alpha_requested = *cfg.alpha;
    } else {
        switch (cfg.regime) {
            case Regime::Supercritical:
                p.alpha_requested = 1.0 / logn;
                break;
            case Regime::Critical:
                if (!cfg.beta)
                    throw std::invalid_argument("critical regime needs beta or alpha");
                p.alpha_requested = *cfg.beta / (logn * logn);
                break;
            case Regime::Subcritical:
                p.alpha_requested = 1.0 / (logn * logn * logn);
                break;
        }
    }
    const auto unclamped = std::llround(p.alpha_requested * static_cast<double>(p.m));
    p.alpha_raised = unclamped < 2;
    p.k = static_cast<std::uint32_t>(
        std::min<std::int64_t>(std::max<std::int64_t>(unclamped, 2),
                               static_cast<std::int64_t>(p.m)));
    p.alpha = static_cast<double>(p.k) / static_cast<double>(p.m);

    p.c_stat = degree_statistics(ds).c_stat;
    p.scale = (cfg.regime == Regime::Supercritical) ? 1.0 / std::sqrt(p.alpha) : logn;

    switch (cfg.regime) {
        case Regime::Supercritical:
            p.beta = std::numeric_limits<double>::infinity();
            break;
        case Regime::Critical:
            // With an explicit alpha and no beta, report the finite-n value.
            p.beta = cfg.beta ? *cfg.beta : p.alpha * logn * logn;
            break;
        case Regime::Subcritical:
            p.beta = 0.0;
            break;
    }
    return p;
}

const char* const kCsvHeader =
    "regime,n,ell,alpha,k,c,t,N,tv_raw,tv_debiased,stderr,p_tau_gt,sa_rate,"
    "theory,lower,upper,seed";

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace

void write_csv_header(std::ostream& os) { os << kCsvHeader << "\n"; }

void write_csv_row(std::ostream& os, const ResultRow& row) {
    const bool has_data = row.replicas > 0;
    auto opt = [&](double v) { return has_data ? fmt(v) : std::string(); };
    const std::string fields[] = {
        row.regime,          std::to_string(row.n),
        std::to_string(row.ell), fmt(row.alpha),
        std::to_string(row.k),   fmt(row.c),
        std::to_string(row.t),   std::to_string(row.replicas),
        opt(row.tv_raw),         opt(row.tv_debiased),
        opt(row.stderr_value),   opt(row.p_tau_gt),
        opt(row.sa_rate),        fmt(row.theory),
        opt(row.lower),          opt(row.upper),
        std::to_string(row.seed)};
    for (std::size_t i = 0; i < std::size(fields); ++i)
        os << fields[i] << (i + 1 < std::size(fields) ? "," : "\n");
}

namespace {

constexpr std::uint64_t kBatchSize = 4096;

struct CellCounts {
    std::vector<std::uint64_t> all, gt, le;
    std::uint64_t n_gt = 0, n_le = 0, sa = 0;

    explicit CellCounts(std::size_t ell) : all(ell, 0), gt(ell, 0), le(ell, 0) {}

    void merge(const CellCounts& other) {
        for (std::size_t i = 0; i < all.size(); ++i) {
            all[i] += other.all[i];
            gt[i] += other.gt[i];
            le[i] += other.le[i];
        }
        n_gt += other.n_gt;
        n_le += other.n_le;
        sa += other.sa;
    }

    void reset() {
        std::fill(all.begin(), all.end(), 0);
        std::fill(gt.begin(), gt.end(), 0);
        std::fill(le.begin(), le.end(), 0);
        n_gt = n_le = sa = 0;
    }
};

}  // namespace

std::vector<ResultRow> run_profile_experiment(const ExperimentConfig& cfg,
                                              unsigned workers,
                                              std::ostream* csv,
                                              std::ostream* log) {
    RandomSource deg_rng(derive_seed(cfg.seed, 0xD16));
    const DegreeSequence ds = generate_degrees(cfg.model, cfg.n, deg_rng);
    const DerivedParams params = derive_params(cfg, ds);
    const std::size_t ell = static_cast<std::size_t>(ds.half_edge_count());

    if (params.alpha_raised && log)
        *log << "warning: requested alpha gives k < 2; alpha raised to " << params.alpha
             << " (k = " << params.k << ")\n";

    // Estimating D_{eta,x}(t) needs the initial pair held fixed while the
    // dynamics are averaged: counts pooled over fresh starts are exactly
    // uniform by symmetry. Default: an independent mu_n-typical start per
    // cell; --fixed-start keeps one pair for the whole run.
    TypicalStart run_start;
    if (cfg.fixed_start) {
        RandomSource start_rng(derive_seed(cfg.seed, 0xF1));
        run_start = sample_typical_start(ds, start_rng);
    }

    if (csv) write_csv_header(*csv);
    std::vector<ResultRow> rows;
    const unsigned n_workers = std::max(1u, workers);

    for (std::size_t ci = 0; ci < cfg.c_grid.size(); ++ci) {
        const double c = cfg.c_grid[ci];
        const auto t = static_cast<std::int64_t>(
            std::ceil(c * params.scale));
        const auto started = std::chrono::steady_clock::now();

        ResultRow row;
        row.regime = regime_name(cfg.regime);
        row.n = cfg.n;
        row.ell = params.ell;
        row.alpha = params.alpha;
        row.k = params.k;
        row.c = c;
        row.t = t;
        row.replicas = cfg.replicas;
        row.seed = cfg.seed;
        row.theory = theory_profile(cfg.regime, params.beta, params.c_stat, c);

        if (cfg.replicas > 0) {
            TypicalStart start;
            if (cfg.fixed_start) {
                start = run_start;
            } else {
                RandomSource start_rng(derive_seed(cfg.seed, 0xF1, ci + 1));
                start = sample_typical_start(ds, start_rng);
            }

            const std::uint64_t n_batches = (cfg.replicas + kBatchSize - 1) / kBatchSize;
            CellCounts total(ell);
            std::atomic<std::uint64_t> next_batch{0};
            std::mutex merge_mutex;

            auto work = [&]() {
                ReplicaRunner runner(ds, params.k);
                runner.prepare_start(start.eta);
                RandomSource rng;
                CellCounts local(ell);
                const auto horizon = static_cast<std::uint32_t>(t);
                for (;;) {
                    const std::uint64_t b = next_batch.fetch_add(1);
                    if (b >= n_batches) break;
                    rng.reseed(derive_seed(cfg.seed, 0xC0DE, ci, b));
                    const std::uint64_t begin = b * kBatchSize;
                    const std::uint64_t end = std::min(cfg.replicas, begin + kBatchSize);
                    for (std::uint64_t i = begin; i < end; ++i) {
                        const auto out = runner.run_prepared(start.x, horizon, rng);
                        ++local.all[out.end];
                        if (out.tau_set) {
                            ++local.le[out.end];
                            ++local.n_le;
                        } else {
                            ++local.gt[out.end];
                            ++local.n_gt;
                        }
                        if (out.self_avoiding) ++local.sa;
                    }
                }
                std::lock_guard<std::mutex> hold(merge_mutex);
                total.merge(local);
            };

            if (n_workers == 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                pool.reserve(n_workers);
                for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work);
                for (auto& th : pool) th.join();
            }

            EmpiricalDistribution emp_all{std::move(total.all), cfg.replicas,
                                          ConditioningTag::All};
            EmpiricalDistribution emp_gt{std::move(total.gt), total.n_gt,
                                         ConditioningTag::TauGt};
            EmpiricalDistribution emp_le{std::move(total.le), total.n_le,
                                         ConditioningTag::TauLe};

            DebiasOptions dop;
            dop.baseline_reps = std::max(cfg.baseline_reps, 20);

            RandomSource rng_all(derive_seed(cfg.seed, 0xDEB, ci, 0));
            const TvEstimate est_all = debiased_tv(emp_all, rng_all, dop);
            // The decomposition sandwich uses the raw conditional TVs: the
            // empirical mixture identity makes it exact on the counts.
            const double tv_gt = emp_gt.n > 0 ? tv_to_uniform(emp_gt) : 0.0;
            const double tv_le = emp_le.n > 0 ? tv_to_uniform(emp_le) : 0.0;

            row.tv_raw = est_all.tv_raw;
            row.tv_debiased = est_all.tv_debiased;
            row.tv_debiased_preclamp = est_all.tv_debiased_preclamp;
            row.stderr_value = est_all.stderr_value;
            row.p_tau_gt = static_cast<double>(emp_gt.n) /
                           static_cast<double>(cfg.replicas);
            row.sa_rate = static_cast<double>(total.sa) /
                          static_cast<double>(cfg.replicas);
            const auto bounds = decomposition_bounds(row.p_tau_gt, tv_gt, tv_le);
            row.lower = bounds.first;
            row.upper = bounds.second;
            row.low_confidence_gt = emp_gt.n < 100;
            row.low_confidence_le = emp_le.n < 100;
        }

        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - started)
                          .count();
        rows.push_back(row);
        if (csv) {
            write_csv_row(*csv, row);
            csv->flush();
        }
        if (log) {
            *log << "cell c=" << fmt(c) << " t=" << t
                 << " tv_debiased=" << fmt(row.tv_debiased)
                 << " theory=" << fmt(row.theory) << " p_tau_gt=" << fmt(row.p_tau_gt)
                 << " wall_ms=" << fmt(row.wall_ms);
            if (row.low_confidence_gt) *log << " [gt branch low-confidence]";
            if (row.low_confidence_le) *log << " [le branch low-confidence]";
            *log << "\n";
        }
    }
    return rows;
}

void write_profile_svg(std::ostream& os, const std::vector<ResultRow>& rows) {
    const int width = 640, height = 420;
    const int ml = 60, mr = 20, mt = 30, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;
    double cmax = 0.0;
    for (const auto& r : rows) cmax = std::max(cmax, r.c);
    if (cmax <= 0.0) cmax = 1.0;
    cmax *= 1.05;

    auto px = [&](double c) { return ml + c / cmax * pw; };
    auto py = [&](double tv) { return mt + (1.0 - std::min(1.0, std::max(0.0, tv))) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
       << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // Axes.
    os << "<line x1=\"" << ml << "\" y1=\"" << mt + ph << "\" x2=\"" << ml + pw
       << "\" y2=\"" << mt + ph << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
       << mt + ph << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double tv = i / 5.0;
        os << "<text x=\"" << ml - 8 << "\" y=\"" << py(tv) + 4
           << "\" font-size=\"11\" text-anchor=\"end\">" << fmt(tv) << "</text>\n";
        os << "<line x1=\"" << ml - 4 << "\" y1=\"" << py(tv) << "\" x2=\"" << ml
           << "\" y2=\"" << py(tv) << "\" stroke=\"black\"/>\n";
    }
    for (const auto& r : rows) {
        os << "<line x1=\"" << px(r.c) << "\" y1=\"" << mt + ph << "\" x2=\""
           << px(r.c) << "\" y2=\"" << mt + ph + 4 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << px(r.c) << "\" y=\"" << mt + ph + 18
           << "\" font-size=\"11\" text-anchor=\"middle\">" << fmt(r.c) << "</text>\n";
    }
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
       << "\" font-size=\"12\" text-anchor=\"middle\">c</text>\n";
    os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << 16
       << "\" font-size=\"12\" text-anchor=\"middle\">" << (rows.empty() ? "" : rows[0].regime)
       << " profile: debiased TV (solid) vs theory (dashed)</text>\n";

    auto polyline = [&](bool theory, const char* color, const char* dash) {
        std::ostringstream pts;
        bool open = false;
        for (const auto& r : rows) {
            const double v = theory ? r.theory : r.tv_debiased;
            if (std::isnan(v) || (theory == false && r.replicas == 0)) {
                if (open) {
                    os << "<polyline fill=\"none\" stroke=\"" << color
                       << "\" stroke-dasharray=\"" << dash << "\" points=\""
                       << pts.str() << "\"/>\n";
                    pts.str("");
                    open = false;
                }
                continue;
            }
            pts << px(r.c) << "," << py(v) << " ";
            open = true;
        }
        if (open)
            os << "<polyline fill=\"none\" stroke=\"" << color
               << "\" stroke-dasharray=\"" << dash << "\" points=\"" << pts.str()
               << "\"/>\n";
    };
    polyline(false, "#1f77b4", "");
    polyline(true, "#777777", "6,4");
    for (const auto& r : rows) {
        if (r.replicas == 0) continue;
        os << "<circle cx=\"" << px(r.c) << "\" cy=\"" << py(r.tv_debiased)
           << "\" r=\"3\" fill=\"#1f77b4\"/>\n";
    }
    os << "</svg>\n";
}

}  // namespace dcmix
