#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "dcmix/experiments.hpp"

namespace {

using namespace dcmix;

struct ModelArgs {
    std::string model = "regular";
    std::uint64_t n = 1000;
    std::uint32_t d = 3;
    std::uint32_t d1 = 3, d2 = 4;
    double frac1 = 0.5;
    double gamma = 3.0;
};

void add_model_options(CLI::App* cmd, ModelArgs& args) {
    cmd->add_option("--model", args.model, "regular | bivalued | powerlaw")
        ->check(CLI::IsMember({"regular", "bivalued", "powerlaw"}));
    cmd->add_option("-n,--n", args.n, "vertex count");
    cmd->add_option("-d,--d", args.d, "degree (regular model)");
    cmd->add_option("--d1", args.d1, "first degree (bivalued)");
    cmd->add_option("--d2", args.d2, "second degree (bivalued)");
    cmd->add_option("--frac1", args.frac1, "fraction of d1 vertices (bivalued)");
    cmd->add_option("--gamma", args.gamma, "power-law exponent (> 2)");
}

DegreeModel to_model(const ModelArgs& args) {
    if (args.model == "regular") return RegularModel{args.d};
    if (args.model == "bivalued") return BivaluedModel{args.d1, args.d2, args.frac1};
    return PowerLawModel{args.gamma};
}

DegreeSequence load_degrees(const std::string& degrees_file, const ModelArgs& args,
                            std::uint64_t seed, std::optional<DegreeMode> mode) {
    if (!degrees_file.empty()) {
        std::ifstream in(degrees_file);
        if (!in) throw std::runtime_error("cannot open " + degrees_file);
        const auto degrees = read_degree_file(in);
        DegreeMode m = DegreeMode::R;
        if (mode) {
            m = *mode;
        } else {
            std::uint32_t min_deg = degrees.empty() ? 0 : degrees[0];
            for (auto d : degrees) min_deg = std::min(min_deg, d);
            m = min_deg >= 3 ? DegreeMode::RStar : DegreeMode::R;
        }
        return build_degree_sequence(degrees, m);
    }
    RandomSource rng(derive_seed(seed, 0xD16));
    return generate_degrees(to_model(args), args.n, rng);
}

const char* status_str(CheckStatus s) {
    switch (s) {
        case CheckStatus::Pass: return "pass";
        case CheckStatus::Warn: return "warn";
        case CheckStatus::Fail: return "FAIL";
    }
    return "?";
}

int cmd_check(const std::string& degrees_file, const ModelArgs& args,
              const std::string& mode_str, bool as_json) {
    const DegreeMode mode = (mode_str == "Rstar") ? DegreeMode::RStar : DegreeMode::R;
    std::optional<DegreeMode> file_mode;
    if (!mode_str.empty()) file_mode = mode;
    DegreeSequence ds;
    try {
        ds = load_degrees(degrees_file, args, 1, file_mode);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    const DegreeMode report_mode = mode_str.empty() ? ds.mode() : mode;
    const RegularityReport rep = check_conditions(ds, report_mode);
    const auto& st = rep.stats;

    if (as_json) {
        nlohmann::json j;
        j["n"] = ds.vertex_count();
        j["ell"] = ds.half_edge_count();
        j["m"] = ds.edge_count();
        j["mode"] = report_mode == DegreeMode::RStar ? "Rstar" : "R";
        j["statistics"] = {{"nu", st.nu},         {"lambda1", st.lambda1},
                           {"lambda2", st.lambda2}, {"lambda3", st.lambda3},
                           {"d_max", st.d_max},     {"c_stat", st.c_stat},
                           {"lambda_valid", st.lambda_valid}};
        j["conditions"] = nlohmann::json::array();
        for (const auto& e : rep.entries)
            j["conditions"].push_back({{"name", e.name},
                                       {"status", status_str(e.status)},
                                       {"statistic", e.statistic},
                                       {"note", e.note}});
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "degree sequence: n=" << ds.vertex_count()
                  << " ell=" << ds.half_edge_count() << " m=" << ds.edge_count()
                  << " d_max=" << st.d_max << "\n";
        std::cout << std::setprecision(10);
        std::cout << "statistics:      nu=" << st.nu << " lambda1=" << st.lambda1
                  << " lambda2=" << st.lambda2 << " lambda3=" << st.lambda3
                  << " c_stat=" << st.c_stat << "\n";
        std::cout << "conditions (" << (report_mode == DegreeMode::RStar ? "R*" : "R")
                  << " mode):\n";
        for (const auto& e : rep.entries) {
            std::ostringstream head;
            head << "  " << std::left << std::setw(4) << e.name << " "
                 << std::setw(5) << status_str(e.status);
            std::cout << head.str() << " statistic=" << e.statistic << "  "
                      << e.note << "\n";
        }
    }
    return rep.any_fail() ? 2 : 0;
}

int cmd_simulate(const std::string& degrees_file, const ModelArgs& args,
                 std::uint32_t k, double alpha, std::uint32_t horizon,
                 std::uint64_t seed, std::int64_t start, bool no_rewire,
                 const std::string& reset_times, const std::string& trace_out) {
    DegreeSequence ds = load_degrees(degrees_file, args, seed, std::nullopt);
    RandomSource rng(derive_seed(seed, 0x51));
    const auto typical = sample_typical_start(ds, rng);
    const HalfEdge x = start >= 0 ? static_cast<HalfEdge>(start) : typical.x;

    if (k == 0 && alpha > 0.0) {
        const auto m = static_cast<double>(ds.edge_count());
        const auto unclamped = std::llround(alpha * m);
        if (unclamped < 2)
            std::cerr << "warning: alpha*m < 2; alpha effectively raised (k=2)\n";
        k = static_cast<std::uint32_t>(std::min<std::int64_t>(
            std::max<std::int64_t>(unclamped, 2), static_cast<std::int64_t>(m)));
    }

    WalkRecord rec;
    ResetSet resets;
    const bool modified = !reset_times.empty();
    if (modified) {
        std::stringstream ss(reset_times);
        std::string tok;
        resets.horizon = horizon;
        while (std::getline(ss, tok, ','))
            if (!tok.empty())
                resets.times.push_back(static_cast<std::uint32_t>(std::stoul(tok)));
        rec = run_modified(ds, typical.eta, x, horizon, resets, rng);
    } else if (no_rewire || k == 0) {
        rec = run_static(ds, typical.eta, x, horizon, rng);
    } else {
        RewiringEngine engine(ds, k);
        JointRunOptions opts;
        opts.record_trace = !trace_out.empty();
        rec = run_joint(engine, typical.eta, x, horizon, rng, opts);
        if (!trace_out.empty()) {
            std::ofstream tf(trace_out);
            write_text(tf, typical.eta);
            const auto& steps = engine.trace().per_step();
            for (std::size_t s = 0; s < steps.size(); ++s) {
                tf << "t " << (s + 1) << " R";
                for (HalfEdge h : steps[s]) tf << " " << h;
                tf << "\n";
            }
        }
    }

    for (std::size_t s = 0; s < rec.trajectory.size(); ++s) {
        std::cout << "s " << s << " X " << rec.trajectory[s];
        if (rec.tau && *rec.tau == s) std::cout << " TAU";
        if (modified && s >= 1 && resets.contains(static_cast<std::uint32_t>(s)))
            std::cout << " RESET";
        std::cout << "\n";
    }
    std::cerr << "tau=" << (rec.tau ? std::to_string(*rec.tau) : "none")
              << " self_avoiding=" << (rec.self_avoiding ? "yes" : "no") << "\n";
    return 0;
}

int cmd_profile(const std::string& config_path, unsigned workers,
                const std::string& svg_path, bool fixed_start) {
    std::ifstream in(config_path);
    if (!in) {
        std::cerr << "error: cannot open " << config_path << "\n";
        return 1;
    }
    ExperimentConfig cfg = parse_config_file(in);
    if (fixed_start) cfg.fixed_start = true;

    std::ofstream file_out;
    std::ostream* csv = &std::cout;
    if (!cfg.out_path.empty()) {
        file_out.open(cfg.out_path, std::ios::binary);
        if (!file_out) {
            std::cerr << "error: cannot open " << cfg.out_path << "\n";
            return 1;
        }
        csv = &file_out;
    }
    const auto rows = run_profile_experiment(cfg, workers, csv, &std::cerr);
    if (!svg_path.empty()) {
        std::ofstream svg(svg_path);
        write_profile_svg(svg, rows);
    }
    return 0;
}

int cmd_exact() {
    const VerificationReport report = run_verification_suite();
    for (const auto& c : report.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << " -- " << c.detail
                  << "\n";
    std::cout << (report.all_pass() ? "all checks passed" : "CHECKS FAILED") << "\n";
    return report.all_pass() ? 0 : 1;
}

int cmd_reset_law(std::uint32_t k, std::uint32_t t, std::uint64_t samples,
                  std::uint64_t seed) {
    const DegreeSequence ds =
        build_degree_sequence({2, 2, 2, 2}, DegreeMode::R);
    const auto law = exact_reset_law(ds, k, t);
    std::vector<std::uint64_t> hits(law.size(), 0);
    if (samples > 0) {
        RandomSource rng(derive_seed(seed, 0x4E));
        for (std::uint64_t i = 0; i < samples; ++i)
            ++hits[sample_reset_set(ds, k, t, rng).mask()];
    }
    std::cout << "p_" << t << "(T) on ell=8, k=" << k << "\n";
    std::cout << std::setprecision(10);
    for (std::size_t mask = 0; mask < law.size(); ++mask) {
        std::cout << "T={";
        bool first = true;
        for (std::uint32_t s = 1; s <= t; ++s)
            if (mask & (1u << (s - 1))) {
                std::cout << (first ? "" : ",") << s;
                first = false;
            }
        std::cout << "}  exact=" << law[mask];
        if (samples > 0)
            std::cout << "  sampled="
                      << static_cast<double>(hits[mask]) / static_cast<double>(samples);
        std::cout << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"non-backtracking walks on dynamically rewired configuration models"};
    app.require_subcommand(1);

    // check
    auto* check = app.add_subcommand("check", "degree statistics and regularity report");
    std::string check_file, check_mode;
    bool check_json = false;
    ModelArgs check_model;
    check->add_option("degrees-file", check_file, "file with one degree per line");
    add_model_options(check, check_model);
    check->add_option("--mode", check_mode, "R | Rstar")
        ->check(CLI::IsMember({"R", "Rstar", ""}));
    check->add_flag("--json", check_json, "emit JSON instead of text");

    // simulate
    auto* sim = app.add_subcommand("simulate", "single run with trajectory dump");
    std::string sim_file, sim_resets, sim_trace;
    ModelArgs sim_model;
    std::uint32_t sim_k = 0, sim_t = 20;
    double sim_alpha = 0.0;
    std::uint64_t sim_seed = 1;
    std::int64_t sim_start = -1;
    bool sim_norewire = false;
    sim->add_option("--degrees", sim_file, "file with one degree per line");
    add_model_options(sim, sim_model);
    sim->add_option("-k,--k", sim_k, "edges rewired per step");
    sim->add_option("--alpha", sim_alpha, "rewired fraction per step (k = round(alpha m))");
    sim->add_option("-t,--horizon", sim_t, "number of steps");
    sim->add_option("--seed", sim_seed, "seed");
    sim->add_option("--start", sim_start, "start half-edge (default: uniform)");
    sim->add_flag("--no-rewire", sim_norewire, "static walk");
    sim->add_option("--reset-times", sim_resets,
                    "comma list: run the modified walk with these reset times");
    sim->add_option("--trace-out", sim_trace, "dump configuration and R_t sets");

    // profile
    auto* prof = app.add_subcommand("profile", "mixing profile experiment");
    std::string prof_config, prof_svg;
    unsigned prof_workers = 1;
    bool prof_fixed = false;
    prof->add_option("--config", prof_config, "key = value config file")->required();
    prof->add_option("--workers", prof_workers, "worker threads");
    prof->add_option("--svg", prof_svg, "also write an SVG chart");
    prof->add_flag("--fixed-start", prof_fixed, "single (eta, x) for all replicas");

    // exact
    auto* exact = app.add_subcommand("exact", "run the exact-oracle verification suite");

    // reset-law
    auto* law = app.add_subcommand("reset-law", "tiny-instance p_t(T) table");
    std::uint32_t law_k = 2, law_t = 2;
    std::uint64_t law_samples = 0, law_seed = 1;
    law->add_option("-k,--k", law_k, "edges rewired per step (<= 3)");
    law->add_option("-t,--t", law_t, "horizon (<= 3)");
    law->add_option("--samples", law_samples, "also sample T empirically");
    law->add_option("--seed", law_seed, "seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (check->parsed())
            return cmd_check(check_file, check_model, check_mode, check_json);
        if (sim->parsed())
            return cmd_simulate(sim_file, sim_model, sim_k, sim_alpha, sim_t, sim_seed,
                                sim_start, sim_norewire, sim_resets, sim_trace);
        if (prof->parsed())
            return cmd_profile(prof_config, prof_workers, prof_svg, prof_fixed);
        if (exact->parsed()) return cmd_exact();
        if (law->parsed()) return cmd_reset_law(law_k, law_t, law_samples, law_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
