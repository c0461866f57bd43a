#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dcmix/mixing.hpp"

namespace dcmix {

struct RegularModel {
    std::uint32_t d = 3;
};
struct BivaluedModel {
    std::uint32_t d1 = 3;
    std::uint32_t d2 = 4;
    double frac1 = 0.5;  // fraction of vertices with degree d1
};
// Truncated power law, floor 3, cap ceil(n^{1/max(gamma-1,2)}).
struct PowerLawModel {
    double gamma = 3.0;
};

using DegreeModel = std::variant<RegularModel, BivaluedModel, PowerLawModel>;

// Builds a degree sequence for the model. An odd half-edge total is
// repaired by bumping one uniformly chosen vertex's degree by one. The
// degree mode is inferred from the minimum degree (>= 3 gives R*).
DegreeSequence generate_degrees(const DegreeModel& model, std::uint64_t n,
                                RandomSource& rng);

struct TypicalStart {
    Configuration eta;
    HalfEdge x = 0;
};

// A mu_n draw: uniform pairing, then an independent uniform half-edge.
TypicalStart sample_typical_start(const DegreeSequence& ds, RandomSource& rng);

struct ExperimentConfig {
    DegreeModel model;
    std::uint64_t n = 0;
    Regime regime = Regime::Critical;
    std::optional<double> beta;          // critical-regime beta
    std::optional<double> alpha;         // explicit alpha overrides the schedule
    std::vector<double> c_grid;
    std::uint64_t replicas = 0;          // N
    int baseline_reps = 20;              // B
    std::uint64_t seed = 1;
    std::string out_path;
    bool fixed_start = false;            // one (eta, x) shared by every cell
};

// Flat key = value text; keys: model, n, d, d1, d2, frac1, gamma, regime,
// beta, alpha, c_grid (comma list), N, B, seed, out.
ExperimentConfig parse_config_file(std::istream& is);

struct DerivedParams {
    double alpha_requested = 0.0;
    double alpha = 0.0;        // realized k/m
    std::uint32_t k = 0;
    bool alpha_raised = false; // unclamped k was < 2
    double scale = 0.0;        // t = ceil(c * scale)
    double c_stat = 0.0;
    double beta = 0.0;         // inf in the supercritical regime
    std::uint64_t ell = 0;
    std::uint64_t m = 0;
};

DerivedParams derive_params(const ExperimentConfig& cfg, const DegreeSequence& ds);

struct ResultRow {
    std::string regime;
    std::uint64_t n = 0;
    std::uint64_t ell = 0;
    double alpha = 0.0;
    std::uint32_t k = 0;
    double c = 0.0;
    std::int64_t t = 0;
    std::uint64_t replicas = 0;
    double tv_raw = 0.0;
    double tv_debiased = 0.0;
    double stderr_value = 0.0;
    double p_tau_gt = 0.0;
    double sa_rate = 0.0;
    double theory = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::uint64_t seed = 0;
    // Not part of the CSV schema:
    double tv_debiased_preclamp = 0.0;
    double wall_ms = 0.0;
    bool low_confidence_gt = false;
    bool low_confidence_le = false;
};

extern const char* const kCsvHeader;

void write_csv_header(std::ostream& os);
void write_csv_row(std::ostream& os, const ResultRow& row);

// Runs the profile experiment: for each c, t = ceil(c * scale) and N
// replicas of the joint chain from a mu_n-typical initial pair (one
// independent draw per cell; fixed_start shares a single pair across the
// run). Rows are flushed to `csv` as each cell completes. Fully
// deterministic given the master seed, for any worker count.
std::vector<ResultRow> run_profile_experiment(const ExperimentConfig& cfg,
                                              unsigned workers,
                                              std::ostream* csv,
                                              std::ostream* log);

// Simple standalone line chart of estimate vs theory.
void write_profile_svg(std::ostream& os, const std::vector<ResultRow>& rows);

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerificationReport {
    std::vector<CheckResult> checks;
    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

// Pluggable pieces so tests can verify the checks catch corrupted
// implementations (mutation testing).
using QFunction = std::function<double(const Configuration&, const Configuration&,
                                       std::uint32_t, std::uint64_t)>;

// One replica of the joint chain from a fresh mu_n start; returns tau if it
// occurred within the horizon.
using TauReplica = std::function<std::optional<std::uint32_t>(
    const DegreeSequence&, std::uint32_t k, std::uint32_t horizon, RandomSource&)>;

CheckResult check_q_against_enumeration(std::uint64_t m, std::uint32_t k,
                                        const QFunction& q);
CheckResult check_q_row_sums(std::uint64_t m, std::uint32_t k, const QFunction& q);
CheckResult check_tau_tail(const DegreeSequence& ds, std::uint32_t k,
                           std::uint32_t horizon, std::uint64_t replicas,
                           double tolerance, std::uint64_t seed,
                           const TauReplica& replica);

TauReplica default_tau_replica();

// The exact-oracle battery: kernel enumeration agreement, symmetry, row
// sums, irreducibility, stationarity (kernel and joint), doubly stochastic
// P, reset-law invariance, the modified-walk identity, tau measurability,
// serialization round-trip, and a tau-tail smoke test.
VerificationReport run_verification_suite();

}  // namespace dcmix
