#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "dcmix/regularity.hpp"
#include "dcmix/walk.hpp"

namespace dcmix {

enum class ConditioningTag { All, TauGt, TauLe, SelfAvoiding };

struct EmpiricalDistribution {
    std::vector<std::uint64_t> counts;  // length ell
    std::uint64_t n = 0;                // samples in this conditioning class
    ConditioningTag tag = ConditioningTag::All;
};

// (1/2) sum |p - q|. Throws on size mismatch or when either input deviates
// from total mass 1 by more than 1e-9.
double tv_distance(std::span<const double> p, std::span<const double> q);

// TV between counts/n and the uniform distribution on the support.
double tv_to_uniform(const EmpiricalDistribution& emp);

struct EstimateResult {
    EmpiricalDistribution all;
    EmpiricalDistribution tau_gt;
    EmpiricalDistribution tau_le;
    double sa_rate = 0.0;
    double p_tau_gt = 0.0;
};

// N independent joint-chain replicas from the fixed (eta, x); counts of X_t
// split by the tau outcome. Deterministic per seed.
EstimateResult estimate_distribution(const DegreeSequence& ds,
                                     const Configuration& eta, HalfEdge x,
                                     std::uint32_t t, std::uint32_t k,
                                     std::uint64_t n_replicas, RandomSource& rng);

struct DebiasOptions {
    int baseline_reps = 20;   // synthetic uniform draws at the same N
    int bootstrap_reps = 20;  // multinomial resamples for the stderr
};

struct TvEstimate {
    double tv_raw = 0.0;
    double tv_debiased = 0.0;          // clamped to [0, 1]
    double tv_debiased_preclamp = 0.0;
    double stderr_value = 0.0;
    double baseline = 0.0;
};

// Finite-sample debiasing against the uniform reference: subtract the mean
// raw TV of matched-N draws from exact U_H. Exact-by-simulation, no
// distributional assumptions. stderr via multinomial bootstrap plus the
// baseline's own mean error in quadrature.
TvEstimate debiased_tv(const EmpiricalDistribution& emp, RandomSource& rng,
                       const DebiasOptions& opts = {});

// Exact joint distribution over Conf_H x H in configuration-enumeration
// order; w[config_index * ell + x]. Guarded to ell <= 8.
struct JointDistribution {
    std::vector<double> w;
    std::size_t n_configs = 0;
    std::size_t ell = 0;
};

JointDistribution joint_point_mass(const DegreeSequence& ds,
                                   const Configuration& eta, HalfEdge x);
JointDistribution joint_stationary(const DegreeSequence& ds);  // Conf_H x U_H

// One rewire-then-step iteration of the exact joint kernel.
JointDistribution joint_step(const DegreeSequence& ds, std::uint32_t k,
                             const JointDistribution& dist);

std::vector<double> halfedge_marginal(const JointDistribution& dist);

// Exact law of X_t started from (eta, x), by t joint-kernel iterations.
std::vector<double> exact_annealed_distribution(const DegreeSequence& ds,
                                                std::uint32_t k,
                                                const Configuration& eta,
                                                HalfEdge x, std::uint32_t t);

// Theorem profile value at abscissa c. NaN marks the undefined cutoff point
// c = c_stat in the critical and subcritical regimes.
double theory_profile(Regime regime, double beta, double c_stat, double c);

// Triangle-inequality sandwich from the stopping-time decomposition:
// upper = p*A + (1-p)*B, lower = max(0, p*A - (1-p)*B).
std::pair<double, double> decomposition_bounds(double p_tau_gt,
                                               double tv_given_gt,
                                               double tv_given_le);

struct MixingPoint {
    double c = 0.0;
    std::int64_t t = 0;
    double tv_raw = 0.0;
    double tv_debiased = 0.0;
    double stderr_value = 0.0;
    double p_tau_gt = 0.0;
    double theory = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

// Smallest grid t with tv_debiased <= eps; nullopt when the profile never
// drops below eps within the horizon.
std::optional<std::int64_t> mixing_time(std::span<const MixingPoint> profile,
                                        double eps);

}  // namespace dcmix
