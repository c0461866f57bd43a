#pragma once

#include <string>
#include <vector>

#include "dcmix/halfedge.hpp"

namespace dcmix {

// Degree statistics feeding the mixing-time constants. lambda1..3 are the
// mean and centered absolute moments of log(forward degree) over a uniform
// half-edge; c_stat = 1/lambda1 is the static mixing constant (time units
// per log n).
struct DegreeStatistics {
    double nu = 0.0;        // expected forward degree of a uniform half-edge
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double lambda3 = 0.0;
    std::uint32_t d_max = 0;
    double c_stat = 0.0;    // 1/lambda1; infinity when lambda1 == 0
    bool lambda_valid = false;  // false when lambda1 == 0 (all forward degrees 1)
};

DegreeStatistics degree_statistics(const DegreeSequence& ds);

enum class CheckStatus { Pass, Warn, Fail };

struct ConditionEntry {
    std::string name;       // R1, R2, R3 or R1*, R2*, R3*
    CheckStatus status = CheckStatus::Pass;
    double statistic = 0.0;
    std::string note;
};

struct RegularityReport {
    DegreeMode mode = DegreeMode::R;
    DegreeStatistics stats;
    std::vector<ConditionEntry> entries;

    bool any_fail() const {
        for (const auto& e : entries)
            if (e.status == CheckStatus::Fail) return true;
        return false;
    }
};

// Finite-n diagnostics for the asymptotic degree-regularity conditions.
// Exact conditions (parity, degree floors) pass/fail; asymptotic ones report
// the raw ratio and warn when it does not clear the comparison quantity at
// this n. Report-only: experiments proceed with warnings.
RegularityReport check_conditions(const DegreeSequence& ds, DegreeMode mode);

enum class Regime { Supercritical, Critical, Subcritical };

const char* regime_name(Regime r);

// beta = lim alpha_n (log n)^2: infinity -> supercritical, (0,inf) ->
// critical, 0 -> subcritical. Throws on negative or NaN input.
Regime classify_regime(double beta);

}  // namespace dcmix
