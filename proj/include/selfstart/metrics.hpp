#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>

#include "selfstart/simulate.hpp"

namespace selfstart {

/// No replication qualifies for the requested estimate.
class UnusableEstimate : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ArlEstimate {
    double mean = 0.0;
    /// Sample SD / sqrt(reps); NaN when reps < 2.
    double std_error = 0.0;
    std::int64_t reps = 0;
    /// Runs without an alarm by the cap; they contribute the cap to the mean.
    std::int64_t censored = 0;
    std::int64_t cap = 0;
};

struct CedEstimate {
    double ced = 0.0;
    /// SE of the conditional mean delay; NaN with fewer than two qualifying runs.
    double std_error = 0.0;
    std::int64_t reps = 0;
    /// Runs that alarmed before the change point (excluded from the estimate).
    std::int64_t early_alarms = 0;
    /// Qualifying runs censored at the cap; they contribute cap - tau + 1.
    std::int64_t censored = 0;
    std::int64_t cap = 0;

    std::int64_t qualifying() const { return reps - early_alarms; }
};

ArlEstimate summarize_arl(std::span<const RunOutcome> outcomes, std::int64_t cap);
CedEstimate summarize_ced(std::span<const RunOutcome> outcomes, std::int64_t tau, std::int64_t cap);

/// Run-length estimate of the in-control ARL at limit h (spec.delta and
/// spec.tau are overridden to the in-control setting).
ArlEstimate estimate_arl0(ScenarioSpec spec, double h);

/// CED(tau) = E(T - tau + 1 | T >= tau) at limit h.
CedEstimate estimate_ced(ScenarioSpec spec, double h);

}  // namespace selfstart
