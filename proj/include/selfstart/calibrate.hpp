#pragma once

// Decision-limit calibration to a target in-control ARL.
//
// The ARL curve is estimated with the same replication set at every h
// (common random numbers), which makes it a deterministic non-decreasing step
// function of h. A root of ARL(h) - target is then located by Regula Falsi
// with the Illinois modification.

#include <cstdint>
#include <stdexcept>
#include <utility>
#include <vector>

#include "selfstart/metrics.hpp"

namespace selfstart {

class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// In-control run lengths of a fixed replication set, for any decision limit.
///
/// Each replication is simulated once with no limit while the record values
/// of its statistic are kept; the stop time at limit h is the index of the
/// first record above h. Replications are extended lazily, so only limits
/// above everything seen so far cost new simulation.
class RunLengthCache {
public:
    /// Uses spec.chart (h ignored), reps, master_seed, stream_id, cap, threads.
    explicit RunLengthCache(ScenarioSpec spec);

    std::vector<RunOutcome> outcomes_at(double h);
    ArlEstimate arl_at(double h);

    /// Total chart steps simulated so far.
    std::int64_t steps() const;

private:
    struct Replica {
        Chart chart;
        std::int64_t next_index = 1;
        double running_max = 0.0;
        std::vector<std::pair<std::int64_t, double>> records;
    };

    void extend(Replica& rep, std::size_t replication, double h) const;
    RunOutcome lookup(const Replica& rep, double h) const;

    ScenarioSpec spec_;
    std::vector<Replica> replicas_;
};

struct CalibrationSpec {
    ChartConfig chart{};
    double target_arl = 370.0;
    std::int64_t reps = 10'000;
    std::uint64_t master_seed = 1;
    std::uint64_t stream_id = 0;
    double h_lo = 0.1;
    double h_hi = 20.0;
    /// h_hi is doubled up to this bound while ARL(h_hi) < target.
    double h_max = 200.0;
    double tol_arl = 2.0;
    int max_iters = 100;
    std::int64_t cap = kDefaultCap;
    unsigned threads = 0;

    void validate() const;
};

struct CalibrationResult {
    double h = 0.0;
    ArlEstimate achieved_arl{};
    int iterations = 0;
    bool converged = false;
};

CalibrationResult calibrate_h(const CalibrationSpec& spec);

}  // namespace selfstart
