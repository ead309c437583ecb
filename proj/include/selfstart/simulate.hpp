#pragma once

// Monte Carlo run-length simulation of a configured chart on N(0,1) data with
// a persistent mean shift of size delta starting at index tau.

#include <cstdint>
#include <limits>
#include <vector>

#include "selfstart/charts.hpp"
#include "selfstart/random.hpp"

namespace selfstart {

/// tau value encoding "no change": the whole sequence is in control.
inline constexpr std::int64_t kNoChange = std::numeric_limits<std::int64_t>::max();
inline constexpr std::int64_t kDefaultCap = 10'000;

struct ScenarioSpec {
    ChartConfig chart{};
    double delta = 0.0;
    std::int64_t tau = kNoChange;
    std::int64_t reps = 10'000;
    std::uint64_t master_seed = 1;
    /// Distinguishes the random streams of different scenarios under one seed.
    std::uint64_t stream_id = 0;
    std::int64_t cap = kDefaultCap;
    unsigned threads = 0;

    /// Throws std::invalid_argument when the scenario is unusable.
    void validate() const;
    bool in_control() const { return tau == kNoChange; }
};

struct RunOutcome {
    /// First alarm index (1-based), or cap when censored.
    std::int64_t stop_time = 0;
    bool censored = false;

    friend bool operator==(const RunOutcome&, const RunOutcome&) = default;
};

/// Observation `index` (1-based): N(0,1) before tau, N(delta,1) from tau on.
double gen_observation(const Substream& stream, std::int64_t index, const ScenarioSpec& spec);

Substream replication_stream(const ScenarioSpec& spec, std::int64_t replication);

/// One replication: feed generated observations until the first alarm or cap.
RunOutcome run_once(const ScenarioSpec& spec, std::int64_t replication);

/// All spec.reps replications, in replication order.
std::vector<RunOutcome> run_all(const ScenarioSpec& spec);

/// First index at which a chart can alarm for the given configuration
/// (3 for SSC and the reference prior, 2 for a proper prior).
std::int64_t first_testable_index(const ChartConfig& config);

}  // namespace selfstart
