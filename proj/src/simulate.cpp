#include "selfstart/simulate.hpp"

#include <cmath>
#include <stdexcept>

#include "selfstart/parallel.hpp"

namespace selfstart {

void ScenarioSpec::validate() const
{
    chart.validate();
    if (reps < 1) throw std::invalid_argument("replication count must be at least 1");
    if (reps > std::numeric_limits<std::uint32_t>::max()) throw std::invalid_argument("too many replications");
    if (tau < 1) throw std::invalid_argument("change point tau must be at least 1");
    if (!std::isfinite(delta)) throw std::invalid_argument("shift delta must be finite");
    if (cap < 1) throw std::invalid_argument("cap must be at least 1");
    if (!in_control() && cap < tau) throw std::invalid_argument("cap must be at least tau");
}

double gen_observation(const Substream& stream, std::int64_t index, const ScenarioSpec& spec)
{
    const double z = stream.normal(static_cast<std::uint64_t>(index));
    return index >= spec.tau ? z + spec.delta : z;
}

Substream replication_stream(const ScenarioSpec& spec, std::int64_t replication)
{
    return substream(spec.master_seed, spec.stream_id, static_cast<std::uint32_t>(replication));
}

RunOutcome run_once(const ScenarioSpec& spec, std::int64_t replication)
{
    const Substream stream = replication_stream(spec, replication);
    Chart chart(spec.chart);
    for (std::int64_t i = 1; i <= spec.cap; ++i) {
        if (chart.step(gen_observation(stream, i, spec)).alarm) return {i, false};
    }
    return {spec.cap, true};
}

std::vector<RunOutcome> run_all(const ScenarioSpec& spec)
{
    spec.validate();
    std::vector<RunOutcome> out(static_cast<std::size_t>(spec.reps));
    parallel_for(out.size(), spec.threads,
                 [&](std::size_t r) { out[r] = run_once(spec, static_cast<std::int64_t>(r)); });
    return out;
}

std::int64_t first_testable_index(const ChartConfig& config)
{
    if (config.variant == Variant::SSC) return 3;
    const NigParams& p = config.prior;
    // Posterior after m observations has lambda + m, a + m/2, and b > 0 almost
    // surely once m >= 2 (or m >= 1 when lambda > 0).
    for (std::int64_t i = 2;; ++i) {
        const double m = static_cast<double>(i - 1);
        const bool b_pos = p.b > 0.0 || m >= 2.0 || (m >= 1.0 && p.lambda > 0.0);
        if (p.a + m / 2.0 > 0.0 && p.lambda + m > 0.0 && b_pos) return i;
    }
}

}  // namespace selfstart
