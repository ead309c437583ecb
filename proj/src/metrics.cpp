#include "selfstart/metrics.hpp"

#include <cmath>
#include <limits>

namespace selfstart {

namespace {

struct Moments {
    std::int64_t count = 0;
    // Integer run lengths keep these sums exact and order-independent.
    long double sum = 0;
    long double sum_sq = 0;

    void add(std::int64_t v)
    {
        ++count;
        sum += static_cast<long double>(v);
        sum_sq += static_cast<long double>(v) * static_cast<long double>(v);
    }
    double mean() const { return static_cast<double>(sum / count); }
    double std_error() const
    {
        if (count < 2) return std::numeric_limits<double>::quiet_NaN();
        const long double n = static_cast<long double>(count);
        long double var = (sum_sq - sum * sum / n) / (n - 1);
        if (var < 0) var = 0;
        return static_cast<double>(std::sqrt(var / n));
    }
};

}  // namespace

ArlEstimate summarize_arl(std::span<const RunOutcome> outcomes, std::int64_t cap)
{
    Moments m;
    ArlEstimate est;
    est.cap = cap;
    for (const auto& o : outcomes) {
        m.add(o.stop_time);
        if (o.censored) ++est.censored;
    }
    est.reps = m.count;
    if (est.reps == 0) throw UnusableEstimate("ARL estimate from zero replications");
    if (est.censored == est.reps) throw UnusableEstimate("every replication was censored at the cap");
    est.mean = m.mean();
    est.std_error = m.std_error();
    return est;
}

CedEstimate summarize_ced(std::span<const RunOutcome> outcomes, std::int64_t tau, std::int64_t cap)
{
    Moments m;
    CedEstimate est;
    est.cap = cap;
    for (const auto& o : outcomes) {
        ++est.reps;
        if (o.stop_time < tau) {
            ++est.early_alarms;
            continue;
        }
        m.add(o.stop_time - tau + 1);
        if (o.censored) ++est.censored;
    }
    if (m.count == 0) throw UnusableEstimate("no replication survived to the change point");
    est.ced = m.mean();
    est.std_error = m.std_error();
    return est;
}

ArlEstimate estimate_arl0(ScenarioSpec spec, double h)
{
    spec.chart.h = h;
    spec.delta = 0.0;
    spec.tau = kNoChange;
    const auto outcomes = run_all(spec);
    return summarize_arl(outcomes, spec.cap);
}

CedEstimate estimate_ced(ScenarioSpec spec, double h)
{
    spec.chart.h = h;
    if (spec.in_control()) throw std::invalid_argument("CED needs a finite change point tau");
    const auto outcomes = run_all(spec);
    return summarize_ced(outcomes, spec.tau, spec.cap);
}

}  // namespace selfstart
