#include "selfstart/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "selfstart/parallel.hpp"

namespace selfstart {

namespace {

ChartConfig unlimited(ChartConfig c)
{
    c.h = std::numeric_limits<double>::infinity();
    return c;
}

}  // namespace

RunLengthCache::RunLengthCache(ScenarioSpec spec) : spec_(std::move(spec))
{
    spec_.chart.h = std::numeric_limits<double>::infinity();
    spec_.delta = 0.0;
    spec_.tau = kNoChange;
    spec_.validate();
    replicas_.reserve(static_cast<std::size_t>(spec_.reps));
    for (std::int64_t r = 0; r < spec_.reps; ++r) replicas_.push_back(Replica{Chart(unlimited(spec_.chart)), 1, 0.0, {}});
}

void RunLengthCache::extend(Replica& rep, std::size_t replication, double h) const
{
    if (rep.running_max > h || rep.next_index > spec_.cap) return;
    const Substream stream = replication_stream(spec_, static_cast<std::int64_t>(replication));
    while (rep.next_index <= spec_.cap) {
        const std::int64_t i = rep.next_index++;
        const StepResult res = rep.chart.step(gen_observation(stream, i, spec_));
        if (!res.warmup && res.statistic > rep.running_max) {
            rep.running_max = res.statistic;
            rep.records.emplace_back(i, res.statistic);
            if (res.statistic > h) return;
        }
    }
}

RunOutcome RunLengthCache::lookup(const Replica& rep, double h) const
{
    auto it = std::upper_bound(rep.records.begin(), rep.records.end(), h,
                               [](double value, const auto& rec) { return value < rec.second; });
    if (it != rep.records.end()) return {it->first, false};
    return {spec_.cap, true};
}

std::vector<RunOutcome> RunLengthCache::outcomes_at(double h)
{
    if (std::isnan(h) || h < 0.0) throw std::invalid_argument("decision limit h must be non-negative");
    std::vector<RunOutcome> out(replicas_.size());
    parallel_for(replicas_.size(), spec_.threads, [&](std::size_t r) {
        extend(replicas_[r], r, h);
        out[r] = lookup(replicas_[r], h);
    });
    return out;
}

ArlEstimate RunLengthCache::arl_at(double h)
{
    const auto outcomes = outcomes_at(h);
    return summarize_arl(outcomes, spec_.cap);
}

std::int64_t RunLengthCache::steps() const
{
    std::int64_t total = 0;
    for (const auto& r : replicas_) total += r.next_index - 1;
    return total;
}

void CalibrationSpec::validate() const
{
    chart.validate();
    if (!(target_arl > 1.0)) throw std::invalid_argument("target ARL must exceed 1");
    if (!(tol_arl > 0.0)) throw std::invalid_argument("ARL tolerance must be positive");
    if (!(h_lo > 0.0) || !(h_lo < h_hi)) throw std::invalid_argument("bracket must satisfy 0 < h_lo < h_hi");
    if (!(h_max >= h_hi)) throw std::invalid_argument("h_max must be at least h_hi");
    if (reps < 1) throw std::invalid_argument("replication count must be at least 1");
    if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
    if (static_cast<double>(cap) <= target_arl) throw std::invalid_argument("cap must exceed the target ARL");
}

CalibrationResult calibrate_h(const CalibrationSpec& spec)
{
    spec.validate();
    ScenarioSpec sim;
    sim.chart = spec.chart;
    sim.reps = spec.reps;
    sim.master_seed = spec.master_seed;
    sim.stream_id = spec.stream_id;
    sim.cap = spec.cap;
    sim.threads = spec.threads;
    RunLengthCache cache(sim);

    CalibrationResult best;
    double best_gap = std::numeric_limits<double>::infinity();
    int evaluations = 0;
    auto g = [&](double h) {
        const ArlEstimate est = cache.arl_at(h);
        ++evaluations;
        const double gap = est.mean - spec.target_arl;
        const bool meets = std::fabs(gap) <= spec.tol_arl;
        const bool best_meets = best_gap <= spec.tol_arl;
        // Among limits meeting the tolerance prefer the smallest h; otherwise
        // keep the closest miss.
        if ((meets && (!best_meets || h < best.h)) || (!meets && !best_meets && std::fabs(gap) < best_gap)) {
            best.h = h;
            best.achieved_arl = est;
            best_gap = std::fabs(gap);
        }
        return gap;
    };
    auto finish = [&](bool converged) {
        best.iterations = evaluations;
        best.converged = converged && best_gap <= spec.tol_arl;
        return best;
    };

    double lo = spec.h_lo;
    double g_lo = g(lo);
    if (std::fabs(g_lo) <= spec.tol_arl) return finish(true);
    while (g_lo > 0.0) {
        lo *= 0.5;
        if (lo < 1e-6) throw BracketError("ARL at the smallest decision limit already exceeds the target");
        g_lo = g(lo);
        if (std::fabs(g_lo) <= spec.tol_arl) return finish(true);
    }

    double hi = spec.h_hi;
    double g_hi = 0.0;
    for (int shrink = 0;; ++shrink) {
        try {
            g_hi = g(hi);
            break;
        } catch (const UnusableEstimate&) {
            // Every run censored: pull the upper end toward lo and retry.
            if (shrink >= 60) throw BracketError("every run is censored at all tried upper limits");
            hi = lo + 0.5 * (hi - lo);
        }
    }
    while (g_hi < 0.0) {
        if (hi * 2.0 > spec.h_max) {
            throw BracketError("ARL stays below target up to h = " + std::to_string(hi) +
                               " (achieved " + std::to_string(g_hi + spec.target_arl) + ")");
        }
        lo = hi;
        g_lo = g_hi;
        hi *= 2.0;
        g_hi = g(hi);
    }
    if (std::fabs(g_hi) <= spec.tol_arl) return finish(true);

    int last_side = 0;
    while (evaluations < spec.max_iters) {
        const double h = (lo * g_hi - hi * g_lo) / (g_hi - g_lo);
        if (!(h > lo && h < hi)) break;
        const double gh = g(h);
        if (std::fabs(gh) <= spec.tol_arl) return finish(true);
        if (gh < 0.0) {
            lo = h;
            g_lo = gh;
            if (last_side < 0) g_hi *= 0.5;
            last_side = -1;
        } else {
            hi = h;
            g_hi = gh;
            if (last_side > 0) g_lo *= 0.5;
            last_side = 1;
        }
        if (hi - lo <= 1e-12 * hi) break;
    }
    return finish(false);
}

}  // namespace selfstart
