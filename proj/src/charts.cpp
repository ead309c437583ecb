#include "selfstart/charts.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "selfstart/special_fn.hpp"

namespace selfstart {

double RunningStats::sample_sd() const
{
    if (n < 2) throw InsufficientHistory("sample standard deviation needs at least two observations");
    return std::sqrt(ssd / static_cast<double>(n - 1));
}

RunningStats running_stats_update(const RunningStats& stats, double x)
{
    RunningStats out = stats;
    ++out.n;
    const double delta = x - stats.mean;
    out.mean = stats.mean + delta / static_cast<double>(out.n);
    out.ssd = stats.ssd + delta * (x - out.mean);
    if (out.n <= 1 || out.ssd < 0.0) out.ssd = 0.0;
    return out;
}

bool NigParams::valid() const
{
    return std::isfinite(mu) && std::isfinite(a) && lambda >= 0.0 && b >= 0.0 &&
           std::isfinite(lambda) && std::isfinite(b);
}

NigParams nig_update(const NigParams& params, double x)
{
    // Conjugate update with a single observation; repeated application equals
    // the batch posterior over all observations.
    const double lambda1 = params.lambda + 1.0;
    const double dev = x - params.mu;
    NigParams out;
    out.mu = (params.lambda * params.mu + x) / lambda1;
    out.lambda = lambda1;
    out.a = params.a + 0.5;
    out.b = params.b + params.lambda * dev * dev / (2.0 * lambda1);
    return out;
}

Predictive ic_predictive(const NigParams& params)
{
    if (!params.proper()) {
        throw ImproperPosterior("posterior predictive requires a > 0, b > 0 and lambda > 0");
    }
    const double scale2 = (params.lambda + 1.0) * params.b / (params.lambda * params.a);
    return {2.0 * params.a, params.mu, std::sqrt(scale2)};
}

double log_predictive_ratio(const NigParams& params, double x, double k_prc)
{
    const Predictive pred = ic_predictive(params);
    const double shift = k_prc * std::sqrt(params.b / params.a);
    // Both densities share df and scale, so their normalizing constants cancel
    // and only the kernels -(df+1)/2 * log1p(z^2/df) remain.
    const double z_ic = (x - pred.location) / pred.scale;
    const double z_ooc = (x - pred.location - shift) / pred.scale;
    return 0.5 * (pred.df + 1.0) *
           (std::log1p(z_ic * z_ic / pred.df) - std::log1p(z_ooc * z_ooc / pred.df));
}

double ssc_standardize(const RunningStats& stats, double x)
{
    if (stats.n < 2) throw InsufficientHistory("SSC standardization needs at least two earlier observations");
    if (!(stats.ssd > 0.0)) throw DegenerateHistory("all earlier observations are identical");
    return (x - stats.mean) / stats.sample_sd();
}

double ssc_normalize(double t, std::int64_t n)
{
    if (n < 2) throw InsufficientHistory("SSC normal transform needs n >= 2");
    const double nd = static_cast<double>(n);
    return special_fn::student_t_to_normal(std::sqrt(nd / (nd + 1.0)) * t, nd - 1.0);
}

double CusumPair::two_sided() const
{
    return std::max(upper, std::fabs(lower));
}

CusumPair cusum_step(const CusumPair& pair, double increment, double k)
{
    return {std::max(0.0, pair.upper + increment - k), std::min(0.0, pair.lower + increment + k)};
}

std::string to_string(Variant v)
{
    return v == Variant::SSC ? "ssc" : "prc";
}

std::string to_string(Side s)
{
    switch (s) {
    case Side::Upper: return "upper";
    case Side::Lower: return "lower";
    case Side::TwoSided: return "two_sided";
    }
    return "two_sided";
}

Variant parse_variant(const std::string& s)
{
    if (s == "ssc" || s == "SSC") return Variant::SSC;
    if (s == "prc" || s == "PRC") return Variant::PRC;
    throw std::invalid_argument("unknown chart variant '" + s + "' (expected ssc or prc)");
}

Side parse_side(const std::string& s)
{
    if (s == "upper") return Side::Upper;
    if (s == "lower") return Side::Lower;
    if (s == "two_sided" || s == "two-sided" || s == "both") return Side::TwoSided;
    throw std::invalid_argument("unknown side '" + s + "' (expected upper, lower or two_sided)");
}

void ChartConfig::validate() const
{
    if (!(k > 0.0) || !std::isfinite(k)) throw std::invalid_argument("reference value k must be positive and finite");
    if (std::isnan(h) || h < 0.0) throw std::invalid_argument("decision limit h must be non-negative");
    if (variant == Variant::PRC && !prior.valid()) {
        throw std::invalid_argument("NIG prior requires lambda >= 0 and b >= 0");
    }
}

double side_statistic(const CusumPair& pair, Side side)
{
    switch (side) {
    case Side::Upper: return pair.upper;
    case Side::Lower: return std::fabs(pair.lower);
    case Side::TwoSided: return pair.two_sided();
    }
    return pair.two_sided();
}

std::pair<SscState, StepResult> ssc_step(const SscState& state, double x, const ChartConfig& config)
{
    SscState next = state;
    StepResult res;
    if (state.stats.n < 2) {
        next.stats = running_stats_update(state.stats, x);
        res.cusum = next.cusum;
        return {next, res};
    }
    const double t = ssc_standardize(state.stats, x);
    const double u = ssc_normalize(t, state.stats.n);
    next.cusum = cusum_step(state.cusum, u, config.k);
    next.stats = running_stats_update(state.stats, x);

    res.increment = u;
    res.cusum = next.cusum;
    res.warmup = false;
    res.statistic = side_statistic(next.cusum, config.side);
    res.alarm = res.statistic > config.h;
    return {next, res};
}

std::pair<PrcState, StepResult> prc_step(const PrcState& state, double x, const ChartConfig& config)
{
    PrcState next = state;
    next.seen = state.seen + 1;
    next.posterior = nig_update(state.posterior, x);
    StepResult res;
    // The first observation is never tested; after that, testing waits until
    // the posterior built from earlier data is proper.
    if (state.seen == 0 || !state.posterior.proper()) {
        res.cusum = next.cusum;
        return {next, res};
    }
    const double up = log_predictive_ratio(state.posterior, x, config.k);
    const double down = log_predictive_ratio(state.posterior, x, -config.k);
    next.cusum.upper = std::max(0.0, state.cusum.upper + up);
    next.cusum.lower = std::min(0.0, state.cusum.lower - down);

    res.increment = up;
    res.cusum = next.cusum;
    res.warmup = false;
    res.statistic = side_statistic(next.cusum, config.side);
    res.alarm = res.statistic > config.h;
    return {next, res};
}

Chart::Chart(ChartConfig config) : config_(config)
{
    config_.validate();
    if (config_.variant == Variant::SSC) {
        state_ = SscState{};
    } else {
        state_ = PrcState::from_prior(config_.prior);
    }
}

StepResult Chart::step(double x)
{
    return std::visit(
        [&](auto& s) {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, SscState>) {
                auto [next, res] = ssc_step(s, x, config_);
                s = next;
                return res;
            } else {
                auto [next, res] = prc_step(s, x, config_);
                s = next;
                return res;
            }
        },
        state_);
}

void Chart::absorb(double x)
{
    if (auto* s = std::get_if<SscState>(&state_)) {
        s->stats = running_stats_update(s->stats, x);
        return;
    }
    auto& p = std::get<PrcState>(state_);
    p.posterior = nig_update(p.posterior, x);
    ++p.seen;
}

std::int64_t Chart::observations() const
{
    if (const auto* s = std::get_if<SscState>(&state_)) return s->stats.n;
    return std::get<PrcState>(state_).seen;
}

}  // namespace selfstart
