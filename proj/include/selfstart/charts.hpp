#pragma once

// Self-starting CUSUM chart cores.
//
// Two charts for the mean of Normal data with unknown mean and variance:
//
//  * SSC: each new observation is standardized against the running mean and
//    standard deviation of the earlier data, mapped to an exact N(0,1) score
//    through the Student-t CDF, and fed to a classic CUSUM with reference
//    value k.
//  * PRC: Bayesian Normal-Inverse-Gamma model; the increment is the log ratio
//    of a shifted (out-of-control) posterior predictive to the in-control
//    posterior predictive, both Student-t.
//
// Every observation is scored against state built from strictly earlier data
// and only then absorbed.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>

namespace selfstart {

/// Fewer than two earlier observations: the SSC standardization is undefined.
class InsufficientHistory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// All earlier observations identical, so the running standard deviation is 0.
class DegenerateHistory : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The NIG posterior does not yet define a proper predictive.
class ImproperPosterior : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Count, mean and sum of squared deviations of the observations so far.
struct RunningStats {
    std::int64_t n = 0;
    double mean = 0.0;
    double ssd = 0.0;

    double sample_sd() const;
};

/// One-pass (Welford) update.
RunningStats running_stats_update(const RunningStats& stats, double x);

/// Normal-Inverse-Gamma hyperparameters (mu, lambda, a, b). Used both as the
/// prior and as the sequentially updated posterior.
struct NigParams {
    double mu = 0.0;
    double lambda = 0.0;
    double a = -0.5;
    double b = 0.0;

    /// The improper reference prior NIG(0, 0, -1/2, 0).
    static constexpr NigParams reference() { return {0.0, 0.0, -0.5, 0.0}; }
    /// Prior worth four imaginary N(0,1) observations: NIG(0, 4, 2, 1.5).
    static constexpr NigParams weakly_informative() { return {0.0, 4.0, 2.0, 1.5}; }

    /// True when the predictive exists: a > 0, b > 0, lambda > 0.
    bool proper() const { return a > 0.0 && b > 0.0 && lambda > 0.0; }
    /// Hyperparameters must satisfy lambda >= 0 and b >= 0.
    bool valid() const;

    friend bool operator==(const NigParams&, const NigParams&) = default;
};

NigParams nig_update(const NigParams& params, double x);

/// Student-t predictive t_df(location, scale^2).
struct Predictive {
    double df = 0.0;
    double location = 0.0;
    double scale = 0.0;
};

/// In-control posterior predictive of the next observation.
Predictive ic_predictive(const NigParams& params);

/// log f'(x) - log f(x), where f is the IC predictive and f' the same
/// predictive with location shifted by k_prc * sqrt(b / a).
double log_predictive_ratio(const NigParams& params, double x, double k_prc);

/// Standardized next observation (x - mean) / sd of the earlier data.
double ssc_standardize(const RunningStats& stats, double x);

/// Maps a standardized value scored against n earlier observations to an
/// exact N(0,1) variate: Phi^{-1}(F_{n-1}(sqrt(n/(n+1)) * t)).
double ssc_normalize(double t, std::int64_t n);

struct CusumPair {
    double upper = 0.0;
    double lower = 0.0;

    double two_sided() const;
    friend bool operator==(const CusumPair&, const CusumPair&) = default;
};

/// upper' = max(0, upper + increment - k), lower' = min(0, lower + increment + k).
CusumPair cusum_step(const CusumPair& pair, double increment, double k);

enum class Variant { SSC, PRC };
enum class Side { Upper, Lower, TwoSided };

std::string to_string(Variant v);
std::string to_string(Side s);
Variant parse_variant(const std::string& s);
Side parse_side(const std::string& s);

struct ChartConfig {
    Variant variant = Variant::SSC;
    double k = 0.5;
    double h = 5.0;
    NigParams prior = NigParams::reference();
    Side side = Side::TwoSided;

    /// Throws std::invalid_argument on k <= 0, h < 0 or NaN, or an invalid prior.
    void validate() const;
};

struct StepResult {
    double statistic = 0.0;
    /// U for SSC; log L with +k for PRC.
    double increment = 0.0;
    CusumPair cusum{};
    bool alarm = false;
    bool warmup = true;
};

struct SscState {
    RunningStats stats{};
    CusumPair cusum{};
};

struct PrcState {
    NigParams posterior = NigParams::reference();
    std::int64_t seen = 0;
    CusumPair cusum{};

    static PrcState from_prior(const NigParams& prior) { return {prior, 0, {}}; }
};

using ChartState = std::variant<SscState, PrcState>;

/// Statistic on the configured side: upper, |lower|, or the max of both.
double side_statistic(const CusumPair& pair, Side side);

std::pair<SscState, StepResult> ssc_step(const SscState& state, double x, const ChartConfig& config);
std::pair<PrcState, StepResult> prc_step(const PrcState& state, double x, const ChartConfig& config);

/// Stateful wrapper that dispatches on the configured variant.
class Chart {
public:
    explicit Chart(ChartConfig config);

    StepResult step(double x);
    /// Absorbs x into the estimates without scoring it or touching the CUSUM.
    void absorb(double x);
    const ChartConfig& config() const { return config_; }
    const ChartState& state() const { return state_; }
    /// Number of observations absorbed so far.
    std::int64_t observations() const;

private:
    ChartConfig config_;
    ChartState state_;
};

}  // namespace selfstart
