#pragma once

// The CED comparison study: every (method, k) pair is calibrated once to the
// target in-control ARL, then CED(tau) is estimated on a (delta, tau) grid.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "selfstart/calibrate.hpp"

namespace selfstart {

/// A chart variant with its prior, e.g. SSC, PRC_n or PRC_i.
struct Method {
    std::string name;
    Variant variant = Variant::SSC;
    NigParams prior = NigParams::reference();

    static Method ssc() { return {"SSC", Variant::SSC, NigParams::reference()}; }
    static Method prc_reference() { return {"PRC_n", Variant::PRC, NigParams::reference()}; }
    static Method prc_informative() { return {"PRC_i", Variant::PRC, NigParams::weakly_informative()}; }
};

/// Reference values for one column group; SSC uses k_ssc, PRC uses k_prc.
struct KPair {
    double k_prc = 1.0;
    double k_ssc = 0.5;
};

struct GridSpec {
    std::vector<Method> methods{Method::ssc(), Method::prc_reference(), Method::prc_informative()};
    std::vector<KPair> k_pairs{{0.5, 0.25}, {0.75, 0.375}, {1.0, 0.5}};
    std::vector<double> deltas{0.5, 1.0, 1.5, 2.0};
    std::vector<std::int64_t> taus{11, 21, 31, 41, 51, 61, 71, 81, 91, 101};
    std::int64_t reps = 10'000;
    std::int64_t calibration_reps = 10'000;
    double target_arl = 370.0;
    double tol_arl = 2.0;
    double h_lo = 0.1;
    double h_hi = 20.0;
    double h_max = 200.0;
    int max_iters = 100;
    std::int64_t cap = kDefaultCap;
    std::uint64_t master_seed = 1;
    Side side = Side::TwoSided;
    /// Share uniforms between methods in matching (k, delta, tau) cells.
    bool common_random_numbers = false;
    unsigned threads = 0;

    void validate() const;
    std::size_t cell_count() const { return methods.size() * k_pairs.size() * deltas.size() * taus.size(); }
};

struct CalibrationRecord {
    std::string method;
    KPair k{};
    std::optional<CalibrationResult> result;
    std::string error;
};

struct GridRow {
    std::string method;
    Variant variant = Variant::SSC;
    NigParams prior{};
    KPair k{};
    double delta = 0.0;
    std::int64_t tau = 0;
    /// Empty when the cell failed; see error.
    std::optional<CedEstimate> estimate;
    double h = 0.0;
    bool calibration_converged = false;
    std::uint64_t master_seed = 0;
    std::string error;
};

struct GridResult {
    std::vector<GridRow> rows;
    std::vector<CalibrationRecord> calibrations;
};

using ProgressFn = std::function<void(const std::string&)>;

/// Stream id of the CED cell; independent of the cell's position in the grid.
std::uint64_t cell_stream_id(const GridSpec& spec, const Method& m, const KPair& k, double delta, std::int64_t tau);
std::uint64_t calibration_stream_id(const GridSpec& spec, const Method& m, const KPair& k);

/// Chart configuration of a (method, k) group with h left at 0.
ChartConfig method_chart(const GridSpec& spec, const Method& m, const KPair& k);

GridResult run_grid(const GridSpec& spec, const ProgressFn& progress = {});

enum class TableFormat { Csv, Pretty };

std::string emit_table(const GridResult& result, TableFormat format);
std::string emit_figure_data(const GridResult& result);

/// Deterministic shortest-ish decimal rendering used in all CSV output.
std::string format_real(double v);
std::string format_prior(const Method& m);

}  // namespace selfstart
