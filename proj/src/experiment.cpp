#include "selfstart/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace selfstart {

std::string format_real(double v)
{
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string format_prior(const Method& m)
{
    if (m.variant == Variant::SSC) return "none";
    const NigParams& p = m.prior;
    return "NIG(" + format_real(p.mu) + ";" + format_real(p.lambda) + ";" + format_real(p.a) + ";" +
           format_real(p.b) + ")";
}

void GridSpec::validate() const
{
    if (methods.empty() || k_pairs.empty() || deltas.empty() || taus.empty()) {
        throw std::invalid_argument("grid lists must be non-empty");
    }
    for (const auto& k : k_pairs) {
        if (!(k.k_prc > 0.0) || !(k.k_ssc > 0.0)) throw std::invalid_argument("every k must be positive");
    }
    for (const auto& m : methods) {
        if (m.name.empty()) throw std::invalid_argument("method name must be non-empty");
        if (m.variant == Variant::PRC && !m.prior.valid()) {
            throw std::invalid_argument("prior of " + m.name + " needs lambda >= 0 and b >= 0");
        }
    }
    for (double d : deltas) {
        if (!std::isfinite(d)) throw std::invalid_argument("delta must be finite");
    }
    for (auto t : taus) {
        if (t < 1) throw std::invalid_argument("tau must be at least 1");
        if (t > cap) throw std::invalid_argument("tau must not exceed the cap");
    }
    if (reps < 1 || calibration_reps < 1) throw std::invalid_argument("replication counts must be at least 1");
}

ChartConfig method_chart(const GridSpec& spec, const Method& m, const KPair& k)
{
    ChartConfig c;
    c.variant = m.variant;
    c.k = m.variant == Variant::SSC ? k.k_ssc : k.k_prc;
    c.h = 0.0;
    c.prior = m.prior;
    c.side = spec.side;
    return c;
}

namespace {

std::string method_key(const Method& m, const KPair& k)
{
    return m.name + "|" + to_string(m.variant) + "|" + format_prior(m) + "|" + format_real(k.k_prc) + "|" +
           format_real(k.k_ssc);
}

std::string describe(const Method& m, const KPair& k)
{
    return m.name + " k_prc=" + format_real(k.k_prc) + " k_ssc=" + format_real(k.k_ssc);
}

}  // namespace

std::uint64_t cell_stream_id(const GridSpec& spec, const Method& m, const KPair& k, double delta, std::int64_t tau)
{
    const std::string group = spec.common_random_numbers
                                  ? format_real(k.k_prc) + "|" + format_real(k.k_ssc)
                                  : method_key(m, k);
    return stable_hash("ced|" + group + "|" + format_real(delta) + "|" + std::to_string(tau));
}

std::uint64_t calibration_stream_id(const GridSpec& spec, const Method& m, const KPair& k)
{
    if (spec.common_random_numbers) return stable_hash("calibrate");
    return stable_hash("calibrate|" + method_key(m, k));
}

GridResult run_grid(const GridSpec& spec, const ProgressFn& progress)
{
    spec.validate();
    GridResult result;
    result.rows.reserve(spec.cell_count());
    for (const Method& m : spec.methods) {
        for (const KPair& k : spec.k_pairs) {
            const ChartConfig chart = method_chart(spec, m, k);
            CalibrationRecord cal{m.name, k, std::nullopt, {}};
            try {
                CalibrationSpec cs;
                cs.chart = chart;
                cs.target_arl = spec.target_arl;
                cs.reps = spec.calibration_reps;
                cs.master_seed = spec.master_seed;
                cs.stream_id = calibration_stream_id(spec, m, k);
                cs.h_lo = spec.h_lo;
                cs.h_hi = spec.h_hi;
                cs.h_max = spec.h_max;
                cs.tol_arl = spec.tol_arl;
                cs.max_iters = spec.max_iters;
                cs.cap = spec.cap;
                cs.threads = spec.threads;
                cal.result = calibrate_h(cs);
                if (progress) {
                    progress("calibrated " + describe(m, k) + ": h=" + format_real(cal.result->h) +
                             " ARL0=" + format_real(cal.result->achieved_arl.mean));
                }
            } catch (const std::exception& e) {
                cal.error = e.what();
                if (progress) progress("calibration failed for " + describe(m, k) + ": " + cal.error);
            }

            for (double delta : spec.deltas) {
                for (std::int64_t tau : spec.taus) {
                    GridRow row;
                    row.method = m.name;
                    row.variant = m.variant;
                    row.prior = m.prior;
                    row.k = k;
                    row.delta = delta;
                    row.tau = tau;
                    row.master_seed = spec.master_seed;
                    if (!cal.result) {
                        row.h = std::nan("");
                        row.error = "calibration failed: " + cal.error;
                        result.rows.push_back(std::move(row));
                        continue;
                    }
                    row.h = cal.result->h;
                    row.calibration_converged = cal.result->converged;
                    ScenarioSpec sc;
                    sc.chart = chart;
                    sc.delta = delta;
                    sc.tau = tau;
                    sc.reps = spec.reps;
                    sc.master_seed = spec.master_seed;
                    sc.stream_id = cell_stream_id(spec, m, k, delta, tau);
                    sc.cap = spec.cap;
                    sc.threads = spec.threads;
                    try {
                        row.estimate = estimate_ced(sc, row.h);
                    } catch (const std::exception& e) {
                        row.error = e.what();
                    }
                    result.rows.push_back(std::move(row));
                }
            }
            if (progress) progress("finished CED cells for " + describe(m, k));
            result.calibrations.push_back(std::move(cal));
        }
    }
    return result;
}

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::string table_csv(const GridResult& result)
{
    std::ostringstream os;
    os << "variant,prior,k_prc,k_ssc,delta,tau,ced,std_error,reps,early_alarms,censored,h,master_seed\n";
    for (const GridRow& r : result.rows) {
        const Method m{r.method, r.variant, r.prior};
        const CedEstimate e = r.estimate.value_or(CedEstimate{kNan, kNan, 0, 0, 0, 0});
        os << r.method << ',' << format_prior(m) << ',' << format_real(r.k.k_prc) << ','
           << format_real(r.k.k_ssc) << ',' << format_real(r.delta) << ',' << r.tau << ','
           << format_real(e.ced) << ',' << format_real(e.std_error) << ',' << e.reps << ','
           << e.early_alarms << ',' << e.censored << ',' << format_real(r.h) << ',' << r.master_seed << '\n';
    }
    return os.str();
}

std::string table_pretty(const GridResult& result)
{
    // Table layout: one block per delta, one line per tau, one column per
    // (k pair, method) in order of first appearance.
    std::vector<std::pair<double, double>> ks;
    std::vector<std::string> methods;
    std::vector<double> deltas;
    std::vector<std::int64_t> taus;
    std::map<std::tuple<double, double, std::string, double, std::int64_t>, const GridRow*> cells;
    auto remember = [](auto& list, const auto& v) {
        for (const auto& x : list)
            if (x == v) return;
        list.push_back(v);
    };
    for (const GridRow& r : result.rows) {
        remember(ks, std::pair{r.k.k_prc, r.k.k_ssc});
        remember(methods, r.method);
        remember(deltas, r.delta);
        remember(taus, r.tau);
        cells[{r.k.k_prc, r.k.k_ssc, r.method, r.delta, r.tau}] = &r;
    }

    std::ostringstream os;
    char buf[128];
    const int width = 11;
    os << "              ";
    for (const auto& [kp, kss] : ks) {
        std::string head = "k_prc=" + format_real(kp) + ", k_ssc=" + format_real(kss);
        const int span = width * static_cast<int>(methods.size());
        std::snprintf(buf, sizeof buf, "%-*s", span, head.c_str());
        os << " | " << buf;
    }
    os << '\n';
    os << " delta    tau";
    for (std::size_t g = 0; g < ks.size(); ++g) {
        os << " | ";
        for (const auto& m : methods) {
            std::snprintf(buf, sizeof buf, "%*s", width, m.c_str());
            os << buf;
        }
    }
    os << '\n';
    for (double d : deltas) {
        os << std::string(14 + ks.size() * (3 + width * methods.size()), '-') << '\n';
        bool first = true;
        for (auto t : taus) {
            std::snprintf(buf, sizeof buf, "%6s %6lld", first ? format_real(d).c_str() : "",
                          static_cast<long long>(t));
            os << buf;
            first = false;
            for (const auto& [kp, kss] : ks) {
                os << " | ";
                for (const auto& m : methods) {
                    auto it = cells.find({kp, kss, m, d, t});
                    if (it == cells.end()) {
                        std::snprintf(buf, sizeof buf, "%*s", width, "");
                    } else if (!it->second->estimate) {
                        std::snprintf(buf, sizeof buf, "%*s", width, "error");
                    } else {
                        std::snprintf(buf, sizeof buf, "%*.3f", width, it->second->estimate->ced);
                    }
                    os << buf;
                }
            }
            os << '\n';
        }
    }
    return os.str();
}

}  // namespace

std::string emit_table(const GridResult& result, TableFormat format)
{
    return format == TableFormat::Csv ? table_csv(result) : table_pretty(result);
}

std::string emit_figure_data(const GridResult& result)
{
    std::ostringstream os;
    os << "delta,k_prc,k_ssc,series,tau,ced,std_error\n";
    for (const GridRow& r : result.rows) {
        const double ced = r.estimate ? r.estimate->ced : kNan;
        const double se = r.estimate ? r.estimate->std_error : kNan;
        os << format_real(r.delta) << ',' << format_real(r.k.k_prc) << ',' << format_real(r.k.k_ssc) << ','
           << r.method << ',' << r.tau << ',' << format_real(ced) << ',' << format_real(se) << '\n';
    }
    return os.str();
}

}  // namespace selfstart
