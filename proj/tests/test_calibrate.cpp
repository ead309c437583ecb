#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "selfstart/calibrate.hpp"

using namespace selfstart;

namespace {

ScenarioSpec cache_spec(Variant v)
{
    ScenarioSpec s;
    s.chart.variant = v;
    s.chart.prior = v == Variant::PRC ? NigParams::weakly_informative() : NigParams::reference();
    s.reps = 300;
    s.cap = 3000;
    s.master_seed = 5;
    s.stream_id = stable_hash("cache");
    return s;
}

CalibrationSpec calib_spec(Variant v, double target)
{
    CalibrationSpec c;
    c.chart.variant = v;
    c.chart.k = 0.5;
    c.target_arl = target;
    c.reps = 1000;
    c.cap = 5000;
    c.master_seed = 3;
    c.stream_id = stable_hash("calib-test");
    return c;
}

}  // namespace

TEST_CASE("cached run lengths equal direct simulation")
{
    for (Variant v : {Variant::SSC, Variant::PRC}) {
        ScenarioSpec s = cache_spec(v);
        RunLengthCache cache(s);
        // Out-of-order limits exercise both extension and lookup.
        for (double h : {2.0, 0.0, 6.0, 1.0, 4.5, 12.0, 3.3}) {
            s.chart.h = h;
            const auto direct = run_all(s);
            const auto cached = cache.outcomes_at(h);
            REQUIRE(direct == cached);
        }
        CHECK(cache.steps() > 0);
        CHECK_THROWS_AS(cache.outcomes_at(-1.0), std::invalid_argument);
    }
}

TEST_CASE("cache only simulates as far as needed")
{
    RunLengthCache cache(cache_spec(Variant::SSC));
    cache.outcomes_at(0.0);
    const std::int64_t after_zero = cache.steps();
    CHECK(after_zero <= 300 * 10);
    cache.outcomes_at(0.0);
    CHECK(cache.steps() == after_zero);
    cache.outcomes_at(3.0);
    CHECK(cache.steps() > after_zero);
}

TEST_CASE("calibration hits the target within tolerance")
{
    for (Variant v : {Variant::SSC, Variant::PRC}) {
        const CalibrationSpec c = calib_spec(v, 100.0);
        const CalibrationResult r = calibrate_h(c);
        CHECK(r.converged);
        CHECK(std::fabs(r.achieved_arl.mean - 100.0) <= c.tol_arl);
        CHECK(r.h > c.h_lo);
        CHECK(r.iterations >= 2);

        // The reported ARL is the cached ARL at the reported h.
        ScenarioSpec s;
        s.chart = c.chart;
        s.reps = c.reps;
        s.cap = c.cap;
        s.master_seed = c.master_seed;
        s.stream_id = c.stream_id;
        CHECK(estimate_arl0(s, r.h).mean == r.achieved_arl.mean);

        const CalibrationResult again = calibrate_h(c);
        CHECK(again.h == r.h);
        CHECK(again.iterations == r.iterations);
    }
}

TEST_CASE("larger targets need larger limits")
{
    const CalibrationResult a = calibrate_h(calib_spec(Variant::SSC, 200.0));
    const CalibrationResult b = calibrate_h(calib_spec(Variant::SSC, 500.0));
    CHECK(a.converged);
    CHECK(b.converged);
    CHECK(a.h < b.h);
}

TEST_CASE("an exact hit at the lower end returns it")
{
    CalibrationSpec c = calib_spec(Variant::SSC, 100.0);
    ScenarioSpec s;
    s.chart = c.chart;
    s.reps = c.reps;
    s.cap = c.cap;
    s.master_seed = c.master_seed;
    s.stream_id = c.stream_id;
    c.target_arl = estimate_arl0(s, c.h_lo).mean;
    c.cap = std::max<std::int64_t>(c.cap, static_cast<std::int64_t>(c.target_arl) + 1);
    const CalibrationResult r = calibrate_h(c);
    CHECK(r.converged);
    CHECK(r.h == c.h_lo);
    CHECK(r.iterations == 1);
}

TEST_CASE("bracket failures are reported")
{
    CalibrationSpec c = calib_spec(Variant::SSC, 100.0);
    c.h_hi = 0.5;
    c.h_max = 0.5;
    CHECK_THROWS_AS(calibrate_h(c), BracketError);

    // Target below the ARL reachable at tiny limits.
    c = calib_spec(Variant::SSC, 1.5);
    c.tol_arl = 0.1;
    CHECK_THROWS_AS(calibrate_h(c), BracketError);
}

TEST_CASE("CalibrationSpec validation")
{
    CalibrationSpec c;
    CHECK_NOTHROW(c.validate());
    c.target_arl = 0.5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.h_lo = 5.0;
    c.h_hi = 2.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.cap = 300;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.reps = 0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = {};
    c.tol_arl = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("unconverged calibration keeps the closest limit")
{
    CalibrationSpec c = calib_spec(Variant::SSC, 100.0);
    c.tol_arl = 1e-9;
    c.max_iters = 6;
    const CalibrationResult r = calibrate_h(c);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations <= 6);
    CHECK(r.h >= c.h_lo);
    CHECK(r.h <= c.h_hi);
    CHECK(r.achieved_arl.reps == c.reps);
}
