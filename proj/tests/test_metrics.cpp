#include <doctest.h>

#include <cmath>
#include <vector>

#include "selfstart/metrics.hpp"

using namespace selfstart;

TEST_CASE("CED of alarms exactly at tau is one")
{
    const std::vector<RunOutcome> out(10, RunOutcome{11, false});
    const CedEstimate e = summarize_ced(out, 11, 100);
    CHECK(e.ced == 1.0);
    CHECK(e.std_error == 0.0);
    CHECK(e.reps == 10);
    CHECK(e.early_alarms == 0);
    CHECK(e.censored == 0);
}

TEST_CASE("CED accounting of early alarms and censoring")
{
    const std::vector<RunOutcome> out = {{5, false}, {11, false}, {14, false}, {100, true}, {10, false}};
    const CedEstimate e = summarize_ced(out, 11, 100);
    CHECK(e.reps == 5);
    CHECK(e.early_alarms == 2);
    CHECK(e.qualifying() == 3);
    CHECK(e.censored == 1);
    // Delays 1, 4 and 90.
    CHECK(e.ced == doctest::Approx(95.0 / 3.0));
    const double var = ((1 - 95.0 / 3) * (1 - 95.0 / 3) + (4 - 95.0 / 3) * (4 - 95.0 / 3) +
                        (90 - 95.0 / 3) * (90 - 95.0 / 3)) / 2.0;
    CHECK(e.std_error == doctest::Approx(std::sqrt(var / 3.0)));

    CHECK(std::isnan(summarize_ced(std::vector<RunOutcome>{{12, false}}, 11, 100).std_error));
    CHECK_THROWS_AS(summarize_ced(std::vector<RunOutcome>{{3, false}, {4, false}}, 11, 100), UnusableEstimate);
    CHECK_THROWS_AS(summarize_ced(std::vector<RunOutcome>{}, 11, 100), UnusableEstimate);
}

TEST_CASE("ARL summary")
{
    const std::vector<RunOutcome> out = {{3, false}, {5, false}, {50, true}};
    const ArlEstimate a = summarize_arl(out, 50);
    CHECK(a.mean == doctest::Approx(58.0 / 3.0));
    CHECK(a.censored == 1);
    CHECK(a.reps == 3);
    CHECK(a.cap == 50);
    CHECK(std::isnan(summarize_arl(std::vector<RunOutcome>{{4, false}}, 50).std_error));
    CHECK_THROWS_AS(summarize_arl(std::vector<RunOutcome>{}, 50), UnusableEstimate);
    CHECK_THROWS_AS(summarize_arl(std::vector<RunOutcome>{{50, true}, {50, true}}, 50), UnusableEstimate);
}

TEST_CASE("summaries do not depend on replication order")
{
    std::vector<RunOutcome> out;
    for (int i = 0; i < 1000; ++i) out.push_back({3 + (i * 7919) % 997, false});
    const ArlEstimate a = summarize_arl(out, 10'000);
    std::vector<RunOutcome> rev(out.rbegin(), out.rend());
    const ArlEstimate b = summarize_arl(rev, 10'000);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);
}

TEST_CASE("ARL at h = 0 is a shifted geometric wait")
{
    // With h = 0 the SSC chart alarms at the first scored U with |U| > k; the
    // scores are iid N(0,1), so T - 3 is geometric with p = 2 Phi(-k).
    ScenarioSpec s;
    s.reps = 20'000;
    s.stream_id = 3;
    const double p = std::erfc(0.5 / std::sqrt(2.0));
    const double expect = 3.0 + (1.0 - p) / p;
    const ArlEstimate a = estimate_arl0(s, 0.0);
    CHECK(std::fabs(a.mean - expect) < 3.0 * a.std_error);
    CHECK(a.censored == 0);
}

TEST_CASE("standard error shrinks like one over root n")
{
    ScenarioSpec s;
    s.chart.h = 2.0;
    s.stream_id = 8;
    s.reps = 4000;
    const ArlEstimate small = estimate_arl0(s, 2.0);
    s.reps = 16'000;
    const ArlEstimate large = estimate_arl0(s, 2.0);
    const double ratio = small.std_error / large.std_error;
    CHECK(ratio > 1.6);
    CHECK(ratio < 2.4);
    CHECK(std::fabs(small.mean - large.mean) < 4.0 * small.std_error);
}

TEST_CASE("estimate_arl0 overrides any shift and estimate_ced needs tau")
{
    ScenarioSpec s;
    s.reps = 200;
    s.delta = 3.0;
    s.tau = 5;
    s.stream_id = 1;
    ScenarioSpec ic = s;
    ic.delta = 0.0;
    ic.tau = kNoChange;
    CHECK(estimate_arl0(s, 3.0).mean == estimate_arl0(ic, 3.0).mean);
    CHECK_THROWS_AS(estimate_ced(ic, 3.0), std::invalid_argument);
    const CedEstimate c = estimate_ced(s, 3.0);
    CHECK(c.reps == 200);
    CHECK(c.ced >= 1.0);
}
