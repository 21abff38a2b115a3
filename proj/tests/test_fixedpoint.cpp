#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "backlab/errors.hpp"
#include "backlab/fixedpoint.hpp"

using namespace backlab;

namespace {

// Closed-form oracle for the exponential-backoff series at pc r < 1:
//   sum pc^k (w0 r^k - 1)/2 = (w0 / (1 - pc r) - 1 / (1 - pc)) / 2.
double eb_series_closed_form(double w0, double r, double pc) {
    return 0.5 * (w0 / (1.0 - pc * r) - 1.0 / (1.0 - pc));
}

}  // namespace

TEST_CASE("slot probabilities") {
    const auto single = slot_probabilities(0.5, 1);
    CHECK(single.idle == doctest::Approx(0.5));
    CHECK(single.success == doctest::Approx(0.5));
    CHECK(single.collision == doctest::Approx(0.0));

    const auto pair = slot_probabilities(0.5, 2);
    CHECK(pair.idle == doctest::Approx(0.25));
    CHECK(pair.success == doctest::Approx(0.5));
    CHECK(pair.collision == doctest::Approx(0.25));

    // 10 * 0.1 * 0.9^9 = 0.387420489
    const auto ten = slot_probabilities(0.1, 10);
    CHECK(ten.success == doctest::Approx(0.387420489).epsilon(1e-9));
}

TEST_CASE("slot probabilities sum to one") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> tau_dist(1e-6, 1.0 - 1e-6);
    std::uniform_int_distribution<int> n_dist(1, 500);
    for (int i = 0; i < 2000; ++i) {
        const auto p = slot_probabilities(tau_dist(rng), n_dist(rng));
        CHECK(p.idle >= 0.0);
        CHECK(p.success >= 0.0);
        CHECK(p.collision >= 0.0);
        CHECK(std::abs(p.idle + p.success + p.collision - 1.0) < 1e-12);
    }
}

TEST_CASE("mean backoff series at pc 0") {
    const auto series = mean_backoff_series(BackoffSpec::exponential(2.0, 16),
                                            0.0, RetryLimit::unlimited());
    CHECK(series.sum == doctest::Approx(7.5));
    CHECK(series.terms == 1);
    CHECK_FALSE(series.diverged);
}

TEST_CASE("mean backoff series matches the geometric closed form") {
    const auto spec = BackoffSpec::exponential(2.0, 16);
    const auto series =
        mean_backoff_series(spec, 0.25, RetryLimit::unlimited());
    CHECK_FALSE(series.diverged);
    // 8 * sum 0.5^k - 0.5 * sum 0.25^k = 16 - 2/3
    CHECK(series.sum == doctest::Approx(16.0 - 2.0 / 3.0).epsilon(1e-10));
    CHECK(series.sum ==
          doctest::Approx(eb_series_closed_form(16.0, 2.0, 0.25)).epsilon(1e-10));

    for (const double pc : {0.05, 0.15, 0.35, 0.45}) {
        const auto s = mean_backoff_series(spec, pc, RetryLimit::unlimited());
        CHECK(s.sum == doctest::Approx(eb_series_closed_form(16.0, 2.0, pc))
                           .epsilon(1e-9));
    }
}

TEST_CASE("mean backoff series divergence") {
    const auto spec = BackoffSpec::exponential(2.0, 16);
    const auto series = mean_backoff_series(spec, 0.6, RetryLimit::unlimited());
    CHECK(series.diverged);  // pc * r = 1.2
}

TEST_CASE("finite retry limit sums exactly") {
    const auto spec = BackoffSpec::exponential(2.0, 16);
    const double pc = 0.3;
    double expected = 0.0;
    for (int k = 0; k <= 5; ++k) {
        expected += std::pow(pc, k) * (16.0 * std::pow(2.0, k) - 1.0) / 2.0;
    }
    const auto series = mean_backoff_series(spec, pc, RetryLimit::at_most(5));
    CHECK(series.sum == doctest::Approx(expected).epsilon(1e-12));
    CHECK(series.terms == 6);
}

TEST_CASE("table series stops at the table unless settled") {
    std::vector<double> doubling;
    double v = 1.0;
    for (int i = 0; i < 40; ++i) {
        doubling.push_back(v);
        v *= 2.0;
    }
    const auto spec = BackoffSpec::custom_table(doubling, 16);
    // pc r = 0.9: needs far more than 40 terms to settle.
    CHECK_THROWS_AS(mean_backoff_series(spec, 0.45, RetryLimit::unlimited()),
                    InsufficientDataError);
    // Small pc settles comfortably inside the table.
    const auto ok = mean_backoff_series(spec, 0.05, RetryLimit::unlimited());
    CHECK(ok.sum == doctest::Approx(eb_series_closed_form(16.0, 2.0, 0.05))
                        .epsilon(1e-9));
}

TEST_CASE("table scaling enters through the first entry") {
    // A table starting at 2 doubles the windows of an equivalent plain
    // start, so at pc = 0 the series must see W_0 = 2 * w0.
    std::vector<double> scaled(40);
    double v = 2.0;
    for (auto& g : scaled) {
        g = v;
        v *= 2.0;
    }
    const auto spec = BackoffSpec::custom_table(scaled, 16);
    const auto series = mean_backoff_series(spec, 0.0, RetryLimit::unlimited());
    CHECK(series.sum == doctest::Approx((32.0 - 1.0) / 2.0));
}

TEST_CASE("zero retry limit keeps only the first window") {
    const auto spec = BackoffSpec::exponential(2.0, 16);
    const auto series = mean_backoff_series(spec, 0.4, RetryLimit::at_most(0));
    CHECK(series.sum == doctest::Approx(7.5));
    CHECK(series.terms == 1);

    // with K = 0, tau = 1/(1 + E[B_0]) independently of pc
    const auto sol =
        solve(spec, 10, RetryLimit::at_most(0), PhyProfile::equal_slots());
    CHECK(sol.tau == doctest::Approx(2.0 / 17.0).epsilon(1e-9));
    CHECK(sol.converged);
}

TEST_CASE("solve single node") {
    const auto sol = solve(BackoffSpec::exponential(2.0, 16), 1,
                           RetryLimit::unlimited(), PhyProfile::equal_slots());
    CHECK(sol.pc == doctest::Approx(0.0));
    CHECK(sol.tau == doctest::Approx(2.0 / 17.0).epsilon(1e-12));
    CHECK(sol.converged);
}

TEST_CASE("solve approaches 1/r for large networks") {
    const auto sol = solve(BackoffSpec::exponential(2.0, 16), 10000,
                           RetryLimit::unlimited(), PhyProfile::equal_slots());
    CHECK(sol.pc > 0.45);
    CHECK(sol.pc < 0.5);
    CHECK(sol.converged);
}

TEST_CASE("fixed point residual is tiny") {
    const PhyProfile phy = PhyProfile::ieee80211g();
    const std::vector<BackoffSpec> specs = {
        BackoffSpec::exponential(2.0, 16),
        BackoffSpec::sub_exponential(4.0, 0.7, 16),
        BackoffSpec::polynomial(3.0, 16)};
    for (const auto& spec : specs) {
        for (const int n : {2, 5, 10, 50, 200}) {
            const auto sol = solve(spec, n, RetryLimit::unlimited(), phy);
            const double residual =
                sol.pc - (1.0 - std::pow(1.0 - sol.tau, n - 1));
            CHECK(std::abs(residual) < 1e-8);
            CHECK(sol.converged);
        }
    }
}

TEST_CASE("pc grows and tau shrinks with network size") {
    const PhyProfile phy = PhyProfile::ieee80211g();
    const std::vector<int> sizes = {2, 5, 10, 20, 50, 100, 400};
    const std::vector<BackoffSpec> specs = {
        BackoffSpec::exponential(2.0, 16),
        BackoffSpec::sub_exponential(4.0, 0.7, 16),
        BackoffSpec::polynomial(3.0, 16)};
    for (const auto& spec : specs) {
        const auto sols = sweep(spec, sizes, RetryLimit::unlimited(), phy);
        for (std::size_t i = 1; i < sols.size(); ++i) {
            CHECK(sols[i].pc >= sols[i - 1].pc);
            CHECK(sols[i].tau <= sols[i - 1].tau);
        }
    }
}

TEST_CASE("finite retry limits converge to the unlimited solution") {
    const PhyProfile phy = PhyProfile::ieee80211g();
    const auto spec = BackoffSpec::exponential(2.0, 16);
    const auto unlimited = solve(spec, 10, RetryLimit::unlimited(), phy);
    double prev_gap = 1.0;
    for (const int k : {5, 10, 20, 50}) {
        const auto sol = solve(spec, 10, RetryLimit::at_most(k), phy);
        const double gap = std::abs(sol.pc - unlimited.pc);
        CHECK(gap <= prev_gap + 1e-12);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-6);
}

TEST_CASE("throughput expressions") {
    // tau = 1, single node: every slot is a success.
    FixedPointSolution sol;
    sol.n = 1;
    sol.tau = 1.0;
    CHECK(throughput(sol, PhyProfile::ieee80211g()) == doctest::Approx(1.0));

    // equal slot lengths collapse S to p_succ
    sol.n = 10;
    sol.tau = 0.1;
    CHECK(throughput(sol, PhyProfile::equal_slots()) ==
          doctest::Approx(0.387420489).epsilon(1e-9));
}

TEST_CASE("single node throughput against the renewal form") {
    const PhyProfile phy = PhyProfile::ieee80211g();
    const auto sol =
        solve(BackoffSpec::exponential(2.0, 16), 1, RetryLimit::unlimited(), phy);
    // One node alternates a mean of 7.5 idle slots with each success.
    const double expected =
        phy.t_succ_us / (phy.t_succ_us + 7.5 * phy.t_idle_us);
    CHECK(sol.throughput == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("asymptotic pc per family") {
    const auto eb = asymptotic_pc(BackoffSpec::exponential(2.0));
    CHECK(eb.limit == doctest::Approx(0.5));
    CHECK(eb.stable);
    CHECK(eb.throughput_equal_slots ==
          doctest::Approx(std::log(2.0) * 0.5).epsilon(1e-12));

    const auto pb = asymptotic_pc(BackoffSpec::polynomial(5.0));
    CHECK(pb.limit == doctest::Approx(1.0));
    CHECK_FALSE(pb.stable);
    CHECK(pb.throughput_equal_slots == doctest::Approx(0.0));

    const auto seb = asymptotic_pc(BackoffSpec::sub_exponential(4.0, 0.7));
    CHECK_FALSE(seb.stable);
}

TEST_CASE("eb pc stays below 1/r but closes in") {
    const PhyProfile phy = PhyProfile::equal_slots();
    const auto spec = BackoffSpec::exponential(2.0, 16);
    for (const int n : {10, 100, 1000, 10000}) {
        CHECK(solve(spec, n, RetryLimit::unlimited(), phy).pc < 0.5);
    }
    const auto big = solve(spec, 100000, RetryLimit::unlimited(), phy);
    CHECK(big.pc > 0.5 - 0.02);
}

TEST_CASE("random specs satisfy the solver contract") {
    std::mt19937_64 rng(20240202);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const PhyProfile phy = PhyProfile::ieee80211g();
    for (int trial = 0; trial < 60; ++trial) {
        BackoffSpec spec;
        const int family = static_cast<int>(unit(rng) * 3.0);
        const int w0 = 2 + static_cast<int>(unit(rng) * 63.0);
        if (family == 0) {
            spec = BackoffSpec::exponential(1.1 + 3.0 * unit(rng), w0);
        } else if (family == 1) {
            spec = BackoffSpec::sub_exponential(1.5 + 3.0 * unit(rng),
                                                0.1 + 0.8 * unit(rng), w0);
        } else {
            spec = BackoffSpec::polynomial(0.2 + 6.0 * unit(rng), w0);
        }
        const int n = 1 + static_cast<int>(unit(rng) * 199.0);
        const auto retry = unit(rng) < 0.5
                               ? RetryLimit::unlimited()
                               : RetryLimit::at_most(
                                     static_cast<int>(unit(rng) * 20.0));
        const auto sol = solve(spec, n, retry, phy);
        CHECK(sol.pc >= 0.0);
        CHECK(sol.pc < 1.0);
        CHECK(sol.tau > 0.0);
        CHECK(sol.tau <= 1.0);
        CHECK(sol.throughput >= 0.0);
        CHECK(sol.throughput <= 1.0);
        if (sol.pc < 1.0 - 2e-9) {
            // interior root: the residual tolerance applies in full
            CHECK(sol.converged);
            const double residual =
                sol.pc - (1.0 - std::pow(1.0 - sol.tau, n - 1));
            CHECK(std::abs(residual) < 1e-8);
        }
    }
}

TEST_CASE("sweep preserves order and isolates failures") {
    const PhyProfile phy = PhyProfile::ieee80211g();
    const std::vector<int> sizes = {1, 7, 3};
    const auto sols = sweep(BackoffSpec::polynomial(3.0, 16), sizes,
                            RetryLimit::unlimited(), phy);
    REQUIRE(sols.size() == 3);
    CHECK(sols[0].n == 1);
    CHECK(sols[1].n == 7);
    CHECK(sols[2].n == 3);
    CHECK(sols[0].pc == doctest::Approx(0.0));
}
