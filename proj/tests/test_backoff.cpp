#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "backlab/backoff.hpp"
#include "backlab/errors.hpp"

using namespace backlab;

TEST_CASE("growth factor per family") {
    CHECK(growth_factor(BackoffSpec::exponential(2.0), 3) == doctest::Approx(8.0));
    CHECK(growth_factor(BackoffSpec::polynomial(3.0), 2) == doctest::Approx(9.0));
    CHECK(growth_factor(BackoffSpec::sub_exponential(4.0, 0.7), 1) ==
          doctest::Approx(4.0));
    CHECK(growth_factor(BackoffSpec::exponential(2.0), 0) == doctest::Approx(1.0));
    CHECK(growth_factor(BackoffSpec::polynomial(0.5), 0) == doctest::Approx(1.0));
}

TEST_CASE("growth factor table bounds") {
    const auto spec = BackoffSpec::custom_table({1.0, 2.0, 4.0});
    CHECK(growth_factor(spec, 2) == doctest::Approx(4.0));
    CHECK_THROWS_AS(growth_factor(spec, 3), std::out_of_range);
}

TEST_CASE("window values") {
    const auto eb = BackoffSpec::exponential(2.0, 16);
    CHECK(window(eb, 3).analytic == doctest::Approx(128.0));
    CHECK(window(eb, 3).integer_window == 128);

    // 32 * 4^(2^0.7), evaluated directly: 2^0.7 = 1.6245047927124712,
    // 4^1.6245... = 9.50712800665, times 32 = 304.228096213.
    const auto seb = BackoffSpec::sub_exponential(4.0, 0.7, 32);
    CHECK(window(seb, 2).analytic == doctest::Approx(304.228096212879));
    CHECK(window(seb, 2).integer_window == 304);

    const auto pb = BackoffSpec::polynomial(1.0, 16);
    CHECK(window(pb, 0).analytic == doctest::Approx(16.0));
    CHECK(window(pb, 0).integer_window == 16);
}

TEST_CASE("window floor and overflow clamp") {
    // Tables may start below 1; the integer window never drops under 2.
    std::vector<double> values(32);
    for (int i = 0; i < 32; ++i) {
        values[i] = 0.05 * (i + 1);
    }
    const auto spec = BackoffSpec::custom_table(values, 2);
    CHECK(window(spec, 0).integer_window == 2);

    const auto eb = BackoffSpec::exponential(2.0, 16);
    const auto huge = window(eb, 100);
    CHECK(huge.integer_window > 0);  // clamped, not overflowed
    CHECK(huge.analytic > 1e31);
}

TEST_CASE("gamma limit closed forms") {
    CHECK(gamma_limit(BackoffSpec::exponential(2.0)).value == doctest::Approx(2.0));
    CHECK(gamma_limit(BackoffSpec::exponential(1.5)).value == doctest::Approx(1.5));
    CHECK(gamma_limit(BackoffSpec::polynomial(3.0)).value == doctest::Approx(1.0));
    CHECK(gamma_limit(BackoffSpec::sub_exponential(4.0, 0.7)).value ==
          doctest::Approx(1.0));
    CHECK_FALSE(gamma_limit(BackoffSpec::exponential(2.0)).oscillating);
}

TEST_CASE("gamma limit on a doubling table") {
    std::vector<double> values;
    double v = 1.0;
    for (int i = 0; i < 32; ++i) {
        values.push_back(v);
        v *= 2.0;
    }
    const auto estimate = gamma_limit(BackoffSpec::custom_table(values));
    CHECK(estimate.value == doctest::Approx(2.0).epsilon(1e-9));
    CHECK_FALSE(estimate.oscillating);
}

TEST_CASE("gamma limit flags alternating tables") {
    // Even entries 2^k, odd entries 3*2^(k-1): ratios alternate 3 and 4/3,
    // so no gamma limit exists even though the table is Omega(2^k).
    std::vector<double> values;
    for (int k = 0; k < 36; ++k) {
        values.push_back(k % 2 == 0 ? std::pow(2.0, k)
                                    : 3.0 * std::pow(2.0, k - 1));
    }
    const auto estimate = gamma_limit(BackoffSpec::custom_table(values));
    CHECK(estimate.oscillating);
    CHECK_THROWS_AS(growth_class(BackoffSpec::custom_table(values)),
                    ClassificationError);
}

TEST_CASE("gamma limit needs enough table entries") {
    const auto spec = BackoffSpec::custom_table({1.0, 2.0, 4.0, 8.0});
    CHECK_THROWS_AS(gamma_limit(spec), InsufficientDataError);
}

TEST_CASE("growth class dichotomy") {
    CHECK(growth_class(BackoffSpec::exponential(2.0)).at_least_exponential);
    CHECK(growth_class(BackoffSpec::exponential(2.0)).gamma == doctest::Approx(2.0));
    CHECK_FALSE(
        growth_class(BackoffSpec::sub_exponential(4.0, 0.7)).at_least_exponential);
    CHECK_FALSE(growth_class(BackoffSpec::polynomial(5.0)).at_least_exponential);
}

TEST_CASE("growth class ignores w0") {
    for (const int w0 : {2, 16, 32, 1024}) {
        CHECK(growth_class(BackoffSpec::exponential(3.0, w0)).at_least_exponential);
        CHECK_FALSE(
            growth_class(BackoffSpec::polynomial(2.0, w0)).at_least_exponential);
        CHECK_FALSE(growth_class(BackoffSpec::sub_exponential(2.0, 0.5, w0))
                        .at_least_exponential);
    }
}

TEST_CASE("windows are non-decreasing in the stage") {
    const std::vector<BackoffSpec> specs = {
        BackoffSpec::exponential(1.2), BackoffSpec::exponential(2.0),
        BackoffSpec::sub_exponential(4.0, 0.7),
        BackoffSpec::sub_exponential(2.0, 0.3), BackoffSpec::polynomial(0.5),
        BackoffSpec::polynomial(3.0), BackoffSpec::polynomial(7.0)};
    for (const auto& spec : specs) {
        double prev = 0.0;
        for (int k = 0; k <= 64; ++k) {
            const double w = window(spec, k).analytic;
            CHECK(w >= prev);
            prev = w;
        }
    }
}

TEST_CASE("exponential windows match the closed form") {
    const auto spec = BackoffSpec::exponential(2.0, 16);
    double expected = 16.0;
    for (int k = 0; k <= 40; ++k) {
        const double w = window(spec, k).analytic;
        CHECK(std::abs(w - expected) <= 1e-12 * expected);
        expected *= 2.0;
    }
}

TEST_CASE("growth ratio is consistent with the growth factor") {
    const std::vector<BackoffSpec> specs = {
        BackoffSpec::exponential(1.7), BackoffSpec::sub_exponential(3.0, 0.6),
        BackoffSpec::polynomial(2.5)};
    for (const auto& spec : specs) {
        for (int k = 0; k < 30; ++k) {
            const double direct =
                growth_factor(spec, k + 1) / growth_factor(spec, k);
            CHECK(growth_ratio(spec, k) == doctest::Approx(direct).epsilon(1e-12));
        }
    }
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS(BackoffSpec::exponential(1.0), std::invalid_argument);
    CHECK_THROWS_AS(BackoffSpec::exponential(2.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(BackoffSpec::sub_exponential(4.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(BackoffSpec::sub_exponential(0.5, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(BackoffSpec::polynomial(0.0), std::invalid_argument);
    CHECK_THROWS_AS(BackoffSpec::custom_table({}), std::invalid_argument);
    CHECK_THROWS_AS(BackoffSpec::custom_table({1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(BackoffSpec::custom_table({1.0, -2.0}), std::invalid_argument);
}
