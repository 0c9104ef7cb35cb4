#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "uwarrant/pricer.hpp"
#include "uwarrant/uncertainty.hpp"

using namespace uwarrant;
using namespace uwarrant::oracle;

namespace {
const FirmCapitalStructure kCap(50.0, 100.0, 1.0, 50.0);
const MarketObservables kMkt(100.0, 0.04, 0.04, 3.0, 0.02);
}  // namespace

TEST_CASE("midpoint rule fundamentals") {
    CHECK(brute_quantile_integral([](double) { return 1.0; }, 1000) == 1.0);
    CHECK(std::abs(brute_quantile_integral([](double a) { return inv_std_normal(a); },
                                           1'000'000)) <= 1e-4);
    CHECK(std::abs(brute_quantile_integral([](double a) { return std::pow(a / (1.0 - a), 0.3); },
                                           10'000'000) -
                   beta_identity(0.3)) <= 1e-3);
    CHECK_THROWS_AS((void)brute_quantile_integral([](double) { return 1.0; }, 999), DomainError);
}

TEST_CASE("growth identity values") {
    CHECK(beta_identity(0.5) == doctest::Approx(1.5707963267948966).epsilon(1e-15));  // pi/2
    CHECK(beta_identity(1e-8) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(beta_identity(0.066159467450615046) ==
          doctest::Approx(1.00723645403012).epsilon(1e-12));
    CHECK(beta_identity(0.9) == doctest::Approx(9.1497666461674677).epsilon(1e-13));
    CHECK_THROWS_AS((void)beta_identity(0.0), DomainError);
    CHECK_THROWS_AS((void)beta_identity(1.0), DomainError);
    CHECK_THROWS_AS((void)beta_identity(-0.1), DomainError);
    CHECK_THROWS_AS((void)beta_identity(1.1), DomainError);
}

TEST_CASE("comparison report") {
    const OracleReport r = compare("case", 2.0, -4.0);
    CHECK(r.abs_err == 6.0);
    CHECK(r.rel_err == doctest::Approx(1.5).epsilon(1e-15));  // max(|oracle|, 1) = 4
    const OracleReport tiny = compare("tiny", 1e-3, 2e-3);
    CHECK(tiny.rel_err == doctest::Approx(1e-3).epsilon(1e-12));  // denominator clamps to 1
    CHECK(tiny.abs_err >= 0.0);
}

TEST_CASE("deep-in-the-money closed form") {
    SUBCASE("applies when the exercise boundary is below machine scale") {
        const FirmCapitalStructure cap(50.0, 100.0, 1.0, 10.0);
        const double closed = deep_itm_price(5000.0, 0.04, cap, kMkt);
        CHECK(closed == doctest::Approx(28.662917522233759).epsilon(1e-13));
    }
    SUBCASE("refuses the reference setup, whose boundary level is 1.1e-5") {
        CHECK_THROWS_AS((void)deep_itm_price(5000.0, 0.04, kCap, kMkt), OracleInapplicable);
    }
    SUBCASE("zero volatility matches the pricer exactly") {
        const FirmCapitalStructure cap(50.0, 100.0, 1.0, 10.0);
        CHECK(deep_itm_price(5000.0, 0.0, cap, kMkt) ==
              doctest::Approx(price_warrant(5000.0, 0.0, cap, kMkt)).epsilon(1e-15));
    }
    SUBCASE("zero exercise payment removes the positive part entirely") {
        const FirmCapitalStructure cap(50.0, 100.0, 1.0, 0.0);
        const double c = 0.04 * 3.0 * std::sqrt(3.0) / 3.14159265358979323846;
        const double want = std::exp(-0.12) * 5000.0 * std::exp(0.06) * beta_identity(c) / 150.0;
        CHECK(deep_itm_price(5000.0, 0.04, cap, kMkt) == doctest::Approx(want).epsilon(1e-15));
    }
}

TEST_CASE("pricer against the brute-force quantile integral") {
    const double tau = kMkt.horizon;
    const double discount = std::exp(-kMkt.rate * tau);
    const double c = 0.04 * tau * std::sqrt(3.0) / 3.14159265358979323846;
    const double forward = 5000.0 * std::exp(kMkt.drift * tau);
    const auto quantile = [&](double alpha) {
        const double v = forward * std::pow(alpha / (1.0 - alpha), c);
        return discount * std::max(v - 2500.0, 0.0) / 150.0;
    };
    const double brute = brute_quantile_integral(quantile, 4'000'000);
    const double main = price_warrant(5000.0, 0.04, kCap, kMkt);
    CHECK(compare("reference price", main, brute).rel_err <= 1e-3);
}
