#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "uwarrant/pricer.hpp"

using namespace uwarrant;

namespace {

const FirmCapitalStructure kCap(50.0, 100.0, 1.0, 50.0);
const MarketObservables kMkt(100.0, 0.04, 0.04, 3.0, 0.02);

// Test-local bisection solve of V - M f_w(V, sigma) = N S_t, independent of
// the library's Newton iteration.
double solve_value_by_bisection(double sigma, const FirmCapitalStructure& cap,
                                const MarketObservables& mkt) {
    const double equity = cap.shares * mkt.stock_price;
    const auto gap = [&](double v) {
        return v - cap.warrants * price_warrant(v, sigma, cap, mkt) - equity;
    };
    double lo = equity;
    double hi = 2.0 * equity;
    while (gap(hi) < 0.0) hi *= 2.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (gap(mid) < 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("no warrants decouples the system exactly") {
    const FirmCapitalStructure cap(50.0, 0.0, 1.0, 50.0);
    const CalibrationResult res = calibrate(cap, kMkt);
    CHECK(res.sigma == kMkt.stock_vol);
    CHECK(res.firm_value == cap.shares * kMkt.stock_price);
    CHECK(res.beta == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(res.price == doctest::Approx(price_warrant(5000.0, 0.04, cap, kMkt)).epsilon(1e-14));
}

TEST_CASE("reference inputs calibrate within tolerance") {
    const CalibrationResult res = calibrate(kCap, kMkt);
    const double equity = kCap.shares * kMkt.stock_price;
    CHECK(res.residual_value / equity <= 1e-8);
    CHECK(res.residual_vol / kMkt.stock_vol <= 1e-8);
    CHECK(res.iterations <= 200);
    CHECK(res.sigma == doctest::Approx(0.056789146902185831).epsilon(1e-8));
    CHECK(res.firm_value == doctest::Approx(9703.2104654111810).epsilon(1e-8));
    CHECK(res.price == doctest::Approx(47.032104654111810).epsilon(1e-8));
    CHECK(res.beta == doctest::Approx(0.70435993815678165).epsilon(1e-8));
    CHECK_FALSE(res.multiple_roots);
    REQUIRE(res.sigma_brackets.size() == 1);
    CHECK(res.sigma_brackets.front().first <= res.sigma);
    CHECK(res.sigma_brackets.front().second >= res.sigma);
    // the value equation holds self-consistently
    CHECK(res.firm_value ==
          doctest::Approx(equity + kCap.warrants * res.price).epsilon(1e-10));
}

TEST_CASE("calibrated point is a fixed point of the implied volatility") {
    const CalibrationResult first = calibrate(kCap, kMkt);
    const double implied = implied_stock_vol(first.firm_value, first.sigma, kCap, kMkt);
    const MarketObservables fed_back(kMkt.stock_price, implied, kMkt.rate, kMkt.horizon,
                                     kMkt.drift);
    const CalibrationResult second = calibrate(kCap, fed_back);
    CHECK(std::abs(second.sigma - first.sigma) <= 1e-8 * first.sigma);
    CHECK(std::abs(second.firm_value - first.firm_value) <= 1e-8 * first.firm_value);
}

TEST_CASE("value equation solution grows with volatility") {
    double prev = 0.0;
    for (double sigma : {0.01, 0.05, 0.1, 0.2, 0.3}) {
        const double v = solve_value_by_bisection(sigma, kCap, kMkt);
        CHECK(v >= prev);
        prev = v;
    }
}

TEST_CASE("unreachable stock volatility fails with a boundary diagnostic") {
    const MarketObservables wild(100.0, 0.9, 0.04, 3.0, 0.02);
    try {
        (void)calibrate(kCap, wild);
        FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
        CHECK(std::string(e.what()).find("unreachable") != std::string::npos);
        const CalibrationResult& last = e.last_iterate();
        CHECK(last.iterations > 0);
        CHECK(last.sigma > 0.0);  // best feasible probe is carried out
    }
}

TEST_CASE("iteration budget is enforced and reports the last iterate") {
    SolverSettings tiny;
    tiny.max_iterations = 3;
    try {
        (void)calibrate(kCap, kMkt, tiny);
        FAIL("expected CalibrationError");
    } catch (const CalibrationError& e) {
        CHECK(std::string(e.what()).find("budget") != std::string::npos);
        CHECK(e.last_iterate().iterations > 3);
    }
}

TEST_CASE("solver settings are validated") {
    SolverSettings s;
    s.tol = 0.0;
    CHECK_THROWS_AS((void)calibrate(kCap, kMkt, s), DomainError);
    s = {};
    s.damping = 1.5;
    CHECK_THROWS_AS((void)calibrate(kCap, kMkt, s), DomainError);
    s = {};
    s.scan_points = 1;
    CHECK_THROWS_AS((void)calibrate(kCap, kMkt, s), DomainError);
    s = {};
    s.max_iterations = 0;
    CHECK_THROWS_AS((void)calibrate(kCap, kMkt, s), DomainError);
}

TEST_CASE("a moderately diluted setup calibrates too") {
    const FirmCapitalStructure cap(200.0, 30.0, 2.0, 80.0);
    const MarketObservables mkt(50.0, 0.12, 0.03, 1.5, 0.05);
    const CalibrationResult res = calibrate(cap, mkt);
    CHECK(res.residual_value / (cap.shares * mkt.stock_price) <= 1e-8);
    CHECK(res.residual_vol / mkt.stock_vol <= 1e-8);
    CHECK(res.sigma > 0.0);
    CHECK(res.firm_value > cap.shares * mkt.stock_price);
    CHECK(res.beta > 0.0);
}
