#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "doctest.h"
#include "hlat/lattice.hpp"

using namespace hlat;
using namespace hlat::lattice;

namespace {

const std::vector<std::string> kRadii = {"0.5", "1", "1.5", "sqrt(2)", "2", "2.5", "3"};

// Slice integral ∫_{-1}^{1} (1−w²)^{q/2} dw by tanh-sinh quadrature.
double slice_volume(int q) {
    boost::math::quadrature::tanh_sinh<double> integrator;
    double slice = integrator.integrate([q](double w) { return std::pow(1 - w * w, q / 2.0); }, -1.0, 1.0);
    return std::pow(std::numbers::pi, q) / std::tgamma(q + 1.0) * slice;
}

}  // namespace

TEST_CASE("radius parsing is exact") {
    CHECK(RadiusSq::parse_x("1").num == 1);
    auto r = RadiusSq::parse_x("sqrt(2)");
    CHECK((r.num == 2 && r.den == 1));
    r = RadiusSq::parse_x("3/2");
    CHECK((r.num == 9 && r.den == 4));
    r = RadiusSq::parse_x("1.5");
    CHECK((r.num == 9 && r.den == 4));
    r = RadiusSq::parse_x2("10/4");
    CHECK((r.num == 5 && r.den == 2));
    CHECK_THROWS_AS(RadiusSq::parse_x("abc"), std::invalid_argument);
    CHECK_THROWS_AS(RadiusSq::parse_x("1/0"), std::invalid_argument);
}

TEST_CASE("count examples") {
    auto t = arith::build_r2q_prefix(3, 100);
    CHECK(count_points(t, RadiusSq::parse_x("1")) == 15);
    CHECK(count_points(t, RadiusSq::parse_x("sqrt(2)")) == 101);
    CHECK(count_points(t, RadiusSq::parse_x("0.5")) == 1);
    CHECK(count_points_bruteforce(3, RadiusSq::parse_x("1")) == 15);
    CHECK(count_points_bruteforce(3, RadiusSq::parse_x("0.99")) == 1);
    CHECK(count_points_bruteforce(4, RadiusSq::parse_x("1")) == 19);
    CHECK_THROWS_AS(count_points(t, RadiusSq::parse_x("11")), TableTooSmall);
}

TEST_CASE("table count agrees with brute force") {
    for (int q : {3, 4}) {
        auto t = arith::build_r2q_prefix(q, 20);
        for (const auto& s : kRadii) {
            auto r = RadiusSq::parse_x(s);
            INFO("q=" << q << " x=" << s);
            REQUIRE(count_points(t, r) == count_points_bruteforce(q, r));
        }
    }
    // boundary-heavy rationals
    auto t = arith::build_r2q_prefix(3, 30);
    for (std::uint64_t p = 1; p <= 40; ++p) {
        auto r = RadiusSq::from_x(p, 8);
        REQUIRE(count_points(t, r) == count_points_bruteforce(3, r));
        auto r2 = RadiusSq::from_x2(p, 3);
        REQUIRE(count_points(t, r2) == count_points_bruteforce(3, r2));
    }
}

TEST_CASE("count is monotone and depends only on thresholds") {
    auto t = arith::build_r2q_prefix(3, 500);
    u128 prev = 0;
    for (std::uint64_t p = 1; p <= 800; ++p) {
        u128 c = count_points(t, RadiusSq::from_x(p, 40));
        REQUIRE(c >= prev);
        prev = c;
    }
    // x² = 7 and x² = 7 + tiny: x⁴ − w² thresholds unchanged ⇒ same count
    CHECK(count_points(t, RadiusSq::from_x2(7)) == count_points(t, RadiusSq::from_x2(7000001, 1000000)));
}

TEST_CASE("volume closed form") {
    CHECK(double(volume_unit_ball(3)) == doctest::Approx(std::pow(std::numbers::pi, 4) / 16).epsilon(4e-16));
    for (int q = 3; q <= 8; ++q) {
        long double v = volume_unit_ball(q);
        CHECK(double(v) == doctest::Approx(slice_volume(q)).epsilon(1e-11));
        CHECK(v < 2 * std::pow(std::numbers::pi, q) / std::tgamma(q + 1.0));
    }
}

TEST_CASE("volume Monte Carlo cross-check q=4") {
    // sample (v,w) in [−1,1]^9; inside iff |v|⁴ + w² ≤ 1
    std::mt19937_64 rng(12345);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n = 2000000;
    int hit = 0;
    for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int j = 0; j < 8; ++j) {
            double c = u(rng);
            s += c * c;
        }
        double w = u(rng);
        if (s * s + w * w <= 1) ++hit;
    }
    double est = 512.0 * hit / n;
    CHECK(est == doctest::Approx(double(volume_unit_ball(4))).epsilon(2e-2));
}

TEST_CASE("normalized error examples") {
    GroupParams g(3);
    auto t = arith::build_r2q_prefix(3, 10);
    auto e = normalized_error(g, t, RadiusSq::parse_x("1"));
    CHECK(double(e.normalized_error) == doctest::Approx(15 - std::pow(std::numbers::pi, 4) / 16).epsilon(1e-15));
    e = normalized_error(g, t, RadiusSq::parse_x("sqrt(2)"));
    CHECK(double(e.normalized_error) ==
          doctest::Approx((101 - std::pow(std::numbers::pi, 4) / 16 * 16) / std::pow(2.0, 2.5)).epsilon(1e-14));
    e = normalized_error(g, t, RadiusSq::from_x(1, 1000));
    CHECK(e.count == 1);
    CHECK(double(e.normalized_error) == doctest::Approx(1e15).epsilon(1e-10));
    CHECK_THROWS_AS(GroupParams(2), std::invalid_argument);
}

TEST_CASE("sample grid is exact and equispaced") {
    auto g = sample_grid(300, 1, 4000);
    CHECK(g.size() == 4000);
    CHECK(g[0].num == 90000);
    CHECK(g[0].den == 1);
    CHECK(double(g[1].x()) == doctest::Approx(300.075));
    CHECK(double(g.back().x()) == doctest::Approx(600 - 0.075));
    CHECK(table_limit_for(300, 1) == 360001);
}
