#include <chrono>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "hlat/voronoi.hpp"

using namespace hlat;
using namespace hlat::voronoi;

TEST_CASE("tau functions") {
    const double pi = std::numbers::pi;
    CHECK(tau(0.5) == doctest::Approx(1 / (2 * pi)).epsilon(1e-15));
    CHECK(tau(0.0) == doctest::Approx(1 / pi).epsilon(1e-15));
    CHECK(tau(1.0) == 0.0);
    CHECK(tau_star(0.5) == 0.25);
    CHECK_THROWS_AS(tau(1.5), std::domain_error);
    CHECK_THROWS_AS(tau_star(-0.1), std::domain_error);
    // continuity at the ends: τ(t) = 1/π + O(t²)
    CHECK(std::fabs(tau(1e-4) - 1 / pi) < 1e-7);
    CHECK(std::fabs(tau(1 - 1e-6)) < 1e-5);
}

TEST_CASE("coefficient examples") {
    for (double H : {1.0, 2.5, 7.0, 100.0}) {
        CHECK(coeff_aH(1, 1, 3, H) == doctest::Approx(tau(1.0 / (std::floor(H) + 1)) / 2).epsilon(1e-15));
        // m > 2H² ⇒ all vanish
        auto c = coefficients(std::uint64_t(2 * H * H) + 1, 1, 3, H);
        CHECK(c.a == 0.0);
        CHECK(c.a_star == 0.0);
        CHECK(c.a_chi == 0.0);
        CHECK(c.b_star == 0.0);
    }
}

TEST_CASE("large-H limit of the coefficients") {
    const double pi = std::numbers::pi;
    for (int q : {3, 4})
        for (std::uint64_t m : {1, 2, 5}) {
            double r = arith::r2_weighted(m, 1, q);
            double ratio = 4 * pi * std::pow(double(m), 0.75) * coeff_aH(m, 1, q, 1e5) / r;
            CHECK(ratio == doctest::Approx(1.0).epsilon(1e-6));
        }
}

TEST_CASE("coefficient bounds and convergence constants") {
    const double pi = std::numbers::pi;
    double Cmax = 0, cfit = 0, cfit_chi = 0;
    const double H = 60, Y = 200;
    for (int q : {3, 4, 5})
        for (std::uint64_t m = 1; m <= 2 * H * H; m += (m < 400 ? 1 : 37))
            for (std::uint64_t d = 1; d <= 8; ++d) {
                auto c = coefficients(m, d, q, H);
                REQUIRE(c.a >= 0.0);
                // the twisted coefficient carries an explicit factor 2
                REQUIRE(std::fabs(c.a_chi) <= 2 * c.a + 1e-15);
                double r = arith::r2_weighted(m, d, q);
                double m34 = std::pow(double(m), 0.75);
                if (r > 0) Cmax = std::max(Cmax, c.a * m34 / r);
                else REQUIRE(c.a == 0.0);
                if (m <= Y && r > 0) {
                    cfit = std::max(cfit, std::fabs(4 * pi * m34 * c.a - r) / (r * Y / (H * H)));
                    double rc = arith::r2_weighted_chi(m, d, q);
                    cfit_chi = std::max(cfit_chi, std::fabs(-2 * pi * m34 * c.a_chi - rc) / (r * Y / (H * H)));
                }
            }
    MESSAGE("measured C = " << Cmax << ", fitted c' = " << cfit << ", twisted c' = " << cfit_chi);
    CHECK(Cmax < 1.0);
    CHECK(cfit < 10.0);
    CHECK(cfit_chi < 10.0);
}

TEST_CASE("grid evaluation matches direct evaluation") {
    for (int q : {3, 4, 5}) {
        lattice::GroupParams g(q);
        const double X = 12, H = X * X / 2;
        const std::size_t n = 300;
        unsigned parts = Part::S | Part::SStar | Part::TChi | Part::TChiTwist | Part::TStar;
        auto grid = evaluate_on_grid(g, H, parts, X, n);
        for (std::size_t i : {std::size_t(0), std::size_t(1), std::size_t(127), std::size_t(128), std::size_t(299)}) {
            double u = double(n + i) / double(n);
            double direct = evaluate(g, H, parts, X * X * u * u);
            REQUIRE(grid[i] == doctest::Approx(direct).epsilon(1e-10));
        }
    }
}

TEST_CASE("sums are reproducible and bounded") {
    lattice::GroupParams g(4);
    const double H = 50;
    double a = eval_S_qH(g, 123.456, H), b = eval_S_qH(g, 123.456, H);
    CHECK(a == b);
    CHECK(eval_S_qH(g, 5.0, 0.5) == 0.0);
    double bound = 0;
    for (std::uint64_t d = 1; d * d <= H; ++d)
        for (std::uint64_t m = 1; m <= 2 * H * H; ++m)
            bound += 2 * g.rho * std::fabs(arith::xi(d, 4)) / std::pow(double(d), 2.5) * coeff_aH(m, d, 4, H);
    for (double x2 : {1.0, 17.3, 250.0, 1234.5}) CHECK(std::fabs(eval_S_qH(g, x2, H)) <= bound);
    lattice::GroupParams g3(3);
    CHECK(eval_T_sums(g3, 10.0, 50) != 0.0);
    CHECK(eval_T_sums(g, 10.0, 50) == 0.0);
}

TEST_CASE("mean square gap is small against the second moment") {
    lattice::GroupParams g(3);
    auto t = arith::build_r2q_prefix(3, 1700);
    auto r = mean_square_gap(g, t, 20, 200);
    CHECK(r.mean_square_gap >= 0.0);
    CHECK(r.H == 200.0);
    CHECK(r.mean_square_gap < 0.1 * r.empirical_second_moment);
    CHECK_THROWS_AS(mean_square_gap(g, t, 40, 10), TableTooSmall);
}
