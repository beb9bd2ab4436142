#include "hlat/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "hlat/distribution.hpp"
#include "hlat/empirical.hpp"
#include "hlat/lattice.hpp"
#include "hlat/moments.hpp"
#include "hlat/voronoi.hpp"

namespace hlat::acceptance {

namespace {

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// Things several criteria need; built on first use.
struct Context {
    Options opt;
    std::unique_ptr<distribution::DensityGrid> grid;
    std::unique_ptr<distribution::DensityMoments> mom;
    std::unique_ptr<distribution::MomentBudget> budget;
    std::unique_ptr<arith::ArithTables> tables;  // q = 3, enough for X = 300

    const distribution::DensityGrid& density() {
        if (!grid) {
            grid = std::make_unique<distribution::DensityGrid>(distribution::density(3));
            mom = std::make_unique<distribution::DensityMoments>(distribution::cdf_and_moments(*grid, 3));
            budget = std::make_unique<distribution::MomentBudget>(distribution::moment_budget(3, *grid, *mom));
        }
        return *grid;
    }
    const arith::ArithTables& tables300() {
        if (!tables) {
            arith::TableOptions t;
            t.cache_dir = opt.cache_dir;
            tables = std::make_unique<arith::ArithTables>(arith::build_r2q_prefix(3, lattice::table_limit_for(300, 1), t));
        }
        return *tables;
    }
};

using Check = CriterionResult (*)(Context&);

CriterionResult counting_oracle(Context&) {
    CriterionResult r{1, "counting oracle", true, "", 0};
    const std::vector<std::string> radii = {"0.5", "1", "1.5", "sqrt(2)", "2", "2.5", "3"};
    int checked = 0;
    for (int q : {3, 4}) {
        auto tables = arith::build_r2q_prefix(q, 9);
        for (const auto& s : radii) {
            auto x = lattice::RadiusSq::parse_x(s);
            const u128 fast = lattice::count_points(tables, x);
            const u128 brute = lattice::count_points_bruteforce(q, x);
            ++checked;
            if (fast != brute) {
                r.pass = false;
                r.detail += "q=" + std::to_string(q) + " x=" + s + ": " + to_string(fast) + " vs " + to_string(brute) + "; ";
            }
        }
    }
    if (r.pass) r.detail = std::to_string(checked) + " radii agree exactly";
    return r;
}

CriterionResult volume(Context&) {
    CriterionResult r{2, "volume", true, "", 0};
    boost::math::quadrature::tanh_sinh<double> integrator;
    double worst = 0;
    for (int q = 3; q <= 8; ++q) {
        const double slice = integrator.integrate([q](double w) { return std::pow(1 - w * w, q / 2.0); }, -1.0, 1.0);
        const double quad = std::pow(std::numbers::pi, q) / std::tgamma(q + 1.0) * slice;
        const double rel = std::fabs(double(lattice::volume_unit_ball(q)) / quad - 1);
        worst = std::max(worst, rel);
    }
    const double exact3 = std::pow(std::numbers::pi, 4) / 16;
    const double rel3 = std::fabs(double(lattice::volume_unit_ball(3)) - exact3) / exact3;
    r.pass = worst < 1e-10 && rel3 <= 4 * std::numeric_limits<double>::epsilon();
    r.detail = fmt("max relative deviation from quadrature %.2e (q=3..8); q=3 vs pi^4/16 %.2e", worst, rel3);
    return r;
}

CriterionResult scaling_laws(Context&) {
    CriterionResult r{3, "weighted-count scaling laws", true, "", 0};
    std::uint64_t checked = 0, bad = 0;
    for (int q : {3, 4, 5})
        for (std::uint64_t m = 1; m <= 200; ++m)
            for (std::uint64_t d = 1; d <= 10; ++d)
                for (std::uint64_t s = 1; s <= 5; ++s) {
                    checked += 2;
                    if (arith::r2_weighted(m * s * s, d * s, q) != arith::r2_weighted(m, d, q)) ++bad;
                    if (arith::r2_weighted_chi(m * s * s, d * s, q) != arith::chi4(s) * arith::r2_weighted_chi(m, d, q))
                        ++bad;
                }
    r.pass = bad == 0;
    r.detail = fmt("%llu identities checked (q=3,4,5), %llu failures", (unsigned long long)checked,
                   (unsigned long long)bad);
    return r;
}

CriterionResult moment_cross_validation(Context&) {
    CriterionResult r{4, "moment cross-validation", true, "", 0};
    double worst_ratio = 0, worst_rel = 0, worst_q1 = 0;
    for (int q : {3, 4})
        for (std::uint64_t m : {1, 2, 5, 13, 17}) {
            auto c = moments::q2_closed(q, m, {40, 40});
            auto a = moments::q_analytic(q, m, 2, {40, 40});
            auto e = moments::q_ergodic(q, m, 2, 12, {.K = 24});
            const double ratio = std::fabs(c.value - e.value) / (c.error_estimate + e.error_estimate);
            const double rel = std::fabs(a.value - c.value) / c.value;
            worst_ratio = std::max(worst_ratio, ratio);
            worst_rel = std::max(worst_rel, rel);
            if (!(ratio <= 1.0) || !(rel < 1e-12)) r.pass = false;
            for (auto v : {moments::q_analytic(q, m, 1, {40, 40}).value,
                           moments::q_ergodic(q, m, 1, 12, {.K = 24}).value}) {
                worst_q1 = std::max(worst_q1, std::fabs(v));
                if (!(std::fabs(v) <= 1e-9)) r.pass = false;
            }
        }
    r.detail = fmt("max |closed-ergodic|/(combined error) %.3f; max analytic vs closed rel %.1e; max |Q(m,1)| %.1e",
                   worst_ratio, worst_rel, worst_q1);
    return r;
}

CriterionResult third_moment(Context&) {
    CriterionResult r{5, "third moment sign", true, "", 0};
    std::ostringstream os;
    for (int q : {3, 4, 5}) {
        auto t = moments::third_moment_sum(q, 50);
        // every Q(m,3) carries the sign of the majorant shape, so the m > 50 tail
        // only adds negative terms; the sum itself must stay negative within the
        // change against half depth
        const bool ok = t.all_nonpositive && t.sum.value + t.sum.convergence_delta < 0;
        if (!ok) r.pass = false;
        os << fmt("q=%d sum %.3f (depth change %.3f, tail estimate -%.3f) ", q, t.sum.value, t.sum.convergence_delta,
                  t.tail_magnitude_estimate);
    }
    r.detail = os.str();
    return r;
}

struct DensityChecks {
    bool pass = true;
    std::string detail;
};

DensityChecks density_checks(const distribution::DensityGrid& g, const distribution::DensityMoments& mom, double V) {
    DensityChecks c;
    const double m0 = mom.raw[0], m1 = mom.raw[1], m2 = mom.raw[2], m3 = mom.raw[3];
    c.pass = std::fabs(m0 - 1) <= 1e-3 && std::fabs(m1) <= 1e-3 && std::fabs(m2 / V - 1) <= 0.02 && m3 < 0 &&
             mom.min_P >= -1e-8 && g.Phi[0] == distribution::cplx(1.0, 0.0);
    c.detail = fmt("int P %.12f, int aP %.2e, int a^2P %.6f (V %.6f), int a^3P %.4f, min P %.2e", m0, m1, m2, V, m3,
                   mom.min_P);
    return c;
}

CriterionResult density_integrity(Context& ctx) {
    CriterionResult r{6, "density integrity", true, "", 0};
    const auto& g = ctx.density();
    const double V = moments::variance_total(3);
    auto c = density_checks(g, *ctx.mom, V);
    // conjugate symmetry: Φ on the negative axis, computed independently
    const std::size_t J = g.Phi.size() - 1;
    auto neg = distribution::char_function(3, g.M, -g.sigma_step, J, g.trunc);
    double sym = 0;
    for (std::size_t j = 0; j <= J; ++j) sym = std::max(sym, std::abs(neg.values[j] - std::conj(g.Phi[j])));
    r.pass = c.pass && sym <= 1e-10;
    r.detail = c.detail + fmt(", Phi(0)=%.1f, max|Phi(-s)-conj Phi(s)| %.1e", g.Phi[0].real(), sym);
    return r;
}

CriterionResult empirical_convergence(Context& ctx) {
    CriterionResult r{7, "empirical convergence", true, "", 0};
    const auto& g = ctx.density();
    const auto& mom = *ctx.mom;
    const double V = moments::variance_total(3);
    lattice::GroupParams p(3);
    auto s300 = empirical::sample_errors(p, ctx.tables300(), 300, 4000);
    auto s75 = empirical::sample_errors(p, ctx.tables300(), 75, 4000);
    const double ks300 = empirical::ks_distance(s300, g, mom), ks75 = empirical::ks_distance(s75, g, mom);
    const double ksg = empirical::ks_distance_gaussian(s300, mom.raw[2]);
    r.pass = std::fabs(s300.mean) < 0.05 && std::fabs(s300.m2 / V - 1) < 0.10 && s300.m3 < 0 && ks300 < ks75 &&
             ks300 < ksg;
    r.detail = fmt("X=300: mean %.4f, m2 %.3f (V %.3f), m3 %.2f, KS %.4f (X=75: %.4f), KS to Gaussian %.4f", s300.mean,
                   s300.m2, V, s300.m3, ks300, ks75, ksg);
    return r;
}

CriterionResult theorem4_gap(Context& ctx) {
    CriterionResult r{8, "partial-sum L2 gap", true, "", 0};
    lattice::GroupParams p(3);
    auto s = empirical::sample_errors(p, ctx.tables300(), 200, 4000);
    const phi::PhiTruncation tr{64, 64, 0};
    const double g0 = empirical::theorem4_l2_gap(s, 0, tr);
    std::vector<double> gaps;
    std::string list = fmt("gap(0) %.3f", g0);
    for (std::uint64_t M : {1, 5, 10, 20, 40}) {
        gaps.push_back(empirical::theorem4_l2_gap(s, M, tr));
        list += fmt(", gap(%llu) %.3f", (unsigned long long)M, gaps.back());
    }
    for (std::size_t i = 1; i < gaps.size(); ++i)
        if (!(gaps[i] < gaps[i - 1])) r.pass = false;
    if (!(gaps.back() < 0.5 * g0)) r.pass = false;
    r.detail = list;
    return r;
}

CriterionResult voronoi_trend(Context& ctx) {
    CriterionResult r{9, "Voronoi gap trend", true, "", 0};
    lattice::GroupParams p(3);
    std::vector<double> gaps;
    std::string list;
    for (std::uint64_t X : {20, 40, 80}) {
        auto v = voronoi::mean_square_gap(p, ctx.tables300(), X, 128);
        gaps.push_back(v.mean_square_gap);
        list += fmt("%sX=%llu gap %.4f (H=%.0f)", list.empty() ? "" : ", ", (unsigned long long)X, v.mean_square_gap, v.H);
    }
    r.pass = gaps[1] < gaps[0] && gaps[2] < gaps[1];
    r.detail = list;
    return r;
}

CriterionResult stability(Context& ctx) {
    CriterionResult r{10, "truncation stability", true, "", 0};
    const auto& base = ctx.density();
    const auto& b = *ctx.budget;
    const double V = moments::variance_total(3);
    distribution::DensityOptions o;
    o.M = base.M;
    o.A = base.A;
    o.sigma_step = base.sigma_step;
    o.x_min = base.x_min;
    o.x_max = base.x_max;
    o.x_step = base.step;
    o.trunc = base.trunc;
    struct Variant {
        const char* name;
        distribution::DensityOptions opt;
    };
    std::vector<Variant> variants;
    {
        auto v = o;
        v.trunc.D *= 2;
        variants.push_back({"D", v});
    }
    {
        auto v = o;
        v.trunc.K *= 2;
        variants.push_back({"K", v});
    }
    {
        auto v = o;
        v.M *= 2;
        variants.push_back({"M", v});
    }
    {
        auto v = o;
        v.A *= 2;
        variants.push_back({"A", v});
    }
    {
        auto v = o;
        v.x_step /= 2;
        v.sigma_step /= 2;
        variants.push_back({"N", v});
    }
    double worst = 0;
    std::string list;
    for (auto& v : variants) {
        auto g = distribution::density(3, v.opt);
        auto mom = distribution::cdf_and_moments(g, 3);
        if (!density_checks(g, mom, V).pass) r.pass = false;
        double ratio = 0;
        for (int j = 0; j < 4; ++j) ratio = std::max(ratio, std::fabs(mom.raw[j] - b.value[j]) / b.budget[j]);
        worst = std::max(worst, ratio);
        if (!(ratio < 1)) r.pass = false;
        list += fmt("%s%s x2: %.3f", list.empty() ? "" : ", ", v.name, ratio);
    }
    r.detail = fmt("max |change|/budget per knob: %s; budgets %.1e %.1e %.1e %.1e", list.c_str(), b.budget[0],
                   b.budget[1], b.budget[2], b.budget[3]);
    return r;
}

const std::vector<Check>& checks() {
    static const std::vector<Check> c = {counting_oracle,       volume,         scaling_laws, moment_cross_validation,
                                         third_moment,          density_integrity,
                                         empirical_convergence, theorem4_gap,   voronoi_trend, stability};
    return c;
}

}  // namespace

std::vector<CriterionResult> run(const Options& opt, const std::function<void(const CriterionResult&)>& on_result) {
    Context ctx;
    ctx.opt = opt;
    std::vector<CriterionResult> out;
    for (int id = 1; id <= 10; ++id) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
        const auto t0 = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = checks()[id - 1](ctx);
        } catch (const std::exception& e) {
            r = {id, "criterion " + std::to_string(id), false, std::string("error: ") + e.what(), 0};
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (on_result) on_result(r);
        out.push_back(r);
    }
    return out;
}

std::string format_line(const CriterionResult& r) {
    return fmt("[%s] %2d %-28s %7.1fs  %s", r.pass ? "PASS" : "FAIL", r.id, r.title.c_str(), r.seconds,
               r.detail.c_str());
}

}  // namespace hlat::acceptance
