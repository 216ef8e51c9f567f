#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "segwave/model.hpp"
#include "segwave/phaseplane.hpp"

using namespace segwave;

namespace {

ScalarLimitProblem lv_problem(double alpha, double r, double d) {
    Preset p;
    p.name = PresetName::LotkaVolterra;
    p.params = {{"alpha", alpha}, {"r", r}, {"d", d}};
    return reduce_to_scalar(make_preset(p));
}

ScalarLimitProblem skt_problem(double alpha, double r, double d1, double d2,
                               double a11, double a12, double a21, double a22) {
    Preset p;
    p.name = PresetName::SKT;
    p.params = {{"alpha", alpha}, {"r", r},   {"d1", d1},  {"d2", d2},
                {"a11", a11},     {"a12", a12}, {"a21", a21}, {"a22", a22}};
    return reduce_to_scalar(make_preset(p));
}

// a single monostable branch posed as a scalar problem whose two halves are
// mirror images; the positive half carries the requested coefficients
ScalarLimitProblem branch_as_problem(std::function<double(double)> d,
                                     std::function<double(double)> h,
                                     std::function<double(double)> g,
                                     double alpha = 1.0) {
    auto d_neg = [d](double z) { return d(-z); };
    auto h_neg = [h](double z) { return -h(-z); };
    auto g_neg = [g](double z) { return -g(-z); };
    return ScalarLimitProblem::from_branches(d, d_neg, h, h_neg, g, g_neg,
                                             alpha);
}

// independent oracle: the same flux equation integrated by a fixed-step
// classical fourth-order scheme, no shared code with the library integrator
double rk4_flux_oracle(const ScalarLimitProblem& problem, double c,
                       double step) {
    const double alpha = problem.alpha();
    const double gpU = problem.g_prime_pos(alpha);
    const double b = c + problem.h_pos(alpha);
    const double lambda = 0.5 * (-b + std::sqrt(b * b - 4.0 * problem.d_pos(alpha) * gpU));
    const double eps = 1e-6 * alpha;
    double z = alpha - eps;
    double y = -lambda * eps;
    auto f = [&](double zz, double yy) {
        return -(c + problem.h_pos(zz)) -
               problem.d_pos(zz) * problem.g_pos(zz) / yy;
    };
    while (z > step) {
        const double h = -step;
        const double k1 = f(z, y);
        const double k2 = f(z + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = f(z + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = f(z + h, y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        z += h;
    }
    // last partial step to z = 0
    const double h = -z;
    const double k1 = f(z, y);
    const double k2 = f(z + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(z + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(0.0, y + h * k3);
    return y + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
}

}  // namespace

TEST_CASE("symmetric problem: fluxes coincide at zero speed") {
    // for d == 1, h == 0, g = z(1-z) the flux satisfies y^2/2 = int_z^1 g,
    // so y(0) = -sqrt(1/3)
    const double expected = -std::sqrt(1.0 / 3.0);
    ScalarLimitProblem p = lv_problem(1.0, 1.0, 1.0);

    SemiWaveShot pos = shoot_semi_wave(p, Side::positive, 0.0);
    SemiWaveShot neg = shoot_semi_wave(p, Side::negative, 0.0);
    REQUIRE(pos.outcome == ShotOutcome::ReachedZeroWithNegativeFlux);
    REQUIRE(neg.outcome == ShotOutcome::ReachedZeroWithNegativeFlux);
    CHECK(pos.flux_at_zero == doctest::Approx(expected).epsilon(1e-7));
    CHECK(neg.flux_at_zero == doctest::Approx(expected).epsilon(1e-7));
    CHECK(std::abs(pos.flux_at_zero - neg.flux_at_zero) < 1e-10);
}

TEST_CASE("shot trajectories start at the carrying-capacity end, flux <= 0") {
    ScalarLimitProblem p = lv_problem(2.0, 1.0, 1.0);
    SemiWaveShot pos = shoot_semi_wave(p, Side::positive, 0.3);
    CHECK(pos.z_samples.front() == doctest::Approx(2.0).epsilon(1e-5));
    SemiWaveShot neg = shoot_semi_wave(p, Side::negative, 0.3);
    CHECK(neg.z_samples.front() == doctest::Approx(-1.0).epsilon(1e-5));
    for (double y : pos.y_samples) CHECK(y <= 1e-12);
    for (double y : neg.y_samples) CHECK(y <= 1e-12);
}

TEST_CASE("logistic branch: front beyond the minimal speed") {
    auto p = branch_as_problem([](double) { return 1.0; },
                               [](double) { return 0.0; },
                               [](double z) { return z * (1.0 - z); });
    SemiWaveShot s = shoot_semi_wave(p, Side::positive, 3.0);
    const bool front_like = s.outcome == ShotOutcome::VanishedBeforeZero ||
                            (s.outcome == ShotOutcome::ReachedZeroWithNegativeFlux &&
                             std::abs(s.flux_at_zero) < 1e-6);
    CHECK(front_like);
}

TEST_CASE("logistic branch flux at rest agrees with the fixed-step oracle") {
    auto p = branch_as_problem([](double) { return 1.0; },
                               [](double) { return 0.0; },
                               [](double z) { return z * (1.0 - z); });
    const double flux = flux_at_zero(p, Side::positive, 0.0);
    const double oracle = rk4_flux_oracle(p, 0.0, 1e-6);
    CHECK(flux == doctest::Approx(oracle).epsilon(1e-8));
}

TEST_CASE("flux is strictly monotone in the speed on each side") {
    ScalarLimitProblem p = lv_problem(2.0, 1.0, 1.0);
    double prev_pos = -std::numeric_limits<double>::infinity();
    double prev_neg = std::numeric_limits<double>::infinity();
    for (double c : {-0.5, 0.0, 0.5}) {
        const double fp = flux_at_zero(p, Side::positive, c);
        const double fn = flux_at_zero(p, Side::negative, c);
        CHECK(fp > prev_pos);  // toward zero as c grows
        CHECK(fn < prev_neg);  // away from zero as c grows
        prev_pos = fp;
        prev_neg = fn;
    }
}

TEST_CASE("flux magnitude vanishes as the speed approaches the minimal one") {
    auto p = branch_as_problem([](double) { return 1.0; },
                               [](double) { return 0.0; },
                               [](double z) { return z * (1.0 - z); });
    const double f15 = std::abs(flux_at_zero(p, Side::positive, 1.5));
    const double f19 = std::abs(flux_at_zero(p, Side::positive, 1.9));
    CHECK(f19 < f15);
    CHECK(f19 < 0.1);
}

TEST_CASE("minimal speed of the logistic branch") {
    auto p = branch_as_problem([](double) { return 1.0; },
                               [](double) { return 0.0; },
                               [](double z) { return z * (1.0 - z); });
    MinimalSpeedResult r = minimal_speed(p, Side::positive);
    CHECK(r.c_star == doctest::Approx(2.0).epsilon(2.5e-3));
    CHECK(r.bracket_lo <= r.c_star);
    CHECK(r.c_star <= r.bracket_hi);
    CHECK(r.below.outcome == ShotOutcome::ReachedZeroWithNegativeFlux);
    CHECK(r.above.outcome == ShotOutcome::VanishedBeforeZero);
}

TEST_CASE("pushed front: minimal speed above the linearization value") {
    // for g = z(1-z)(1+nu z) with nu > 2 the minimal speed is
    // sqrt(2/nu) + sqrt(nu/2), here 2.1213...; the linearization gives 2
    const double nu = 4.0;
    auto p = branch_as_problem(
        [](double) { return 1.0; }, [](double) { return 0.0; },
        [nu](double z) { return z * (1.0 - z) * (1.0 + nu * z); });
    MinimalSpeedResult r = minimal_speed(p, Side::positive);
    const double expected = std::sqrt(2.0 / nu) + std::sqrt(nu / 2.0);
    CHECK(r.c_star == doctest::Approx(expected).epsilon(2.5e-3));
    CHECK_FALSE(r.linearly_determined);
}

TEST_CASE("constant advection shifts the minimal speed") {
    // oracle: moving frame takes c to c + h0, so the 2.0 above becomes 1.3
    auto p = branch_as_problem([](double) { return 1.0; },
                               [](double) { return 0.7; },
                               [](double z) { return z * (1.0 - z); });
    MinimalSpeedResult r = minimal_speed(p, Side::positive);
    CHECK(r.c_star == doctest::Approx(1.3).epsilon(2.5e-3));
}

TEST_CASE("linearly determined minimal speed of a nonlinear-diffusion branch") {
    ScalarLimitProblem p = skt_problem(1.0, 1.0, 1.0, 1.0, 0.5, 0.3, 0.3, 0.2);
    // positive-side diffusion is 1 + z here
    CHECK(p.d_pos(1.0) == doctest::Approx(2.0));
    MinimalSpeedResult r = minimal_speed(p, Side::positive);
    CHECK(r.c_star == doctest::Approx(2.0).epsilon(2.5e-3));
}

TEST_CASE("negative-side minimal speed matches the reflected analytic value") {
    // d = 2 on the negative side with r = 1 gives 2*sqrt(2)
    ScalarLimitProblem p = lv_problem(1.0, 1.0, 2.0);
    MinimalSpeedResult r = minimal_speed(p, Side::negative);
    CHECK(r.c_star == doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(2.5e-3));
}

TEST_CASE("bistable matching: symmetric problem travels at zero speed") {
    ScalarLimitProblem p = lv_problem(1.0, 1.0, 1.0);
    LimitWave w = match_bistable(p);
    CHECK(std::abs(w.c_inf) <= 1e-8);
    CHECK(w.flux_at_zero < 0.0);
}

TEST_CASE("bistable matching: fast-diffuser side wins") {
    ScalarLimitProblem p = lv_problem(1.0, 1.0, 2.0);
    LimitWave w = match_bistable(p);
    CHECK(w.c_inf < 0.0);
}

TEST_CASE("bistable speed against a tolerance-tightened rerun") {
    ScalarLimitProblem p = lv_problem(2.0, 1.0, 1.0);
    LimitWave w = match_bistable(p);
    CHECK(w.c_inf > 0.0);

    MatchOptions tight;
    tight.speed_tol = 1e-7;
    tight.flux_tol_rel = 1e-9;
    tight.shoot.rel_tol = 1e-11;
    LimitWave wt = match_bistable(p, tight);
    CHECK(std::abs(w.c_inf - wt.c_inf) < 2e-6);
}

TEST_CASE("matching is insensitive to the initial bracket") {
    ScalarLimitProblem p = lv_problem(2.0, 1.0, 1.0);
    MatchOptions o1;
    LimitWave w1 = match_bistable(p, o1);
    MatchOptions o2;
    o2.delta_inset = 0.3;  // markedly different bracket ends
    LimitWave w2 = match_bistable(p, o2);
    CHECK(std::abs(w1.c_inf - w2.c_inf) < 2e-6);
}

TEST_CASE("speed sandwich between the minimal speeds") {
    std::mt19937 rng(20260808);
    std::uniform_real_distribution<double> par(0.5, 2.0);
    for (int trial = 0; trial < 4; ++trial) {
        ScalarLimitProblem p = lv_problem(par(rng), par(rng), par(rng));
        MinimalSpeedResult pos = minimal_speed(p, Side::positive);
        MinimalSpeedResult neg = minimal_speed(p, Side::negative);
        LimitWave w = match_bistable(p, pos, neg);
        CHECK(w.c_inf > -neg.c_star + 1e-6);
        CHECK(w.c_inf < pos.c_star - 1e-6);
    }
}

TEST_CASE("profile: normalization, symmetry and equation residual") {
    ScalarLimitProblem p = lv_problem(1.0, 1.0, 1.0);
    LimitWave w = match_bistable(p);
    CHECK(w.z_values[w.zero_index] == 0.0);
    CHECK(w.xi_grid[w.zero_index] == 0.0);

    // odd symmetry of the symmetric problem
    const std::size_t n = w.z_values.size();
    const std::size_t reach = std::min(w.zero_index, n - 1 - w.zero_index);
    double worst = 0.0;
    for (std::size_t j = 0; j < reach; ++j) {
        worst = std::max(worst,
                         std::abs(w.z_values[w.zero_index - j] +
                                  w.z_values[w.zero_index + j]));
    }
    CHECK(worst < 1e-6);

    // z nonincreasing, segregation by construction
    for (std::size_t i = 1; i < n; ++i) {
        CHECK(w.z_values[i] <= w.z_values[i - 1] + 1e-12);
        CHECK(std::min(w.phi_values[i], w.psi_values[i]) == 0.0);
    }

    CHECK(profile_ode_residual_max(w, p) < 1e-4);
}

TEST_CASE("profile tails approach the equilibria") {
    ScalarLimitProblem p = lv_problem(2.0, 1.0, 1.0);
    LimitWave w = match_bistable(p);
    CHECK(std::abs(w.z_values.front() - 2.0) < 1e-5);
    CHECK(std::abs(w.z_values.back() + 1.0) < 1e-5);
    CHECK(profile_ode_residual_max(w, p) < 1e-4);
}

TEST_CASE("free boundary relation holds at the matched flux") {
    for (auto [alpha, r, d] : {std::array<double, 3>{2.0, 1.0, 1.0},
                               std::array<double, 3>{1.0, 1.0, 2.0},
                               std::array<double, 3>{2.0, 1.0, 3.0}}) {
        ScalarLimitProblem p = lv_problem(alpha, r, d);
        LimitWave w = match_bistable(p);
        CHECK(free_boundary_residual(w, p) <=
              1e-8 * std::abs(w.flux_at_zero));
    }
}

TEST_CASE("symmetric problem: opposite one-sided slopes at the boundary") {
    ScalarLimitProblem p = lv_problem(1.0, 1.0, 1.0);
    LimitWave w = match_bistable(p);
    CHECK(w.dphi_values[w.zero_index] ==
          doctest::Approx(-w.dpsi_values[w.zero_index]).epsilon(1e-8));
}

TEST_CASE("independent matches may run concurrently") {
    std::vector<std::array<double, 3>> params = {
        {1.0, 1.0, 2.0}, {2.0, 1.0, 1.0}, {0.5, 2.0, 0.5}, {1.5, 0.8, 1.2}};
    std::vector<double> serial(params.size()), threaded(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        serial[i] = match_bistable(
                        lv_problem(params[i][0], params[i][1], params[i][2]))
                        .c_inf;
    }
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < params.size(); ++i) {
        pool.emplace_back([&, i] {
            threaded[i] =
                match_bistable(
                    lv_problem(params[i][0], params[i][1], params[i][2]))
                    .c_inf;
        });
    }
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < params.size(); ++i) {
        CHECK(threaded[i] == serial[i]);
    }
}

TEST_CASE("one-sided slope ratio at the free boundary") {
    // -alpha d11 phi'(0-) = d22 psi'(0+) with alpha = 2, d = 3 forces the
    // slope ratio psi'(0+)/phi'(0-) = -2/3
    ScalarLimitProblem p = lv_problem(2.0, 1.0, 3.0);
    LimitWave w = match_bistable(p);
    const double ratio =
        w.dpsi_values[w.zero_index] / w.dphi_values[w.zero_index];
    CHECK(ratio == doctest::Approx(-2.0 / 3.0).epsilon(1e-8));
}

TEST_CASE("redefining the glued coefficients at zero changes nothing") {
    auto d = [](double z) { return z > 0 ? 1.0 : 2.0; };
    auto h = [](double) { return 0.0; };
    auto g = [](double z) {
        return z > 0 ? z * (1.0 - z) : z * (1.0 + z);
    };
    ScalarLimitProblem p1 = ScalarLimitProblem::from_glued(d, h, g, 1.0);
    LimitWave w1 = match_bistable(p1);

    ScalarLimitProblem p2 = ScalarLimitProblem::from_glued(d, h, g, 1.0);
    p2.set_values_at_zero(10.0, 0.1);
    LimitWave w2 = match_bistable(p2);
    CHECK(std::abs(w1.c_inf - w2.c_inf) < 2e-6);

    ScalarLimitProblem p3 = ScalarLimitProblem::from_glued(d, h, g, 1.0);
    p3.set_values_at_zero(0.1, 10.0);
    LimitWave w3 = match_bistable(p3);
    CHECK(std::abs(w1.c_inf - w3.c_inf) < 2e-6);
}

TEST_CASE("opposed advection violates the speed ordering assumption") {
    auto p = branch_as_problem([](double) { return 1.0; },
                               [](double) { return 5.0; },
                               [](double z) { return z * (1.0 - z); });
    // both branches are slowed so strongly that the fronts never meet
    CHECK_THROWS_AS(match_bistable(p), A6ViolationError);
}

TEST_CASE("flux monotonicity across randomized presets") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> par(0.5, 2.0);
    std::uniform_real_distribution<double> cross(0.0, 0.5);
    for (int trial = 0; trial < 10; ++trial) {
        ScalarLimitProblem p =
            trial % 2 == 0
                ? lv_problem(par(rng), par(rng), par(rng))
                : skt_problem(par(rng), par(rng), par(rng), par(rng),
                              cross(rng), cross(rng), cross(rng), cross(rng));
        MinimalSpeedResult pos = minimal_speed(p, Side::positive);
        MinimalSpeedResult neg = minimal_speed(p, Side::negative);
        const double lo = -neg.c_star, hi = pos.c_star;
        double prev = -std::numeric_limits<double>::infinity();
        for (int j = 1; j <= 5; ++j) {
            const double c = lo + (hi - lo) * j / 6.0;
            const double f = flux_at_zero(p, Side::positive, c);
            CHECK(f > prev);
            prev = f;
        }
        prev = std::numeric_limits<double>::infinity();
        for (int j = 1; j <= 5; ++j) {
            const double c = lo + (hi - lo) * j / 6.0;
            const double f = flux_at_zero(p, Side::negative, c);
            CHECK(f < prev);
            prev = f;
        }
    }
}
