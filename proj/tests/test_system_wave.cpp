#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "segwave/banded.hpp"
#include "segwave/limits.hpp"
#include "segwave/model.hpp"
#include "segwave/system_wave.hpp"

using namespace segwave;

namespace {

CompetitionSystem lv(double alpha, double r, double d) {
    Preset p;
    p.name = PresetName::LotkaVolterra;
    p.params = {{"alpha", alpha}, {"r", r}, {"d", d}};
    return make_preset(p);
}

SolverConfig small_config(double L = 20.0, std::size_t N = 400) {
    SolverConfig cfg;
    cfg.L = L;
    cfg.N = N;
    return cfg;
}

DiscretizedWave constant_wave(const SolverConfig& cfg, double phi, double psi) {
    DiscretizedWave w;
    const std::size_t m = cfg.N + 2;
    const double dx = 2.0 * cfg.L / static_cast<double>(m - 1);
    w.grid.resize(m);
    for (std::size_t i = 0; i < m; ++i) w.grid[i] = -cfg.L + dx * i;
    w.phi.assign(m, phi);
    w.psi.assign(m, psi);
    w.c = 0.3;
    return w;
}

DiscretizedWave tanh_wave(const SolverConfig& cfg, double width = 1.0) {
    DiscretizedWave w = constant_wave(cfg, 0.0, 0.0);
    for (std::size_t i = 0; i < w.grid.size(); ++i) {
        const double s = std::tanh(w.grid[i] / width);
        w.phi[i] = 0.5 * (1.0 - s);
        w.psi[i] = 0.5 * (1.0 + s);
    }
    w.phi.front() = 1.0;
    w.psi.front() = 0.0;
    w.phi.back() = 0.0;
    w.psi.back() = 1.0;
    w.c = 0.0;
    return w;
}

double interior_norm(const std::vector<double>& res) {
    double m = 0.0;
    for (std::size_t i = 0; i + 1 < res.size(); ++i) {
        m = std::max(m, std::abs(res[i]));
    }
    return m;
}

}  // namespace

TEST_CASE("banded solve matches a dense reference") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    const std::size_t n = 24;
    const int kl = 3, ku = 3;
    std::vector<std::vector<double>> dense(n, std::vector<double>(n, 0.0));
    BandedMatrix B(n, kl, ku);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (B.in_band(i, j)) {
                const double v = val(rng) + (i == j ? 4.0 : 0.0);
                dense[i][j] = v;
                B.at(i, j) = v;
            }
        }
    }
    std::vector<double> x_true(n);
    for (auto& x : x_true) x = val(rng);
    std::vector<double> rhs(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) rhs[i] += dense[i][j] * x_true[j];
    }
    REQUIRE(B.solve(rhs));
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(rhs[i] == doctest::Approx(x_true[i]).epsilon(1e-10));
    }
}

TEST_CASE("banded pivoting handles a zero leading diagonal") {
    BandedMatrix B(4, 1, 1);
    // [0 1; 1 0] blocks force row exchanges
    B.at(0, 0) = 0.0;
    B.at(0, 1) = 1.0;
    B.at(1, 0) = 1.0;
    B.at(1, 1) = 0.0;
    B.at(1, 2) = 0.5;
    B.at(2, 1) = 0.25;
    B.at(2, 2) = 1.0;
    B.at(2, 3) = -1.0;
    B.at(3, 2) = 2.0;
    B.at(3, 3) = 1.0;
    std::vector<double> rhs = {1.0, 2.0, 3.0, 4.0};
    REQUIRE(B.solve(rhs));
    // verify by substitution into the original matrix
    std::vector<std::vector<double>> A = {{0, 1, 0, 0},
                                          {1, 0, 0.5, 0},
                                          {0, 0.25, 1, -1},
                                          {0, 0, 2, 1}};
    std::vector<double> b = {1.0, 2.0, 3.0, 4.0};
    for (int i = 0; i < 4; ++i) {
        double acc = 0.0;
        for (int j = 0; j < 4; ++j) acc += A[i][j] * rhs[j];
        CHECK(acc == doctest::Approx(b[i]).epsilon(1e-12));
    }
}

TEST_CASE("equilibria have zero interior residual") {
    SolverConfig cfg = small_config();
    CompetitionSystem sys = lv(1.0, 1.0, 2.0);
    for (auto [phi, psi] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}}) {
        DiscretizedWave w = constant_wave(cfg, phi, psi);
        const auto res = discrete_residual(sys, 50.0, w, cfg);
        CHECK(interior_norm(res) == 0.0);
    }
}

TEST_CASE("residual of a small perturbation follows the linearization") {
    SolverConfig cfg = small_config();
    CompetitionSystem sys = lv(1.0, 1.0, 2.0);
    DiscretizedWave base = constant_wave(cfg, 1.0, 0.0);

    std::mt19937 rng(7);
    std::uniform_real_distribution<double> noise(-1e-6, 1e-6);
    DiscretizedWave pert = base;
    for (std::size_t i = 1; i + 1 < pert.grid.size(); ++i) {
        pert.phi[i] += noise(rng);
        pert.psi[i] += std::abs(noise(rng));
    }

    const auto res = discrete_residual(sys, 50.0, pert, cfg);

    // oracle: finite-difference Jacobian-vector product around the base
    const double eps = 1e-3;
    DiscretizedWave scaled = base;
    for (std::size_t i = 0; i < scaled.grid.size(); ++i) {
        scaled.phi[i] += (pert.phi[i] - base.phi[i]) / eps;
        scaled.psi[i] += (pert.psi[i] - base.psi[i]) / eps;
    }
    // J * delta ~ (R(base + delta/eps) - R(base)) * eps  for linear parts
    const auto r_base = discrete_residual(sys, 50.0, base, cfg);
    const auto r_scaled = discrete_residual(sys, 50.0, scaled, cfg);
    double jv_norm = 0.0;
    for (std::size_t i = 0; i + 1 < res.size(); ++i) {
        jv_norm = std::max(jv_norm,
                           std::abs((r_scaled[i] - r_base[i]) * eps));
    }
    const double rn = interior_norm(res);
    CHECK(rn <= 10.0 * jv_norm);
    CHECK(jv_norm <= 10.0 * rn);
}

TEST_CASE("analytic and finite-difference Jacobians agree") {
    SolverConfig cfg = small_config(10.0, 120);
    for (auto name : {PresetName::LotkaVolterra, PresetName::SKT,
                      PresetName::PottsPetrovskii}) {
        Preset p;
        p.name = name;
        p.params = {{"alpha", 1.3}, {"r", 0.8}};
        if (name == PresetName::SKT) {
            p.params.insert({{"d1", 1.0}, {"d2", 1.5}, {"a11", 0.4},
                             {"a12", 0.3}, {"a21", 0.2}, {"a22", 0.5}});
        } else if (name == PresetName::PottsPetrovskii) {
            p.params.insert({{"d", 1.5}, {"gamma1", 0.3}, {"gamma2", -0.2}});
        } else {
            p.params.insert({{"d", 2.0}});
        }
        CompetitionSystem sys = make_preset(p);
        DiscretizedWave w = tanh_wave(cfg);
        w.c = 0.17;

        const std::size_t ncols = 2 * cfg.N;
        BandedMatrix Ja(ncols, 3, 3), Jf(ncols, 3, 3);
        std::vector<double> ca, cf;
        assemble_jacobian_analytic(sys, 25.0, w, cfg, Ja, ca);
        assemble_jacobian_fd(sys, 25.0, w, cfg, Jf, cf);

        double scale = 0.0;
        for (std::size_t i = 0; i < ncols; ++i) {
            for (std::size_t j = 0; j < ncols; ++j) {
                if (Ja.in_band(i, j)) {
                    scale = std::max(scale, std::abs(Ja.get(i, j)));
                }
            }
        }
        double worst = 0.0;
        for (std::size_t i = 0; i < ncols; ++i) {
            for (std::size_t j = 0; j < ncols; ++j) {
                if (Ja.in_band(i, j)) {
                    worst = std::max(worst,
                                     std::abs(Ja.get(i, j) - Jf.get(i, j)));
                }
            }
        }
        CHECK(worst <= 1e-5 * scale);
        for (std::size_t i = 0; i < ncols; ++i) {
            CHECK(std::abs(ca[i] - cf[i]) <= 1e-5 * (1.0 + std::abs(ca[i])));
        }
    }
}

TEST_CASE("Jacobians agree at exactly segregated states") {
    // segregated profiles carry exact zeros, where exponent-edge partials
    // once produced 0 * inf
    Preset p;
    p.name = PresetName::SKT;
    p.params = {{"alpha", 1.0}, {"r", 1.0},  {"d1", 1.0}, {"d2", 2.0},
                {"a11", 0.5},   {"a12", 0.3}, {"a21", 0.3}, {"a22", 1.0}};
    CompetitionSystem sys = make_preset(p);
    ScalarLimitProblem problem = reduce_to_scalar(sys);
    MatchOptions mo;
    mo.xi_half_span = 10.0;
    LimitWave limit = match_bistable(problem, mo);
    SolverConfig cfg = small_config(10.0, 200);
    cfg.phase_anchor = PhaseAnchor::psi_half;
    DiscretizedWave g = initial_guess_from_limit(limit, 1e9, cfg);
    REQUIRE(g.segregation_max() == 0.0);

    const std::size_t ncols = 2 * cfg.N;
    BandedMatrix Ja(ncols, 3, 3), Jf(ncols, 3, 3);
    std::vector<double> ca, cf;
    assemble_jacobian_analytic(sys, 10.0, g, cfg, Ja, ca);
    assemble_jacobian_fd(sys, 10.0, g, cfg, Jf, cf);
    double scale = 0.0, worst = 0.0;
    for (std::size_t i = 0; i < ncols; ++i) {
        for (std::size_t j = (i > 3 ? i - 3 : 0);
             j <= std::min(ncols - 1, i + 3); ++j) {
            if (!Ja.in_band(i, j)) continue;
            const double a = Ja.get(i, j);
            const double f = Jf.get(i, j);
            CHECK(std::isfinite(a));
            scale = std::max(scale, std::abs(a));
            worst = std::max(worst, std::abs(a - f));
        }
    }
    CHECK(worst <= 1e-5 * scale);
}

TEST_CASE("self-diffusion preset solves from the limit guess") {
    Preset p;
    p.name = PresetName::SKT;
    p.params = {{"alpha", 1.0}, {"r", 1.0},  {"d1", 1.0}, {"d2", 2.0},
                {"a11", 0.5},   {"a12", 0.3}, {"a21", 0.3}, {"a22", 1.0}};
    CompetitionSystem sys = make_preset(p);
    ScalarLimitProblem problem = reduce_to_scalar(sys);
    MatchOptions mo;
    mo.xi_half_span = 20.0;
    LimitWave limit = match_bistable(problem, mo);
    SolverConfig cfg = small_config(20.0, 1000);
    cfg.phase_anchor = PhaseAnchor::psi_half;
    DiscretizedWave w =
        solve_tw(sys, 10.0, cfg, initial_guess_from_limit(limit, 10.0, cfg));
    CHECK(w.converged);
    CHECK(w.monotone_ok);
    CHECK(w.c < 0.0);  // the second species has the diffusion advantage
}

TEST_CASE("symmetric competition travels at zero speed") {
    SolverConfig cfg = small_config(20.0, 800);
    CompetitionSystem sys = lv(1.0, 1.0, 1.0);
    DiscretizedWave guess = tanh_wave(cfg);
    DiscretizedWave w = solve_tw(sys, 10.0, cfg, guess);
    CHECK(w.converged);
    CHECK(std::abs(w.c) < 1e-6);
    CHECK(w.residual_norm < cfg.newton_tol);
    CHECK(w.monotone_ok);

    // the map (phi, psi, xi) -> (psi, phi, -xi) carries the discrete system
    // into itself and swaps the two phase anchors, so the phi-anchored and
    // psi-anchored solutions mirror each other exactly at the grid nodes
    SolverConfig cfg_phi = cfg;
    cfg_phi.phase_anchor = PhaseAnchor::phi_half;
    SolverConfig cfg_psi = cfg;
    cfg_psi.phase_anchor = PhaseAnchor::psi_half;
    DiscretizedWave wa = solve_tw(sys, 10.0, cfg_phi, guess);
    DiscretizedWave wb = solve_tw(sys, 10.0, cfg_psi, guess);
    const std::size_t m = wa.grid.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        worst = std::max(worst, std::abs(wa.phi[i] - wb.psi[m - 1 - i]));
        worst = std::max(worst, std::abs(wa.psi[i] - wb.phi[m - 1 - i]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("asymmetric wave converges and halving the grid agrees") {
    CompetitionSystem sys = lv(2.0, 1.0, 1.0);
    SolverConfig cfg = small_config(20.0, 1000);
    DiscretizedWave w1 = solve_tw(sys, 100.0, cfg, tanh_wave(cfg));
    CHECK(w1.converged);
    CHECK(w1.residual_norm < 1e-9);
    CHECK(w1.monotone_ok);
    CHECK(w1.c > 0.0);

    SolverConfig cfg2 = small_config(20.0, 2000);
    DiscretizedWave w2 = solve_tw(sys, 100.0, cfg2, tanh_wave(cfg2));
    CHECK(std::abs(w1.c - w2.c) < 1e-4);
}

TEST_CASE("discrete normalization of the profile jumps") {
    CompetitionSystem sys = lv(2.0, 1.0, 1.0);
    SolverConfig cfg = small_config(20.0, 1000);
    DiscretizedWave w = solve_tw(sys, 100.0, cfg, tanh_wave(cfg));
    // trapezoidal integral of the centered derivative
    const double dx = w.dx();
    double ip = 0.0, iq = 0.0;
    const std::size_t m = w.grid.size();
    for (std::size_t i = 0; i + 1 < m; ++i) {
        ip += (w.phi[i + 1] - w.phi[i]);
        iq += (w.psi[i + 1] - w.psi[i]);
    }
    (void)dx;
    CHECK(std::abs(ip + 1.0) <= 10.0 * cfg.bc_tol);
    CHECK(std::abs(iq - 1.0) <= 10.0 * cfg.bc_tol);
}

TEST_CASE("domain truncation stability") {
    CompetitionSystem sys = lv(2.0, 1.0, 1.0);
    SolverConfig cfg1 = small_config(20.0, 1000);
    SolverConfig cfg2 = small_config(40.0, 2000);
    DiscretizedWave w1 = solve_tw(sys, 10.0, cfg1, tanh_wave(cfg1));
    DiscretizedWave w2 = solve_tw(sys, 10.0, cfg2, tanh_wave(cfg2));
    CHECK(std::abs(w1.c - w2.c) < 1e-4);
}

TEST_CASE("limit-based guess: boundaries pinned, segregation kept at huge k") {
    CompetitionSystem sys = lv(2.0, 1.0, 1.0);
    ScalarLimitProblem problem = reduce_to_scalar(sys);
    MatchOptions mo;
    mo.xi_half_span = 20.0;
    LimitWave limit = match_bistable(problem, mo);

    SolverConfig cfg = small_config(20.0, 1000);
    for (double k : {10.0, 1e4, 1e12}) {
        DiscretizedWave g = initial_guess_from_limit(limit, k, cfg);
        CHECK(g.phi.front() == 1.0);
        CHECK(g.psi.front() == 0.0);
        CHECK(g.phi.back() == 0.0);
        CHECK(g.psi.back() == 1.0);
        CHECK(g.c == limit.c_inf);
    }
    // far beyond the grid resolution the smoothing window degenerates and
    // the sampled limit keeps its exact segregation
    DiscretizedWave g = initial_guess_from_limit(limit, 1e12, cfg);
    CHECK(g.segregation_max() == 0.0);
    // at moderate k the corner is smoothed and overlap appears
    DiscretizedWave gm = initial_guess_from_limit(limit, 100.0, cfg);
    CHECK(gm.segregation_max() > 0.0);
}

TEST_CASE("Newton from the limit-based guess converges fast at large k") {
    CompetitionSystem sys = lv(2.0, 1.0, 1.0);
    ScalarLimitProblem problem = reduce_to_scalar(sys);
    MatchOptions mo;
    mo.xi_half_span = 20.0;
    LimitWave limit = match_bistable(problem, mo);
    SolverConfig cfg = small_config(20.0, 2000);
    cfg.phase_anchor = PhaseAnchor::phi_half;
    DiscretizedWave w =
        solve_tw(sys, 1e4, cfg, initial_guess_from_limit(limit, 1e4, cfg));
    CHECK(w.converged);
    CHECK(w.newton_iterations <= 10);
}

TEST_CASE("continuation: one-element schedule equals the single solve") {
    CompetitionSystem sys = lv(2.0, 1.0, 1.0);
    ScalarLimitProblem problem = reduce_to_scalar(sys);
    MatchOptions mo;
    mo.xi_half_span = 15.0;
    LimitWave limit = match_bistable(problem, mo);
    SolverConfig cfg = small_config(15.0, 500);
    cfg.phase_anchor = PhaseAnchor::phi_half;
    cfg.k_schedule = {50.0};
    auto steps = continue_in_k(sys, cfg, limit);
    REQUIRE(steps.size() == 1);
    REQUIRE(steps[0].converged);
    DiscretizedWave direct =
        solve_tw(sys, 50.0, cfg, initial_guess_from_limit(limit, 50.0, cfg));
    CHECK(steps[0].wave.c == direct.c);
}

TEST_CASE("continuation: segregation decreases along the schedule") {
    CompetitionSystem sys = lv(2.0, 1.0, 1.0);
    ScalarLimitProblem problem = reduce_to_scalar(sys);
    MatchOptions mo;
    mo.xi_half_span = 20.0;
    LimitWave limit = match_bistable(problem, mo);
    SolverConfig cfg = small_config(20.0, 1000);
    cfg.phase_anchor = PhaseAnchor::phi_half;
    cfg.k_schedule = {10.0, 100.0, 1000.0, 10000.0};
    auto steps = continue_in_k(sys, cfg, limit);
    REQUIRE(steps.size() == 4);
    double prev = std::numeric_limits<double>::infinity();
    for (const auto& step : steps) {
        REQUIRE(step.converged);
        const double seg = step.wave.segregation_max();
        CHECK(seg < prev);
        prev = seg;
    }
}

TEST_CASE("continuation aborts at the first divergence with partial output") {
    CompetitionSystem sys = lv(2.0, 1.0, 1.0);
    ScalarLimitProblem problem = reduce_to_scalar(sys);
    MatchOptions mo;
    mo.xi_half_span = 15.0;
    LimitWave limit = match_bistable(problem, mo);
    SolverConfig cfg = small_config(15.0, 500);
    cfg.k_schedule = {10.0, 100.0};
    cfg.max_newton_iters = 1;  // starve the solver
    auto steps = continue_in_k(sys, cfg, limit);
    REQUIRE(steps.size() == 1);
    CHECK_FALSE(steps[0].converged);
    CHECK_FALSE(steps[0].note.empty());
}

TEST_CASE("cross-taxis preset solves at moderate strength") {
    Preset p;
    p.name = PresetName::PottsPetrovskii;
    p.params = {{"alpha", 1.0}, {"r", 1.0}, {"d", 1.0},
                {"gamma1", 0.3}, {"gamma2", 0.3}};
    CompetitionSystem sys = make_preset(p);
    ScalarLimitProblem problem = reduce_to_scalar(sys);
    MatchOptions mo;
    mo.xi_half_span = 20.0;
    LimitWave limit = match_bistable(problem, mo);
    SolverConfig cfg = small_config(20.0, 1000);
    cfg.phase_anchor = PhaseAnchor::phi_half;
    DiscretizedWave w =
        solve_tw(sys, 100.0, cfg, initial_guess_from_limit(limit, 100.0, cfg));
    CHECK(w.converged);
    CHECK(w.monotone_ok);
    // compactness probe: the profile-derivative energy stays modest
    CHECK(w.l2_phi_prime > 0.0);
    CHECK(w.l2_phi_prime < 10.0);
    CHECK(w.l2_psi_prime < 10.0);
}

TEST_CASE("finite-difference Jacobian path solves too") {
    CompetitionSystem sys = lv(1.0, 1.0, 2.0);
    SolverConfig cfg = small_config(15.0, 300);
    cfg.analytic_jacobian = false;
    DiscretizedWave w = solve_tw(sys, 20.0, cfg, tanh_wave(cfg));
    CHECK(w.converged);
    cfg.analytic_jacobian = true;
    DiscretizedWave wa = solve_tw(sys, 20.0, cfg, tanh_wave(cfg));
    CHECK(std::abs(w.c - wa.c) < 1e-8);
}
