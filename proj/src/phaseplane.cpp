// Semi-wave shooting in the flux plane and bistable flux matching.
//
// Each monostable half of the scalar problem is integrated as a trajectory
// of the flux variable y(z) = d(z) z',
//
//     y dy/dz = -(c + h(z)) y - d(z) g(z),      y <= 0,
//
// launched from the carrying-capacity end along the linearized direction
// y = lambda (z - U), with lambda the positive root of
// lambda^2 + (c + h(U)) lambda + d(U) g'(U) = 0. A trajectory that reaches
// z = 0 with strictly negative flux is a semi-wave; a trajectory whose flux
// vanishes is a front. The bistable speed is the unique speed at which the
// two one-sided fluxes coincide at z = 0.

#include "segwave/phaseplane.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "segwave/ode.hpp"

namespace segwave {

std::string to_string(Side side) {
    return side == Side::positive ? "positive" : "negative";
}

MonostableBranch positive_branch(const ScalarLimitProblem& problem) {
    MonostableBranch b;
    b.d = [&problem](double z) { return problem.d_pos(z); };
    b.h = [&problem](double z) { return problem.h_pos(z); };
    b.g = [&problem](double z) { return problem.g_pos(z); };
    b.U = problem.u_plus();
    b.gp_at_U = problem.g_prime_pos(b.U);
    b.gp_at_0 = problem.g_prime_pos(0.0);
    return b;
}

MonostableBranch negative_branch_reflected(const ScalarLimitProblem& problem) {
    MonostableBranch b;
    b.d = [&problem](double w) { return problem.d_neg(-w); };
    b.h = [&problem](double w) { return -problem.h_neg(-w); };
    b.g = [&problem](double w) { return -problem.g_neg(-w); };
    b.U = 1.0;
    b.gp_at_U = problem.g_prime_neg(-1.0);
    b.gp_at_0 = problem.g_prime_neg(0.0);
    return b;
}

namespace {

// positive root of lambda^2 + b lambda + q = 0 with q < 0, cancellation-safe
double positive_launch_root(double b, double q) {
    const double sq = std::sqrt(b * b - 4.0 * q);
    return b <= 0.0 ? 0.5 * (-b + sq) : -2.0 * q / (b + sq);
}

struct BranchShot {
    ShotOutcome outcome = ShotOutcome::NumericalFailure;
    std::vector<double> w, y, xi;  // integration order, equilibrium end first
    double flux = 0.0;
    double w_stop = 0.0;
    double y_at_1e3 = 0.0;
    double y_at_1e4 = 0.0;
    double lambda = 0.0;
};

BranchShot run_branch_shot(const MonostableBranch& br, double speed,
                           const ShootOptions& opts) {
    BranchShot shot;
    if (!(br.gp_at_U < 0.0)) {
        throw std::invalid_argument(
            "reaction slope at the carrying capacity must be negative");
    }

    const double U = br.U;
    const double eps = opts.launch_factor * U;
    const double z_cut = opts.z_cut_factor * U;
    const double lambda =
        positive_launch_root(speed + br.h(U), br.d(U) * br.gp_at_U);
    shot.lambda = lambda;

    const double z0 = U - eps;
    std::vector<double> checkpoints;
    for (double zc : {1e-3, 1e-4}) {
        if (zc < 0.5 * z0 && zc > 2.0 * z_cut) checkpoints.push_back(zc);
    }

    OdeOptions oo;
    oo.rel_tol = opts.rel_tol;
    oo.abs_tol = opts.abs_tol;
    oo.max_steps = opts.max_steps;
    if (opts.max_step > 0.0) oo.max_step = opts.max_step;

    auto record = [&shot](double z, double yv, double xiv, bool profile) {
        shot.w.push_back(z);
        shot.y.push_back(yv);
        if (profile) shot.xi.push_back(xiv);
    };

    OdeStatus status;
    double z_final, y_final, xi_final = 0.0;
    if (opts.with_profile) {
        auto rhs = [&br, speed](double z, const std::array<double, 2>& s) {
            const double d = br.d(z);
            const double dydz = -(speed + br.h(z)) - d * br.g(z) / s[0];
            return std::array<double, 2>{dydz, d / s[0]};
        };
        auto res = integrate_dopri5<2>(
            rhs, z0, z_cut, {-lambda * eps, 0.0}, oo,
            [&](double z, const std::array<double, 2>& s) {
                record(z, s[0], s[1], true);
                if (z == 1e-3) shot.y_at_1e3 = s[0];
                if (z == 1e-4) shot.y_at_1e4 = s[0];
            },
            [](double, const std::array<double, 2>& s) { return s[0] >= 0.0; },
            checkpoints);
        status = res.status;
        z_final = res.t;
        y_final = res.y[0];
        xi_final = res.y[1];
    } else {
        auto rhs = [&br, speed](double z, const std::array<double, 1>& s) {
            const double d = br.d(z);
            return std::array<double, 1>{-(speed + br.h(z)) -
                                         d * br.g(z) / s[0]};
        };
        auto res = integrate_dopri5<1>(
            rhs, z0, z_cut, {-lambda * eps}, oo,
            [&](double z, const std::array<double, 1>& s) {
                record(z, s[0], 0.0, false);
                if (z == 1e-3) shot.y_at_1e3 = s[0];
                if (z == 1e-4) shot.y_at_1e4 = s[0];
            },
            [](double, const std::array<double, 1>& s) { return s[0] >= 0.0; },
            checkpoints);
        status = res.status;
        z_final = res.t;
        y_final = res.y[0];
    }

    if (status == OdeStatus::Event) {
        shot.outcome = ShotOutcome::VanishedBeforeZero;
        shot.w_stop = z_final;
        return shot;
    }
    if (status == OdeStatus::StepCollapse || status == OdeStatus::StepLimit) {
        if (std::abs(y_final) < opts.front_tol) {
            shot.outcome = ShotOutcome::VanishedBeforeZero;
            shot.w_stop = z_final;
        } else {
            shot.outcome = ShotOutcome::NumericalFailure;
            shot.w_stop = z_final;
        }
        return shot;
    }

    // z_cut -> 0: one fourth-order step; the reaction term vanishes there
    double y0 = y_final, xi0 = xi_final;
    if (std::abs(y_final) > 1e-8) {
        auto f = [&br, speed](double z, double yv, double xiv,
                              bool profile) -> std::array<double, 2> {
            const double d = br.d(z);
            (void)xiv;
            return {-(speed + br.h(z)) - d * br.g(z) / yv,
                    profile ? d / yv : 0.0};
        };
        const double hstep = -z_cut;
        auto k1 = f(z_final, y_final, xi_final, opts.with_profile);
        auto k2 = f(z_final + 0.5 * hstep, y_final + 0.5 * hstep * k1[0],
                    xi_final + 0.5 * hstep * k1[1], opts.with_profile);
        auto k3 = f(z_final + 0.5 * hstep, y_final + 0.5 * hstep * k2[0],
                    xi_final + 0.5 * hstep * k2[1], opts.with_profile);
        auto k4 = f(0.0, y_final + hstep * k3[0], xi_final + hstep * k3[1],
                    opts.with_profile);
        y0 = y_final + hstep / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
        xi0 = xi_final + hstep / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    }
    record(0.0, y0, xi0, opts.with_profile);

    if (y0 >= 0.0) y0 = 0.0;
    const bool tiny = std::abs(y0) < opts.front_tol;
    bool decaying = true;
    if (shot.y_at_1e3 < 0.0) {
        decaying = std::abs(shot.y_at_1e4) < 0.5 * std::abs(shot.y_at_1e3);
    }
    if (tiny && decaying) {
        shot.outcome = ShotOutcome::VanishedBeforeZero;
        shot.w_stop = 0.0;
        shot.flux = y0;
    } else {
        shot.outcome = ShotOutcome::ReachedZeroWithNegativeFlux;
        shot.flux = y0;
    }
    return shot;
}

SemiWaveShot to_problem_frame(const BranchShot& bs, Side side, double c,
                              bool with_profile) {
    SemiWaveShot out;
    out.side = side;
    out.c = c;
    out.outcome = bs.outcome;
    out.flux_at_zero = bs.flux;
    out.y_at_1e3 = bs.y_at_1e3;
    out.y_at_1e4 = bs.y_at_1e4;
    out.y_samples = bs.y;
    out.z_samples = bs.w;
    if (side == Side::negative) {
        for (double& z : out.z_samples) z = -z;
        out.z_stop = -bs.w_stop;
    } else {
        out.z_stop = bs.w_stop;
    }
    if (with_profile &&
        bs.outcome == ShotOutcome::ReachedZeroWithNegativeFlux &&
        !bs.xi.empty()) {
        out.xi_samples = bs.xi;
        const double at_zero = bs.xi.back();
        if (side == Side::positive) {
            for (double& x : out.xi_samples) x -= at_zero;
        } else {
            for (double& x : out.xi_samples) x = at_zero - x;
        }
    }
    return out;
}

bool is_semi_wave(const BranchShot& s) {
    return s.outcome == ShotOutcome::ReachedZeroWithNegativeFlux;
}

struct BranchEstimates {
    double lower = 0.0;
    double upper = 0.0;
};

// lower: linearization at the invaded state; upper: sampled sup/inf of the
// averaged-coefficient expressions, with the z -> 0 limits included
BranchEstimates branch_speed_estimates(const MonostableBranch& br) {
    if (!(br.gp_at_0 > 0.0)) {
        throw std::invalid_argument(
            "reaction slope at the invaded state must be positive");
    }
    BranchEstimates est;
    est.lower = 2.0 * std::sqrt(br.d(0.0) * br.gp_at_0) - br.h(0.0);

    const int n = 1000;
    const double dw = br.U / n;
    double cum_gd = 0.0, cum_h = 0.0;
    double prev_gd = br.gp_at_0 * br.d(0.0);  // per-capita reaction limit
    double prev_h = br.h(0.0);
    double sup_gd = prev_gd;
    double inf_h = prev_h;
    for (int j = 1; j <= n; ++j) {
        const double w = br.U * j / n;
        const double gd = (br.g(w) / w) * br.d(w);
        const double hv = br.h(w);
        cum_gd += 0.5 * dw * (prev_gd + gd);
        cum_h += 0.5 * dw * (prev_h + hv);
        sup_gd = std::max(sup_gd, cum_gd / w);
        inf_h = std::min(inf_h, cum_h / w);
        prev_gd = gd;
        prev_h = hv;
    }
    est.upper = 2.0 * std::sqrt(std::max(sup_gd, 0.0)) - inf_h;
    return est;
}

MinimalSpeedResult branch_minimal_speed(const MonostableBranch& br, Side side,
                                        const SpeedOptions& opts) {
    const BranchEstimates est = branch_speed_estimates(br);

    MinimalSpeedResult result;
    result.side = side;

    auto classify = [&](double s) {
        BranchShot shot = run_branch_shot(br, s, opts.shoot);
        if (shot.outcome == ShotOutcome::NumericalFailure) {
            std::ostringstream msg;
            msg << "shot failed at speed " << s << " on the "
                << to_string(side) << " side";
            throw BracketError(msg.str());
        }
        return is_semi_wave(shot);
    };

    // Below the linearization speed the rest state is a spiral in the flux
    // plane and the semi-wave flux vanishes like exp(-pi / sqrt(c* - c)) at
    // the transition, far below any usable threshold. Probe just above the
    // linearization speed instead: a front there pins c* to the linear value
    // within the probe offset; a semi-wave there means a pushed front whose
    // flux vanishes linearly, where threshold bisection is accurate.
    const double probe = est.lower + opts.probe_offset;
    if (!classify(probe)) {
        result.c_star = est.lower;
        result.linearly_determined = true;
        result.bracket_lo = est.lower;
        result.bracket_hi = probe;
        result.iterations = 0;
    } else {
        double lo = probe;
        double hi = std::isfinite(est.upper) && est.upper < 100.0
                        ? est.upper + 0.5
                        : std::max(est.lower + 1.0, 1.0);
        while (classify(hi)) {
            hi = hi <= 0.0 ? 1.0 : 2.0 * hi;
            if (hi > opts.bracket_cap) {
                std::ostringstream msg;
                msg << "classification never flips up to speed "
                    << opts.bracket_cap << " on the " << to_string(side)
                    << " side";
                throw BracketError(msg.str());
            }
        }
        result.bracket_lo = lo;
        result.bracket_hi = hi;

        int iters = 0;
        while (hi - lo > opts.speed_tol && iters < 200) {
            const double mid = 0.5 * (lo + hi);
            (classify(mid) ? lo : hi) = mid;
            ++iters;
        }
        result.c_star = 0.5 * (lo + hi);
        result.iterations = iters;
    }

    // certificate shots; just below a linearly determined speed the flux is
    // below any threshold, so back off until the semi-wave is visible
    double delta_below = opts.certificate_delta;
    BranchShot below = run_branch_shot(br, result.c_star - delta_below,
                                       opts.shoot);
    while (!is_semi_wave(below) && delta_below < 0.3) {
        delta_below *= 4.0;
        below = run_branch_shot(br, result.c_star - delta_below, opts.shoot);
    }
    BranchShot above = run_branch_shot(
        br, result.c_star + opts.certificate_delta, opts.shoot);

    auto actual = [side](double s) {
        return side == Side::positive ? s : -s;
    };
    result.below = to_problem_frame(below, side,
                                    actual(result.c_star - delta_below), false);
    result.above = to_problem_frame(
        above, side, actual(result.c_star + opts.certificate_delta), false);
    return result;
}

}  // namespace

SemiWaveShot shoot_semi_wave(const ScalarLimitProblem& problem, Side side,
                             double c, const ShootOptions& opts) {
    if (!std::isfinite(c)) throw std::invalid_argument("speed must be finite");
    if (side == Side::positive) {
        return to_problem_frame(
            run_branch_shot(positive_branch(problem), c, opts), side, c,
            opts.with_profile);
    }
    return to_problem_frame(
        run_branch_shot(negative_branch_reflected(problem), -c, opts), side, c,
        opts.with_profile);
}

double flux_at_zero(const ScalarLimitProblem& problem, Side side, double c,
                    const ShootOptions& opts) {
    SemiWaveShot shot = shoot_semi_wave(problem, side, c, opts);
    if (shot.outcome != ShotOutcome::ReachedZeroWithNegativeFlux) {
        std::ostringstream msg;
        msg << "no semi-wave on the " << to_string(side) << " side at speed "
            << c;
        throw NoSemiWaveError(msg.str());
    }
    return shot.flux_at_zero;
}

MinimalSpeedResult minimal_speed(const ScalarLimitProblem& problem, Side side,
                                 const SpeedOptions& opts) {
    const MonostableBranch br = side == Side::positive
                                    ? positive_branch(problem)
                                    : negative_branch_reflected(problem);
    return branch_minimal_speed(br, side, opts);
}

namespace {

struct SideTable {
    // ascending in xi; z, y and the xi-derivatives of both at each sample
    std::vector<double> xi, z, y, dz, dy;
};

SideTable build_table(const SemiWaveShot& shot, const MonostableBranch& br,
                      double speed_branch) {
    SideTable t;
    const std::size_t n = shot.xi_samples.size();
    t.xi.resize(n);
    t.z.resize(n);
    t.y.resize(n);
    t.dz.resize(n);
    t.dy.resize(n);
    const bool reversed = shot.xi_samples.front() > shot.xi_samples.back();
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = reversed ? n - 1 - i : i;
        t.xi[i] = shot.xi_samples[j];
        t.z[i] = shot.z_samples[j];
        t.y[i] = shot.y_samples[j];
        const double w = std::abs(t.z[i]);
        const double d = br.d(w);
        const double dzdxi_branch = t.y[i] / d;
        const double dydxi_branch =
            (-(speed_branch + br.h(w)) * t.y[i] - d * br.g(w)) / d;
        // reflection flips the sign of dz/dxi twice and of dy/dxi once
        if (shot.side == Side::positive) {
            t.dz[i] = dzdxi_branch;
            t.dy[i] = dydxi_branch;
        } else {
            t.dz[i] = dzdxi_branch;
            t.dy[i] = -dydxi_branch;
        }
    }
    return t;
}

double hermite(double xa, double xb, double fa, double fb, double ma,
               double mb, double x) {
    const double dl = xb - xa;
    const double s = (x - xa) / dl;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * fa + (s3 - 2 * s2 + s) * dl * ma +
           (-2 * s3 + 3 * s2) * fb + (s3 - s2) * dl * mb;
}

// interpolated (z, y) at a grid point, table assumed ascending in xi
void sample_table(const SideTable& t, double xi, double& z, double& y) {
    auto it = std::lower_bound(t.xi.begin(), t.xi.end(), xi);
    std::size_t b = static_cast<std::size_t>(it - t.xi.begin());
    if (b == 0) b = 1;
    if (b >= t.xi.size()) b = t.xi.size() - 1;
    const std::size_t a = b - 1;
    z = hermite(t.xi[a], t.xi[b], t.z[a], t.z[b], t.dz[a], t.dz[b], xi);
    y = hermite(t.xi[a], t.xi[b], t.y[a], t.y[b], t.dy[a], t.dy[b], xi);
}

}  // namespace

LimitWave reconstruct_profile(const ScalarLimitProblem& problem, double c_inf,
                              const SemiWaveShot& shot_pos,
                              const SemiWaveShot& shot_neg,
                              const MatchOptions& opts) {
    if (shot_pos.xi_samples.empty() || shot_neg.xi_samples.empty()) {
        throw std::invalid_argument(
            "reconstruct_profile needs profile-augmented shots");
    }
    const MonostableBranch br_pos = positive_branch(problem);
    const MonostableBranch br_neg = negative_branch_reflected(problem);
    const SideTable tab_pos = build_table(shot_pos, br_pos, c_inf);
    const SideTable tab_neg = build_table(shot_neg, br_neg, -c_inf);

    const double alpha = problem.alpha();
    const double d_pos0 = problem.d_pos(0.0);
    const double d_neg0 = problem.d_neg(0.0);

    // linearized tail rates at the two equilibria
    const double mu_pos =
        positive_launch_root(c_inf + problem.h_pos(alpha),
                             problem.d_pos(alpha) * problem.g_prime_pos(alpha)) /
        problem.d_pos(alpha);
    const double mu_neg =
        positive_launch_root(-c_inf + br_neg.h(1.0),
                             br_neg.d(1.0) * br_neg.gp_at_U) /
        br_neg.d(1.0);

    const double h = opts.xi_step;
    double span_lo = tab_pos.xi.front();   // most negative xi covered
    double span_hi = tab_neg.xi.back();    // most positive xi covered
    if (opts.xi_half_span > 0.0) {
        span_lo = -opts.xi_half_span;
        span_hi = opts.xi_half_span;
    }
    const long n_lo = static_cast<long>(std::floor(-span_lo / h));
    const long n_hi = static_cast<long>(std::floor(span_hi / h));

    LimitWave wave;
    wave.c_inf = c_inf;
    wave.flux_pos = shot_pos.flux_at_zero;
    wave.flux_neg = shot_neg.flux_at_zero;
    wave.flux_at_zero = 0.5 * (wave.flux_pos + wave.flux_neg);
    wave.zero_index = static_cast<std::size_t>(n_lo);

    const long total = n_lo + n_hi + 1;
    wave.xi_grid.reserve(total);
    wave.z_values.reserve(total);
    for (long i = -n_lo; i <= n_hi; ++i) {
        const double xi = static_cast<double>(i) * h;
        double z, y;
        if (i == 0) {
            z = 0.0;
            y = wave.flux_at_zero;
        } else if (xi < 0.0) {
            if (xi >= tab_pos.xi.front()) {
                sample_table(tab_pos, xi, z, y);
            } else {  // analytic tail toward alpha
                const double z_end = tab_pos.z.front();
                const double decay =
                    std::exp(mu_pos * (xi - tab_pos.xi.front()));
                z = alpha + (z_end - alpha) * decay;
                y = problem.d_pos(std::min(z, alpha)) * mu_pos * (z - alpha);
            }
            if (z > alpha) z = alpha;
        } else {
            if (xi <= tab_neg.xi.back()) {
                sample_table(tab_neg, xi, z, y);
            } else {  // analytic tail toward -1
                const double z_end = tab_neg.z.back();
                const double decay =
                    std::exp(-mu_neg * (xi - tab_neg.xi.back()));
                z = -1.0 + (z_end + 1.0) * decay;
                y = problem.d_neg(std::max(z, -1.0)) * (-mu_neg) * (z + 1.0);
            }
            if (z < -1.0) z = -1.0;
        }
        wave.xi_grid.push_back(xi);
        wave.z_values.push_back(z);
        const double phi = z > 0.0 ? z / alpha : 0.0;
        const double psi = z < 0.0 ? -z : 0.0;
        wave.phi_values.push_back(phi);
        wave.psi_values.push_back(psi);
        if (i == 0) {
            // one-sided derivatives, each taken from its own side
            wave.dphi_values.push_back(wave.flux_pos / (d_pos0 * alpha));
            wave.dpsi_values.push_back(-wave.flux_neg / d_neg0);
        } else if (xi < 0.0) {
            wave.dphi_values.push_back(y / (problem.d_pos(std::min(z, alpha)) *
                                            alpha));
            wave.dpsi_values.push_back(0.0);
        } else {
            wave.dphi_values.push_back(0.0);
            wave.dpsi_values.push_back(-y / problem.d_neg(std::max(z, -1.0)));
        }
    }
    return wave;
}

LimitWave match_bistable(const ScalarLimitProblem& problem,
                         const MinimalSpeedResult& pos,
                         const MinimalSpeedResult& neg,
                         const MatchOptions& opts) {
    double a = -neg.c_star + opts.delta_inset;
    double b = pos.c_star - opts.delta_inset;
    if (!(a < b)) throw A6ViolationError(pos.c_star, neg.c_star);

    // flux difference F(c); fronts contribute zero flux so the sign logic
    // stays valid right up to the bracket ends
    struct Fluxes {
        double fp, fn, gap, scale;
    };
    auto fluxes_at = [&](double c) {
        SemiWaveShot sp = shoot_semi_wave(problem, Side::positive, c, opts.shoot);
        SemiWaveShot sn = shoot_semi_wave(problem, Side::negative, c, opts.shoot);
        if (sp.outcome == ShotOutcome::NumericalFailure ||
            sn.outcome == ShotOutcome::NumericalFailure) {
            std::ostringstream msg;
            msg << "semi-wave shot failed at speed " << c;
            throw MatchError(msg.str());
        }
        const double fp =
            sp.outcome == ShotOutcome::ReachedZeroWithNegativeFlux
                ? sp.flux_at_zero
                : 0.0;
        const double fn =
            sn.outcome == ShotOutcome::ReachedZeroWithNegativeFlux
                ? sn.flux_at_zero
                : 0.0;
        return Fluxes{fp, fn, fp - fn,
                      std::max(std::abs(fp), std::abs(fn))};
    };

    Fluxes Fa = fluxes_at(a);
    Fluxes Fb = fluxes_at(b);
    if (!(Fa.gap < 0.0 && Fb.gap > 0.0)) {
        std::ostringstream msg;
        msg << "flux gap does not change sign across (" << a << ", " << b
            << "): F(a) = " << Fa.gap << ", F(b) = " << Fb.gap;
        throw MatchError(msg.str());
    }

    double best_c = 0.5 * (a + b);
    double best_gap = std::numeric_limits<double>::infinity();
    int iters = 0;
    const double width_floor = 1e-12 * (std::abs(a) + std::abs(b) + 1.0);
    for (std::size_t it = 0; it < opts.max_iters; ++it) {
        const double mid = 0.5 * (a + b);
        const Fluxes Fm = fluxes_at(mid);
        ++iters;
        if (std::abs(Fm.gap) < best_gap) {
            best_gap = std::abs(Fm.gap);
            best_c = mid;
        }
        const double flux_tol = opts.flux_tol_rel * Fm.scale;
        if (std::abs(Fm.gap) < 0.25 * flux_tol || (b - a) < width_floor) break;
        ((Fm.gap < 0.0) ? a : b) = mid;
    }

    // profile shots at the matched speed
    ShootOptions po = opts.shoot;
    po.with_profile = true;
    po.max_step = opts.profile_max_dz;
    SemiWaveShot sp = shoot_semi_wave(problem, Side::positive, best_c, po);
    SemiWaveShot sn = shoot_semi_wave(problem, Side::negative, best_c, po);
    if (sp.outcome != ShotOutcome::ReachedZeroWithNegativeFlux ||
        sn.outcome != ShotOutcome::ReachedZeroWithNegativeFlux) {
        throw MatchError("matched speed lost the semi-wave classification");
    }
    const double gap = std::abs(sp.flux_at_zero - sn.flux_at_zero);
    const double scale =
        std::max(std::abs(sp.flux_at_zero), std::abs(sn.flux_at_zero));
    if (gap > opts.flux_tol_rel * scale) {
        std::ostringstream msg;
        msg << "matching stalled: flux gap " << gap << " exceeds tolerance "
            << opts.flux_tol_rel * scale;
        throw MatchError(msg.str());
    }

    LimitWave wave = reconstruct_profile(problem, best_c, sp, sn, opts);
    wave.match_iterations = iters;
    wave.match_gap = gap;
    return wave;
}

LimitWave match_bistable(const ScalarLimitProblem& problem,
                         const MatchOptions& opts) {
    SpeedOptions so;
    so.speed_tol = opts.speed_tol;
    so.shoot = opts.shoot;
    const MinimalSpeedResult pos = minimal_speed(problem, Side::positive, so);
    const MinimalSpeedResult neg = minimal_speed(problem, Side::negative, so);
    return match_bistable(problem, pos, neg, opts);
}

double free_boundary_residual(const LimitWave& wave,
                              const ScalarLimitProblem& problem) {
    const double dphi0 = wave.dphi_values[wave.zero_index];
    const double dpsi0 = wave.dpsi_values[wave.zero_index];
    return std::abs(-problem.d_pos(0.0) * problem.alpha() * dphi0 -
                    problem.d_neg(0.0) * dpsi0);
}

double free_boundary_residual(const LimitWave& wave,
                              const CompetitionSystem& system) {
    const double dphi0 = wave.dphi_values[wave.zero_index];
    const double dpsi0 = wave.dpsi_values[wave.zero_index];
    return std::abs(-system.D.a11(0.0, 0.0) * system.alpha * dphi0 -
                    system.D.a22(0.0, 0.0) * dpsi0);
}

double profile_ode_residual_max(const LimitWave& wave,
                                const ScalarLimitProblem& problem,
                                double xi_margin) {
    const auto& xi = wave.xi_grid;
    const auto& z = wave.z_values;
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < z.size(); ++i) {
        if (std::abs(xi[i - 1]) < xi_margin || std::abs(xi[i]) < xi_margin ||
            std::abs(xi[i + 1]) < xi_margin) {
            continue;
        }
        const double h = xi[i + 1] - xi[i];
        const double zm = 0.5 * (z[i - 1] + z[i]);
        const double zp = 0.5 * (z[i] + z[i + 1]);
        const double flux_m = problem.d_glued(zm) * (z[i] - z[i - 1]) / h;
        const double flux_p = problem.d_glued(zp) * (z[i + 1] - z[i]) / h;
        const double div = (flux_p - flux_m) / h;
        const double zprime = (z[i + 1] - z[i - 1]) / (2.0 * h);
        const double res = -div - (wave.c_inf + problem.h_glued(z[i])) * zprime -
                           problem.g_reduced(z[i]);
        worst = std::max(worst, std::abs(res));
    }
    return worst;
}

}  // namespace segwave
