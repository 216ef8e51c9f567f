#include "segwave/limits.hpp"

#include <algorithm>
#include <cmath>

namespace segwave {

DiscretizedWave shift_align(const DiscretizedWave& wave, double alpha) {
    const std::size_t m = wave.grid.size();
    double shift = 0.0;
    bool found = false;
    for (std::size_t i = 0; i + 1 < m; ++i) {
        const double a = alpha * wave.phi[i] - wave.psi[i];
        const double b = alpha * wave.phi[i + 1] - wave.psi[i + 1];
        if (a >= 0.0 && b < 0.0) {
            const double t = a / (a - b);
            shift = wave.grid[i] + t * (wave.grid[i + 1] - wave.grid[i]);
            found = true;
            break;
        }
    }
    if (!found) {
        throw NoSignChangeError(
            "alpha*phi - psi does not change sign on the grid");
    }
    DiscretizedWave out = wave;
    for (double& x : out.grid) x -= shift;
    return out;
}

namespace {

// linear sample of the limit profile at one point; outside the stored span
// the tails sit at their equilibria
void sample_limit(const LimitWave& limit, double xi, double& phi,
                  double& psi) {
    const auto& xs = limit.xi_grid;
    if (xi < xs.front()) {
        phi = 1.0;
        psi = 0.0;
        return;
    }
    if (xi > xs.back()) {
        phi = 0.0;
        psi = 1.0;
        return;
    }
    auto it = std::upper_bound(xs.begin(), xs.end(), xi);
    std::size_t b = static_cast<std::size_t>(it - xs.begin());
    if (b == 0) b = 1;
    if (b >= xs.size()) b = xs.size() - 1;
    const std::size_t a = b - 1;
    const double t = (xi - xs[a]) / (xs[b] - xs[a]);
    phi = (1.0 - t) * limit.phi_values[a] + t * limit.phi_values[b];
    psi = (1.0 - t) * limit.psi_values[a] + t * limit.psi_values[b];
}

// derivative by one shared stencil: centered inside, one-sided at the ends
// and at the pair of nodes straddling xi = 0, where the limit has its corner
std::vector<double> grid_derivative(const std::vector<double>& grid,
                                    const std::vector<double>& f) {
    const std::size_t m = grid.size();
    const double dx = grid[1] - grid[0];
    std::vector<double> df(m);
    for (std::size_t i = 0; i < m; ++i) {
        const bool left_of_corner =
            i + 1 < m && grid[i] < 0.0 && grid[i + 1] >= 0.0;
        const bool right_of_corner = i > 0 && grid[i] >= 0.0 && grid[i - 1] < 0.0;
        if (i == 0 || right_of_corner) {
            df[i] = (f[i + 1] - f[i]) / dx;
        } else if (i + 1 == m || left_of_corner) {
            df[i] = (f[i] - f[i - 1]) / dx;
        } else {
            df[i] = (f[i + 1] - f[i - 1]) / (2.0 * dx);
        }
    }
    return df;
}

}  // namespace

void wave_limit_distances(const DiscretizedWave& aligned,
                          const LimitWave& limit, double& sup_dist,
                          double& deriv_l1) {
    const std::size_t m = aligned.grid.size();
    const double dx = aligned.dx();
    sup_dist = 0.0;
    deriv_l1 = 0.0;

    std::vector<double> lphi(m), lpsi(m);
    for (std::size_t i = 0; i < m; ++i) {
        sample_limit(limit, aligned.grid[i], lphi[i], lpsi[i]);
        sup_dist = std::max(sup_dist, std::abs(aligned.phi[i] - lphi[i]));
        sup_dist = std::max(sup_dist, std::abs(aligned.psi[i] - lpsi[i]));
    }

    const std::vector<double> dpk = grid_derivative(aligned.grid, aligned.phi);
    const std::vector<double> dqk = grid_derivative(aligned.grid, aligned.psi);
    const std::vector<double> dpl = grid_derivative(aligned.grid, lphi);
    const std::vector<double> dql = grid_derivative(aligned.grid, lpsi);
    double prev_gap = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        const double gap =
            std::abs(dpk[i] - dpl[i]) + std::abs(dqk[i] - dql[i]);
        if (i > 0) deriv_l1 += 0.5 * dx * (prev_gap + gap);
        prev_gap = gap;
    }
}

ConvergenceReport convergence_study(const CompetitionSystem& system,
                                    const SolverConfig& config,
                                    const MatchOptions& match_opts) {
    config.validate();
    const ScalarLimitProblem problem = reduce_to_scalar(system);
    SpeedOptions so;
    so.speed_tol = match_opts.speed_tol;
    so.shoot = match_opts.shoot;
    const MinimalSpeedResult pos = minimal_speed(problem, Side::positive, so);
    const MinimalSpeedResult neg = minimal_speed(problem, Side::negative, so);

    MatchOptions mo = match_opts;
    if (mo.xi_half_span <= 0.0) mo.xi_half_span = config.L;
    const LimitWave limit = match_bistable(problem, pos, neg, mo);

    ConvergenceReport report;
    report.c_inf = limit.c_inf;
    report.flux_at_zero = limit.flux_at_zero;
    report.c_star_pos = pos.c_star;
    report.c_star_neg = neg.c_star;
    report.tail_bound_sup =
        std::max(std::abs(limit.z_values.front() - problem.alpha()),
                 std::abs(limit.z_values.back() + 1.0));

    // anchor choice mirrors the shift normalization of the existence proof
    SolverConfig cfg = config;
    if (cfg.phase_anchor == PhaseAnchor::automatic) {
        cfg.phase_anchor =
            limit.c_inf <= 0.5 * (pos.c_star - neg.c_star)
                ? PhaseAnchor::phi_half
                : PhaseAnchor::psi_half;
    }

    const std::vector<ContinuationStep> steps =
        continue_in_k(system, cfg, limit);
    for (const ContinuationStep& step : steps) {
        ConvergenceRow row;
        row.k = step.k;
        row.converged = step.converged;
        row.note = step.note;
        if (step.converged) {
            row.c_k = step.wave.c;
            row.speed_gap = std::abs(step.wave.c - limit.c_inf);
            row.segregation = step.wave.segregation_max();
            const DiscretizedWave aligned =
                shift_align(step.wave, system.alpha);
            wave_limit_distances(aligned, limit, row.sup_dist, row.deriv_l1);
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace segwave
