// Finite-k traveling-wave boundary value problem on a truncated domain.
//
// Unknowns are the interior nodal values of (phi, psi) plus the speed c.
// Interior rows discretize
//
//   -(D(Phi) Phi')' - (H(Phi) + c I) Phi' - Phi o g(Phi) + k omega(Phi) (1, alpha)^T = 0
//
// with half-node fluxes D((Phi_i + Phi_{i+1})/2) (Phi_{i+1} - Phi_i)/dx for
// the divergence term and centered differences for the first-order terms.
// Ends are pinned to (1,0) and (0,1). One phase row (interpolated value 1/2
// at xi = 0) closes the system; the dense speed column and the phase row are
// folded into the banded solve by bordering.

#include "segwave/system_wave.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace segwave {

void SolverConfig::validate() const {
    if (!(L > 0.0)) throw std::invalid_argument("L must be positive");
    if (N < 100) throw std::invalid_argument("N must be at least 100");
    if (!(newton_tol > 0.0)) throw std::invalid_argument("newton_tol > 0");
    if (!(damping > 0.0 && damping <= 1.0)) {
        throw std::invalid_argument("damping must lie in (0, 1]");
    }
}

double DiscretizedWave::segregation_max() const {
    double m = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        m = std::max(m, phi[i] * psi[i]);
    }
    return m;
}

namespace {

struct PhaseRow {
    std::size_t ia = 0, ib = 0;  // bracketing nodes
    double wa = 0.0, wb = 0.0;   // interpolation weights
    bool on_phi = true;
};

std::vector<double> make_grid(const SolverConfig& config) {
    const std::size_t m = config.N + 2;
    std::vector<double> grid(m);
    const double dx = 2.0 * config.L / static_cast<double>(m - 1);
    for (std::size_t i = 0; i < m; ++i) {
        grid[i] = -config.L + dx * static_cast<double>(i);
    }
    return grid;
}

// interpolated level-1/2 crossing of a monotone profile, for anchor choice
double half_crossing(const std::vector<double>& grid,
                     const std::vector<double>& f, bool decreasing) {
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        const bool cross = decreasing ? (f[i] >= 0.5 && f[i + 1] < 0.5)
                                      : (f[i] <= 0.5 && f[i + 1] > 0.5);
        if (cross) {
            const double t = (0.5 - f[i]) / (f[i + 1] - f[i]);
            return grid[i] + t * (grid[i + 1] - grid[i]);
        }
    }
    return std::numeric_limits<double>::infinity();
}

PhaseAnchor resolve_anchor(const SolverConfig& config,
                           const DiscretizedWave& guess) {
    if (config.phase_anchor != PhaseAnchor::automatic) {
        return config.phase_anchor;
    }
    const double xp = std::abs(half_crossing(guess.grid, guess.phi, true));
    const double xq = std::abs(half_crossing(guess.grid, guess.psi, false));
    return xp <= xq ? PhaseAnchor::phi_half : PhaseAnchor::psi_half;
}

PhaseRow make_phase_row(const std::vector<double>& grid, PhaseAnchor anchor) {
    PhaseRow row;
    row.on_phi = anchor == PhaseAnchor::phi_half;
    auto it = std::lower_bound(grid.begin(), grid.end(), 0.0);
    std::size_t ib = static_cast<std::size_t>(it - grid.begin());
    if (ib == 0) ib = 1;
    if (ib >= grid.size()) ib = grid.size() - 1;
    row.ia = ib - 1;
    row.ib = ib;
    const double t = (0.0 - grid[row.ia]) / (grid[row.ib] - grid[row.ia]);
    row.wa = 1.0 - t;
    row.wb = t;
    if (row.ia == 0 || row.ib + 1 == grid.size()) {
        throw std::invalid_argument("xi = 0 must be an interior location");
    }
    return row;
}

double phase_value(const PhaseRow& row, const DiscretizedWave& w) {
    const auto& f = row.on_phi ? w.phi : w.psi;
    return row.wa * f[row.ia] + row.wb * f[row.ib] - 0.5;
}

}  // namespace

std::vector<double> discrete_residual(const CompetitionSystem& system,
                                      double k, const DiscretizedWave& wave,
                                      const SolverConfig& config) {
    (void)config;  // dimensions come from the wave itself
    const std::size_t m = wave.grid.size();
    const std::size_t n = m - 2;
    const double dx = wave.dx();
    const double alpha = system.alpha;

    std::vector<double> res(2 * n + 1, 0.0);

    // fluxes at half nodes, reused between neighbouring rows
    auto flux = [&](std::size_t i, double& fphi, double& fpsi) {
        const double mu = 0.5 * (wave.phi[i] + wave.phi[i + 1]);
        const double mv = 0.5 * (wave.psi[i] + wave.psi[i + 1]);
        const double dphi = (wave.phi[i + 1] - wave.phi[i]) / dx;
        const double dpsi = (wave.psi[i + 1] - wave.psi[i]) / dx;
        fphi = system.D.a11(mu, mv) * dphi + system.D.a12(mu, mv) * dpsi;
        fpsi = system.D.a21(mu, mv) * dphi + system.D.a22(mu, mv) * dpsi;
    };

    double fl_phi, fl_psi;
    flux(0, fl_phi, fl_psi);
    for (std::size_t i = 1; i <= n; ++i) {
        double fr_phi, fr_psi;
        flux(i, fr_phi, fr_psi);
        const double u = wave.phi[i], v = wave.psi[i];
        const double dphi_c = (wave.phi[i + 1] - wave.phi[i - 1]) / (2.0 * dx);
        const double dpsi_c = (wave.psi[i + 1] - wave.psi[i - 1]) / (2.0 * dx);
        const double w = system.omega(u, v);
        res[2 * (i - 1)] = -(fr_phi - fl_phi) / dx -
                           (system.H.a11(u, v) + wave.c) * dphi_c -
                           system.H.a12(u, v) * dpsi_c - u * system.g1(u, v) +
                           k * w;
        res[2 * (i - 1) + 1] = -(fr_psi - fl_psi) / dx -
                               system.H.a21(u, v) * dphi_c -
                               (system.H.a22(u, v) + wave.c) * dpsi_c -
                               v * system.g2(u, v) + alpha * k * w;
        fl_phi = fr_phi;
        fl_psi = fr_psi;
    }

    const PhaseRow row = make_phase_row(wave.grid, wave.anchor_used);
    res[2 * n] = phase_value(row, wave);
    return res;
}

namespace {

// column index of species s at interior node i (1-based node index)
inline std::size_t col_of(std::size_t i, int s) {
    return 2 * (i - 1) + static_cast<std::size_t>(s);
}

void add_band(BandedMatrix& J, std::size_t row, long col, long ncols,
              double value) {
    if (col < 0 || col >= ncols || value == 0.0) return;
    J.at(row, static_cast<std::size_t>(col)) += value;
}

}  // namespace

void assemble_jacobian_analytic(const CompetitionSystem& system, double k,
                                const DiscretizedWave& wave,
                                const SolverConfig& config, BandedMatrix& J,
                                std::vector<double>& dres_dc) {
    const std::size_t m = wave.grid.size();
    const std::size_t n = m - 2;
    const double dx = wave.dx();
    const double alpha = system.alpha;
    const long ncols = static_cast<long>(2 * n);
    (void)config;

    J.clear();
    dres_dc.assign(2 * n, 0.0);

    const ScalarField* D[2][2] = {{&system.D.a11, &system.D.a12},
                                  {&system.D.a21, &system.D.a22}};
    const ScalarField* H[2][2] = {{&system.H.a11, &system.H.a12},
                                  {&system.H.a21, &system.H.a22}};

    for (std::size_t i = 1; i <= n; ++i) {
        const double u = wave.phi[i], v = wave.psi[i];
        const double state[2][3] = {
            {wave.phi[i - 1], wave.phi[i], wave.phi[i + 1]},
            {wave.psi[i - 1], wave.psi[i], wave.psi[i + 1]}};
        const double mu_r = 0.5 * (state[0][1] + state[0][2]);
        const double mv_r = 0.5 * (state[1][1] + state[1][2]);
        const double mu_l = 0.5 * (state[0][0] + state[0][1]);
        const double mv_l = 0.5 * (state[1][0] + state[1][1]);
        const double jump_r[2] = {state[0][2] - state[0][1],
                                  state[1][2] - state[1][1]};
        const double jump_l[2] = {state[0][1] - state[0][0],
                                  state[1][1] - state[1][0]};

        for (int s = 0; s < 2; ++s) {
            const std::size_t r = col_of(i, s);

            // divergence term
            for (int t = 0; t < 2; ++t) {
                const double Dr = (*D[s][t])(mu_r, mv_r);
                const double Dl = (*D[s][t])(mu_l, mv_l);
                // value-dependence of the flux differences
                add_band(J, r, static_cast<long>(col_of(i + 1, t)), ncols,
                         -Dr / (dx * dx));
                add_band(J, r, static_cast<long>(col_of(i, t)), ncols,
                         (Dr + Dl) / (dx * dx));
                add_band(J, r, static_cast<long>(col_of(i - 1, t)), ncols,
                         -Dl / (dx * dx));
            }
            // coefficient-dependence through the midpoint states
            for (int q = 0; q < 2; ++q) {  // differentiate w.r.t. species q
                double sum_r = 0.0, sum_l = 0.0;
                for (int t = 0; t < 2; ++t) {
                    const double dD_r = q == 0 ? D[s][t]->d_du(mu_r, mv_r)
                                               : D[s][t]->d_dv(mu_r, mv_r);
                    const double dD_l = q == 0 ? D[s][t]->d_du(mu_l, mv_l)
                                               : D[s][t]->d_dv(mu_l, mv_l);
                    sum_r += dD_r * jump_r[t];
                    sum_l += dD_l * jump_l[t];
                }
                add_band(J, r, static_cast<long>(col_of(i + 1, q)), ncols,
                         -0.5 * sum_r / (dx * dx));
                add_band(J, r, static_cast<long>(col_of(i, q)), ncols,
                         -0.5 * sum_r / (dx * dx) + 0.5 * sum_l / (dx * dx));
                add_band(J, r, static_cast<long>(col_of(i - 1, q)), ncols,
                         0.5 * sum_l / (dx * dx));
            }

            // advection term
            const double centered[2] = {
                (state[0][2] - state[0][0]) / (2.0 * dx),
                (state[1][2] - state[1][0]) / (2.0 * dx)};
            for (int t = 0; t < 2; ++t) {
                const double Hst = (*H[s][t])(u, v) + (s == t ? wave.c : 0.0);
                add_band(J, r, static_cast<long>(col_of(i + 1, t)), ncols,
                         -Hst / (2.0 * dx));
                add_band(J, r, static_cast<long>(col_of(i - 1, t)), ncols,
                         Hst / (2.0 * dx));
            }
            for (int q = 0; q < 2; ++q) {
                double sum = 0.0;
                for (int t = 0; t < 2; ++t) {
                    const double dH = q == 0 ? H[s][t]->d_du(u, v)
                                             : H[s][t]->d_dv(u, v);
                    sum += dH * centered[t];
                }
                add_band(J, r, static_cast<long>(col_of(i, q)), ncols, -sum);
            }
            dres_dc[r] = -centered[s];

            // reaction and competition
            const double w_u = system.omega.d_du(u, v);
            const double w_v = system.omega.d_dv(u, v);
            const double kfac = s == 0 ? k : alpha * k;
            if (s == 0) {
                add_band(J, r, static_cast<long>(col_of(i, 0)), ncols,
                         -system.g1(u, v) - u * system.g1.d_du(u, v) +
                             kfac * w_u);
                add_band(J, r, static_cast<long>(col_of(i, 1)), ncols,
                         -u * system.g1.d_dv(u, v) + kfac * w_v);
            } else {
                add_band(J, r, static_cast<long>(col_of(i, 0)), ncols,
                         -v * system.g2.d_du(u, v) + kfac * w_u);
                add_band(J, r, static_cast<long>(col_of(i, 1)), ncols,
                         -system.g2(u, v) - v * system.g2.d_dv(u, v) +
                             kfac * w_v);
            }
        }
    }
}

void assemble_jacobian_fd(const CompetitionSystem& system, double k,
                          const DiscretizedWave& wave,
                          const SolverConfig& config, BandedMatrix& J,
                          std::vector<double>& dres_dc) {
    const std::size_t n = wave.grid.size() - 2;
    const std::size_t ncols = 2 * n;
    const int band = J.kl();  // = ku
    const int stride = 2 * band + 1;

    J.clear();
    DiscretizedWave work = wave;
    const std::vector<double> base = discrete_residual(system, k, wave, config);

    auto value_of = [&](std::size_t col) -> double& {
        const std::size_t node = col / 2 + 1;
        return col % 2 == 0 ? work.phi[node] : work.psi[node];
    };

    for (int group = 0; group < stride; ++group) {
        std::vector<std::pair<std::size_t, double>> touched;
        for (std::size_t col = static_cast<std::size_t>(group); col < ncols;
             col += static_cast<std::size_t>(stride)) {
            double& x = value_of(col);
            const double h = 1e-7 * (1.0 + std::abs(x));
            touched.emplace_back(col, h);
            x += h;
        }
        const std::vector<double> pert =
            discrete_residual(system, k, work, config);
        for (auto [col, h] : touched) {
            const long lo = std::max<long>(0, static_cast<long>(col) - band);
            const long hi = std::min<long>(static_cast<long>(ncols) - 1,
                                           static_cast<long>(col) + band);
            for (long row = lo; row <= hi; ++row) {
                const double d =
                    (pert[static_cast<std::size_t>(row)] -
                     base[static_cast<std::size_t>(row)]) / h;
                if (d != 0.0) {
                    J.at(static_cast<std::size_t>(row), col) = d;
                }
            }
            value_of(col) = col % 2 == 0 ? wave.phi[col / 2 + 1]
                                         : wave.psi[col / 2 + 1];
        }
    }

    dres_dc.assign(ncols, 0.0);
    work = wave;
    const double hc = 1e-7 * (1.0 + std::abs(wave.c));
    work.c += hc;
    const std::vector<double> pert = discrete_residual(system, k, work, config);
    for (std::size_t row = 0; row < ncols; ++row) {
        dres_dc[row] = (pert[row] - base[row]) / hc;
    }
}

DiscretizedWave solve_tw(const CompetitionSystem& system, double k,
                         const SolverConfig& config,
                         const DiscretizedWave& initial_guess) {
    config.validate();
    DiscretizedWave wave = initial_guess;
    if (wave.grid.size() != config.N + 2) {
        throw std::invalid_argument("guess does not match the solver grid");
    }
    wave.k = k;
    wave.anchor_used = resolve_anchor(config, wave);
    const PhaseRow phase = make_phase_row(wave.grid, wave.anchor_used);

    const std::size_t n = config.N;
    const std::size_t ncols = 2 * n;
    BandedMatrix J(ncols, 3, 3);
    std::vector<double> dres_dc;
    std::vector<double> trace;

    auto norm_of = [](const std::vector<double>& r) {
        double m = 0.0;
        for (double v : r) {
            if (!std::isfinite(v)) {
                return std::numeric_limits<double>::infinity();
            }
            m = std::max(m, std::abs(v));
        }
        return m;
    };

    std::vector<double> res = discrete_residual(system, k, wave, config);
    double norm = norm_of(res);
    trace.push_back(norm);

    for (int iter = 0; iter < config.max_newton_iters; ++iter) {
        if (norm < config.newton_tol) {
            wave.converged = true;
            wave.newton_iterations = iter;
            break;
        }
        if (config.analytic_jacobian) {
            assemble_jacobian_analytic(system, k, wave, config, J, dres_dc);
        } else {
            assemble_jacobian_fd(system, k, wave, config, J, dres_dc);
        }
        if (!J.factor()) {
            throw NewtonDivergedError("singular Jacobian", trace);
        }
        std::vector<double> x1(res.begin(), res.end() - 1);
        std::vector<double> x2 = dres_dc;
        J.solve_factored(x1);
        J.solve_factored(x2);

        auto phase_dot = [&](const std::vector<double>& x) {
            double s = 0.0;
            const int sp = phase.on_phi ? 0 : 1;
            if (phase.ia >= 1 && phase.ia <= n) {
                s += phase.wa * x[col_of(phase.ia, sp)];
            }
            if (phase.ib >= 1 && phase.ib <= n) {
                s += phase.wb * x[col_of(phase.ib, sp)];
            }
            return s;
        };
        const double denom = phase_dot(x2);
        if (denom == 0.0) {
            throw NewtonDivergedError("degenerate phase condition", trace);
        }
        const double r_phase = res[2 * n];
        const double dc = (r_phase - phase_dot(x1)) / denom;

        // delta u = -x1 - dc * x2
        DiscretizedWave best = wave;
        std::vector<double> best_res;
        double best_norm = std::numeric_limits<double>::infinity();
        double t = config.damping;
        for (int bt = 0; bt < 12; ++bt) {
            DiscretizedWave trial = wave;
            for (std::size_t i = 1; i <= n; ++i) {
                trial.phi[i] -= t * (x1[col_of(i, 0)] + dc * x2[col_of(i, 0)]);
                trial.psi[i] -= t * (x1[col_of(i, 1)] + dc * x2[col_of(i, 1)]);
            }
            trial.c += t * dc;
            std::vector<double> trial_res =
                discrete_residual(system, k, trial, config);
            const double tn = norm_of(trial_res);
            if (tn < best_norm) {
                best_norm = tn;
                best = trial;
                best_res = std::move(trial_res);
            }
            if (tn < (1.0 - 1e-4 * t) * norm) break;
            t *= 0.5;
        }
        if (!(best_norm < norm) && norm >= config.newton_tol) {
            trace.push_back(best_norm);
            std::ostringstream msg;
            msg << "Newton stalled at residual " << norm << " for k = " << k;
            throw NewtonDivergedError(msg.str(), trace);
        }
        wave = best;
        res = std::move(best_res);
        norm = best_norm;
        trace.push_back(norm);
    }
    wave.residual_norm = norm;
    if (!wave.converged) {
        if (norm < config.newton_tol) {
            wave.converged = true;
            wave.newton_iterations = config.max_newton_iters;
        } else {
            std::ostringstream msg;
            msg << "no convergence in " << config.max_newton_iters
                << " iterations for k = " << k << " (residual " << norm << ")";
            throw NewtonDivergedError(msg.str(), trace);
        }
    }

    // a posteriori diagnostics
    const double mono_tol = 1e-8;
    wave.monotone_ok = true;
    for (std::size_t i = 0; i + 1 < wave.grid.size(); ++i) {
        if (wave.phi[i + 1] > wave.phi[i] + mono_tol ||
            wave.psi[i + 1] < wave.psi[i] - mono_tol) {
            wave.monotone_ok = false;
            break;
        }
    }
    const double dx = wave.dx();
    double sp = 0.0, sq = 0.0;
    for (std::size_t i = 0; i + 1 < wave.grid.size(); ++i) {
        const double dp = (wave.phi[i + 1] - wave.phi[i]) / dx;
        const double dq = (wave.psi[i + 1] - wave.psi[i]) / dx;
        sp += dp * dp * dx;
        sq += dq * dq * dx;
    }
    wave.l2_phi_prime = sp;
    wave.l2_psi_prime = sq;
    return wave;
}

DiscretizedWave initial_guess_from_limit(const LimitWave& limit, double k,
                                         const SolverConfig& config) {
    config.validate();
    DiscretizedWave wave;
    wave.grid = make_grid(config);
    const std::size_t m = wave.grid.size();
    wave.phi.resize(m);
    wave.psi.resize(m);
    wave.c = limit.c_inf;
    wave.k = k;

    // translate the limit so the phase anchor already holds; otherwise
    // Newton spends its damped phase dragging the layer into place
    const bool on_psi = config.phase_anchor == PhaseAnchor::psi_half;
    double shift = 0.0;
    {
        const auto& f = on_psi ? limit.psi_values : limit.phi_values;
        for (std::size_t i = 0; i + 1 < f.size(); ++i) {
            const bool hit = on_psi ? (f[i] <= 0.5 && f[i + 1] > 0.5)
                                    : (f[i] >= 0.5 && f[i + 1] < 0.5);
            if (hit) {
                const double t = (0.5 - f[i]) / (f[i + 1] - f[i]);
                shift = limit.xi_grid[i] +
                        t * (limit.xi_grid[i + 1] - limit.xi_grid[i]);
                break;
            }
        }
    }

    auto sample = [&limit](double xi, double& phi, double& psi) {
        const auto& xs = limit.xi_grid;
        if (xi <= xs.front()) {
            phi = 1.0;
            psi = 0.0;
            return;
        }
        if (xi >= xs.back()) {
            phi = 0.0;
            psi = 1.0;
            return;
        }
        auto it = std::upper_bound(xs.begin(), xs.end(), xi);
        const std::size_t b = static_cast<std::size_t>(it - xs.begin());
        const std::size_t a = b - 1;
        const double t = (xi - xs[a]) / (xs[b] - xs[a]);
        phi = (1.0 - t) * limit.phi_values[a] + t * limit.phi_values[b];
        psi = (1.0 - t) * limit.psi_values[a] + t * limit.psi_values[b];
    };
    for (std::size_t i = 0; i < m; ++i) {
        sample(wave.grid[i] + shift, wave.phi[i], wave.psi[i]);
    }

    // smooth the segregation corner over a k^{-1/2} window
    const double width = 1.0 / std::sqrt(k);
    const double dx = wave.dx();
    const long radius = width < 0.25 * dx
                            ? 0
                            : std::max<long>(1, std::lround(width / dx));
    if (radius > 0) {
        auto smooth = [&](std::vector<double>& f) {
            std::vector<double> out = f;
            for (std::size_t i = 1; i + 1 < m; ++i) {
                double acc = 0.0, wsum = 0.0;
                for (long j = -radius; j <= radius; ++j) {
                    const long idx = std::clamp<long>(
                        static_cast<long>(i) + j, 0, static_cast<long>(m) - 1);
                    const double wgt =
                        1.0 - std::abs(static_cast<double>(j)) /
                                  (static_cast<double>(radius) + 1.0);
                    acc += wgt * f[static_cast<std::size_t>(idx)];
                    wsum += wgt;
                }
                out[i] = acc / wsum;
            }
            f = std::move(out);
        };
        smooth(wave.phi);
        smooth(wave.psi);
    }
    wave.phi.front() = 1.0;
    wave.psi.front() = 0.0;
    wave.phi.back() = 0.0;
    wave.psi.back() = 1.0;
    return wave;
}

std::vector<ContinuationStep> continue_in_k(const CompetitionSystem& system,
                                            const SolverConfig& config,
                                            const LimitWave& limit) {
    config.validate();
    for (std::size_t i = 1; i < config.k_schedule.size(); ++i) {
        if (!(config.k_schedule[i] > config.k_schedule[i - 1])) {
            throw std::invalid_argument("k schedule must be increasing");
        }
    }

    std::vector<ContinuationStep> steps;
    DiscretizedWave guess;
    bool have_previous = false;
    for (double k : config.k_schedule) {
        if (!have_previous) {
            guess = initial_guess_from_limit(limit, k, config);
        }
        ContinuationStep step;
        step.k = k;
        try {
            step.wave = solve_tw(system, k, config, guess);
            step.converged = true;
            guess = step.wave;
            have_previous = true;
        } catch (const NewtonDivergedError& err) {
            step.wave = guess;
            step.converged = false;
            step.note = err.what();
            steps.push_back(step);
            break;
        }
        steps.push_back(step);
    }
    return steps;
}

}  // namespace segwave
