#ifndef SEGWAVE_SYSTEM_WAVE_HPP
#define SEGWAVE_SYSTEM_WAVE_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "segwave/banded.hpp"
#include "segwave/model.hpp"
#include "segwave/phaseplane.hpp"

namespace segwave {

enum class PhaseAnchor { automatic, phi_half, psi_half };

/// Truncated-domain discretization of the two-species wave problem.
struct SolverConfig {
    double L = 40.0;              // half-domain, Dirichlet ends
    std::size_t N = 4000;         // interior nodes
    double newton_tol = 1e-10;    // max-norm residual target
    int max_newton_iters = 50;
    double damping = 1.0;         // initial Newton step fraction
    double bc_tol = 1e-8;
    PhaseAnchor phase_anchor = PhaseAnchor::automatic;
    std::vector<double> k_schedule = {10.0, 100.0, 1000.0, 10000.0};
    bool analytic_jacobian = true;

    void validate() const;
};

/// Finite-k wave on the uniform grid, plus solver diagnostics.
struct DiscretizedWave {
    std::vector<double> grid;  // N + 2 nodes including the pinned ends
    std::vector<double> phi;
    std::vector<double> psi;
    double c = 0.0;
    double k = 0.0;
    double residual_norm = 0.0;
    bool monotone_ok = false;   // phi nonincreasing, psi nondecreasing
    bool converged = false;
    int newton_iterations = 0;
    PhaseAnchor anchor_used = PhaseAnchor::phi_half;
    double l2_phi_prime = 0.0;  // trapezoidal int (phi')^2, compactness probe
    double l2_psi_prime = 0.0;

    double dx() const { return grid[1] - grid[0]; }
    double segregation_max() const;
};

class NewtonDivergedError : public std::runtime_error {
  public:
    NewtonDivergedError(const std::string& what,
                        std::vector<double> residual_trace)
        : std::runtime_error(what),
          residual_trace(std::move(residual_trace)) {}
    std::vector<double> residual_trace;  // per-iteration residual norms
};

/// Residual of the discrete wave system at a candidate (phi, psi, c):
/// 2N interior rows (divergence term by half-node fluxes, first-order terms
/// centered) followed by one phase row. Defined for any candidate.
std::vector<double> discrete_residual(const CompetitionSystem& system,
                                      double k, const DiscretizedWave& wave,
                                      const SolverConfig& config);

/// Damped Newton iteration on (phi interior, psi interior, c). Monotonicity
/// is checked afterwards and reported, never enforced.
DiscretizedWave solve_tw(const CompetitionSystem& system, double k,
                         const SolverConfig& config,
                         const DiscretizedWave& initial_guess);

/// Samples the limit wave on the solver grid, smooths the corner over a
/// k^{-1/2} window and keeps the boundary values pinned.
DiscretizedWave initial_guess_from_limit(const LimitWave& limit, double k,
                                         const SolverConfig& config);

struct ContinuationStep {
    double k = 0.0;
    bool converged = false;
    DiscretizedWave wave;  // last iterate even when not converged
    std::string note;
};

/// Solves along the increasing k schedule, warm-starting each solve from the
/// previous wave. Stops at the first divergence, returning partial results.
std::vector<ContinuationStep> continue_in_k(const CompetitionSystem& system,
                                            const SolverConfig& config,
                                            const LimitWave& limit);

/// Jacobian of the discrete system assembled from coefficient derivatives
/// (banded part only; the c column and phase row are handled separately).
void assemble_jacobian_analytic(const CompetitionSystem& system, double k,
                                const DiscretizedWave& wave,
                                const SolverConfig& config, BandedMatrix& J,
                                std::vector<double>& dres_dc);

/// Same Jacobian by grouped finite differences of the residual.
void assemble_jacobian_fd(const CompetitionSystem& system, double k,
                          const DiscretizedWave& wave,
                          const SolverConfig& config, BandedMatrix& J,
                          std::vector<double>& dres_dc);

}  // namespace segwave

#endif
