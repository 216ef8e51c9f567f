#ifndef SEGWAVE_LIMITS_HPP
#define SEGWAVE_LIMITS_HPP

#include <stdexcept>
#include <vector>

#include "segwave/model.hpp"
#include "segwave/phaseplane.hpp"
#include "segwave/system_wave.hpp"

namespace segwave {

class NoSignChangeError : public std::runtime_error {
  public:
    explicit NoSignChangeError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Translates the grid so that the linear interpolant of alpha*phi - psi
/// vanishes at xi = 0, matching the limit normalization z(0) = 0.
DiscretizedWave shift_align(const DiscretizedWave& wave, double alpha);

/// Per-k comparison row against the limit wave.
struct ConvergenceRow {
    double k = 0.0;
    double c_k = 0.0;
    double speed_gap = 0.0;     // |c_k - c_inf|
    double sup_dist = 0.0;      // sup over both components after alignment
    double deriv_l1 = 0.0;      // trapezoidal L1 distance of the derivatives
    double segregation = 0.0;   // max of phi_k * psi_k
    bool converged = false;
    std::string note;
};

struct ConvergenceReport {
    double c_inf = 0.0;
    double flux_at_zero = 0.0;
    double c_star_pos = 0.0;
    double c_star_neg = 0.0;
    double tail_bound_sup = 0.0;  // equilibrium gap of the limit beyond the
                                  //   truncated comparison window
    std::vector<ConvergenceRow> rows;  // sorted by increasing k
};

/// Distances between an aligned finite-k wave and the limit wave, measured
/// on the aligned solver grid; the limit is sampled by linear interpolation
/// with its corner kept at a node and one-sided derivatives at xi = 0.
void wave_limit_distances(const DiscretizedWave& aligned,
                          const LimitWave& limit, double& sup_dist,
                          double& deriv_l1);

/// Runs the singular-limit experiment: computes the limit wave once, solves
/// the finite-k waves along the schedule, aligns them and fills the report.
/// Sub-solver failures leave partial rows flagged as not converged.
ConvergenceReport convergence_study(const CompetitionSystem& system,
                                    const SolverConfig& config,
                                    const MatchOptions& match_opts = {});

}  // namespace segwave

#endif
