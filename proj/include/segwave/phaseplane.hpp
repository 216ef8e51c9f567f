#ifndef SEGWAVE_PHASEPLANE_HPP
#define SEGWAVE_PHASEPLANE_HPP

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "segwave/model.hpp"

namespace segwave {

enum class Side { positive, negative };

std::string to_string(Side side);

/// One monostable half of the scalar problem, in the orientation used by the
/// shooting routine: state w in (0, U], reaction positive inside, wave
/// decreasing from U toward 0. The negative half of the bistable problem maps
/// onto this form by reflection; its effective speed is the negative of the
/// bistable frame speed.
struct MonostableBranch {
    std::function<double(double)> d;  // diffusion, positive on [0, U]
    std::function<double(double)> h;  // advection
    std::function<double(double)> g;  // reaction, zero at 0 and U
    double U = 1.0;
    double gp_at_U = -1.0;  // one-sided reaction slope at U, negative
    double gp_at_0 = 1.0;   // one-sided reaction slope at 0, positive
};

MonostableBranch positive_branch(const ScalarLimitProblem& problem);
/// Reflected negative half; shoot it at speed -c to probe the bistable
/// problem at speed c.
MonostableBranch negative_branch_reflected(const ScalarLimitProblem& problem);

struct ShootOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double front_tol = 1e-6;          // |flux| threshold separating fronts
    double launch_factor = 1e-6;      // launch offset = factor * U
    double z_cut_factor = 1e-10;      // final analytic step below this * U
    double max_step = 0.0;            // 0 = unlimited (profile shots clamp)
    std::size_t max_steps = 500000;
    bool with_profile = false;        // also integrate the wave variable
};

enum class ShotOutcome {
    ReachedZeroWithNegativeFlux,
    VanishedBeforeZero,
    NumericalFailure
};

/// Phase-plane trajectory of the flux variable y(z) = d(z) z' along one side
/// at a trial speed.
struct SemiWaveShot {
    Side side = Side::positive;
    double c = 0.0;  // speed in the bistable frame
    ShotOutcome outcome = ShotOutcome::NumericalFailure;
    std::vector<double> z_samples;   // equilibrium end first
    std::vector<double> y_samples;   // flux d(z) z', nonpositive
    std::vector<double> xi_samples;  // filled for profile shots, xi(0) = 0
    double flux_at_zero = 0.0;       // y at z -> 0 on this side (if reached)
    double z_stop = 0.0;             // where y vanished, for front outcomes
    double y_at_1e3 = 0.0;           // flux at |z| = 1e-3 and 1e-4, used to
    double y_at_1e4 = 0.0;           //   tell slow decay from a negative limit
};

/// Integrates y dy/dz = -(c + h) y - d g from the carrying-capacity end of
/// the requested side toward z = 0 and classifies the arrival.
SemiWaveShot shoot_semi_wave(const ScalarLimitProblem& problem, Side side,
                             double c, const ShootOptions& opts = {});

class NoSemiWaveError : public std::runtime_error {
  public:
    explicit NoSemiWaveError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Flux at the origin for a semi-wave shot; throws NoSemiWaveError when the
/// shot classifies as front-type or fails.
double flux_at_zero(const ScalarLimitProblem& problem, Side side, double c,
                    const ShootOptions& opts = {});

struct SpeedOptions {
    double speed_tol = 1e-6;
    double bracket_cap = 1e3;         // give up growing the bracket here
    double certificate_delta = 1e-5;  // offsets of the certificate shots
    double probe_offset = 1e-4;       // pushed-front probe above the
                                      //   linearization speed
    ShootOptions shoot;
};

class BracketError : public std::runtime_error {
  public:
    explicit BracketError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Minimal front speed of one monostable side. For the negative side the
/// value is the minimal speed of the reflected problem, so the
/// classification flip in the bistable frame sits at its negative.
struct MinimalSpeedResult {
    Side side = Side::positive;
    double c_star = 0.0;
    double bracket_lo = 0.0;  // initial bisection bracket
    double bracket_hi = 0.0;
    int iterations = 0;
    bool linearly_determined = false;  // speed pinned by the linearization
    SemiWaveShot below;  // certificate: semi-wave below c_star
    SemiWaveShot above;  // certificate: front just above c_star
};

MinimalSpeedResult minimal_speed(const ScalarLimitProblem& problem, Side side,
                                 const SpeedOptions& opts = {});

struct MatchOptions {
    double speed_tol = 1e-6;
    double flux_tol_rel = 1e-8;   // matching gap, relative to max |flux|
    double delta_inset = 1e-5;    // inset of the matching bracket
    std::size_t max_iters = 200;
    ShootOptions shoot;
    // profile reconstruction
    double xi_step = 1e-3;        // uniform grid spacing
    double xi_half_span = 0.0;    // 0 = span of the launched trajectories
    double profile_max_dz = 1e-3; // z-step clamp of the profile shots
    double tail_tol = 1e-5;       // |z - equilibrium| switching to the
                                  //   linearized exponential tail
};

class A6ViolationError : public std::runtime_error {
  public:
    A6ViolationError(double c_star_pos, double c_star_neg)
        : std::runtime_error("no bistable wave: -c*- >= c*+"),
          c_star_pos(c_star_pos),
          c_star_neg(c_star_neg) {}
    double c_star_pos;
    double c_star_neg;
};

class MatchError : public std::runtime_error {
  public:
    explicit MatchError(const std::string& what) : std::runtime_error(what) {}
};

/// Limiting segregated wave. z decreases from alpha to -1 with z(0) = 0;
/// phi = z^+ / alpha and psi = z^- never overlap. Derivative samples carry
/// the one-sided values at the grid node xi = 0.
struct LimitWave {
    double c_inf = 0.0;
    double flux_at_zero = 0.0;  // matched value of d(z) z' at 0, negative
    double flux_pos = 0.0;      // per-side fluxes entering the match
    double flux_neg = 0.0;
    std::vector<double> xi_grid;
    std::vector<double> z_values;
    std::vector<double> phi_values;
    std::vector<double> psi_values;
    std::vector<double> dphi_values;
    std::vector<double> dpsi_values;
    std::size_t zero_index = 0;  // grid node at xi = 0
    int match_iterations = 0;
    double match_gap = 0.0;      // |flux_pos - flux_neg| at acceptance
};

/// Finds the unique speed at which the two semi-wave fluxes agree at z = 0
/// and reconstructs the profile. Throws A6ViolationError when the minimal
/// speeds leave no admissible speed interval.
LimitWave match_bistable(const ScalarLimitProblem& problem,
                         const MinimalSpeedResult& pos,
                         const MinimalSpeedResult& neg,
                         const MatchOptions& opts = {});

/// Convenience overload computing both minimal speeds first.
LimitWave match_bistable(const ScalarLimitProblem& problem,
                         const MatchOptions& opts = {});

/// Rebuilds the profile at a given speed from two profile-augmented shots,
/// inverting xi(z) by monotone cubic interpolation onto a uniform grid.
LimitWave reconstruct_profile(const ScalarLimitProblem& problem, double c_inf,
                              const SemiWaveShot& shot_pos,
                              const SemiWaveShot& shot_neg,
                              const MatchOptions& opts = {});

/// |{-d(0+) alpha phi'(0-)} - {d(0-) psi'(0+)}| from the stored one-sided
/// derivatives.
double free_boundary_residual(const LimitWave& wave,
                              const ScalarLimitProblem& problem);
double free_boundary_residual(const LimitWave& wave,
                              const CompetitionSystem& system);

/// Max residual of -(d(z)z')' - (c + h(z))z' - g(z) on interior grid nodes
/// with |xi| >= xi_margin, by half-node flux differences.
double profile_ode_residual_max(const LimitWave& wave,
                                const ScalarLimitProblem& problem,
                                double xi_margin = 0.05);

}  // namespace segwave

#endif
