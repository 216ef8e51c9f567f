#ifndef SEGWAVE_SPEEDSIGN_HPP
#define SEGWAVE_SPEEDSIGN_HPP

#include <optional>
#include <string>

#include "segwave/model.hpp"
#include "segwave/phaseplane.hpp"

namespace segwave {

/// Sign functional of the effective limiting speed. With constant and equal
/// self-advections h0, the sign of c_inf + h0 equals the sign of
/// S = alpha^2 I1 - I2, where
///   I1 = int_0^1 s d11(s,0) g1(s,0) ds,
///   I2 = int_0^1 s d22(0,s) g2(0,s) ds.
/// The difference form has the same sign as the quotient form
/// alpha^2 - I2/I1 because I1 > 0, avoiding division near small I1.
struct SignReport {
    double I1 = 0.0;
    double I2 = 0.0;
    double S = 0.0;
    double h0 = 0.0;
    int predicted_sign = 0;  // sign of S
    double quadrature_error = 0.0;
    bool applicable = false;  // self-advections constant and equal
    std::string inapplicable_reason;
};

SignReport sign_functional(const CompetitionSystem& system);

struct SpeedEstimates {
    double lower_pos = 0.0;  // linearization bound for c*+
    double lower_neg = 0.0;  // linearization bound for c*-
    double upper_pos = 0.0;  // averaged-coefficient upper bound for c*+
    double upper_neg = 0.0;  // same for c*-
};

/// Lower bounds 2 sqrt(d(0+-) g'(0+-)) -/+ h(0+-) and sampled upper bounds
/// from the averaged-coefficient expressions (10^3-point grids).
SpeedEstimates speed_estimates(const ScalarLimitProblem& problem);

/// Linearly determined minimal speed, available when the sampled map
/// z -> d(z) g(z) on the requested side is concave (nonpositive second
/// differences on a 10^3-point grid).
std::optional<double> kpp_linear_speed(const ScalarLimitProblem& problem,
                                       Side side);

enum class SignVerdict { agree, disagree, indeterminate };

std::string to_string(SignVerdict v);

struct SignCrossCheck {
    SignVerdict verdict = SignVerdict::indeterminate;
    SignReport report;
    double c_inf = 0.0;
};

/// Compares the predicted sign of c_inf + h0 against a computed limit wave.
/// Indeterminate when |S| < 1e-3 or |c_inf + h0| < 10 * speed_tol.
SignCrossCheck cross_check_sign(const SignReport& report, double c_inf,
                                double speed_tol = 1e-6);

/// Convenience overload running the reduction and the bistable matching.
SignCrossCheck cross_check_sign(const CompetitionSystem& system,
                                const MatchOptions& opts = {});

}  // namespace segwave

#endif
