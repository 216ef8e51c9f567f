#ifndef SEGWAVE_MODEL_HPP
#define SEGWAVE_MODEL_HPP

#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace segwave {

/// Scalar coefficient of the state (u, v) on [0,1]^2. Presets register
/// analytic partial derivatives; user-supplied fields fall back to one-sided
/// finite differences with step `fd_step`.
struct ScalarField {
    std::function<double(double, double)> value;
    std::function<double(double, double)> du;  // optional
    std::function<double(double, double)> dv;  // optional

    static constexpr double fd_step = 1e-6;

    double operator()(double u, double v) const { return value(u, v); }
    bool has_analytic_partials() const { return static_cast<bool>(du); }
    double d_du(double u, double v) const;
    double d_dv(double u, double v) const;

    static ScalarField constant(double c);
};

/// 2x2 matrix of coefficient fields (diffusion or advection rates).
struct CoefficientField2x2 {
    ScalarField a11, a12, a21, a22;
};

enum class PresetName { LotkaVolterra, PottsPetrovskii, SKT, GeneralizedSKT };

/// Named model with its scalar parameters. Recognized keys depend on the
/// model: LV {alpha,r,d,k}, PP {alpha,r,d,gamma1,gamma2,k},
/// SKT {alpha,r,d1,d2,a11,a12,a21,a22,k}, GeneralizedSKT additionally
/// {beta11,beta12,beta21,beta22}. Missing keys take documented defaults.
struct Preset {
    PresetName name = PresetName::LotkaVolterra;
    std::map<std::string, double> params;

    double get(const std::string& key, double fallback) const;
};

PresetName preset_name_from_string(const std::string& s);
std::string to_string(PresetName name);

/// Two-species competition model: diffusion matrix D, advection matrix H,
/// per-capita growth g1/g2, competition kernel omega, asymmetry alpha and
/// strength k.
struct CompetitionSystem {
    CoefficientField2x2 D;
    CoefficientField2x2 H;
    ScalarField g1, g2;
    ScalarField omega;
    double alpha = 1.0;
    double k = 1.0;
    std::optional<Preset> origin;  // set when built by make_preset
};

CompetitionSystem make_preset(const Preset& preset);

/// One numbered assumption check with the worst sampled offender.
struct AssumptionCheck {
    std::string name;
    bool pass = false;
    double worst_value = 0.0;
    double worst_u = 0.0;
    double worst_v = 0.0;
    std::string detail;
};

struct ValidationReport {
    std::vector<AssumptionCheck> checks;
    bool all_pass() const;
    const AssumptionCheck& check(const std::string& name) const;
};

/// Samples [0,1]^2 on a grid_n x grid_n grid and reports pass/fail for the
/// positivity, decoupling-at-zero, monostability and competition-kernel
/// requirements. Never throws: failures land in the report.
ValidationReport validate_assumptions(const CompetitionSystem& system,
                                      int grid_n = 200);

/// Scalar bistable problem on [-1, alpha] with piecewise coefficients.
///
/// Branch accessors take the closure convention: d_pos/h_pos/g_pos live on
/// [0, alpha] and evaluate at 0 to their one-sided limits; d_neg/h_neg/g_neg
/// live on [-1, 0] likewise. The value a glued coefficient takes at exactly
/// z = 0 is stored separately (`d_at_zero`, `h_at_zero`) and is only ever
/// read by `d_glued`/`h_glued`; no solver consumes it.
class ScalarLimitProblem {
  public:
    ScalarLimitProblem() = default;

    static ScalarLimitProblem from_branches(
        std::function<double(double)> d_pos, std::function<double(double)> d_neg,
        std::function<double(double)> h_pos, std::function<double(double)> h_neg,
        std::function<double(double)> g_pos, std::function<double(double)> g_neg,
        double alpha);

    /// Builds branches from glued coefficient functions of z. The glued
    /// functions are never evaluated at z = 0: one-sided limits are taken at
    /// +/- eps_limit instead.
    static ScalarLimitProblem from_glued(std::function<double(double)> d,
                                         std::function<double(double)> h,
                                         std::function<double(double)> g,
                                         double alpha);

    static constexpr double eps_limit = 1e-8;

    double alpha() const { return alpha_; }
    double u_plus() const { return alpha_; }
    double u_minus() const { return -1.0; }

    // Branch evaluation; z must lie in the branch's closed interval.
    double d_pos(double z) const { return eval(d_pos_, z, 0.0, alpha_); }
    double d_neg(double z) const { return eval(d_neg_, z, -1.0, 0.0); }
    double h_pos(double z) const { return eval(h_pos_, z, 0.0, alpha_); }
    double h_neg(double z) const { return eval(h_neg_, z, -1.0, 0.0); }
    double g_pos(double z) const { return eval(g_pos_, z, 0.0, alpha_); }
    double g_neg(double z) const { return eval(g_neg_, z, -1.0, 0.0); }

    /// Reaction on the full interval; 0 at z = 0 by construction.
    double g_reduced(double z) const;

    /// Glued coefficients; the value at exactly 0 is the stored placeholder.
    double d_glued(double z) const;
    double h_glued(double z) const;
    void set_values_at_zero(double d0, double h0);

    /// One-sided derivative of the reduced reaction, forward/backward
    /// difference with step fd_step unless an analytic value was registered.
    double g_prime_pos(double z) const;
    double g_prime_neg(double z) const;
    void register_g_primes(std::function<double(double)> gp_pos,
                           std::function<double(double)> gp_neg);

    static constexpr double fd_step = 1e-6;

  private:
    static double eval(const std::function<double(double)>& f, double z,
                       double lo, double hi);

    std::function<double(double)> d_pos_, d_neg_, h_pos_, h_neg_, g_pos_, g_neg_;
    std::function<double(double)> gp_pos_, gp_neg_;  // optional analytic
    double alpha_ = 1.0;
    double d_at_zero_ = 0.0;
    double h_at_zero_ = 0.0;
};

/// Restriction of a competition system to each population alone, glued into
/// the scalar bistable problem on [-1, alpha]. Requires the system to pass
/// the assumption checks conceptually; callers may validate first.
ScalarLimitProblem reduce_to_scalar(const CompetitionSystem& system);

}  // namespace segwave

#endif
