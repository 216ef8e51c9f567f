#include "segwave/model.hpp"
#include <algorithm>

#include <cmath>
#include <limits>

namespace segwave {

double ScalarField::d_du(double u, double v) const {
    if (du) return du(u, v);
    // one-sided step away from the domain edge
    const double h = (u + fd_step <= 1.0) ? fd_step : -fd_step;
    return (value(u + h, v) - value(u, v)) / h;
}

double ScalarField::d_dv(double u, double v) const {
    if (dv) return dv(u, v);
    const double h = (v + fd_step <= 1.0) ? fd_step : -fd_step;
    return (value(u, v + h) - value(u, v)) / h;
}

ScalarField ScalarField::constant(double c) {
    return ScalarField{[c](double, double) { return c; },
                       [](double, double) { return 0.0; },
                       [](double, double) { return 0.0; }};
}

double Preset::get(const std::string& key, double fallback) const {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

PresetName preset_name_from_string(const std::string& s) {
    if (s == "LotkaVolterra" || s == "lv") return PresetName::LotkaVolterra;
    if (s == "PottsPetrovskii" || s == "pp") return PresetName::PottsPetrovskii;
    if (s == "SKT" || s == "skt") return PresetName::SKT;
    if (s == "GeneralizedSKT" || s == "gskt") return PresetName::GeneralizedSKT;
    throw std::invalid_argument("unknown preset name: " + s);
}

std::string to_string(PresetName name) {
    switch (name) {
        case PresetName::LotkaVolterra: return "LotkaVolterra";
        case PresetName::PottsPetrovskii: return "PottsPetrovskii";
        case PresetName::SKT: return "SKT";
        case PresetName::GeneralizedSKT: return "GeneralizedSKT";
    }
    return "?";
}

namespace {

void require_positive(double x, const char* what) {
    if (!(x > 0.0)) {
        throw std::invalid_argument(std::string(what) + " must be positive");
    }
}

// u^p with the one-sided convention at u = 0 used for derivative-like
// entries of the generalized diffusion matrix: p < 0 yields +inf for the
// pure power but the assembled entries multiply by u or v first.
double upow(double base, double p) { return std::pow(base, p); }

CompetitionSystem make_lv(const Preset& p) {
    const double d = p.get("d", 1.0);
    const double r = p.get("r", 1.0);
    require_positive(d, "d");
    require_positive(r, "r");

    CompetitionSystem sys;
    sys.D.a11 = ScalarField::constant(1.0);
    sys.D.a12 = ScalarField::constant(0.0);
    sys.D.a21 = ScalarField::constant(0.0);
    sys.D.a22 = ScalarField::constant(d);
    for (ScalarField* h : {&sys.H.a11, &sys.H.a12, &sys.H.a21, &sys.H.a22}) {
        *h = ScalarField::constant(0.0);
    }
    sys.g1 = ScalarField{[](double u, double) { return 1.0 - u; },
                         [](double, double) { return -1.0; },
                         [](double, double) { return 0.0; }};
    sys.g2 = ScalarField{[r](double, double v) { return r * (1.0 - v); },
                         [](double, double) { return 0.0; },
                         [r](double, double) { return -r; }};
    sys.omega = ScalarField{[](double u, double v) { return u * v; },
                            [](double, double v) { return v; },
                            [](double u, double) { return u; }};
    return sys;
}

CompetitionSystem make_pp(const Preset& p) {
    const double d = p.get("d", 1.0);
    const double g1c = p.get("gamma1", 0.0);
    const double g2c = p.get("gamma2", 0.0);
    require_positive(d, "d");

    CompetitionSystem sys = make_lv(p);
    sys.D.a11 = ScalarField::constant(1.0);
    sys.D.a12 = ScalarField{[g1c](double u, double) { return -g1c * u; },
                            [g1c](double, double) { return -g1c; },
                            [](double, double) { return 0.0; }};
    sys.D.a21 = ScalarField{[g2c](double, double v) { return -g2c * v; },
                            [](double, double) { return 0.0; },
                            [g2c](double, double) { return -g2c; }};
    sys.D.a22 = ScalarField::constant(d);
    return sys;
}

CompetitionSystem make_skt(const Preset& p, bool generalized) {
    const double d1 = p.get("d1", 1.0);
    const double d2 = p.get("d2", 1.0);
    const double a11 = p.get("a11", 0.0);
    const double a12 = p.get("a12", 0.0);
    const double a21 = p.get("a21", 0.0);
    const double a22 = p.get("a22", 0.0);
    const double b11 = generalized ? p.get("beta11", 1.0) : 1.0;
    const double b12 = generalized ? p.get("beta12", 1.0) : 1.0;
    const double b21 = generalized ? p.get("beta21", 1.0) : 1.0;
    const double b22 = generalized ? p.get("beta22", 1.0) : 1.0;
    require_positive(d1, "d1");
    require_positive(d2, "d2");
    for (double b : {b11, b12, b21, b22}) require_positive(b, "beta");

    CompetitionSystem sys = make_lv(p);  // reaction, omega, zero advection

    // Diffusion matrix = Jacobian of (u(d1+a11 u^b11+a12 v^b12),
    //                                 v(d2+a21 u^b21+a22 v^b22)).
    sys.D.a11 = ScalarField{
        [=](double u, double v) {
            return d1 + a11 * (b11 + 1.0) * upow(u, b11) + a12 * upow(v, b12);
        },
        [=](double u, double) {
            return a11 * (b11 + 1.0) * b11 * upow(u, b11 - 1.0);
        },
        [=](double, double v) { return a12 * b12 * upow(v, b12 - 1.0); }};
    sys.D.a12 = ScalarField{
        [=](double u, double v) {
            if (v == 0.0 && b12 < 1.0) {
                return u == 0.0 ? 0.0
                                : std::numeric_limits<double>::infinity();
            }
            return a12 * b12 * u * upow(v, b12 - 1.0);
        },
        [=](double, double v) { return a12 * b12 * upow(v, b12 - 1.0); },
        [=](double u, double v) {
            // the exponent-one entry is linear in u, constant in v
            if (b12 == 1.0) return 0.0;
            return a12 * b12 * (b12 - 1.0) * u * upow(v, b12 - 2.0);
        }};
    sys.D.a21 = ScalarField{
        [=](double u, double v) {
            if (u == 0.0 && b21 < 1.0) {
                return v == 0.0 ? 0.0
                                : std::numeric_limits<double>::infinity();
            }
            return a21 * b21 * v * upow(u, b21 - 1.0);
        },
        [=](double u, double v) {
            if (b21 == 1.0) return 0.0;
            return a21 * b21 * (b21 - 1.0) * v * upow(u, b21 - 2.0);
        },
        [=](double u, double) { return a21 * b21 * upow(u, b21 - 1.0); }};
    sys.D.a22 = ScalarField{
        [=](double u, double v) {
            return d2 + a22 * (b22 + 1.0) * upow(v, b22) + a21 * upow(u, b21);
        },
        [=](double u, double) { return a21 * b21 * upow(u, b21 - 1.0); },
        [=](double, double v) {
            return a22 * (b22 + 1.0) * b22 * upow(v, b22 - 1.0);
        }};
    return sys;
}

}  // namespace

CompetitionSystem make_preset(const Preset& preset) {
    CompetitionSystem sys;
    switch (preset.name) {
        case PresetName::LotkaVolterra: sys = make_lv(preset); break;
        case PresetName::PottsPetrovskii: sys = make_pp(preset); break;
        case PresetName::SKT: sys = make_skt(preset, false); break;
        case PresetName::GeneralizedSKT: sys = make_skt(preset, true); break;
    }
    sys.alpha = preset.get("alpha", 1.0);
    sys.k = preset.get("k", 1.0);
    require_positive(sys.alpha, "alpha");
    require_positive(sys.k, "k");
    sys.origin = preset;
    return sys;
}

bool ValidationReport::all_pass() const {
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

const AssumptionCheck& ValidationReport::check(const std::string& name) const {
    for (const auto& c : checks) {
        if (c.name == name) return c;
    }
    throw std::out_of_range("no such check: " + name);
}

ValidationReport validate_assumptions(const CompetitionSystem& system,
                                      int grid_n) {
    if (grid_n < 2) throw std::invalid_argument("grid_n must be >= 2");
    const int n = grid_n;
    auto node = [n](int i) { return static_cast<double>(i) / (n - 1); };

    ValidationReport report;

    // finiteness of every coefficient entry on the sample grid
    {
        AssumptionCheck c{"A1_finite_entries", true, 0.0, 0.0, 0.0,
                          "all D, H, g, omega samples finite"};
        const ScalarField* fields[] = {
            &system.D.a11, &system.D.a12, &system.D.a21, &system.D.a22,
            &system.H.a11, &system.H.a12, &system.H.a21, &system.H.a22,
            &system.g1,    &system.g2,    &system.omega};
        for (const ScalarField* f : fields) {
            for (int i = 0; i < n && c.pass; ++i) {
                for (int j = 0; j < n; ++j) {
                    const double val = (*f)(node(i), node(j));
                    if (!std::isfinite(val)) {
                        c.pass = false;
                        c.worst_value = val;
                        c.worst_u = node(i);
                        c.worst_v = node(j);
                        c.detail = "non-finite coefficient sample";
                        break;
                    }
                }
            }
        }
        report.checks.push_back(c);
    }

    // self-diffusion positivity
    {
        AssumptionCheck c{"A2_self_diffusion_positive", true, 0.0, 0.0, 0.0, ""};
        double m = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                for (const ScalarField* f : {&system.D.a11, &system.D.a22}) {
                    const double val = (*f)(node(i), node(j));
                    if (val < m) {
                        m = val;
                        c.worst_value = val;
                        c.worst_u = node(i);
                        c.worst_v = node(j);
                    }
                }
            }
        }
        c.pass = m > 0.0;
        c.detail = "min of d11, d22 over the grid";
        report.checks.push_back(c);
    }

    // cross couplings vanish on the axis of the absent species
    {
        AssumptionCheck c{"A3_no_coupling_at_zero", true, 0.0, 0.0, 0.0,
                          "max |d12(0,.)|, |d21(.,0)|, |h12(0,.)|, |h21(.,0)|"};
        double worst = 0.0;
        for (int i = 0; i < n; ++i) {
            const double s = node(i);
            struct Probe {
                double val, u, v;
            } probes[] = {{std::abs(system.D.a12(0.0, s)), 0.0, s},
                          {std::abs(system.D.a21(s, 0.0)), s, 0.0},
                          {std::abs(system.H.a12(0.0, s)), 0.0, s},
                          {std::abs(system.H.a21(s, 0.0)), s, 0.0}};
            for (const auto& p : probes) {
                if (p.val > worst) {
                    worst = p.val;
                    c.worst_value = p.val;
                    c.worst_u = p.u;
                    c.worst_v = p.v;
                }
            }
        }
        c.pass = worst <= 1e-12;
        report.checks.push_back(c);
    }

    // monostable single-species growth: positive inside, zero at capacity
    {
        AssumptionCheck c{"A4_monostable_growth", true, 0.0, 0.0, 0.0, ""};
        for (int i = 1; i + 1 < n; ++i) {
            const double s = node(i);
            const double v1 = system.g1(s, 0.0);
            if (!(v1 > 0.0)) {
                c.pass = false;
                c.worst_value = v1;
                c.worst_u = s;
                c.worst_v = 0.0;
                c.detail = "g1(u,0) not positive in (0,1)";
                break;
            }
            const double v2 = system.g2(0.0, s);
            if (!(v2 > 0.0)) {
                c.pass = false;
                c.worst_value = v2;
                c.worst_u = 0.0;
                c.worst_v = s;
                c.detail = "g2(0,v) not positive in (0,1)";
                break;
            }
        }
        if (c.pass) {
            const double e1 = std::abs(system.g1(1.0, 0.0));
            const double e2 = std::abs(system.g2(0.0, 1.0));
            if (e1 > 1e-12 || e2 > 1e-12) {
                c.pass = false;
                c.worst_value = std::max(e1, e2);
                c.worst_u = e1 >= e2 ? 1.0 : 0.0;
                c.worst_v = e1 >= e2 ? 0.0 : 1.0;
                c.detail = "growth does not vanish at carrying capacity";
            } else {
                c.detail = "g1(.,0), g2(0,.) positive in (0,1), zero at 1";
            }
        }
        report.checks.push_back(c);
    }

    // competition kernel positive off the axes, zero on them
    {
        AssumptionCheck c{"A5_competition_kernel", true, 0.0, 0.0, 0.0, ""};
        for (int i = 1; i < n && c.pass; ++i) {
            for (int j = 1; j < n; ++j) {
                const double w = system.omega(node(i), node(j));
                if (!(w > 0.0)) {
                    c.pass = false;
                    c.worst_value = w;
                    c.worst_u = node(i);
                    c.worst_v = node(j);
                    c.detail = "omega not positive in (0,1]^2";
                    break;
                }
            }
        }
        if (c.pass) {
            for (int i = 0; i < n; ++i) {
                const double s = node(i);
                const double w1 = std::abs(system.omega(s, 0.0));
                const double w2 = std::abs(system.omega(0.0, s));
                const double w = std::max(w1, w2);
                if (w > 1e-12) {
                    c.pass = false;
                    c.worst_value = w;
                    c.worst_u = w1 >= w2 ? s : 0.0;
                    c.worst_v = w1 >= w2 ? 0.0 : s;
                    c.detail = "omega does not vanish on the axes";
                    break;
                }
            }
        }
        if (c.pass) c.detail = "omega positive off the axes, zero on them";
        report.checks.push_back(c);
    }

    return report;
}

ScalarLimitProblem ScalarLimitProblem::from_branches(
    std::function<double(double)> d_pos, std::function<double(double)> d_neg,
    std::function<double(double)> h_pos, std::function<double(double)> h_neg,
    std::function<double(double)> g_pos, std::function<double(double)> g_neg,
    double alpha) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    ScalarLimitProblem p;
    p.alpha_ = alpha;
    p.d_pos_ = std::move(d_pos);
    p.d_neg_ = std::move(d_neg);
    p.h_pos_ = std::move(h_pos);
    p.h_neg_ = std::move(h_neg);
    p.g_pos_ = std::move(g_pos);
    p.g_neg_ = std::move(g_neg);
    p.d_at_zero_ = p.d_pos_(0.0);
    p.h_at_zero_ = p.h_pos_(0.0);
    return p;
}

ScalarLimitProblem ScalarLimitProblem::from_glued(
    std::function<double(double)> d, std::function<double(double)> h,
    std::function<double(double)> g, double alpha) {
    // never sample the glued functions at exactly 0
    auto pos = [](std::function<double(double)> f) {
        return [f = std::move(f)](double z) {
            return f(z == 0.0 ? eps_limit : z);
        };
    };
    auto neg = [](std::function<double(double)> f) {
        return [f = std::move(f)](double z) {
            return f(z == 0.0 ? -eps_limit : z);
        };
    };
    auto g_pos = [g](double z) { return z == 0.0 ? 0.0 : g(z); };
    auto g_neg = g_pos;
    auto problem = from_branches(pos(d), neg(d), pos(h), neg(h), g_pos, g_neg,
                                 alpha);
    return problem;
}

double ScalarLimitProblem::eval(const std::function<double(double)>& f,
                                double z, double lo, double hi) {
    // clamp roundoff-scale overshoot of the branch endpoints
    const double slack = 1e-12 * (std::abs(lo) + std::abs(hi) + 1.0);
    if (!(z >= lo - slack && z <= hi + slack)) {
        throw std::domain_error("coefficient evaluated outside its branch");
    }
    return f(std::clamp(z, lo, hi));
}

double ScalarLimitProblem::g_reduced(double z) const {
    if (z > 0.0) return g_pos(z);
    if (z < 0.0) return g_neg(z);
    return 0.0;
}

double ScalarLimitProblem::d_glued(double z) const {
    if (z > 0.0) return d_pos(z);
    if (z < 0.0) return d_neg(z);
    return d_at_zero_;
}

double ScalarLimitProblem::h_glued(double z) const {
    if (z > 0.0) return h_pos(z);
    if (z < 0.0) return h_neg(z);
    return h_at_zero_;
}

void ScalarLimitProblem::set_values_at_zero(double d0, double h0) {
    d_at_zero_ = d0;
    h_at_zero_ = h0;
}

double ScalarLimitProblem::g_prime_pos(double z) const {
    if (gp_pos_) return gp_pos_(z);
    const double h = (z + fd_step <= alpha_) ? fd_step : -fd_step;
    return (g_pos(z + h) - g_pos(z)) / h;
}

double ScalarLimitProblem::g_prime_neg(double z) const {
    if (gp_neg_) return gp_neg_(z);
    const double h = (z + fd_step <= 0.0) ? fd_step : -fd_step;
    return (g_neg(z + h) - g_neg(z)) / h;
}

void ScalarLimitProblem::register_g_primes(
    std::function<double(double)> gp_pos, std::function<double(double)> gp_neg) {
    gp_pos_ = std::move(gp_pos);
    gp_neg_ = std::move(gp_neg);
}

ScalarLimitProblem reduce_to_scalar(const CompetitionSystem& system) {
    const double alpha = system.alpha;
    // copies of the coefficient closures keep the problem self-contained
    const ScalarField d11 = system.D.a11;
    const ScalarField d22 = system.D.a22;
    const ScalarField h11 = system.H.a11;
    const ScalarField h22 = system.H.a22;
    const ScalarField g1 = system.g1;
    const ScalarField g2 = system.g2;

    auto problem = ScalarLimitProblem::from_branches(
        [d11, alpha](double z) { return d11(z / alpha, 0.0); },
        [d22](double z) { return d22(0.0, -z); },
        [h11, alpha](double z) { return h11(z / alpha, 0.0); },
        [h22](double z) { return h22(0.0, -z); },
        [g1, alpha](double z) { return z * g1(z / alpha, 0.0); },
        [g2](double z) { return z * g2(0.0, -z); }, alpha);

    if (g1.has_analytic_partials() && g2.has_analytic_partials()) {
        problem.register_g_primes(
            [g1, alpha](double z) {
                return g1(z / alpha, 0.0) + (z / alpha) * g1.d_du(z / alpha, 0.0);
            },
            [g2](double z) { return g2(0.0, -z) - z * g2.d_dv(0.0, -z); });
    }
    return problem;
}

}  // namespace segwave
