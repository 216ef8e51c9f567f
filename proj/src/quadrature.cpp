#include "segwave/quadrature.hpp"

#include <cmath>

namespace segwave {

namespace {

// Gauss--Kronrod 7-15 nodes and weights on [-1, 1]
constexpr double xgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
constexpr double wgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
constexpr double wg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Panel {
    double value, error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    const double fc = f(c);
    double res_g = fc * wg[3];
    double res_k = fc * wgk[7];
    for (int j = 0; j < 7; ++j) {
        const double x = hw * xgk[j];
        const double fsum = f(c - x) + f(c + x);
        res_k += wgk[j] * fsum;
        if (j % 2 == 1) res_g += wg[j / 2] * fsum;
    }
    res_g *= hw;
    res_k *= hw;
    return {res_k, std::abs(res_k - res_g)};
}

void refine(const std::function<double(double)>& f, double a, double b,
            double tol, int depth, int max_depth, QuadratureResult& out) {
    const Panel p = gk15(f, a, b);
    if (p.error <= tol || depth >= max_depth) {
        out.value += p.value;
        out.error_estimate += p.error;
        ++out.panels;
        return;
    }
    const double c = 0.5 * (a + b);
    refine(f, a, c, 0.5 * tol, depth + 1, max_depth, out);
    refine(f, c, b, 0.5 * tol, depth + 1, max_depth, out);
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f,
                                    double a, double b, double abs_tol,
                                    int max_depth) {
    QuadratureResult out;
    refine(f, a, b, abs_tol, 0, max_depth, out);
    return out;
}

}  // namespace segwave
