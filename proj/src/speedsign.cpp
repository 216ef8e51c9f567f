#include "segwave/speedsign.hpp"

#include <cmath>

#include "segwave/quadrature.hpp"

namespace segwave {

namespace {

int sign_of(double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); }

}  // namespace

SignReport sign_functional(const CompetitionSystem& system) {
    SignReport report;

    // hypothesis: h11 and h22 constant and equal
    const int n = 32;
    const double h0 = system.H.a11(0.0, 0.0);
    double dev = 0.0;
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            const double u = static_cast<double>(i) / n;
            const double v = static_cast<double>(j) / n;
            dev = std::max(dev, std::abs(system.H.a11(u, v) - h0));
            dev = std::max(dev, std::abs(system.H.a22(u, v) - h0));
        }
    }
    report.h0 = h0;
    if (dev > 1e-12) {
        report.applicable = false;
        report.inapplicable_reason =
            "self-advections are not a common constant";
        return report;
    }
    report.applicable = true;

    const auto& d11 = system.D.a11;
    const auto& d22 = system.D.a22;
    const auto& g1 = system.g1;
    const auto& g2 = system.g2;
    auto i1 = integrate_adaptive(
        [&](double s) { return s * d11(s, 0.0) * g1(s, 0.0); }, 0.0, 1.0,
        1e-12);
    auto i2 = integrate_adaptive(
        [&](double s) { return s * d22(0.0, s) * g2(0.0, s); }, 0.0, 1.0,
        1e-12);
    report.I1 = i1.value;
    report.I2 = i2.value;
    report.S = system.alpha * system.alpha * report.I1 - report.I2;
    report.predicted_sign = sign_of(report.S);
    report.quadrature_error = i1.error_estimate + i2.error_estimate;
    return report;
}

SpeedEstimates speed_estimates(const ScalarLimitProblem& problem) {
    SpeedEstimates est;
    const MonostableBranch pos = positive_branch(problem);
    const MonostableBranch neg = negative_branch_reflected(problem);

    auto bounds = [](const MonostableBranch& br, double& lower, double& upper) {
        lower = 2.0 * std::sqrt(br.d(0.0) * br.gp_at_0) - br.h(0.0);
        const int n = 1000;
        const double dw = br.U / n;
        double cum_gd = 0.0, cum_h = 0.0;
        double prev_gd = br.gp_at_0 * br.d(0.0);
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
        upper = 2.0 * std::sqrt(std::max(sup_gd, 0.0)) - inf_h;
    };
    bounds(pos, est.lower_pos, est.upper_pos);
    bounds(neg, est.lower_neg, est.upper_neg);
    return est;
}

std::optional<double> kpp_linear_speed(const ScalarLimitProblem& problem,
                                       Side side) {
    const MonostableBranch br = side == Side::positive
                                    ? positive_branch(problem)
                                    : negative_branch_reflected(problem);
    const int n = 1000;
    std::vector<double> p(n + 1);
    double scale = 0.0;
    for (int j = 0; j <= n; ++j) {
        const double w = br.U * j / n;
        p[j] = br.d(w) * br.g(w);
        scale = std::max(scale, std::abs(p[j]));
    }
    const double tol = 1e-12 * scale;
    for (int j = 1; j < n; ++j) {
        if (p[j + 1] - 2.0 * p[j] + p[j - 1] > tol) return std::nullopt;
    }
    return 2.0 * std::sqrt(br.d(0.0) * br.gp_at_0) - br.h(0.0);
}

std::string to_string(SignVerdict v) {
    switch (v) {
        case SignVerdict::agree: return "agree";
        case SignVerdict::disagree: return "disagree";
        case SignVerdict::indeterminate: return "indeterminate";
    }
    return "?";
}

SignCrossCheck cross_check_sign(const SignReport& report, double c_inf,
                                double speed_tol) {
    SignCrossCheck out;
    out.report = report;
    out.c_inf = c_inf;
    const double effective = c_inf + report.h0;
    if (std::abs(report.S) < 1e-3 || std::abs(effective) < 10.0 * speed_tol) {
        out.verdict = SignVerdict::indeterminate;
    } else {
        out.verdict = sign_of(effective) == report.predicted_sign
                          ? SignVerdict::agree
                          : SignVerdict::disagree;
    }
    return out;
}

SignCrossCheck cross_check_sign(const CompetitionSystem& system,
                                const MatchOptions& opts) {
    SignReport report = sign_functional(system);
    if (!report.applicable) {
        SignCrossCheck out;
        out.report = report;
        out.verdict = SignVerdict::indeterminate;
        return out;
    }
    const ScalarLimitProblem problem = reduce_to_scalar(system);
    const LimitWave wave = match_bistable(problem, opts);
    return cross_check_sign(report, wave.c_inf, opts.speed_tol);
}

}  // namespace segwave
