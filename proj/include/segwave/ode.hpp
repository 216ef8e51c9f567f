#ifndef SEGWAVE_ODE_HPP
#define SEGWAVE_ODE_HPP

#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace segwave {

/// Control parameters for the embedded Runge--Kutta driver.
struct OdeOptions {
    double rel_tol = 1e-10;
    double abs_tol = 1e-14;
    double max_step = std::numeric_limits<double>::infinity();
    double min_step = 0.0;          // 0 means "derive from machine epsilon"
    std::size_t max_steps = 500000;
};

enum class OdeStatus {
    Reached,        // integrated to the requested endpoint
    Event,          // stopped by the event predicate
    StepCollapse,   // step size underflowed before reaching the endpoint
    StepLimit       // exceeded max_steps
};

template <std::size_t N>
struct OdeResult {
    OdeStatus status = OdeStatus::Reached;
    double t = 0.0;
    std::array<double, N> y{};
    std::size_t steps = 0;
};

/// Dormand--Prince 5(4) pair with FSAL, fixed small dimension N.
///
/// Integrates y' = f(t, y) from t0 to t1 (either direction). After each
/// accepted step the observer is called with (t, y); if the event predicate
/// returns true the integration stops at that sample. Mandatory stops can be
/// listed in `checkpoints` (strictly between t0 and t1, sorted in the
/// direction of integration); the driver lands on each exactly.
template <std::size_t N, class F, class Observer, class Event>
OdeResult<N> integrate_dopri5(F&& f, double t0, double t1,
                              std::array<double, N> y0, const OdeOptions& opts,
                              Observer&& observe, Event&& event,
                              const std::vector<double>& checkpoints = {}) {
    using Vec = std::array<double, N>;
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                            c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                            a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                            a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113,
                            b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                            b6 = 11.0 / 84;
    // difference between 5th and 4th order weights (error estimator)
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                            e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeResult<N> out;
    const double dir = (t1 >= t0) ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    const double hmin =
        (opts.min_step > 0.0)
            ? opts.min_step
            : 16.0 * std::numeric_limits<double>::epsilon() *
                  std::max(std::abs(t0), std::abs(t1));

    double t = t0;
    Vec y = y0;
    Vec k1 = f(t, y);
    double h = std::min({0.01 * span, opts.max_step});
    std::size_t next_checkpoint = 0;

    observe(t, y);
    if (event(t, y)) {
        out.status = OdeStatus::Event;
        out.t = t;
        out.y = y;
        return out;
    }

    for (std::size_t step = 0; step < opts.max_steps; ++step) {
        bool hit_end = false;
        double target = t1;
        if (next_checkpoint < checkpoints.size()) target = checkpoints[next_checkpoint];
        if (dir * (t + dir * h - target) >= 0.0) {
            h = std::abs(target - t);
            hit_end = true;
        }
        if (h < hmin && !hit_end) {
            out.status = OdeStatus::StepCollapse;
            out.t = t;
            out.y = y;
            out.steps = step;
            return out;
        }

        const double hd = dir * h;
        Vec y2, y3, y4, y5, y6, ynew;
        for (std::size_t i = 0; i < N; ++i) y2[i] = y[i] + hd * a21 * k1[i];
        Vec k2 = f(t + hd * c2, y2);
        for (std::size_t i = 0; i < N; ++i)
            y3[i] = y[i] + hd * (a31 * k1[i] + a32 * k2[i]);
        Vec k3 = f(t + hd * c3, y3);
        for (std::size_t i = 0; i < N; ++i)
            y4[i] = y[i] + hd * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
        Vec k4 = f(t + hd * c4, y4);
        for (std::size_t i = 0; i < N; ++i)
            y5[i] = y[i] + hd * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] +
                                 a54 * k4[i]);
        Vec k5 = f(t + hd * c5, y5);
        for (std::size_t i = 0; i < N; ++i)
            y6[i] = y[i] + hd * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] +
                                 a64 * k4[i] + a65 * k5[i]);
        Vec k6 = f(t + hd, y6);
        for (std::size_t i = 0; i < N; ++i)
            ynew[i] = y[i] + hd * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] +
                                   b5 * k5[i] + b6 * k6[i]);
        Vec k7 = f(t + hd, ynew);

        double err = 0.0;
        bool finite = true;
        for (std::size_t i = 0; i < N; ++i) {
            const double ei = hd * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] +
                                    e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
            const double sc = opts.abs_tol +
                              opts.rel_tol * std::max(std::abs(y[i]),
                                                      std::abs(ynew[i]));
            const double r = ei / sc;
            err += r * r;
            if (!std::isfinite(ynew[i])) finite = false;
        }
        err = std::sqrt(err / static_cast<double>(N));

        if (!finite && h <= hmin) {
            out.status = OdeStatus::StepCollapse;
            out.t = t;
            out.y = y;
            out.steps = step;
            return out;
        }
        if (finite && (err <= 1.0 || h <= hmin)) {
            t = hit_end ? target : t + hd;
            y = ynew;
            k1 = k7;  // FSAL
            out.steps = step + 1;
            observe(t, y);
            if (event(t, y)) {
                out.status = OdeStatus::Event;
                out.t = t;
                out.y = y;
                return out;
            }
            if (hit_end) {
                if (next_checkpoint < checkpoints.size() &&
                    target == checkpoints[next_checkpoint]) {
                    ++next_checkpoint;
                } else {
                    out.status = OdeStatus::Reached;
                    out.t = t;
                    out.y = y;
                    return out;
                }
            }
        }

        const double fac =
            finite ? std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2),
                                0.2, 5.0)
                   : 0.2;
        h = std::min(h * fac, opts.max_step);
    }
    out.status = OdeStatus::StepLimit;
    out.t = t;
    out.y = y;
    return out;
}

/// Convenience wrapper without events or checkpoints.
template <std::size_t N, class F>
OdeResult<N> integrate_dopri5(F&& f, double t0, double t1,
                              std::array<double, N> y0,
                              const OdeOptions& opts = {}) {
    return integrate_dopri5<N>(
        std::forward<F>(f), t0, t1, y0, opts,
        [](double, const std::array<double, N>&) {},
        [](double, const std::array<double, N>&) { return false; });
}

}  // namespace segwave

#endif
