#include "ryd/numeric.hpp"

#include <algorithm>
#include <limits>

namespace ryd::num {

Eigen::VectorXd polyfit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int order) {
    if (x.size() != y.size() || x.size() < order + 1)
        throw std::invalid_argument("polyfit: need at least order+1 samples");
    const double x0 = x.mean();
    const double sc = std::max(1e-300, (x.maxCoeff() - x.minCoeff()) / 2.0);
    Eigen::MatrixXd V(x.size(), order + 1);
    for (int i = 0; i < x.size(); ++i) {
        const double u = (x[i] - x0) / sc;
        double p = 1.0;
        for (int k = 0; k <= order; ++k) { V(i, k) = p; p *= u; }
    }
    Eigen::VectorXd cu = V.colPivHouseholderQr().solve(y);
    // expand cu, given in powers of (x-x0)/sc, back to plain powers of x
    Eigen::VectorXd c = Eigen::VectorXd::Zero(order + 1);
    std::vector<double> poly{1.0}; // ((x-x0)/sc)^0
    for (int k = 0; k <= order; ++k) {
        for (std::size_t j = 0; j < poly.size(); ++j) c[int(j)] += cu[k] * poly[j];
        // poly *= (x - x0)/sc
        std::vector<double> nxt(poly.size() + 1, 0.0);
        for (std::size_t j = 0; j < poly.size(); ++j) {
            nxt[j + 1] += poly[j] / sc;
            nxt[j] += poly[j] * (-x0 / sc);
        }
        poly.swap(nxt);
    }
    return c;
}

double brent_root(const std::function<double(double)>& f, double a, double b,
                  double xtol, int max_iter) {
    double fa = f(a), fb = f(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if (fa * fb > 0.0) throw std::runtime_error("brent_root: root not bracketed");
    double c = a, fc = fa, d = b - a, e = d;
    for (int it = 0; it < max_iter; ++it) {
        if (std::abs(fc) < std::abs(fb)) {
            a = b; b = c; c = a;
            fa = fb; fb = fc; fc = fa;
        }
        const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::abs(b) + 0.5 * xtol;
        const double xm = 0.5 * (c - b);
        if (std::abs(xm) <= tol1 || fb == 0.0) return b;
        if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
            double p, q, r;
            const double s = fb / fa;
            if (a == c) {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                q = fa / fc; r = fb / fc;
                p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
                q = (q - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if (p > 0.0) q = -q;
            p = std::abs(p);
            if (2.0 * p < std::min(3.0 * xm * q - std::abs(tol1 * q), std::abs(e * q))) {
                e = d; d = p / q;
            } else {
                d = xm; e = d;
            }
        } else {
            d = xm; e = d;
        }
        a = b; fa = fb;
        b += (std::abs(d) > tol1) ? d : (xm > 0 ? tol1 : -tol1);
        fb = f(b);
        if ((fb > 0) == (fc > 0)) { c = a; fc = fa; d = b - a; e = d; }
    }
    return b;
}

double bisect_to(const std::function<double(double)>& f, double target,
                 double lo, double hi, double rel_xtol, int max_iter) {
    double flo = f(lo) - target;
    double fhi = f(hi) - target;
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0)
        throw std::runtime_error("bisect_to: target not bracketed (f(lo)-target=" +
                                 std::to_string(flo) + ", f(hi)-target=" + std::to_string(fhi) + ")");
    for (int it = 0; it < max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((hi - lo) <= rel_xtol * std::abs(mid)) return mid;
        const double fm = f(mid) - target;
        if (fm == 0.0) return mid;
        if ((fm > 0) == (flo > 0)) { lo = mid; flo = fm; } else { hi = mid; fhi = fm; }
    }
    return 0.5 * (lo + hi);
}

namespace {
double simpson_segment(const std::function<double(double)>& f, double a, double fa,
                       double b, double fb, double fm, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
    return simpson_segment(f, a, fa, m, fm, flm, left, tol / 2.0, depth - 1) +
           simpson_segment(f, m, fm, b, fb, frm, right, tol / 2.0, depth - 1);
}
} // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return simpson_segment(f, a, fa, b, fb, fm, whole, tol, max_depth);
}

PeakResult dominant_peak(const std::vector<double>& samples, double dt,
                         double f_lo, double f_hi) {
    PeakResult out;
    const std::size_t n = samples.size();
    if (n < 16) return out;
    const double mean = [&] {
        double s = 0.0;
        for (double v : samples) s += v;
        return s / double(n);
    }();
    const double span = double(n) * dt;
    const int k_lo = std::max(1, int(std::floor(f_lo * span)));
    const int k_hi = std::min(int(n / 2) - 1, int(std::ceil(f_hi * span)));
    if (k_hi <= k_lo) return out;

    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.5 * (1.0 - std::cos(2.0 * 3.14159265358979324 * double(i) / double(n - 1)));

    auto power_at = [&](int k) {
        const double omega = 2.0 * 3.14159265358979324 * double(k) / double(n);
        // Goertzel
        const double coeff = 2.0 * std::cos(omega);
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            s0 = w[i] * (samples[i] - mean) + coeff * s1 - s2;
            s2 = s1; s1 = s0;
        }
        return s1 * s1 + s2 * s2 - coeff * s1 * s2;
    };

    int k_best = k_lo;
    double p_best = -1.0;
    std::vector<double> pw(k_hi - k_lo + 1);
    for (int k = k_lo; k <= k_hi; ++k) {
        pw[k - k_lo] = power_at(k);
        if (pw[k - k_lo] > p_best) { p_best = pw[k - k_lo]; k_best = k; }
    }
    if (p_best <= 0.0) return out;
    out.found = true;
    out.power = p_best;
    double delta = 0.0;
    if (k_best > k_lo && k_best < k_hi) {
        const double lp = std::log(std::max(pw[k_best - 1 - k_lo], 1e-300));
        const double cp = std::log(std::max(pw[k_best - k_lo], 1e-300));
        const double rp = std::log(std::max(pw[k_best + 1 - k_lo], 1e-300));
        const double den = lp - 2.0 * cp + rp;
        if (den < 0.0) delta = 0.5 * (lp - rp) / den;
        delta = std::clamp(delta, -0.5, 0.5);
    }
    out.frequency = (double(k_best) + delta) / span;
    return out;
}

OdeResult integrate_rk45(const OdeRhs& rhs, Eigen::VectorXd& y, double t0, double t1,
                         double record_dt, const OdeObserver& observe,
                         const OdeStop& stop, double rel_tol, double abs_tol,
                         const Eigen::VectorXd* abs_tol_per_component) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                        e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

    OdeResult result;
    const int n = int(y.size());
    Eigen::VectorXd k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), yerr(n), ynew(n);

    double t = t0;
    double next_record = t0;
    double h = record_dt > 0 ? record_dt / 4.0 : (t1 - t0) / 1000.0;
    const double h_min = (t1 - t0) * 1e-14;

    rhs(t, y, k1);
    if (record_dt > 0) { observe(t, y); next_record = t0 + record_dt; }

    while (t < t1) {
        if (t1 - t <= h_min) break; // fully integrated up to roundoff
        double h_cap = t1 - t;
        if (record_dt > 0) h_cap = std::min(h_cap, next_record - t);
        if (h > h_cap) h = h_cap;
        if (h < h_min && h_cap > 2.0 * h_min)
            throw StepSizeUnderflow("rk45: step size underflow at t=" + std::to_string(t));

        ytmp = y + h * a21 * k1;
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);
        yerr = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            const double at = abs_tol_per_component ? (*abs_tol_per_component)[i] : abs_tol;
            const double sc = at + rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
            const double r = yerr[i] / sc;
            err += r * r;
        }
        err = std::sqrt(err / n);

        if (err <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7); // FSAL
            if (record_dt > 0 && t >= next_record - 1e-12 * record_dt) {
                observe(t, y);
                next_record += record_dt;
            }
            if (stop && stop(t, y)) {
                result.stopped = true;
                result.stop_time = t;
                return result;
            }
        }
        const double fac = (err > 0.0) ? 0.9 * std::pow(err, -0.2) : 5.0;
        h *= std::clamp(fac, 0.2, 5.0);
    }
    return result;
}

} // namespace ryd::num
