#pragma once
#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ryd::num {

// Least-squares polynomial fit, coeffs[k] multiplies x^k. The fit is done in
// a scaled variable for conditioning and mapped back to plain coefficients.
Eigen::VectorXd polyfit(const Eigen::VectorXd& x, const Eigen::VectorXd& y, int order);

inline double polyval(const Eigen::VectorXd& c, double x) {
    double acc = 0.0;
    for (int k = int(c.size()) - 1; k >= 0; --k) acc = acc * x + c[k];
    return acc;
}

inline Eigen::VectorXd polyder(const Eigen::VectorXd& c) {
    if (c.size() <= 1) return Eigen::VectorXd::Zero(1);
    Eigen::VectorXd d(c.size() - 1);
    for (int k = 1; k < c.size(); ++k) d[k - 1] = k * c[k];
    return d;
}

// Brent root bracketing solver.
double brent_root(const std::function<double(double)>& f, double a, double b,
                  double xtol, int max_iter = 200);

// Bisection on a monotone-ish function for f(x)=target, relative x tolerance.
double bisect_to(const std::function<double(double)>& f, double target,
                 double lo, double hi, double rel_xtol, int max_iter = 100);

// Adaptive Simpson quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

// Trapezoid on sampled data.
inline double trapezoid(const std::vector<double>& t, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        s += 0.5 * (y[i] + y[i - 1]) * (t[i] - t[i - 1]);
    return s;
}

// Dominant spectral peak of a uniformly sampled series inside [f_lo, f_hi],
// using a Hann-windowed periodogram refined by quadratic interpolation on
// log-power. Returns the peak frequency in the same units as 1/dt.
struct PeakResult {
    double frequency = 0.0;
    double power = 0.0;
    bool found = false;
};
PeakResult dominant_peak(const std::vector<double>& samples, double dt,
                         double f_lo, double f_hi);

// Dormand-Prince RK45 with PI step control. The observer is called at every
// accepted sample time on a fixed recording stride; integration halts early
// if `stop` returns true (recorded as stop_time).
struct OdeResult {
    bool stopped = false;       // stop predicate fired
    double stop_time = 0.0;
    bool stiff = false;         // step size underflow
};

class StepSizeUnderflow : public std::runtime_error {
public:
    explicit StepSizeUnderflow(const std::string& what) : std::runtime_error(what) {}
};

using OdeRhs = std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)>;
using OdeObserver = std::function<void(double, const Eigen::VectorXd&)>;
using OdeStop = std::function<bool(double, const Eigen::VectorXd&)>;

OdeResult integrate_rk45(const OdeRhs& rhs, Eigen::VectorXd& y, double t0, double t1,
                         double record_dt, const OdeObserver& observe,
                         const OdeStop& stop, double rel_tol, double abs_tol,
                         const Eigen::VectorXd* abs_tol_per_component = nullptr);

} // namespace ryd::num
