#include "mamppi/detect/detect.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace mamppi {

void DetectionThresholds::validate() const {
    require(theta_var >= 0.0, "DetectionThresholds: theta_var must be >= 0");
    require(theta_grad >= 0.0, "DetectionThresholds: theta_grad must be >= 0");
    require(theta_curv >= 1.0, "DetectionThresholds: theta_curv must be >= 1");
    require(theta_angle > 0.0, "DetectionThresholds: theta_angle must be > 0");
    require(window >= 2, "DetectionThresholds: window must be >= 2");
    require(cadence_grad >= 1 && cadence_curv >= 1,
            "DetectionThresholds: cadences must be >= 1");
    require(radius_scale > 0.0 && r_min > 0.0 && fd_step > 0.0,
            "DetectionThresholds: radius and step parameters must be > 0");
}

StateWindow::StateWindow(int capacity) : capacity_(capacity) {
    require(capacity >= 2, "StateWindow: capacity must be >= 2");
}

void StateWindow::push(const Vec& x) {
    states_.push_back(x);
    if (static_cast<int>(states_.size()) > capacity_) {
        states_.pop_front();
    }
}

void StateWindow::clear() { states_.clear(); }

Vec StateWindow::mean() const {
    require(!states_.empty(), "StateWindow: mean of empty window");
    Vec m = Vec::Zero(states_.front().size());
    for (const Vec& x : states_) {
        m += x;
    }
    return m / static_cast<double>(states_.size());
}

double state_variance(const StateWindow& window) {
    if (window.size() < 2) {
        throw std::invalid_argument("state_variance: window underfilled");
    }
    const Vec m = window.mean();
    double acc = 0.0;
    for (const Vec& x : window.states()) {
        acc += (x - m).squaredNorm();
    }
    return acc / static_cast<double>(window.size());
}

double window_spread(const StateWindow& window) { return std::sqrt(state_variance(window)); }

bool detect_stagnation(const StateWindow& window, double theta_var) {
    require(window.full(), "detect_stagnation: window must be full");
    return state_variance(window) < theta_var;
}

Vec numeric_gradient(const ValueFn& value, const Vec& x, double h) {
    require(h > 0.0, "numeric_gradient: h must be > 0");
    Vec g(x.size());
    Vec probe = x;
    for (int i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + h;
        const double fp = value(probe);
        probe[i] = x[i] - h;
        const double fm = value(probe);
        probe[i] = x[i];
        if (!std::isfinite(fp) || !std::isfinite(fm)) {
            throw std::runtime_error("numeric_gradient: non-finite evaluation");
        }
        g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
}

Mat numeric_hessian(const ValueFn& value, const Vec& x, double h) {
    require(h > 0.0, "numeric_hessian: h must be > 0");
    const int n = static_cast<int>(x.size());
    Mat H(n, n);
    const double f0 = value(x);
    Vec probe = x;
    for (int i = 0; i < n; ++i) {
        probe[i] = x[i] + h;
        const double fp = value(probe);
        probe[i] = x[i] - h;
        const double fm = value(probe);
        probe[i] = x[i];
        H(i, i) = (fp - 2.0 * f0 + fm) / (h * h);
        for (int j = i + 1; j < n; ++j) {
            probe[i] = x[i] + h;
            probe[j] = x[j] + h;
            const double fpp = value(probe);
            probe[j] = x[j] - h;
            const double fpm = value(probe);
            probe[i] = x[i] - h;
            probe[j] = x[j] + h;
            const double fmp = value(probe);
            probe[j] = x[j] - h;
            const double fmm = value(probe);
            probe[i] = x[i];
            probe[j] = x[j];
            H(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
            H(j, i) = H(i, j);
        }
    }
    if (!H.allFinite()) {
        throw std::runtime_error("numeric_hessian: non-finite evaluation");
    }
    return 0.5 * (H + H.transpose());
}

double gradient_angle_change(const Vec& g_now, const Vec& g_prev) {
    const double n1 = g_now.norm();
    const double n0 = g_prev.norm();
    if (n1 < 1e-300 || n0 < 1e-300) {
        throw std::invalid_argument("gradient_angle_change: undefined angle for zero vector");
    }
    const double c = std::clamp(g_now.dot(g_prev) / (n1 * n0), -1.0, 1.0);
    return std::acos(c);
}

double hessian_condition(const ValueFn& value, const Vec& x, double h) {
    const Mat H = numeric_hessian(value, x, h);
    Eigen::SelfAdjointEigenSolver<Mat> eig(H);
    require(eig.info() == Eigen::Success, "hessian_condition: eigensolver failed");
    const Vec lam = eig.eigenvalues().cwiseAbs();
    const double lo = lam.minCoeff();
    const double hi = lam.maxCoeff();
    if (lo < 1e-12) {
        return std::numeric_limits<double>::infinity();
    }
    return hi / lo;
}

namespace {

Vec direction_fallback(const Vec& gradient) {
    const double n = gradient.norm();
    if (n > 1e-12) {
        return -gradient / n;
    }
    Vec d = Vec::Zero(gradient.size());
    d[0] = 1.0;
    return d;
}

}  // namespace

std::optional<CandidateFeature> classify(const StateWindow& window,
                                         const std::optional<GradientSignal>& gradient_signal,
                                         const std::optional<double>& curvature_signal,
                                         const DetectionThresholds& thresholds,
                                         const std::optional<Vec>& goal) {
    if (window.size() < 2) {
        return std::nullopt;
    }
    const double radius =
        thresholds.radius_scale * std::max(window_spread(window), thresholds.r_min);
    const Vec current = window.states().back();

    if (window.full() && detect_stagnation(window, thresholds.theta_var)) {
        CandidateFeature c;
        c.position = window.mean();
        c.kind = 1;
        c.radius = radius;
        return c;
    }

    if (gradient_signal) {
        const Vec& g = gradient_signal->gradient;
        const bool near_goal =
            goal && (current - *goal).norm() < 2.0 * thresholds.r_min;
        if (g.norm() < thresholds.theta_grad && !near_goal) {
            CandidateFeature c;
            c.position = current;
            c.kind = 2;
            c.direction = direction_fallback(g);
            c.radius = radius;
            return c;
        }
        const bool sharp_turn = gradient_signal->angle_change &&
                                *gradient_signal->angle_change > thresholds.theta_angle;
        const bool ill_conditioned =
            curvature_signal && *curvature_signal > thresholds.theta_curv;
        if (sharp_turn || ill_conditioned) {
            CandidateFeature c;
            c.position = current;
            c.kind = 3;
            c.direction = direction_fallback(g);
            c.radius = radius;
            return c;
        }
    }
    return std::nullopt;
}

Vec escape_direction(const StateWindow& history, const Vec& m, double radius) {
    for (const Vec& x : history.states()) {
        const double d = (x - m).norm();
        if (d > radius) {
            return (x - m) / d;
        }
    }
    throw std::runtime_error("escape_direction: direction unavailable (no state outside radius)");
}

FeatureDetector::FeatureDetector(DetectionThresholds thresholds, ValueFn value,
                                 std::optional<Vec> goal)
    : thresholds_(thresholds), value_(std::move(value)), goal_(std::move(goal)),
      window_(thresholds.window) {
    thresholds_.validate();
}

void FeatureDetector::reset() {
    window_.clear();
    prev_gradient_.reset();
    step_ = 0;
    last_candidate_step_ = 0;
}

DetectionResult FeatureDetector::observe(const Vec& x) {
    window_.push(x);
    ++step_;

    DetectionResult result;
    result.stagnating = window_.full() && detect_stagnation(window_, thresholds_.theta_var);

    std::optional<GradientSignal> grad_signal;
    std::optional<double> curv_signal;
    if (step_ % thresholds_.cadence_grad == 0) {
        GradientSignal s;
        s.gradient = numeric_gradient(value_, x, thresholds_.fd_step);
        if (prev_gradient_ && s.gradient.norm() > 1e-12 && prev_gradient_->norm() > 1e-12) {
            s.angle_change = gradient_angle_change(s.gradient, *prev_gradient_);
        }
        prev_gradient_ = s.gradient;
        grad_signal = std::move(s);
    }
    if (step_ % thresholds_.cadence_curv == 0) {
        curv_signal = hessian_condition(value_, x, thresholds_.fd_step);
    }
    if (step_ - last_candidate_step_ >= thresholds_.window) {
        result.candidate = classify(window_, grad_signal, curv_signal, thresholds_, goal_);
        if (result.candidate) {
            last_candidate_step_ = step_;
        }
    }
    return result;
}

}  // namespace mamppi
