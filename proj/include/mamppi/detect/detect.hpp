#pragma once

#include <deque>
#include <functional>
#include <optional>

#include "mamppi/core/types.hpp"

namespace mamppi {

using ValueFn = std::function<double(const Vec&)>;

struct DetectionThresholds {
    double theta_var = 0.01;    // stagnation: window variance bound
    double theta_grad = 0.01;   // plateau: gradient norm bound
    double theta_curv = 8.0;    // high-curvature: Hessian condition bound (>= 1)
    double theta_angle = 1.0;   // high-curvature: gradient direction change [rad]
    int window = 20;            // K_w
    int cadence_grad = 5;       // steps between gradient checks
    int cadence_curv = 20;      // steps between curvature checks
    double radius_scale = 2.5;  // kappa_r: suggested radius per window spread
    double r_min = 0.05;        // radius floor (in units of the feature space)
    double fd_step = 1e-4;      // finite-difference step

    void validate() const;
};

/// Ring buffer of the most recent K_w feature-space states.
class StateWindow {
  public:
    explicit StateWindow(int capacity);

    void push(const Vec& x);
    void clear();
    bool full() const { return static_cast<int>(states_.size()) == capacity_; }
    int size() const { return static_cast<int>(states_.size()); }
    int capacity() const { return capacity_; }
    const std::deque<Vec>& states() const { return states_; }

    Vec mean() const;

  private:
    int capacity_;
    std::deque<Vec> states_;
};

/// Mean squared deviation from the window mean. Requires >= 2 states.
double state_variance(const StateWindow& window);

/// RMS deviation from the window mean (sqrt of state_variance).
double window_spread(const StateWindow& window);

/// True iff the window is full and its variance is strictly below theta_var.
bool detect_stagnation(const StateWindow& window, double theta_var);

/// Central finite differences of a scalar field.
Vec numeric_gradient(const ValueFn& value, const Vec& x, double h);

/// Central-difference Hessian, symmetrized as (H + H^T)/2.
Mat numeric_hessian(const ValueFn& value, const Vec& x, double h);

/// Angle between consecutive gradients, in [0, pi]. Throws on zero vectors.
double gradient_angle_change(const Vec& g_now, const Vec& g_prev);

/// Ratio of largest to smallest absolute Hessian eigenvalue; +inf sentinel
/// when the smallest is below 1e-12.
double hessian_condition(const ValueFn& value, const Vec& x, double h);

struct GradientSignal {
    Vec gradient;
    std::optional<double> angle_change;
};

struct CandidateFeature {
    Vec position;
    int kind = 1;  // 1 local minimum, 2 low-gradient, 3 high-curvature
    std::optional<Vec> direction;
    double radius = 0.0;
};

/// Priority classification: stagnation -> kind 1 at the window mean; else a
/// small gradient away from the goal -> kind 2; else direction change or
/// condition number over threshold -> kind 3; else none. Kinds 2/3 carry a
/// direction (|grad| fallback: first axis).
std::optional<CandidateFeature> classify(const StateWindow& window,
                                         const std::optional<GradientSignal>& gradient_signal,
                                         const std::optional<double>& curvature_signal,
                                         const DetectionThresholds& thresholds,
                                         const std::optional<Vec>& goal = std::nullopt);

/// Normalized displacement from m to the first window state outside radius.
/// Throws if no such state was recorded yet.
Vec escape_direction(const StateWindow& history, const Vec& m, double radius);

struct DetectionResult {
    bool stagnating = false;
    std::optional<CandidateFeature> candidate;
};

/// Stateful per-controller detector: maintains the window, gradient history
/// and check cadences, and emits candidates as the run evolves.
class FeatureDetector {
  public:
    FeatureDetector(DetectionThresholds thresholds, ValueFn value,
                    std::optional<Vec> goal = std::nullopt);

    DetectionResult observe(const Vec& x);
    void reset();

    const StateWindow& window() const { return window_; }
    const DetectionThresholds& thresholds() const { return thresholds_; }

  private:
    DetectionThresholds thresholds_;
    ValueFn value_;
    std::optional<Vec> goal_;
    StateWindow window_;
    std::optional<Vec> prev_gradient_;
    long step_ = 0;
    long last_candidate_step_ = 0;  // refractory: at most one candidate per window span
};

}  // namespace mamppi
