#pragma once

#include "mamppi/envs/environment.hpp"

namespace mamppi {

/// Torque-limited pendulum swing-up. State (theta, omega) with theta wrapped
/// to (-pi, pi] and theta = 0 upright; the usual benchmark parameters.
class PendulumEnv : public Environment {
  public:
    struct Params {
        double mass = 1.0;
        double length = 1.0;
        double gravity = 10.0;
        double max_torque = 2.0;
        double max_speed = 8.0;
        double damping = 0.0;
        double dt = 0.05;
        double w_angle = 1.0;
        double w_velocity = 0.1;
        double w_control = 0.001;
        double omega_feature_scale = 4.0;  // omega / this in the embedding
    };

    PendulumEnv() : PendulumEnv(Params{}) {}
    explicit PendulumEnv(Params p) : p_(p) {}

    std::string name() const override { return "pendulum"; }
    int state_dim() const override { return 2; }
    int control_dim() const override { return 1; }
    double dt() const override { return p_.dt; }
    State step(const State& x, const Control& u) const override;
    double stage_cost(const State& x, const Control& u) const override;
    double terminal_cost(const State& x) const override;

    double value_proxy(const State& x) const override;
    double value_proxy_scale() const override;
    std::optional<State> goal_state() const override;

    // Memory features live on (cos theta, sin theta, omega/scale) so the
    // hanging region is a single point rather than a wrap seam.
    int feature_dim() const override { return 3; }
    Vec to_feature(const State& x) const override;
    double value_in_feature(const Vec& e) const override;
    std::optional<Vec> goal_feature() const override;

    Vec control_lower() const override;
    Vec control_upper() const override;
    State sample_initial(GaussianStream& stream) const override;

    const Params& params() const { return p_; }

    /// Total mechanical energy (kinetic + potential, zero datum at pivot).
    double energy(const State& x) const;

    static double wrap_angle(double theta);

  private:
    Params p_;
};

}  // namespace mamppi
