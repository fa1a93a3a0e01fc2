#pragma once

#include <string>
#include <vector>

#include "mamppi/envs/environment.hpp"

namespace mamppi {

/// Skew-symmetric matrix of omega: hat(w) * x == w cross x.
Eigen::Matrix3d hat(const Eigen::Vector3d& omega);

struct Cylinder {
    double x = 0.0, y = 0.0, r = 1.0;  // vertical, infinite extent
};

struct QuadScenario {
    std::string name = "open_field";
    std::vector<Cylinder> obstacles;
    Eigen::Vector3d goal{6.0, 0.0, 2.0};
    Eigen::Vector3d start{0.0, 0.0, 2.0};

    static QuadScenario open_field();
    static QuadScenario single_cylinder();
    static QuadScenario cylinder_corridor();
    static QuadScenario u_trap();
    static QuadScenario slalom();
    static QuadScenario by_name(const std::string& name);

    std::string to_json_text() const;
    static QuadScenario from_json_text(const std::string& text);
    static QuadScenario load(const std::string& path);
    void save(const std::string& path) const;
};

/// Rigid-body quadrotor with quadratic drag, RK4-integrated on
/// (p, v, R, omega); R re-orthonormalized by polar projection each step.
/// State layout: p(3), v(3), R row-major(9), omega(3) -> 18. Control:
/// (thrust f, torque tau) -> 4.
class QuadrotorEnv : public Environment {
  public:
    struct Params {
        double mass = 1.5;
        Eigen::Vector3d inertia{0.0125, 0.0125, 0.0225};
        double drag = 0.1;
        double gravity = 9.81;
        double f_max = 30.0;
        double tau_max = 0.5;
        double dt = 0.02;
        double w_goal = 1.0;
        double w_obstacle = 8.0;
        double w_velocity = 0.05;
        double w_thrust = 1e-4;
        double w_torque = 0.1;
        double w_attitude = 2.0;
        double inflation = 0.8;
    };

    explicit QuadrotorEnv(QuadScenario scenario = QuadScenario::open_field(),
                          Params p = Params{});

    std::string name() const override { return "quadrotor"; }
    int state_dim() const override { return 18; }
    int control_dim() const override { return 4; }
    double dt() const override { return p_.dt; }
    State step(const State& x, const Control& u) const override;
    double stage_cost(const State& x, const Control& u) const override;
    double terminal_cost(const State& x) const override;

    double characteristic_scale() const override { return 10.0; }
    double value_proxy(const State& x) const override;
    double value_proxy_scale() const override { return proxy_scale_; }
    std::optional<State> goal_state() const override;

    // Memory features live on (p, v): traps here are spatial.
    int feature_dim() const override { return 6; }
    Vec to_feature(const State& x) const override { return x.head<6>(); }
    double value_in_feature(const Vec& e) const override;
    std::optional<Vec> goal_feature() const override;

    Vec control_lower() const override;
    Vec control_upper() const override;
    Control nominal_control() const override;
    State sample_initial(GaussianStream& stream) const override;
    bool collides(const State& x) const override;

    static State make_state(const Eigen::Vector3d& p, const Eigen::Vector3d& v,
                            const Eigen::Matrix3d& R, const Eigen::Vector3d& omega);
    static Eigen::Matrix3d rotation_of(const State& x);

    /// World-frame angular momentum R * J * omega.
    Eigen::Vector3d angular_momentum(const State& x) const;

    double obstacle_penalty(double px, double py) const;
    const Params& params() const { return p_; }
    const QuadScenario& scenario() const { return scenario_; }

  private:
    Vec derivative(const Vec& x, double f, const Eigen::Vector3d& tau) const;

    QuadScenario scenario_;
    Params p_;
    double proxy_scale_ = 1.0;
};

}  // namespace mamppi
