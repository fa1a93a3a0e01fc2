#pragma once

#include <string>
#include <vector>

#include "mamppi/envs/environment.hpp"

namespace mamppi {

struct Disc {
    double x = 0.0, y = 0.0, r = 1.0;
};

/// Obstacle layout plus task geometry for the planar navigation benchmark.
struct NavScenario {
    std::string name = "open_field";
    std::vector<Disc> obstacles;
    Eigen::Vector2d goal{8.0, 0.0};
    Eigen::Vector2d start_center{0.0, 0.0};
    double start_halfwidth = 1.0;
    std::optional<Vec> trap_probe;  // full (px, py, vx, vy) probe state

    static NavScenario open_field();
    static NavScenario single_disc();
    static NavScenario corridor();
    static NavScenario u_trap();
    static NavScenario slalom();
    static NavScenario by_name(const std::string& name);

    std::string to_json_text() const;
    static NavScenario from_json_text(const std::string& text);
    static NavScenario load(const std::string& path);
    void save(const std::string& path) const;
};

/// Double-integrator point mass in the plane with disc obstacles realized as
/// soft quadratic-hinge penalties. The U-trap layout produces a genuine local
/// minimum of the cost in front of the blocked passage.
class PointMassNavEnv : public Environment {
  public:
    struct Params {
        double dt = 0.1;
        double v_max = 2.0;
        double a_max = 3.0;
        double w_goal = 0.5;
        double w_obstacle = 8.0;
        double w_control = 0.05;
        double w_velocity = 0.02;
        double inflation = 0.8;  // penalty reach beyond the obstacle core
    };

    explicit PointMassNavEnv(NavScenario scenario = NavScenario::u_trap(), Params p = Params{});

    std::string name() const override { return "pointmass_nav"; }
    int state_dim() const override { return 4; }  // px, py, vx, vy
    int control_dim() const override { return 2; }
    double dt() const override { return p_.dt; }
    State step(const State& x, const Control& u) const override;
    double stage_cost(const State& x, const Control& u) const override;
    double terminal_cost(const State& x) const override;

    double characteristic_scale() const override { return 10.0; }
    double value_proxy(const State& x) const override;
    double value_proxy_scale() const override { return proxy_scale_; }
    std::optional<State> goal_state() const override;

    std::optional<Mat> control_direction_map() const override;

    Vec control_lower() const override;
    Vec control_upper() const override;
    State sample_initial(GaussianStream& stream) const override;
    bool collides(const State& x) const override;

    double obstacle_penalty(double px, double py) const;
    const NavScenario& scenario() const { return scenario_; }
    const Params& params() const { return p_; }

  private:
    NavScenario scenario_;
    Params p_;
    double proxy_scale_ = 1.0;
};

}  // namespace mamppi
