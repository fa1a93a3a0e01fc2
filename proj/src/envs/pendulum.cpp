#include "mamppi/envs/pendulum.hpp"

#include <cmath>

namespace mamppi {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double PendulumEnv::wrap_angle(double theta) {
    theta = std::fmod(theta + kPi, 2.0 * kPi);
    if (theta <= 0.0) {
        theta += 2.0 * kPi;
    }
    return theta - kPi;
}

State PendulumEnv::step(const State& x, const Control& u) const {
    const double theta = x[0];
    const double omega = x[1];
    const double torque = std::clamp(u[0], -p_.max_torque, p_.max_torque);
    const double accel = (p_.gravity / p_.length) * std::sin(theta) +
                         torque / (p_.mass * p_.length * p_.length) - p_.damping * omega;
    // Semi-implicit Euler: update omega first, then integrate theta with it.
    double omega_next = omega + p_.dt * accel;
    omega_next = std::clamp(omega_next, -p_.max_speed, p_.max_speed);
    const double theta_next = wrap_angle(theta + p_.dt * omega_next);
    State next(2);
    next << theta_next, omega_next;
    return next;
}

double PendulumEnv::stage_cost(const State& x, const Control& u) const {
    const double theta = wrap_angle(x[0]);
    return p_.w_angle * theta * theta + p_.w_velocity * x[1] * x[1] +
           p_.w_control * u[0] * u[0];
}

double PendulumEnv::terminal_cost(const State& x) const { return value_proxy(x); }

double PendulumEnv::value_proxy(const State& x) const {
    const double theta = wrap_angle(x[0]);
    return p_.w_angle * theta * theta + p_.w_velocity * x[1] * x[1];
}

double PendulumEnv::value_proxy_scale() const {
    return p_.w_angle * kPi * kPi + p_.w_velocity * 1.0;
}

std::optional<State> PendulumEnv::goal_state() const {
    State g(2);
    g << 0.0, 0.0;
    return g;
}

Vec PendulumEnv::to_feature(const State& x) const {
    Vec e(3);
    e << std::cos(x[0]), std::sin(x[0]), x[1] / p_.omega_feature_scale;
    return e;
}

double PendulumEnv::value_in_feature(const Vec& e) const {
    const double theta = std::atan2(e[1], e[0]);
    const double omega = e[2] * p_.omega_feature_scale;
    return p_.w_angle * theta * theta + p_.w_velocity * omega * omega;
}

std::optional<Vec> PendulumEnv::goal_feature() const {
    Vec e(3);
    e << 1.0, 0.0, 0.0;
    return e;
}

Vec PendulumEnv::control_lower() const {
    Vec lo(1);
    lo << -p_.max_torque;
    return lo;
}

Vec PendulumEnv::control_upper() const {
    Vec hi(1);
    hi << p_.max_torque;
    return hi;
}

State PendulumEnv::sample_initial(GaussianStream& stream) const {
    State x(2);
    x << (2.0 * stream.uniform() - 1.0) * kPi, (2.0 * stream.uniform() - 1.0);
    return x;
}

double PendulumEnv::energy(const State& x) const {
    const double ml2 = p_.mass * p_.length * p_.length;
    // Potential datum: theta measured with 0 upright, gravity pulls to pi.
    return 0.5 * ml2 * x[1] * x[1] + p_.mass * p_.gravity * p_.length * std::cos(x[0]);
}

}  // namespace mamppi
