#include "mamppi/envs/quadrotor.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mamppi/core/jsonio.hpp"

namespace mamppi {

using nlohmann::json;

Eigen::Matrix3d hat(const Eigen::Vector3d& w) {
    Eigen::Matrix3d m;
    m << 0.0, -w.z(), w.y(), w.z(), 0.0, -w.x(), -w.y(), w.x(), 0.0;
    return m;
}

QuadScenario QuadScenario::open_field() { return QuadScenario{}; }

QuadScenario QuadScenario::single_cylinder() {
    QuadScenario s;
    s.name = "single_cylinder";
    s.obstacles = {{3.0, 0.0, 0.8}};
    return s;
}

QuadScenario QuadScenario::cylinder_corridor() {
    QuadScenario s;
    s.name = "cylinder_corridor";
    s.obstacles = {{3.0, 1.2, 0.7}, {3.0, 2.0, 0.7}, {3.0, -1.2, 0.7}, {3.0, -2.0, 0.7}};
    return s;
}

QuadScenario QuadScenario::u_trap() {
    QuadScenario s;
    s.name = "u_trap";
    s.obstacles = {{4.5, -0.7, 0.5}, {4.5, 0.0, 0.5}, {4.5, 0.7, 0.5},
                   {3.3, 1.2, 0.5},  {3.9, 1.2, 0.5}, {3.3, -1.2, 0.5},
                   {3.9, -1.2, 0.5}};
    return s;
}

QuadScenario QuadScenario::slalom() {
    QuadScenario s;
    s.name = "slalom";
    s.obstacles = {{2.0, 0.8, 0.6}, {3.5, -0.8, 0.6}, {5.0, 0.8, 0.6}};
    s.goal = {7.0, 0.0, 2.0};
    return s;
}

QuadScenario QuadScenario::by_name(const std::string& name) {
    if (name == "open_field") return open_field();
    if (name == "single_cylinder") return single_cylinder();
    if (name == "cylinder_corridor") return cylinder_corridor();
    if (name == "u_trap") return u_trap();
    if (name == "slalom") return slalom();
    throw std::invalid_argument("unknown quad scenario '" + name + "'");
}

std::string QuadScenario::to_json_text() const {
    json doc;
    doc["name"] = name;
    json obs = json::array();
    for (const auto& c : obstacles) {
        obs.push_back({{"x", c.x}, {"y", c.y}, {"r", c.r}});
    }
    doc["obstacles"] = std::move(obs);
    doc["goal"] = {goal.x(), goal.y(), goal.z()};
    doc["start"] = {start.x(), start.y(), start.z()};
    return doc.dump(2);
}

QuadScenario QuadScenario::from_json_text(const std::string& text) {
    const json doc = json::parse(text);
    check_keys(doc, {"name", "obstacles", "goal", "start"}, "quad scenario");
    QuadScenario s;
    s.name = doc.at("name").get<std::string>();
    for (const auto& jo : doc.at("obstacles")) {
        check_keys(jo, {"x", "y", "r"}, "quad scenario obstacle");
        s.obstacles.push_back({jo.at("x").get<double>(), jo.at("y").get<double>(),
                               jo.at("r").get<double>()});
    }
    const auto& g = doc.at("goal");
    s.goal = {g[0].get<double>(), g[1].get<double>(), g[2].get<double>()};
    const auto& st = doc.at("start");
    s.start = {st[0].get<double>(), st[1].get<double>(), st[2].get<double>()};
    return s;
}

QuadScenario QuadScenario::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "QuadScenario::load: cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

void QuadScenario::save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "QuadScenario::save: cannot open file");
    out << to_json_text();
}

QuadrotorEnv::QuadrotorEnv(QuadScenario scenario, Params p)
    : scenario_(std::move(scenario)), p_(p) {
    const State start = make_state(scenario_.start, Eigen::Vector3d::Zero(),
                                   Eigen::Matrix3d::Identity(), Eigen::Vector3d::Zero());
    proxy_scale_ = std::max(1e-6, value_proxy(start));
}

State QuadrotorEnv::make_state(const Eigen::Vector3d& p, const Eigen::Vector3d& v,
                               const Eigen::Matrix3d& R, const Eigen::Vector3d& omega) {
    State x(18);
    x.segment<3>(0) = p;
    x.segment<3>(3) = v;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            x[6 + 3 * i + j] = R(i, j);
        }
    }
    x.segment<3>(15) = omega;
    return x;
}

Eigen::Matrix3d QuadrotorEnv::rotation_of(const State& x) {
    Eigen::Matrix3d R;
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            R(i, j) = x[6 + 3 * i + j];
        }
    }
    return R;
}

Vec QuadrotorEnv::derivative(const Vec& x, double f, const Eigen::Vector3d& tau) const {
    const Eigen::Vector3d v = x.segment<3>(3);
    const Eigen::Matrix3d R = rotation_of(x);
    const Eigen::Vector3d omega = x.segment<3>(15);
    const Eigen::Vector3d gravity(0.0, 0.0, -p_.gravity);
    const Eigen::Vector3d thrust_body(0.0, 0.0, f);

    Vec dx(18);
    dx.segment<3>(0) = v;
    dx.segment<3>(3) = gravity + (R * thrust_body) / p_.mass - p_.drag * v.norm() * v;
    const Eigen::Matrix3d Rdot = R * hat(omega);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            dx[6 + 3 * i + j] = Rdot(i, j);
        }
    }
    const Eigen::Vector3d J = p_.inertia;
    const Eigen::Vector3d Jw(J.x() * omega.x(), J.y() * omega.y(), J.z() * omega.z());
    const Eigen::Vector3d wdot_num = tau - omega.cross(Jw);
    dx.segment<3>(15) =
        Eigen::Vector3d(wdot_num.x() / J.x(), wdot_num.y() / J.y(), wdot_num.z() / J.z());
    return dx;
}

State QuadrotorEnv::step(const State& x, const Control& u) const {
    const double f = std::clamp(u[0], 0.0, p_.f_max);
    const Eigen::Vector3d tau(std::clamp(u[1], -p_.tau_max, p_.tau_max),
                              std::clamp(u[2], -p_.tau_max, p_.tau_max),
                              std::clamp(u[3], -p_.tau_max, p_.tau_max));
    const double h = p_.dt;
    const Vec k1 = derivative(x, f, tau);
    const Vec k2 = derivative(x + 0.5 * h * k1, f, tau);
    const Vec k3 = derivative(x + 0.5 * h * k2, f, tau);
    const Vec k4 = derivative(x + h * k3, f, tau);
    State next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    // Polar projection of the integrated rotation back onto SO(3).
    const Eigen::Matrix3d R = rotation_of(next);
    Eigen::JacobiSVD<Eigen::Matrix3d> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Eigen::Matrix3d ortho = svd.matrixU() * svd.matrixV().transpose();
    if (ortho.determinant() < 0.0) {
        Eigen::Matrix3d flip = Eigen::Matrix3d::Identity();
        flip(2, 2) = -1.0;
        ortho = svd.matrixU() * flip * svd.matrixV().transpose();
    }
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            next[6 + 3 * i + j] = ortho(i, j);
        }
    }
    return next;
}

double QuadrotorEnv::obstacle_penalty(double px, double py) const {
    double total = 0.0;
    for (const auto& c : scenario_.obstacles) {
        const double reach = c.r + p_.inflation;
        const double dist = std::hypot(px - c.x, py - c.y);
        if (dist < reach) {
            const double q = 1.0 - dist / reach;
            total += p_.w_obstacle * q * q;
        }
    }
    return total;
}

double QuadrotorEnv::stage_cost(const State& x, const Control& u) const {
    const Eigen::Vector3d p = x.segment<3>(0);
    const Eigen::Vector3d v = x.segment<3>(3);
    const Eigen::Matrix3d R = rotation_of(x);
    const double attitude = 3.0 - R.trace();  // 0 at upright
    return p_.w_goal * (p - scenario_.goal).squaredNorm() + obstacle_penalty(p.x(), p.y()) +
           p_.w_velocity * v.squaredNorm() + p_.w_attitude * attitude +
           p_.w_thrust * u[0] * u[0] +
           p_.w_torque * (u[1] * u[1] + u[2] * u[2] + u[3] * u[3]);
}

double QuadrotorEnv::terminal_cost(const State& x) const { return value_proxy(x); }

double QuadrotorEnv::value_proxy(const State& x) const {
    const Eigen::Vector3d p = x.segment<3>(0);
    return p_.w_goal * (p - scenario_.goal).squaredNorm() + obstacle_penalty(p.x(), p.y());
}

std::optional<State> QuadrotorEnv::goal_state() const {
    return make_state(scenario_.goal, Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity(),
                      Eigen::Vector3d::Zero());
}

double QuadrotorEnv::value_in_feature(const Vec& e) const {
    const Eigen::Vector3d p = e.head<3>();
    return p_.w_goal * (p - scenario_.goal).squaredNorm() + obstacle_penalty(p.x(), p.y());
}

std::optional<Vec> QuadrotorEnv::goal_feature() const {
    Vec g = Vec::Zero(6);
    g.head<3>() = scenario_.goal;
    return g;
}

Vec QuadrotorEnv::control_lower() const {
    Vec lo(4);
    lo << 0.0, -p_.tau_max, -p_.tau_max, -p_.tau_max;
    return lo;
}

Vec QuadrotorEnv::control_upper() const {
    Vec hi(4);
    hi << p_.f_max, p_.tau_max, p_.tau_max, p_.tau_max;
    return hi;
}

Control QuadrotorEnv::nominal_control() const {
    Control u = Control::Zero(4);
    u[0] = p_.mass * p_.gravity;  // hover feedforward
    return u;
}

State QuadrotorEnv::sample_initial(GaussianStream& stream) const {
    Eigen::Vector3d p = scenario_.start;
    p.x() += (2.0 * stream.uniform() - 1.0) * 0.5;
    p.y() += (2.0 * stream.uniform() - 1.0) * 0.5;
    return make_state(p, Eigen::Vector3d::Zero(), Eigen::Matrix3d::Identity(),
                      Eigen::Vector3d::Zero());
}

bool QuadrotorEnv::collides(const State& x) const {
    for (const auto& c : scenario_.obstacles) {
        if (std::hypot(x[0] - c.x, x[1] - c.y) < c.r) {
            return true;
        }
    }
    return false;
}

Eigen::Vector3d QuadrotorEnv::angular_momentum(const State& x) const {
    const Eigen::Matrix3d R = rotation_of(x);
    const Eigen::Vector3d omega = x.segment<3>(15);
    const Eigen::Vector3d Jw(p_.inertia.x() * omega.x(), p_.inertia.y() * omega.y(),
                             p_.inertia.z() * omega.z());
    return R * Jw;
}

}  // namespace mamppi
