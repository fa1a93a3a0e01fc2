#include "mamppi/envs/pointmass_nav.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "mamppi/core/jsonio.hpp"

namespace mamppi {

using nlohmann::json;

NavScenario NavScenario::open_field() {
    NavScenario s;
    s.name = "open_field";
    return s;
}

NavScenario NavScenario::single_disc() {
    NavScenario s;
    s.name = "single_disc";
    s.obstacles = {{4.0, 0.0, 0.8}};
    return s;
}

NavScenario NavScenario::corridor() {
    NavScenario s;
    s.name = "corridor";
    s.obstacles = {{4.0, 1.3, 0.7},  {4.0, 2.1, 0.7},  {4.0, 2.9, 0.7},
                   {4.0, -1.3, 0.7}, {4.0, -2.1, 0.7}, {4.0, -2.9, 0.7}};
    return s;
}

NavScenario NavScenario::u_trap() {
    NavScenario s;
    s.name = "u_trap";
    // Three wall segments built from discs: back wall plus two arms opening
    // toward the start, so the greedy path into the mouth dead-ends.
    s.obstacles = {{6.0, -0.8, 0.6}, {6.0, 0.0, 0.6}, {6.0, 0.8, 0.6},
                   {4.4, 1.4, 0.6},  {5.2, 1.4, 0.6}, {6.0, 1.4, 0.6},
                   {4.4, -1.4, 0.6}, {5.2, -1.4, 0.6}, {6.0, -1.4, 0.6}};
    Vec probe(4);
    probe << 4.2, 0.0, 0.0, 0.0;
    s.trap_probe = probe;
    return s;
}

NavScenario NavScenario::slalom() {
    NavScenario s;
    s.name = "slalom";
    s.obstacles = {{2.5, 0.9, 0.7}, {4.5, -0.9, 0.7}, {6.5, 0.9, 0.7}};
    s.goal = {9.0, 0.0};
    return s;
}

NavScenario NavScenario::by_name(const std::string& name) {
    if (name == "open_field") return open_field();
    if (name == "single_disc") return single_disc();
    if (name == "corridor") return corridor();
    if (name == "u_trap") return u_trap();
    if (name == "slalom") return slalom();
    throw std::invalid_argument("unknown nav scenario '" + name + "'");
}

std::string NavScenario::to_json_text() const {
    json doc;
    doc["name"] = name;
    json obs = json::array();
    for (const auto& d : obstacles) {
        obs.push_back({{"x", d.x}, {"y", d.y}, {"r", d.r}});
    }
    doc["obstacles"] = std::move(obs);
    doc["goal"] = {goal.x(), goal.y()};
    doc["start_center"] = {start_center.x(), start_center.y()};
    doc["start_halfwidth"] = start_halfwidth;
    if (trap_probe) {
        doc["trap_probe"] = vec_to_json(*trap_probe);
    }
    return doc.dump(2);
}

NavScenario NavScenario::from_json_text(const std::string& text) {
    const json doc = json::parse(text);
    check_keys(doc, {"name", "obstacles", "goal", "start_center", "start_halfwidth",
                     "trap_probe"},
               "scenario");
    NavScenario s;
    s.name = doc.at("name").get<std::string>();
    for (const auto& jo : doc.at("obstacles")) {
        check_keys(jo, {"x", "y", "r"}, "scenario obstacle");
        s.obstacles.push_back({jo.at("x").get<double>(), jo.at("y").get<double>(),
                               jo.at("r").get<double>()});
    }
    s.goal = {doc.at("goal")[0].get<double>(), doc.at("goal")[1].get<double>()};
    if (doc.contains("start_center")) {
        s.start_center = {doc["start_center"][0].get<double>(),
                          doc["start_center"][1].get<double>()};
    }
    if (doc.contains("start_halfwidth")) {
        s.start_halfwidth = doc["start_halfwidth"].get<double>();
    }
    if (doc.contains("trap_probe")) {
        s.trap_probe = vec_from_json(doc["trap_probe"]);
    }
    return s;
}

NavScenario NavScenario::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), "NavScenario::load: cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

void NavScenario::save(const std::string& path) const {
    std::ofstream out(path);
    require(out.good(), "NavScenario::save: cannot open file");
    out << to_json_text();
}

PointMassNavEnv::PointMassNavEnv(NavScenario scenario, Params p)
    : scenario_(std::move(scenario)), p_(p) {
    State start = State::Zero(4);
    start.head<2>() = scenario_.start_center;
    proxy_scale_ = std::max(1e-6, value_proxy(start));
}

State PointMassNavEnv::step(const State& x, const Control& u) const {
    const double ax = std::clamp(u[0], -p_.a_max, p_.a_max);
    const double ay = std::clamp(u[1], -p_.a_max, p_.a_max);
    State next(4);
    double vx = x[2] + p_.dt * ax;
    double vy = x[3] + p_.dt * ay;
    const double speed = std::hypot(vx, vy);
    if (speed > p_.v_max) {
        const double scale = p_.v_max / speed;
        vx *= scale;
        vy *= scale;
    }
    next << x[0] + p_.dt * vx, x[1] + p_.dt * vy, vx, vy;
    return next;
}

double PointMassNavEnv::obstacle_penalty(double px, double py) const {
    double total = 0.0;
    for (const auto& d : scenario_.obstacles) {
        const double reach = d.r + p_.inflation;
        const double dist = std::hypot(px - d.x, py - d.y);
        if (dist < reach) {
            const double q = 1.0 - dist / reach;
            total += p_.w_obstacle * q * q;
        }
    }
    return total;
}

double PointMassNavEnv::stage_cost(const State& x, const Control& u) const {
    const double dx = x[0] - scenario_.goal.x();
    const double dy = x[1] - scenario_.goal.y();
    return p_.w_goal * (dx * dx + dy * dy) + obstacle_penalty(x[0], x[1]) +
           p_.w_velocity * (x[2] * x[2] + x[3] * x[3]) +
           p_.w_control * (u[0] * u[0] + u[1] * u[1]);
}

double PointMassNavEnv::terminal_cost(const State& x) const { return value_proxy(x); }

double PointMassNavEnv::value_proxy(const State& x) const {
    const double dx = x[0] - scenario_.goal.x();
    const double dy = x[1] - scenario_.goal.y();
    return p_.w_goal * (dx * dx + dy * dy) + obstacle_penalty(x[0], x[1]);
}

std::optional<State> PointMassNavEnv::goal_state() const {
    State g = State::Zero(4);
    g.head<2>() = scenario_.goal;
    return g;
}

std::optional<Mat> PointMassNavEnv::control_direction_map() const {
    // Control is planar acceleration: take the position part of a
    // feature-space direction.
    Mat map = Mat::Zero(2, 4);
    map(0, 0) = 1.0;
    map(1, 1) = 1.0;
    return map;
}

Vec PointMassNavEnv::control_lower() const {
    Vec lo(2);
    lo << -p_.a_max, -p_.a_max;
    return lo;
}

Vec PointMassNavEnv::control_upper() const {
    Vec hi(2);
    hi << p_.a_max, p_.a_max;
    return hi;
}

State PointMassNavEnv::sample_initial(GaussianStream& stream) const {
    State x = State::Zero(4);
    x[0] = scenario_.start_center.x() + (2.0 * stream.uniform() - 1.0) * scenario_.start_halfwidth;
    x[1] = scenario_.start_center.y() + (2.0 * stream.uniform() - 1.0) * scenario_.start_halfwidth;
    return x;
}

bool PointMassNavEnv::collides(const State& x) const {
    for (const auto& d : scenario_.obstacles) {
        if (std::hypot(x[0] - d.x, x[1] - d.y) < d.r) {
            return true;
        }
    }
    return false;
}

}  // namespace mamppi
