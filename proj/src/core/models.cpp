#include "mamppi/core/models.hpp"

#include <cmath>

namespace mamppi {

State dynamics_step(const DynamicsModel& model, const State& x, const Control& u,
                    const std::optional<Vec>& noise) {
    require(x.size() == model.state_dim(), "dynamics_step: state dimension mismatch");
    require(u.size() == model.control_dim(), "dynamics_step: control dimension mismatch");
    State next = model.step(x, u);
    require(next.size() == model.state_dim(), "dynamics_step: model returned wrong dimension");
    if (noise) {
        require(noise->size() == model.state_dim(), "dynamics_step: noise dimension mismatch");
        next += *noise;
    }
    return next;
}

double trajectory_cost(const CostModel& cost, const Trajectory& traj) {
    traj.validate();
    double total = 0.0;
    for (std::size_t t = 0; t < traj.controls.size(); ++t) {
        if (!all_finite(traj.states[t])) {
            return kInfeasibleCost;
        }
        total += cost.stage_cost(traj.states[t], traj.controls[t]);
        if (!std::isfinite(total)) {
            return kInfeasibleCost;
        }
    }
    if (!all_finite(traj.states.back())) {
        return kInfeasibleCost;
    }
    total += cost.terminal_cost(traj.states.back());
    return std::isfinite(total) ? total : kInfeasibleCost;
}

}  // namespace mamppi
