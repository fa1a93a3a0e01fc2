#pragma once

#include <limits>
#include <optional>

#include "mamppi/core/types.hpp"

namespace mamppi {

/// Cost assigned to rollouts that produced NaN/Inf anywhere; such rollouts
/// get zero weight downstream.
inline constexpr double kInfeasibleCost = std::numeric_limits<double>::infinity();

/// Deterministic part f of x_{t+1} = f(x_t, u_t) + eps_t.
class DynamicsModel {
  public:
    virtual ~DynamicsModel() = default;
    virtual int state_dim() const = 0;
    virtual int control_dim() const = 0;
    virtual double dt() const = 0;
    virtual State step(const State& x, const Control& u) const = 0;
};

class CostModel {
  public:
    virtual ~CostModel() = default;
    virtual double stage_cost(const State& x, const Control& u) const = 0;
    virtual double terminal_cost(const State& x) const = 0;
};

/// f(x, u) plus optional additive noise. Deterministic when noise is absent.
State dynamics_step(const DynamicsModel& model, const State& x, const Control& u,
                    const std::optional<Vec>& noise = std::nullopt);

/// Sum of stage costs plus terminal cost; kInfeasibleCost if anything is
/// non-finite along the way.
double trajectory_cost(const CostModel& cost, const Trajectory& traj);

}  // namespace mamppi
