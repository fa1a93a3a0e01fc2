#pragma once

#include <memory>
#include <optional>
#include <string>

#include "mamppi/core/models.hpp"
#include "mamppi/core/rng.hpp"

namespace mamppi {

/// A benchmark environment: dynamics + cost + the task-level declarations the
/// memory-augmented controller consumes (value proxy, goal, feature-space
/// embedding). Instances are immutable parameter sets; stepping is pure.
class Environment : public DynamicsModel, public CostModel {
  public:
    virtual std::string name() const = 0;

    /// Characteristic length scale of the feature space (drives finite
    /// difference steps and minimum feature radii).
    virtual double characteristic_scale() const { return 1.0; }

    /// Base value function V_base used for detection and blending: the
    /// state's task badness, independent of control effort.
    virtual double value_proxy(const State& x) const = 0;

    /// Reference proxy magnitude used to normalize per-step values into
    /// [0, 1] (value 1 at the goal, 0 at or beyond this proxy level).
    virtual double value_proxy_scale() const = 0;

    virtual std::optional<State> goal_state() const { return std::nullopt; }

    /// Memory / detection operate in this embedding of the state (identity
    /// by default; e.g. the pendulum maps its angle onto the unit circle so
    /// feature distances are seam-free).
    virtual int feature_dim() const { return state_dim(); }
    virtual Vec to_feature(const State& x) const { return x; }
    virtual double value_in_feature(const Vec& e) const { return value_proxy(e); }
    virtual std::optional<Vec> goal_feature() const { return goal_state(); }

    /// Optional linear map taking feature-space directions into control
    /// space for memory-guided sampling bias.
    virtual std::optional<Mat> control_direction_map() const { return std::nullopt; }

    virtual Vec control_lower() const = 0;
    virtual Vec control_upper() const = 0;

    /// Default warm-start control (zero unless the plant needs a feedforward
    /// term, e.g. hover thrust).
    virtual Control nominal_control() const { return Control::Zero(control_dim()); }

    virtual State sample_initial(GaussianStream& stream) const = 0;

    virtual bool collides(const State&) const { return false; }
};

using EnvironmentPtr = std::shared_ptr<const Environment>;

}  // namespace mamppi
