#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace mamppi {

using State = Eigen::VectorXd;
using Control = Eigen::VectorXd;
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline bool all_finite(const Eigen::Ref<const Eigen::VectorXd>& v) {
    return v.allFinite();
}

inline void require(bool cond, const char* msg) {
    if (!cond) {
        throw std::invalid_argument(msg);
    }
}

/// A rolled-out state/control sequence: H controls, H+1 states, states[0] is
/// the rollout root.
struct Trajectory {
    std::vector<State> states;
    std::vector<Control> controls;

    int horizon() const { return static_cast<int>(controls.size()); }

    void validate() const {
        require(!states.empty(), "Trajectory: empty state sequence");
        require(states.size() == controls.size() + 1,
                "Trajectory: states must be one longer than controls");
    }
};

}  // namespace mamppi
