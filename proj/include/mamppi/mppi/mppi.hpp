#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "mamppi/core/models.hpp"
#include "mamppi/core/parallel.hpp"
#include "mamppi/core/rng.hpp"
#include "mamppi/core/types.hpp"

namespace mamppi {

struct MppiConfig {
    int samples = 1000;
    int horizon = 20;
    double lambda0 = 0.1;
    Mat control_covariance;         // m x m SPD
    Vec control_lower, control_upper;  // per-dimension bounds, +-inf allowed
    std::uint64_t seed = 0;

    void validate(int control_dim) const;
};

/// Warm-start control sequence, shifted left each receding-horizon step.
using NominalPlan = std::vector<Control>;

struct RolloutBatch {
    std::vector<std::vector<Control>> controls;  // K sequences of H controls
    std::vector<Trajectory> trajectories;        // aligned by sample index
    Vec costs;                                   // S(tau^k), +inf for infeasible
};

struct StepDiagnostics {
    double lambda_used = 0.0;
    double alpha = 1.0;
    int memory_size = 0;
    int active_features = 0;
    bool stagnating = false;
    double min_cost = 0.0;
    double mean_cost = 0.0;
    double effective_samples = 0.0;
    double sample_ms = 0.0;
    double rollout_ms = 0.0;
    double memory_ms = 0.0;
    double potential_ms = 0.0;
    double total_ms = 0.0;
};

/// K perturbed copies of the nominal plan, clamped to bounds. Sample 0 is the
/// unperturbed nominal (elite retention). Each sample draws from its own
/// stream keyed by (seed, step_index, k), so results are independent of
/// evaluation order. An optional mean bias shifts the perturbation
/// distribution (used for memory-guided sampling).
std::vector<std::vector<Control>> sample_controls(
    const MppiConfig& cfg, const NominalPlan& nominal, const Mat& covariance,
    std::uint64_t step_index, const std::optional<Vec>& mean_bias = std::nullopt);

/// Noise-free rollouts of all control sequences from x0; per-rollout failures
/// yield +inf cost without affecting the others.
RolloutBatch evaluate_batch(const DynamicsModel& dynamics, const CostModel& cost,
                            const State& x0,
                            const std::vector<std::vector<Control>>& controls,
                            ThreadPool* pool = nullptr);

/// Softmax of -(S - min S)/lambda. Infinite costs get weight zero; throws if
/// no cost is finite.
Vec mppi_weights(const Vec& costs, double lambda);

double effective_sample_size(const Vec& weights);

/// Per-step weighted average of the sampled controls, re-clamped to bounds.
std::vector<Control> optimal_control(const RolloutBatch& batch, const Vec& weights,
                                     const Vec& lower, const Vec& upper);

/// Left-shift by one, repeating the last entry (zero-order hold).
void shift_nominal(NominalPlan& plan);

inline Control clamp_control(Control u, const Vec& lower, const Vec& upper) {
    return u.cwiseMax(lower).cwiseMin(upper);
}

/// Common surface for the controllers driven by the benchmark loop.
class ControllerBase {
  public:
    virtual ~ControllerBase() = default;
    virtual std::pair<Control, StepDiagnostics> step(const State& x0) = 0;
    /// Restores the warm-start plan for a fresh episode.
    virtual void reset_plan() = 0;
};

/// Standard MPPI controller: sample, roll out, weight, average, shift.
class MppiController : public ControllerBase {
  public:
    MppiController(std::shared_ptr<const DynamicsModel> dynamics,
                   std::shared_ptr<const CostModel> cost, MppiConfig cfg,
                   NominalPlan initial_plan = {});

    std::pair<Control, StepDiagnostics> step(const State& x0) override;
    void reset_plan() override;

    const NominalPlan& nominal() const { return nominal_; }
    const MppiConfig& config() const { return cfg_; }
    std::uint64_t steps_taken() const { return step_count_; }

  private:
    std::shared_ptr<const DynamicsModel> dynamics_;
    std::shared_ptr<const CostModel> cost_;
    MppiConfig cfg_;
    NominalPlan initial_plan_;
    NominalPlan nominal_;
    std::uint64_t step_count_ = 0;
};

}  // namespace mamppi
