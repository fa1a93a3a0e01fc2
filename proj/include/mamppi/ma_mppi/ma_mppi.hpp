#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mamppi/detect/detect.hpp"
#include "mamppi/envs/environment.hpp"
#include "mamppi/memory/memory.hpp"
#include "mamppi/mppi/mppi.hpp"
#include "mamppi/potential/potential.hpp"

namespace mamppi {

struct MaMppiConfig {
    MppiConfig mppi;
    DetectionThresholds detection;
    MemoryParams memory;
    PotentialParams potential;

    bool memory_enabled = true;     // false: bitwise-identical to standard MPPI
    bool detection_enabled = true;  // false: blind periodic insertion (ablation)
    std::optional<double> fixed_alpha;  // set: disable adaptive weighting (ablation)
    bool adaptive_temperature = true;
    bool adaptive_covariance = true;
    bool directional_bias_enabled = true;
    double w_mem = 1.0;       // weight of the memory term injected into costs
    double bias_gain = 0.5;   // mean shift in units of per-dimension control std
    int naive_insert_every = 25;  // cadence of the no-detection ablation

    void validate(int control_dim) const;
};

/// Memory-Augmented MPPI: the standard sampling controller wrapped with
/// feature detection, an evolving feature memory, and the potential-field
/// adaptations (enhanced rollout costs, temperature, covariance, bias).
class MaMppiController : public ControllerBase {
  public:
    MaMppiController(EnvironmentPtr env, MaMppiConfig cfg);

    std::pair<Control, StepDiagnostics> step(const State& x0) override;
    void reset_plan() override;

    const MemoryStore& memory() const { return store_; }
    void clear_memory();
    void load_memory(MemoryStore store);

    const MaMppiConfig& config() const { return cfg_; }
    const NominalPlan& nominal() const { return nominal_; }

  private:
    std::optional<CandidateFeature> naive_candidate(const Vec& e);
    void track_escape_directions(const Vec& e);

    EnvironmentPtr env_;
    MaMppiConfig cfg_;
    FeatureDetector detector_;
    MemoryStore store_;
    NominalPlan initial_plan_;
    NominalPlan nominal_;
    std::uint64_t step_count_ = 0;
    std::vector<char> was_inside_;
};

struct StepRecord {
    State state;
    Control control;
    double stage_cost = 0.0;
    double value_proxy = 0.0;
    double value_norm = 0.0;  // 1 at the goal, 0 at/beyond the reference proxy
    bool collided = false;
    StepDiagnostics diag;
};

struct EpisodeLog {
    std::vector<StepRecord> steps;
    std::uint64_t seed = 0;
    bool diverged = false;
    double cumulative_cost = 0.0;
    double cumulative_reward = 0.0;  // negated cost

    std::string to_jsonl() const;
    static EpisodeLog from_jsonl(const std::string& text);
};

/// Closed-loop execution for `steps` control steps. The environment step is
/// deterministic; all stochasticity lives in the controller's sampling.
EpisodeLog run_episode(const Environment& env, ControllerBase& controller, int steps,
                       std::uint64_t seed, const std::optional<State>& start = std::nullopt);

}  // namespace mamppi
