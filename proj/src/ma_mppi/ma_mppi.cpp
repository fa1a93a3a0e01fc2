#include "mamppi/ma_mppi/ma_mppi.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "mamppi/core/jsonio.hpp"

namespace mamppi {

using nlohmann::json;

namespace {

double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

/// Rollout cost with the memory term injected per visited state:
/// c~(x, u) = c(x, u) + w_mem * (1 - alpha(e)) * V_mem(e), e = feature(x).
class MemoryAugmentedCost : public CostModel {
  public:
    MemoryAugmentedCost(const Environment& env, const MemoryStore& store,
                        const PotentialParams& params, double w_mem,
                        std::optional<double> fixed_alpha)
        : env_(env), store_(store), params_(params), w_mem_(w_mem),
          fixed_alpha_(fixed_alpha), identity_(env.feature_dim() == env.state_dim()) {}

    double memory_term(const State& x) const {
        double v_mem = 0.0;
        double prox = 0.0;
        auto accumulate = [&](const Vec& e) {
            store_.for_each_active(e, [&](int id, double dist) {
                const MemoryFeature& f = store_.feature(id);
                v_mem += f.strength * phi_for_kind(e, f, params_);
                prox += f.strength * (1.0 - dist / f.radius);
            });
        };
        if (identity_) {
            accumulate(x);
        } else {
            accumulate(env_.to_feature(x));
        }
        if (v_mem == 0.0) {
            return 0.0;
        }
        const double a = fixed_alpha_ ? *fixed_alpha_
                                      : std::min(1.0, params_.delta0 / (prox + params_.epsilon));
        return w_mem_ * (1.0 - a) * v_mem;
    }

    double stage_cost(const State& x, const Control& u) const override {
        return env_.stage_cost(x, u) + memory_term(x);
    }

    double terminal_cost(const State& x) const override {
        return env_.terminal_cost(x) + memory_term(x);
    }

  private:
    const Environment& env_;
    const MemoryStore& store_;
    const PotentialParams& params_;
    double w_mem_;
    std::optional<double> fixed_alpha_;
    bool identity_;
};

}  // namespace

void MaMppiConfig::validate(int control_dim) const {
    mppi.validate(control_dim);
    detection.validate();
    memory.validate();
    potential.validate();
    require(w_mem >= 0.0, "MaMppiConfig: w_mem must be >= 0");
    require(bias_gain >= 0.0, "MaMppiConfig: bias_gain must be >= 0");
    require(naive_insert_every >= 1, "MaMppiConfig: naive_insert_every must be >= 1");
    if (fixed_alpha) {
        require(*fixed_alpha >= 0.0 && *fixed_alpha <= 1.0,
                "MaMppiConfig: fixed_alpha must be in [0,1]");
    }
}

MaMppiController::MaMppiController(EnvironmentPtr env, MaMppiConfig cfg)
    : env_(std::move(env)), cfg_(std::move(cfg)),
      detector_(cfg_.detection,
                [this](const Vec& e) { return env_->value_in_feature(e); },
                env_->goal_feature()),
      store_(env_->feature_dim()) {
    cfg_.validate(env_->control_dim());
    initial_plan_.assign(static_cast<std::size_t>(cfg_.mppi.horizon), env_->nominal_control());
    nominal_ = initial_plan_;
}

void MaMppiController::reset_plan() {
    nominal_ = initial_plan_;
    detector_.reset();
    was_inside_.clear();
    step_count_ = 0;
}

void MaMppiController::clear_memory() {
    store_.clear();
    was_inside_.clear();
}

void MaMppiController::load_memory(MemoryStore store) {
    require(store.dim() == env_->feature_dim(), "load_memory: dimension mismatch");
    store_ = std::move(store);
    was_inside_.clear();
}

std::optional<CandidateFeature> MaMppiController::naive_candidate(const Vec& e) {
    if (step_count_ == 0 ||
        step_count_ % static_cast<std::uint64_t>(cfg_.naive_insert_every) != 0) {
        return std::nullopt;
    }
    CandidateFeature c;
    c.position = e;
    c.kind = 1;
    c.radius = cfg_.detection.radius_scale * cfg_.detection.r_min;
    return c;
}

void MaMppiController::track_escape_directions(const Vec& e) {
    const int n = store_.size();
    if (static_cast<int>(was_inside_.size()) != n) {
        // Feature set changed shape (insert/prune/evict); restart tracking.
        was_inside_.assign(static_cast<std::size_t>(n), 0);
        for (int i = 0; i < n; ++i) {
            const auto& f = store_.feature(i);
            was_inside_[static_cast<std::size_t>(i)] =
                (e - f.position).norm() <= f.radius ? 1 : 0;
        }
        return;
    }
    for (int i = 0; i < n; ++i) {
        const auto& f = store_.feature(i);
        const double dist = (e - f.position).norm();
        const bool inside = dist <= f.radius;
        if (!inside && was_inside_[static_cast<std::size_t>(i)] && f.kind != 1 && dist > 1e-12) {
            // First state observed outside the influence region after a visit:
            // record it as the successful escape direction.
            store_.set_direction(i, (e - f.position) / dist);
        }
        was_inside_[static_cast<std::size_t>(i)] = inside ? 1 : 0;
    }
}

std::pair<Control, StepDiagnostics> MaMppiController::step(const State& x0) {
    StepDiagnostics diag;
    const auto t_start = std::chrono::steady_clock::now();
    const bool memory_on = cfg_.memory_enabled;

    // Phases 1-3: window push, detection, memory update.
    auto t0 = std::chrono::steady_clock::now();
    std::optional<Vec> feature_state;
    if (memory_on) {
        feature_state = env_->to_feature(x0);
        bool stagnating = false;
        std::optional<CandidateFeature> candidate;
        if (cfg_.detection_enabled) {
            DetectionResult det = detector_.observe(*feature_state);
            stagnating = det.stagnating;
            candidate = std::move(det.candidate);
        } else {
            candidate = naive_candidate(*feature_state);
        }
        store_.update(*feature_state, candidate, stagnating, cfg_.memory);
        track_escape_directions(*feature_state);
        diag.stagnating = stagnating;
        diag.memory_size = store_.size();
    }
    diag.memory_ms = elapsed_ms(t0);

    // Phase 4: adaptation parameters at the current state.
    t0 = std::chrono::steady_clock::now();
    double lambda = cfg_.mppi.lambda0;
    double cov_scale = 1.0;
    std::optional<Vec> bias;
    if (memory_on && !store_.empty()) {
        PotentialEval eval = evaluate_potential(*feature_state, store_, cfg_.potential);
        const double a = cfg_.fixed_alpha ? *cfg_.fixed_alpha : eval.alpha;
        diag.alpha = a;
        diag.active_features = eval.active_count;
        if (cfg_.adaptive_temperature) {
            lambda = adaptive_temperature_from_alpha(a, cfg_.mppi.lambda0, cfg_.potential.eta);
        }
        if (cfg_.adaptive_covariance) {
            cov_scale = covariance_scale_from_alpha(a, cfg_.potential.mu);
        }
        if (cfg_.directional_bias_enabled) {
            if (auto hint = directional_bias(*feature_state, store_,
                                             env_->control_direction_map())) {
                const Vec control_std =
                    cfg_.mppi.control_covariance.diagonal().cwiseSqrt();
                bias = cfg_.bias_gain * control_std.cwiseProduct(*hint);
            }
        }
    }
    diag.potential_ms = elapsed_ms(t0);

    // Phase 5: sampling with the adapted covariance and optional bias.
    t0 = std::chrono::steady_clock::now();
    const Mat covariance =
        cov_scale == 1.0 ? cfg_.mppi.control_covariance
                         : Mat(cov_scale * cfg_.mppi.control_covariance);
    auto samples = sample_controls(cfg_.mppi, nominal_, covariance, step_count_, bias);
    diag.sample_ms = elapsed_ms(t0);

    // Phase 6: rollouts under the memory-augmented cost.
    t0 = std::chrono::steady_clock::now();
    RolloutBatch batch;
    if (memory_on && !store_.empty()) {
        MemoryAugmentedCost cost(*env_, store_, cfg_.potential, cfg_.w_mem, cfg_.fixed_alpha);
        batch = evaluate_batch(*env_, cost, x0, samples, &ThreadPool::shared());
    } else {
        batch = evaluate_batch(*env_, *env_, x0, samples, &ThreadPool::shared());
    }
    diag.rollout_ms = elapsed_ms(t0);

    // Phases 7-9: weights, averaging, receding-horizon shift.
    const Vec weights = mppi_weights(batch.costs, lambda);
    nominal_ = optimal_control(batch, weights, cfg_.mppi.control_lower, cfg_.mppi.control_upper);

    diag.lambda_used = lambda;
    diag.min_cost = batch.costs.minCoeff();
    diag.mean_cost = batch.costs.mean();
    diag.effective_samples = effective_sample_size(weights);

    const Control u0 = nominal_.front();
    shift_nominal(nominal_);
    ++step_count_;
    diag.total_ms = elapsed_ms(t_start);
    return {u0, diag};
}

std::string EpisodeLog::to_jsonl() const {
    std::ostringstream out;
    json header;
    header["type"] = "episode";
    header["seed"] = seed;
    header["steps"] = steps.size();
    header["diverged"] = diverged;
    header["cumulative_cost"] = cumulative_cost;
    header["cumulative_reward"] = cumulative_reward;
    out << header.dump() << "\n";
    for (const auto& s : steps) {
        json row;
        row["state"] = vec_to_json(s.state);
        row["control"] = vec_to_json(s.control);
        row["cost"] = s.stage_cost;
        row["proxy"] = s.value_proxy;
        row["value"] = s.value_norm;
        row["collided"] = s.collided;
        row["alpha"] = s.diag.alpha;
        row["lambda"] = s.diag.lambda_used;
        row["mem"] = s.diag.memory_size;
        row["active"] = s.diag.active_features;
        row["stagnating"] = s.diag.stagnating;
        row["ess"] = s.diag.effective_samples;
        row["ms"] = s.diag.total_ms;
        out << row.dump() << "\n";
    }
    return out.str();
}

EpisodeLog EpisodeLog::from_jsonl(const std::string& text) {
    EpisodeLog log;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const json row = json::parse(line);
        if (!header_seen) {
            require(row.value("type", "") == "episode", "EpisodeLog: missing header line");
            log.seed = row.at("seed").get<std::uint64_t>();
            log.diverged = row.at("diverged").get<bool>();
            log.cumulative_cost = row.at("cumulative_cost").get<double>();
            log.cumulative_reward = row.at("cumulative_reward").get<double>();
            header_seen = true;
            continue;
        }
        StepRecord s;
        s.state = vec_from_json(row.at("state"));
        s.control = vec_from_json(row.at("control"));
        s.stage_cost = row.at("cost").get<double>();
        s.value_proxy = row.at("proxy").get<double>();
        s.value_norm = row.at("value").get<double>();
        s.collided = row.at("collided").get<bool>();
        s.diag.alpha = row.at("alpha").get<double>();
        s.diag.lambda_used = row.at("lambda").get<double>();
        s.diag.memory_size = row.at("mem").get<int>();
        s.diag.active_features = row.at("active").get<int>();
        s.diag.stagnating = row.at("stagnating").get<bool>();
        s.diag.effective_samples = row.at("ess").get<double>();
        s.diag.total_ms = row.at("ms").get<double>();
        log.steps.push_back(std::move(s));
    }
    require(header_seen, "EpisodeLog: empty document");
    return log;
}

EpisodeLog run_episode(const Environment& env, ControllerBase& controller, int steps,
                       std::uint64_t seed, const std::optional<State>& start) {
    require(steps >= 1, "run_episode: steps must be >= 1");
    EpisodeLog log;
    log.seed = seed;
    log.steps.reserve(static_cast<std::size_t>(steps));

    State x;
    if (start) {
        require(start->size() == env.state_dim(), "run_episode: start dimension mismatch");
        x = *start;
    } else {
        GaussianStream stream(mix_seed(seed, 0x5eedu));
        x = env.sample_initial(stream);
    }

    for (int t = 0; t < steps; ++t) {
        auto [u, diag] = controller.step(x);
        StepRecord rec;
        rec.state = x;
        rec.control = u;
        rec.stage_cost = env.stage_cost(x, u);
        rec.value_proxy = env.value_proxy(x);
        rec.value_norm =
            std::clamp(1.0 - rec.value_proxy / env.value_proxy_scale(), 0.0, 1.0);
        rec.collided = env.collides(x);
        rec.diag = diag;
        log.cumulative_cost += rec.stage_cost;
        log.steps.push_back(std::move(rec));

        x = env.step(x, u);
        if (!all_finite(x)) {
            log.diverged = true;
            break;
        }
    }
    log.cumulative_reward = -log.cumulative_cost;
    return log;
}

}  // namespace mamppi
