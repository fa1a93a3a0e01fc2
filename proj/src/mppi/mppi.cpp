#include "mamppi/mppi/mppi.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace mamppi {

namespace {
double elapsed_ms(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}
}  // namespace

void MppiConfig::validate(int control_dim) const {
    require(samples >= 1, "MppiConfig: samples must be >= 1");
    require(horizon >= 1, "MppiConfig: horizon must be >= 1");
    require(lambda0 > 0.0, "MppiConfig: lambda0 must be > 0");
    require(control_covariance.rows() == control_dim &&
                control_covariance.cols() == control_dim,
            "MppiConfig: covariance dimension mismatch");
    require(control_lower.size() == control_dim && control_upper.size() == control_dim,
            "MppiConfig: bounds dimension mismatch");
    for (int i = 0; i < control_dim; ++i) {
        require(control_lower[i] < control_upper[i], "MppiConfig: bounds must satisfy lo < hi");
    }
}

std::vector<std::vector<Control>> sample_controls(const MppiConfig& cfg,
                                                  const NominalPlan& nominal,
                                                  const Mat& covariance,
                                                  std::uint64_t step_index,
                                                  const std::optional<Vec>& mean_bias) {
    require(static_cast<int>(nominal.size()) == cfg.horizon,
            "sample_controls: nominal plan length must equal horizon");
    const CovarianceSampler sampler(covariance);
    std::vector<std::vector<Control>> out(static_cast<std::size_t>(cfg.samples));

    // Elite retention: sample 0 is the unperturbed nominal.
    out[0].reserve(nominal.size());
    for (const Control& u : nominal) {
        out[0].push_back(clamp_control(u, cfg.control_lower, cfg.control_upper));
    }
    for (int k = 1; k < cfg.samples; ++k) {
        GaussianStream stream(mix_seed(cfg.seed, step_index, static_cast<std::uint64_t>(k)));
        auto& seq = out[static_cast<std::size_t>(k)];
        seq.reserve(nominal.size());
        for (int t = 0; t < cfg.horizon; ++t) {
            Control u = nominal[static_cast<std::size_t>(t)] + sampler.sample(stream);
            if (mean_bias) {
                u += *mean_bias;
            }
            seq.push_back(clamp_control(std::move(u), cfg.control_lower, cfg.control_upper));
        }
    }
    return out;
}

RolloutBatch evaluate_batch(const DynamicsModel& dynamics, const CostModel& cost,
                            const State& x0,
                            const std::vector<std::vector<Control>>& controls,
                            ThreadPool* pool) {
    require(all_finite(x0), "evaluate_batch: initial state must be finite");
    const int K = static_cast<int>(controls.size());
    RolloutBatch batch;
    batch.controls = controls;
    batch.trajectories.resize(static_cast<std::size_t>(K));
    batch.costs.resize(K);

    auto rollout = [&](int k) {
        const auto& seq = controls[static_cast<std::size_t>(k)];
        Trajectory& traj = batch.trajectories[static_cast<std::size_t>(k)];
        traj.states.clear();
        traj.states.reserve(seq.size() + 1);
        traj.controls = seq;
        traj.states.push_back(x0);
        double total = 0.0;
        bool feasible = true;
        State x = x0;
        for (const Control& u : seq) {
            total += cost.stage_cost(x, u);
            x = dynamics.step(x, u);
            traj.states.push_back(x);
            if (!std::isfinite(total) || !all_finite(x)) {
                feasible = false;
                break;
            }
        }
        if (feasible) {
            total += cost.terminal_cost(x);
            feasible = std::isfinite(total);
        }
        batch.costs[k] = feasible ? total : kInfeasibleCost;
    };

    if (pool != nullptr) {
        pool->parallel_for(K, rollout);
    } else {
        for (int k = 0; k < K; ++k) {
            rollout(k);
        }
    }
    return batch;
}

Vec mppi_weights(const Vec& costs, double lambda) {
    require(lambda > 0.0, "mppi_weights: lambda must be > 0");
    require(costs.size() > 0, "mppi_weights: empty cost vector");
    double min_cost = kInfeasibleCost;
    for (int k = 0; k < costs.size(); ++k) {
        min_cost = std::min(min_cost, costs[k]);
    }
    if (!std::isfinite(min_cost)) {
        throw std::runtime_error("mppi_weights: no feasible rollout");
    }
    Vec w(costs.size());
    double sum = 0.0;
    for (int k = 0; k < costs.size(); ++k) {
        w[k] = std::isfinite(costs[k]) ? std::exp(-(costs[k] - min_cost) / lambda) : 0.0;
        sum += w[k];
    }
    w /= sum;
    return w;
}

double effective_sample_size(const Vec& weights) {
    const double s = weights.squaredNorm();
    return s > 0.0 ? 1.0 / s : 0.0;
}

std::vector<Control> optimal_control(const RolloutBatch& batch, const Vec& weights,
                                     const Vec& lower, const Vec& upper) {
    require(batch.controls.size() == static_cast<std::size_t>(weights.size()),
            "optimal_control: weights/batch size mismatch");
    require(std::abs(weights.sum() - 1.0) <= 1e-9, "optimal_control: weights must sum to 1");
    const std::size_t H = batch.controls.front().size();
    const Eigen::Index m = batch.controls.front().front().size();
    std::vector<Control> plan(H, Control::Zero(m));
    for (int k = 0; k < weights.size(); ++k) {
        if (weights[k] == 0.0) {
            continue;
        }
        const auto& seq = batch.controls[static_cast<std::size_t>(k)];
        for (std::size_t t = 0; t < H; ++t) {
            plan[t] += weights[k] * seq[t];
        }
    }
    for (auto& u : plan) {
        u = clamp_control(std::move(u), lower, upper);
    }
    return plan;
}

void shift_nominal(NominalPlan& plan) {
    if (plan.size() <= 1) {
        return;
    }
    for (std::size_t t = 0; t + 1 < plan.size(); ++t) {
        plan[t] = plan[t + 1];
    }
}

MppiController::MppiController(std::shared_ptr<const DynamicsModel> dynamics,
                               std::shared_ptr<const CostModel> cost, MppiConfig cfg,
                               NominalPlan initial_plan)
    : dynamics_(std::move(dynamics)), cost_(std::move(cost)), cfg_(std::move(cfg)) {
    cfg_.validate(dynamics_->control_dim());
    if (initial_plan.empty()) {
        initial_plan_.assign(static_cast<std::size_t>(cfg_.horizon),
                             Control::Zero(dynamics_->control_dim()));
    } else {
        require(static_cast<int>(initial_plan.size()) == cfg_.horizon,
                "MppiController: initial plan length must equal horizon");
        initial_plan_ = std::move(initial_plan);
    }
    nominal_ = initial_plan_;
}

void MppiController::reset_plan() {
    nominal_ = initial_plan_;
    step_count_ = 0;
}

std::pair<Control, StepDiagnostics> MppiController::step(const State& x0) {
    StepDiagnostics diag;
    const auto t_start = std::chrono::steady_clock::now();

    auto t0 = std::chrono::steady_clock::now();
    auto samples = sample_controls(cfg_, nominal_, cfg_.control_covariance, step_count_);
    diag.sample_ms = elapsed_ms(t0);

    t0 = std::chrono::steady_clock::now();
    RolloutBatch batch = evaluate_batch(*dynamics_, *cost_, x0, samples, &ThreadPool::shared());
    diag.rollout_ms = elapsed_ms(t0);

    const Vec weights = mppi_weights(batch.costs, cfg_.lambda0);
    nominal_ = optimal_control(batch, weights, cfg_.control_lower, cfg_.control_upper);

    diag.lambda_used = cfg_.lambda0;
    diag.min_cost = batch.costs.minCoeff();
    diag.mean_cost = batch.costs.mean();
    diag.effective_samples = effective_sample_size(weights);

    const Control u0 = nominal_.front();
    shift_nominal(nominal_);
    ++step_count_;
    diag.total_ms = elapsed_ms(t_start);
    return {u0, diag};
}

}  // namespace mamppi
