#include "mamppi/potential/potential.hpp"

#include <cmath>
#include <limits>

namespace mamppi {

void PotentialParams::validate() const {
    require(delta0 > 0.0, "PotentialParams: delta0 must be > 0");
    require(epsilon > 0.0, "PotentialParams: epsilon must be > 0");
    require(eta >= 0.0, "PotentialParams: eta must be >= 0");
    require(mu >= 0.0, "PotentialParams: mu must be >= 0");
    require(beta_saddle > 0.0 && beta_saddle < 1.0,
            "PotentialParams: beta_saddle must be in (0,1)");
    require(beta_sigmoid > 0.0, "PotentialParams: beta_sigmoid must be > 0");
}

double phi1(const Vec& x, const Vec& m, double r) {
    require(r > 0.0, "phi1: radius must be > 0");
    const double q = 1.0 - (x - m).squaredNorm() / (r * r);
    return q > 0.0 ? q * q : 0.0;
}

double phi2(const Vec& x, const Vec& m, double r, const Vec& d) {
    require(r > 0.0, "phi2: radius must be > 0");
    const Vec u = x - m;
    const double g = (1.0 - u.squaredNorm() / (r * r)) * d.dot(u);
    return g > 0.0 ? g : 0.0;
}

double phi3(const Vec& x, const Vec& m, double r, const Vec& d, Phi3Variant variant,
            double beta) {
    require(r > 0.0, "phi3: radius must be > 0");
    const Vec u = x - m;
    const double u2 = u.squaredNorm();
    const double envelope = 1.0 - u2 / (r * r);
    const double du = d.dot(u);
    double core;
    if (variant == Phi3Variant::kQuadraticDifference) {
        // (d.u)^2 - |(I - dd^T)u|^2 == 2 (d.u)^2 - |u|^2 for unit d.
        core = 2.0 * du * du - u2;
    } else {
        if (u2 < 1e-24) {
            return 0.0;  // 0/0 at the center defined as zero
        }
        core = du * du / u2 - beta;
    }
    const double g = envelope * core;
    return g > 0.0 ? g : 0.0;
}

double phi_for_kind(const Vec& x, const MemoryFeature& f, const PotentialParams& params) {
    switch (f.kind) {
        case 1:
            return phi1(x, f.position, f.radius);
        case 2:
            return phi2(x, f.position, f.radius, *f.direction);
        default:
            return phi3(x, f.position, f.radius, *f.direction, params.phi3_variant,
                        params.beta_saddle);
    }
}

Vec phi_gradient_for_kind(const Vec& x, const MemoryFeature& f, const PotentialParams& params) {
    const Vec u = x - f.position;
    const double r2 = f.radius * f.radius;
    const double u2 = u.squaredNorm();
    const double envelope = 1.0 - u2 / r2;
    if (envelope <= 0.0) {
        return Vec::Zero(x.size());
    }
    switch (f.kind) {
        case 1:
            // d/dx (envelope^2) = 2 envelope * (-2/r^2) u
            return (-4.0 * envelope / r2) * u;
        case 2: {
            const Vec& d = *f.direction;
            const double du = d.dot(u);
            if (envelope * du <= 0.0) {
                return Vec::Zero(x.size());
            }
            return (-2.0 * du / r2) * u + envelope * d;
        }
        default: {
            const Vec& d = *f.direction;
            const double du = d.dot(u);
            if (params.phi3_variant == Phi3Variant::kQuadraticDifference) {
                const double core = 2.0 * du * du - u2;
                if (envelope * core <= 0.0) {
                    return Vec::Zero(x.size());
                }
                return (-2.0 * core / r2) * u + envelope * (4.0 * du * d - 2.0 * u);
            }
            if (u2 < 1e-24) {
                return Vec::Zero(x.size());
            }
            const double core = du * du / u2 - params.beta_saddle;
            if (envelope * core <= 0.0) {
                return Vec::Zero(x.size());
            }
            const Vec core_grad = (2.0 * du / u2) * d - (2.0 * du * du / (u2 * u2)) * u;
            return (-2.0 * core / r2) * u + envelope * core_grad;
        }
    }
}

double memory_potential(const Vec& x, const MemoryStore& store, const PotentialParams& params) {
    double total = 0.0;
    store.for_each_active(x, [&](int id, double) {
        const MemoryFeature& f = store.feature(id);
        total += f.strength * phi_for_kind(x, f, params);
    });
    return total;
}

double proximity(const Vec& x, const MemoryStore& store) {
    double total = 0.0;
    store.for_each_active(x, [&](int id, double dist) {
        const MemoryFeature& f = store.feature(id);
        total += f.strength * (1.0 - dist / f.radius);
    });
    return total;
}

namespace {

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double alpha_sigmoid(const Vec& x, const MemoryStore& store, const PotentialParams& params) {
    if (store.empty()) {
        return 1.0;
    }
    double min_ratio = std::numeric_limits<double>::infinity();
    for (const auto& f : store.features()) {
        min_ratio = std::min(min_ratio, (x - f.position).norm() / f.radius);
    }
    return sigmoid(params.beta_sigmoid * min_ratio);
}

double alpha_from_proximity(double prox, const PotentialParams& params) {
    return std::min(1.0, params.delta0 / (prox + params.epsilon));
}

}  // namespace

double alpha(const Vec& x, const MemoryStore& store, const PotentialParams& params) {
    if (params.alpha_variant == AlphaVariant::kSigmoid) {
        return alpha_sigmoid(x, store, params);
    }
    return alpha_from_proximity(proximity(x, store), params);
}

PotentialEval evaluate_potential(const Vec& x, const MemoryStore& store,
                                 const PotentialParams& params) {
    PotentialEval out;
    store.for_each_active(x, [&](int id, double dist) {
        const MemoryFeature& f = store.feature(id);
        out.v_mem += f.strength * phi_for_kind(x, f, params);
        out.proximity += f.strength * (1.0 - dist / f.radius);
        ++out.active_count;
    });
    if (params.alpha_variant == AlphaVariant::kSigmoid) {
        out.alpha = alpha_sigmoid(x, store, params);
    } else {
        out.alpha = alpha_from_proximity(out.proximity, params);
    }
    return out;
}

double enhanced_value(const Vec& x, const MemoryStore& store, const ValueFn& base,
                      const PotentialParams& params) {
    const PotentialEval eval = evaluate_potential(x, store, params);
    return eval.alpha * base(x) + (1.0 - eval.alpha) * eval.v_mem;
}

Vec enhanced_gradient(const Vec& x, const MemoryStore& store, const ValueFn& base_value,
                      const GradientFn& base_gradient, const PotentialParams& params) {
    const PotentialEval eval = evaluate_potential(x, store, params);
    const Vec base_grad = base_gradient(x);
    if (eval.active_count == 0 && eval.alpha >= 1.0) {
        return base_grad;
    }

    Vec v_mem_grad = Vec::Zero(x.size());
    Vec prox_grad = Vec::Zero(x.size());
    store.for_each_active(x, [&](int id, double dist) {
        const MemoryFeature& f = store.feature(id);
        v_mem_grad += f.strength * phi_gradient_for_kind(x, f, params);
        if (dist > 1e-12) {
            prox_grad += (-f.strength / (f.radius * dist)) * (x - f.position);
        }
    });

    Vec alpha_grad = Vec::Zero(x.size());
    if (params.alpha_variant == AlphaVariant::kReciprocal) {
        const double raw = params.delta0 / (eval.proximity + params.epsilon);
        if (raw < 1.0) {
            alpha_grad = (-params.delta0 /
                          ((eval.proximity + params.epsilon) * (eval.proximity + params.epsilon))) *
                         prox_grad;
        }
    } else {
        // sigmoid(beta * s_min): differentiate through the nearest feature.
        int nearest = -1;
        double min_ratio = std::numeric_limits<double>::infinity();
        for (int i = 0; i < store.size(); ++i) {
            const auto& f = store.feature(i);
            const double ratio = (x - f.position).norm() / f.radius;
            if (ratio < min_ratio) {
                min_ratio = ratio;
                nearest = i;
            }
        }
        if (nearest >= 0) {
            const auto& f = store.feature(nearest);
            const double dist = (x - f.position).norm();
            if (dist > 1e-12) {
                const double s = sigmoid(params.beta_sigmoid * min_ratio);
                alpha_grad = (s * (1.0 - s) * params.beta_sigmoid / (f.radius * dist)) *
                             (x - f.position);
            }
        }
    }

    const double v_base = base_value(x);
    return eval.alpha * base_grad + (1.0 - eval.alpha) * v_mem_grad +
           alpha_grad * (v_base - eval.v_mem);
}

double adaptive_temperature_from_alpha(double alpha_value, double lambda0, double eta) {
    return lambda0 * (1.0 + eta * (1.0 - alpha_value));
}

double adaptive_temperature(const Vec& x, const MemoryStore& store, double lambda0, double eta,
                            const PotentialParams& params) {
    require(lambda0 > 0.0, "adaptive_temperature: lambda0 must be > 0");
    return adaptive_temperature_from_alpha(alpha(x, store, params), lambda0, eta);
}

double covariance_scale_from_alpha(double alpha_value, double mu) {
    return 1.0 + mu * (1.0 - alpha_value);
}

Mat adaptive_covariance(const Vec& x, const MemoryStore& store, const Mat& sigma_u0, double mu,
                        const PotentialParams& params) {
    return covariance_scale_from_alpha(alpha(x, store, params), mu) * sigma_u0;
}

std::optional<Vec> directional_bias(const Vec& x, const MemoryStore& store,
                                    const std::optional<Mat>& state_to_control_map) {
    if (!state_to_control_map || store.empty()) {
        return std::nullopt;
    }
    Vec accum = Vec::Zero(state_to_control_map->cols());
    double weight = 0.0;
    store.for_each_active(x, [&](int id, double) {
        const MemoryFeature& f = store.feature(id);
        if (f.kind == 2) {
            accum += f.strength * (*f.direction);
            weight += f.strength;
        }
    });
    if (weight <= 0.0) {
        return std::nullopt;
    }
    Vec mapped = (*state_to_control_map) * accum;
    const double n = mapped.norm();
    if (n < 1e-12) {
        return std::nullopt;
    }
    return Vec(mapped / n);
}

}  // namespace mamppi
