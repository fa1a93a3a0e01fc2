#pragma once

#include <functional>
#include <optional>

#include "mamppi/memory/memory.hpp"

namespace mamppi {

enum class AlphaVariant { kReciprocal, kSigmoid };
enum class Phi3Variant { kQuadraticDifference, kNormalizedSaddle };

struct PotentialParams {
    double delta0 = 0.5;        // proximity scale in the reciprocal weight
    double epsilon = 1e-6;      // division guard
    double eta = 2.0;           // temperature enhancement coefficient
    double mu = 1.0;            // covariance enhancement coefficient
    double beta_saddle = 0.5;   // saddle shape for the normalized phi3 variant
    double beta_sigmoid = 2.0;  // sharpness of the sigmoid weight variant
    AlphaVariant alpha_variant = AlphaVariant::kReciprocal;
    Phi3Variant phi3_variant = Phi3Variant::kQuadraticDifference;

    void validate() const;
};

/// Repulsive bump for local minima: max(0, (1 - |x-m|^2/r^2)^2).
double phi1(const Vec& x, const Vec& m, double r);

/// Directional guidance for plateaus: max(0, (1 - |x-m|^2/r^2) * d.(x-m)).
double phi2(const Vec& x, const Vec& m, double r, const Vec& d);

/// Saddle-shaped channel for high-curvature regions; two variants.
double phi3(const Vec& x, const Vec& m, double r, const Vec& d,
            Phi3Variant variant = Phi3Variant::kQuadraticDifference, double beta = 0.5);

double phi_for_kind(const Vec& x, const MemoryFeature& f, const PotentialParams& params);

/// Analytic gradient of the kind-selected basis potential (zero outside the
/// radius and on clamped branches; interior one-sided value at kinks).
Vec phi_gradient_for_kind(const Vec& x, const MemoryFeature& f, const PotentialParams& params);

/// V_mem(x, M) = sum of gamma_i * phi_{kind_i} over features containing x.
double memory_potential(const Vec& x, const MemoryStore& store, const PotentialParams& params);

/// delta(x, M) = sum of gamma_i * max(0, 1 - |x-m_i|/r_i).
double proximity(const Vec& x, const MemoryStore& store);

/// Blend weight in [0, 1]; 1 far from all features.
double alpha(const Vec& x, const MemoryStore& store, const PotentialParams& params);

/// One spatial query feeding everything a control step needs at x.
struct PotentialEval {
    double v_mem = 0.0;
    double proximity = 0.0;
    double alpha = 1.0;
    int active_count = 0;
};
PotentialEval evaluate_potential(const Vec& x, const MemoryStore& store,
                                 const PotentialParams& params);

using GradientFn = std::function<Vec(const Vec&)>;

/// alpha * V_base + (1 - alpha) * V_mem.
double enhanced_value(const Vec& x, const MemoryStore& store, const ValueFn& base,
                      const PotentialParams& params);

/// Analytic gradient of the enhanced value:
/// alpha grad V_base + (1-alpha) grad V_mem + grad alpha * (V_base - V_mem).
Vec enhanced_gradient(const Vec& x, const MemoryStore& store, const ValueFn& base_value,
                      const GradientFn& base_gradient, const PotentialParams& params);

/// lambda0 * (1 + eta * (1 - alpha)); always >= lambda0.
double adaptive_temperature(const Vec& x, const MemoryStore& store, double lambda0, double eta,
                            const PotentialParams& params);
double adaptive_temperature_from_alpha(double alpha_value, double lambda0, double eta);

/// Sigma_u0 * (1 + mu * (1 - alpha)); SPD is preserved.
Mat adaptive_covariance(const Vec& x, const MemoryStore& store, const Mat& sigma_u0, double mu,
                        const PotentialParams& params);
double covariance_scale_from_alpha(double alpha_value, double mu);

/// Strength-weighted mean of active kind-2 guidance directions mapped into
/// control space; absent when no kind-2 feature is active or no map exists.
std::optional<Vec> directional_bias(const Vec& x, const MemoryStore& store,
                                    const std::optional<Mat>& state_to_control_map);

}  // namespace mamppi
