#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "mamppi/core/types.hpp"

namespace mamppi {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30u)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27u)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31u);
}

/// Mixes a base seed with stream coordinates (e.g. control step and rollout
/// index) into an independent stream seed, so rollouts can be sampled in any
/// order or thread without changing the results.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
    std::uint64_t s = seed;
    std::uint64_t h = splitmix64_next(s);
    s ^= a + 0x9e3779b97f4a7c15ull;
    h ^= splitmix64_next(s);
    s ^= b + 0xbf58476d1ce4e5b9ull;
    h ^= splitmix64_next(s);
    return h;
}

/// Counter-based engine: fast to construct per rollout stream.
class SplitMix64Engine {
  public:
    using result_type = std::uint64_t;
    explicit SplitMix64Engine(std::uint64_t seed = 0) : state_(seed) {}
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~result_type(0); }
    result_type operator()() { return splitmix64_next(state_); }

  private:
    std::uint64_t state_;
};

/// One seeded stream of standard normals.
class GaussianStream {
  public:
    explicit GaussianStream(std::uint64_t seed) : engine_(seed) {}
    double next() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

  private:
    SplitMix64Engine engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

/// Zero-mean Gaussian noise description: covariance plus stream seed.
struct NoiseModel {
    Mat covariance;
    std::uint64_t seed = 0;
};

/// Samples N(0, Sigma). Cholesky when SPD; eigendecomposition with clamped
/// eigenvalues for PSD-but-singular covariances.
class CovarianceSampler {
  public:
    explicit CovarianceSampler(const Mat& covariance);

    int dim() const { return static_cast<int>(factor_.rows()); }
    const Mat& factor() const { return factor_; }

    Vec sample(GaussianStream& stream) const;

  private:
    Mat factor_;  // factor * factor^T == covariance
};

std::vector<Vec> seeded_gaussian(const NoiseModel& noise, int count);

}  // namespace mamppi
