#include "mamppi/core/rng.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace mamppi {

namespace {
constexpr double kPsdTolerance = 1e-10;
constexpr double kSymmetryTolerance = 1e-12;
}  // namespace

CovarianceSampler::CovarianceSampler(const Mat& covariance) {
    require(covariance.rows() == covariance.cols(), "covariance must be square");
    require(covariance.allFinite(), "covariance must be finite");
    const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
    require(asym <= kSymmetryTolerance, "covariance must be symmetric");

    Eigen::LLT<Mat> llt(covariance);
    if (llt.info() == Eigen::Success) {
        factor_ = llt.matrixL();
        return;
    }
    // PSD but singular (or numerically on the boundary): eigendecompose and
    // clamp small negative eigenvalues at zero.
    Eigen::SelfAdjointEigenSolver<Mat> eig(covariance);
    require(eig.info() == Eigen::Success, "covariance eigendecomposition failed");
    Vec lam = eig.eigenvalues();
    require(lam.minCoeff() >= -kPsdTolerance, "covariance is not positive semi-definite");
    lam = lam.cwiseMax(0.0);
    factor_ = eig.eigenvectors() * lam.cwiseSqrt().asDiagonal();
}

Vec CovarianceSampler::sample(GaussianStream& stream) const {
    Vec z(dim());
    for (int i = 0; i < dim(); ++i) {
        z[i] = stream.next();
    }
    return factor_ * z;
}

std::vector<Vec> seeded_gaussian(const NoiseModel& noise, int count) {
    require(count >= 0, "seeded_gaussian: count must be >= 0");
    CovarianceSampler sampler(noise.covariance);
    GaussianStream stream(noise.seed);
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        out.push_back(sampler.sample(stream));
    }
    return out;
}

}  // namespace mamppi
