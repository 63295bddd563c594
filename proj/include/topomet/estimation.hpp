#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "topomet/band_geometry.hpp"
#include "topomet/bounds.hpp"
#include "topomet/povm.hpp"
#include "topomet/rng.hpp"

namespace topomet {

struct MeasurementRecord {
    std::vector<std::int64_t> counts;
    std::int64_t shots = 0;
    std::string povm_id;
    std::uint64_t seed = 0;
};

// Multinomial draw from the Born distribution; bit-reproducible for a fixed
// seed (the uniform variates come from mt19937_64 with a fixed mapping, not
// from distribution objects with unspecified algorithms).
MeasurementRecord sample_outcomes(const Povm& p, const PureQubitState& s,
                                  std::int64_t shots, std::uint64_t seed);

// JSON-lines wire format {"seed":..., "N":..., "counts":[...]}
std::string to_json_line(const MeasurementRecord& rec);
MeasurementRecord record_from_json_line(const std::string& line);

struct MleResult {
    BlochPoint estimate;
    int iterations = 0;
    // set when the line search stalls before the score tolerance is met;
    // the best local optimum found is still returned
    bool degenerate = false;
};

// Maximizes sum_i counts_i log p_i(k) by damped Fisher-scoring ascent
// (score step F_C^{-1} grad, step halved until the likelihood increases).
// Zero counts are dropped from the sum. Throws SingularFimError when the
// scoring matrix is singular, NonConvergenceError after 200 iterations.
MleResult mle_estimate(const Povm& p, const MeasurementRecord& rec, double mass,
                       const BlochPoint& init);

enum class CovarianceMethod { asymptotic_eq2, monte_carlo, fim_inverse };

struct CovarianceEstimate {
    Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
    CovarianceMethod method = CovarianceMethod::asymptotic_eq2;
    std::int64_t shots = 0;
    std::int64_t trials = 0;  // monte carlo only
    // asymptotic method: relative Frobenius gap of the propagated matrix
    // against F_C^{-1}/N (the two agree analytically)
    double eq2_identity_gap = 0.0;
    // monte carlo: mean wrapped deviation of the estimates from truth
    Eigen::Vector2d bias = Eigen::Vector2d::Zero();
};

// Propagates the multinomial covariance of the outcome frequencies through
// the implicit-function derivative of the likelihood equation:
// Sigma = (dk/dp) Sigma(p) (dk/dp)^T with dk/dp = F_C^{-1} L,
// L_aj = da log p_j. Also records the gap to F_C^{-1}/N.
CovarianceEstimate asymptotic_covariance(const Povm& p, const BlochPoint& point,
                                         std::int64_t shots);

// Sample covariance of per-trial maximum-likelihood estimates, each trial
// initialized at the true point; angle deviations wrapped to (-pi, pi].
// Aborts with Error if more than 1% of trials fail.
CovarianceEstimate monte_carlo_covariance(const Povm& p, const BlochPoint& point,
                                          std::int64_t shots, std::int64_t trials,
                                          std::uint64_t seed);

// sqrt(max(det sigma, 0))
double uncertainty_volume(const CovarianceEstimate& c);

// Tr(W sigma)
double weighted_variance(const WeightMatrix& w, const CovarianceEstimate& c);

// CSV columns s11,s12,s22
std::string covariance_csv_header();
std::string covariance_csv_row(const CovarianceEstimate& c);

}  // namespace topomet
