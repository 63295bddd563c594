#include "topomet/estimation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "json.hpp"

namespace topomet {

namespace {

double uniform01(std::mt19937_64& rng) { return uniform01_from_bits(rng()); }

struct LikelihoodTerms {
    Eigen::VectorXd probs;       // raw Born probabilities
    Eigen::Matrix<double, Eigen::Dynamic, 2> grads;
};

LikelihoodTerms born_terms(const Povm& p, const BlochPoint& point) {
    const TangentFrame fr = tangent_frame(point);
    const auto m = static_cast<Eigen::Index>(p.size());
    LikelihoodTerms t{Eigen::VectorXd(m), Eigen::Matrix<double, Eigen::Dynamic, 2>(m, 2)};
    for (Eigen::Index i = 0; i < m; ++i) {
        const auto& el = p.elements[static_cast<std::size_t>(i)];
        const Eigen::Vector3d dir = el.bloch_direction();
        t.probs(i) = el.w * (1.0 + dir.dot(fr.n)) / 2.0;
        t.grads(i, 0) = 0.5 * el.w * dir.dot(fr.dn1);
        t.grads(i, 1) = 0.5 * el.w * dir.dot(fr.dn2);
    }
    return t;
}

double log_likelihood(const std::vector<std::int64_t>& counts, const Eigen::VectorXd& probs) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        const auto c = counts[static_cast<std::size_t>(i)];
        if (c == 0) continue;  // 0 log p == 0 by convention
        if (probs(i) <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += static_cast<double>(c) * std::log(probs(i));
    }
    return ll;
}

}  // namespace

MeasurementRecord sample_outcomes(const Povm& p, const PureQubitState& s,
                                  std::int64_t shots, std::uint64_t seed) {
    if (shots < 1) {
        throw std::invalid_argument("sample_outcomes: shots must be >= 1");
    }
    const Eigen::VectorXd probs = outcome_probabilities(p, s);
    Eigen::VectorXd cdf(probs.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < probs.size(); ++i) {
        acc += probs(i);
        cdf(i) = acc;
    }
    cdf(probs.size() - 1) = 1.0;

    MeasurementRecord rec;
    rec.counts.assign(p.size(), 0);
    rec.shots = shots;
    rec.povm_id = p.label;
    rec.seed = seed;
    std::mt19937_64 rng(seed);
    for (std::int64_t t = 0; t < shots; ++t) {
        const double u = uniform01(rng);
        Eigen::Index i = 0;
        while (i + 1 < cdf.size() && u >= cdf(i)) ++i;
        ++rec.counts[static_cast<std::size_t>(i)];
    }
    return rec;
}

std::string to_json_line(const MeasurementRecord& rec) {
    nlohmann::json j;
    j["seed"] = rec.seed;
    j["N"] = rec.shots;
    j["counts"] = rec.counts;
    return j.dump();
}

MeasurementRecord record_from_json_line(const std::string& line) {
    const nlohmann::json j = nlohmann::json::parse(line);
    MeasurementRecord rec;
    rec.seed = j.at("seed").get<std::uint64_t>();
    rec.shots = j.at("N").get<std::int64_t>();
    rec.counts = j.at("counts").get<std::vector<std::int64_t>>();
    return rec;
}

MleResult mle_estimate(const Povm& p, const MeasurementRecord& rec, double mass,
                       const BlochPoint& init) {
    if (rec.counts.size() != p.size()) {
        throw std::invalid_argument("record outcome count does not match POVM size");
    }
    const double total = static_cast<double>(rec.shots);
    BlochPoint k{init.k1, init.k2, mass};

    MleResult res;
    constexpr int kMaxIterations = 200;
    constexpr double kScoreTol = 1e-10;

    LikelihoodTerms t = born_terms(p, k);
    double ll = log_likelihood(rec.counts, t.probs);
    for (int it = 0; it < kMaxIterations; ++it) {
        res.iterations = it;
        // per-shot score; terms with zero counts drop out
        Eigen::Vector2d score = Eigen::Vector2d::Zero();
        for (Eigen::Index i = 0; i < t.probs.size(); ++i) {
            const auto c = rec.counts[static_cast<std::size_t>(i)];
            if (c == 0) continue;
            score += (static_cast<double>(c) / t.probs(i)) * t.grads.row(i).transpose();
        }
        score /= total;
        if (score.norm() < kScoreTol) {
            res.estimate = make_bloch_point(k.k1, k.k2, mass);
            return res;
        }
        Eigen::Matrix2d fim = Eigen::Matrix2d::Zero();
        for (Eigen::Index i = 0; i < t.probs.size(); ++i) {
            if (t.probs(i) <= 1e-15) continue;
            const Eigen::Vector2d g = t.grads.row(i).transpose();
            fim += g * g.transpose() / t.probs(i);
        }
        if (std::abs(fim.determinant()) < 1e-14) {
            throw SingularFimError("scoring matrix singular; Newton step undefined");
        }
        const Eigen::Vector2d step = fim.inverse() * score;

        double lambda = 1.0;
        bool improved = false;
        BlochPoint knext = k;
        LikelihoodTerms tnext = t;
        double llnext = ll;
        for (int halving = 0; halving < 30; ++halving) {
            knext = BlochPoint{k.k1 + lambda * step(0), k.k2 + lambda * step(1), mass};
            tnext = born_terms(p, knext);
            llnext = log_likelihood(rec.counts, tnext.probs);
            if (llnext > ll) {
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if (!improved) {
            // ascent stalled: the record is not representable any better
            // (frequencies off the model manifold); return the local optimum
            res.degenerate = true;
            res.estimate = make_bloch_point(k.k1, k.k2, mass);
            return res;
        }
        k = knext;
        t = tnext;
        ll = llnext;
    }
    throw NonConvergenceError("mle_estimate: iteration budget (200) exceeded");
}

CovarianceEstimate asymptotic_covariance(const Povm& p, const BlochPoint& point,
                                         std::int64_t shots) {
    if (shots < 1) {
        throw std::invalid_argument("asymptotic_covariance: shots must be >= 1");
    }
    const LikelihoodTerms t = born_terms(p, point);
    const auto m = t.probs.size();

    Eigen::Matrix2d fim = Eigen::Matrix2d::Zero();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (t.probs(i) <= 1e-15) continue;
        const Eigen::Vector2d g = t.grads.row(i).transpose();
        fim += g * g.transpose() / t.probs(i);
    }
    if (std::abs(fim.determinant()) < 1e-14) {
        throw SingularFimError("classical Fisher matrix singular at this point");
    }

    // Sigma(p_hat) = (diag(p) - p p^T)/N,  dk/dp = F_C^{-1} L, L_aj = da log p_j
    Eigen::Matrix<double, 2, Eigen::Dynamic> l(2, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        if (t.probs(i) <= 1e-15) {
            l.col(i).setZero();
            continue;
        }
        l.col(i) = t.grads.row(i).transpose() / t.probs(i);
    }
    const Eigen::MatrixXd sigma_p =
        (Eigen::MatrixXd(t.probs.asDiagonal()) - t.probs * t.probs.transpose()) /
        static_cast<double>(shots);
    const Eigen::Matrix2d f_inv = fim.inverse();
    const Eigen::Matrix<double, 2, Eigen::Dynamic> dk_dp = f_inv * l;

    CovarianceEstimate c;
    c.method = CovarianceMethod::asymptotic_eq2;
    c.shots = shots;
    c.sigma = dk_dp * sigma_p * dk_dp.transpose();
    const Eigen::Matrix2d direct = f_inv / static_cast<double>(shots);
    c.eq2_identity_gap = (c.sigma - direct).norm() / direct.norm();
    return c;
}

CovarianceEstimate monte_carlo_covariance(const Povm& p, const BlochPoint& point,
                                          std::int64_t shots, std::int64_t trials,
                                          std::uint64_t seed) {
    if (trials < 2) {
        throw std::invalid_argument("monte_carlo_covariance: trials must be >= 2");
    }
    const PureQubitState psi = excited_state(point);

    std::vector<Eigen::Vector2d> devs;
    devs.reserve(static_cast<std::size_t>(trials));
    std::int64_t failures = 0;
    std::ostringstream failure_log;
    const std::int64_t max_failures =
        std::max<std::int64_t>(1, trials / 100);  // 1% failure budget

    for (std::int64_t trial = 0; trial < trials; ++trial) {
        const std::uint64_t trial_seed = derive_stream(seed, static_cast<std::uint64_t>(trial));
        const MeasurementRecord rec = sample_outcomes(p, psi, shots, trial_seed);
        try {
            const MleResult mle = mle_estimate(p, rec, point.mass, point);
            devs.emplace_back(wrap_angle(mle.estimate.k1 - point.k1),
                              wrap_angle(mle.estimate.k2 - point.k2));
        } catch (const Error& e) {
            ++failures;
            if (failures <= 5) failure_log << "trial " << trial << ": " << e.what() << "; ";
            if (failures > max_failures) {
                throw Error("monte_carlo_covariance: trial failure rate exceeded 1% (" +
                            std::to_string(failures) + " failures): " + failure_log.str());
            }
        }
    }

    // wrap_angle yields [-pi, pi); fold the single excluded endpoint
    for (auto& d : devs) {
        for (int a = 0; a < 2; ++a) {
            if (d(a) == -std::numbers::pi) d(a) = std::numbers::pi;
        }
    }

    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    for (const auto& d : devs) mean += d;
    mean /= static_cast<double>(devs.size());

    Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
    for (const auto& d : devs) {
        const Eigen::Vector2d r = d - mean;
        cov += r * r.transpose();
    }
    cov /= static_cast<double>(devs.size() - 1);

    CovarianceEstimate c;
    c.method = CovarianceMethod::monte_carlo;
    c.shots = shots;
    c.trials = static_cast<std::int64_t>(devs.size());
    c.sigma = cov;
    c.bias = mean;
    return c;
}

double uncertainty_volume(const CovarianceEstimate& c) {
    return std::sqrt(std::max(c.sigma.determinant(), 0.0));
}

double weighted_variance(const WeightMatrix& w, const CovarianceEstimate& c) {
    return (w.m * c.sigma).trace();
}

std::string covariance_csv_header() { return "s11,s12,s22"; }

std::string covariance_csv_row(const CovarianceEstimate& c) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g", c.sigma(0, 0), c.sigma(0, 1),
                  c.sigma(1, 1));
    return buf;
}

}  // namespace topomet
