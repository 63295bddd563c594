#include "topomet/povm.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <sstream>

namespace topomet {

namespace {

constexpr double kConstraintTol = 1e-10;

using complexd = std::complex<double>;

}  // namespace

Eigen::Vector3d PovmElement::bloch_direction() const {
    const double st = std::sin(theta);
    return {st * std::cos(phi), st * std::sin(phi), std::cos(theta)};
}

Eigen::Vector2cd PovmElement::ket() const {
    const double r = std::sqrt(w);
    Eigen::Vector2cd e;
    e(0) = complexd(r * std::cos(theta / 2.0), 0.0);
    e(1) = std::polar(r * std::sin(theta / 2.0), phi);
    return e;
}

bool Povm::degenerate(double tol) const {
    for (const auto& el : elements) {
        if (el.w < tol) return true;
    }
    return false;
}

Povm validate(Povm p) {
    double wsum = 0.0;
    Eigen::Vector3d msum = Eigen::Vector3d::Zero();
    for (const auto& el : p.elements) {
        if (el.w < -kConstraintTol) {
            throw NegativeWeightError("POVM element weight is negative: " +
                                      std::to_string(el.w));
        }
        wsum += el.w;
        msum += el.w * el.bloch_direction();
    }
    if (std::abs(wsum - 2.0) > kConstraintTol) {
        throw WeightSumViolation("POVM weights sum to " + std::to_string(wsum) +
                                 ", expected 2");
    }
    if (msum.norm() > kConstraintTol) {
        std::ostringstream os;
        os << "weighted Bloch directions do not sum to zero: |sum| = " << msum.norm();
        throw CompletenessViolation(os.str());
    }
    return p;
}

Povm trine_povm() {
    Povm p;
    p.label = "trine";
    const double w = 2.0 / 3.0;
    const double t = 2.0 * std::numbers::pi / 3.0;
    p.elements = {{w, 0.0, 0.0}, {w, t, 0.0}, {w, -t, 0.0}};
    return p;
}

Povm sic_povm() {
    Povm p;
    p.label = "sic";
    const double s = 1.0 / std::sqrt(3.0);
    const Eigen::Vector3d dirs[4] = {
        {s, s, s}, {s, -s, -s}, {-s, s, -s}, {-s, -s, s}};
    for (const auto& m : dirs) {
        PovmElement el;
        el.w = 0.5;
        el.theta = std::acos(m(2));
        el.phi = std::atan2(m(1), m(0));
        p.elements.push_back(el);
    }
    return p;
}

Eigen::VectorXd outcome_probabilities(const Povm& p, const PureQubitState& s) {
    const Eigen::Vector3d n = s.bloch_vector();
    Eigen::VectorXd probs(static_cast<Eigen::Index>(p.size()));
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto& el = p.elements[i];
        double v = el.w * (1.0 + el.bloch_direction().dot(n)) / 2.0;
        if (v < 1e-15) v = 0.0;  // roundoff floor, keeps logs finite downstream
        probs(static_cast<Eigen::Index>(i)) = v;
    }
    const double total = probs.sum();
    if (total > 0.0) probs /= total;
    return probs;
}

NaimarkFrame naimark_dilation(const Povm& p) {
    validate(p);
    if (p.size() != 3) {
        throw DilationFailure("naimark_dilation expects a 3-element POVM, got " +
                              std::to_string(p.size()));
    }
    // Columns of the top 2x3 block are the |e_i>; completeness makes its two
    // rows orthonormal. Their complex cross product (Hermitian-orthogonal to
    // both rows) is the third row that completes a unitary.
    Eigen::Matrix<complexd, 2, 3> top;
    for (int i = 0; i < 3; ++i) {
        top.col(i) = p.elements[static_cast<std::size_t>(i)].ket();
    }
    const Eigen::Vector3cd r1 = top.row(0).transpose();
    const Eigen::Vector3cd r2 = top.row(1).transpose();
    Eigen::Vector3cd c = r1.cross(r2);
    const double cn = c.norm();
    if (cn < 1e-12) {
        throw DilationFailure("completion row vanishes; POVM block is rank-deficient");
    }
    c /= cn;
    // deterministic output: first non-negligible component real positive
    for (int i = 0; i < 3; ++i) {
        if (std::abs(c(i)) > 1e-12) {
            c *= std::conj(c(i)) / std::abs(c(i));
            break;
        }
    }
    NaimarkFrame f;
    for (int i = 0; i < 3; ++i) {
        f.vectors[static_cast<std::size_t>(i)] =
            Eigen::Vector3cd(top(0, i), top(1, i), c(i));
    }
    return f;
}

int projective_fim_rank(const BlochPoint& p, const Eigen::Vector3d& axis) {
    const TangentFrame f = tangent_frame(p);
    const Eigen::Vector3d a = axis.normalized();
    // p+ = (1 + a.n)/2 and p- = 1 - p+; the 2x2 FIM is the outer product of
    // grad p+ scaled by 1/(p+ p-), so its rank is that of the gradient.
    const Eigen::Vector2d grad(0.5 * a.dot(f.dn1), 0.5 * a.dot(f.dn2));
    return grad.norm() > 1e-12 ? 1 : 0;
}

void to_json(nlohmann::json& j, const Povm& p) {
    nlohmann::json els = nlohmann::json::array();
    for (const auto& el : p.elements) {
        els.push_back({{"w", el.w}, {"theta", el.theta}, {"phi", el.phi}});
    }
    j = nlohmann::json{{"elements", els}};
}

void from_json(const nlohmann::json& j, Povm& p) {
    p.elements.clear();
    p.label = "custom";
    for (const auto& el : j.at("elements")) {
        p.elements.push_back(
            {el.at("w").get<double>(), el.at("theta").get<double>(), el.at("phi").get<double>()});
    }
}

}  // namespace topomet
