#include "topomet/bounds.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace topomet;
namespace tt = topomet::testing;

namespace {

constexpr double kPi = std::numbers::pi;

double min_eigenvalue(const Eigen::Matrix2d& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
    return es.eigenvalues().minCoeff();
}

WeightMatrix random_weight(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Eigen::Matrix2d a;
    a << u(rng), u(rng), u(rng), u(rng);
    return make_weight(a * a.transpose() + 0.1 * Eigen::Matrix2d::Identity());
}

}  // namespace

TEST_CASE("classical Fisher matrix") {
    const BlochPoint p{1.0, 0.5, 1.0};

    SUBCASE("trine FIM is PSD and dominated by the QFI") {
        const FisherMatrix fc = classical_fim(trine_povm(), p);
        const FisherMatrix fq = qfi_matrix(p);
        CHECK(std::abs(fc.m(0, 1) - fc.m(1, 0)) < 1e-12);
        CHECK(min_eigenvalue(fc.m) >= -1e-12);
        CHECK(min_eigenvalue(fq.m - fc.m) >= -1e-10);
    }
    SUBCASE("matrix order F_C <= QFI holds for trine, SIC and random POVMs") {
        std::mt19937_64 rng(3);
        for (const auto& pt : tt::random_gapped_points(50, 41, {.min_d_norm = 0.2})) {
            const FisherMatrix fq = qfi_matrix(pt);
            CHECK(min_eigenvalue(fq.m - classical_fim(trine_povm(), pt).m) >= -1e-10);
            CHECK(min_eigenvalue(fq.m - classical_fim(sic_povm(), pt).m) >= -1e-10);
            CHECK(min_eigenvalue(fq.m - classical_fim(tt::random_feasible_povm(rng), pt).m) >=
                  -1e-10);
        }
    }
    SUBCASE("two-outcome projective POVM has singular FIM") {
        Povm proj;
        proj.elements = {{1.0, 0.7, 0.3}, {1.0, kPi - 0.7, 0.3 + kPi}};
        validate(proj);
        const FisherMatrix fc = classical_fim(proj, p);
        CHECK(std::abs(fc.m.determinant()) < 1e-12);
    }
    SUBCASE("elements along n carry no information") {
        const BlochVector b = bloch_vector(p);
        // projective measurement along n: gradients vanish identically
        Povm along;
        const double th = std::acos(std::clamp(b.n(2), -1.0, 1.0));
        const double ph = std::atan2(b.n(1), b.n(0));
        along.elements = {{1.0, th, ph}, {1.0, kPi - th, ph + kPi}};
        validate(along);
        CHECK(classical_fim(along, p).m.norm() < 1e-12);
    }
    SUBCASE("matches a finite-difference Born-rule oracle") {
        // derivatives of p_i(k) by central differences of explicit Born
        // probabilities, including a random global phase on the state
        std::mt19937_64 rng(51);
        std::uniform_real_distribution<double> u(-kPi, kPi);
        const double h = 1e-5;
        for (const auto& pt : tt::random_gapped_points(20, 47, {.min_d_norm = 0.4})) {
            const Povm povm = tt::random_feasible_povm(rng);
            const auto probs = [&](double k1, double k2) {
                Eigen::Vector2cd psi = tt::eig_excited_state(k1, k2, pt.mass);
                psi *= std::polar(1.0, u(rng));  // gauge-invariance probe
                Eigen::VectorXd out(static_cast<Eigen::Index>(povm.size()));
                for (std::size_t i = 0; i < povm.size(); ++i) {
                    out(static_cast<Eigen::Index>(i)) =
                        std::norm(povm.elements[i].ket().dot(psi));
                }
                return out;
            };
            const Eigen::VectorXd p0 = probs(pt.k1, pt.k2);
            const Eigen::VectorXd g1 =
                (probs(pt.k1 + h, pt.k2) - probs(pt.k1 - h, pt.k2)) / (2 * h);
            const Eigen::VectorXd g2 =
                (probs(pt.k1, pt.k2 + h) - probs(pt.k1, pt.k2 - h)) / (2 * h);
            Eigen::Matrix2d fd = Eigen::Matrix2d::Zero();
            for (Eigen::Index i = 0; i < p0.size(); ++i) {
                const Eigen::Vector2d grad(g1(i), g2(i));
                fd += grad * grad.transpose() / p0(i);
            }
            CHECK((classical_fim(povm, pt).m - fd).norm() < 1e-5);
        }
    }
}

TEST_CASE("QFI matrix and determinant identities") {
    SUBCASE("det chain det F = 16 det g = 4 omega^2") {
        for (const auto& pt : tt::random_gapped_points(500, 43)) {
            const GeometricTensor q = qgt_analytic(pt);
            const FisherMatrix f = qfi_matrix(pt);
            CHECK(f.kind == FisherKind::quantum_sld);
            CHECK((f.m - 4.0 * q.g).norm() < 1e-14);
            const double d = f.m.determinant();
            CHECK(d == doctest::Approx(16.0 * q.g.determinant()).epsilon(1e-9));
            CHECK(d == doctest::Approx(4.0 * q.omega12 * q.omega12).epsilon(1e-9));
        }
    }
    SUBCASE("matches four times the fidelity metric") {
        const BlochPoint p{kPi / 2, kPi / 2, 1.0};
        const FisherMatrix f = qfi_matrix(p);
        CHECK((f.m - 4.0 * qgt_fidelity(p, 1e-3).g).norm() < 1e-4);
    }
}

TEST_CASE("SLD bound") {
    const BlochPoint p{1.0, 0.5, 1.0};
    const FisherMatrix f = qfi_matrix(p);

    CHECK(sld_crb(make_weight(f.m, "W1-qfi"), p) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(sld_crb(make_weight(0.5 * f.m), p) == doctest::Approx(1.0).epsilon(1e-12));

    SUBCASE("independent 2x2 arithmetic for W2") {
        const WeightMatrix w2 = jacobian_weight(p);
        // adjugate inverse by hand
        const double det = f.m(0, 0) * f.m(1, 1) - f.m(0, 1) * f.m(1, 0);
        Eigen::Matrix2d inv;
        inv << f.m(1, 1) / det, -f.m(0, 1) / det, -f.m(1, 0) / det, f.m(0, 0) / det;
        const double expected = (w2.m * inv).trace();
        CHECK(expected > 0.0);
        CHECK(sld_crb(w2, p) == doctest::Approx(expected).epsilon(1e-12));
    }
    SUBCASE("degenerate QFI is rejected") {
        CHECK_THROWS_AS(sld_crb(make_weight(Eigen::Matrix2d::Identity()),
                                BlochPoint{kPi / 2, kPi / 2, 1.0}),
                        DegenerateQfiError);
    }
}

TEST_CASE("R parameter") {
    SUBCASE("equals 1 wherever the curvature is nonzero") {
        for (const auto& pt :
             tt::random_gapped_points(1000, 53, {.min_abs_omega = 1e-3})) {
            CHECK(std::abs(r_parameter(pt) - 1.0) < 1e-10);
        }
    }
    SUBCASE("agrees with the eigenvalue route") {
        for (const auto& pt : tt::random_gapped_points(50, 59, {.min_abs_omega = 1e-2})) {
            const GeometricTensor q = qgt_analytic(pt);
            const FisherMatrix f = qfi_matrix(pt);
            Eigen::Matrix2cd mat = Eigen::Matrix2cd::Zero();
            Eigen::Matrix2d omega;
            omega << 0.0, q.omega12, -q.omega12, 0.0;
            mat = std::complex<double>(0, 2) *
                  (f.m.inverse() * omega).cast<std::complex<double>>();
            const Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(mat);
            const double lambda_max = es.eigenvalues().cwiseAbs().maxCoeff();
            CHECK(r_parameter(pt) == doctest::Approx(lambda_max).epsilon(1e-10));
            CHECK(r_parameter(pt) <= 1.0 + 1e-10);
            CHECK(r_parameter(pt) >= 0.0);
        }
    }
    SUBCASE("doubling the metric at fixed curvature halves R") {
        const BlochPoint p{1.0, 0.5, 1.0};
        const GeometricTensor q = qgt_analytic(p);
        const FisherMatrix f = qfi_matrix(p);
        const FisherMatrix f2{2.0 * f.m, FisherKind::quantum_sld};
        CHECK(r_parameter(f2, q.omega12) ==
              doctest::Approx(0.5 * r_parameter(f, q.omega12)).epsilon(1e-12));
    }
}

TEST_CASE("Holevo bound closed form against the variational oracle") {
    const BlochPoint ref{1.0, 0.5, 1.0};
    const FisherMatrix f = qfi_matrix(ref);

    SUBCASE("W = F gives exactly 4 (twice the SLD bound)") {
        const WeightMatrix w = make_weight(f.m, "W1-qfi");
        CHECK(holevo_bound(w, ref) == doctest::Approx(4.0).epsilon(1e-12));
        CHECK(holevo_bound(w, ref) ==
              doctest::Approx((1.0 + r_parameter(ref)) * sld_crb(w, ref)).epsilon(1e-10));
        CHECK(holevo_variational(w, ref) == doctest::Approx(4.0).epsilon(1e-6));
    }
    SUBCASE("homogeneous in the weight") {
        const WeightMatrix w1 = make_weight(Eigen::Matrix2d::Identity());
        const WeightMatrix w3 = make_weight(3.0 * Eigen::Matrix2d::Identity());
        CHECK(holevo_bound(w3, ref) ==
              doctest::Approx(3.0 * holevo_bound(w1, ref)).epsilon(1e-12));
    }
    SUBCASE("W2 at the reference point matches the oracle to 1e-6") {
        const WeightMatrix w2 = jacobian_weight(ref);
        CHECK(holevo_bound(w2, ref) ==
              doctest::Approx(holevo_variational(w2, ref)).epsilon(1e-6));
    }
    SUBCASE("agreement and ordering on 100 random points and weights") {
        std::mt19937_64 rng(61);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (const auto& pt :
             tt::random_gapped_points(100, 67, {.min_d_norm = 0.2, .min_abs_omega = 1e-2})) {
            const WeightMatrix w = random_weight(rng);
            const double closed = holevo_bound(w, pt);
            const double variational =
                holevo_variational(w, pt, Eigen::Vector2d(u(rng), u(rng)));
            CHECK(closed == doctest::Approx(variational).epsilon(1e-6));
            const double sld = sld_crb(w, pt);
            CHECK(variational >= sld - 1e-8);
            CHECK(sld <= closed + 1e-8);
            CHECK(closed <= 2.0 * sld + 1e-8 * sld);  // R = 1 for this model
        }
    }
}

TEST_CASE("Berry curvature bound") {
    const BlochPoint p{1.0, 0.5, 1.0};
    SUBCASE("explicit 1/N scaling") {
        CHECK(berry_bound(p, 2000) == doctest::Approx(0.5 * berry_bound(p, 1000)));
    }
    SUBCASE("plugs in the analytic curvature") {
        const GeometricTensor q = qgt_analytic(p);
        CHECK(berry_bound(p, 1000) ==
              doctest::Approx(1.0 / (2000.0 * std::abs(q.omega12))).epsilon(1e-12));
    }
    SUBCASE("vanishing curvature is rejected") {
        CHECK_THROWS_AS(berry_bound(BlochPoint{kPi / 2, kPi / 2, 1.0}, 100),
                        DegenerateQfiError);
    }
    SUBCASE("below the uncertainty volume of every valid POVM") {
        std::mt19937_64 rng(71);
        for (const auto& pt :
             tt::random_gapped_points(1000, 73, {.min_d_norm = 0.2, .min_abs_omega = 1e-3})) {
            const Povm povm = tt::random_feasible_povm(rng);
            const double det = classical_fim(povm, pt).m.determinant();
            if (det < 1e-16) continue;  // infinite volume, bound trivially below
            const double vol = 1.0 / (1000.0 * std::sqrt(det));
            CHECK(vol > berry_bound(pt, 1000));
        }
    }
}

TEST_CASE("pullback Jacobian weight") {
    SUBCASE("identity 4g = J^T diag(1, sin^2 theta) J, fd-Jacobian oracle") {
        for (const auto& pt : tt::random_gapped_points(1000, 79, {.min_d_norm = 0.1})) {
            const BlochVector b = bloch_vector(pt);
            if (std::abs(b.n(2)) > 1.0 - 1e-6) continue;  // skip near-poles
            const Eigen::Matrix2d j = pullback_jacobian(pt);
            const double st2 = 1.0 - b.n(2) * b.n(2);
            Eigen::Matrix2d round;
            round << 1.0, 0.0, 0.0, st2;
            const Eigen::Matrix2d lhs = 4.0 * qgt_analytic(pt).g;
            CHECK((lhs - j.transpose() * round * j).norm() < 1e-8 * std::max(1.0, lhs.norm()));
        }
        // central-difference Jacobian of (theta, phi) at a reference point
        const BlochPoint pt{1.0, 0.5, 1.0};
        const double h = 1e-6;
        const auto angles = [&](double k1, double k2) {
            const Eigen::Vector3d n = tt::d_vector(k1, k2, pt.mass).normalized();
            return Eigen::Vector2d(std::acos(n(2)), std::atan2(n(1), n(0)));
        };
        Eigen::Matrix2d fd;
        fd.col(0) = (angles(pt.k1 + h, pt.k2) - angles(pt.k1 - h, pt.k2)) / (2 * h);
        fd.col(1) = (angles(pt.k1, pt.k2 + h) - angles(pt.k1, pt.k2 - h)) / (2 * h);
        CHECK((pullback_jacobian(pt) - fd).norm() < 1e-6);
    }
    SUBCASE("on the equator W2 equals the QFI") {
        // n3 = 0 along M = cos k1 + cos k2
        const double k = std::acos(0.5);
        const BlochPoint pt{k, k, 1.0};
        CHECK(std::abs(bloch_vector(pt).n(2)) < 1e-14);
        CHECK((jacobian_weight(pt).m - qfi_matrix(pt).m).norm() < 1e-10);
    }
    SUBCASE("positive definite where J is invertible") {
        for (const auto& pt : tt::random_gapped_points(100, 83, {.min_d_norm = 0.2})) {
            const BlochVector b = bloch_vector(pt);
            if (std::abs(b.n(2)) > 1.0 - 1e-6) continue;
            const Eigen::Matrix2d j = pullback_jacobian(pt);
            if (std::abs(j.determinant()) < 1e-8) continue;
            CHECK(min_eigenvalue(jacobian_weight(pt).m) > 0.0);
        }
    }
    SUBCASE("poles are rejected") {
        CHECK_THROWS_AS(jacobian_weight(make_bloch_point(kPi, kPi, 1.0)),
                        PoleSingularityError);
    }
}

TEST_CASE("bounds report ties the pieces together") {
    const BlochPoint p{1.0, 0.5, 1.0};
    const WeightMatrix w = qfi_weight(p);
    const BoundsReport r = bounds_report(w, p, 1000);
    CHECK(r.sld_crb == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(r.holevo == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(r.r_param == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.berry_bound == doctest::Approx(berry_bound(p, 1000)));
    // sandwich: C^S <= C^H <= (1+R) C^S
    CHECK(r.sld_crb <= r.holevo + 1e-8);
    CHECK(r.holevo <= (1.0 + r.r_param) * r.sld_crb + 1e-8);
}
