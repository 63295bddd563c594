#include "topomet/bounds.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "topomet/nelder_mead.hpp"

namespace topomet {

namespace {

constexpr double kDegenerateDet = 1e-14;

using complexd = std::complex<double>;
using Matrix2cd = Eigen::Matrix2cd;

// Omega_12 with preconditions shared by every bound below.
struct QfiContext {
    Eigen::Matrix2d f;
    double omega12;
};

QfiContext qfi_context(const BlochPoint& point) {
    const GeometricTensor q = qgt_analytic(point);
    QfiContext ctx{4.0 * q.g, q.omega12};
    if (ctx.f.determinant() <= kDegenerateDet) {
        throw DegenerateQfiError("QFI matrix is singular (Omega_12 ~ 0)");
    }
    return ctx;
}

}  // namespace

WeightMatrix make_weight(const Eigen::Matrix2d& m, std::string label) {
    if (std::abs(m(0, 1) - m(1, 0)) > 1e-10) {
        throw std::invalid_argument("weight matrix must be symmetric");
    }
    Eigen::LLT<Eigen::Matrix2d> llt(m);
    if (llt.info() != Eigen::Success) {
        throw std::invalid_argument("weight matrix must be positive-definite");
    }
    return WeightMatrix{m, std::move(label)};
}

FisherMatrix classical_fim(const Povm& p, const BlochPoint& point) {
    const TangentFrame fr = tangent_frame(point);
    FisherMatrix out;
    out.kind = FisherKind::classical_for_povm;
    for (const auto& el : p.elements) {
        const Eigen::Vector3d m = el.bloch_direction();
        const double prob = el.w * (1.0 + m.dot(fr.n)) / 2.0;
        const Eigen::Vector2d grad(0.5 * el.w * m.dot(fr.dn1), 0.5 * el.w * m.dot(fr.dn2));
        if (prob <= 1e-15) {
            if (grad.norm() > 1e-12) {
                throw SingularOutcomeError(
                    "outcome probability vanishes with non-vanishing derivative; "
                    "Fisher information divergent");
            }
            continue;  // 0/0 limit contributes nothing
        }
        out.m += grad * grad.transpose() / prob;
    }
    return out;
}

FisherMatrix qfi_matrix(const BlochPoint& point) {
    const GeometricTensor q = qgt_analytic(point);
    return FisherMatrix{4.0 * q.g, FisherKind::quantum_sld};
}

WeightMatrix qfi_weight(const BlochPoint& point) {
    const QfiContext ctx = qfi_context(point);
    return WeightMatrix{ctx.f, "W1-qfi"};
}

Eigen::Matrix2d pullback_jacobian(const BlochPoint& point) {
    const TangentFrame fr = tangent_frame(point);
    const Eigen::Vector3d& n = fr.n;
    if (std::abs(n(2)) >= 1.0 - 1e-10) {
        throw PoleSingularityError("n(k) at a spherical-coordinate pole");
    }
    const double st2 = n(0) * n(0) + n(1) * n(1);  // sin^2 theta
    const double st = std::sqrt(st2);
    Eigen::Matrix2d j;
    // theta = acos(n3), phi = atan2(n2, n1)
    j(0, 0) = -fr.dn1(2) / st;
    j(0, 1) = -fr.dn2(2) / st;
    j(1, 0) = (n(0) * fr.dn1(1) - n(1) * fr.dn1(0)) / st2;
    j(1, 1) = (n(0) * fr.dn2(1) - n(1) * fr.dn2(0)) / st2;
    return j;
}

WeightMatrix jacobian_weight(const BlochPoint& point) {
    const Eigen::Matrix2d j = pullback_jacobian(point);
    return WeightMatrix{j.transpose() * j, "W2-jacobian"};
}

double sld_crb(const WeightMatrix& w, const BlochPoint& point) {
    const QfiContext ctx = qfi_context(point);
    return (w.m * ctx.f.inverse()).trace();
}

double r_parameter(const FisherMatrix& qfi, double omega12) {
    const double det = qfi.m.determinant();
    if (det <= kDegenerateDet) {
        throw DegenerateQfiError("QFI matrix is singular (Omega_12 ~ 0)");
    }
    return 2.0 * std::abs(omega12) / std::sqrt(det);
}

double r_parameter(const BlochPoint& point) {
    const QfiContext ctx = qfi_context(point);
    return r_parameter(FisherMatrix{ctx.f, FisherKind::quantum_sld}, ctx.omega12);
}

double holevo_bound(const WeightMatrix& w, const FisherMatrix& qfi, double omega12) {
    const double det = qfi.m.determinant();
    if (det <= kDegenerateDet) {
        throw DegenerateQfiError("QFI matrix is singular (Omega_12 ~ 0)");
    }
    const double detw = w.m.determinant();
    return (w.m * qfi.m.inverse()).trace() + 4.0 * std::abs(omega12) * std::sqrt(detw) / det;
}

double holevo_bound(const WeightMatrix& w, const BlochPoint& point) {
    const QfiContext ctx = qfi_context(point);
    return holevo_bound(w, FisherMatrix{ctx.f, FisherKind::quantum_sld}, ctx.omega12);
}

double holevo_variational(const WeightMatrix& w, const BlochPoint& point,
                          const Eigen::Vector2d& initial) {
    const QfiContext ctx = qfi_context(point);
    const TangentFrame fr = tangent_frame(point);
    const PureQubitState psi = excited_state(point);
    const Eigen::Matrix2d f_inv = ctx.f.inverse();

    // Local unbiasedness x_a . db n = delta_ab pins the tangential parts;
    // the remaining freedom is a multiple of n per observable.
    const Eigen::Vector3d x1_base = f_inv(0, 0) * fr.dn1 + f_inv(0, 1) * fr.dn2;
    const Eigen::Vector3d x2_base = f_inv(1, 0) * fr.dn1 + f_inv(1, 1) * fr.dn2;

    const Matrix2cd sx = (Matrix2cd() << 0, 1, 1, 0).finished();
    const Matrix2cd sy = (Matrix2cd() << 0, complexd(0, -1), complexd(0, 1), 0).finished();
    const Matrix2cd sz = (Matrix2cd() << 1, 0, 0, -1).finished();
    const Matrix2cd id = Matrix2cd::Identity();

    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(w.m);
    const Eigen::Matrix2d sqrt_w = es.operatorSqrt();

    const auto objective = [&](const Eigen::VectorXd& t) {
        const Eigen::Vector3d xv[2] = {x1_base + t(0) * fr.n, x2_base + t(1) * fr.n};
        Matrix2cd X[2];
        for (int a = 0; a < 2; ++a) {
            const double x0 = -xv[a].dot(fr.n);  // <psi|X|psi> = 0
            X[a] = x0 * id + xv[a](0) * sx + xv[a](1) * sy + xv[a](2) * sz;
        }
        Matrix2cd z;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                z(a, b) = psi.amplitudes.dot(X[a] * X[b] * psi.amplitudes);
            }
        }
        const Eigen::Matrix2d re = z.real();
        const Eigen::Matrix2d im = z.imag();
        const Eigen::Matrix2d im_w = sqrt_w * im * sqrt_w;
        const Eigen::JacobiSVD<Eigen::Matrix2d> svd(im_w);
        return (w.m * re).trace() + svd.singularValues().sum();
    };

    NelderMeadOptions opts;
    opts.tolerance = 1e-8;
    opts.max_iterations = 500;
    const NelderMeadResult res = nelder_mead(objective, initial, opts);
    if (!res.converged) {
        throw NonConvergenceError("Holevo variational search did not reach tolerance");
    }
    return res.value;
}

double berry_bound(const BlochPoint& point, long long shots) {
    if (shots < 1) {
        throw std::invalid_argument("berry_bound: shot count must be >= 1");
    }
    const GeometricTensor q = qgt_analytic(point);
    if (std::abs(q.omega12) < 1e-12) {
        throw DegenerateQfiError("Berry curvature vanishes; bound infinite");
    }
    return 1.0 / (2.0 * static_cast<double>(shots) * std::abs(q.omega12));
}

BoundsReport bounds_report(const WeightMatrix& w, const BlochPoint& point, long long shots) {
    BoundsReport r;
    r.sld_crb = sld_crb(w, point);
    r.holevo = holevo_bound(w, point);
    r.r_param = r_parameter(point);
    r.berry_bound = berry_bound(point, shots);
    return r;
}

}  // namespace topomet
