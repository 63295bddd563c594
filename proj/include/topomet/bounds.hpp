#pragma once

#include <Eigen/Core>
#include <string>

#include "topomet/band_geometry.hpp"
#include "topomet/povm.hpp"

namespace topomet {

enum class FisherKind { classical_for_povm, quantum_sld };

// Real symmetric PSD 2x2 information matrix in units of 1/k^2.
struct FisherMatrix {
    Eigen::Matrix2d m = Eigen::Matrix2d::Zero();
    FisherKind kind = FisherKind::classical_for_povm;
};

// Positive-definite weight for scalarizing the covariance matrix.
struct WeightMatrix {
    Eigen::Matrix2d m = Eigen::Matrix2d::Identity();
    std::string label = "custom";
};

// Throws if `m` is not symmetric positive-definite (Cholesky must succeed).
WeightMatrix make_weight(const Eigen::Matrix2d& m, std::string label = "custom");

// All scalar bound values at one (k, M, W, N).
struct BoundsReport {
    double sld_crb = 0.0;      // C^S = Tr(W F^-1)
    double holevo = 0.0;       // C^H
    double r_param = 0.0;      // R in [0, 1]
    double berry_bound = 0.0;  // 1 / (2 N |Omega_12|)
};

// (F_C)_ab = sum_i (da p_i)(db p_i)/p_i with analytic Born-rule derivatives
// da p_i = w_i m_i . da n / 2. Outcomes with p_i ~ 0 and vanishing gradient
// contribute zero; a vanishing outcome with non-vanishing gradient has
// divergent information and raises SingularOutcomeError.
FisherMatrix classical_fim(const Povm& p, const BlochPoint& point);

// Quantum Fisher information matrix 4 g(k) of the upper band.
FisherMatrix qfi_matrix(const BlochPoint& point);

// The QFI as a weight matrix (the paper's W1 choice).
WeightMatrix qfi_weight(const BlochPoint& point);

// W2 = J^T J with J the Jacobian of k -> (theta(k), phi(k)), the spherical
// coordinates of n(k). Throws PoleSingularityError when |n3| >= 1 - 1e-10.
WeightMatrix jacobian_weight(const BlochPoint& point);

// The Jacobian J itself; exposed because tests check 4g = J^T diag(1, sin^2
// theta) J against a finite-difference oracle.
Eigen::Matrix2d pullback_jacobian(const BlochPoint& point);

double sld_crb(const WeightMatrix& w, const BlochPoint& point);

// Largest-magnitude eigenvalue of 2i F^-1 Omega = 2|Omega_12|/sqrt(det F).
double r_parameter(const BlochPoint& point);
double r_parameter(const FisherMatrix& qfi, double omega12);

// Closed form of the attainable (Holevo) bound for this two-parameter
// pure-state family: Tr(W F^-1) + 4 |Omega_12| sqrt(det W) / det F. The
// variational routine below certifies the formula numerically.
double holevo_bound(const WeightMatrix& w, const BlochPoint& point);
double holevo_bound(const WeightMatrix& w, const FisherMatrix& qfi, double omega12);

// Minimizes Tr(W Re Z[X]) + ||sqrt(W) Im Z[X] sqrt(W)||_1 over pairs of
// Hermitian observables satisfying the local unbiasedness constraints,
// which are eliminated linearly; the residual two-dimensional search is run
// to tolerance 1e-8 from the given deterministic start.
double holevo_variational(const WeightMatrix& w, const BlochPoint& point,
                          const Eigen::Vector2d& initial = Eigen::Vector2d::Zero());

// r.h.s. of the Berry-curvature uncertainty bound, 1/(2 N |Omega_12|).
double berry_bound(const BlochPoint& point, long long shots);

BoundsReport bounds_report(const WeightMatrix& w, const BlochPoint& point, long long shots);

}  // namespace topomet
