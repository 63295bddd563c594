#pragma once

#include <Eigen/Core>
#include <complex>

#include "topomet/errors.hpp"

namespace topomet {

// Two-band Bloch model H(k) = d(k).sigma with
//   d(k) = (sin k1, sin k2, M - cos k1 - cos k2),
// the lattice massive-Dirac / Chern-insulator Hamiltonian. All geometric
// quantities below refer to its upper (positive-energy) band.

// A point of the model configuration space: quasi-momentum on the torus
// plus the mass parameter. k1, k2 are kept canonically wrapped to [-pi, pi).
struct BlochPoint {
    double k1 = 0.0;
    double k2 = 0.0;
    double mass = 0.0;
};

// Wraps an angle into [-pi, pi).
double wrap_angle(double a);

BlochPoint make_bloch_point(double k1, double k2, double mass);

struct BlochVector {
    Eigen::Vector3d d;   // coefficient vector of the Pauli expansion
    Eigen::Vector3d n;   // d / |d|, defined only when gap > 0
    double gap = 0.0;    // spectral gap 2|d|
};

// Unit Bloch vector together with its quasi-momentum derivatives,
// d_a n = (1 - n n^T) d_a d / |d|. Shared by the measurement and bound
// computations, which only ever need first derivatives.
struct TangentFrame {
    Eigen::Vector3d n;
    Eigen::Vector3d dn1;
    Eigen::Vector3d dn2;
};

// Normalized two-component state on the basis {|0>, |-1>}, gauge-fixed so
// that the first component of magnitude > 1e-12 is real and non-negative.
struct PureQubitState {
    Eigen::Vector2cd amplitudes;

    // (2 Re a*b, 2 Im a*b, |a|^2 - |b|^2)
    Eigen::Vector3d bloch_vector() const;
};

// Quantum geometric tensor of the upper band at one k-point: real part is
// the quantum metric g (symmetric PSD), imaginary part the Berry curvature
// Omega_12 = -2 Im <d1 psi | d2 psi>.
struct GeometricTensor {
    Eigen::Matrix2d g;
    double omega12 = 0.0;
};

// Throws GaplessPointError when |d| < 1e-12.
BlochVector bloch_vector(const BlochPoint& p);

TangentFrame tangent_frame(const BlochPoint& p);

// +1 eigenstate of (direction . sigma), gauge-fixed. `direction` need not
// be normalized; throws GaplessPointError when its norm is < 1e-12.
PureQubitState spin_aligned_state(const Eigen::Vector3d& direction);

// Upper-band eigenstate of H(k), i.e. spin_aligned_state(d(k)).
PureQubitState excited_state(const BlochPoint& p);

// Closed-form metric and curvature from the analytic derivatives of n(k).
GeometricTensor qgt_analytic(const BlochPoint& p);

// Metric from second-order central fidelity differences and curvature from
// the phase of the gauge-invariant plaquette overlap product centered at k;
// both converge to qgt_analytic with O(delta^2) error. The returned g is
// symmetric by construction. Throws StepTooLargeError when the plaquette
// phase exceeds pi/2.
GeometricTensor qgt_fidelity(const BlochPoint& p, double delta);

// First Chern number of the upper band via the gauge-invariant lattice
// field-strength (plaquette-phase) sum on a grid_n x grid_n midpoint grid.
// Exact integer; throws NonQuantizedError if the raw sum is further than
// 1e-3 from an integer, CriticalMassError near the gapless masses {0, +-2}.
int chern_number(double mass, int grid_n);

// Midpoint Riemann sum of sqrt(det g) over the Brillouin zone.
double quantum_volume(double mass, int grid_n);

}  // namespace topomet
