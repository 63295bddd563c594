#include "topomet/band_geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace topomet {

namespace {

constexpr double kGaplessTol = 1e-12;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

using complexd = std::complex<double>;

Eigen::Vector3d d_of(const BlochPoint& p) {
    return {std::sin(p.k1), std::sin(p.k2), p.mass - std::cos(p.k1) - std::cos(p.k2)};
}

Eigen::Vector3d d1_of(const BlochPoint& p) {
    return {std::cos(p.k1), 0.0, std::sin(p.k1)};
}

Eigen::Vector3d d2_of(const BlochPoint& p) {
    return {0.0, std::cos(p.k2), std::sin(p.k2)};
}

void require_noncritical(double mass) {
    for (double c : {0.0, 2.0, -2.0}) {
        if (std::abs(mass - c) <= 1e-6) {
            throw CriticalMassError("mass " + std::to_string(mass) +
                                    " is at or near a gap closing");
        }
    }
}

}  // namespace

double wrap_angle(double a) {
    double w = a - kTwoPi * std::floor((a + std::numbers::pi) / kTwoPi);
    // floor rounding can land exactly on +pi
    if (w >= std::numbers::pi) w -= kTwoPi;
    return w;
}

BlochPoint make_bloch_point(double k1, double k2, double mass) {
    return {wrap_angle(k1), wrap_angle(k2), mass};
}

Eigen::Vector3d PureQubitState::bloch_vector() const {
    const complexd a = amplitudes(0);
    const complexd b = amplitudes(1);
    const complexd ab = std::conj(a) * b;
    return {2.0 * ab.real(), 2.0 * ab.imag(), std::norm(a) - std::norm(b)};
}

BlochVector bloch_vector(const BlochPoint& p) {
    BlochVector out;
    out.d = d_of(p);
    const double r = out.d.norm();
    out.gap = 2.0 * r;
    if (r < kGaplessTol) {
        throw GaplessPointError("gapless point: |d| < 1e-12, unit vector undefined");
    }
    out.n = out.d / r;
    return out;
}

TangentFrame tangent_frame(const BlochPoint& p) {
    const Eigen::Vector3d d = d_of(p);
    const double r = d.norm();
    if (r < kGaplessTol) {
        throw GaplessPointError("gapless point: tangent frame undefined");
    }
    const Eigen::Vector3d n = d / r;
    const Eigen::Vector3d e1 = d1_of(p);
    const Eigen::Vector3d e2 = d2_of(p);
    TangentFrame f;
    f.n = n;
    f.dn1 = (e1 - n * n.dot(e1)) / r;
    f.dn2 = (e2 - n * n.dot(e2)) / r;
    return f;
}

PureQubitState spin_aligned_state(const Eigen::Vector3d& direction) {
    const double r = direction.norm();
    if (r < kGaplessTol) {
        throw GaplessPointError("spin direction has vanishing norm");
    }
    // Branch on the hemisphere so the unnormalized eigenvector never
    // degenerates: (r + d3, d1 + i d2) for the north, (d1 - i d2, r - d3)
    // for the south.
    Eigen::Vector2cd v;
    if (direction(2) >= 0.0) {
        v(0) = complexd(r + direction(2), 0.0);
        v(1) = complexd(direction(0), direction(1));
    } else {
        v(0) = complexd(direction(0), -direction(1));
        v(1) = complexd(r - direction(2), 0.0);
    }
    v.normalize();
    // gauge: first component with |.| > 1e-12 made real non-negative
    for (int i = 0; i < 2; ++i) {
        const double m = std::abs(v(i));
        if (m > 1e-12) {
            v *= std::conj(v(i)) / m;
            break;
        }
    }
    return PureQubitState{v};
}

PureQubitState excited_state(const BlochPoint& p) {
    return spin_aligned_state(d_of(p));
}

GeometricTensor qgt_analytic(const BlochPoint& p) {
    const TangentFrame f = tangent_frame(p);
    GeometricTensor out;
    out.g(0, 0) = 0.25 * f.dn1.dot(f.dn1);
    out.g(0, 1) = 0.25 * f.dn1.dot(f.dn2);
    out.g(1, 0) = out.g(0, 1);
    out.g(1, 1) = 0.25 * f.dn2.dot(f.dn2);
    // Omega_12 = -(1/2) n . (d1 n x d2 n) = -d . (d1 d x d2 d) / (2 |d|^3)
    const Eigen::Vector3d d = d_of(p);
    const double r = d.norm();
    out.omega12 = -d.dot(d1_of(p).cross(d2_of(p))) / (2.0 * r * r * r);
    return out;
}

namespace {

complexd overlap(const PureQubitState& a, const PureQubitState& b) {
    return a.amplitudes.dot(b.amplitudes);  // Eigen's dot conjugates the left side
}

PureQubitState state_at(const BlochPoint& p, double dk1, double dk2) {
    return excited_state(BlochPoint{p.k1 + dk1, p.k2 + dk2, p.mass});
}

}  // namespace

GeometricTensor qgt_fidelity(const BlochPoint& p, double delta) {
    if (delta <= 0.0) {
        throw std::invalid_argument("qgt_fidelity: delta must be positive");
    }
    const PureQubitState center = excited_state(p);

    const auto infidelity = [&](double dk1, double dk2) {
        const double f = std::norm(overlap(center, state_at(p, dk1, dk2)));
        return 1.0 - f;
    };
    // central second differences cancel the cubic term
    const auto quad_form = [&](double v1, double v2) {
        return 0.5 * (infidelity(v1, v2) + infidelity(-v1, -v2));
    };

    const double d2 = delta * delta;
    GeometricTensor out;
    const double g11 = quad_form(delta, 0.0) / d2;
    const double g22 = quad_form(0.0, delta) / d2;
    const double qpp = quad_form(delta, delta) / d2;   // g11 + g22 + 2 g12
    const double qpm = quad_form(delta, -delta) / d2;  // g11 + g22 - 2 g12
    out.g(0, 0) = g11;
    out.g(1, 1) = g22;
    out.g(0, 1) = 0.25 * (qpp - qpm);
    out.g(1, 0) = out.g(0, 1);

    // plaquette of side delta centered at k
    const double h = 0.5 * delta;
    const PureQubitState c1 = state_at(p, -h, -h);
    const PureQubitState c2 = state_at(p, +h, -h);
    const PureQubitState c3 = state_at(p, +h, +h);
    const PureQubitState c4 = state_at(p, -h, +h);
    const complexd prod =
        overlap(c1, c2) * overlap(c2, c3) * overlap(c3, c4) * overlap(c4, c1);
    const double phase = std::arg(prod);
    if (std::abs(phase) > std::numbers::pi / 2.0) {
        throw StepTooLargeError("plaquette Berry phase exceeds pi/2; reduce delta");
    }
    out.omega12 = -phase / d2;
    return out;
}

int chern_number(double mass, int grid_n) {
    if (grid_n < 8) {
        throw std::invalid_argument("chern_number: grid_n must be >= 8");
    }
    require_noncritical(mass);

    const double h = kTwoPi / grid_n;
    std::vector<PureQubitState> states(static_cast<std::size_t>(grid_n) * grid_n);
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            const double k1 = -std::numbers::pi + (i + 0.5) * h;
            const double k2 = -std::numbers::pi + (j + 0.5) * h;
            states[static_cast<std::size_t>(i) * grid_n + j] =
                excited_state(BlochPoint{k1, k2, mass});
        }
    }
    const auto at = [&](int i, int j) -> const PureQubitState& {
        return states[static_cast<std::size_t>((i + grid_n) % grid_n) * grid_n +
                      (j + grid_n) % grid_n];
    };

    double total = 0.0;  // accumulated in fixed index order
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            const complexd prod = overlap(at(i, j), at(i + 1, j)) *
                                  overlap(at(i + 1, j), at(i + 1, j + 1)) *
                                  overlap(at(i + 1, j + 1), at(i, j + 1)) *
                                  overlap(at(i, j + 1), at(i, j));
            total += std::arg(prod);
        }
    }
    const double raw = -total / kTwoPi;
    const double rounded = std::round(raw);
    if (std::abs(raw - rounded) > 1e-3) {
        throw NonQuantizedError("lattice field-strength sum is not integer: " +
                                std::to_string(raw) + "; increase grid_n");
    }
    return static_cast<int>(rounded);
}

double quantum_volume(double mass, int grid_n) {
    if (grid_n < 8) {
        throw std::invalid_argument("quantum_volume: grid_n must be >= 8");
    }
    require_noncritical(mass);

    const double h = kTwoPi / grid_n;
    double sum = 0.0;
    for (int i = 0; i < grid_n; ++i) {
        for (int j = 0; j < grid_n; ++j) {
            const double k1 = -std::numbers::pi + (i + 0.5) * h;
            const double k2 = -std::numbers::pi + (j + 0.5) * h;
            const GeometricTensor q = qgt_analytic(BlochPoint{k1, k2, mass});
            const double det = q.g.determinant();
            sum += std::sqrt(std::max(det, 0.0));
        }
    }
    return sum * h * h;
}

}  // namespace topomet
