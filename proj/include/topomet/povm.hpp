#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "topomet/band_geometry.hpp"

#include "json.hpp"

namespace topomet {

// One rank-1 POVM element Pi = |e><e| with |e> = r (cos(theta/2)|0> +
// sin(theta/2) e^{i phi} |-1>) and weight w = r^2. Its Bloch direction is
// m = (sin t cos p, sin t sin p, cos t).
struct PovmElement {
    double w = 0.0;
    double theta = 0.0;
    double phi = 0.0;

    Eigen::Vector3d bloch_direction() const;
    Eigen::Vector2cd ket() const;  // the unnormalized vector |e>
};

struct Povm {
    std::vector<PovmElement> elements;
    std::string label = "custom";

    std::size_t size() const { return elements.size(); }

    // m >= 3 outcomes are needed to estimate both momentum components.
    bool estimation_ready() const { return elements.size() >= 3; }

    // true when some element carries (numerically) zero weight
    bool degenerate(double tol = 1e-12) const;
};

// Returns the POVM unchanged iff sum w = 2, sum w m = 0 and w >= 0 all hold
// (tolerance 1e-10); otherwise throws NegativeWeightError,
// WeightSumViolation or CompletenessViolation, in that order of checks.
Povm validate(Povm p);

// Three elements, w = 2/3, phi = 0, theta in {0, +2pi/3, -2pi/3}.
Povm trine_povm();

// Four elements, w = 1/2, Bloch directions at the regular tetrahedron
// vertices {(1,1,1),(1,-1,-1),(-1,1,-1),(-1,-1,1)}/sqrt(3).
Povm sic_povm();

// Born probabilities p_i = w_i (1 + m_i . n_psi)/2. Values below 1e-15 are
// clamped to zero and the vector renormalized.
Eigen::VectorXd outcome_probabilities(const Povm& p, const PureQubitState& s);

// Orthonormal triple {|u_i>} in the three-level space {|0>,|-1>,|+1>} whose
// projections onto the first two coordinates are the |e_i>.
struct NaimarkFrame {
    std::array<Eigen::Vector3cd, 3> vectors;
};

NaimarkFrame naimark_dilation(const Povm& p);

// Rank (0 or 1, never 2) of the classical Fisher matrix of a two-outcome
// projective measurement along `axis` on the excited state at p.
int projective_fim_rank(const BlochPoint& p, const Eigen::Vector3d& axis);

// JSON wire format: {"elements": [{"w":..., "theta":..., "phi":...}]}
void to_json(nlohmann::json& j, const Povm& p);
void from_json(const nlohmann::json& j, Povm& p);

}  // namespace topomet
