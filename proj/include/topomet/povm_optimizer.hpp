#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "topomet/bounds.hpp"
#include "topomet/povm.hpp"

namespace topomet {

enum class ObjectiveKind { det_fim, weighted_crb };

struct OptimizationResult {
    Povm povm;
    double objective = 0.0;  // det F_C, or Tr(W F_C^-1)
    ObjectiveKind kind = ObjectiveKind::det_fim;
    int iterations = 0;
    bool converged = false;
};

// Solves sum w_i = 2, sum w_i m_i = 0 for non-negative weights over the
// given Bloch directions (exactly solvable iff 0 lies in their convex
// hull, which forces the directions to be coplanar through the origin).
// Throws InfeasibleDirectionsError carrying a separating direction u with
// u.m_i > 0 for all i when no solution exists.
Povm feasible_povm(const std::array<Eigen::Vector3d, 3>& directions);

// Best-of-restarts simplex search for the POVM maximizing det F_C over the
// 3-element family; the first restart starts at the trine, so the returned
// objective never falls below the trine's. `trace`, when non-null, receives
// (evaluation index, objective) for every feasible objective evaluation.
OptimizationResult optimize_det_fim(const BlochPoint& point, int restarts, std::uint64_t seed,
                                    std::vector<std::pair<int, double>>* trace = nullptr);

// Same search minimizing Tr(W F_C^-1); saturates the Holevo bound for this
// pure-state family.
OptimizationResult optimize_weighted(const WeightMatrix& w, const BlochPoint& point,
                                     int restarts, std::uint64_t seed,
                                     std::vector<std::pair<int, double>>* trace = nullptr);

}  // namespace topomet
