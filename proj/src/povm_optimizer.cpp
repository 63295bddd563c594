#include "topomet/povm_optimizer.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

#include "topomet/nelder_mead.hpp"
#include "topomet/rng.hpp"

namespace topomet {

namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Closest point to the origin on the triangle conv{a, b, c} (Ericson's
// region test). Used to certify infeasibility: if q != 0 then u = q/|q|
// satisfies u.m_i >= |q| > 0 for every vertex.
Eigen::Vector3d closest_point_on_triangle(const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                                          const Eigen::Vector3d& c) {
    const Eigen::Vector3d p = Eigen::Vector3d::Zero();
    const Eigen::Vector3d ab = b - a;
    const Eigen::Vector3d ac = c - a;
    const Eigen::Vector3d ap = p - a;

    const double d1 = ab.dot(ap);
    const double d2 = ac.dot(ap);
    if (d1 <= 0.0 && d2 <= 0.0) return a;

    const Eigen::Vector3d bp = p - b;
    const double d3 = ab.dot(bp);
    const double d4 = ac.dot(bp);
    if (d3 >= 0.0 && d4 <= d3) return b;

    const double vc = d1 * d4 - d3 * d2;
    if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return a + v * ab;
    }

    const Eigen::Vector3d cp = p - c;
    const double d5 = ab.dot(cp);
    const double d6 = ac.dot(cp);
    if (d6 >= 0.0 && d5 <= d6) return c;

    const double vb = d5 * d2 - d1 * d6;
    if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return a + w * ac;
    }

    const double va = d3 * d6 - d5 * d4;
    if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + w * (c - b);
    }

    const double denom = 1.0 / (va + vb + vc);
    const double v = vb * denom;
    const double w = vc * denom;
    return a + ab * v + ac * w;
}

PovmElement element_from(double weight, const Eigen::Vector3d& m) {
    PovmElement el;
    el.w = weight;
    el.theta = std::acos(std::clamp(m(2), -1.0, 1.0));
    el.phi = std::atan2(m(1), m(0));
    return el;
}

// Plane-constrained search coordinates: two spherical angles for the plane
// normal and one in-plane angle per element. Every valid 3-element rank-1
// POVM has coplanar directions (positive dependence), so this chart covers
// the whole feasible family while the weights stay eliminated exactly.
Povm povm_from_plane_params(const Eigen::VectorXd& x) {
    const double tu = x(0);
    const double pu = x(1);
    const Eigen::Vector3d u(std::sin(tu) * std::cos(pu), std::sin(tu) * std::sin(pu),
                            std::cos(tu));
    const Eigen::Vector3d ref =
        std::abs(u(2)) < 0.9 ? Eigen::Vector3d::UnitZ() : Eigen::Vector3d::UnitX();
    const Eigen::Vector3d e1 = u.cross(ref).normalized();
    const Eigen::Vector3d e2 = u.cross(e1);
    std::array<Eigen::Vector3d, 3> dirs;
    for (int i = 0; i < 3; ++i) {
        dirs[static_cast<std::size_t>(i)] =
            std::cos(x(2 + i)) * e1 + std::sin(x(2 + i)) * e2;
    }
    return feasible_povm(dirs);
}

// Start simplex point reproducing the trine POVM exactly (plane normal +y,
// in-plane angles -pi/2, pi/6, 5pi/6).
Eigen::VectorXd trine_start() {
    Eigen::VectorXd x(5);
    x << std::numbers::pi / 2.0, std::numbers::pi / 2.0, -std::numbers::pi / 2.0,
        std::numbers::pi / 6.0, 5.0 * std::numbers::pi / 6.0;
    return x;
}

struct SearchSetup {
    const BlochPoint& point;
    // returns +inf for infeasible / singular configurations
    std::function<double(const Povm&)> objective;
};

OptimizationResult run_search(const SearchSetup& setup, ObjectiveKind kind, int restarts,
                              std::uint64_t seed, std::vector<std::pair<int, double>>* trace) {
    if (restarts < 1) {
        throw std::invalid_argument("optimizer: restarts must be >= 1");
    }
    int eval_counter = 0;
    const auto f = [&](const Eigen::VectorXd& x) {
        double value = kInfeasible;
        try {
            const Povm povm = povm_from_plane_params(x);
            value = setup.objective(povm);
        } catch (const InfeasibleDirectionsError&) {
        } catch (const SingularFimError&) {
        } catch (const SingularOutcomeError&) {
        }
        ++eval_counter;
        if (trace != nullptr && std::isfinite(value)) {
            trace->emplace_back(eval_counter, kind == ObjectiveKind::det_fim ? -value : value);
        }
        return value;
    };

    NelderMeadOptions coarse;
    coarse.max_iterations = 300;
    coarse.tolerance = 1e-10;
    coarse.initial_step = 0.4;
    NelderMeadOptions polish;
    polish.max_iterations = 200;
    polish.tolerance = 1e-13;
    polish.initial_step = 1e-4;

    struct Candidate {
        double value;
        Povm povm;
        bool converged;
        int iterations;
    };
    std::vector<Candidate> candidates;

    int total_iterations = 0;
    for (int r = 0; r < restarts; ++r) {
        Eigen::VectorXd x0;
        if (r == 0) {
            x0 = trine_start();
        } else {
            std::mt19937_64 rng(derive_stream(seed, static_cast<std::uint64_t>(r)));
            const auto uniform = [&rng](double lo, double hi) {
                return lo + (hi - lo) * (static_cast<double>(rng() >> 11) /
                                         9007199254740992.0);
            };
            bool found = false;
            for (int attempt = 0; attempt < 64 && !found; ++attempt) {
                x0 = Eigen::VectorXd(5);
                x0(0) = std::acos(uniform(-1.0, 1.0));
                x0(1) = uniform(-std::numbers::pi, std::numbers::pi);
                for (int i = 0; i < 3; ++i) {
                    x0(2 + i) = uniform(-std::numbers::pi, std::numbers::pi);
                }
                found = std::isfinite(f(x0));
            }
            if (!found) continue;
        }
        NelderMeadResult coarse_res = nelder_mead(f, x0, coarse);
        const NelderMeadResult res = nelder_mead(f, coarse_res.x, polish);
        total_iterations += coarse_res.iterations + res.iterations;
        if (!std::isfinite(res.value)) continue;
        try {
            Povm povm = validate(povm_from_plane_params(res.x));
            candidates.push_back(
                {res.value, std::move(povm), coarse_res.converged || res.converged,
                 coarse_res.iterations + res.iterations});
        } catch (const Error&) {
        }
    }
    if (candidates.empty()) {
        throw AllRestartsInfeasibleError("no optimizer restart produced a feasible POVM");
    }

    double best = kInfeasible;
    for (const auto& c : candidates) best = std::min(best, c.value);
    // equal optima resolved by smallest serialized form, for determinism
    const Candidate* chosen = nullptr;
    std::string chosen_repr;
    for (const auto& c : candidates) {
        if (c.value > best + 1e-12 * std::max(1.0, std::abs(best))) continue;
        nlohmann::json j = c.povm;
        std::string repr = j.dump();
        if (chosen == nullptr || repr < chosen_repr) {
            chosen = &c;
            chosen_repr = std::move(repr);
        }
    }

    OptimizationResult out;
    out.povm = chosen->povm;
    out.kind = kind;
    out.objective = kind == ObjectiveKind::det_fim ? -chosen->value : chosen->value;
    out.iterations = total_iterations;
    out.converged = chosen->converged;
    return out;
}

}  // namespace

Povm feasible_povm(const std::array<Eigen::Vector3d, 3>& directions) {
    std::array<Eigen::Vector3d, 3> m;
    for (std::size_t i = 0; i < 3; ++i) m[i] = directions[i].normalized();

    Eigen::Matrix<double, 4, 3> a;
    a.row(0).setOnes();
    for (int i = 0; i < 3; ++i) a.block<3, 1>(1, i) = m[static_cast<std::size_t>(i)];
    Eigen::Vector4d rhs;
    rhs << 2.0, 0.0, 0.0, 0.0;

    const Eigen::Vector3d w = a.colPivHouseholderQr().solve(rhs);
    const double residual = (a * w - rhs).norm();
    if (residual > 1e-9 || w.minCoeff() < -1e-10) {
        const Eigen::Vector3d q = closest_point_on_triangle(m[0], m[1], m[2]);
        if (q.norm() < 1e-12) {
            // 0 sits on the hull boundary but roundoff spoiled the solve
            throw InfeasibleDirectionsError(
                "degenerate direction set: completeness system unsolvable",
                Eigen::Vector3d::UnitZ());
        }
        throw InfeasibleDirectionsError(
            "no non-negative weights satisfy completeness for these directions",
            q.normalized());
    }

    Povm p;
    for (int i = 0; i < 3; ++i) {
        p.elements.push_back(
            element_from(std::max(w(i), 0.0), m[static_cast<std::size_t>(i)]));
    }
    return validate(std::move(p));
}

OptimizationResult optimize_det_fim(const BlochPoint& point, int restarts, std::uint64_t seed,
                                    std::vector<std::pair<int, double>>* trace) {
    tangent_frame(point);  // reject gapless points up front
    SearchSetup setup{point, [&point](const Povm& povm) {
                          const FisherMatrix f = classical_fim(povm, point);
                          return -f.m.determinant();
                      }};
    return run_search(setup, ObjectiveKind::det_fim, restarts, seed, trace);
}

OptimizationResult optimize_weighted(const WeightMatrix& w, const BlochPoint& point,
                                     int restarts, std::uint64_t seed,
                                     std::vector<std::pair<int, double>>* trace) {
    tangent_frame(point);
    SearchSetup setup{point, [&w, &point](const Povm& povm) {
                          const FisherMatrix f = classical_fim(povm, point);
                          if (std::abs(f.m.determinant()) < 1e-14) {
                              return kInfeasible;
                          }
                          return (w.m * f.m.inverse()).trace();
                      }};
    return run_search(setup, ObjectiveKind::weighted_crb, restarts, seed, trace);
}

}  // namespace topomet
