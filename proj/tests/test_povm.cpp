#include "topomet/povm.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "test_helpers.hpp"

using namespace topomet;
namespace tt = topomet::testing;

namespace {

constexpr double kPi = std::numbers::pi;

// operator-sum check: sum_i |e_i><e_i| against the identity
double completeness_gap(const Povm& p) {
    Eigen::Matrix2cd sum = Eigen::Matrix2cd::Zero();
    for (const auto& el : p.elements) {
        const Eigen::Vector2cd e = el.ket();
        sum += e * e.adjoint();
    }
    return (sum - Eigen::Matrix2cd::Identity()).norm();
}

PureQubitState basis_zero() { return PureQubitState{Eigen::Vector2cd(1.0, 0.0)}; }
PureQubitState basis_one() { return PureQubitState{Eigen::Vector2cd(0.0, 1.0)}; }

}  // namespace

TEST_CASE("trine POVM") {
    const Povm p = validate(trine_povm());
    CHECK(p.size() == 3);
    CHECK(p.estimation_ready());
    CHECK_FALSE(p.degenerate());
    CHECK(completeness_gap(p) < 1e-12);

    Eigen::Vector3d dirsum = Eigen::Vector3d::Zero();
    for (const auto& el : p.elements) dirsum += el.bloch_direction();
    CHECK(dirsum.norm() < 1e-15);

    const Eigen::VectorXd probs = outcome_probabilities(p, basis_zero());
    CHECK(probs(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(probs(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
    CHECK(probs(2) == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
}

TEST_CASE("SIC POVM") {
    const Povm p = validate(sic_povm());
    CHECK(p.size() == 4);
    CHECK(completeness_gap(p) < 1e-12);

    SUBCASE("pairwise overlaps of unit vectors are 1/3") {
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = i + 1; j < 4; ++j) {
                const Eigen::Vector2cd a = p.elements[i].ket().normalized();
                const Eigen::Vector2cd b = p.elements[j].ket().normalized();
                CHECK(std::norm(a.dot(b)) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
            }
        }
    }
    SUBCASE("maximally mixed state gives uniform outcomes") {
        // average the Born probabilities over an orthonormal basis
        const Eigen::VectorXd p0 = outcome_probabilities(p, basis_zero());
        const Eigen::VectorXd p1 = outcome_probabilities(p, basis_one());
        for (int i = 0; i < 4; ++i) {
            CHECK(0.5 * (p0(i) + p1(i)) == doctest::Approx(0.25).epsilon(1e-12));
        }
    }
    SUBCASE("element with direction (1,1,1)/sqrt(3) on |0>") {
        const Eigen::VectorXd probs = outcome_probabilities(p, basis_zero());
        CHECK(probs(0) ==
              doctest::Approx((1.0 + 1.0 / std::sqrt(3.0)) / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("validate rejects exactly the broken constraint") {
    SUBCASE("weights (1,1,1) at theta=0 violate the weight sum") {
        Povm p;
        p.elements = {{1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {1.0, 0.0, 0.0}};
        CHECK_THROWS_AS(validate(p), WeightSumViolation);
    }
    SUBCASE("two-element projective measurement is valid but not estimation ready") {
        Povm p;
        p.elements = {{1.0, 0.0, 0.0}, {1.0, kPi, 0.0}};
        CHECK_NOTHROW(validate(p));
        CHECK_FALSE(p.estimation_ready());
        CHECK(completeness_gap(p) < 1e-12);
    }
    SUBCASE("negative weight") {
        Povm p;
        p.elements = {{-0.5, 0.0, 0.0}, {1.5, kPi, 0.0}, {1.0, kPi / 2, 0.0}};
        CHECK_THROWS_AS(validate(p), NegativeWeightError);
    }
    SUBCASE("weight sum fine but directions unbalanced") {
        Povm p;
        const double t = 2.0 * kPi / 3.0;
        p.elements = {{2.0 / 3.0, 0.0, 0.0}, {2.0 / 3.0, t, 0.0}, {2.0 / 3.0, t, 0.0}};
        CHECK_THROWS_AS(validate(p), CompletenessViolation);
    }
    SUBCASE("acceptance matches the operator-sum check on random perturbations") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> jitter(-0.05, 0.05);
        for (int trial = 0; trial < 200; ++trial) {
            Povm p = tt::random_feasible_povm(rng);
            if (trial % 2 == 1) {
                p.elements[0].w += jitter(rng) + (trial % 4 == 1 ? 0.01 : -0.01);
            }
            bool accepted = true;
            try {
                validate(p);
            } catch (const Error&) {
                accepted = false;
            }
            CHECK(accepted == (completeness_gap(p) < 1e-10));
        }
    }
}

TEST_CASE("outcome probabilities form a distribution and ignore phases") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const Povm p = trial % 2 == 0 ? sic_povm() : tt::random_feasible_povm(rng);
        const Eigen::Vector3d dir(u(rng), u(rng), u(rng));
        if (dir.norm() < 1e-3) continue;
        const PureQubitState s = spin_aligned_state(dir);
        const Eigen::VectorXd probs = outcome_probabilities(p, s);
        CHECK(probs.sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(probs.minCoeff() >= 0.0);

        // global phase on the state
        PureQubitState shifted = s;
        shifted.amplitudes *= std::polar(1.0, 2.0 * u(rng));
        CHECK((outcome_probabilities(p, shifted) - probs).norm() < 1e-12);

        // explicit Born rule, with an extra per-element phase on |e_i>
        for (std::size_t i = 0; i < p.size(); ++i) {
            const Eigen::Vector2cd e =
                std::polar(1.0, 3.0 * u(rng)) * p.elements[i].ket();
            const double born = std::norm(e.dot(s.amplitudes));
            CHECK(born == doctest::Approx(probs(static_cast<int>(i))).epsilon(1e-10));
        }
    }
}

TEST_CASE("Naimark dilation realizes the POVM projectively") {
    const Povm trine = trine_povm();
    const NaimarkFrame f = naimark_dilation(trine);

    SUBCASE("orthonormal frame, projections reproduce the kets") {
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const auto ip = f.vectors[static_cast<std::size_t>(i)].dot(
                    f.vectors[static_cast<std::size_t>(j)]);
                CHECK(std::abs(ip - (i == j ? 1.0 : 0.0)) < 1e-10);
            }
            const Eigen::Vector2cd proj =
                f.vectors[static_cast<std::size_t>(i)].head<2>();
            CHECK((proj - trine.elements[static_cast<std::size_t>(i)].ket()).norm() <
                  1e-10);
        }
    }
    SUBCASE("three-level Born rule equals the two-level POVM statistics") {
        std::mt19937_64 rng(13);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int trial = 0; trial < 100; ++trial) {
            const Povm p = tt::random_feasible_povm(rng);
            const NaimarkFrame frame = naimark_dilation(p);
            const Eigen::Vector3d dir(u(rng), u(rng), u(rng));
            if (dir.norm() < 1e-3) continue;
            const PureQubitState s = spin_aligned_state(dir);
            Eigen::Vector3cd embedded;
            embedded << s.amplitudes(0), s.amplitudes(1), 0.0;
            const Eigen::VectorXd probs = outcome_probabilities(p, s);
            for (int i = 0; i < 3; ++i) {
                const double via_frame =
                    std::norm(frame.vectors[static_cast<std::size_t>(i)].dot(embedded));
                CHECK(std::abs(via_frame - probs(i)) < 1e-12);
            }
        }
    }
    SUBCASE("gram of the frame is the identity, ket gram survives projection") {
        std::mt19937_64 rng(17);
        const Povm p = tt::random_feasible_povm(rng);
        const NaimarkFrame frame = naimark_dilation(p);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                const auto gu = frame.vectors[static_cast<std::size_t>(i)].dot(
                    frame.vectors[static_cast<std::size_t>(j)]);
                CHECK(std::abs(gu - (i == j ? 1.0 : 0.0)) < 1e-10);
                const Eigen::Vector2cd pi =
                    frame.vectors[static_cast<std::size_t>(i)].head<2>();
                const Eigen::Vector2cd pj =
                    frame.vectors[static_cast<std::size_t>(j)].head<2>();
                const auto ge = p.elements[static_cast<std::size_t>(i)].ket().dot(
                    p.elements[static_cast<std::size_t>(j)].ket());
                CHECK(std::abs(pi.dot(pj) - ge) < 1e-10);
            }
        }
    }
    SUBCASE("rejects POVMs that are not 3-element") {
        CHECK_THROWS_AS(naimark_dilation(sic_povm()), DilationFailure);
    }
}

TEST_CASE("two-outcome projective measurements never reach rank 2") {
    const BlochPoint p{1.0, 0.5, 1.0};
    SUBCASE("z axis at the reference point") {
        CHECK(projective_fim_rank(p, Eigen::Vector3d::UnitZ()) <= 1);
    }
    SUBCASE("axis along n is stationary") {
        const BlochVector b = bloch_vector(p);
        CHECK(projective_fim_rank(p, b.n) == 0);
    }
    SUBCASE("100 random axes at 10 random gapped points") {
        std::mt19937_64 rng(19);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (const auto& pt : tt::random_gapped_points(10, 29, {.min_d_norm = 0.2})) {
            for (int a = 0; a < 100; ++a) {
                Eigen::Vector3d axis(u(rng), u(rng), u(rng));
                if (axis.norm() < 1e-3) axis = Eigen::Vector3d::UnitX();
                CHECK(projective_fim_rank(pt, axis) <= 1);
            }
        }
    }
}

TEST_CASE("POVM JSON round-trip is lossless") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 20; ++trial) {
        const Povm p = tt::random_feasible_povm(rng);
        nlohmann::json j = p;
        // serialized text parses back to bit-identical doubles
        const Povm r = nlohmann::json::parse(j.dump()).get<Povm>();
        REQUIRE(r.size() == p.size());
        for (std::size_t i = 0; i < p.size(); ++i) {
            CHECK(r.elements[i].w == p.elements[i].w);
            CHECK(r.elements[i].theta == p.elements[i].theta);
            CHECK(r.elements[i].phi == p.elements[i].phi);
        }
    }
}
