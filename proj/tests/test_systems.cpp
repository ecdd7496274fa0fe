#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsmle/rng.hpp"
#include "dsmle/systems.hpp"

using namespace dsmle;
using namespace dsmle::systems;

namespace {

PotentialFamily zero_potential() {
    return [](const ParameterPoint&, int, int) { return 0.0; };
}

TransitionStructure golden_mean() {
    return TransitionStructure(Alphabet{2}, {{1, 1}, {1, 0}});
}

// Random primitive structure + potential, for property tests.
MarkovSystem random_system(rng::Engine& eng, int max_size = 3) {
    const int size = 2 + static_cast<int>(eng.next_u64() % static_cast<std::uint64_t>(max_size - 1));
    std::vector<std::vector<int>> allowed;
    while (true) {
        allowed.assign(size, std::vector<int>(size, 0));
        for (int i = 0; i < size; ++i) {
            for (int j = 0; j < size; ++j) allowed[i][j] = eng.next_unit() < 0.75 ? 1 : 0;
        }
        try {
            TransitionStructure structure(Alphabet{size}, allowed);
            if (!structure.is_primitive()) continue;
            break;
        } catch (const Error&) {
            continue;
        }
    }
    TransitionStructure structure(Alphabet{size}, allowed);
    std::vector<double> values(static_cast<std::size_t>(size) * size);
    for (double& v : values) v = 2.0 * eng.next_unit() - 1.0;
    PotentialFamily pot = [values, size](const ParameterPoint&, int a, int b) {
        return values[static_cast<std::size_t>(a) * size + b];
    };
    return build_markov_from_potential(structure, pot, {});
}

}  // namespace

TEST_SUITE("systems") {

TEST_CASE("full 2-shift with zero potential is the uniform Bernoulli chain") {
    const MarkovSystem s = build_markov_from_potential(TransitionStructure::full(2), zero_potential(), {});
    CHECK(s.perron_root == doctest::Approx(2.0).epsilon(1e-12));
    for (int a = 0; a < 2; ++a) {
        CHECK(s.pi[a] == doctest::Approx(0.5).epsilon(1e-12));
        for (int b = 0; b < 2; ++b) CHECK(s.P(a, b) == doctest::Approx(0.5).epsilon(1e-12));
    }
}

TEST_CASE("golden-mean shift has the expected Perron root") {
    // oracle: the characteristic polynomial x^2 = x + 1
    const double expected = (1.0 + std::sqrt(5.0)) / 2.0;
    const MarkovSystem s = build_markov_from_potential(golden_mean(), zero_potential(), {});
    CHECK(s.perron_root == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("log of a stochastic kernel reproduces that kernel with root 1") {
    Matrix q(2, 2);
    q(0, 0) = 0.8;
    q(0, 1) = 0.2;
    q(1, 0) = 0.3;
    q(1, 1) = 0.7;
    PotentialFamily pot = [&](const ParameterPoint&, int a, int b) { return std::log(q(a, b)); };
    const MarkovSystem s = build_markov_from_potential(TransitionStructure::full(2), pot, {});
    CHECK(s.perron_root == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) CHECK(s.P(a, b) == doctest::Approx(q(a, b)).epsilon(1e-10));
    }
    CHECK(s.pi[0] == doctest::Approx(0.6).epsilon(1e-10));
    CHECK(s.pi[1] == doctest::Approx(0.4).epsilon(1e-10));
}

TEST_CASE("non-primitive structures are rejected") {
    TransitionStructure period2(Alphabet{2}, {{0, 1}, {1, 0}});
    CHECK_FALSE(period2.is_primitive());
    CHECK_THROWS_AS(build_markov_from_potential(period2, zero_potential(), {}), NonPrimitiveError);
    CHECK(golden_mean().is_primitive());
    TransitionStructure identity(Alphabet{2}, {{1, 0}, {0, 1}});
    CHECK_FALSE(identity.is_primitive());
}

TEST_CASE("stationarity and row sums hold for random equilibrium systems") {
    rng::Engine eng(7001);
    for (int trial = 0; trial < 25; ++trial) {
        const MarkovSystem s = random_system(eng);
        const std::vector<double> piP = left_multiply(s.pi, s.P);
        for (int j = 0; j < s.size(); ++j) CHECK(std::fabs(piP[j] - s.pi[j]) < 1e-10);
        for (double r : s.P.row_sums()) CHECK(std::fabs(r - 1.0) < 1e-12);
    }
}

TEST_CASE("cylinder measures are shift invariant") {
    rng::Engine eng(7002);
    for (int trial = 0; trial < 20; ++trial) {
        const MarkovSystem s = random_system(eng);
        std::vector<int> word;
        word.push_back(static_cast<int>(eng.next_u64() % static_cast<std::uint64_t>(s.size())));
        for (int k = 0; k < 5; ++k) {
            std::vector<double> row(static_cast<std::size_t>(s.size()));
            for (int j = 0; j < s.size(); ++j) row[static_cast<std::size_t>(j)] = s.P(word.back(), j);
            word.push_back(eng.next_categorical(row));
        }
        const double direct = cylinder_measure(s, word);
        const double shifted = shifted_cylinder_measure(s, word);
        CHECK(std::fabs(direct - shifted) < 1e-12);
    }
}

TEST_CASE("equilibrium construction is idempotent on its own log-kernel") {
    rng::Engine eng(7003);
    for (int trial = 0; trial < 10; ++trial) {
        const MarkovSystem s = random_system(eng);
        PotentialFamily pot = [&s](const ParameterPoint&, int a, int b) {
            return s.structure.allows(a, b) ? std::log(s.P(a, b)) : 0.0;
        };
        const MarkovSystem again = build_markov_from_potential(s.structure, pot, {});
        for (int a = 0; a < s.size(); ++a) {
            CHECK(std::fabs(again.pi[a] - s.pi[a]) < 1e-10);
            for (int b = 0; b < s.size(); ++b) CHECK(std::fabs(again.P(a, b) - s.P(a, b)) < 1e-10);
        }
    }
}

TEST_CASE("initial symbol of a trajectory is distributed as pi") {
    const MarkovSystem s = build_markov_from_potential(TransitionStructure::full(2), zero_potential(), {});
    const int draws = 100000;
    int count1 = 0;
    for (int i = 0; i < draws; ++i) {
        count1 += sample_trajectory(s, 0, rng::derive_seed(555, static_cast<std::uint64_t>(i)))[0];
    }
    // chi-squared with 1 dof at the 0.001 level
    const double expected = draws * 0.5;
    const double chi2 = 2.0 * (count1 - expected) * (count1 - expected) / expected;
    CHECK(chi2 < 10.827566170662733);
}

TEST_CASE("deterministic transitions produce alternating symbols") {
    Matrix P(2, 2);
    P(0, 1) = 1.0;
    P(1, 0) = 1.0;
    const MarkovSystem s =
        make_markov_system(TransitionStructure(Alphabet{2}, {{0, 1}, {1, 0}}), P, {0.5, 0.5});
    const std::vector<int> x = sample_trajectory(s, 50, 99);
    for (std::size_t k = 1; k < x.size(); ++k) CHECK(x[k] == 1 - x[k - 1]);
}

TEST_CASE("empirical transition frequencies match the kernel within 3 sigma") {
    Matrix P(2, 2);
    P(0, 0) = 0.75;
    P(0, 1) = 0.25;
    P(1, 0) = 0.25;
    P(1, 1) = 0.75;
    const MarkovSystem s = make_markov_system(TransitionStructure::full(2), P, {0.5, 0.5});
    const long n = 100000;
    const std::vector<int> x = sample_trajectory(s, n, 2024);
    long from0 = 0, flips0 = 0;
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (x[k - 1] == 0) {
            ++from0;
            if (x[k] == 1) ++flips0;
        }
    }
    const double phat = static_cast<double>(flips0) / static_cast<double>(from0);
    const double se = std::sqrt(0.25 * 0.75 / static_cast<double>(from0));
    CHECK(std::fabs(phat - 0.25) < 3.0 * se);
}

TEST_CASE("trajectories are deterministic given the seed") {
    const MarkovSystem s = build_markov_from_potential(TransitionStructure::full(3), zero_potential(), {});
    CHECK(sample_trajectory(s, 200, 31337) == sample_trajectory(s, 200, 31337));
}

TEST_CASE("doubling-map coding: fixed point and one third") {
    const CodedMap map = make_doubling_map(20);
    const std::vector<int> zero = factor_encode(map, 0.0);
    for (int s : zero) CHECK(s == 0);
    const std::vector<int> third = factor_encode(map, 1.0 / 3.0);
    for (std::size_t k = 0; k + 1 < third.size(); ++k) {
        CHECK(third[k] == static_cast<int>(k % 2));  // binary expansion 0.0101...
    }
}

TEST_CASE("doubling-map coding round-trips to depth accuracy") {
    const CodedMap map = make_doubling_map(40);
    rng::Engine eng(4242);
    for (int i = 0; i < 200; ++i) {
        const double x = eng.next_unit();
        const double back = factor_decode(map, factor_encode(map, x));
        CHECK(std::fabs(back - x) <= std::ldexp(1.0, -40));
    }
}

TEST_CASE("encoding intertwines the doubling map with the shift, exactly") {
    const CodedMap map = make_doubling_map(48);
    rng::Engine eng(4243);
    for (int i = 0; i < 100; ++i) {
        const double x = eng.next_unit();
        const std::vector<int> a = factor_encode(map, x);
        const std::vector<int> b = factor_encode(map, doubling_step(x));
        for (int k = 0; k + 1 < map.coding_depth; ++k) {
            CHECK(a[static_cast<std::size_t>(k) + 1] == b[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("decode rejects sequences shorter than the coding depth") {
    const CodedMap map = make_doubling_map(10);
    std::vector<int> five(5, 0);
    CHECK_THROWS_AS(factor_decode(map, five), DepthExceededError);
    CHECK_THROWS_AS(make_doubling_map(0), Error);
    CHECK_THROWS_AS(make_doubling_map(54), Error);
}

TEST_CASE("structure validation rejects empty rows and columns") {
    CHECK_THROWS_AS(TransitionStructure(Alphabet{2}, {{0, 0}, {1, 1}}), Error);
    CHECK_THROWS_AS(TransitionStructure(Alphabet{2}, {{1, 0}, {1, 0}}), Error);
    CHECK_THROWS_AS(TransitionStructure(Alphabet{1}, {{1}}), Error);
}

}  // TEST_SUITE
