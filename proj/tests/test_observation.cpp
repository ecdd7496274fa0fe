#include <doctest.h>

#include <cmath>
#include <vector>

#include "dsmle/observation.hpp"
#include "dsmle/rng.hpp"

using namespace dsmle;
using namespace dsmle::observation;

namespace {

constexpr double kSqrt2Pi = 2.5066282746310005024;

ObservationModel identity_channel() {
    Matrix m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    return ObservationModel::discrete_channel("channel", m);
}

// Composite Simpson quadrature, used as the normalization oracle.
double integrate(const std::function<double(double)>& f, double lo, double hi, int panels) {
    const double h = (hi - lo) / panels;
    double acc = f(lo) + f(hi);
    for (int i = 1; i < panels; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

}  // namespace

TEST_SUITE("observation") {

TEST_CASE("gaussian density at its mean is the peak value") {
    for (double s : {0.2, 1.0, 3.5}) {
        const ObservationModel m = ObservationModel::gaussian("gaussian", {1.25, -0.5}, s);
        CHECK(density(m, {}, 1.25, 0) == doctest::Approx(1.0 / (s * kSqrt2Pi)).epsilon(1e-14));
    }
}

TEST_CASE("identity channel density is the indicator") {
    const ObservationModel m = identity_channel();
    CHECK(density(m, {}, 0.0, 0) == 1.0);
    CHECK(density(m, {}, 1.0, 0) == 0.0);
    CHECK(density(m, {}, 1.0, 1) == 1.0);
}

TEST_CASE("standard normal density at 2") {
    const ObservationModel m = ObservationModel::gaussian("gaussian", {0.0, 0.0}, 1.0);
    CHECK(density(m, {}, 2.0, 0) == doctest::Approx(std::exp(-2.0) / kSqrt2Pi).epsilon(1e-14));
}

TEST_CASE("identity channel sampling returns the symbol") {
    const ObservationModel m = identity_channel();
    for (int i = 0; i < 50; ++i) {
        CHECK(sample(m, {}, i % 2, static_cast<std::uint64_t>(i)) == static_cast<double>(i % 2));
    }
}

TEST_CASE("gaussian sample mean obeys the CLT bound") {
    const ObservationModel m = ObservationModel::gaussian("gaussian", {0.0, 0.0}, 1.0);
    rng::Engine eng(91);
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += sample(m, {}, 0, eng);
    CHECK(std::fabs(acc / n) < 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("laplace absolute deviation matches its scale within 3 sigma") {
    const double b = 0.7;
    const ObservationModel m = ObservationModel::laplace("laplace", {0.0, 0.0}, b);
    rng::Engine eng(92);
    const int n = 100000;
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::fabs(sample(m, {}, 0, eng));
    const double se = b / std::sqrt(static_cast<double>(n));  // sd of |X| is exactly b
    CHECK(std::fabs(acc / n - b) < 3.0 * se);
}

TEST_CASE("envelope of a channel is the column maximum") {
    Matrix m(2, 3);
    m(0, 0) = 0.5;
    m(0, 1) = 0.25;
    m(0, 2) = 0.25;
    m(1, 0) = 0.125;
    m(1, 1) = 0.75;
    m(1, 2) = 0.125;
    const ObservationModel channel = ObservationModel::discrete_channel("channel", m);
    CHECK(gamma_sup(channel, {}, 0.0) == 0.5);
    CHECK(gamma_sup(channel, {}, 1.0) == 0.75);
    CHECK(gamma_sup(channel, {}, 2.0) == 0.25);
}

TEST_CASE("envelope of a two-mean gaussian picks the closer branch") {
    const ObservationModel m = ObservationModel::gaussian("gaussian", {0.0, 1.0}, 1.0);
    CHECK(gamma_sup(m, {}, 0.4) == doctest::Approx(std::exp(-0.08) / kSqrt2Pi).epsilon(1e-14));
    CHECK(gamma_sup(m, {}, 1.0) == doctest::Approx(1.0 / kSqrt2Pi).epsilon(1e-14));
}

TEST_CASE("regularity constant K vanishes for channels and constant means") {
    CHECK(lipschitz_K(identity_channel(), {}, 3.0) == 0.0);
    const ObservationModel flat = ObservationModel::gaussian("gaussian", {2.0, 2.0}, 0.5);
    CHECK(lipschitz_K(flat, {}, 100.0) == 0.0);
}

TEST_CASE("K follows C6 (C4 + C5 |y|) for explicit constants") {
    const RegularityConstants c{1.0, 1.0, 1.0, 0.5};
    CHECK(lipschitz_K(c, 2.0) == doctest::Approx(3.0));
    CHECK(lipschitz_K(c, -2.0) == doctest::Approx(3.0));
    CHECK(c.beta > 0.0);
    CHECK(c.beta < 1.0);
}

TEST_CASE("densities integrate to one") {
    const ParameterPoint theta{};
    Matrix m(2, 2);
    m(0, 0) = 0.3;
    m(0, 1) = 0.7;
    m(1, 0) = 0.9;
    m(1, 1) = 0.1;
    const ObservationModel channel = ObservationModel::discrete_channel("channel", m);
    for (int a = 0; a < 2; ++a) {
        double total = 0.0;
        for (int y = 0; y < 2; ++y) total += density(channel, theta, y, a);
        CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }

    for (const char* kind : {"gaussian", "laplace"}) {
        const double s = 0.8;
        const bool gaussian = kind == std::string("gaussian");
        const ObservationModel cont = gaussian ? ObservationModel::gaussian("gaussian", {0.4, 1.0}, s)
                                               : ObservationModel::laplace("laplace", {0.4, 1.0}, s);
        // +-12s covers the gaussian tail at 1e-8; the laplace tail needs a
        // wider window (exp(-12) ~ 6e-6), and a split at its kink
        const double w = gaussian ? 12.0 * s : 30.0 * s;
        const double mass = integrate([&](double y) { return density(cont, theta, y, 1); },
                                      1.0 - w, 1.0, 4000) +
                            integrate([&](double y) { return density(cont, theta, y, 1); }, 1.0,
                                      1.0 + w, 4000);
        CHECK(std::fabs(mass - 1.0) < 1e-8);
    }
}

TEST_CASE("density never exceeds the envelope") {
    rng::Engine eng(93);
    const ObservationModel models[] = {
        ObservationModel::gaussian("gaussian", {0.0, 1.0, -2.0}, 0.6),
        ObservationModel::laplace("laplace", {0.0, 0.5, 2.0}, 1.1),
    };
    for (const auto& m : models) {
        for (int i = 0; i < 1000; ++i) {
            const double y = 6.0 * eng.next_unit() - 3.0;
            const int a = static_cast<int>(eng.next_u64() % 3);
            CHECK(density(m, {}, y, a) <= gamma_sup(m, {}, y));
        }
    }
}

TEST_CASE("observation regularity inequality holds at unit separation") {
    rng::Engine eng(94);
    const ObservationModel m = ObservationModel::gaussian("gaussian", {-0.5, 0.25, 1.5}, 0.7);
    for (int i = 0; i < 1000; ++i) {
        const double y = 8.0 * eng.next_unit() - 4.0;
        const double K = lipschitz_K(m, {}, y);
        for (int a = 0; a < 3; ++a) {
            for (int b = 0; b < 3; ++b) {
                // d_max = beta^0 = 1 for symbols that disagree at the origin
                CHECK(density(m, {}, y, a) <= density(m, {}, y, b) * std::exp(K) * (1.0 + 1e-12));
            }
        }
    }
}

TEST_CASE("gaussian densities obey two-sided quadratic-exponent bounds") {
    // Constants derived from the mean range and sigma via
    // (phi - y)^2 >= y^2/2 - phi_max^2 and (phi - y)^2 <= 2 y^2 + 2 phi_max^2.
    const double s = 0.9;
    const std::vector<double> means{-0.5, 1.0};
    const ObservationModel m = ObservationModel::gaussian("gaussian", means, s);
    const double phi_max = 1.0;
    const double peak = 1.0 / (s * kSqrt2Pi);
    const double C1 = std::max(peak * std::exp(phi_max * phi_max / (2.0 * s * s)),
                               (1.0 / peak) * std::exp(phi_max * phi_max / (s * s)));
    const double C2 = 1.0 / (s * s);
    const double C3 = 1.0 / (4.0 * s * s);
    for (int i = 0; i <= 100; ++i) {
        const double y = -10.0 + 0.2 * i;
        for (int a = 0; a < 2; ++a) {
            const double g = density(m, {}, y, a);
            CHECK(g <= C1 * std::exp(-C3 * y * y) * (1.0 + 1e-12));
            CHECK(g >= std::exp(-C2 * y * y) / C1 * (1.0 - 1e-12));
        }
    }
}

TEST_CASE("scale must stay positive over the box") {
    const ObservationModel m = ObservationModel::gaussian(
        "gaussian", 2, [](const ParameterPoint&) { return std::vector<double>{0.0, 1.0}; },
        [](const ParameterPoint& th) { return th.at(0); });
    CHECK_THROWS_AS(density(m, {-1.0}, 0.0, 0), Error);
    CHECK(density(m, {1.0}, 0.0, 0) > 0.0);
}

}  // TEST_SUITE
