#include "doctest.h"

#include <cmath>

#include "orbitknots/quadrature.hpp"
#include "orbitknots/rng.hpp"

using namespace orbitknots;

TEST_CASE("gauss rules integrate polynomials exactly") {
    // order-n Gauss is exact through degree 2n-1
    auto f = [](double x) { return 5 * x * x * x * x - x * x + 3; };
    const double exact = 2.0 * (5.0 / 5 - 1.0 / 3 + 3.0);
    CHECK(gauss_integrate(f, -1, 1, 4) == doctest::Approx(exact).epsilon(1e-13));
}

TEST_CASE("adaptive GK handles integrable endpoint singularity") {
    // integral of 1/sqrt(x) on (0,1] = 2
    AdaptiveResult r = adaptive_gk([](double x) { return 1.0 / std::sqrt(x); },
                                   0.0, 1.0, 1e-9, 0.0, 20000);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-6));
}

TEST_CASE("periodic trapezoid is spectrally accurate") {
    const double v = periodic_trapezoid(
        [](double t) { return std::exp(std::sin(t)); }, 2 * M_PI, 32);
    // reference: modified Bessel I_0(1) * 2pi
    const double ref = 2 * M_PI * 1.2660658777520083355;
    CHECK(v == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("adaptive triangle integrates a plane exactly and reports errors") {
    Tri2D t{0, 0, 1, 0, 0, 1};
    AdaptiveResult r = adaptive_triangle(
        [](double x, double y) { return 1.0 + 2 * x + 3 * y; }, t, 1e-12, 0.0);
    CHECK(r.value == doctest::Approx(0.5 + 2.0 / 6 + 3.0 / 6).epsilon(1e-12));

    AdaptiveResult s = adaptive_triangle(
        [](double x, double y) { return std::sin(8 * x) * std::cos(7 * y); }, t,
        1e-10, 0.0);
    CHECK(s.converged);
    CHECK(s.error < 1e-9);
}

TEST_CASE("counter rng is reproducible and stream-separated") {
    CounterRng a(42, 1), b(42, 1), c(42, 2);
    CHECK(a.bits(7) == b.bits(7));
    CHECK(a.bits(7) != c.bits(7));
    // crude uniformity check
    double mean = 0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) mean += a.uniform(i);
    mean /= n;
    CHECK(std::abs(mean - 0.5) < 0.01);
}

TEST_CASE("kahan summation compensates") {
    KahanSum s;
    for (int i = 0; i < 1000000; ++i) s.add(0.1);
    CHECK(s.value() == doctest::Approx(100000.0).epsilon(1e-12));
}
