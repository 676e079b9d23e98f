#include "doctest.h"

#include <cmath>

#include "orbitknots/knot.hpp"
#include "orbitknots/rng.hpp"

using namespace orbitknots;

TEST_CASE("circle length and tangent") {
    const Knot c = make_circle(256);
    CHECK(c.arc_length() == doctest::Approx(2 * M_PI).epsilon(1e-6));
    // tangent at t=0 is perpendicular to the radius, length = speed
    const Vec3 t0 = c.tangent(0.0);
    const Vec3 p0 = c.point(0.0);
    CHECK(std::abs(dot(t0, p0)) < 1e-8);
    CHECK(t0.norm() == doctest::Approx(2 * M_PI / 256).epsilon(1e-4));
}

TEST_CASE("trefoil passes the embeddedness check, degenerate list fails") {
    CHECK_NOTHROW(make_torus_knot(2, 3, 256));

    // figure-eight-shaped planar curve with a genuine self-intersection
    std::vector<Vec3> pts;
    const int n = 128;
    for (int i = 0; i < n; ++i) {
        const double t = 2 * M_PI * i / n;
        pts.push_back({std::sin(2 * t), std::sin(t), 0.0});
    }
    CHECK_THROWS_AS(make_from_points(pts), EmbeddednessError);
}

TEST_CASE("builders enforce minimum resolution") {
    CHECK_THROWS_AS(make_circle(32), std::invalid_argument);
}

TEST_CASE("arc-length reparametrization gives unit speed") {
    const Knot k = make_torus_knot(2, 3, 256).arc_length_reparametrized();
    const double L = k.param_length();
    for (int i = 0; i < 200; ++i) {
        const double t = L * i / 200.0;
        CHECK(k.tangent(t).norm() == doctest::Approx(1.0).epsilon(1e-4));
    }
}

TEST_CASE("analytic tangent matches central differences at O(h^2)") {
    const Knot k = make_figure_eight(256);
    auto diff_err = [&](double h) {
        double worst = 0;
        for (int i = 0; i < 50; ++i) {
            const double t = k.param_length() * i / 50.0;
            const Vec3 fd = (k.point(t + h) - k.point(t - h)) / (2 * h);
            worst = std::max(worst, (fd - k.tangent(t)).norm());
        }
        return worst;
    };
    const double e1 = diff_err(0.05), e2 = diff_err(0.025);
    // convergence order ~2
    CHECK(e1 / e2 > 3.0);
    CHECK(e1 / e2 < 5.0);
}

TEST_CASE("projection of a circle along its normal has no crossings") {
    const Knot c = make_circle(128);
    const ProjectionDiagram d = project_and_sign(c, {0, 0, 1});
    CHECK(d.crossings.empty());
    CHECK(directional_writhe(c, {0, 0, 1}) == 0);
    // any direction: circle writhe is 0
    CHECK(directional_writhe(c, Vec3{0.3, 0.2, 0.93}.normalized()) == 0);
}

TEST_CASE("directions parallel to tangents are rejected as not in G_K") {
    const Knot c = make_circle(128);
    // in-plane direction tangent to the circle at some point
    CHECK_THROWS_AS(project_and_sign(c, Vec3{0, 1, 0}), NonGenericDirection);
    CHECK(directional_writhe(c, Vec3{0, 1, 0}) == 0);  // convention d_K = 0
}

TEST_CASE("trefoil near-axis diagram has 3 crossings of one sign") {
    const Knot k = make_torus_knot(2, 3, 256);
    const Vec3 v = Vec3{0.05, -0.03, 1.0}.normalized();
    const ProjectionDiagram d = project_and_sign(k, v);
    REQUIRE(d.crossings.size() == 3);
    const int s0 = d.crossings[0].sign;
    for (const Crossing& c : d.crossings) CHECK(c.sign == s0);
    CHECK(std::abs(directional_writhe(k, v)) == 3);
}

TEST_CASE("directional writhe is locally constant and antipodally symmetric") {
    const Knot k = make_torus_knot(2, 3, 256);
    const Vec3 v = Vec3{0.11, 0.07, 1.0}.normalized();
    const Vec3 v2 = Vec3{0.115, 0.065, 1.0}.normalized();
    CHECK(directional_writhe(k, v) == directional_writhe(k, v2));
    CHECK(directional_writhe(k, v) == directional_writhe(k, -v));
}

TEST_CASE("mirror image negates the directional writhe") {
    const Knot k = make_torus_knot(2, 3, 256);
    const Knot m = mirror_knot(k);
    const Vec3 v = Vec3{0.07, 0.11, 1.0}.normalized();
    // reflecting through z=0: mirrored direction of v is (vx, vy, -vz)
    const Vec3 vm{v.x, v.y, -v.z};
    CHECK(directional_writhe(m, vm) == -directional_writhe(k, v));
}

TEST_CASE("crossing count and signed sum have equal parity") {
    const Knot k = make_figure_eight(320);
    CounterRng rng(5, 9);
    int tested = 0;
    for (int i = 0; i < 12 && tested < 6; ++i) {
        const Vec3 v = Vec3{rng.uniform(3 * i, -1, 1), rng.uniform(3 * i + 1, -1, 1),
                            rng.uniform(3 * i + 2, -1, 1)}
                           .normalized();
        try {
            const ProjectionDiagram d = project_and_sign(k, v);
            int s = 0;
            for (const Crossing& c : d.crossings) s += c.sign;
            CHECK((static_cast<int>(d.crossings.size()) - std::abs(s)) % 2 == 0);
            ++tested;
        } catch (const NonGenericDirection&) {
        }
    }
    CHECK(tested >= 3);
}

TEST_CASE("reparametrization invariance of the directional writhe") {
    const Knot k = make_figure_eight(256);
    const Knot r = k.arc_length_reparametrized();
    const Vec3 v = Vec3{0.4, 0.2, 0.89}.normalized();
    CHECK(directional_writhe(k, v) == directional_writhe(r, v));
}

TEST_CASE("knot csv round trip") {
    const Knot k = make_wiggly_unknot(128, 3);
    const std::string path = "test_knot_roundtrip.csv";
    write_knot_csv(k, path);
    const Knot r = read_knot_csv(path);
    REQUIRE(r.sample_count() == k.sample_count());
    for (std::size_t i = 0; i < k.sample_count(); ++i)
        CHECK((r.samples()[i] - k.samples()[i]).norm() == 0.0);
    std::remove(path.c_str());
}

TEST_CASE("knot spec parser") {
    CHECK(make_knot_by_spec("trefoil", 64).name() == "torus(2,3)");
    CHECK(make_knot_by_spec("torus:2,5", 128).name() == "torus(2,5)");
    CHECK_THROWS_AS(make_knot_by_spec("nonsense"), std::invalid_argument);
}

TEST_CASE("hopf pair is disjoint") {
    auto [a, b] = make_hopf_pair(128);
    double mind = 1e9;
    for (const Vec3& p : a.samples())
        for (const Vec3& q : b.samples()) mind = std::min(mind, (p - q).norm());
    CHECK(mind > 0.1);
}

TEST_CASE("perturbed knot stays embedded and close") {
    const Knot k = make_torus_knot(2, 3, 256);
    const Knot p = perturb_knot(k, 17, 0.09);
    double worst = 0;
    for (std::size_t i = 0; i < k.sample_count(); ++i)
        worst = std::max(worst, (p.samples()[i] - k.samples()[i]).norm());
    CHECK(worst <= 0.1 * k.min_self_distance() * 1.01);
    CHECK(worst > 0.0);
}
