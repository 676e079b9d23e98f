#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "orbitknots/vec3.hpp"

namespace orbitknots {

// Raised when a candidate curve fails the embeddedness check; carries the
// offending parameter pair.
struct EmbeddednessError : std::runtime_error {
    EmbeddednessError(double t1_, double t2_, double dist_)
        : std::runtime_error("curve fails embeddedness check near t1=" +
                             std::to_string(t1_) + ", t2=" + std::to_string(t2_) +
                             " (distance " + std::to_string(dist_) + ")"),
          t1(t1_), t2(t2_), dist(dist_) {}
    double t1, t2, dist;
};

// A closed C^1 curve in R^3: periodic cubic spline through the sample
// points, parameter t in [0, param_length). Immutable after construction.
class Knot {
public:
    // Builds the periodic spline and runs the embeddedness check unless
    // skip_embed_check is set (used internally before refinement).
    explicit Knot(std::vector<Vec3> samples, std::string name = "",
                  bool skip_embed_check = false);

    const std::string& name() const { return name_; }
    std::size_t sample_count() const { return samples_.size(); }
    const std::vector<Vec3>& samples() const { return samples_; }
    double param_length() const { return length_param_; }

    Vec3 point(double t) const;
    Vec3 tangent(double t) const;    // derivative of the spline, nonzero

    double arc_length() const;       // total geometric length
    double diameter() const;         // bounding-box diagonal
    Vec3 centroid() const;

    // Minimum distance between sample pairs separated by more than the
    // injectivity scale; > 0 for embedded curves.
    double min_self_distance() const;

    // New knot sampled at n equal arc-length increments; |tangent| = 1 up to
    // spline error and param_length equals the arc length.
    Knot arc_length_reparametrized(int n = 0) const;

private:
    void build_spline();
    void check_embedded() const;

    std::vector<Vec3> samples_;
    std::string name_;
    double length_param_ = 0.0;          // = sample_count (unit parameter steps)
    std::vector<Vec3> m_;                // spline second derivatives per node
};

// One transverse double point of a projection: parameter pair and sign.
struct Crossing {
    double t_over = 0.0;   // parameter of the strand nearer the viewer
    double t_under = 0.0;
    int sign = 0;          // +1 / -1 by the right-handed crossing convention
};

struct ProjectionDiagram {
    Vec3 direction;                  // v, a unit vector in G_K
    std::vector<Crossing> crossings;
};

struct NonGenericDirection : std::runtime_error {
    explicit NonGenericDirection(const std::string& why)
        : std::runtime_error("direction not generic: " + why) {}
};

// Standard builders. Resolution must be >= 64 samples.
Knot make_circle(int samples, double radius = 1.0);
Knot make_torus_knot(int p, int q, int samples);            // trefoil = (2,3)
Knot make_figure_eight(int samples);
std::pair<Knot, Knot> make_hopf_pair(int samples);
Knot make_from_points(std::vector<Vec3> pts, std::string name = "points");

// Smoothly perturbed unknot: circle plus a few fixed low-order harmonics
// scaled by `amplitude`, seeded deterministically. Non-planar, so its writhe
// and configuration integrals are nonzero.
Knot make_wiggly_unknot(int samples, std::uint64_t seed, double amplitude = 0.35);

// K reflected through the xy-plane (mirror image).
Knot mirror_knot(const Knot& k);

// K plus a random trigonometric perturbation with amplitude `rel_amp` times
// the minimum self-distance; stays in the isotopy class for rel_amp < ~0.5.
Knot perturb_knot(const Knot& k, std::uint64_t seed, double rel_amp);

// Builders addressable by name from the CLI: "circle", "trefoil",
// "figure8", "torus:p,q", "wiggly:seed", "hopfA", "hopfB", "file:path.csv".
Knot make_knot_by_spec(const std::string& spec, int samples = 256);

// Projection of K along v with signed crossings (Fig.-1 convention: sign =
// sign of v . (T_over x T_under)). Throws NonGenericDirection when v is
// within tol_angle of a sampled tangent direction or a crossing fails the
// transversality tolerance.
ProjectionDiagram project_and_sign(const Knot& k, const Vec3& v,
                                   double tol_angle = 1e-3,
                                   double tol_transverse = 1e-6);

// Sum of crossing signs; returns 0 when v is not in G_K (paper convention).
// Non-transverse crossings still throw, so callers can resample v.
int directional_writhe(const Knot& k, const Vec3& v);

// Knot file format: CSV of x,y,z samples with a header naming the closure
// rule and parametrization.
void write_knot_csv(const Knot& k, const std::string& path);
Knot read_knot_csv(const std::string& path);

}  // namespace orbitknots
