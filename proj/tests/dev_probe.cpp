// Temporary development probe (not a shipped test); validates conventions.
#include <cstdio>

#include "orbitknots/integrals.hpp"
#include "orbitknots/knot.hpp"
#include "orbitknots/diagram.hpp"
#include "orbitknots/rng.hpp"

using namespace orbitknots;

// All 4 interleaved PV patterns: (first c-pass kind, first d-pass kind)
static int pv_pattern(const ProjectionDiagram& diag, double period, bool c_first_over,
                      bool d_first_over) {
    struct Ev { double t; int id; bool over; };
    const auto& cs = diag.crossings;
    const int n = (int)cs.size();
    std::vector<Ev> evs;
    for (int i = 0; i < n; ++i) {
        evs.push_back({std::fmod(cs[i].t_over + period, period), i, true});
        evs.push_back({std::fmod(cs[i].t_under + period, period), i, false});
    }
    std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) { return a.t < b.t; });
    int total = 0;
    for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
            if (c == d) continue;
            int seq[4], m = 0;
            for (int e = 0; e < 2 * n && m < 4; ++e)
                if (evs[e].id == c || evs[e].id == d) seq[m++] = e;
            const Ev &e0 = evs[seq[0]], &e1 = evs[seq[1]], &e2 = evs[seq[2]], &e3 = evs[seq[3]];
            if (e0.id != c || e1.id != d || e2.id != c || e3.id != d) continue;  // interleaved, c first
            if (e0.over == c_first_over && e1.over == d_first_over &&
                e2.over != c_first_over && e3.over != d_first_over)
                total += cs[c].sign * cs[d].sign;
        }
    return total;
}

int main() {
    // 1. trefoil handedness: directional writhe near axis
    const Knot tref = make_torus_knot(2, 3, 256);
    const Vec3 axis = Vec3{0.05, -0.03, 1.0}.normalized();
    std::printf("trefoil d_K(near axis) = %d\n", directional_writhe(tref, axis));

    // 2. writhe two ways
    const QuadratureReport wg = writhe_gauss(tref, 1e-4);
    const double wp = writhe_projection(tref, 2000, 1);
    std::printf("trefoil writhe gauss=%.6f (err %.2e)  projection=%.6f\n", wg.value,
                wg.abs_error_estimate, wp);

    // 3. Hopf link
    auto [ha, hb] = make_hopf_pair(128);
    const QuadratureReport lg = linking_gauss(ha, hb, 1e-6);
    const int lc = linking_combinatorial(ha, hb, Vec3{0.3, 0.9, 0.4}.normalized());
    std::printf("hopf linking gauss=%.8f combinatorial=%d\n", lg.value, lc);

    // 4. PV pattern discovery
    const Knot t25 = make_torus_knot(2, 5, 320);
    const Knot t27 = make_torus_knot(2, 7, 384);
    const Knot f8 = make_figure_eight(320);
    const Knot trefL = mirror_knot(tref);
    const Knot unk = make_wiggly_unknot(256, 11);
    struct NamedKnot { const char* name; const Knot* k; int expect; };
    const NamedKnot knots[] = {{"unknot", &unk, 0}, {"trefoilR", &tref, 1},
                               {"trefoilL", &trefL, 1}, {"fig8", &f8, -1},
                               {"T(2,5)", &t25, 3},   {"T(2,7)", &t27, 6}};
    for (int pc = 0; pc < 2; ++pc)
        for (int pd = 0; pd < 2; ++pd) {
            std::printf("pattern c_first_over=%d d_first_over=%d: ", pc, pd);
            for (const auto& nk : knots) {
                int val = -999;
                CounterRng rng(7, 2);
                for (int attempt = 0; attempt < 30; ++attempt) {
                    Vec3 v = Vec3{rng.uniform(3 * attempt, -1, 1),
                                  rng.uniform(3 * attempt + 1, -1, 1),
                                  rng.uniform(3 * attempt + 2, -1, 1)};
                    if (v.norm() < 0.1) continue;
                    try {
                        const ProjectionDiagram d = project_and_sign(*nk.k, v.normalized());
                        val = pv_pattern(d, nk.k->param_length(), pc, pd);
                        break;
                    } catch (const NonGenericDirection&) {}
                }
                std::printf("%s=%d(want %d) ", nk.name, val, nk.expect);
            }
            std::printf("\n");
        }

    // 5. degree-2 integral structure probe
    const Knot unk2 = make_wiggly_unknot(256, 23);
    ConfigIntegralOptions opt;
    opt.grid_n = 1024;
    opt.t1_nodes = 24;
    opt.max_triangle_cells = 150;
    const NamedKnot probe[] = {{"unknotA", &unk, 0}, {"unknotB", &unk2, 0},
                               {"trefoilR", &tref, 1}, {"trefoilL", &trefL, 1},
                               {"fig8", &f8, -1}};
    std::printf("\n%-10s %12s %12s %12s %12s %12s\n", "knot", "I_X", "I_Y", "Wr",
                "IX+IY", "IX-IY");
    for (const auto& nk : probe) {
        const double ix = config_integral(crossed_chords(), *nk.k, opt).value;
        const double iy = config_integral(tripod(), *nk.k, opt).value;
        const double wr = writhe_gauss(*nk.k, 1e-4).value;
        std::printf("%-10s %12.5f %12.5f %12.5f %12.5f %12.5f   v2=%d\n", nk.name, ix,
                    iy, wr, ix + iy, ix - iy, nk.expect);
    }
    return 0;
}
