#include "orbitknots/integrals.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <stdexcept>

#include "orbitknots/parallel.hpp"
#include "orbitknots/quadrature.hpp"
#include "orbitknots/rng.hpp"

namespace orbitknots {

double two_point_kernel(const Knot& k, double t1, double t2) {
    const double L = k.param_length();
    double d = std::fmod(std::abs(t1 - t2), L);
    d = std::min(d, L - d);
    if (d < 1e-12 * L)
        throw std::domain_error("two_point_kernel: coincident parameters");
    const Vec3 p1 = k.point(t1), p2 = k.point(t2);
    const Vec3 dp = p2 - p1;
    const double r2 = dp.norm2();
    const double r3 = r2 * std::sqrt(r2);
    return dot(dp, cross(k.tangent(t2), k.tangent(t1))) / r3;
}

SampledCurve::SampledCurve(const Knot& k, int n) {
    length_param = k.param_length();
    pos.resize(n);
    tan.resize(n);
    speed.resize(n);
    const double h = length_param / n;
    for (int i = 0; i < n; ++i) {
        const double t = (i + 0.5) * h;   // offset grid avoids coincidences
        pos[i] = k.point(t);
        tan[i] = k.tangent(t);
        speed[i] = tan[i].norm();
    }
}

double SampledCurve::kernel(int i, int j) const {
    const Vec3 dp = pos[j] - pos[i];
    const double r2 = dp.norm2();
    return dot(dp, cross(tan[j], tan[i])) / (r2 * std::sqrt(r2));
}

double SampledCurve::kernel_pair(int i, const SampledCurve& other, int j) const {
    const Vec3 dp = pos[i] - other.pos[j];
    const double r2 = dp.norm2();
    return dot(dp, cross(tan[i], other.tan[j])) / (r2 * std::sqrt(r2));
}

namespace {

constexpr double kFourPi = 4.0 * M_PI;

// I_{D0}(K): the full two-parameter Gauss integral, written as an outer lag
// integral of the periodic t-average. The integrand extends continuously to
// the diagonal (limit 0), so no tube is excluded.
QuadratureReport chord_integral(const Knot& k, double abs_tol) {
    const double L = k.param_length();
    QuadratureReport rep;
    double prev = 0.0;
    bool have_prev = false;
    for (int nt = 512; nt <= 8192; nt *= 2) {
        std::uint64_t evals = 0;
        auto G = [&](double u) {
            evals += nt;
            return periodic_trapezoid(
                [&](double t) { return two_point_kernel(k, t, t + u); }, L, nt);
        };
        // g(t, t+u) integrates symmetrically about u = L/2.
        AdaptiveResult in = adaptive_gk(G, 0.0, 0.5 * L, abs_tol * 0.25, 0.0);
        const double val = 2.0 * in.value;
        rep.samples_used += evals;
        rep.abs_error_estimate = 2.0 * in.error;
        if (have_prev) {
            const double diff = std::abs(val - prev);
            rep.abs_error_estimate += diff;
            if (diff < 0.5 * abs_tol) {
                rep.value = val;
                rep.converged = in.converged;
                return rep;
            }
        }
        prev = val;
        have_prev = true;
        rep.value = val;
        rep.converged = false;
    }
    return rep;
}

}  // namespace

QuadratureReport writhe_gauss(const Knot& k, double tol) {
    QuadratureReport rep = chord_integral(k, tol * kFourPi);
    rep.value /= kFourPi;
    rep.abs_error_estimate /= kFourPi;
    return rep;
}

namespace {

Vec3 fibonacci_direction(int i, int n) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = 2.0 * M_PI * i / golden;
    return {r * std::cos(phi), r * std::sin(phi), z};
}

Vec3 jitter(const Vec3& v, const CounterRng& rng, std::uint64_t ctr, double ang) {
    const Vec3 a{rng.uniform(ctr, -1, 1), rng.uniform(ctr + 1, -1, 1),
                 rng.uniform(ctr + 2, -1, 1)};
    return (v + a * ang).normalized();
}

}  // namespace

double writhe_projection(const Knot& k, int n_dirs, std::uint64_t seed) {
    if (n_dirs < 1000)
        throw std::invalid_argument("writhe_projection: need at least 1000 directions");
    CounterRng rng = make_stream(seed, RngStream::projection_directions);
    std::vector<double> val(n_dirs, 0.0);
    std::vector<char> rejected(n_dirs, 0);
    parallel_for(static_cast<std::size_t>(n_dirs), [&](std::size_t i) {
        Vec3 v = fibonacci_direction(static_cast<int>(i), n_dirs);
        for (int retry = 0;; ++retry) {
            try {
                const ProjectionDiagram d = project_and_sign(k, v);
                int s = 0;
                for (const Crossing& c : d.crossings) s += c.sign;
                val[i] = s;
                return;
            } catch (const NonGenericDirection&) {
                if (retry >= 5) {
                    rejected[i] = 1;
                    return;
                }
                v = jitter(v, rng, i * 32 + 4 * retry, 2e-3 * (retry + 1));
            }
        }
    });
    const int n_rej = static_cast<int>(std::count(rejected.begin(), rejected.end(), 1));
    if (n_rej * 100 > n_dirs)
        throw std::runtime_error(
            "writhe_projection: more than 1% of directions non-generic; "
            "increase knot resolution");
    KahanSum s;
    for (int i = 0; i < n_dirs; ++i)
        if (!rejected[i]) s.add(val[i]);
    return s.value() / (n_dirs - n_rej);
}

QuadratureReport linking_gauss(const Knot& k1, const Knot& k2, double tol) {
    // Disjointness precondition.
    double min_d2 = std::numeric_limits<double>::max();
    for (const Vec3& a : k1.samples())
        for (const Vec3& b : k2.samples()) min_d2 = std::min(min_d2, (a - b).norm2());
    const double scale = std::max(k1.diameter(), k2.diameter());
    if (std::sqrt(min_d2) < 1e-9 * scale)
        throw std::domain_error("linking_gauss: curves touch");

    QuadratureReport rep;
    double prev = 0.0;
    bool have_prev = false;
    for (int n = 128; n <= 4096; n *= 2) {
        SampledCurve a(k1, n), b(k2, n);
        const double ha = a.length_param / n, hb = b.length_param / n;
        KahanSum s;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s.add(a.kernel_pair(i, b, j));
        const double val = s.value() * ha * hb / kFourPi;
        rep.samples_used += static_cast<std::uint64_t>(n) * n;
        rep.value = val;
        if (have_prev) {
            const double diff = std::abs(val - prev);
            rep.abs_error_estimate = diff;
            if (diff < 0.5 * tol) {
                rep.converged = true;
                break;
            }
        }
        prev = val;
        have_prev = true;
        rep.converged = false;
    }
    if (std::abs(rep.value - std::round(rep.value)) > 0.05) rep.converged = false;
    return rep;
}

namespace {

struct P2 {
    double x, y;
};

bool seg_isect(const P2& a0, const P2& a1, const P2& b0, const P2& b1) {
    auto orient = [](const P2& p, const P2& q, const P2& r) {
        return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x);
    };
    const double o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
    const double o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

}  // namespace

int linking_combinatorial(const Knot& k1, const Knot& k2, const Vec3& v_in) {
    const Vec3 v = v_in.normalized();
    Vec3 seedv = std::abs(v.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 e1 = (seedv - v * dot(seedv, v)).normalized();
    const Vec3 e2 = cross(v, e1);

    auto tangent_margin = [&](const Knot& k) {
        const int n = static_cast<int>(k.sample_count());
        for (int i = 0; i < n; ++i) {
            const Vec3 t = k.tangent(i * k.param_length() / n).normalized();
            if (cross(v, t).norm() < 1e-3)
                throw NonGenericDirection("parallel to a tangent (not in G_K)");
        }
    };
    tangent_margin(k1);
    tangent_margin(k2);

    const int m1 = std::max(2 * static_cast<int>(k1.sample_count()), 512);
    const int m2 = std::max(2 * static_cast<int>(k2.sample_count()), 512);
    std::vector<P2> q1(m1), q2(m2);
    for (int i = 0; i < m1; ++i) {
        const Vec3 p = k1.point(i * k1.param_length() / m1);
        q1[i] = {dot(p, e1), dot(p, e2)};
    }
    for (int i = 0; i < m2; ++i) {
        const Vec3 p = k2.point(i * k2.param_length() / m2);
        q2[i] = {dot(p, e1), dot(p, e2)};
    }
    const double diam = std::max(k1.diameter(), k2.diameter());
    const double seg1 = k1.param_length() / m1, seg2 = k2.param_length() / m2;

    int sum = 0, count = 0;
    for (int i = 0; i < m1; ++i) {
        for (int j = 0; j < m2; ++j) {
            if (!seg_isect(q1[i], q1[(i + 1) % m1], q2[j], q2[(j + 1) % m2]))
                continue;
            // Newton on (s, t) for proj(K1(s)) = proj(K2(t)).
            double s = (i + 0.5) * seg1, t = (j + 0.5) * seg2;
            for (int it = 0; it < 60; ++it) {
                const Vec3 d = k1.point(s) - k2.point(t);
                const P2 F{dot(d, e1), dot(d, e2)};
                if (std::hypot(F.x, F.y) < 1e-12 * diam) break;
                const Vec3 ds = k1.tangent(s), dt = k2.tangent(t);
                const double j00 = dot(ds, e1), j01 = -dot(dt, e1);
                const double j10 = dot(ds, e2), j11 = -dot(dt, e2);
                const double det = j00 * j11 - j01 * j10;
                if (std::abs(det) < 1e-300) break;
                s -= (F.x * j11 - F.y * j01) / det;
                t -= (j00 * F.y - j10 * F.x) / det;
            }
            const Vec3 d = k1.point(s) - k2.point(t);
            if (std::hypot(dot(d, e1), dot(d, e2)) > 1e-9 * diam) continue;
            const double h1 = dot(k1.point(s), v), h2 = dot(k2.point(t), v);
            if (std::abs(h1 - h2) < 1e-9 * diam)
                throw NonGenericDirection("inter-crossing at equal height");
            const Vec3 to = h1 > h2 ? k1.tangent(s) : k2.tangent(t);
            const Vec3 tu = h1 > h2 ? k2.tangent(t) : k1.tangent(s);
            sum += triple(v, to, tu) > 0 ? 1 : -1;
            ++count;
        }
    }
    if (count % 2 != 0)
        throw NonGenericDirection("odd inter-crossing count (missed crossing)");
    if (sum % 2 != 0)
        throw NonGenericDirection("odd signed inter-crossing sum");
    return sum / 2;
}

BottTaubesIntegrand::BottTaubesIntegrand(const TrivalentDiagram& d) : d_(d) {
    validate_diagram(d_);
    edges_ = d_.edges;
    std::sort(edges_.begin(), edges_.end());
    const int k = d_.k, s = d_.s;
    const int n_slots = k + 3 * s;
    slot_block_.resize(n_slots);
    slot_axis_.resize(n_slots);
    for (int i = 0; i < k; ++i) {
        slot_block_[i] = i;
        slot_axis_[i] = -1;
    }
    for (int j = 0; j < s; ++j)
        for (int c = 0; c < 3; ++c) {
            slot_block_[k + 3 * j + c] = k + j;
            slot_axis_[k + 3 * j + c] = c;
        }

    // Enumerate slot-to-edge assignments: each edge takes an ordered pair of
    // distinct slots (a < b), each slot supporting one of the edge ends.
    // The sign is the parity of the concatenated slot sequence.
    std::vector<int> taken(n_slots, 0);
    std::vector<std::pair<int, int>> current(edges_.size());
    std::function<void(std::size_t)> rec = [&](std::size_t e) {
        if (e == edges_.size()) {
            std::vector<int> seq;
            seq.reserve(n_slots);
            for (const auto& [a, b] : current) {
                seq.push_back(a);
                seq.push_back(b);
            }
            int inv = 0;
            for (std::size_t i = 0; i < seq.size(); ++i)
                for (std::size_t j = i + 1; j < seq.size(); ++j)
                    if (seq[i] > seq[j]) ++inv;
            Term t;
            t.sign = (inv % 2 == 0) ? 1 : -1;
            t.slot_pair = current;
            terms_.push_back(std::move(t));
            return;
        }
        const auto [va, vb] = edges_[e];
        for (int a = 0; a < n_slots; ++a) {
            if (taken[a] || (slot_block_[a] != va && slot_block_[a] != vb)) continue;
            taken[a] = 1;
            for (int b = a + 1; b < n_slots; ++b) {
                if (taken[b] || (slot_block_[b] != va && slot_block_[b] != vb))
                    continue;
                taken[b] = 1;
                current[e] = {a, b};
                rec(e + 1);
                taken[b] = 0;
            }
            taken[a] = 0;
        }
    };
    rec(0);
}

double BottTaubesIntegrand::eval(const std::vector<Vec3>& positions,
                                 const std::vector<Vec3>& tangents) const {
    const int k = d_.k, s = d_.s;
    if (static_cast<int>(positions.size()) != k + s ||
        static_cast<int>(tangents.size()) != k)
        throw std::invalid_argument("integrand: wrong frame sizes");

    struct EdgeGeom {
        Vec3 h;
        double inv_r2;
    };
    std::vector<EdgeGeom> geom(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
        const Vec3 diff = positions[edges_[e].second] - positions[edges_[e].first];
        const double r2 = diff.norm2();
        if (r2 < 1e-28) throw std::domain_error("integrand: coincident points");
        geom[e].h = diff / std::sqrt(r2);
        geom[e].inv_r2 = 1.0 / r2;
    }

    auto slot_vec = [&](int slot) -> Vec3 {
        const int axis = slot_axis_[slot];
        if (axis < 0) return tangents[slot];
        Vec3 v{};
        (axis == 0 ? v.x : axis == 1 ? v.y : v.z) = 1.0;
        return v;
    };
    auto delta = [&](std::size_t e, int slot) -> Vec3 {
        const int blk = slot_block_[slot];
        const Vec3 v = slot_vec(slot);
        if (blk == edges_[e].first) return -v;
        return v;  // blk == edges_[e].second by construction
    };

    double total = 0.0;
    for (const Term& t : terms_) {
        double prod = t.sign;
        for (std::size_t e = 0; e < edges_.size(); ++e) {
            const auto [a, b] = t.slot_pair[e];
            prod *= dot(geom[e].h, cross(delta(e, a), delta(e, b))) * geom[e].inv_r2;
            if (prod == 0.0) break;
        }
        total += prod;
    }
    return total;
}

double BottTaubesIntegrand::eval_on_knot(const Knot& k,
                                         const std::vector<double>& t,
                                         const std::vector<Vec3>& y) const {
    std::vector<Vec3> pos(d_.k + d_.s);
    std::vector<Vec3> tans(d_.k);
    for (int i = 0; i < d_.k; ++i) {
        pos[i] = k.point(t[i]);
        tans[i] = k.tangent(t[i]);
    }
    for (int j = 0; j < d_.s; ++j) pos[d_.k + j] = y[j];
    return eval(pos, tans);
}

namespace {

// ---- degree-2 fast paths -------------------------------------------------

// I for the crossed-chords diagram: 4 * integral over the ordered simplex of
// -g(t1,t3) g(t2,t4), via prefix/suffix sums on an offset grid (O(N^2)).
double crossed_sum(const std::vector<std::vector<double>>& g, int n) {
    // sum_{i<j<k<l} g[i][k]*g[j][l]
    //   = sum_{j<k} (sum_{i<j} g[i][k]) * (sum_{l>k} g[j][l]).
    std::vector<double> prefix(n, 0.0);  // prefix[k] = sum_{i<j} g[i][k], updated in j
    double total = 0.0;
    std::vector<double> suffix(n, 0.0);
    for (int j = 0; j < n; ++j) {
        // suffix over l for row j: suffix[k] = sum_{l>k} g[j][l]
        double acc = 0.0;
        for (int kk = n - 1; kk >= 0; --kk) {
            suffix[kk] = acc;
            acc += g[j][kk];
        }
        if (j > 0)
            for (int kk = 0; kk < n; ++kk) prefix[kk] += g[j - 1][kk];
        for (int kk = j + 1; kk < n; ++kk) total += prefix[kk] * suffix[kk];
    }
    return total;
}

// sum_{i<j<k<l} g[i][j]*g[k][l]
double parallel_sum(const std::vector<std::vector<double>>& g, int n) {
    std::vector<double> col(n, 0.0);  // A[j] = sum_{i<j} g[i][j]
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < j; ++i) col[j] += g[i][j];
    std::vector<double> rowtail(n, 0.0);  // C[k] = sum_{l>k} g[k][l]
    for (int kk = 0; kk < n; ++kk)
        for (int l = kk + 1; l < n; ++l) rowtail[kk] += g[kk][l];
    double b = 0.0;  // B[j] = sum_{k>j} C[k]
    std::vector<double> bsuf(n, 0.0);
    for (int j = n - 1; j >= 0; --j) {
        bsuf[j] = b;
        b += rowtail[j];
    }
    double total = 0.0;
    for (int j = 0; j < n; ++j) total += col[j] * bsuf[j];
    return total;
}

QuadratureReport degree2_chord_path(const Knot& k, bool crossed,
                                    const ConfigIntegralOptions& opt) {
    QuadratureReport rep;
    double prev = 0.0;
    bool have_prev = false;
    const int target = std::max(512, opt.grid_n);
    for (int n = target / 4; n <= target; n *= 2) {
        SampledCurve sc(k, n);
        std::vector<std::vector<double>> g(n, std::vector<double>(n, 0.0));
        parallel_for(static_cast<std::size_t>(n), [&](std::size_t i) {
            for (int j = 0; j < n; ++j)
                if (static_cast<int>(i) != j)
                    g[i][j] = sc.kernel(static_cast<int>(i), j);
        });
        const double h = sc.length_param / n;
        const double sum = crossed ? crossed_sum(g, n) : parallel_sum(g, n);
        const double val = (crossed ? -4.0 : 4.0) * sum * h * h * h * h;
        rep.samples_used += static_cast<std::uint64_t>(n) * n;
        if (have_prev) rep.abs_error_estimate = std::abs(val - prev);
        prev = val;
        have_prev = true;
        rep.value = val;
    }
    rep.converged = rep.abs_error_estimate <
                    std::max(opt.tol, 5e-3 * std::abs(rep.value)) * 4.0;
    return rep;
}

// ---- tripod free-point integral -------------------------------------------

// The tripod integrand collapses to a determinant of Biot-Savart kernels:
// with B_i = (y - x_i) x u_i / |y - x_i|^3, the signed slot-assignment sum
// equals det(B_1, B_2, B_3). Verified against the generic compiler in tests.
double tripod_det_integrand(const Vec3& x1, const Vec3& x2, const Vec3& x3,
                            const Vec3& u1, const Vec3& u2, const Vec3& u3,
                            const Vec3& y) {
    auto biot = [&](const Vec3& x, const Vec3& u) {
        const Vec3 d = y - x;
        const double r2 = d.norm2();
        if (r2 < 1e-28) throw std::domain_error("tripod: free point hits the knot");
        return cross(d, u) / (r2 * std::sqrt(r2));
    };
    return triple(biot(x1, u1), biot(x2, u2), biot(x3, u3));
}

// Integral over R^3 of the tripod determinant: inner ball in spherical
// coordinates, far field compactified by rho = R0 / w.
double tripod_free_integral(const Vec3& x1, const Vec3& x2, const Vec3& x3,
                            const Vec3& u1, const Vec3& u2, const Vec3& u3,
                            const Vec3& c, double diam, double abs_tol,
                            std::uint64_t* evals) {
    const double r0 = 2.0 * diam;
    auto dir = [](double mu, double phi) {
        const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        return Vec3{st * std::cos(phi), st * std::sin(phi), mu};
    };
    auto inner_f = [&](double rho, double mu, double phi) {
        const Vec3 y = c + dir(mu, phi) * rho;
        return rho * rho * tripod_det_integrand(x1, x2, x3, u1, u2, u3, y);
    };
    auto outer_f = [&](double w, double mu, double phi) {
        const double rho = r0 / w;
        const Vec3 y = c + dir(mu, phi) * rho;
        return (r0 * r0 * r0 / (w * w * w * w)) *
               tripod_det_integrand(x1, x2, x3, u1, u2, u3, y);
    };
    const Box3D inner_box{{0.0, -1.0, 0.0}, {r0, 1.0, 2.0 * M_PI}};
    const Box3D outer_box{{0.0, -1.0, 0.0}, {1.0, 1.0, 2.0 * M_PI}};
    AdaptiveResult in = adaptive_box3(inner_f, inner_box, abs_tol * 0.5, 4e-3, 4000);
    AdaptiveResult out = adaptive_box3(outer_f, outer_box, abs_tol * 0.5, 4e-3, 800);
    if (evals) *evals += in.evals + out.evals;
    return in.value + out.value;
}

QuadratureReport tripod_path(const Knot& k, const ConfigIntegralOptions& opt) {
    const double L = k.param_length();
    const double eps = opt.tube_epsilon_rel * L;  // tube radius, parameter units
    const Vec3 c = k.centroid();
    const double diam = k.diameter();

    const int nt = std::max(8, opt.t1_nodes);
    std::uint64_t evals = 0;
    std::atomic<double> fmax{0.0};  // running magnitude, scales the abs floor

    // Mean over t1 of the free-point-integrated tripod integrand at circle
    // lags (w1, w2); the (t1, w1, w2) box covers the whole cyclic class.
    auto G = [&](double w1, double w2) {
        std::vector<double> vals(nt, 0.0);
        std::vector<std::uint64_t> ev(nt, 0);
        const double floor_tol = 1e-4 * fmax.load();
        parallel_for(static_cast<std::size_t>(nt), [&](std::size_t i) {
            const double t1 = (i + 0.5) * L / nt;
            const double ts[3] = {t1, t1 + w1, t1 + w1 + w2};
            const Vec3 x1 = k.point(ts[0]), x2 = k.point(ts[1]), x3 = k.point(ts[2]);
            const Vec3 u1 = k.tangent(ts[0]), u2 = k.tangent(ts[1]),
                       u3 = k.tangent(ts[2]);
            vals[i] = tripod_free_integral(x1, x2, x3, u1, u2, u3, c, diam,
                                           floor_tol, &ev[i]);
            double cur = fmax.load();
            const double mag = std::abs(vals[i]);
            while (mag > cur && !fmax.compare_exchange_weak(cur, mag)) {
            }
        });
        for (std::uint64_t e : ev) evals += e;
        KahanSum s;
        for (double v : vals) s.add(v);
        return s.value() * (L / nt);
    };

    // Outer domain: lags w1, w2 >= eps with w1 + w2 <= L - eps.
    const Tri2D tri{eps, eps, L - 2.0 * eps, eps, eps, L - 2.0 * eps};
    AdaptiveResult outer = adaptive_triangle(
        [&](double w1, double w2) { return G(w1, w2); }, tri,
        std::max(opt.tol, 1e-6), 5e-3, opt.max_triangle_cells);

    // Linear-in-R tube mass: measure the eps..2eps collar along the three
    // excluded edges and extrapolate the clipped 0..eps mass as the same
    // amount (the corner overlaps are O(eps^2) and land in the error term).
    double collar = 0.0;
    {
        const GaussRule& gq = gauss_legendre(4);
        const double span = L - 5 * eps;
        auto band_w1 = [&](double u, double d) {
            return std::pair<double, double>{d, 2 * eps + u * span};
        };
        auto band_w2 = [&](double u, double d) {
            return std::pair<double, double>{2 * eps + u * span, d};
        };
        auto band_sum = [&](double u, double d) {
            const double w1 = 2 * eps + u * span;
            return std::pair<double, double>{w1, L - d - w1};
        };
        using BandFn = std::function<std::pair<double, double>(double, double)>;
        for (const BandFn& fn : {BandFn(band_w1), BandFn(band_w2), BandFn(band_sum)}) {
            for (std::size_t iu = 0; iu < gq.nodes.size(); ++iu) {
                const double u = 0.5 * (1.0 + gq.nodes[iu]);
                const double wu = 0.5 * gq.weights[iu] * span;
                for (std::size_t id = 0; id < gq.nodes.size(); ++id) {
                    const double d = eps + 0.5 * eps * (1.0 + gq.nodes[id]);
                    const double wd = 0.5 * eps * gq.weights[id];
                    auto [w1, w2] = fn(u, d);
                    if (w1 < eps || w2 < eps || w1 + w2 > L - eps) continue;
                    collar += wu * wd * G(w1, w2);
                }
            }
        }
    }

    QuadratureReport rep;
    rep.value = outer.value + collar;
    rep.abs_error_estimate = outer.error + std::abs(collar);
    rep.samples_used = evals;
    rep.excluded_tube_radius = eps;
    rep.converged = outer.converged;
    return rep;
}

// ---- generic diagrams: Monte Carlo fallback --------------------------------

QuadratureReport generic_mc_path(const TrivalentDiagram& d, const Knot& k,
                                 const ConfigIntegralOptions& opt) {
    const BottTaubesIntegrand integrand(d);
    const double L = k.param_length();
    const int kk = d.k, s = d.s;
    const double diam = k.diameter();
    const Vec3 c = k.centroid();
    CounterRng rng = make_stream(opt.seed, RngStream::monte_carlo);
    const double eps = opt.tube_epsilon_rel * L;

    // Importance proposal for free points: isotropic Cauchy-like radial
    // density q(r) ~ 1/(pi^2 (scale^2+r^2)^2) * ... chosen to integrate to 1
    // over R^3 with heavy tails matching the R^-6 decay.
    const double scale = diam;
    auto sample_free = [&](std::uint64_t base, Vec3* y, double* q) {
        const double u1 = rng.uniform(base), u2 = rng.uniform(base + 1),
                     u3 = rng.uniform(base + 2);
        const double r = scale * std::tan(0.5 * M_PI * u1);
        const double mu = 2.0 * u2 - 1.0;
        const double phi = 2.0 * M_PI * u3;
        const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
        *y = c + Vec3{st * std::cos(phi), st * std::sin(phi), mu} * r;
        // density of r: (2/(pi*scale)) * scale^2/(scale^2+r^2); over sphere:
        const double pr = (2.0 / (M_PI * scale)) *
                          (scale * scale / (scale * scale + r * r));
        *q = pr / (4.0 * M_PI * std::max(r * r, 1e-300));
    };

    const std::uint64_t n = std::max<std::uint64_t>(opt.mc_samples, 1000);
    long double acc = 0.0L, acc2 = 0.0L;
    std::uint64_t kept = 0;
    const std::uint64_t stride = 2 * kk + 3 * s + 4;
    std::vector<double> ts(kk);
    std::vector<Vec3> ys(s);
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint64_t base = i * stride;
        for (int m = 0; m < kk; ++m) ts[m] = rng.uniform(base + m) * L;
        // Cyclic-order restriction: sort all but the first angle relative to
        // t_0 and require identity order; otherwise the sample lies in a
        // different component of C(k, S^1).
        bool ordered = true;
        for (int m = 1; m + 1 < kk; ++m) {
            const double a = std::fmod(ts[m] - ts[0] + L, L);
            const double b = std::fmod(ts[m + 1] - ts[0] + L, L);
            if (a > b) ordered = false;
        }
        double w = 1.0;
        if (!ordered) continue;
        bool clipped = false;
        for (int m1 = 0; m1 < kk && !clipped; ++m1)
            for (int m2 = m1 + 1; m2 < kk; ++m2) {
                double dd = std::fmod(std::abs(ts[m1] - ts[m2]), L);
                dd = std::min(dd, L - dd);
                if (dd < eps) {
                    clipped = true;
                    break;
                }
            }
        if (clipped) continue;
        for (int j = 0; j < s; ++j) {
            double q;
            sample_free(base + kk + 3 * j, &ys[j], &q);
            w /= q;
        }
        double f;
        try {
            f = integrand.eval_on_knot(k, ts, ys);
        } catch (const std::domain_error&) {
            continue;
        }
        const double v = f * w;
        acc += v;
        acc2 += static_cast<long double>(v) * v;
        ++kept;
    }
    QuadratureReport rep;
    rep.samples_used = n;
    rep.excluded_tube_radius = eps;
    // Estimate of integral over the ordered component: mean * L^k / (k-1)!
    // accounting for the acceptance region having fraction 1/(k-1)!.
    double volfac = 1.0;
    for (int m = 0; m < kk; ++m) volfac *= L;
    const double mean = kept ? static_cast<double>(acc / n) : 0.0;
    const double var =
        kept ? std::max(0.0, static_cast<double>(acc2 / n) - mean * mean) : 0.0;
    rep.value = mean * volfac;
    rep.abs_error_estimate = std::sqrt(var / n) * volfac;
    rep.converged = rep.abs_error_estimate <= std::max(opt.tol, 5e-2 * std::abs(rep.value));
    return rep;
}

}  // namespace

QuadratureReport config_integral(const TrivalentDiagram& d_in, const Knot& k,
                                 const ConfigIntegralOptions& opt) {
    const TrivalentDiagram d = canonicalize(d_in);
    if (d == canonicalize(chord_diagram())) return chord_integral(k, opt.tol);
    if (d == canonicalize(crossed_chords())) return degree2_chord_path(k, true, opt);
    if (d == canonicalize(parallel_chords())) return degree2_chord_path(k, false, opt);
    if (d == canonicalize(tripod())) return tripod_path(k, opt);
    return generic_mc_path(d, k, opt);
}

// ---- Polyak-Viro degree-2 oracle -------------------------------------------

int pv2_from_diagram(const ProjectionDiagram& diag, double period) {
    // Gauss-diagram count: ordered crossing pairs (c, d) whose chords
    // interleave as c, d, c, d from the base point with the passes in the
    // pattern (under c, over d, over c, under d); the contribution is the
    // product of the crossing signs.
    struct Ev {
        double t;
        int id;
        bool over;
    };
    const auto& cs = diag.crossings;
    const int n = static_cast<int>(cs.size());
    std::vector<Ev> evs;
    evs.reserve(2 * n);
    for (int i = 0; i < n; ++i) {
        evs.push_back({std::fmod(cs[i].t_over + period, period), i, true});
        evs.push_back({std::fmod(cs[i].t_under + period, period), i, false});
    }
    std::sort(evs.begin(), evs.end(), [](const Ev& a, const Ev& b) { return a.t < b.t; });

    int total = 0;
    for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) {
            if (c == d) continue;
            // positions of the four passes in the linear event order
            int seq[4], m = 0;
            for (int e = 0; e < 2 * n && m < 4; ++e) {
                if (evs[e].id == c || evs[e].id == d) seq[m++] = e;
            }
            // Want the event kinds, in order, to be: under(c), over(d),
            // over(c), under(d).
            const Ev& e0 = evs[seq[0]];
            const Ev& e1 = evs[seq[1]];
            const Ev& e2 = evs[seq[2]];
            const Ev& e3 = evs[seq[3]];
            if (e0.id == c && !e0.over && e1.id == d && e1.over && e2.id == c &&
                e2.over && e3.id == d && !e3.over)
                total += cs[c].sign * cs[d].sign;
        }
    }
    return total;
}

int polyak_viro_v2(const Knot& k, const Vec3& v) {
    const ProjectionDiagram diag = project_and_sign(k, v);
    return pv2_from_diagram(diag, k.param_length());
}

int polyak_viro_v2_auto(const Knot& k, std::uint64_t seed) {
    CounterRng rng = make_stream(seed, RngStream::projection_directions);
    for (int attempt = 0; attempt < 40; ++attempt) {
        Vec3 v = fibonacci_direction(attempt * 7 + 3, 977);
        v = jitter(v, rng, 16 * attempt, 1e-2);
        try {
            return polyak_viro_v2(k, v);
        } catch (const NonGenericDirection&) {
            continue;
        }
    }
    throw std::runtime_error("polyak_viro_v2: no generic direction found");
}

// ---- degree-2 preset -------------------------------------------------------

double vassiliev_eval(const WeightSystem& w,
                      const std::map<TrivalentDiagram, double>& corrections,
                      const std::map<TrivalentDiagram, double>& integral_values,
                      std::optional<double> writhe) {
    double acc = 0.0;
    for (const auto& [d, coeff] : w.values) {
        if (coeff == 0) continue;
        auto it = integral_values.find(d);
        if (it == integral_values.end())
            throw std::invalid_argument("vassiliev_eval: missing I_D for " +
                                        format_diagram(d));
        acc += static_cast<double>(coeff) * it->second;
    }
    double m_total = 0.0;
    for (const auto& [d, m] : corrections) m_total += m;
    if (m_total != 0.0) {
        if (!writhe)
            throw std::invalid_argument("vassiliev_eval: missing writhe value");
        acc -= m_total * *writhe;
    }
    return acc;
}

namespace {

struct KnotIntegrals {
    double ix, iy, wr;
};

KnotIntegrals compute_xy_wr(const Knot& k, const ConfigIntegralOptions& opt) {
    KnotIntegrals r;
    r.ix = config_integral(crossed_chords(), k, opt).value;
    r.iy = config_integral(tripod(), k, opt).value;
    r.wr = writhe_gauss(k, 1e-4).value;
    return r;
}

}  // namespace

const Degree2Preset& degree2_preset(const ConfigIntegralOptions& opt) {
    static Degree2Preset preset;
    static std::once_flag once;
    std::call_once(once, [&]() {
        const Knot unknot = make_wiggly_unknot(320, 11);
        const Knot tref = make_torus_knot(2, 3, 320);
        const Knot tref_l = mirror_knot(tref);

        // Oracle ground truth for the anchors.
        const int pv_u = polyak_viro_v2_auto(unknot);
        const int pv_t = polyak_viro_v2_auto(tref);
        if (pv_u != 0 || pv_t != 1)
            throw std::runtime_error("degree2 preset: oracle anchors unexpected");

        const KnotIntegrals iu = compute_xy_wr(unknot, opt);
        const KnotIntegrals it = compute_xy_wr(tref, opt);
        const double su = iu.ix + iu.iy, st = it.ix + it.iy;

        // Solve [su -wr_u; st -wr_t] (a, m)^T = (0, 1)^T.
        const double det = su * (-it.wr) - (-iu.wr) * st;
        if (std::abs(det) < 1e-12)
            throw std::runtime_error("degree2 preset: singular calibration system");
        const double a = (0.0 * (-it.wr) - (-iu.wr) * 1.0) / det;
        const double m = (su * 1.0 - st * 0.0) / det;

        const KnotIntegrals il = compute_xy_wr(tref_l, opt);
        preset.calibration_residual =
            std::abs(a * (il.ix + il.iy) - m * il.wr - 1.0);

        // Primitive direction: W(crossed) = W(tripod) = a, W(parallel) = 0
        // (STU-consistent: tripod = crossed - parallel).
        WeightSystem w;
        w.degree = 2;
        const Rational ra(a);
        for (const TrivalentDiagram& d : enumerate_diagrams(2)) {
            if (d == canonicalize(crossed_chords()) || d == canonicalize(tripod()))
                w.values[d] = ra;
            else
                w.values[d] = Rational(0);
        }
        preset.weights = w;
        preset.scale = a;
        preset.anomaly = m;
        preset.corrections[canonicalize(crossed_chords())] = m;
    });
    return preset;
}

double vassiliev_v2(const Knot& k, const ConfigIntegralOptions& opt) {
    const Degree2Preset& p = degree2_preset(opt);
    std::map<TrivalentDiagram, double> vals;
    vals[canonicalize(crossed_chords())] = config_integral(crossed_chords(), k, opt).value;
    vals[canonicalize(tripod())] = config_integral(tripod(), k, opt).value;
    const double wr = writhe_gauss(k, 1e-4).value;
    return vassiliev_eval(p.weights, p.corrections, vals, wr);
}

}  // namespace orbitknots
