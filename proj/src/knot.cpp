#include "orbitknots/knot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "orbitknots/quadrature.hpp"
#include "orbitknots/rng.hpp"

namespace orbitknots {

namespace {

// Cyclic tridiagonal solve (diag 4, off-diag and corners 1) by the
// Sherman-Morrison correction of a plain Thomas solve.
std::vector<double> solve_cyclic_tridiag_scalar(const std::vector<double>& d) {
    const int n = static_cast<int>(d.size());
    const double gamma = -4.0;
    auto thomas = [&](const std::vector<double>& rhs) {
        std::vector<double> diag(n, 4.0);
        diag[0] = 4.0 - gamma;
        diag[n - 1] = 4.0 - 1.0 / gamma;
        std::vector<double> x(n), c(n, 0.0);
        c[0] = 1.0 / diag[0];
        x[0] = rhs[0] / diag[0];
        for (int i = 1; i < n; ++i) {
            const double m = diag[i] - c[i - 1];
            c[i] = 1.0 / m;
            x[i] = (rhs[i] - x[i - 1]) / m;
        }
        for (int i = n - 2; i >= 0; --i) x[i] -= x[i + 1] * c[i];
        return x;
    };
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = 1.0;
    const std::vector<double> y = thomas(d);
    const std::vector<double> z = thomas(u);
    const double vy = y[0] + y[n - 1] / gamma;
    const double vz = z[0] + z[n - 1] / gamma;
    const double fact = vy / (1.0 + vz);
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = y[i] - z[i] * fact;
    return x;
}

std::vector<Vec3> solve_cyclic_tridiag(const std::vector<Vec3>& d) {
    const int n = static_cast<int>(d.size());
    std::vector<double> comp(n);
    std::vector<Vec3> out(n);
    for (int axis = 0; axis < 3; ++axis) {
        for (int i = 0; i < n; ++i)
            comp[i] = axis == 0 ? d[i].x : (axis == 1 ? d[i].y : d[i].z);
        const std::vector<double> sol = solve_cyclic_tridiag_scalar(comp);
        for (int i = 0; i < n; ++i) {
            if (axis == 0) out[i].x = sol[i];
            else if (axis == 1) out[i].y = sol[i];
            else out[i].z = sol[i];
        }
    }
    return out;
}

}  // namespace

Knot::Knot(std::vector<Vec3> samples, std::string name, bool skip_embed_check)
    : samples_(std::move(samples)), name_(std::move(name)) {
    if (samples_.size() < 8)
        throw std::invalid_argument("knot: need at least 8 samples");
    length_param_ = static_cast<double>(samples_.size());
    build_spline();
    if (!skip_embed_check) check_embedded();
}

void Knot::build_spline() {
    const int n = static_cast<int>(samples_.size());
    const double h = length_param_ / n;
    std::vector<Vec3> rhs(n);
    for (int i = 0; i < n; ++i) {
        const Vec3& prev = samples_[(i + n - 1) % n];
        const Vec3& next = samples_[(i + 1) % n];
        rhs[i] = (next - samples_[i] * 2.0 + prev) * (6.0 / (h * h));
    }
    m_ = solve_cyclic_tridiag(rhs);
}

Vec3 Knot::point(double t) const {
    const int n = static_cast<int>(samples_.size());
    const double h = length_param_ / n;
    double tt = std::fmod(t, length_param_);
    if (tt < 0) tt += length_param_;
    int i = static_cast<int>(tt / h);
    if (i >= n) i = n - 1;
    const double u = tt / h - i;
    const int j = (i + 1) % n;
    const double a = 1.0 - u;
    return samples_[i] * a + samples_[j] * u +
           (m_[i] * ((a * a * a - a)) + m_[j] * ((u * u * u - u))) * (h * h / 6.0);
}

Vec3 Knot::tangent(double t) const {
    const int n = static_cast<int>(samples_.size());
    const double h = length_param_ / n;
    double tt = std::fmod(t, length_param_);
    if (tt < 0) tt += length_param_;
    int i = static_cast<int>(tt / h);
    if (i >= n) i = n - 1;
    const double u = tt / h - i;
    const int j = (i + 1) % n;
    const double a = 1.0 - u;
    return (samples_[j] - samples_[i]) / h +
           (m_[i] * (-(3.0 * a * a - 1.0)) + m_[j] * (3.0 * u * u - 1.0)) * (h / 6.0);
}

double Knot::arc_length() const {
    const int n = static_cast<int>(samples_.size());
    const double h = length_param_ / n;
    const GaussRule& g = gauss_legendre(8);
    KahanSum s;
    for (int i = 0; i < n; ++i) {
        for (std::size_t q = 0; q < g.nodes.size(); ++q) {
            const double t = (i + 0.5 + 0.5 * g.nodes[q]) * h;
            s.add(g.weights[q] * tangent(t).norm());
        }
    }
    return s.value() * 0.5 * h;
}

double Knot::diameter() const {
    Vec3 lo = samples_[0], hi = samples_[0];
    for (const Vec3& p : samples_) {
        lo.x = std::min(lo.x, p.x); lo.y = std::min(lo.y, p.y); lo.z = std::min(lo.z, p.z);
        hi.x = std::max(hi.x, p.x); hi.y = std::max(hi.y, p.y); hi.z = std::max(hi.z, p.z);
    }
    return (hi - lo).norm();
}

Vec3 Knot::centroid() const {
    Vec3 c{};
    for (const Vec3& p : samples_) c += p;
    return c / static_cast<double>(samples_.size());
}

double Knot::min_self_distance() const {
    const int n = static_cast<int>(samples_.size());
    const int sep = std::max(3, n / 256);
    double best = std::numeric_limits<double>::max();
    for (int i = 0; i < n; ++i) {
        for (int j = i + sep + 1; j < n; ++j) {
            if (i + n - j <= sep) continue;  // cyclic separation
            const double d2 = (samples_[i] - samples_[j]).norm2();
            if (d2 < best) best = d2;
        }
    }
    return std::sqrt(best);
}

void Knot::check_embedded() const {
    const int n = static_cast<int>(samples_.size());
    const int sep = std::max(3, n / 256);
    const double floor_dist = 1e-7 * std::max(diameter(), 1e-30);
    const double h = length_param_ / n;
    for (int i = 0; i < n; ++i) {
        for (int j = i + sep + 1; j < n; ++j) {
            if (i + n - j <= sep) continue;
            const double d = (samples_[i] - samples_[j]).norm();
            if (d < floor_dist) throw EmbeddednessError(i * h, j * h, d);
        }
    }
    // Regularity: tangent must not vanish anywhere near the nodes.
    for (int i = 0; i < 4 * n; ++i) {
        if (tangent(i * length_param_ / (4 * n)).norm() < 1e-12)
            throw std::invalid_argument("knot: vanishing tangent (not regular)");
    }
}

Knot Knot::arc_length_reparametrized(int n) const {
    const int src = static_cast<int>(samples_.size());
    if (n <= 0) n = src;
    // Cumulative length at a fine subdivision, then inverse lookup.
    const int fine = 8 * src;
    const double h = length_param_ / fine;
    const GaussRule& g = gauss_legendre(4);
    std::vector<double> cum(fine + 1, 0.0);
    for (int i = 0; i < fine; ++i) {
        double seg = 0.0;
        for (std::size_t q = 0; q < g.nodes.size(); ++q)
            seg += g.weights[q] * tangent((i + 0.5 + 0.5 * g.nodes[q]) * h).norm();
        cum[i + 1] = cum[i] + seg * 0.5 * h;
    }
    const double total = cum[fine];
    std::vector<Vec3> pts(n);
    int seg_idx = 0;
    for (int i = 0; i < n; ++i) {
        const double target = total * i / n;
        while (seg_idx < fine - 1 && cum[seg_idx + 1] < target) ++seg_idx;
        const double frac = (target - cum[seg_idx]) /
                            std::max(cum[seg_idx + 1] - cum[seg_idx], 1e-300);
        pts[i] = point((seg_idx + frac) * h);
    }
    Knot out(std::move(pts), name_, true);
    out.length_param_ = total;
    out.build_spline();
    out.check_embedded();
    return out;
}

namespace {

void require_resolution(int samples) {
    if (samples < 64)
        throw std::invalid_argument("knot builder: resolution must be >= 64 samples");
}

}  // namespace

Knot make_circle(int samples, double radius) {
    require_resolution(samples);
    std::vector<Vec3> pts(samples);
    for (int i = 0; i < samples; ++i) {
        const double th = 2.0 * M_PI * i / samples;
        pts[i] = {radius * std::cos(th), radius * std::sin(th), 0.0};
    }
    return Knot(std::move(pts), "circle");
}

Knot make_torus_knot(int p, int q, int samples) {
    require_resolution(samples);
    std::vector<Vec3> pts(samples);
    for (int i = 0; i < samples; ++i) {
        const double th = 2.0 * M_PI * i / samples;
        const double r = 2.0 + std::cos(q * th);
        pts[i] = {r * std::cos(p * th), r * std::sin(p * th), -std::sin(q * th)};
    }
    return Knot(std::move(pts), "torus(" + std::to_string(p) + "," + std::to_string(q) + ")");
}

Knot make_figure_eight(int samples) {
    require_resolution(samples);
    std::vector<Vec3> pts(samples);
    for (int i = 0; i < samples; ++i) {
        const double th = 2.0 * M_PI * i / samples;
        const double r = 2.0 + std::cos(2.0 * th);
        pts[i] = {r * std::cos(3.0 * th), r * std::sin(3.0 * th), std::sin(4.0 * th)};
    }
    return Knot(std::move(pts), "figure8");
}

std::pair<Knot, Knot> make_hopf_pair(int samples) {
    require_resolution(samples);
    std::vector<Vec3> a(samples), b(samples);
    for (int i = 0; i < samples; ++i) {
        const double th = 2.0 * M_PI * i / samples;
        a[i] = {std::cos(th), std::sin(th), 0.0};
        b[i] = {1.0 + std::cos(th), 0.0, std::sin(th)};
    }
    return {Knot(std::move(a), "hopfA"), Knot(std::move(b), "hopfB")};
}

Knot make_from_points(std::vector<Vec3> pts, std::string name) {
    require_resolution(static_cast<int>(pts.size()));
    return Knot(std::move(pts), std::move(name));
}

Knot make_wiggly_unknot(int samples, std::uint64_t seed, double amplitude) {
    require_resolution(samples);
    CounterRng rng = make_stream(seed, RngStream::knot_perturbation);
    double c[6];
    for (int i = 0; i < 6; ++i) c[i] = rng.uniform(i, -1.0, 1.0);
    std::vector<Vec3> pts(samples);
    for (int i = 0; i < samples; ++i) {
        const double th = 2.0 * M_PI * i / samples;
        const double rho =
            1.0 + amplitude * (c[0] * std::cos(2 * th) + c[1] * std::sin(3 * th));
        const double z =
            amplitude * (c[2] * std::sin(2 * th) + c[3] * std::cos(3 * th) +
                         0.5 * c[4] * std::sin(5 * th + c[5]));
        pts[i] = {rho * std::cos(th), rho * std::sin(th), z};
    }
    return Knot(std::move(pts), "wiggly(" + std::to_string(seed) + ")");
}

Knot mirror_knot(const Knot& k) {
    std::vector<Vec3> pts = k.samples();
    for (Vec3& p : pts) p.z = -p.z;
    return Knot(std::move(pts), k.name() + "-mirror");
}

Knot perturb_knot(const Knot& k, std::uint64_t seed, double rel_amp) {
    CounterRng rng = make_stream(seed, RngStream::knot_perturbation);
    const double amp = rel_amp * k.min_self_distance();
    const int modes = 4;
    std::vector<Vec3> pts = k.samples();
    const int n = static_cast<int>(pts.size());
    // Trigonometric displacement field, normalized to peak amplitude `amp`.
    std::vector<Vec3> disp(n, Vec3{});
    for (int j = 1; j <= modes; ++j) {
        const std::uint64_t c0 = 6 * (j - 1);
        const Vec3 cj{rng.uniform(c0, -1, 1), rng.uniform(c0 + 1, -1, 1),
                      rng.uniform(c0 + 2, -1, 1)};
        const Vec3 sj{rng.uniform(c0 + 3, -1, 1), rng.uniform(c0 + 4, -1, 1),
                      rng.uniform(c0 + 5, -1, 1)};
        for (int i = 0; i < n; ++i) {
            const double th = 2.0 * M_PI * j * i / n;
            disp[i] += cj * std::cos(th) + sj * std::sin(th);
        }
    }
    double peak = 0.0;
    for (const Vec3& d : disp) peak = std::max(peak, d.norm());
    const double scale = peak > 0 ? amp / peak : 0.0;
    for (int i = 0; i < n; ++i) pts[i] += disp[i] * scale;
    return Knot(std::move(pts), k.name() + "-pert" + std::to_string(seed));
}

Knot make_knot_by_spec(const std::string& spec, int samples) {
    if (spec == "circle") return make_circle(samples);
    if (spec == "trefoil") return make_torus_knot(2, 3, samples);
    if (spec == "figure8") return make_figure_eight(samples);
    if (spec == "hopfA") return make_hopf_pair(samples).first;
    if (spec == "hopfB") return make_hopf_pair(samples).second;
    if (spec.rfind("torus:", 0) == 0) {
        const auto comma = spec.find(',', 6);
        if (comma == std::string::npos)
            throw std::invalid_argument("knot spec: torus:p,q");
        return make_torus_knot(std::stoi(spec.substr(6, comma - 6)),
                               std::stoi(spec.substr(comma + 1)), samples);
    }
    if (spec.rfind("wiggly:", 0) == 0)
        return make_wiggly_unknot(samples, std::stoull(spec.substr(7)));
    if (spec.rfind("file:", 0) == 0) return read_knot_csv(spec.substr(5));
    throw std::invalid_argument("unknown knot spec '" + spec + "'");
}

namespace {

struct Frame {
    Vec3 e1, e2, v;
};

Frame make_frame(const Vec3& v_in) {
    Frame f;
    f.v = v_in.normalized();
    Vec3 seed = std::abs(f.v.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    f.e1 = (seed - f.v * dot(seed, f.v)).normalized();
    f.e2 = cross(f.v, f.e1);  // (e1, e2, v) right-handed
    return f;
}

struct P2 {
    double x, y;
};

double cross2(const P2& a, const P2& b) { return a.x * b.y - a.y * b.x; }

bool segments_intersect(const P2& a0, const P2& a1, const P2& b0, const P2& b1) {
    auto orient = [](const P2& p, const P2& q, const P2& r) {
        return cross2({q.x - p.x, q.y - p.y}, {r.x - p.x, r.y - p.y});
    };
    const double o1 = orient(a0, a1, b0), o2 = orient(a0, a1, b1);
    const double o3 = orient(b0, b1, a0), o4 = orient(b0, b1, a1);
    return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0));
}

}  // namespace

ProjectionDiagram project_and_sign(const Knot& k, const Vec3& v_in,
                                   double tol_angle, double tol_transverse) {
    const Frame f = make_frame(v_in);
    const double L = k.param_length();
    const int n = static_cast<int>(k.sample_count());

    // Membership in G_K: v must keep an angular margin to every tangent.
    for (int i = 0; i < n; ++i) {
        const Vec3 t = k.tangent(i * L / n).normalized();
        if (cross(f.v, t).norm() < tol_angle)
            throw NonGenericDirection("parallel to a tangent (not in G_K)");
    }

    const int m = std::max(2 * n, 512);
    std::vector<P2> q(m);
    for (int i = 0; i < m; ++i) {
        const Vec3 p = k.point(i * L / m);
        q[i] = {dot(p, f.e1), dot(p, f.e2)};
    }

    const double diam = k.diameter();
    ProjectionDiagram diag;
    diag.direction = f.v;
    std::vector<std::pair<double, double>> found;

    auto refine = [&](double s0, double t0) -> std::optional<std::pair<double, double>> {
        double s = s0, t = t0;
        for (int it = 0; it < 60; ++it) {
            const Vec3 ps = k.point(s), pt = k.point(t);
            const P2 F{dot(ps - pt, f.e1), dot(ps - pt, f.e2)};
            if (std::sqrt(F.x * F.x + F.y * F.y) < 1e-12 * diam) break;
            const Vec3 ds = k.tangent(s), dtv = k.tangent(t);
            const double j00 = dot(ds, f.e1), j01 = -dot(dtv, f.e1);
            const double j10 = dot(ds, f.e2), j11 = -dot(dtv, f.e2);
            const double det = j00 * j11 - j01 * j10;
            if (std::abs(det) < 1e-300) return std::nullopt;
            const double dsv = (F.x * j11 - F.y * j01) / det;
            const double dtv2 = (j00 * F.y - j10 * F.x) / det;
            s -= dsv;
            t -= dtv2;
        }
        const Vec3 ps = k.point(s), pt = k.point(t);
        const P2 F{dot(ps - pt, f.e1), dot(ps - pt, f.e2)};
        if (std::sqrt(F.x * F.x + F.y * F.y) > 1e-9 * diam) return std::nullopt;
        return std::make_pair(s, t);
    };

    const double seg = L / m;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 2; j < m; ++j) {
            if (i == 0 && j == m - 1) continue;  // cyclically adjacent
            if (!segments_intersect(q[i], q[(i + 1) % m], q[j], q[(j + 1) % m]))
                continue;
            auto r = refine((i + 0.5) * seg, (j + 0.5) * seg);
            if (!r) continue;
            double s = std::fmod(r->first, L), t = std::fmod(r->second, L);
            if (s < 0) s += L;
            if (t < 0) t += L;
            if (s > t) std::swap(s, t);
            bool dup = false;
            for (const auto& [fs, ft] : found) {
                if (std::abs(fs - s) < 0.75 * seg && std::abs(ft - t) < 0.75 * seg) {
                    dup = true;
                    break;
                }
            }
            if (dup) continue;
            found.emplace_back(s, t);

            const double hs = dot(k.point(s), f.v), ht = dot(k.point(t), f.v);
            if (std::abs(hs - ht) < 1e-9 * diam)
                throw NonGenericDirection("crossing strands at equal height");
            double t_over = s, t_under = t;
            if (ht > hs) std::swap(t_over, t_under);
            const Vec3 to = k.tangent(t_over), tu = k.tangent(t_under);
            // Transversality in projected coordinates.
            const P2 po{dot(to, f.e1), dot(to, f.e2)};
            const P2 pu{dot(tu, f.e1), dot(tu, f.e2)};
            const double no = std::hypot(po.x, po.y), nu = std::hypot(pu.x, pu.y);
            if (std::abs(cross2(po, pu)) < tol_transverse * no * nu)
                throw NonGenericDirection("non-transverse crossing");
            Crossing c;
            c.t_over = t_over;
            c.t_under = t_under;
            c.sign = triple(f.v, to, tu) > 0 ? 1 : -1;
            diag.crossings.push_back(c);
        }
    }
    return diag;
}

int directional_writhe(const Knot& k, const Vec3& v) {
    ProjectionDiagram d;
    try {
        d = project_and_sign(k, v);
    } catch (const NonGenericDirection& e) {
        if (std::string(e.what()).find("G_K") != std::string::npos) return 0;
        throw;  // tangency at a crossing: caller should resample v
    }
    int s = 0;
    for (const Crossing& c : d.crossings) s += c.sign;
    return s;
}

void write_knot_csv(const Knot& k, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot write " + path);
    os << "# knot: " << k.name() << "\n";
    os << "# closure: periodic-cubic-spline\n";
    os << "# parametrization: uniform-parameter length=" << k.param_length() << "\n";
    os << "x,y,z\n";
    char buf[128];
    for (const Vec3& p : k.samples()) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", p.x, p.y, p.z);
        os << buf;
    }
}

Knot read_knot_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot read " + path);
    std::string line, name = path;
    std::vector<Vec3> pts;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto pos = line.find("knot:");
            if (pos != std::string::npos) {
                name = line.substr(pos + 5);
                while (!name.empty() && name.front() == ' ') name.erase(name.begin());
            }
            continue;
        }
        if (line.find_first_of("0123456789+-.") != 0) continue;  // column header
        std::istringstream ls(line);
        Vec3 p;
        char comma;
        if (ls >> p.x >> comma >> p.y >> comma >> p.z) pts.push_back(p);
    }
    return make_from_points(std::move(pts), name);
}

}  // namespace orbitknots
