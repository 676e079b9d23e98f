#include "orbitknots/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <queue>

namespace orbitknots {

namespace {

GaussRule compute_gauss(int order) {
    // Newton iteration on Legendre P_n from the Chebyshev initial guess.
    GaussRule rule;
    rule.nodes.resize(order);
    rule.weights.resize(order);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[i] = -x;
        rule.weights[i] = w;
        rule.nodes[n - 1 - i] = x;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace

const GaussRule& gauss_legendre(int order) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss(order)).first;
    return it->second;
}

double gauss_integrate(const std::function<double(double)>& f, double a, double b,
                       int order) {
    const GaussRule& r = gauss_legendre(order);
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    KahanSum s;
    for (int i = 0; i < order; ++i) s.add(r.weights[i] * f(mid + half * r.nodes[i]));
    return s.value() * half;
}

namespace {

// Kronrod 15-point extension of Gauss 7 (nodes/weights from the standard
// QUADPACK tables).
constexpr std::array<double, 8> kGK15Nodes = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.0};
constexpr std::array<double, 8> kGK15WK = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
constexpr std::array<double, 4> kGK15WG = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

struct Segment {
    double a, b, value, err;
    bool operator<(const Segment& o) const { return err < o.err; }
};

Segment eval_gk15(const std::function<double(double)>& f, double a, double b) {
    const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double resk = 0.0, resg = 0.0;
    const double fc = f(mid);
    resk += kGK15WK[7] * fc;
    resg += kGK15WG[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double x = half * kGK15Nodes[i];
        const double fv = f(mid - x) + f(mid + x);
        resk += kGK15WK[i] * fv;
        if (i % 2 == 1) resg += kGK15WG[i / 2] * fv;
    }
    Segment s;
    s.a = a;
    s.b = b;
    s.value = resk * half;
    s.err = std::abs((resk - resg) * half);
    // QUADPACK-style error sharpening.
    s.err = std::min(s.err, std::pow(200.0 * s.err, 1.5));
    return s;
}

}  // namespace

AdaptiveResult adaptive_gk(const std::function<double(double)>& f, double a, double b,
                           double abs_tol, double rel_tol, int max_intervals) {
    AdaptiveResult res;
    if (a == b) return res;
    std::priority_queue<Segment> heap;
    Segment s0 = eval_gk15(f, a, b);
    res.evals = 15;
    double total = s0.value, toterr = s0.err;
    heap.push(s0);
    int n_int = 1;
    while (toterr > std::max(abs_tol, rel_tol * std::abs(total)) &&
           n_int < max_intervals) {
        Segment worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid == worst.a || mid == worst.b) {
            heap.push(worst);  // interval at floating-point resolution
            break;
        }
        Segment l = eval_gk15(f, worst.a, mid);
        Segment r = eval_gk15(f, mid, worst.b);
        res.evals += 30;
        total += l.value + r.value - worst.value;
        toterr += l.err + r.err - worst.err;
        heap.push(l);
        heap.push(r);
        ++n_int;
    }
    res.value = total;
    res.error = toterr;
    res.converged = toterr <= std::max(abs_tol, rel_tol * std::abs(total)) * 1.001 +
                              1e-300;
    return res;
}

double periodic_trapezoid(const std::function<double(double)>& f, double period,
                          int n) {
    const double h = period / n;
    KahanSum s;
    for (int i = 0; i < n; ++i) s.add(f(i * h));
    return s.value() * h;
}

namespace {

// Degree-5, 7-point symmetric rule on the reference triangle, compared
// against the centroid-split refinement for the error estimate.
struct TriCell {
    Tri2D t;
    double value, err;
    bool operator<(const TriCell& o) const { return err < o.err; }
};

double tri_area(const Tri2D& t) {
    return 0.5 * std::abs((t.x1 - t.x0) * (t.y2 - t.y0) -
                          (t.x2 - t.x0) * (t.y1 - t.y0));
}

double rule7(const std::function<double(double, double)>& f, const Tri2D& t) {
    static const double w0 = 0.225;
    static const double a1 = 0.059715871789770, b1 = 0.470142064105115,
                        w1 = 0.132394152788506;
    static const double a2 = 0.797426985353087, b2 = 0.101286507323456,
                        w2 = 0.125939180544827;
    auto pt = [&](double l0, double l1, double l2) {
        return f(l0 * t.x0 + l1 * t.x1 + l2 * t.x2,
                 l0 * t.y0 + l1 * t.y1 + l2 * t.y2);
    };
    double s = w0 * pt(1.0 / 3, 1.0 / 3, 1.0 / 3);
    s += w1 * (pt(a1, b1, b1) + pt(b1, a1, b1) + pt(b1, b1, a1));
    s += w2 * (pt(a2, b2, b2) + pt(b2, a2, b2) + pt(b2, b2, a2));
    return s * tri_area(t);
}

std::array<Tri2D, 4> split4(const Tri2D& t) {
    const double mx01 = 0.5 * (t.x0 + t.x1), my01 = 0.5 * (t.y0 + t.y1);
    const double mx12 = 0.5 * (t.x1 + t.x2), my12 = 0.5 * (t.y1 + t.y2);
    const double mx20 = 0.5 * (t.x2 + t.x0), my20 = 0.5 * (t.y2 + t.y0);
    return {Tri2D{t.x0, t.y0, mx01, my01, mx20, my20},
            Tri2D{mx01, my01, t.x1, t.y1, mx12, my12},
            Tri2D{mx20, my20, mx12, my12, t.x2, t.y2},
            Tri2D{mx01, my01, mx12, my12, mx20, my20}};
}

TriCell eval_cell(const std::function<double(double, double)>& f, const Tri2D& t) {
    TriCell c;
    c.t = t;
    const double coarse = rule7(f, t);
    double fine = 0.0;
    for (const Tri2D& s : split4(t)) fine += rule7(f, s);
    c.value = fine;
    c.err = std::abs(fine - coarse);
    return c;
}

}  // namespace

namespace {

struct BoxCell {
    Box3D b;
    double value, err;
    bool operator<(const BoxCell& o) const { return err < o.err; }
};

double tensor_gauss3(const std::function<double(double, double, double)>& f,
                     const Box3D& b, int order) {
    const GaussRule& g = gauss_legendre(order);
    double s = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        const double x = 0.5 * (b.lo[0] + b.hi[0]) + 0.5 * (b.hi[0] - b.lo[0]) * g.nodes[i];
        for (std::size_t j = 0; j < g.nodes.size(); ++j) {
            const double y = 0.5 * (b.lo[1] + b.hi[1]) + 0.5 * (b.hi[1] - b.lo[1]) * g.nodes[j];
            for (std::size_t k = 0; k < g.nodes.size(); ++k) {
                const double z = 0.5 * (b.lo[2] + b.hi[2]) + 0.5 * (b.hi[2] - b.lo[2]) * g.nodes[k];
                s += g.weights[i] * g.weights[j] * g.weights[k] * f(x, y, z);
            }
        }
    }
    return s * 0.125 * (b.hi[0] - b.lo[0]) * (b.hi[1] - b.lo[1]) * (b.hi[2] - b.lo[2]);
}

BoxCell eval_box(const std::function<double(double, double, double)>& f, const Box3D& b) {
    BoxCell c;
    c.b = b;
    const double fine = tensor_gauss3(f, b, 3);
    const double coarse = tensor_gauss3(f, b, 2);
    c.value = fine;
    c.err = std::abs(fine - coarse);
    return c;
}

}  // namespace

AdaptiveResult adaptive_box3(const std::function<double(double, double, double)>& f,
                             const Box3D& box, double abs_tol, double rel_tol,
                             int max_cells) {
    AdaptiveResult res;
    std::priority_queue<BoxCell> heap;
    BoxCell c0 = eval_box(f, box);
    res.evals = 35;
    double total = c0.value, toterr = c0.err;
    heap.push(c0);
    int cells = 1;
    while (toterr > std::max(abs_tol, rel_tol * std::abs(total)) && cells < max_cells) {
        BoxCell worst = heap.top();
        heap.pop();
        total -= worst.value;
        toterr -= worst.err;
        int axis = 0;
        double len = worst.b.hi[0] - worst.b.lo[0];
        for (int a = 1; a < 3; ++a) {
            const double l = worst.b.hi[a] - worst.b.lo[a];
            if (l > len) {
                len = l;
                axis = a;
            }
        }
        const double mid = 0.5 * (worst.b.lo[axis] + worst.b.hi[axis]);
        Box3D left = worst.b, right = worst.b;
        left.hi[axis] = mid;
        right.lo[axis] = mid;
        for (const Box3D& half : {left, right}) {
            BoxCell c = eval_box(f, half);
            res.evals += 35;
            total += c.value;
            toterr += c.err;
            heap.push(c);
        }
        ++cells;
    }
    res.value = total;
    res.error = toterr;
    res.converged =
        toterr <= std::max(abs_tol, rel_tol * std::abs(total)) * 1.001 + 1e-300;
    return res;
}

AdaptiveResult adaptive_triangle(const std::function<double(double, double)>& f,
                                 const Tri2D& tri, double abs_tol, double rel_tol,
                                 int max_cells) {
    AdaptiveResult res;
    std::priority_queue<TriCell> heap;
    TriCell c0 = eval_cell(f, tri);
    res.evals = 35;
    double total = c0.value, toterr = c0.err;
    heap.push(c0);
    int cells = 1;
    while (toterr > std::max(abs_tol, rel_tol * std::abs(total)) &&
           cells < max_cells) {
        TriCell worst = heap.top();
        heap.pop();
        total -= worst.value;
        toterr -= worst.err;
        for (const Tri2D& s : split4(worst.t)) {
            TriCell c = eval_cell(f, s);
            res.evals += 35;
            total += c.value;
            toterr += c.err;
            heap.push(c);
        }
        cells += 3;
    }
    res.value = total;
    res.error = toterr;
    res.converged =
        toterr <= std::max(abs_tol, rel_tol * std::abs(total)) * 1.001 + 1e-300;
    return res;
}

}  // namespace orbitknots
