#include "orbitknots/diagram.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace orbitknots {

void DiagramCombination::add(const TrivalentDiagram& d, const Rational& coeff) {
    if (coeff == 0) return;
    auto [it, inserted] = terms_.emplace(d, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0) terms_.erase(it);
    }
}

DiagramCombination DiagramCombination::operator+(const DiagramCombination& o) const {
    DiagramCombination r = *this;
    for (const auto& [d, c] : o.terms_) r.add(d, c);
    return r;
}

DiagramCombination DiagramCombination::operator-(const DiagramCombination& o) const {
    DiagramCombination r = *this;
    for (const auto& [d, c] : o.terms_) r.add(d, -c);
    return r;
}

DiagramCombination DiagramCombination::operator*(const Rational& c) const {
    DiagramCombination r;
    if (c == 0) return r;
    for (const auto& [d, v] : terms_) r.add(d, v * c);
    return r;
}

namespace {

std::vector<int> valences(const TrivalentDiagram& d) {
    std::vector<int> val(d.k + d.s, 0);
    for (const auto& [i, j] : d.edges) {
        val.at(i) += 1;
        val.at(j) += 1;
    }
    return val;
}

bool connected_with_arcs(const TrivalentDiagram& d) {
    const int n = d.k + d.s;
    if (n == 0) return false;
    std::vector<std::vector<int>> adj(n);
    for (const auto& [i, j] : d.edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    for (int i = 0; i < d.k; ++i) {
        const int j = (i + 1) % d.k;
        if (i != j) {
            adj[i].push_back(j);
            adj[j].push_back(i);
        }
    }
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (int u : adj[v]) {
            if (!seen[u]) {
                seen[u] = 1;
                ++count;
                stack.push_back(u);
            }
        }
    }
    return count == n;
}

}  // namespace

void validate_diagram(const TrivalentDiagram& d) {
    if (d.k < 2) throw std::invalid_argument("diagram: need at least 2 circle vertices");
    if (d.s < 0) throw std::invalid_argument("diagram: negative free vertex count");
    if ((d.k + d.s) % 2 != 0)
        throw std::invalid_argument("diagram: k + s must be even");
    if ((d.k + 3 * d.s) % 2 != 0)
        throw std::invalid_argument("diagram: k + 3s must be even");
    const int n = d.k + d.s;
    std::vector<std::pair<int, int>> sorted_edges;
    for (auto [i, j] : d.edges) {
        if (i == j) throw std::invalid_argument("diagram: self-loop");
        if (i > j) std::swap(i, j);
        if (i < 0 || j >= n) throw std::invalid_argument("diagram: label out of range");
        sorted_edges.emplace_back(i, j);
    }
    std::sort(sorted_edges.begin(), sorted_edges.end());
    if (std::adjacent_find(sorted_edges.begin(), sorted_edges.end()) !=
        sorted_edges.end())
        throw std::invalid_argument("diagram: repeated edge");
    if (static_cast<int>(d.edges.size()) != d.edge_count())
        throw std::invalid_argument("diagram: edge count must be (k+3s)/2");
    const auto val = valences(d);
    for (int i = 0; i < d.k; ++i)
        if (val[i] != 1)
            throw std::invalid_argument("diagram: circle vertex valence != 1");
    for (int i = d.k; i < n; ++i)
        if (val[i] != 3)
            throw std::invalid_argument("diagram: free vertex valence != 3");
    if (!connected_with_arcs(d))
        throw std::invalid_argument("diagram: disconnected (circle arcs included)");
}

namespace {

TrivalentDiagram relabeled(const TrivalentDiagram& d, const std::vector<int>& map) {
    TrivalentDiagram r;
    r.k = d.k;
    r.s = d.s;
    r.edges.reserve(d.edges.size());
    for (auto [i, j] : d.edges) {
        int a = map[i], b = map[j];
        if (a > b) std::swap(a, b);
        r.edges.emplace_back(a, b);
    }
    std::sort(r.edges.begin(), r.edges.end());
    return r;
}

}  // namespace

TrivalentDiagram canonicalize(const TrivalentDiagram& d) {
    validate_diagram(d);
    if (d.s > 8)
        throw std::invalid_argument(
            "canonicalize: more than 8 free vertices unsupported");
    const int n = d.k + d.s;
    std::vector<int> free_perm(d.s);
    std::iota(free_perm.begin(), free_perm.end(), 0);

    TrivalentDiagram best;
    bool have_best = false;
    std::vector<int> map(n);
    for (int rot = 0; rot < d.k; ++rot) {
        for (int i = 0; i < d.k; ++i) map[i] = (i - rot + d.k) % d.k;
        std::vector<int> perm = free_perm;
        do {
            for (int i = 0; i < d.s; ++i) map[d.k + i] = d.k + perm[i];
            TrivalentDiagram cand = relabeled(d, map);
            if (!have_best || cand < best) {
                best = std::move(cand);
                have_best = true;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    return best;
}

int rotation_symmetry_order(const TrivalentDiagram& canonical) {
    const int n = canonical.k + canonical.s;
    std::vector<int> free_perm(canonical.s);
    std::iota(free_perm.begin(), free_perm.end(), 0);
    std::vector<int> map(n);
    int order = 0;
    for (int rot = 0; rot < canonical.k; ++rot) {
        for (int i = 0; i < canonical.k; ++i) map[i] = (i - rot + canonical.k) % canonical.k;
        std::vector<int> perm = free_perm;
        bool fixes = false;
        do {
            for (int i = 0; i < canonical.s; ++i) map[canonical.k + i] = canonical.k + perm[i];
            if (relabeled(canonical, map) == canonical) {
                fixes = true;
                break;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        if (fixes) ++order;
    }
    return order;
}

namespace {

// All simple graphs with the prescribed valence sequence: circle vertices
// valence 1, free vertices valence 3. Partner sets are assigned to the
// smallest open vertex in increasing order, which visits every edge set
// exactly once.
void valence_backtrack(int n, std::vector<int>& rem,
                       std::vector<std::pair<int, int>>& edges,
                       std::vector<std::vector<char>>& used,
                       const std::function<void(const std::vector<std::pair<int, int>>&)>& emit) {
    int v = -1;
    for (int i = 0; i < n; ++i)
        if (rem[i] > 0) {
            v = i;
            break;
        }
    if (v < 0) {
        emit(edges);
        return;
    }
    const int need = rem[v];
    std::vector<int> cands;
    for (int u = v + 1; u < n; ++u)
        if (rem[u] > 0 && !used[v][u]) cands.push_back(u);
    if (static_cast<int>(cands.size()) < need) return;
    std::vector<int> pick(need);
    std::function<void(int, int)> choose = [&](int start, int depth) {
        if (depth == need) {
            rem[v] = 0;
            for (int idx : pick) {
                rem[idx] -= 1;
                used[v][idx] = 1;
                edges.emplace_back(v, idx);
            }
            valence_backtrack(n, rem, edges, used, emit);
            rem[v] = need;
            for (int idx : pick) {
                rem[idx] += 1;
                used[v][idx] = 0;
                edges.pop_back();
            }
            return;
        }
        for (int i = start; i < static_cast<int>(cands.size()); ++i) {
            pick[depth] = cands[i];
            choose(i + 1, depth + 1);
        }
    };
    choose(0, 0);
}

}  // namespace

std::vector<TrivalentDiagram> enumerate_diagrams(int degree) {
    if (degree <= 0) throw std::invalid_argument("enumerate_diagrams: degree must be >= 1");
    std::vector<TrivalentDiagram> out;
    std::map<TrivalentDiagram, char> seen;
    for (int k = 2; k <= 2 * degree; ++k) {
        const int s = 2 * degree - k;
        if ((k + 3 * s) % 2 != 0) continue;
        const int n = k + s;
        std::vector<int> rem(n);
        for (int i = 0; i < n; ++i) rem[i] = i < k ? 1 : 3;
        std::vector<std::pair<int, int>> edges;
        std::vector<std::vector<char>> used(n, std::vector<char>(n, 0));
        valence_backtrack(n, rem, edges, used,
                          [&](const std::vector<std::pair<int, int>>& es) {
                              TrivalentDiagram d;
                              d.k = k;
                              d.s = s;
                              d.edges = es;
                              std::sort(d.edges.begin(), d.edges.end());
                              if (!connected_with_arcs(d)) return;
                              TrivalentDiagram canon = canonicalize(d);
                              if (seen.emplace(canon, 1).second) out.push_back(canon);
                          });
    }
    std::sort(out.begin(), out.end());
    return out;
}

DiagramCombination stu_expand_at(const TrivalentDiagram& d, int free_vertex,
                                 int circle_neighbor) {
    validate_diagram(d);
    if (free_vertex < d.k || free_vertex >= d.k + d.s)
        throw std::invalid_argument("stu_expand: vertex is not a free vertex");
    std::vector<int> nbrs;
    bool c_found = false;
    for (auto [i, j] : d.edges) {
        if (i == free_vertex || j == free_vertex) {
            const int other = (i == free_vertex) ? j : i;
            if (other == circle_neighbor)
                c_found = true;
            else
                nbrs.push_back(other);
        }
    }
    if (circle_neighbor >= d.k || !c_found)
        throw std::invalid_argument("stu_expand: not a circle neighbour of the vertex");
    if (nbrs.size() != 2)
        throw std::invalid_argument("stu_expand: free vertex valence != 3");
    const int c = circle_neighbor;
    // Order the remaining legs rotation-covariantly: circle neighbours by
    // cyclic offset from c (so the relation is independent of which circle
    // neighbour of a symmetric vertex gets resolved), free neighbours after
    // them by label.
    auto leg_key = [&](int v) {
        if (v < d.k) return std::pair<int, int>(0, (v - c + d.k) % d.k);
        return std::pair<int, int>(1, v);
    };
    std::sort(nbrs.begin(), nbrs.end(),
              [&](int a, int b) { return leg_key(a) < leg_key(b); });
    const int p = nbrs[0], q = nbrs[1];

    // New label space: circle grows by one (c is replaced by positions c and
    // c+1), the expanded free vertex disappears. Old labels map monotonically.
    auto map_old = [&](int v) -> int {
        if (v < d.k) return v < c ? v : v + 1;  // old c never queried
        int f = v - d.k;
        const int ft = free_vertex - d.k;
        if (f > ft) f -= 1;
        return (d.k + 1) + f;
    };

    TrivalentDiagram base;
    base.k = d.k + 1;
    base.s = d.s - 1;
    for (auto [i, j] : d.edges) {
        if (i == free_vertex || j == free_vertex) continue;
        int a = map_old(i), b = map_old(j);
        if (a > b) std::swap(a, b);
        base.edges.emplace_back(a, b);
    }
    const int c1 = c, c2 = c + 1;
    const int pm = map_old(p), qm = map_old(q);

    auto with_edges = [&](int pa, int pb, int qa, int qb) {
        TrivalentDiagram t = base;
        int a = std::min(pa, pb), b = std::max(pa, pb);
        t.edges.emplace_back(a, b);
        a = std::min(qa, qb);
        b = std::max(qa, qb);
        t.edges.emplace_back(a, b);
        std::sort(t.edges.begin(), t.edges.end());
        return canonicalize(t);
    };

    DiagramCombination out;
    out.add(with_edges(pm, c1, qm, c2), Rational(1));   // S-term
    out.add(with_edges(pm, c2, qm, c1), Rational(-1));  // U-term
    return out;
}

DiagramCombination stu_expand(const TrivalentDiagram& d, int free_vertex) {
    validate_diagram(d);
    if (free_vertex < d.k || free_vertex >= d.k + d.s)
        throw std::invalid_argument("stu_expand: vertex is not a free vertex");
    int c = -1;
    for (auto [i, j] : d.edges) {
        if (i == free_vertex && j < d.k) c = (c < 0) ? j : std::min(c, j);
        if (j == free_vertex && i < d.k) c = (c < 0) ? i : std::min(c, i);
    }
    if (c < 0)
        throw std::invalid_argument(
            "stu_expand: free vertex has no circle neighbour");
    return stu_expand_at(d, free_vertex, c);
}

StuBasis::StuBasis(int degree, const std::vector<int>* relation_order)
    : degree_(degree) {
    if (degree < 1 || degree > 3)
        throw std::invalid_argument("stu_basis: only degrees 1..3 are supported");
    diagrams_ = enumerate_diagrams(degree);
    for (std::size_t i = 0; i < diagrams_.size(); ++i)
        index_[diagrams_[i]] = static_cast<int>(i);

    // One relation d - S + U per (free vertex, circle neighbour) pair.
    std::vector<std::vector<Rational>> rows;
    for (const TrivalentDiagram& d : diagrams_) {
        for (int t = d.k; t < d.k + d.s; ++t) {
            for (auto [i, j] : d.edges) {
                int c = -1;
                if (i == t && j < d.k) c = j;
                if (j == t && i < d.k) c = i;
                if (c < 0) continue;
                DiagramCombination rel;
                rel.add(d, Rational(1));
                rel = rel - stu_expand_at(d, t, c);
                std::vector<Rational> row(diagrams_.size(), Rational(0));
                for (const auto& [dd, cc] : rel.terms()) {
                    auto it = index_.find(dd);
                    if (it == index_.end())
                        throw std::logic_error("stu_basis: expansion left TD_n");
                    row[it->second] = cc;
                }
                rows.push_back(std::move(row));
            }
        }
    }
    if (relation_order) {
        if (relation_order->size() != rows.size())
            throw std::invalid_argument("stu_basis: bad relation order length");
        std::vector<std::vector<Rational>> permuted(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            permuted[i] = std::move(rows[(*relation_order)[i]]);
        rows = std::move(permuted);
    }

    // Gauss-Jordan to reduced row echelon form (exact arithmetic). The RREF
    // depends only on the row span, not the row order.
    const std::size_t ncols = diagrams_.size();
    std::size_t rank = 0;
    for (std::size_t col = 0; col < ncols && rank < rows.size(); ++col) {
        std::size_t pivot = rows.size();
        for (std::size_t r = rank; r < rows.size(); ++r)
            if (rows[r][col] != 0) {
                pivot = r;
                break;
            }
        if (pivot == rows.size()) continue;
        std::swap(rows[rank], rows[pivot]);
        const Rational inv = Rational(1) / rows[rank][col];
        for (auto& v : rows[rank]) v *= inv;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r == rank || rows[r][col] == 0) continue;
            const Rational f = rows[r][col];
            for (std::size_t cc = 0; cc < ncols; ++cc)
                rows[r][cc] -= f * rows[rank][cc];
        }
        pivot_col_.push_back(static_cast<int>(col));
        ++rank;
    }
    rows.resize(rank);
    rref_ = std::move(rows);

    std::vector<char> is_pivot(ncols, 0);
    for (int c : pivot_col_) is_pivot[c] = 1;
    for (std::size_t c = 0; c < ncols; ++c)
        if (!is_pivot[c]) {
            basis_.push_back(diagrams_[c]);
            basis_col_.push_back(static_cast<int>(c));
        }
}

std::vector<Rational> StuBasis::reduce(const DiagramCombination& c) const {
    std::vector<Rational> vec(diagrams_.size(), Rational(0));
    for (const auto& [d, coeff] : c.terms()) {
        if (d.degree() != degree_)
            throw std::invalid_argument("reduce: degree mismatch");
        TrivalentDiagram canon = canonicalize(d);
        auto it = index_.find(canon);
        if (it == index_.end()) throw std::invalid_argument("reduce: unknown diagram");
        vec[it->second] += coeff;
    }
    // Eliminate pivot coordinates with the reduced relation rows.
    for (std::size_t r = 0; r < rref_.size(); ++r) {
        const int pc = pivot_col_[r];
        if (vec[pc] == 0) continue;
        const Rational f = vec[pc];
        for (std::size_t cc = 0; cc < vec.size(); ++cc) vec[cc] -= f * rref_[r][cc];
    }
    std::vector<Rational> coords(basis_col_.size());
    for (std::size_t i = 0; i < basis_col_.size(); ++i) coords[i] = vec[basis_col_[i]];
    return coords;
}

WeightSystem make_weight_system(const StuBasis& st,
                                const std::vector<Rational>& basis_values) {
    if (basis_values.size() != st.dimension())
        throw std::invalid_argument("make_weight_system: wrong value count");
    WeightSystem w;
    w.degree = st.degree();
    for (const TrivalentDiagram& d : st.diagrams()) {
        DiagramCombination c;
        c.add(d, Rational(1));
        const auto coords = st.reduce(c);
        Rational v(0);
        for (std::size_t i = 0; i < coords.size(); ++i) v += coords[i] * basis_values[i];
        w.values[d] = v;
    }
    return w;
}

Rational weight_eval(const WeightSystem& w, const DiagramCombination& c) {
    Rational out(0);
    for (const auto& [d, coeff] : c.terms()) {
        if (d.degree() != w.degree)
            throw std::invalid_argument("weight_eval: degree mismatch");
        auto it = w.values.find(canonicalize(d));
        if (it == w.values.end())
            throw std::invalid_argument("weight_eval: diagram missing from weight system");
        out += coeff * it->second;
    }
    return out;
}

std::string format_diagram(const TrivalentDiagram& d) {
    std::ostringstream os;
    os << d.k << " " << d.s << ";";
    for (std::size_t i = 0; i < d.edges.size(); ++i) {
        os << (i == 0 ? " " : ",") << d.edges[i].first + 1 << "-"
           << d.edges[i].second + 1;
    }
    return os.str();
}

TrivalentDiagram parse_diagram(const std::string& text) {
    TrivalentDiagram d;
    const auto semi = text.find(';');
    if (semi == std::string::npos)
        throw std::invalid_argument("parse_diagram: missing ';'");
    {
        std::istringstream head(text.substr(0, semi));
        if (!(head >> d.k >> d.s))
            throw std::invalid_argument("parse_diagram: bad 'k s' header");
    }
    std::string rest = text.substr(semi + 1);
    std::istringstream body(rest);
    std::string item;
    while (std::getline(body, item, ',')) {
        const auto dash = item.find('-');
        if (dash == std::string::npos) {
            if (item.find_first_not_of(" \t") == std::string::npos) continue;
            throw std::invalid_argument("parse_diagram: bad edge '" + item + "'");
        }
        const int a = std::stoi(item.substr(0, dash));
        const int b = std::stoi(item.substr(dash + 1));
        d.edges.emplace_back(std::min(a, b) - 1, std::max(a, b) - 1);
    }
    std::sort(d.edges.begin(), d.edges.end());
    validate_diagram(d);
    return d;
}

std::string format_combination(const DiagramCombination& c) {
    if (c.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (const auto& [d, coeff] : c.terms()) {
        if (!first) os << " + ";
        os << coeff << "*(" << format_diagram(d) << ")";
        first = false;
    }
    return os.str();
}

TrivalentDiagram chord_diagram() {
    TrivalentDiagram d;
    d.k = 2;
    d.s = 0;
    d.edges = {{0, 1}};
    return d;
}

TrivalentDiagram crossed_chords() {
    TrivalentDiagram d;
    d.k = 4;
    d.s = 0;
    d.edges = {{0, 2}, {1, 3}};
    return d;
}

TrivalentDiagram parallel_chords() {
    TrivalentDiagram d;
    d.k = 4;
    d.s = 0;
    d.edges = {{0, 1}, {2, 3}};
    return canonicalize(d);
}

TrivalentDiagram tripod() {
    TrivalentDiagram d;
    d.k = 3;
    d.s = 1;
    d.edges = {{0, 3}, {1, 3}, {2, 3}};
    return d;
}

}  // namespace orbitknots
