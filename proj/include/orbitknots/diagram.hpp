#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace orbitknots {

// Exact coefficients for diagram combinations and STU reduction. Floating
// point only enters at integral evaluation.
using Rational = boost::multiprecision::cpp_rational;

// A trivalent diagram: k vertices on the outer circle (labels 0..k-1, in
// circle order) and s free vertices inside it (labels k..k+s-1). Edges are
// stored as sorted label pairs; circle arcs are not edges. Free vertices
// have valence 3, circle vertices valence 1.
struct TrivalentDiagram {
    int k = 0;
    int s = 0;
    std::vector<std::pair<int, int>> edges;

    int degree() const { return (k + s) / 2; }
    int edge_count() const { return (k + 3 * s) / 2; }

    bool operator==(const TrivalentDiagram& o) const {
        return k == o.k && s == o.s && edges == o.edges;
    }
    bool operator<(const TrivalentDiagram& o) const {
        if (k != o.k) return k < o.k;
        if (s != o.s) return s < o.s;
        return edges < o.edges;
    }
};

// Formal linear combination of canonical diagrams with rational coefficients.
// Zero coefficients are erased.
class DiagramCombination {
public:
    DiagramCombination() = default;

    void add(const TrivalentDiagram& d, const Rational& coeff);
    const std::map<TrivalentDiagram, Rational>& terms() const { return terms_; }
    bool empty() const { return terms_.empty(); }

    DiagramCombination operator+(const DiagramCombination& o) const;
    DiagramCombination operator-(const DiagramCombination& o) const;
    DiagramCombination operator*(const Rational& c) const;

private:
    std::map<TrivalentDiagram, Rational> terms_;
};

// Throws std::invalid_argument naming the violated invariant. Connectivity
// is checked with the circle arcs included as edges, which is what admits
// the parallel-chords diagram appearing in the STU relation.
void validate_diagram(const TrivalentDiagram& d);

// Unique representative under cyclic rotation of the circle and relabeling
// of free vertices: lexicographic minimum of the sorted edge list over the
// full symmetry group. Orientation-reversing symmetries are not quotiented.
TrivalentDiagram canonicalize(const TrivalentDiagram& d);

// Rotations of the circle that fix the canonical diagram (its cyclic
// symmetry order); the identity always counts.
int rotation_symmetry_order(const TrivalentDiagram& canonical);

// All canonical trivalent diagrams of the given degree (k + s = 2n, k >= 2),
// complete and duplicate-free. Throws on n <= 0.
std::vector<TrivalentDiagram> enumerate_diagrams(int degree);

// STU rewrite of Figure-style vertex resolutions: replaces free_vertex
// (which must be adjacent to at least one circle vertex) by the two-term
// chord resolution S - U at its smallest-label circle neighbour. The
// returned combination equals the input diagram in the quotient space.
DiagramCombination stu_expand(const TrivalentDiagram& d, int free_vertex);

// As above but resolving at an explicit circle neighbour of free_vertex;
// used to generate the full relation set.
DiagramCombination stu_expand_at(const TrivalentDiagram& d, int free_vertex,
                                 int circle_neighbor);

// Basis of span(TD_n) / STU together with the linear reduction map onto it.
class StuBasis {
public:
    // Degrees above 3 are refused (exhaustive enumeration only).
    // relation_order optionally permutes the relation rows before
    // elimination; the reduced echelon form, and hence all coordinates,
    // must not depend on it.
    explicit StuBasis(int degree,
                      const std::vector<int>* relation_order = nullptr);

    int degree() const { return degree_; }
    const std::vector<TrivalentDiagram>& diagrams() const { return diagrams_; }
    const std::vector<TrivalentDiagram>& basis() const { return basis_; }
    std::size_t dimension() const { return basis_.size(); }

    // Coordinates of a combination in the quotient basis. reduce(d - S + U)
    // is identically zero for every STU relation.
    std::vector<Rational> reduce(const DiagramCombination& c) const;

private:
    int degree_;
    std::vector<TrivalentDiagram> diagrams_;       // canonical order
    std::map<TrivalentDiagram, int> index_;
    std::vector<std::vector<Rational>> rref_;      // reduced relation rows
    std::vector<int> pivot_col_;                   // pivot column per row
    std::vector<TrivalentDiagram> basis_;          // non-pivot diagrams
    std::vector<int> basis_col_;
};

// A linear functional on degree-n diagrams, well-defined modulo STU. Values
// are stored for every canonical diagram of the degree; construction from
// values on a quotient basis extends by linearity through reduce().
struct WeightSystem {
    int degree = 0;
    std::map<TrivalentDiagram, Rational> values;
};

// Extends the assignment basis_values (one value per basis() element of st)
// to all of TD_n. The result satisfies every STU relation exactly.
WeightSystem make_weight_system(const StuBasis& st,
                                const std::vector<Rational>& basis_values);

// Pairs W with a combination; throws on degree mismatch. Linear, and zero
// on every STU relation element by construction of WeightSystem.
Rational weight_eval(const WeightSystem& w, const DiagramCombination& c);

// Plain-text formats used by the CLI and golden tests:
//   diagram:      "k s; i-j,i-j,..."   (labels 1-based, circle first)
//   combination:  "c*(k s; ...) + c*(k s; ...)" with rational c
std::string format_diagram(const TrivalentDiagram& d);
TrivalentDiagram parse_diagram(const std::string& text);
std::string format_combination(const DiagramCombination& c);

// Named degree <= 2 diagrams used throughout tests and the CLI.
TrivalentDiagram chord_diagram();      // D0: k=2, s=0
TrivalentDiagram crossed_chords();     // k=4, s=0, interleaved
TrivalentDiagram parallel_chords();    // k=4, s=0, nested
TrivalentDiagram tripod();             // k=3, s=1

}  // namespace orbitknots
