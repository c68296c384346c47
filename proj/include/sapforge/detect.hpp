#pragma once

// Detection of simultaneous arithmetic progressions (s.a.p.) over a given
// x-arithmetic progression: points P_i = (a + i d, y_i) for which a shear
// Y' = Y - rX puts the y'_i into arithmetic progression after reordering,
// y'_i = b + sigma(i) d'.

#include "sapforge/curve.hpp"
#include "sapforge/rational.hpp"

#include "json.hpp"

#include <optional>
#include <span>
#include <vector>

namespace sapforge {

/// Support a, a+d, ..., a+nd (length n+1).
struct XAP {
    Rational a;
    Rational d;
    int n = 1;

    XAP(Rational first, Rational diff, int last_index);
    std::vector<Rational> support() const;
};

/// sigma = (a_0 ... a_n) means sigma(0) = a_0, ..., sigma(n) = a_n.
using Permutation = std::vector<int>;

bool is_permutation(std::span<const int> sigma);
Permutation inverse_permutation(std::span<const int> sigma);
/// i -> n - sigma(i); describes the same progression read backwards.
Permutation reversed_values(std::span<const int> sigma);
/// sigma(i) = i or sigma(i) = n - i.
bool is_affine_permutation(std::span<const int> sigma);
/// All permutations of {0..n-1} in lexicographic order.
std::vector<Permutation> all_permutations(int n);
std::string permutation_label(std::span<const int> sigma);

struct ShearSolution {
    Rational r;
    Rational b;
    Rational d_prime;

    friend bool operator==(const ShearSolution&, const ShearSolution&) = default;
};

/// Solves y_i = r x_i + b + sigma(i) d'. When sigma is affine the system is
/// underdetermined and the canonical r = 0 is returned (only if the y_i are
/// already in progression). Throws std::invalid_argument if xs is not an
/// arithmetic progression with nonzero difference, or sizes disagree.
std::optional<ShearSolution> solve_shear(std::span<const Rational> xs, std::span<const Rational> ys,
                                         std::span<const int> sigma);

struct SAPWitness {
    Permutation sigma;
    Rational r;
    Rational b;
    Rational d_prime;
    std::vector<Rational> ys;
    Curve curve_after;
    std::vector<Point> points_after;

    /// d' = 0: every y' coincides.
    bool degenerate() const { return d_prime == 0; }
};

SAPWitness make_witness(const Curve& c, std::span<const Rational> xs, std::span<const Rational> ys,
                        std::span<const int> sigma, const ShearSolution& solution);

/// Checks every witness invariant exactly: the solved relation, points on
/// curve_after, the support, and the reordered y' progression.
bool witness_is_sound(const Curve& c, std::span<const Rational> xs, const SAPWitness& w);

/// Cartesian product of the fibres over the support, lexicographic order.
std::vector<std::vector<Rational>> enumerate_lifts(const Curve& c, const XAP& xap);

struct DetectStats {
    std::size_t y_vectors = 0;
    std::size_t progression_shortcuts = 0;
    std::size_t minors = 0;
    std::size_t planes_ordered = 0;
    /// The unordered-triple count (n+1)n(n-1)/6 per y-vector, for comparison.
    std::size_t planes_unordered = 0;
};

/// Rank test on the augmented matrix [x_i, 1, sigma(i) | y_i] over all
/// y-vectors and permutations. Output sorted by y-vector, then sigma.
std::vector<SAPWitness> detect_alg1(const Curve& c, const XAP& xap, DetectStats* stats = nullptr);
/// Same, for one fixed y-vector.
std::vector<SAPWitness> detect_alg1_for(const Curve& c, const XAP& xap, std::span<const Rational> ys,
                                        DetectStats* stats = nullptr);

/// Coplanarity test on (x_i - x_0, y_i, sigma(i)) through planes spanned by
/// three pivot points. Same witness set as detect_alg1.
std::vector<SAPWitness> detect_alg2(const Curve& c, const XAP& xap, DetectStats* stats = nullptr);
std::vector<SAPWitness> detect_alg2_for(const Curve& c, const XAP& xap, std::span<const Rational> ys,
                                        DetectStats* stats = nullptr);

/// Keeps one of each (sigma, reversed sigma) pair: the lexicographically
/// smaller permutation.
std::vector<SAPWitness> dedup_reversals(std::vector<SAPWitness> witnesses);

struct WindowResult {
    std::size_t start = 0;
    std::vector<SAPWitness> witnesses;
};

/// For each window of m consecutive points, runs the full search over S_m
/// on the fixed points. Only windows admitting a witness are returned.
/// Throws std::invalid_argument unless the points lie on c, their
/// x-coordinates are in progression and 2 <= m <= points.size() - 1.
std::vector<WindowResult> sub_sap(const Curve& c, std::span<const Point> points, int m);

/// Window starts where the restriction of `parent` to m consecutive indices
/// takes m consecutive values, i.e. the parent witness itself restricts to a
/// witness of length m.
std::vector<std::size_t> restricting_windows(std::span<const int> parent, int m);

nlohmann::json witness_to_json(const SAPWitness& w);

} // namespace sapforge
