#pragma once

// Curves Y^2 = X^3 + AX + B carrying a four-term x-progression, written as
// polynomials in y0..y3, and the exhaustive search for s.a.p. of length 6
// and 7 built on them.

#include "sapforge/curve.hpp"
#include "sapforge/detect.hpp"
#include "sapforge/polyalg.hpp"
#include "sapforge/rational.hpp"

#include "json.hpp"

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sapforge {

/// Everything is in the variables y0, y1, y2, y3. The points are
/// (a + i d, 6 y_i d) on Y^2 = X^3 + AX + B for i = 0..3.
struct BremnerPolys {
    MPoly P, Q, R;
    MPoly A; ///< -36 P
    MPoly B; ///< 216 Q
    MPoly a; ///< -6 R
    MPoly d; ///< 6 (y3^2 - y0^2 + 3 y1^2 - 3 y2^2)
};

/// Builds the polynomials from the three closed forms P, Q, R.
BremnerPolys bremner_polys();
/// Same, from caller-supplied P, Q, R (used to test mutated transcriptions).
BremnerPolys bremner_polys(const MPoly& p, const MPoly& q, const MPoly& r);

struct IdentityCheck {
    int index = 0;
    bool holds = false;
    std::size_t residual_terms = 0; ///< size of the nonzero remainder, if any
};

struct IdentityReport {
    std::vector<IdentityCheck> checks;

    bool all_pass() const;
    /// Indices i whose identity failed.
    std::vector<int> failing() const;
};

/// (6 y_i d)^2 = (a + i d)^3 + A (a + i d) + B for i = 0..6, with y_i^2 for
/// i >= 4 replaced by ext_square(i).
IdentityReport verify_identities(const BremnerPolys& polys);

/// Coefficients (on y0^2, y1^2, y2^2, y3^2) of y_k^2 forced by the vanishing
/// fourth difference of the cubic (a + i d)^3 + A (a + i d) + B. Requires k >= 0;
/// k <= 3 returns a unit vector.
std::array<Integer, 4> ext_square(int k);

/// y_i = c1 i + c2 + c3 sigma(i) for the arrangement sigma of {0..n-1}.
/// L_k = G_k / c3 where G_k is the k-shifted fourth difference of the y_i^2.
struct SigmaSystem {
    int n = 0;
    Permutation sigma;
    std::vector<MPoly> forms;   ///< L_0 .. L_{n-5}, linear in c1, c2, c3
    QMatrix matrix;             ///< coefficient rows of the forms
};

/// Throws std::invalid_argument for a non-permutation or n < 5, and
/// std::logic_error if some G_k is not divisible by c3.
SigmaSystem sigma_forms(std::span<const int> sigma);

struct SolutionComponent {
    /// Basis of the linear subspace of (c1, c2, c3). One vector: a projective
    /// point. Two: a projective line. Three: the whole plane.
    std::vector<std::array<Integer, 3>> basis;
    /// d as a polynomial in the parameters t0.. of the basis combination.
    MPoly d_restricted;
    bool degenerate = false;
    /// The always-present plane c3 = 0, where every y_i is affine in i.
    bool is_c3_plane = false;

    std::size_t projective_dimension() const { return basis.size() - 1; }
};

struct SigmaSolutions {
    std::vector<SolutionComponent> components; ///< c3 = 0 plane first

    std::size_t nondegenerate_count() const;
};

SigmaSolutions solve_sigma(const SigmaSystem& sys);

/// Positive multiple of v with coprime integer entries.
std::array<Integer, 3> primitive_integer(const std::vector<Rational>& v);

struct CurveFamily {
    Permutation sigma;
    std::array<Integer, 3> c;
    std::vector<Rational> y; ///< primitive integers unless rescaled
    Rational A, B, a, d;
    Rational r, b, d_prime;
    SAPWitness witness;

    Curve short_curve() const { return Curve::short_form(A, B); }
    XAP support() const;
};

/// Throws std::invalid_argument for a point with d = 0 and std::logic_error
/// when the resulting witness does not check out.
CurveFamily family_from_point(const SigmaSystem& sys, const std::array<Integer, 3>& point);

/// The family with its y-vector multiplied by lambda.
CurveFamily rescale_family(const CurveFamily& f, const Rational& lambda);

struct NormalizedFamily {
    Rational lambda;
    Integer A, B;           ///< minimal twist label
    Curve curve;            ///< sheared model, Y^2 + 2r XY = X^3 - r^2 X^2 + AX + B
    std::vector<Point> points;
};

NormalizedFamily normalize_family(const CurveFamily& f);

struct SearchOptions {
    int n = 6;
    unsigned workers = 0; ///< 0: worker_count()
    std::optional<Permutation> only_sigma;
};

struct SearchStats {
    std::size_t arrangements = 0;
    std::size_t arrangements_with_solutions = 0;
    /// Non-degenerate projective lines (never expected, counted if seen).
    std::size_t nondegenerate_lines = 0;
    /// Nullspace dimension -> number of arrangements.
    std::map<std::size_t, std::size_t> nullspace_dims;
};

struct Census {
    int n = 0;
    std::vector<CurveFamily> families;        ///< sorted by arrangement
    std::vector<NormalizedFamily> normalized; ///< parallel to families
    /// Minimal label -> indices into families.
    std::map<std::pair<Integer, Integer>, std::vector<std::size_t>> classes;
    SearchStats stats;

    /// Families times 2^(n-1): one per sign pattern up to global sign.
    std::size_t sign_case_count() const;
};

/// Iterates every arrangement of {0..n-1} (or only_sigma). Throws
/// std::invalid_argument unless n is 6 or 7, and std::logic_error when a
/// non-degenerate component of projective dimension 2 shows up.
Census full_search(const SearchOptions& options);

nlohmann::json family_to_json(const CurveFamily& f, const NormalizedFamily& norm);

} // namespace sapforge
