#pragma once

// Weierstrass models over Q: evaluation, admissible changes of variables,
// invariants, isomorphism labels, lifting and torsion bounds by reduction.

#include "sapforge/rational.hpp"

#include "json.hpp"

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace sapforge {

class SingularCurveError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class BadPrimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct Invariants {
    Rational b2, b4, b6, b8;
    Rational c4, c6;
    Rational discriminant;
};

/// Y^2 + a1 XY + a3 Y = X^3 + a2 X^2 + a4 X + a6. Singular models can be
/// constructed; operations that need an elliptic curve reject them.
class Curve {
public:
    Curve() : Curve(0, 0, 0, 0, 0) {}
    Curve(Rational a1, Rational a2, Rational a3, Rational a4, Rational a6);

    static Curve short_form(const Rational& a, const Rational& b) { return Curve(0, 0, 0, a, b); }

    const Rational& a1() const { return a1_; }
    const Rational& a2() const { return a2_; }
    const Rational& a3() const { return a3_; }
    const Rational& a4() const { return a4_; }
    const Rational& a6() const { return a6_; }

    const Invariants& invariants() const { return inv_; }
    const Rational& discriminant() const { return inv_.discriminant; }
    bool is_singular() const { return inv_.discriminant == 0; }

    /// c4^3 / discriminant. Throws SingularCurveError on singular models.
    Rational j_invariant() const;

    /// Throws SingularCurveError naming `what` when the model is singular.
    void require_nonsingular(const char* what) const;

    friend bool operator==(const Curve& lhs, const Curve& rhs)
    {
        return lhs.a1_ == rhs.a1_ && lhs.a2_ == rhs.a2_ && lhs.a3_ == rhs.a3_ && lhs.a4_ == rhs.a4_ &&
               lhs.a6_ == rhs.a6_;
    }

private:
    Rational a1_, a2_, a3_, a4_, a6_;
    Invariants inv_;
};

class Point {
public:
    Point(Rational x, Rational y) : x_(std::move(x)), y_(std::move(y)) {}
    static Point infinity() { return Point(); }

    bool is_infinity() const { return infinity_; }
    const Rational& x() const;
    const Rational& y() const;

    friend bool operator==(const Point& lhs, const Point& rhs)
    {
        if (lhs.infinity_ || rhs.infinity_) {
            return lhs.infinity_ == rhs.infinity_;
        }
        return lhs.x_ == rhs.x_ && lhs.y_ == rhs.y_;
    }

private:
    Point() : infinity_(true) {}

    bool infinity_ = false;
    Rational x_, y_;
};

/// Change of variables X' = u^2 X + r, Y' = u^3 Y + s X + t (primed = new).
struct Transform {
    Rational u = 1;
    Rational r = 0;
    Rational s = 0;
    Rational t = 0;

    static Transform identity() { return {}; }
    static Transform scaling(const Rational& u) { return {u, 0, 0, 0}; }
    /// Y' = Y - slope X.
    static Transform shear(const Rational& slope) { return {1, 0, -slope, 0}; }

    Point apply(const Point& p) const;
    Transform inverse() const;

    friend bool operator==(const Transform&, const Transform&) = default;
};

/// The transform "first `first`, then `second`".
Transform compose(const Transform& first, const Transform& second);

bool contains(const Curve& c, const Point& p);

/// All rational y with (x, y) on c, ascending.
std::vector<Rational> lift_x(const Curve& c, const Rational& x);

/// The curve c' with p on c <=> T(p) on c'. Throws std::invalid_argument for u = 0.
Curve apply_transform(const Curve& c, const Transform& t);

struct ShortModel {
    Integer a;
    Integer b;
    Transform to_short; ///< maps c onto Y^2 = X^3 + aX + b

    /// The (A, B) label alone.
    std::pair<Integer, Integer> label() const { return {a, b}; }
};

/// Integral short model with no prime p such that p^4 | A and p^6 | B. The
/// pair (A, B) labels the Q-isomorphism class.
ShortModel minimal_twist_short(const Curve& c);

/// Reduces an integral short pair to its minimal twist; returns the positive
/// scale u removed (A / u^4, B / u^6).
Integer remove_twist_content(Integer& a, Integer& b);

/// A transform carrying c1 onto c2 when the two are Q-isomorphic.
std::optional<Transform> is_isomorphic(const Curve& c1, const Curve& c2);

/// Model with integral coefficients, obtained by scaling with u = lcm of the
/// denominators; returns the scaling transform as well.
std::pair<Curve, Transform> integral_model(const Curve& c);

/// #E(F_p) including the point at infinity. Requires an odd prime of good
/// reduction for the integral model; otherwise throws BadPrimeError.
long count_points_mod_p(const Curve& c, long p);

struct TorsionBound {
    long bound = 0;
    std::vector<long> primes_used;
};

/// gcd of #E(F_p) over good odd primes p <= prime_limit. The rational
/// torsion order divides the bound. Throws std::domain_error when fewer than
/// two primes are usable.
TorsionBound torsion_bound(const Curve& c, long prime_limit);

nlohmann::json curve_to_json(const Curve& c);
Curve curve_from_json(const nlohmann::json& j);

nlohmann::json point_to_json(const Point& p);

} // namespace sapforge
