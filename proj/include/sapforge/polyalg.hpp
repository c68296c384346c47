#pragma once

// Sparse multivariate polynomials over Q and exact rational linear algebra.

#include "sapforge/rational.hpp"

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sapforge {

using Exponents = std::vector<unsigned>;

/// Graded-lexicographic order: total degree first, then lexicographic on
/// the exponent vector (first variable most significant).
struct GrlexLess {
    bool operator()(const Exponents& lhs, const Exponents& rhs) const;
};

class NotDivisibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Sparse polynomial in named variables. The variable list is kept sorted by
/// name; binary operations align operands onto the union of their variables.
/// No zero coefficient is ever stored.
class MPoly {
public:
    using TermMap = std::map<Exponents, Rational, GrlexLess>;

    MPoly() = default;
    explicit MPoly(const Rational& constant);
    MPoly(int constant) : MPoly(Rational(constant)) {}

    static MPoly variable(const std::string& name);
    static MPoly from_terms(std::vector<std::string> variables, const TermMap& terms);

    const std::vector<std::string>& variables() const { return variables_; }
    const TermMap& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    std::size_t term_count() const { return terms_.size(); }
    unsigned total_degree() const;

    /// Constant value when the polynomial has no non-constant terms.
    std::optional<Rational> constant_value() const;

    /// Coefficient of the monomial given as variable -> exponent. Variables
    /// absent from the map have exponent 0.
    Rational coefficient(const std::map<std::string, unsigned>& monomial) const;

    /// Copy with one coefficient overwritten (zero removes the term).
    MPoly with_coefficient(const std::map<std::string, unsigned>& monomial, const Rational& value) const;

    MPoly operator-() const;
    MPoly& operator+=(const MPoly& other);
    MPoly& operator-=(const MPoly& other);
    MPoly& operator*=(const MPoly& other);
    MPoly& operator*=(const Rational& scalar);

    friend MPoly operator+(MPoly lhs, const MPoly& rhs) { return lhs += rhs; }
    friend MPoly operator-(MPoly lhs, const MPoly& rhs) { return lhs -= rhs; }
    friend MPoly operator*(MPoly lhs, const MPoly& rhs) { return lhs *= rhs; }
    friend MPoly operator*(MPoly lhs, const Rational& rhs) { return lhs *= rhs; }
    friend MPoly operator*(const Rational& lhs, MPoly rhs) { return rhs *= lhs; }

    friend bool operator==(const MPoly& lhs, const MPoly& rhs);

    /// Human-readable normal form, terms in descending grlex order,
    /// e.g. "x^2 - 3/2*x*y + 7".
    std::string to_string() const;

private:
    MPoly aligned_to(const std::vector<std::string>& variables) const;
    void align_with(MPoly& other);
    void add_term(const Exponents& exps, const Rational& coeff);

    std::vector<std::string> variables_;
    TermMap terms_;
};

MPoly pow(const MPoly& base, int exponent);

/// p / v, exact. Throws NotDivisibleError when a term lacks v.
MPoly divexact_var(const MPoly& p, const std::string& var);

/// Simultaneous substitution of the bound variables, fully expanded.
MPoly substitute(const MPoly& p, const std::map<std::string, MPoly>& bindings);

/// Full evaluation. Throws std::invalid_argument when a variable that occurs
/// in p has no binding.
Rational evaluate(const MPoly& p, const std::map<std::string, Rational>& bindings);

/// Dense rows x cols matrix over Q.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(std::size_t rows, std::size_t cols);
    QMatrix(std::initializer_list<std::initializer_list<Rational>> rows);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Rational& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    const Rational& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::vector<Rational> multiply(const std::vector<Rational>& v) const;

    friend bool operator==(const QMatrix&, const QMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Rational> data_;
};

enum class SolveStatus { unique, family, inconsistent };

struct LinSolveResult {
    SolveStatus status = SolveStatus::inconsistent;
    std::size_t rank = 0;
    std::vector<std::size_t> pivot_columns;
    /// Particular solution (free variables set to zero); empty when inconsistent.
    std::vector<Rational> particular;
    /// Basis of the null space of the coefficient matrix.
    std::vector<std::vector<Rational>> nullspace;
};

/// Gaussian elimination to reduced row echelon form. Pivots are chosen column
/// by column, taking the first row (top-down) with a nonzero entry. Without a
/// rhs the homogeneous system is solved.
LinSolveResult lin_solve(const QMatrix& a, const std::optional<std::vector<Rational>>& rhs = std::nullopt);

/// Determinant by Gaussian elimination; the matrix must be square.
Rational determinant(const QMatrix& a);

} // namespace sapforge
