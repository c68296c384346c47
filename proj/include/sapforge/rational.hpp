#pragma once

// Exact integer and rational primitives shared by every other module.

#include <gmpxx.h>

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sapforge {

using Integer = mpz_class;
using Rational = mpq_class;

/// Builds num/den in lowest terms with a positive denominator.
/// Throws std::domain_error when den == 0.
Rational make_rational(const Integer& num, const Integer& den = 1);

/// Parses "p/q" or "p" (optional sign on p only). The result is normalized,
/// so canonical input round-trips bit-exactly through to_string.
Rational parse_rational(std::string_view text);

std::string to_string(const Rational& q);
std::string to_string(const Integer& z);

/// s with s*s == n when n is a perfect square. Negative n is a contract
/// violation (std::domain_error).
std::optional<Integer> int_sqrt(const Integer& n);

/// The non-negative rational square root of q, when one exists.
std::optional<Rational> rat_sqrt(const Rational& q);

struct Progression {
    Rational first;
    Rational diff;

    friend bool operator==(const Progression&, const Progression&) = default;
};

/// (seq[0], seq[1]-seq[0]) iff consecutive differences are constant.
/// Order-sensitive. Fewer than two terms throws std::invalid_argument.
std::optional<Progression> ap_check(std::span<const Rational> seq);

bool is_integer(const Rational& q);

/// Lexicographic comparison, used wherever output must be sorted.
bool lex_less(std::span<const Rational> lhs, std::span<const Rational> rhs);

} // namespace sapforge
