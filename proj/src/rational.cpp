#include "sapforge/rational.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>

namespace sapforge {

namespace {

bool all_digits(std::string_view s)
{
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; });
}

} // namespace

Rational make_rational(const Integer& num, const Integer& den)
{
    if (den == 0) {
        throw std::domain_error("rational with zero denominator");
    }
    Rational q(num, den);
    q.canonicalize();
    return q;
}

Rational parse_rational(std::string_view text)
{
    std::string_view body = text;
    bool negative = false;
    if (!body.empty() && (body.front() == '-' || body.front() == '+')) {
        negative = body.front() == '-';
        body.remove_prefix(1);
    }
    const auto slash = body.find('/');
    const std::string_view num_text = body.substr(0, slash);
    const std::string_view den_text = slash == std::string_view::npos ? std::string_view("1") : body.substr(slash + 1);
    if (!all_digits(num_text) || !all_digits(den_text)) {
        throw std::invalid_argument("malformed rational: \"" + std::string(text) + "\"");
    }
    Integer num(std::string(num_text), 10);
    Integer den(std::string(den_text), 10);
    if (den == 0) {
        throw std::invalid_argument("rational with zero denominator: \"" + std::string(text) + "\"");
    }
    if (negative) {
        num = -num;
    }
    return make_rational(num, den);
}

std::string to_string(const Rational& q)
{
    return q.get_str(10);
}

std::string to_string(const Integer& z)
{
    return z.get_str(10);
}

std::optional<Integer> int_sqrt(const Integer& n)
{
    if (sgn(n) < 0) {
        throw std::domain_error("int_sqrt of a negative integer");
    }
    Integer root;
    Integer rem;
    mpz_sqrtrem(root.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t());
    if (rem != 0) {
        return std::nullopt;
    }
    return root;
}

std::optional<Rational> rat_sqrt(const Rational& q)
{
    if (sgn(q) < 0) {
        return std::nullopt;
    }
    auto num = int_sqrt(q.get_num());
    if (!num) {
        return std::nullopt;
    }
    auto den = int_sqrt(q.get_den());
    if (!den) {
        return std::nullopt;
    }
    return make_rational(*num, *den);
}

std::optional<Progression> ap_check(std::span<const Rational> seq)
{
    if (seq.size() < 2) {
        throw std::invalid_argument("ap_check needs at least two terms");
    }
    const Rational diff = seq[1] - seq[0];
    for (std::size_t i = 2; i < seq.size(); ++i) {
        if (seq[i] - seq[i - 1] != diff) {
            return std::nullopt;
        }
    }
    return Progression{seq[0], diff};
}

bool is_integer(const Rational& q)
{
    return q.get_den() == 1;
}

bool lex_less(std::span<const Rational> lhs, std::span<const Rational> rhs)
{
    return std::lexicographical_compare(lhs.begin(), lhs.end(), rhs.begin(), rhs.end(),
                                        [](const Rational& a, const Rational& b) { return cmp(a, b) < 0; });
}

} // namespace sapforge
