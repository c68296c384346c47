#include "sapforge/curve.hpp"

#include <numeric>

namespace sapforge {

namespace {

Invariants compute_invariants(const Rational& a1, const Rational& a2, const Rational& a3, const Rational& a4,
                              const Rational& a6)
{
    Invariants inv;
    inv.b2 = a1 * a1 + 4 * a2;
    inv.b4 = 2 * a4 + a1 * a3;
    inv.b6 = a3 * a3 + 4 * a6;
    inv.b8 = a1 * a1 * a6 + 4 * a2 * a6 - a1 * a3 * a4 + a2 * a3 * a3 - a4 * a4;
    inv.c4 = inv.b2 * inv.b2 - 24 * inv.b4;
    inv.c6 = -inv.b2 * inv.b2 * inv.b2 + 36 * inv.b2 * inv.b4 - 216 * inv.b6;
    inv.discriminant = -inv.b2 * inv.b2 * inv.b8 - 8 * inv.b4 * inv.b4 * inv.b4 - 27 * inv.b6 * inv.b6 +
                       9 * inv.b2 * inv.b4 * inv.b6;
    return inv;
}

Integer lcm_of_denominators(std::initializer_list<const Rational*> values)
{
    Integer l = 1;
    for (const Rational* q : values) {
        mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q->get_den_mpz_t());
    }
    return l;
}

Rational rational_pow(const Rational& q, unsigned e)
{
    Rational out;
    mpz_pow_ui(out.get_num_mpz_t(), q.get_num_mpz_t(), e);
    mpz_pow_ui(out.get_den_mpz_t(), q.get_den_mpz_t(), e);
    return out;
}

Rational parse_json_rational(const nlohmann::json& j, const char* field)
{
    if (!j.contains(field)) {
        throw std::invalid_argument(std::string("curve JSON lacks field ") + field);
    }
    const auto& v = j.at(field);
    if (v.is_string()) {
        return parse_rational(v.get<std::string>());
    }
    if (v.is_number_integer()) {
        return Rational(v.get<long>());
    }
    throw std::invalid_argument(std::string("curve JSON field ") + field + " must be a \"p/q\" string");
}

bool is_small_prime(long p)
{
    if (p < 2) {
        return false;
    }
    for (long d = 2; d * d <= p; ++d) {
        if (p % d == 0) {
            return false;
        }
    }
    return true;
}

unsigned long mod_reduce(const Integer& z, unsigned long p)
{
    return mpz_fdiv_ui(z.get_mpz_t(), p);
}

unsigned long pow_mod(unsigned long base, unsigned long exp, unsigned long p)
{
    unsigned long long result = 1;
    unsigned long long b = base % p;
    while (exp != 0) {
        if (exp & 1u) {
            result = result * b % p;
        }
        b = b * b % p;
        exp >>= 1;
    }
    return static_cast<unsigned long>(result);
}

} // namespace

Curve::Curve(Rational a1, Rational a2, Rational a3, Rational a4, Rational a6)
    : a1_(std::move(a1)), a2_(std::move(a2)), a3_(std::move(a3)), a4_(std::move(a4)), a6_(std::move(a6)),
      inv_(compute_invariants(a1_, a2_, a3_, a4_, a6_))
{
}

Rational Curve::j_invariant() const
{
    require_nonsingular("j-invariant");
    return inv_.c4 * inv_.c4 * inv_.c4 / inv_.discriminant;
}

void Curve::require_nonsingular(const char* what) const
{
    if (is_singular()) {
        throw SingularCurveError(std::string(what) + ": singular Weierstrass model");
    }
}

const Rational& Point::x() const
{
    if (infinity_) {
        throw std::logic_error("point at infinity has no affine x");
    }
    return x_;
}

const Rational& Point::y() const
{
    if (infinity_) {
        throw std::logic_error("point at infinity has no affine y");
    }
    return y_;
}

Point Transform::apply(const Point& p) const
{
    if (p.is_infinity()) {
        return p;
    }
    return Point(u * u * p.x() + r, u * u * u * p.y() + s * p.x() + t);
}

Transform Transform::inverse() const
{
    if (u == 0) {
        throw std::invalid_argument("transform with u = 0");
    }
    const Rational u2 = u * u;
    const Rational u5 = u2 * u2 * u;
    return {1 / u, -r / u2, -s / u5, (s * r - t * u2) / u5};
}

Transform compose(const Transform& first, const Transform& second)
{
    const Rational u2 = second.u * second.u;
    const Rational u3 = u2 * second.u;
    return {first.u * second.u, u2 * first.r + second.r, u3 * first.s + second.s * first.u * first.u,
            u3 * first.t + second.s * first.r + second.t};
}

bool contains(const Curve& c, const Point& p)
{
    if (p.is_infinity()) {
        return true;
    }
    const Rational& x = p.x();
    const Rational& y = p.y();
    return y * y + c.a1() * x * y + c.a3() * y == ((x + c.a2()) * x + c.a4()) * x + c.a6();
}

std::vector<Rational> lift_x(const Curve& c, const Rational& x)
{
    const Rational linear = c.a1() * x + c.a3();
    const Rational cubic = ((x + c.a2()) * x + c.a4()) * x + c.a6();
    auto root = rat_sqrt(linear * linear + 4 * cubic);
    if (!root) {
        return {};
    }
    if (*root == 0) {
        return {-linear / 2};
    }
    return {(-linear - *root) / 2, (-linear + *root) / 2};
}

Curve apply_transform(const Curve& c, const Transform& t)
{
    if (t.u == 0) {
        throw std::invalid_argument("transform with u = 0");
    }
    // Express the old coordinates through the new ones,
    // X = U^2 X' + R, Y = U^3 Y' + S U^2 X' + T, and apply the classical
    // coefficient formulas for that substitution.
    const Transform back = t.inverse();
    const Rational& U = back.u;
    const Rational& R = back.r;
    const Rational S = back.s / (U * U);
    const Rational& T = back.t;

    const Rational& a1 = c.a1();
    const Rational& a2 = c.a2();
    const Rational& a3 = c.a3();
    const Rational& a4 = c.a4();
    const Rational& a6 = c.a6();

    const Rational n1 = (a1 + 2 * S) / U;
    const Rational n2 = (a2 - S * a1 + 3 * R - S * S) / rational_pow(U, 2);
    const Rational n3 = (a3 + R * a1 + 2 * T) / rational_pow(U, 3);
    const Rational n4 = (a4 - S * a3 + 2 * R * a2 - (T + R * S) * a1 + 3 * R * R - 2 * S * T) / rational_pow(U, 4);
    const Rational n6 = (a6 + R * a4 + R * R * a2 + R * R * R - T * a3 - T * T - R * T * a1) / rational_pow(U, 6);
    return Curve(n1, n2, n3, n4, n6);
}

Integer remove_twist_content(Integer& a, Integer& b)
{
    if (a == 0 && b == 0) {
        throw SingularCurveError("short model with A = B = 0");
    }
    Integer a3 = a * a * a;
    Integer b2 = b * b;
    Integer g;
    mpz_gcd(g.get_mpz_t(), a3.get_mpz_t(), b2.get_mpz_t());

    Integer removed = 1;
    Integer bound;
    auto refresh_bound = [&] { mpz_root(bound.get_mpz_t(), g.get_mpz_t(), 12); };
    refresh_bound();
    // A prime p with p^12 | g has p <= g^(1/12); composite candidates never
    // divide because their prime factors were stripped first.
    for (unsigned long p = 2; bound >= p; p += (p == 2 ? 1 : 2)) {
        if (!mpz_divisible_ui_p(g.get_mpz_t(), p)) {
            continue;
        }
        Integer p4, p6, p12;
        mpz_ui_pow_ui(p4.get_mpz_t(), p, 4);
        mpz_ui_pow_ui(p6.get_mpz_t(), p, 6);
        mpz_ui_pow_ui(p12.get_mpz_t(), p, 12);
        bool changed = false;
        while (mpz_divisible_p(g.get_mpz_t(), p12.get_mpz_t())) {
            mpz_divexact(a.get_mpz_t(), a.get_mpz_t(), p4.get_mpz_t());
            mpz_divexact(b.get_mpz_t(), b.get_mpz_t(), p6.get_mpz_t());
            mpz_divexact(g.get_mpz_t(), g.get_mpz_t(), p12.get_mpz_t());
            removed *= p;
            changed = true;
        }
        if (changed) {
            refresh_bound();
        }
    }
    return removed;
}

ShortModel minimal_twist_short(const Curve& c)
{
    c.require_nonsingular("minimal_twist_short");
    const Invariants& inv = c.invariants();

    // X' = 36X + 3b2, Y' = 216Y + 108a1 X + 108a3 gives Y'^2 = X'^3 - 27c4 X' - 54c6.
    const Transform to_c4c6{6, 3 * inv.b2, 108 * c.a1(), 108 * c.a3()};
    const Rational a0 = -27 * inv.c4;
    const Rational b0 = -54 * inv.c6;

    const Integer den = lcm_of_denominators({&a0, &b0});
    Integer a = Rational(a0 * rational_pow(Rational(den), 4)).get_num();
    Integer b = Rational(b0 * rational_pow(Rational(den), 6)).get_num();
    const Integer removed = remove_twist_content(a, b);

    ShortModel model;
    model.a = a;
    model.b = b;
    model.to_short = compose(to_c4c6, Transform::scaling(make_rational(den, removed)));
    return model;
}

std::optional<Transform> is_isomorphic(const Curve& c1, const Curve& c2)
{
    const ShortModel m1 = minimal_twist_short(c1);
    const ShortModel m2 = minimal_twist_short(c2);
    if (m1.a != m2.a || m1.b != m2.b) {
        return std::nullopt;
    }
    return compose(m1.to_short, m2.to_short.inverse());
}

std::pair<Curve, Transform> integral_model(const Curve& c)
{
    const Integer u = lcm_of_denominators({&c.a1(), &c.a2(), &c.a3(), &c.a4(), &c.a6()});
    const Transform scale = Transform::scaling(Rational(u));
    if (u == 1) {
        return {c, scale};
    }
    return {apply_transform(c, scale), scale};
}

long count_points_mod_p(const Curve& c, long p)
{
    if (p < 3 || p % 2 == 0 || !is_small_prime(p)) {
        throw BadPrimeError("point counting needs an odd prime, got " + std::to_string(p));
    }
    const auto [model, scale] = integral_model(c);
    const auto up = static_cast<unsigned long>(p);
    if (mpz_divisible_ui_p(model.discriminant().get_num_mpz_t(), up)) {
        throw BadPrimeError("bad reduction at p = " + std::to_string(p));
    }
    const unsigned long long a1 = mod_reduce(model.a1().get_num(), up);
    const unsigned long long a2 = mod_reduce(model.a2().get_num(), up);
    const unsigned long long a3 = mod_reduce(model.a3().get_num(), up);
    const unsigned long long a4 = mod_reduce(model.a4().get_num(), up);
    const unsigned long long a6 = mod_reduce(model.a6().get_num(), up);

    long count = 1;
    for (unsigned long long x = 0; x < up; ++x) {
        const unsigned long long linear = (a1 * x + a3) % up;
        const unsigned long long cubic = (((x + a2) % up * x + a4) % up * x + a6) % up;
        const unsigned long long disc = (linear * linear + 4 * cubic) % up;
        if (disc == 0) {
            count += 1;
        } else if (pow_mod(static_cast<unsigned long>(disc), (up - 1) / 2, up) == 1) {
            count += 2;
        }
    }
    return count;
}

TorsionBound torsion_bound(const Curve& c, long prime_limit)
{
    c.require_nonsingular("torsion_bound");
    const auto [model, scale] = integral_model(c);
    const Integer& disc = model.discriminant().get_num();
    TorsionBound out;
    long g = 0;
    for (long p = 3; p <= prime_limit; p += 2) {
        if (!is_small_prime(p) || mpz_divisible_ui_p(disc.get_mpz_t(), static_cast<unsigned long>(p))) {
            continue;
        }
        g = std::gcd(g, count_points_mod_p(model, p));
        out.primes_used.push_back(p);
    }
    if (out.primes_used.size() < 2) {
        throw std::domain_error("torsion_bound: fewer than two good odd primes up to " + std::to_string(prime_limit));
    }
    out.bound = g;
    return out;
}

nlohmann::json curve_to_json(const Curve& c)
{
    return nlohmann::json{{"a1", to_string(c.a1())},
                          {"a2", to_string(c.a2())},
                          {"a3", to_string(c.a3())},
                          {"a4", to_string(c.a4())},
                          {"a6", to_string(c.a6())}};
}

Curve curve_from_json(const nlohmann::json& j)
{
    if (!j.is_object()) {
        throw std::invalid_argument("curve JSON must be an object");
    }
    return Curve(parse_json_rational(j, "a1"), parse_json_rational(j, "a2"), parse_json_rational(j, "a3"),
                 parse_json_rational(j, "a4"), parse_json_rational(j, "a6"));
}

nlohmann::json point_to_json(const Point& p)
{
    if (p.is_infinity()) {
        return "infinity";
    }
    return nlohmann::json::array({to_string(p.x()), to_string(p.y())});
}

} // namespace sapforge
