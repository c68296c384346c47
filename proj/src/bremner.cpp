#include "sapforge/bremner.hpp"

#include "sapforge/parallel.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <tuple>

namespace sapforge {

namespace {

const std::vector<std::string> kYVars{"y0", "y1", "y2", "y3"};

struct Term {
    long coeff;
    unsigned e0, e1, e2, e3;
};

MPoly from_table(std::initializer_list<Term> table)
{
    MPoly::TermMap terms;
    for (const auto& t : table) {
        terms[{t.e0, t.e1, t.e2, t.e3}] += Rational(t.coeff);
    }
    return MPoly::from_terms(kYVars, terms);
}

MPoly y_var(int i) { return MPoly::variable(kYVars[static_cast<std::size_t>(i)]); }

const BremnerPolys& cached_polys()
{
    static const BremnerPolys polys = bremner_polys();
    return polys;
}

Integer binomial(unsigned n, unsigned k)
{
    Integer out;
    mpz_bin_uiui(out.get_mpz_t(), n, k);
    return out;
}

/// d evaluated on y_i = c1 i + c2 + c3 sigma(i) with c = sum_j t_j basis_j.
MPoly restricted_d(std::span<const int> sigma, const std::vector<std::array<Integer, 3>>& basis)
{
    std::array<MPoly, 3> c{MPoly(0), MPoly(0), MPoly(0)};
    for (std::size_t j = 0; j < basis.size(); ++j) {
        const MPoly t = MPoly::variable("t" + std::to_string(j));
        for (std::size_t q = 0; q < 3; ++q) {
            c[q] += t * Rational(basis[j][q]);
        }
    }
    std::map<std::string, MPoly> bindings;
    for (int i = 0; i < 4; ++i) {
        bindings[kYVars[static_cast<std::size_t>(i)]] =
            c[0] * Rational(i) + c[1] + c[2] * Rational(sigma[static_cast<std::size_t>(i)]);
    }
    return substitute(cached_polys().d, bindings);
}

std::vector<Point> family_points(const Rational& a, const Rational& d, std::span<const Rational> y)
{
    std::vector<Point> pts;
    for (std::size_t i = 0; i < y.size(); ++i) {
        pts.emplace_back(a + static_cast<long>(i) * d, 6 * y[i] * d);
    }
    return pts;
}

/// Fills A, B, a, d, r, b, d' and the witness from sigma and y.
void complete_family(CurveFamily& f)
{
    const BremnerPolys& polys = cached_polys();
    std::map<std::string, Rational> at;
    for (int i = 0; i < 4; ++i) {
        at[kYVars[static_cast<std::size_t>(i)]] = f.y[static_cast<std::size_t>(i)];
    }
    f.A = evaluate(polys.A, at);
    f.B = evaluate(polys.B, at);
    f.a = evaluate(polys.a, at);
    f.d = evaluate(polys.d, at);
    if (f.d == 0) {
        throw std::invalid_argument("family point has d = 0");
    }
    const auto pts = family_points(f.a, f.d, f.y);
    std::vector<Rational> xs;
    std::vector<Rational> ys;
    for (const auto& p : pts) {
        xs.push_back(p.x());
        ys.push_back(p.y());
    }
    const Curve curve = f.short_curve();
    if (curve.is_singular()) {
        throw std::logic_error("family curve is singular for sigma " + permutation_label(f.sigma));
    }
    const auto sol = solve_shear(xs, ys, f.sigma);
    if (!sol) {
        throw std::logic_error("family points admit no shear for sigma " + permutation_label(f.sigma));
    }
    f.r = sol->r;
    f.b = sol->b;
    f.d_prime = sol->d_prime;
    f.witness = make_witness(curve, xs, ys, f.sigma, *sol);
    if (!witness_is_sound(curve, xs, f.witness)) {
        throw std::logic_error("family witness fails verification for sigma " + permutation_label(f.sigma));
    }
}

} // namespace

BremnerPolys bremner_polys()
{
    const MPoly p = from_table({
        {1, 4, 0, 0, 0},  {-9, 2, 2, 0, 0}, {6, 2, 0, 2, 0},  {1, 2, 0, 0, 2},  {21, 0, 4, 0, 0},
        {-39, 0, 2, 2, 0}, {6, 0, 2, 0, 2}, {21, 0, 0, 4, 0}, {-9, 0, 0, 2, 2}, {1, 0, 0, 0, 4},
    });
    const MPoly q = from_table({
        {1, 2, 0, 0, 4},   {4, 0, 2, 0, 4},    {1, 0, 0, 2, 4},    {-9, 0, 0, 4, 2},  {-8, 2, 0, 2, 2},
        {24, 0, 4, 0, 2},  {-8, 2, 2, 0, 2},   {-12, 0, 2, 2, 2},  {1, 4, 0, 0, 2},   {1, 4, 2, 0, 0},
        {-9, 2, 4, 0, 0},  {20, 0, 6, 0, 0},   {-21, 0, 4, 2, 0},  {4, 4, 0, 2, 0},   {20, 0, 0, 6, 0},
        {-21, 0, 2, 4, 0}, {24, 2, 0, 4, 0},   {-12, 2, 2, 2, 0},
    });
    const MPoly r = from_table({{-2, 2, 0, 0, 0}, {5, 0, 2, 0, 0}, {-4, 0, 0, 2, 0}, {1, 0, 0, 0, 2}});
    return bremner_polys(p, q, r);
}

BremnerPolys bremner_polys(const MPoly& p, const MPoly& q, const MPoly& r)
{
    BremnerPolys out;
    out.P = p;
    out.Q = q;
    out.R = r;
    out.A = Rational(-36) * p;
    out.B = Rational(216) * q;
    out.a = Rational(-6) * r;
    out.d = Rational(6) * (pow(y_var(3), 2) - pow(y_var(0), 2) + Rational(3) * pow(y_var(1), 2) -
                           Rational(3) * pow(y_var(2), 2));
    return out;
}

bool IdentityReport::all_pass() const
{
    return std::all_of(checks.begin(), checks.end(), [](const IdentityCheck& c) { return c.holds; });
}

std::vector<int> IdentityReport::failing() const
{
    std::vector<int> out;
    for (const auto& c : checks) {
        if (!c.holds) {
            out.push_back(c.index);
        }
    }
    return out;
}

std::array<Integer, 4> ext_square(int k)
{
    if (k < 0) {
        throw std::invalid_argument("ext_square: negative index");
    }
    std::vector<std::array<Integer, 4>> rows;
    for (int i = 0; i < 4; ++i) {
        std::array<Integer, 4> unit{0, 0, 0, 0};
        unit[static_cast<std::size_t>(i)] = 1;
        rows.push_back(unit);
    }
    for (int i = 4; i <= k; ++i) {
        std::array<Integer, 4> next{};
        for (std::size_t j = 0; j < 4; ++j) {
            const auto at = [&](int back) -> const Integer& { return rows[static_cast<std::size_t>(i - back)][j]; };
            next[j] = 4 * at(1) - 6 * at(2) + 4 * at(3) - at(4);
        }
        rows.push_back(next);
    }
    return rows[static_cast<std::size_t>(k)];
}

IdentityReport verify_identities(const BremnerPolys& polys)
{
    IdentityReport report;
    for (int i = 0; i <= 6; ++i) {
        const auto coeffs = ext_square(i);
        MPoly square(0);
        for (int j = 0; j < 4; ++j) {
            square += Rational(coeffs[static_cast<std::size_t>(j)]) * pow(y_var(j), 2);
        }
        const MPoly x = polys.a + Rational(i) * polys.d;
        const MPoly residual =
            Rational(36) * square * pow(polys.d, 2) - (pow(x, 3) + polys.A * x + polys.B);
        report.checks.push_back({i, residual.is_zero(), residual.term_count()});
    }
    return report;
}

SigmaSystem sigma_forms(std::span<const int> sigma)
{
    if (!is_permutation(sigma)) {
        throw std::invalid_argument("sigma_forms: not a permutation");
    }
    const int n = static_cast<int>(sigma.size());
    if (n < 5) {
        throw std::invalid_argument("sigma_forms: need at least five points");
    }
    const MPoly c1 = MPoly::variable("c1");
    const MPoly c2 = MPoly::variable("c2");
    const MPoly c3 = MPoly::variable("c3");
    std::vector<MPoly> squares;
    for (int i = 0; i < n; ++i) {
        const MPoly y = c1 * Rational(i) + c2 + c3 * Rational(sigma[static_cast<std::size_t>(i)]);
        squares.push_back(pow(y, 2));
    }

    SigmaSystem sys;
    sys.n = n;
    sys.sigma.assign(sigma.begin(), sigma.end());
    sys.matrix = QMatrix(static_cast<std::size_t>(n - 4), 3);
    for (int k = 0; k + 4 < n; ++k) {
        MPoly g(0);
        for (unsigned j = 0; j <= 4; ++j) {
            const Rational weight((j % 2 == 0 ? 1 : -1) * binomial(4, j));
            g += weight * squares[static_cast<std::size_t>(k + 4) - j];
        }
        MPoly form;
        try {
            form = divexact_var(g, "c3");
        } catch (const NotDivisibleError&) {
            throw std::logic_error("fourth difference not divisible by c3 for sigma " + permutation_label(sigma));
        }
        const std::array<const char*, 3> names{"c1", "c2", "c3"};
        for (std::size_t q = 0; q < 3; ++q) {
            sys.matrix(static_cast<std::size_t>(k), q) = form.coefficient({{names[q], 1}});
        }
        sys.forms.push_back(std::move(form));
    }
    return sys;
}

std::array<Integer, 3> primitive_integer(const std::vector<Rational>& v)
{
    if (v.size() != 3) {
        throw std::invalid_argument("primitive_integer: expected three entries");
    }
    Integer den = 1;
    for (const auto& q : v) {
        mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), q.get_den_mpz_t());
    }
    std::array<Integer, 3> out;
    Integer g = 0;
    for (std::size_t i = 0; i < 3; ++i) {
        out[i] = Rational(v[i] * den).get_num();
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), out[i].get_mpz_t());
    }
    if (g == 0) {
        throw std::invalid_argument("primitive_integer: zero vector");
    }
    for (auto& e : out) {
        mpz_divexact(e.get_mpz_t(), e.get_mpz_t(), g.get_mpz_t());
    }
    return out;
}

std::size_t SigmaSolutions::nondegenerate_count() const
{
    return static_cast<std::size_t>(
        std::count_if(components.begin(), components.end(), [](const SolutionComponent& c) { return !c.degenerate; }));
}

SigmaSolutions solve_sigma(const SigmaSystem& sys)
{
    SigmaSolutions out;

    SolutionComponent plane;
    plane.basis = {{1, 0, 0}, {0, 1, 0}};
    plane.is_c3_plane = true;
    plane.d_restricted = restricted_d(sys.sigma, plane.basis);
    plane.degenerate = plane.d_restricted.is_zero();
    out.components.push_back(std::move(plane));

    const auto solved = lin_solve(sys.matrix);
    if (solved.nullspace.empty()) {
        return out;
    }
    SolutionComponent comp;
    for (const auto& v : solved.nullspace) {
        comp.basis.push_back(primitive_integer(v));
    }
    comp.d_restricted = restricted_d(sys.sigma, comp.basis);
    comp.degenerate = comp.d_restricted.is_zero();
    out.components.push_back(std::move(comp));
    return out;
}

XAP CurveFamily::support() const { return XAP(a, d, static_cast<int>(y.size()) - 1); }

CurveFamily family_from_point(const SigmaSystem& sys, const std::array<Integer, 3>& point)
{
    CurveFamily f;
    f.sigma = sys.sigma;
    std::vector<Integer> y;
    Integer g = 0;
    for (int i = 0; i < sys.n; ++i) {
        y.push_back(point[0] * i + point[1] + point[2] * sys.sigma[static_cast<std::size_t>(i)]);
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), y.back().get_mpz_t());
    }
    if (g == 0) {
        throw std::invalid_argument("family point gives the zero y-vector");
    }
    const auto lead = std::find_if(y.begin(), y.end(), [](const Integer& v) { return v != 0; });
    if (*lead < 0) {
        g = -g;
    }
    std::vector<Rational> scaled;
    for (auto& v : y) {
        mpz_divexact(v.get_mpz_t(), v.get_mpz_t(), g.get_mpz_t());
        scaled.emplace_back(v);
    }
    f.c = point;
    if (g < 0) {
        for (auto& e : f.c) {
            e = -e;
        }
    }
    f.y = std::move(scaled);
    complete_family(f);
    return f;
}

CurveFamily rescale_family(const CurveFamily& f, const Rational& lambda)
{
    if (lambda == 0) {
        throw std::invalid_argument("rescale_family: lambda = 0");
    }
    CurveFamily out;
    out.sigma = f.sigma;
    out.c = f.c;
    for (const auto& v : f.y) {
        out.y.push_back(v * lambda);
    }
    complete_family(out);
    return out;
}

NormalizedFamily normalize_family(const CurveFamily& f)
{
    const ShortModel model = minimal_twist_short(f.short_curve());
    NormalizedFamily out;
    out.lambda = abs(model.to_short.u);
    out.A = model.a;
    out.B = model.b;
    const CurveFamily scaled = rescale_family(f, out.lambda);
    if (scaled.A != Rational(out.A) || scaled.B != Rational(out.B)) {
        throw std::logic_error("normalization scale does not reach the minimal model");
    }
    out.curve = scaled.witness.curve_after;
    out.points = scaled.witness.points_after;
    return out;
}

std::size_t Census::sign_case_count() const { return families.size() << (n - 1); }

Census full_search(const SearchOptions& options)
{
    if (options.n != 6 && options.n != 7) {
        throw std::invalid_argument("full_search: length must be 6 or 7");
    }
    std::vector<Permutation> arrangements;
    if (options.only_sigma) {
        if (static_cast<int>(options.only_sigma->size()) != options.n || !is_permutation(*options.only_sigma)) {
            throw std::invalid_argument("full_search: sigma is not a permutation of the right length");
        }
        arrangements.push_back(*options.only_sigma);
    } else {
        arrangements = all_permutations(options.n);
    }

    struct Slot {
        std::vector<CurveFamily> families;
        std::size_t nullspace_dim = 0;
        std::size_t lines = 0;
    };
    std::vector<Slot> slots(arrangements.size());
    cached_polys();
    parallel_for(
        arrangements.size(),
        [&](std::size_t idx) {
            const SigmaSystem sys = sigma_forms(arrangements[idx]);
            const SigmaSolutions sols = solve_sigma(sys);
            Slot& slot = slots[idx];
            for (const auto& comp : sols.components) {
                if (comp.is_c3_plane) {
                    continue;
                }
                slot.nullspace_dim = comp.basis.size();
                if (comp.degenerate) {
                    continue;
                }
                switch (comp.projective_dimension()) {
                case 0:
                    slot.families.push_back(family_from_point(sys, comp.basis[0]));
                    break;
                case 1:
                    ++slot.lines;
                    break;
                default:
                    throw std::logic_error("non-degenerate solution plane for sigma " +
                                           permutation_label(arrangements[idx]));
                }
            }
        },
        options.workers == 0 ? worker_count() : options.workers);

    Census census;
    census.n = options.n;
    census.stats.arrangements = arrangements.size();
    for (auto& slot : slots) {
        census.stats.nullspace_dims[slot.nullspace_dim] += 1;
        census.stats.nondegenerate_lines += slot.lines;
        if (!slot.families.empty()) {
            ++census.stats.arrangements_with_solutions;
        }
        for (auto& f : slot.families) {
            census.families.push_back(std::move(f));
        }
    }
    for (std::size_t i = 0; i < census.families.size(); ++i) {
        census.normalized.push_back(normalize_family(census.families[i]));
        const auto& norm = census.normalized.back();
        census.classes[{norm.A, norm.B}].push_back(i);
    }
    return census;
}

nlohmann::json family_to_json(const CurveFamily& f, const NormalizedFamily& norm)
{
    nlohmann::json y = nlohmann::json::array();
    for (const auto& v : f.y) {
        y.push_back(to_string(v));
    }
    nlohmann::json c = nlohmann::json::array();
    for (const auto& v : f.c) {
        c.push_back(to_string(v));
    }
    nlohmann::json j;
    j["sigma"] = f.sigma;
    j["sigma_inverse"] = inverse_permutation(f.sigma);
    j["c"] = c;
    j["y"] = y;
    j["A"] = to_string(f.A);
    j["B"] = to_string(f.B);
    j["a"] = to_string(f.a);
    j["d"] = to_string(f.d);
    j["r"] = to_string(f.r);
    j["b"] = to_string(f.b);
    j["dp"] = to_string(f.d_prime);
    j["minimal"] = {{"A", to_string(norm.A)}, {"B", to_string(norm.B)}};
    return j;
}

} // namespace sapforge
