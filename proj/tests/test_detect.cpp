#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "sapforge/detect.hpp"
#include "sapforge/polyalg.hpp"

#include <algorithm>
#include <random>
#include <tuple>

using namespace sapforge;

namespace {

const Curve kExample = Curve::short_form(-112, 400);

const Curve kTate(Rational(25, 21), Rational(2, 7), Rational(-2, 7), 0, 0);
const XAP kTateSupport(Rational(-6, 7), Rational(2, 7), 4);
const std::vector<Rational> kTateYs{Rational(4, 7), Rational(16, 147), Rational(92, 147), 0, Rational(4, 21)};

using Key = std::tuple<std::vector<Rational>, Permutation, Rational, Rational, Rational>;

std::vector<Key> keys(const std::vector<SAPWitness>& ws)
{
    std::vector<Key> out;
    for (const auto& w : ws) {
        out.emplace_back(w.ys, w.sigma, w.r, w.b, w.d_prime);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Rational> after_ys(const SAPWitness& w)
{
    std::vector<Rational> out;
    for (const auto& p : w.points_after) {
        out.push_back(p.y());
    }
    return out;
}

/// A nonsingular Weierstrass model through all given points (at most five),
/// or nothing when the interpolation fails.
std::optional<Curve> curve_through(const std::vector<Rational>& xs, const std::vector<Rational>& ys,
                                   std::mt19937& rng)
{
    // a1 xy + a3 y - a2 x^2 - a4 x - a6 = x^3 - y^2
    QMatrix m(xs.size(), 5);
    std::vector<Rational> rhs;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        m(i, 0) = xs[i] * ys[i];
        m(i, 1) = ys[i];
        m(i, 2) = -xs[i] * xs[i];
        m(i, 3) = -xs[i];
        m(i, 4) = -1;
        rhs.push_back(xs[i] * xs[i] * xs[i] - ys[i] * ys[i]);
    }
    const auto s = lin_solve(m, rhs);
    if (s.status == SolveStatus::inconsistent) {
        return std::nullopt;
    }
    std::vector<Rational> a = s.particular;
    std::uniform_int_distribution<int> pick(-3, 3);
    for (const auto& v : s.nullspace) {
        const int t = pick(rng);
        for (std::size_t k = 0; k < 5; ++k) {
            a[k] += t * v[k];
        }
    }
    Curve c(a[0], a[2], a[1], a[3], a[4]);
    if (c.is_singular()) {
        return std::nullopt;
    }
    return c;
}

} // namespace

TEST_CASE("permutation helpers")
{
    const Permutation s{2, 0, 4, 1, 3};
    CHECK(is_permutation(s));
    CHECK_FALSE(is_permutation(Permutation{0, 0, 1}));
    CHECK_FALSE(is_permutation(Permutation{0, 3, 1}));
    CHECK(inverse_permutation(s) == Permutation{1, 3, 0, 4, 2});
    CHECK(reversed_values(s) == Permutation{2, 4, 0, 3, 1});
    CHECK(is_affine_permutation(Permutation{0, 1, 2}));
    CHECK(is_affine_permutation(Permutation{2, 1, 0}));
    CHECK_FALSE(is_affine_permutation(s));
    CHECK(all_permutations(4).size() == 24);
    CHECK(all_permutations(3).front() == Permutation{0, 1, 2});
    CHECK(permutation_label(Permutation{1, 3, 2, 4, 0}) == "(13240)");
}

TEST_CASE("XAP")
{
    const XAP x(-4, 4, 3);
    CHECK(x.support() == std::vector<Rational>{-4, 0, 4, 8});
    CHECK_THROWS_AS(XAP(1, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(XAP(1, 1, 0), std::invalid_argument);
}

TEST_CASE("enumerate_lifts")
{
    CHECK(enumerate_lifts(kExample, XAP(-4, 4, 3)).size() == 16);
    CHECK(enumerate_lifts(kExample, XAP(-4, 4, 5)).size() == 64);
    CHECK(enumerate_lifts(kExample, XAP(1, 4, 3)).empty());
    const auto lifts = enumerate_lifts(kExample, XAP(-4, 4, 1));
    CHECK(lifts.front() == std::vector<Rational>{-28, -20});
    CHECK(lifts.back() == std::vector<Rational>{28, 20});
    CHECK_THROWS_AS(enumerate_lifts(Curve::short_form(0, 0), XAP(1, 1, 1)), SingularCurveError);
}

TEST_CASE("solve_shear")
{
    const std::vector<Rational> xs{-4, 0, 4, 8};
    const std::vector<Rational> ys{28, -20, 4, 4};
    const auto s = solve_shear(xs, ys, Permutation{1, 0, 2, 3});
    REQUIRE(s.has_value());
    CHECK(*s == ShearSolution{-6, -20, 24});
    CHECK_FALSE(solve_shear(xs, ys, Permutation{0, 1, 2, 3}).has_value());

    const std::vector<Rational> xs5{-4, 0, 4, 8, 12};
    const std::vector<Rational> ys5{-28, -20, -4, 4, 28};
    const auto t = solve_shear(xs5, ys5, Permutation{1, 3, 2, 4, 0});
    REQUIRE(t.has_value());
    CHECK(*t == ShearSolution{Rational(10, 3), -12, Rational(-8, 3)});

    const std::vector<Rational> ap{5, 7, 9, 11};
    CHECK(*solve_shear(xs, ap, Permutation{0, 1, 2, 3}) == ShearSolution{0, 5, 2});
    CHECK(*solve_shear(xs, ap, Permutation{3, 2, 1, 0}) == ShearSolution{0, 11, -2});

    const std::vector<Rational> bad_xs{0, 1, 3, 4};
    CHECK_THROWS_AS(solve_shear(bad_xs, ys, Permutation{0, 1, 2, 3}), std::invalid_argument);
    const std::vector<Rational> flat{1, 1, 1, 1};
    CHECK_THROWS_AS(solve_shear(flat, ys, Permutation{0, 1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(solve_shear(xs, ys, Permutation{0, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(solve_shear(xs, ys, Permutation{0, 1, 1, 2}), std::invalid_argument);
}

TEST_CASE("four-point support on the worked curve")
{
    for (int alg = 1; alg <= 2; ++alg) {
        CAPTURE(alg);
        const auto ws = alg == 1 ? detect_alg1(kExample, XAP(-4, 4, 3)) : detect_alg2(kExample, XAP(-4, 4, 3));
        std::vector<std::vector<Rational>> vectors;
        for (const auto& w : ws) {
            if (std::find(vectors.begin(), vectors.end(), w.ys) == vectors.end()) {
                vectors.push_back(w.ys);
            }
        }
        CHECK(vectors.size() == 4);
        const auto row = std::find_if(ws.begin(), ws.end(), [](const SAPWitness& w) {
            return w.ys == std::vector<Rational>{28, -20, 4, 4} && w.sigma == Permutation{1, 0, 2, 3};
        });
        REQUIRE(row != ws.end());
        CHECK(after_ys(*row) == std::vector<Rational>{4, -20, 28, 52});
        for (const auto& w : ws) {
            CHECK(witness_is_sound(kExample, XAP(-4, 4, 3).support(), w));
        }
    }
}

TEST_CASE("five-point support on the worked curve")
{
    DetectStats stats;
    const auto ws = dedup_reversals(detect_alg1(kExample, XAP(-4, 4, 4), &stats));
    CHECK(stats.y_vectors == 32);
    REQUIRE(ws.size() == 2);
    const Curve printed(Rational(-20, 3), Rational(-100, 9), 0, -112, 400);
    int exact = 0;
    for (const auto& w : ws) {
        CHECK(w.sigma == Permutation{1, 3, 2, 4, 0});
        if (w.curve_after == printed) {
            ++exact;
        } else {
            // the other one is its Y -> -Y image
            CHECK(apply_transform(w.curve_after, Transform::scaling(-1)) == printed);
        }
    }
    CHECK(exact == 1);
    CHECK(keys(detect_alg2(kExample, XAP(-4, 4, 4))) == keys(detect_alg1(kExample, XAP(-4, 4, 4))));
}

TEST_CASE("six-point support on the worked curve")
{
    DetectStats s1, s2;
    CHECK(detect_alg1(kExample, XAP(-4, 4, 5), &s1).empty());
    CHECK(detect_alg2(kExample, XAP(-4, 4, 5), &s2).empty());
    CHECK(s1.y_vectors == 64);
    CHECK(s2.planes_unordered == 64 * 20);
    CHECK(s2.planes_ordered == 64 * 120);
}

TEST_CASE("length-5 counterexample")
{
    const auto xs = kTateSupport.support();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        REQUIRE(contains(kTate, Point(xs[i], kTateYs[i])));
    }
    const auto all2 = detect_alg2_for(kTate, kTateSupport, kTateYs);
    CHECK(keys(all2) == keys(detect_alg1_for(kTate, kTateSupport, kTateYs)));
    CHECK(all2.size() == 2);
    const auto ws = dedup_reversals(all2);
    REQUIRE(ws.size() == 1);
    CHECK(ws[0].sigma == Permutation{2, 0, 4, 1, 3});
    CHECK(ws[0].b == Rational(-8, 49));
    CHECK(ws[0].d_prime == Rational(8, 49));
    CHECK(after_ys(ws[0]) ==
          std::vector<Rational>{Rational(8, 49), Rational(-8, 49), Rational(24, 49), 0, Rational(16, 49)});

    std::vector<Point> pts;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        pts.emplace_back(xs[i], kTateYs[i]);
    }
    CHECK(sub_sap(kTate, pts, 4).empty());
    CHECK(restricting_windows(ws[0].sigma, 4).empty());
}

TEST_CASE("sub_sap")
{
    const std::vector<Rational> ys{-28, -20, -4, 4, 28};
    std::vector<Point> pts;
    for (int i = 0; i <= 4; ++i) {
        pts.emplace_back(-4 + 4 * i, ys[static_cast<std::size_t>(i)]);
    }
    const auto windows = sub_sap(kExample, pts, 4);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0].start == 0);
    CHECK(windows[0].witnesses.size() == 6);
    CHECK(restricting_windows(Permutation{1, 3, 2, 4, 0}, 4) == std::vector<std::size_t>{0});

    const Curve line_curve(0, -2, 0, 2, 0);
    const std::vector<Point> collinear{Point(0, 0), Point(1, 1), Point(2, 2)};
    const auto pairs = sub_sap(line_curve, collinear, 2);
    CHECK(pairs.size() == 2);

    CHECK_THROWS_AS(sub_sap(kExample, pts, 1), std::invalid_argument);
    CHECK_THROWS_AS(sub_sap(kExample, pts, 5), std::invalid_argument);
    std::vector<Point> off = pts;
    off[1] = Point(0, 21);
    CHECK_THROWS_AS(sub_sap(kExample, off, 4), std::invalid_argument);
}

TEST_CASE("progression shortcut and affine degeneracy")
{
    // y = x on Y^2 = X^3 - 2X^2 + 2X: the y-vector is itself in progression.
    const Curve c(0, -2, 0, 2, 0);
    const XAP xap(0, 1, 2);
    const std::vector<Rational> ys{0, 1, 2};
    DetectStats stats;
    const auto ws = detect_alg1_for(c, xap, ys, &stats);
    CHECK(stats.progression_shortcuts == 1);
    const auto id = std::find_if(ws.begin(), ws.end(), [](const SAPWitness& w) { return w.sigma == Permutation{0, 1, 2}; });
    REQUIRE(id != ws.end());
    CHECK(id->r == 0);
    CHECK(keys(ws) == keys(detect_alg2_for(c, xap, ys)));

    std::mt19937 rng(17);
    std::uniform_int_distribution<int> v(-6, 6);
    const std::vector<Rational> xs{1, 2, 3, 4};
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<Rational> y4{v(rng), v(rng), v(rng), v(rng)};
        if (trial % 2 == 0) {
            y4[2] = 2 * y4[1] - y4[0];
            y4[3] = 2 * y4[2] - y4[1];
        }
        const bool ap = ap_check(y4).has_value();
        CHECK(solve_shear(xs, y4, Permutation{0, 1, 2, 3}).has_value() == ap);
        CHECK(solve_shear(xs, y4, Permutation{3, 2, 1, 0}).has_value() == ap);
    }
}

TEST_CASE("degenerate witnesses are flagged")
{
    // three points on the line y = 1, curve fitted through them
    std::mt19937 rng(2);
    const std::vector<Rational> xs{0, 1, 2};
    const std::vector<Rational> ys{1, 1, 1};
    const auto c = curve_through(xs, ys, rng);
    REQUIRE(c.has_value());
    const auto ws = detect_alg1_for(*c, XAP(0, 1, 2), ys);
    REQUIRE_FALSE(ws.empty());
    CHECK(std::all_of(ws.begin(), ws.end(), [](const SAPWitness& w) { return w.degenerate(); }));
    CHECK(witness_to_json(ws[0])["degenerate"] == true);
}

TEST_CASE("alg1 and alg2 agree (fuzz)")
{
    std::mt19937 rng(2024);
    std::uniform_int_distribution<int> small(-20, 20);
    std::uniform_int_distribution<int> len(2, 4);
    std::uniform_int_distribution<int> coin(0, 2);
    int instances = 0;
    int with_witnesses = 0;
    while (instances < 220) {
        const int n = len(rng);
        Rational a = small(rng);
        Rational d = small(rng);
        if (d == 0) continue;
        const XAP xap(a, d, n);
        const auto xs = xap.support();

        std::optional<Curve> c;
        if (coin(rng) == 0) {
            // random curve, usually no witness
            c = Curve(small(rng) % 3, small(rng) % 5, small(rng) % 3, small(rng), small(rng));
            if (c->is_singular()) continue;
        } else {
            // planted progression, curve interpolated through it
            const auto perms = all_permutations(n + 1);
            const auto sigma = perms[std::uniform_int_distribution<std::size_t>(0, perms.size() - 1)(rng)];
            const Rational r = make_rational(small(rng), 1 + std::abs(small(rng)) % 3);
            const Rational b = small(rng);
            const Rational dp = small(rng);
            std::vector<Rational> ys;
            for (int i = 0; i <= n; ++i) {
                ys.push_back(r * xs[static_cast<std::size_t>(i)] + b + sigma[static_cast<std::size_t>(i)] * dp);
            }
            c = curve_through(xs, ys, rng);
            if (!c) continue;
        }
        const auto w1 = detect_alg1(*c, xap);
        const auto w2 = detect_alg2(*c, xap);
        CHECK(keys(w1) == keys(w2));
        for (const auto& w : w1) {
            CHECK(witness_is_sound(*c, xs, w));
            CHECK(w.curve_after == apply_transform(*c, Transform{1, 0, -w.r, 0}));
        }
        with_witnesses += w1.empty() ? 0 : 1;
        ++instances;
    }
    CHECK(instances >= 200);
    CHECK(with_witnesses >= 100);
}

TEST_CASE("witnesses do not depend on the model (fuzz)")
{
    std::mt19937 rng(99);
    std::uniform_int_distribution<int> small(-6, 6);
    int compared = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const int n = 3;
        const XAP xap(small(rng), 1 + std::abs(small(rng)), n);
        const auto xs = xap.support();
        auto sigma = all_permutations(n + 1)[static_cast<std::size_t>(std::abs(small(rng))) % 24];
        std::vector<Rational> ys;
        for (int i = 0; i <= n; ++i) {
            ys.push_back(2 * xs[static_cast<std::size_t>(i)] + 1 + sigma[static_cast<std::size_t>(i)] * 3);
        }
        const auto c = curve_through(xs, ys, rng);
        if (!c) continue;
        Rational u = small(rng);
        if (u == 0) u = 2;
        const Transform t{u, small(rng), small(rng), small(rng)};
        const Curve image = apply_transform(*c, t);
        const XAP moved(u * u * xap.a + t.r, u * u * xap.d, n);

        auto sigmas = [](const std::vector<SAPWitness>& ws) {
            std::vector<Permutation> out;
            for (const auto& w : ws) out.push_back(w.sigma);
            std::sort(out.begin(), out.end());
            return out;
        };
        const auto before = detect_alg1(*c, xap);
        const auto after = detect_alg1(image, moved);
        CHECK(before.size() == after.size());
        CHECK(sigmas(before) == sigmas(after));
        ++compared;
    }
    CHECK(compared > 30);
}

TEST_CASE("witness JSON")
{
    const auto ws = detect_alg1(kExample, XAP(-4, 4, 3));
    REQUIRE_FALSE(ws.empty());
    const auto j = witness_to_json(ws[0]);
    for (const char* key : {"sigma", "r", "b", "dp", "ys", "curve_after"}) {
        CHECK(j.contains(key));
    }
    CHECK(j["ys"].size() == 4);
}
