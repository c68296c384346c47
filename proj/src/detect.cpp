#include "sapforge/detect.hpp"

#include "sapforge/parallel.hpp"
#include "sapforge/polyalg.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace sapforge {

XAP::XAP(Rational first, Rational diff, int last_index) : a(std::move(first)), d(std::move(diff)), n(last_index)
{
    if (d == 0) {
        throw std::invalid_argument("x-progression with zero difference");
    }
    if (n < 1) {
        throw std::invalid_argument("x-progression needs at least two points");
    }
}

std::vector<Rational> XAP::support() const
{
    std::vector<Rational> xs;
    xs.reserve(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; ++i) {
        xs.push_back(a + i * d);
    }
    return xs;
}

bool is_permutation(std::span<const int> sigma)
{
    std::vector<bool> seen(sigma.size(), false);
    for (int v : sigma) {
        if (v < 0 || static_cast<std::size_t>(v) >= sigma.size() || seen[static_cast<std::size_t>(v)]) {
            return false;
        }
        seen[static_cast<std::size_t>(v)] = true;
    }
    return true;
}

Permutation inverse_permutation(std::span<const int> sigma)
{
    Permutation inv(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        inv[static_cast<std::size_t>(sigma[i])] = static_cast<int>(i);
    }
    return inv;
}

Permutation reversed_values(std::span<const int> sigma)
{
    const int n = static_cast<int>(sigma.size()) - 1;
    Permutation out(sigma.size());
    std::transform(sigma.begin(), sigma.end(), out.begin(), [n](int v) { return n - v; });
    return out;
}

bool is_affine_permutation(std::span<const int> sigma)
{
    const int n = static_cast<int>(sigma.size()) - 1;
    bool identity = true;
    bool reversal = true;
    for (int i = 0; i <= n; ++i) {
        identity = identity && sigma[static_cast<std::size_t>(i)] == i;
        reversal = reversal && sigma[static_cast<std::size_t>(i)] == n - i;
    }
    return identity || reversal;
}

std::vector<Permutation> all_permutations(int n)
{
    Permutation p(static_cast<std::size_t>(n));
    std::iota(p.begin(), p.end(), 0);
    std::vector<Permutation> out;
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

std::string permutation_label(std::span<const int> sigma)
{
    std::string label = "(";
    for (int v : sigma) {
        label += std::to_string(v);
    }
    return label + ")";
}

namespace {

void require_progression(std::span<const Rational> xs)
{
    if (xs.size() < 2) {
        throw std::invalid_argument("support needs at least two points");
    }
    auto ap = ap_check(xs);
    if (!ap || ap->diff == 0) {
        throw std::invalid_argument("x-coordinates are not an arithmetic progression with nonzero difference");
    }
}

Rational det3(const Rational& a, const Rational& b, const Rational& c, const Rational& d, const Rational& e,
              const Rational& f, const Rational& g, const Rational& h, const Rational& i)
{
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g);
}

/// s in {2..n} with rows 0, 1, s of (x_i, 1, y_i) independent.
std::optional<std::size_t> find_pivot(std::span<const Rational> xs, std::span<const Rational> ys)
{
    for (std::size_t s = 2; s < xs.size(); ++s) {
        if (det3(xs[0], 1, ys[0], xs[1], 1, ys[1], xs[s], 1, ys[s]) != 0) {
            return s;
        }
    }
    return std::nullopt;
}

/// Step 1 shortcut: y already in progression, so no pivot exists; every
/// permutation is tried directly.
std::vector<SAPWitness> brute_force(const Curve& c, std::span<const Rational> xs, std::span<const Rational> ys)
{
    std::vector<SAPWitness> out;
    for (const auto& sigma : all_permutations(static_cast<int>(xs.size()))) {
        if (auto sol = solve_shear(xs, ys, sigma)) {
            out.push_back(make_witness(c, xs, ys, sigma, *sol));
        }
    }
    return out;
}

template <class PerVector>
std::vector<SAPWitness> over_all_lifts(const Curve& c, const XAP& xap, DetectStats* stats, PerVector per_vector)
{
    c.require_nonsingular("s.a.p. detection");
    const auto lifts = enumerate_lifts(c, xap);
    std::vector<std::vector<SAPWitness>> slots(lifts.size());
    std::vector<DetectStats> local(lifts.size());
    parallel_for(lifts.size(), [&](std::size_t i) { slots[i] = per_vector(lifts[i], &local[i]); });

    std::vector<SAPWitness> out;
    for (std::size_t i = 0; i < slots.size(); ++i) {
        out.insert(out.end(), std::make_move_iterator(slots[i].begin()), std::make_move_iterator(slots[i].end()));
        if (stats) {
            stats->y_vectors += local[i].y_vectors;
            stats->progression_shortcuts += local[i].progression_shortcuts;
            stats->minors += local[i].minors;
            stats->planes_ordered += local[i].planes_ordered;
            stats->planes_unordered += local[i].planes_unordered;
        }
    }
    return out;
}

void check_fiber_vector(const XAP& xap, std::span<const Rational> ys)
{
    if (ys.size() != static_cast<std::size_t>(xap.n) + 1) {
        throw std::invalid_argument("y-vector length does not match the support");
    }
}

} // namespace

std::optional<ShearSolution> solve_shear(std::span<const Rational> xs, std::span<const Rational> ys,
                                         std::span<const int> sigma)
{
    require_progression(xs);
    if (ys.size() != xs.size() || sigma.size() != xs.size()) {
        throw std::invalid_argument("solve_shear: xs, ys and sigma must have equal length");
    }
    if (!is_permutation(sigma)) {
        throw std::invalid_argument("solve_shear: sigma is not a permutation");
    }
    const std::size_t rows = xs.size();
    QMatrix a(rows, 3);
    std::vector<Rational> rhs(ys.begin(), ys.end());
    for (std::size_t i = 0; i < rows; ++i) {
        a(i, 0) = xs[i];
        a(i, 1) = 1;
        a(i, 2) = sigma[i];
    }
    const auto full = lin_solve(a, rhs);
    if (full.status == SolveStatus::inconsistent) {
        return std::nullopt;
    }
    if (full.status == SolveStatus::unique) {
        return ShearSolution{full.particular[0], full.particular[1], full.particular[2]};
    }
    // Coefficient rank 2: sigma is affine in i. Fix r = 0.
    QMatrix reduced(rows, 2);
    for (std::size_t i = 0; i < rows; ++i) {
        reduced(i, 0) = 1;
        reduced(i, 1) = sigma[i];
    }
    const auto fixed = lin_solve(reduced, rhs);
    if (fixed.status != SolveStatus::unique) {
        return std::nullopt;
    }
    return ShearSolution{0, fixed.particular[0], fixed.particular[1]};
}

SAPWitness make_witness(const Curve& c, std::span<const Rational> xs, std::span<const Rational> ys,
                        std::span<const int> sigma, const ShearSolution& solution)
{
    const Transform shear = Transform::shear(solution.r);
    SAPWitness w;
    w.sigma.assign(sigma.begin(), sigma.end());
    w.r = solution.r;
    w.b = solution.b;
    w.d_prime = solution.d_prime;
    w.ys.assign(ys.begin(), ys.end());
    w.curve_after = apply_transform(c, shear);
    w.points_after.reserve(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        w.points_after.push_back(shear.apply(Point(xs[i], ys[i])));
    }
    return w;
}

bool witness_is_sound(const Curve& c, std::span<const Rational> xs, const SAPWitness& w)
{
    const std::size_t len = xs.size();
    if (w.sigma.size() != len || w.ys.size() != len || w.points_after.size() != len || !is_permutation(w.sigma)) {
        return false;
    }
    if (w.curve_after != apply_transform(c, Transform::shear(w.r))) {
        return false;
    }
    std::vector<Rational> reordered(len);
    for (std::size_t i = 0; i < len; ++i) {
        if (!contains(c, Point(xs[i], w.ys[i]))) {
            return false;
        }
        if (w.ys[i] - w.r * xs[i] != w.b + w.sigma[i] * w.d_prime) {
            return false;
        }
        const Point& p = w.points_after[i];
        if (p.is_infinity() || p.x() != xs[i] || !contains(w.curve_after, p)) {
            return false;
        }
        reordered[static_cast<std::size_t>(w.sigma[i])] = p.y();
    }
    auto ap = ap_check(reordered);
    return ap && ap->first == w.b && ap->diff == w.d_prime;
}

std::vector<std::vector<Rational>> enumerate_lifts(const Curve& c, const XAP& xap)
{
    c.require_nonsingular("enumerate_lifts");
    std::vector<std::vector<Rational>> fibers;
    for (const auto& x : xap.support()) {
        fibers.push_back(lift_x(c, x));
        if (fibers.back().empty()) {
            return {};
        }
    }
    std::vector<std::vector<Rational>> out;
    std::vector<std::size_t> choice(fibers.size(), 0);
    while (true) {
        std::vector<Rational> ys(fibers.size());
        for (std::size_t i = 0; i < fibers.size(); ++i) {
            ys[i] = fibers[i][choice[i]];
        }
        out.push_back(std::move(ys));
        std::size_t pos = fibers.size();
        while (pos > 0) {
            --pos;
            if (++choice[pos] < fibers[pos].size()) {
                break;
            }
            choice[pos] = 0;
            if (pos == 0) {
                return out;
            }
        }
    }
}

std::vector<SAPWitness> detect_alg1_for(const Curve& c, const XAP& xap, std::span<const Rational> ys,
                                        DetectStats* stats)
{
    check_fiber_vector(xap, ys);
    const auto xs = xap.support();
    if (stats) {
        ++stats->y_vectors;
    }
    const auto pivot = find_pivot(xs, ys);
    if (!pivot) {
        if (stats) {
            ++stats->progression_shortcuts;
        }
        return brute_force(c, xs, ys);
    }
    const std::size_t s = *pivot;
    const std::size_t len = xs.size();

    // Minor of rows {0, 1, s, i} of [x | 1 | sigma | y], expanded along the
    // sigma column: sum over the four rows of sigma(row) * cofactor(row).
    // The cofactors do not depend on sigma.
    struct Bordered {
        std::size_t row;
        std::array<Rational, 4> cofactor;
    };
    std::vector<Bordered> borders;
    for (std::size_t i = 2; i < len; ++i) {
        if (i == s) {
            continue;
        }
        const std::array<std::size_t, 4> rows{0, 1, s, i};
        Bordered b{i, {}};
        for (std::size_t k = 0; k < 4; ++k) {
            std::array<std::size_t, 3> rest{};
            std::size_t m = 0;
            for (std::size_t q = 0; q < 4; ++q) {
                if (q != k) {
                    rest[m++] = rows[q];
                }
            }
            const Rational minor = det3(xs[rest[0]], 1, ys[rest[0]], xs[rest[1]], 1, ys[rest[1]], xs[rest[2]], 1,
                                        ys[rest[2]]);
            // sigma sits in column 2 of the 4x4 minor; sign (-1)^(k + 2).
            b.cofactor[k] = (k % 2 == 0) ? minor : Rational(-minor);
        }
        borders.push_back(std::move(b));
    }

    std::vector<SAPWitness> out;
    Permutation sigma(len);
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
        bool all_null = true;
        for (const auto& b : borders) {
            if (stats) {
                ++stats->minors;
            }
            const Rational value = sigma[0] * b.cofactor[0] + sigma[1] * b.cofactor[1] + sigma[s] * b.cofactor[2] +
                                   sigma[b.row] * b.cofactor[3];
            if (value != 0) {
                all_null = false;
                break;
            }
        }
        if (!all_null) {
            continue;
        }
        if (auto sol = solve_shear(xs, ys, sigma)) {
            out.push_back(make_witness(c, xs, ys, sigma, *sol));
        }
    } while (std::next_permutation(sigma.begin(), sigma.end()));
    return out;
}

std::vector<SAPWitness> detect_alg1(const Curve& c, const XAP& xap, DetectStats* stats)
{
    return over_all_lifts(c, xap, stats, [&](const std::vector<Rational>& ys, DetectStats* local) {
        return detect_alg1_for(c, xap, ys, local);
    });
}

std::vector<SAPWitness> detect_alg2_for(const Curve& c, const XAP& xap, std::span<const Rational> ys,
                                        DetectStats* stats)
{
    check_fiber_vector(xap, ys);
    const auto xs = xap.support();
    if (stats) {
        ++stats->y_vectors;
    }
    const auto pivot = find_pivot(xs, ys);
    if (!pivot) {
        if (stats) {
            ++stats->progression_shortcuts;
        }
        return brute_force(c, xs, ys);
    }
    const std::size_t s = *pivot;
    const int n = xap.n;
    const std::size_t len = xs.size();
    if (stats) {
        stats->planes_unordered += static_cast<std::size_t>((n + 1) * n * (n - 1) / 6);
    }

    // Q_l = (l d, y_l, z_l). With u = Q_1 - Q_0 and v = Q_s - Q_0 the plane
    // normal is u x v; its z-component does not depend on the labels.
    const Rational& d = xap.d;
    const Rational sd = Rational(static_cast<long>(s)) * d;
    const Rational dy1 = ys[1] - ys[0];
    const Rational dys = ys[s] - ys[0];
    const Rational normal_z = d * dys - dy1 * sd;

    std::vector<SAPWitness> out;
    Permutation sigma(len);
    std::vector<bool> used(len);
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            for (int k = 0; k <= n; ++k) {
                if (i == j || j == k || i == k) {
                    continue;
                }
                if (stats) {
                    ++stats->planes_ordered;
                }
                if (normal_z == 0) {
                    continue; // plane contains the vertical direction
                }
                const Rational normal_x = dy1 * (k - i) - (j - i) * dys;
                const Rational normal_y = (j - i) * sd - d * (k - i);

                std::fill(used.begin(), used.end(), false);
                used[static_cast<std::size_t>(i)] = used[static_cast<std::size_t>(j)] =
                    used[static_cast<std::size_t>(k)] = true;
                sigma[0] = i;
                sigma[1] = j;
                sigma[s] = k;
                bool ok = true;
                for (std::size_t l = 2; l < len && ok; ++l) {
                    if (l == s) {
                        continue;
                    }
                    const Rational z = i - (normal_x * (Rational(static_cast<long>(l)) * d) +
                                            normal_y * (ys[l] - ys[0])) /
                                               normal_z;
                    if (!is_integer(z) || z < 0 || z > n) {
                        ok = false;
                        break;
                    }
                    const auto label = static_cast<std::size_t>(z.get_num().get_si());
                    if (used[label]) {
                        ok = false;
                        break;
                    }
                    used[label] = true;
                    sigma[l] = static_cast<int>(label);
                }
                if (!ok) {
                    continue;
                }
                if (auto sol = solve_shear(xs, ys, sigma)) {
                    out.push_back(make_witness(c, xs, ys, sigma, *sol));
                }
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const SAPWitness& lhs, const SAPWitness& rhs) { return lhs.sigma < rhs.sigma; });
    return out;
}

std::vector<SAPWitness> detect_alg2(const Curve& c, const XAP& xap, DetectStats* stats)
{
    return over_all_lifts(c, xap, stats, [&](const std::vector<Rational>& ys, DetectStats* local) {
        return detect_alg2_for(c, xap, ys, local);
    });
}

std::vector<SAPWitness> dedup_reversals(std::vector<SAPWitness> witnesses)
{
    std::erase_if(witnesses, [](const SAPWitness& w) { return reversed_values(w.sigma) < w.sigma; });
    return witnesses;
}

std::vector<WindowResult> sub_sap(const Curve& c, std::span<const Point> points, int m)
{
    std::vector<Rational> xs;
    std::vector<Rational> ys;
    for (const auto& p : points) {
        if (p.is_infinity()) {
            throw std::invalid_argument("sub_sap: point at infinity in the sequence");
        }
        if (!contains(c, p)) {
            throw std::invalid_argument("sub_sap: point not on the curve");
        }
        xs.push_back(p.x());
        ys.push_back(p.y());
    }
    require_progression(xs);
    if (m < 2 || static_cast<std::size_t>(m) > points.size() - 1) {
        throw std::invalid_argument("sub_sap: window length out of range");
    }
    const auto window = static_cast<std::size_t>(m);
    std::vector<WindowResult> out;
    for (std::size_t start = 0; start + window <= points.size(); ++start) {
        std::span<const Rational> wx(xs.data() + start, window);
        std::span<const Rational> wy(ys.data() + start, window);
        WindowResult result{start, brute_force(c, wx, wy)};
        if (!result.witnesses.empty()) {
            out.push_back(std::move(result));
        }
    }
    return out;
}

std::vector<std::size_t> restricting_windows(std::span<const int> parent, int m)
{
    std::vector<std::size_t> out;
    const auto window = static_cast<std::size_t>(m);
    for (std::size_t start = 0; start + window <= parent.size(); ++start) {
        const auto [lo, hi] = std::minmax_element(parent.begin() + static_cast<std::ptrdiff_t>(start),
                                                  parent.begin() + static_cast<std::ptrdiff_t>(start + window));
        if (*hi - *lo == m - 1) {
            out.push_back(start);
        }
    }
    return out;
}

nlohmann::json witness_to_json(const SAPWitness& w)
{
    nlohmann::json ys = nlohmann::json::array();
    for (const auto& y : w.ys) {
        ys.push_back(to_string(y));
    }
    return nlohmann::json{{"sigma", w.sigma},
                          {"r", to_string(w.r)},
                          {"b", to_string(w.b)},
                          {"dp", to_string(w.d_prime)},
                          {"ys", ys},
                          {"curve_after", curve_to_json(w.curve_after)},
                          {"degenerate", w.degenerate()}};
}

} // namespace sapforge
