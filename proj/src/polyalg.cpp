#include "sapforge/polyalg.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

namespace sapforge {

bool GrlexLess::operator()(const Exponents& lhs, const Exponents& rhs) const
{
    const auto lhs_deg = std::accumulate(lhs.begin(), lhs.end(), 0u);
    const auto rhs_deg = std::accumulate(rhs.begin(), rhs.end(), 0u);
    if (lhs_deg != rhs_deg) {
        return lhs_deg < rhs_deg;
    }
    return lhs < rhs;
}

MPoly::MPoly(const Rational& constant)
{
    if (constant != 0) {
        terms_.emplace(Exponents{}, constant);
    }
}

MPoly MPoly::variable(const std::string& name)
{
    MPoly p;
    p.variables_ = {name};
    p.terms_.emplace(Exponents{1}, Rational(1));
    return p;
}

MPoly MPoly::from_terms(std::vector<std::string> variables, const TermMap& terms)
{
    MPoly raw;
    raw.variables_ = std::move(variables);
    for (const auto& [exps, coeff] : terms) {
        if (exps.size() != raw.variables_.size()) {
            throw std::invalid_argument("exponent vector does not match variable count");
        }
        raw.add_term(exps, coeff);
    }
    auto sorted = raw.variables_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw std::invalid_argument("duplicate variable name");
    }
    return raw.aligned_to(sorted);
}

unsigned MPoly::total_degree() const
{
    unsigned deg = 0;
    for (const auto& [exps, coeff] : terms_) {
        deg = std::max(deg, std::accumulate(exps.begin(), exps.end(), 0u));
    }
    return deg;
}

std::optional<Rational> MPoly::constant_value() const
{
    if (terms_.empty()) {
        return Rational(0);
    }
    if (terms_.size() == 1) {
        const auto& [exps, coeff] = *terms_.begin();
        if (std::all_of(exps.begin(), exps.end(), [](unsigned e) { return e == 0; })) {
            return coeff;
        }
    }
    return std::nullopt;
}

namespace {

std::optional<Exponents> exponents_for(const std::vector<std::string>& variables,
                                       const std::map<std::string, unsigned>& monomial)
{
    Exponents exps(variables.size(), 0);
    for (const auto& [name, e] : monomial) {
        auto it = std::find(variables.begin(), variables.end(), name);
        if (it == variables.end()) {
            if (e != 0) {
                return std::nullopt;
            }
            continue;
        }
        exps[static_cast<std::size_t>(it - variables.begin())] = e;
    }
    return exps;
}

} // namespace

Rational MPoly::coefficient(const std::map<std::string, unsigned>& monomial) const
{
    auto exps = exponents_for(variables_, monomial);
    if (!exps) {
        return 0;
    }
    auto it = terms_.find(*exps);
    return it == terms_.end() ? Rational(0) : it->second;
}

MPoly MPoly::with_coefficient(const std::map<std::string, unsigned>& monomial, const Rational& value) const
{
    std::vector<std::string> names;
    for (const auto& [name, e] : monomial) {
        names.push_back(name);
    }
    std::vector<std::string> merged = variables_;
    merged.insert(merged.end(), names.begin(), names.end());
    std::sort(merged.begin(), merged.end());
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());

    MPoly out = aligned_to(merged);
    const Exponents exps = *exponents_for(out.variables_, monomial);
    out.terms_.erase(exps);
    if (value != 0) {
        out.terms_.emplace(exps, value);
    }
    return out;
}

MPoly MPoly::aligned_to(const std::vector<std::string>& variables) const
{
    if (variables == variables_) {
        return *this;
    }
    std::vector<std::size_t> slot(variables_.size());
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        auto it = std::find(variables.begin(), variables.end(), variables_[i]);
        if (it == variables.end()) {
            throw std::logic_error("alignment target misses variable " + variables_[i]);
        }
        slot[i] = static_cast<std::size_t>(it - variables.begin());
    }
    MPoly out;
    out.variables_ = variables;
    for (const auto& [exps, coeff] : terms_) {
        Exponents mapped(variables.size(), 0);
        for (std::size_t i = 0; i < exps.size(); ++i) {
            mapped[slot[i]] = exps[i];
        }
        out.terms_.emplace(std::move(mapped), coeff);
    }
    return out;
}

void MPoly::align_with(MPoly& other)
{
    if (variables_ == other.variables_) {
        return;
    }
    std::vector<std::string> merged;
    std::set_union(variables_.begin(), variables_.end(), other.variables_.begin(), other.variables_.end(),
                   std::back_inserter(merged));
    *this = aligned_to(merged);
    other = other.aligned_to(merged);
}

void MPoly::add_term(const Exponents& exps, const Rational& coeff)
{
    if (coeff == 0) {
        return;
    }
    auto [it, inserted] = terms_.try_emplace(exps, coeff);
    if (!inserted) {
        it->second += coeff;
        if (it->second == 0) {
            terms_.erase(it);
        }
    }
}

MPoly MPoly::operator-() const
{
    MPoly out = *this;
    for (auto& [exps, coeff] : out.terms_) {
        coeff = -coeff;
    }
    return out;
}

MPoly& MPoly::operator+=(const MPoly& other)
{
    MPoly rhs = other;
    align_with(rhs);
    for (const auto& [exps, coeff] : rhs.terms_) {
        add_term(exps, coeff);
    }
    return *this;
}

MPoly& MPoly::operator-=(const MPoly& other)
{
    return *this += -other;
}

MPoly& MPoly::operator*=(const MPoly& other)
{
    MPoly rhs = other;
    align_with(rhs);
    MPoly product;
    product.variables_ = variables_;
    Exponents exps(variables_.size());
    for (const auto& [le, lc] : terms_) {
        for (const auto& [re, rc] : rhs.terms_) {
            for (std::size_t i = 0; i < exps.size(); ++i) {
                exps[i] = le[i] + re[i];
            }
            product.add_term(exps, lc * rc);
        }
    }
    *this = std::move(product);
    return *this;
}

MPoly& MPoly::operator*=(const Rational& scalar)
{
    if (scalar == 0) {
        terms_.clear();
        return *this;
    }
    for (auto& [exps, coeff] : terms_) {
        coeff *= scalar;
    }
    return *this;
}

bool operator==(const MPoly& lhs, const MPoly& rhs)
{
    if (lhs.variables_ == rhs.variables_) {
        return lhs.terms_ == rhs.terms_;
    }
    return (lhs - rhs).is_zero();
}

std::string MPoly::to_string() const
{
    if (terms_.empty()) {
        return "0";
    }
    std::ostringstream out;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const auto& [exps, coeff] = *it;
        Rational magnitude = abs(coeff);
        if (first) {
            if (sgn(coeff) < 0) {
                out << "-";
            }
        } else {
            out << (sgn(coeff) < 0 ? " - " : " + ");
        }
        first = false;

        std::string monomial;
        for (std::size_t i = 0; i < exps.size(); ++i) {
            if (exps[i] == 0) {
                continue;
            }
            if (!monomial.empty()) {
                monomial += "*";
            }
            monomial += variables_[i];
            if (exps[i] > 1) {
                monomial += "^" + std::to_string(exps[i]);
            }
        }
        if (monomial.empty()) {
            out << sapforge::to_string(magnitude);
        } else if (magnitude == 1) {
            out << monomial;
        } else {
            out << sapforge::to_string(magnitude) << "*" << monomial;
        }
    }
    return out.str();
}

MPoly pow(const MPoly& base, int exponent)
{
    if (exponent < 0) {
        throw std::invalid_argument("negative exponent in polynomial power");
    }
    MPoly result(1);
    MPoly square = base;
    for (unsigned e = static_cast<unsigned>(exponent); e != 0; e >>= 1) {
        if (e & 1u) {
            result *= square;
        }
        if (e > 1) {
            square *= square;
        }
    }
    return result;
}

MPoly divexact_var(const MPoly& p, const std::string& var)
{
    const auto& vars = p.variables();
    auto it = std::find(vars.begin(), vars.end(), var);
    if (it == vars.end()) {
        if (p.is_zero()) {
            return p;
        }
        throw NotDivisibleError("polynomial does not contain " + var);
    }
    const auto slot = static_cast<std::size_t>(it - vars.begin());
    MPoly::TermMap quotient;
    for (const auto& [exps, coeff] : p.terms()) {
        if (exps[slot] == 0) {
            throw NotDivisibleError("term without " + var + " in " + p.to_string());
        }
        Exponents reduced = exps;
        --reduced[slot];
        quotient.emplace(std::move(reduced), coeff);
    }
    return MPoly::from_terms(vars, quotient);
}

MPoly substitute(const MPoly& p, const std::map<std::string, MPoly>& bindings)
{
    const auto& vars = p.variables();
    std::vector<const MPoly*> image(vars.size(), nullptr);
    std::vector<MPoly> own(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
        auto it = bindings.find(vars[i]);
        if (it != bindings.end()) {
            image[i] = &it->second;
        } else {
            own[i] = MPoly::variable(vars[i]);
            image[i] = &own[i];
        }
    }
    // Cache powers of each image; P and Q reuse the same few powers heavily.
    std::vector<std::vector<MPoly>> powers(vars.size());
    auto power_of = [&](std::size_t slot, unsigned e) -> const MPoly& {
        auto& cache = powers[slot];
        if (cache.empty()) {
            cache.push_back(MPoly(1));
        }
        while (cache.size() <= e) {
            cache.push_back(cache.back() * *image[slot]);
        }
        return cache[e];
    };

    MPoly result;
    for (const auto& [exps, coeff] : p.terms()) {
        MPoly term(coeff);
        for (std::size_t i = 0; i < exps.size(); ++i) {
            if (exps[i] != 0) {
                term *= power_of(i, exps[i]);
            }
        }
        result += term;
    }
    return result;
}

Rational evaluate(const MPoly& p, const std::map<std::string, Rational>& bindings)
{
    const auto& vars = p.variables();
    std::vector<const Rational*> value(vars.size(), nullptr);
    for (std::size_t i = 0; i < vars.size(); ++i) {
        auto it = bindings.find(vars[i]);
        if (it != bindings.end()) {
            value[i] = &it->second;
        }
    }
    Rational total = 0;
    for (const auto& [exps, coeff] : p.terms()) {
        Rational term = coeff;
        for (std::size_t i = 0; i < exps.size(); ++i) {
            if (exps[i] == 0) {
                continue;
            }
            if (value[i] == nullptr) {
                throw std::invalid_argument("no binding for variable " + vars[i]);
            }
            Rational factor;
            mpz_pow_ui(factor.get_num_mpz_t(), value[i]->get_num_mpz_t(), exps[i]);
            mpz_pow_ui(factor.get_den_mpz_t(), value[i]->get_den_mpz_t(), exps[i]);
            term *= factor;
        }
        total += term;
    }
    return total;
}

QMatrix::QMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, Rational(0)) {}

QMatrix::QMatrix(std::initializer_list<std::initializer_list<Rational>> rows)
{
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    data_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
        if (row.size() != cols_) {
            throw std::invalid_argument("ragged matrix literal");
        }
        data_.insert(data_.end(), row.begin(), row.end());
    }
}

std::vector<Rational> QMatrix::multiply(const std::vector<Rational>& v) const
{
    if (v.size() != cols_) {
        throw std::invalid_argument("matrix-vector size mismatch");
    }
    std::vector<Rational> out(rows_, Rational(0));
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            out[r] += (*this)(r, c) * v[c];
        }
    }
    return out;
}

LinSolveResult lin_solve(const QMatrix& a, const std::optional<std::vector<Rational>>& rhs)
{
    const std::size_t rows = a.rows();
    const std::size_t cols = a.cols();
    if (rhs && rhs->size() != rows) {
        throw std::invalid_argument("rhs length does not match matrix rows");
    }
    // Augmented working copy; the last column holds the rhs.
    QMatrix m(rows, cols + 1);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            m(r, c) = a(r, c);
        }
        m(r, cols) = rhs ? (*rhs)[r] : Rational(0);
    }

    LinSolveResult result;
    std::size_t pivot_row = 0;
    for (std::size_t c = 0; c < cols && pivot_row < rows; ++c) {
        std::size_t found = rows;
        for (std::size_t r = pivot_row; r < rows; ++r) {
            if (m(r, c) != 0) {
                found = r;
                break;
            }
        }
        if (found == rows) {
            continue;
        }
        if (found != pivot_row) {
            for (std::size_t k = 0; k <= cols; ++k) {
                std::swap(m(found, k), m(pivot_row, k));
            }
        }
        const Rational inv = 1 / m(pivot_row, c);
        for (std::size_t k = c; k <= cols; ++k) {
            m(pivot_row, k) *= inv;
        }
        for (std::size_t r = 0; r < rows; ++r) {
            if (r == pivot_row || m(r, c) == 0) {
                continue;
            }
            const Rational factor = m(r, c);
            for (std::size_t k = c; k <= cols; ++k) {
                m(r, k) -= factor * m(pivot_row, k);
            }
        }
        result.pivot_columns.push_back(c);
        ++pivot_row;
    }
    result.rank = result.pivot_columns.size();

    bool consistent = true;
    for (std::size_t r = result.rank; r < rows; ++r) {
        if (m(r, cols) != 0) {
            consistent = false;
        }
    }

    std::vector<bool> is_pivot(cols, false);
    for (auto c : result.pivot_columns) {
        is_pivot[c] = true;
    }
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) {
            continue;
        }
        std::vector<Rational> v(cols, Rational(0));
        v[free] = 1;
        for (std::size_t i = 0; i < result.rank; ++i) {
            v[result.pivot_columns[i]] = -m(i, free);
        }
        result.nullspace.push_back(std::move(v));
    }
    if (!consistent) {
        result.status = SolveStatus::inconsistent;
        return result;
    }
    result.particular.assign(cols, Rational(0));
    for (std::size_t i = 0; i < result.rank; ++i) {
        result.particular[result.pivot_columns[i]] = m(i, cols);
    }
    result.status = result.nullspace.empty() ? SolveStatus::unique : SolveStatus::family;
    return result;
}

Rational determinant(const QMatrix& a)
{
    if (a.rows() != a.cols()) {
        throw std::invalid_argument("determinant of a non-square matrix");
    }
    const std::size_t n = a.rows();
    QMatrix m = a;
    Rational det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t found = n;
        for (std::size_t r = c; r < n; ++r) {
            if (m(r, c) != 0) {
                found = r;
                break;
            }
        }
        if (found == n) {
            return 0;
        }
        if (found != c) {
            for (std::size_t k = 0; k < n; ++k) {
                std::swap(m(found, k), m(c, k));
            }
            det = -det;
        }
        det *= m(c, c);
        for (std::size_t r = c + 1; r < n; ++r) {
            if (m(r, c) == 0) {
                continue;
            }
            const Rational factor = m(r, c) / m(c, c);
            for (std::size_t k = c; k < n; ++k) {
                m(r, k) -= factor * m(c, k);
            }
        }
    }
    return det;
}

} // namespace sapforge
