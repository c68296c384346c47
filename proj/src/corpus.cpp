#include "sapforge/corpus.hpp"

#include "sapforge/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sapforge {

namespace {

const std::array<const char*, 9> kFields{"id", "s1", "s2", "s4", "s6", "sigma", "nd", "rank", "rank_exact"};

Rational rational_field(const nlohmann::json& j, const char* key, std::size_t line)
{
    if (!j.is_string()) {
        throw CorpusError(line, key, "expected a rational string");
    }
    try {
        return parse_rational(j.get<std::string>());
    } catch (const std::exception& e) {
        throw CorpusError(line, key, e.what());
    }
}

/// Replaces the fields present in j; `require_all` for full entries.
void read_fields(CorpusEntry& e, const nlohmann::json& j, std::size_t line, bool require_all)
{
    if (!j.is_object()) {
        throw CorpusError(line, "", "expected a JSON object");
    }
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(kFields.begin(), kFields.end(), [&](const char* f) { return key == f; }) == kFields.end()) {
            throw CorpusError(line, key, "unknown field");
        }
    }
    if (require_all) {
        for (const char* f : kFields) {
            if (!j.contains(f)) {
                throw CorpusError(line, f, "missing field");
            }
        }
    }
    if (j.contains("id")) {
        if (!j["id"].is_number_integer()) {
            throw CorpusError(line, "id", "expected an integer");
        }
        e.id = j["id"].get<int>();
    }
    if (j.contains("s1")) e.s1 = rational_field(j["s1"], "s1", line);
    if (j.contains("s2")) e.s2 = rational_field(j["s2"], "s2", line);
    if (j.contains("s4")) e.s4 = rational_field(j["s4"], "s4", line);
    if (j.contains("s6")) e.s6 = rational_field(j["s6"], "s6", line);
    if (j.contains("sigma")) {
        const auto& s = j["sigma"];
        if (!s.is_array() || !std::all_of(s.begin(), s.end(), [](const auto& v) { return v.is_number_integer(); })) {
            throw CorpusError(line, "sigma", "expected an array of integers");
        }
        e.sigma = s.get<Permutation>();
        if (e.sigma.size() < 2 || !is_permutation(e.sigma)) {
            throw CorpusError(line, "sigma", "not a permutation of 0..n");
        }
    }
    if (j.contains("nd")) {
        const auto& nd = j["nd"];
        if (!nd.is_array() || nd.size() != 4) {
            throw CorpusError(line, "nd", "expected four rationals [a, d, b, d']");
        }
        for (std::size_t i = 0; i < 4; ++i) {
            e.nd[i] = rational_field(nd[i], "nd", line);
        }
        if (e.nd[1] == 0) {
            throw CorpusError(line, "nd", "zero x-difference");
        }
    }
    if (j.contains("rank")) {
        if (!j["rank"].is_string()) {
            throw CorpusError(line, "rank", "expected a string");
        }
        e.rank = j["rank"].get<std::string>();
    }
    if (j.contains("rank_exact")) {
        if (!j["rank_exact"].is_boolean()) {
            throw CorpusError(line, "rank_exact", "expected a boolean");
        }
        e.rank_exact = j["rank_exact"].get<bool>();
    }
}

nlohmann::json parse_line(const std::string& text, std::size_t line)
{
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw CorpusError(line, "", std::string("malformed JSON: ") + e.what());
    }
}

bool is_blank(const std::string& s)
{
    return std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isspace(ch); });
}

std::ifstream open_or_throw(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return in;
}

struct Substitution {
    std::vector<Rational> xs, ys;
    std::vector<Rational> residuals;
    bool all_on = true;
};

Substitution substitute_points(const CorpusEntry& e, const Curve& c, std::span<const int> sigma)
{
    Substitution s;
    const auto& [a, d, b, dp] = e.nd;
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        const Rational x = a + static_cast<long>(i) * d;
        const Rational y = b + sigma[i] * dp;
        const Rational lhs = y * y + c.a1() * x * y + c.a3() * y;
        const Rational rhs = x * x * x + c.a2() * x * x + c.a4() * x + c.a6();
        s.xs.push_back(x);
        s.ys.push_back(y);
        s.residuals.push_back(lhs - rhs);
        s.all_on = s.all_on && lhs == rhs;
    }
    return s;
}

} // namespace

CorpusError::CorpusError(std::size_t line, const std::string& field, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + (field.empty() ? "" : ", field '" + field + "'") + ": " +
                         what),
      line_(line), field_(field)
{
}

CorpusEntry entry_from_json(const nlohmann::json& j, std::size_t line)
{
    CorpusEntry e;
    read_fields(e, j, line, true);
    return e;
}

ParsedCorpus parse_corpus(std::istream& in)
{
    ParsedCorpus out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (is_blank(text)) {
            continue;
        }
        out.entries.push_back(entry_from_json(parse_line(text, line), line));
    }
    if (out.entries.empty()) {
        out.warnings.push_back("corpus is empty");
    }
    std::set<int> ids;
    for (const auto& e : out.entries) {
        if (!ids.insert(e.id).second) {
            out.warnings.push_back("duplicate id " + std::to_string(e.id));
        }
    }
    return out;
}

ParsedCorpus parse_corpus(const std::filesystem::path& path)
{
    auto in = open_or_throw(path);
    return parse_corpus(in);
}

nlohmann::ordered_json entry_to_json(const CorpusEntry& e)
{
    nlohmann::ordered_json j;
    j["id"] = e.id;
    j["s1"] = to_string(e.s1);
    j["s2"] = to_string(e.s2);
    j["s4"] = to_string(e.s4);
    j["s6"] = to_string(e.s6);
    j["sigma"] = e.sigma;
    j["nd"] = nlohmann::ordered_json::array();
    for (const auto& v : e.nd) {
        j["nd"].push_back(to_string(v));
    }
    j["rank"] = e.rank;
    j["rank_exact"] = e.rank_exact;
    return j;
}

std::string serialize_corpus(const std::vector<CorpusEntry>& entries)
{
    std::string out;
    for (const auto& e : entries) {
        out += entry_to_json(e).dump();
        out += '\n';
    }
    return out;
}

std::vector<CorpusEntry> apply_overlay(std::vector<CorpusEntry> entries, std::istream& overlay)
{
    std::string text;
    std::size_t line = 0;
    while (std::getline(overlay, text)) {
        ++line;
        if (is_blank(text)) {
            continue;
        }
        const auto j = parse_line(text, line);
        if (!j.is_object() || !j.contains("id") || !j["id"].is_number_integer()) {
            throw CorpusError(line, "id", "overlay line needs an integer id");
        }
        const int id = j["id"].get<int>();
        auto it = std::find_if(entries.begin(), entries.end(), [id](const CorpusEntry& e) { return e.id == id; });
        if (it == entries.end()) {
            throw CorpusError(line, "id", "no entry with id " + std::to_string(id));
        }
        read_fields(*it, j, line, false);
    }
    return entries;
}

std::vector<CorpusEntry> apply_overlay(std::vector<CorpusEntry> entries, const std::filesystem::path& overlay)
{
    auto in = open_or_throw(overlay);
    return apply_overlay(std::move(entries), in);
}

const char* to_string(SigmaUsed s)
{
    switch (s) {
    case SigmaUsed::written:
        return "written";
    case SigmaUsed::inverse:
        return "inverse";
    case SigmaUsed::none:
        break;
    }
    return "none";
}

EntryReport verify_entry(const CorpusEntry& e, long prime_limit)
{
    EntryReport report;
    report.id = e.id;
    const Curve c = e.curve();
    report.completed_square = e.s2 * 4 == e.s1 * e.s1;

    const Permutation inverse = inverse_permutation(e.sigma);
    Substitution used = substitute_points(e, c, e.sigma);
    Permutation sigma = e.sigma;
    if (used.all_on) {
        report.sigma_used = SigmaUsed::written;
    } else if (auto alt = substitute_points(e, c, inverse); alt.all_on) {
        report.sigma_used = SigmaUsed::inverse;
        used = std::move(alt);
        sigma = inverse;
    }
    for (const auto& r : used.residuals) {
        report.on_curve.push_back(r == 0);
    }
    report.residuals = used.residuals;

    auto support = ap_check(used.xs);
    report.support_ap = support && support->diff != 0;
    std::vector<Rational> reordered(used.ys.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) {
        reordered[static_cast<std::size_t>(sigma[i])] = used.ys[i];
    }
    report.permuted_ap = ap_check(reordered).has_value();
    if (report.support_ap) {
        const auto shear = solve_shear(used.xs, used.ys, sigma);
        report.shear_free = shear && shear->r == 0 && shear->b == e.nd[2] && shear->d_prime == e.nd[3];
    }

    if (c.is_singular()) {
        report.error = "singular curve";
    } else {
        report.minimal_label = minimal_twist_short(c).label();
        try {
            report.torsion_bound = torsion_bound(c, prime_limit).bound;
        } catch (const std::domain_error& ex) {
            report.error = ex.what();
        }
    }
    report.pass = report.sigma_used != SigmaUsed::none && report.support_ap && report.permuted_ap &&
                  !c.is_singular();
    return report;
}

std::vector<EntryReport> verify_corpus(const std::vector<CorpusEntry>& entries, long prime_limit)
{
    std::vector<EntryReport> out(entries.size());
    parallel_for(entries.size(), [&](std::size_t i) { out[i] = verify_entry(entries[i], prime_limit); });
    return out;
}

nlohmann::json report_to_json(const EntryReport& r)
{
    nlohmann::json j;
    j["id"] = r.id;
    j["pass"] = r.pass;
    j["sigma_used"] = to_string(r.sigma_used);
    j["on_curve"] = r.on_curve;
    nlohmann::json residuals = nlohmann::json::array();
    for (const auto& v : r.residuals) {
        residuals.push_back(to_string(v));
    }
    j["residuals"] = residuals;
    j["support_ap"] = r.support_ap;
    j["permuted_ap"] = r.permuted_ap;
    j["completed_square"] = r.completed_square;
    j["shear_free"] = r.shear_free;
    j["torsion_bound"] = r.torsion_bound ? nlohmann::json(*r.torsion_bound) : nlohmann::json(nullptr);
    if (r.minimal_label) {
        j["minimal"] = {{"A", to_string(r.minimal_label->first)}, {"B", to_string(r.minimal_label->second)}};
    } else {
        j["minimal"] = nullptr;
    }
    if (!r.error.empty()) {
        j["error"] = r.error;
    }
    return j;
}

Dedupe dedupe_corpus(const std::vector<EntryReport>& reports)
{
    std::map<std::pair<Integer, Integer>, std::vector<int>> classes;
    Dedupe out;
    for (const auto& r : reports) {
        if (!r.pass || !r.minimal_label) {
            out.excluded.push_back(r.id);
            continue;
        }
        classes[*r.minimal_label].push_back(r.id);
    }
    for (auto& [label, ids] : classes) {
        std::sort(ids.begin(), ids.end());
        out.classes.push_back({label, std::move(ids)});
    }
    std::sort(out.excluded.begin(), out.excluded.end());
    return out;
}

Dedupe dedupe_corpus(const std::vector<CorpusEntry>& entries) { return dedupe_corpus(verify_corpus(entries)); }

nlohmann::json dedupe_to_json(const Dedupe& d)
{
    nlohmann::json classes = nlohmann::json::array();
    for (const auto& c : d.classes) {
        classes.push_back({{"A", to_string(c.label.first)}, {"B", to_string(c.label.second)}, {"ids", c.ids}});
    }
    return {{"class_count", d.classes.size()}, {"classes", classes}, {"excluded", d.excluded}};
}

} // namespace sapforge
