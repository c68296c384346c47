#pragma once

// The bundled table of length-6 s.a.p. curves: parsing, verification by
// substitution, and partition into isomorphism classes.

#include "sapforge/curve.hpp"
#include "sapforge/detect.hpp"
#include "sapforge/rational.hpp"

#include "json.hpp"

#include <array>
#include <filesystem>
#include <istream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sapforge {

/// Y^2 + s1 XY = X^3 - s2 X^2 - s4 X - s6, with the six points
/// x_i = a + i d, y_i = b + sigma(i) d' where nd = [a, d, b, d'].
struct CorpusEntry {
    int id = 0;
    Rational s1, s2, s4, s6;
    Permutation sigma;
    std::array<Rational, 4> nd;
    std::string rank;
    bool rank_exact = false;

    Curve curve() const { return Curve(s1, -s2, 0, -s4, -s6); }

    friend bool operator==(const CorpusEntry&, const CorpusEntry&) = default;
};

class CorpusError : public std::runtime_error {
public:
    CorpusError(std::size_t line, const std::string& field, const std::string& what);

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

struct ParsedCorpus {
    std::vector<CorpusEntry> entries;
    std::vector<std::string> warnings;
};

/// One JSON object per line; blank lines are skipped. Throws CorpusError
/// naming the 1-based line and the offending field.
ParsedCorpus parse_corpus(std::istream& in);
ParsedCorpus parse_corpus(const std::filesystem::path& path);

CorpusEntry entry_from_json(const nlohmann::json& j, std::size_t line = 0);
/// Keys in file order; dump() reproduces a canonical input line exactly.
nlohmann::ordered_json entry_to_json(const CorpusEntry& e);
std::string serialize_corpus(const std::vector<CorpusEntry>& entries);

/// Overlay lines carry an "id" plus the fields to replace. Throws CorpusError
/// for unknown ids or fields.
std::vector<CorpusEntry> apply_overlay(std::vector<CorpusEntry> entries, std::istream& overlay);
std::vector<CorpusEntry> apply_overlay(std::vector<CorpusEntry> entries, const std::filesystem::path& overlay);

enum class SigmaUsed { written, inverse, none };

const char* to_string(SigmaUsed s);

struct EntryReport {
    int id = 0;
    SigmaUsed sigma_used = SigmaUsed::none;
    /// Per point, for the sigma that matched (the written one when neither did).
    std::vector<bool> on_curve;
    /// lhs - rhs of the curve equation at each point, same sigma.
    std::vector<Rational> residuals;
    bool support_ap = false;
    bool permuted_ap = false;
    /// s2 = (s1/2)^2: the quadratic term comes from a shear of a short model.
    bool completed_square = false;
    /// The points also pass solve_shear with r = 0.
    bool shear_free = false;
    std::optional<long> torsion_bound;
    std::optional<std::pair<Integer, Integer>> minimal_label;
    std::string error;
    bool pass = false;
};

EntryReport verify_entry(const CorpusEntry& e, long prime_limit = 100);

/// Deterministic by input order.
std::vector<EntryReport> verify_corpus(const std::vector<CorpusEntry>& entries, long prime_limit = 100);

nlohmann::json report_to_json(const EntryReport& r);

struct CorpusClass {
    std::pair<Integer, Integer> label;
    std::vector<int> ids;
};

struct Dedupe {
    std::vector<CorpusClass> classes; ///< sorted by label
    std::vector<int> excluded;        ///< failing entries
};

Dedupe dedupe_corpus(const std::vector<EntryReport>& reports);
Dedupe dedupe_corpus(const std::vector<CorpusEntry>& entries);

nlohmann::json dedupe_to_json(const Dedupe& d);

} // namespace sapforge
