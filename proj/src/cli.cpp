#include "sapforge/cli.hpp"

#include "sapforge/bremner.hpp"
#include "sapforge/corpus.hpp"
#include "sapforge/curve.hpp"
#include "sapforge/detect.hpp"
#include "sapforge/rational.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace sapforge {

namespace {

/// Bad input from the command line or a file.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError(path + ": " + e.what());
    }
}

Curve read_curve(const std::string& path) { return curve_from_json(read_json_file(path)); }

std::vector<Rational> parse_rational_list(const std::string& csv)
{
    std::vector<Rational> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        out.push_back(parse_rational(item));
    }
    return out;
}

Permutation parse_permutation(const std::string& csv)
{
    Permutation out;
    for (const auto& q : parse_rational_list(csv)) {
        if (!is_integer(q) || !q.get_num().fits_sint_p()) {
            throw InputError("permutation entries must be small integers: " + csv);
        }
        out.push_back(static_cast<int>(q.get_num().get_si()));
    }
    if (!is_permutation(out)) {
        throw InputError("not a permutation of 0..n: " + csv);
    }
    return out;
}

void emit(std::ostream& out, const nlohmann::json& j, bool pretty)
{
    out << (pretty ? j.dump(2) : j.dump()) << '\n';
}

std::string join(const std::vector<Rational>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        s += (i ? ", " : "") + to_string(v[i]);
    }
    return s;
}

struct DetectArgs {
    std::string curve;
    std::string start, diff;
    int len = 0;
    int alg = 1;
    bool dedup = false;
    std::string ys;
};

int cmd_detect(const DetectArgs& a, bool pretty, std::ostream& out)
{
    const Curve c = read_curve(a.curve);
    const XAP xap(parse_rational(a.start), parse_rational(a.diff), a.len);
    DetectStats stats;
    std::vector<SAPWitness> witnesses;
    std::size_t vectors = 0;
    if (!a.ys.empty()) {
        const auto ys = parse_rational_list(a.ys);
        const auto xs = xap.support();
        if (ys.size() != xs.size()) {
            throw InputError("--ys needs " + std::to_string(xs.size()) + " values");
        }
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!contains(c, Point(xs[i], ys[i]))) {
                throw InputError("point (" + to_string(xs[i]) + ", " + to_string(ys[i]) + ") is not on the curve");
            }
        }
        c.require_nonsingular("detection");
        witnesses = a.alg == 1 ? detect_alg1_for(c, xap, ys, &stats) : detect_alg2_for(c, xap, ys, &stats);
        vectors = 1;
    } else {
        witnesses = a.alg == 1 ? detect_alg1(c, xap, &stats) : detect_alg2(c, xap, &stats);
        vectors = stats.y_vectors;
    }
    if (a.dedup) {
        witnesses = dedup_reversals(std::move(witnesses));
    }
    std::vector<std::vector<Rational>> distinct;
    for (const auto& w : witnesses) {
        if (std::find(distinct.begin(), distinct.end(), w.ys) == distinct.end()) {
            distinct.push_back(w.ys);
        }
    }

    if (pretty) {
        out << "support: " << join(xap.support()) << "\n";
        out << distinct.size() << " of " << vectors << " y-vectors admit a witness\n";
        for (const auto& w : witnesses) {
            std::vector<Rational> yp;
            for (const auto& p : w.points_after) {
                yp.push_back(p.y());
            }
            out << permutation_label(w.sigma) << "  ys = " << join(w.ys) << "  y' = " << join(yp)
                << "  r = " << to_string(w.r) << (w.degenerate() ? "  (degenerate)" : "") << "\n";
        }
        return 0;
    }
    nlohmann::json list = nlohmann::json::array();
    for (const auto& w : witnesses) {
        list.push_back(witness_to_json(w));
    }
    emit(out,
         {{"support", {{"a", to_string(xap.a)}, {"d", to_string(xap.d)}, {"n", xap.n}}},
          {"alg", a.alg},
          {"y_vectors", vectors},
          {"y_vectors_with_witnesses", distinct.size()},
          {"witnesses", list},
          {"stats",
           {{"progression_shortcuts", stats.progression_shortcuts},
            {"minors", stats.minors},
            {"planes_ordered", stats.planes_ordered},
            {"planes_unordered", stats.planes_unordered}}}},
         false);
    return 0;
}

int cmd_lift(const std::string& curve, const std::string& x, bool pretty, std::ostream& out)
{
    const Curve c = read_curve(curve);
    nlohmann::json ys = nlohmann::json::array();
    for (const auto& y : lift_x(c, parse_rational(x))) {
        ys.push_back(to_string(y));
    }
    emit(out, {{"x", to_string(parse_rational(x))}, {"ys", ys}}, pretty);
    return 0;
}

int cmd_search(int len, const std::string& sigma, const std::string& out_file, unsigned threads, bool pretty,
               std::ostream& out, std::ostream& err)
{
    SearchOptions opts;
    opts.n = len;
    opts.workers = threads;
    if (!sigma.empty()) {
        opts.only_sigma = parse_permutation(sigma);
    }
    const Census census = full_search(opts);

    nlohmann::json records = nlohmann::json::array();
    for (std::size_t i = 0; i < census.families.size(); ++i) {
        records.push_back(family_to_json(census.families[i], census.normalized[i]));
    }
    if (!out_file.empty()) {
        std::ofstream f(out_file);
        if (!f) {
            throw InputError("cannot write " + out_file);
        }
        for (const auto& r : records) {
            f << r.dump() << '\n';
        }
    }
    nlohmann::json dims = nlohmann::json::object();
    for (const auto& [dim, count] : census.stats.nullspace_dims) {
        dims[std::to_string(dim)] = count;
    }
    nlohmann::json summary{{"n", census.n},
                           {"arrangements", census.stats.arrangements},
                           {"arrangements_with_solutions", census.stats.arrangements_with_solutions},
                           {"families", census.families.size()},
                           {"sign_cases", census.sign_case_count()},
                           {"classes", census.classes.size()},
                           {"nondegenerate_lines", census.stats.nondegenerate_lines},
                           {"nullspace_dims", dims}};
    if (opts.only_sigma) {
        summary["records"] = records;
    }
    err << census.families.size() << " families\n";
    if (pretty) {
        out << census.families.size() << " families over " << census.stats.arrangements << " arrangements, "
            << census.sign_case_count() << " signed cases, " << census.classes.size() << " isomorphism classes\n";
        for (std::size_t i = 0; i < census.families.size(); ++i) {
            const auto& f = census.families[i];
            out << permutation_label(f.sigma) << "  y = " << join(f.y) << "  A = " << to_string(census.normalized[i].A)
                << "  B = " << to_string(census.normalized[i].B) << "\n";
        }
        return 0;
    }
    emit(out, summary, false);
    return 0;
}

std::vector<CorpusEntry> load_corpus(const std::string& file, const std::string& overlay, std::ostream& err)
{
    auto parsed = parse_corpus(std::filesystem::path(file));
    for (const auto& w : parsed.warnings) {
        err << "warning: " << w << "\n";
    }
    if (!overlay.empty()) {
        return apply_overlay(std::move(parsed.entries), std::filesystem::path(overlay));
    }
    return parsed.entries;
}

int cmd_verify(const std::string& file, const std::string& overlay, const std::string& report_file, long plimit,
               bool pretty, std::ostream& out, std::ostream& err)
{
    const auto entries = load_corpus(file, overlay, err);
    const auto reports = verify_corpus(entries, plimit);
    nlohmann::json list = nlohmann::json::array();
    std::vector<int> failed;
    for (const auto& r : reports) {
        list.push_back(report_to_json(r));
        if (!r.pass) {
            failed.push_back(r.id);
        }
    }
    nlohmann::json full{{"entries", reports.size()},
                        {"passed", reports.size() - failed.size()},
                        {"failed", failed},
                        {"reports", list}};
    if (!report_file.empty()) {
        std::ofstream f(report_file);
        if (!f) {
            throw InputError("cannot write " + report_file);
        }
        f << full.dump(2) << '\n';
    }
    if (pretty) {
        for (const auto& r : reports) {
            out << (r.pass ? "pass " : "FAIL ") << r.id << "  sigma " << to_string(r.sigma_used) << "  torsion "
                << (r.torsion_bound ? std::to_string(*r.torsion_bound) : "-") << "\n";
            if (!r.pass) {
                for (std::size_t i = 0; i < r.residuals.size(); ++i) {
                    if (r.residuals[i] != 0) {
                        out << "    point " << i << " misses by " << to_string(r.residuals[i]) << "\n";
                    }
                }
            }
        }
        out << reports.size() - failed.size() << " of " << reports.size() << " entries pass\n";
    } else if (report_file.empty()) {
        emit(out, full, false);
    } else {
        full.erase("reports");
        emit(out, full, false);
    }
    return failed.empty() ? 0 : 1;
}

int cmd_dedupe(const std::string& file, const std::string& overlay, bool pretty, std::ostream& out,
               std::ostream& err)
{
    const Dedupe d = dedupe_corpus(load_corpus(file, overlay, err));
    if (pretty) {
        for (const auto& c : d.classes) {
            out << "(" << to_string(c.label.first) << ", " << to_string(c.label.second) << "):";
            for (int id : c.ids) {
                out << " " << id;
            }
            out << "\n";
        }
        out << d.classes.size() << " classes";
        if (!d.excluded.empty()) {
            out << ", " << d.excluded.size() << " failing entries excluded";
        }
        out << "\n";
    } else {
        emit(out, dedupe_to_json(d), false);
    }
    return d.excluded.empty() ? 0 : 1;
}

int cmd_param_check(bool pretty, std::ostream& out)
{
    const IdentityReport ids = verify_identities(bremner_polys());
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : ids.checks) {
        checks.push_back({{"i", c.index}, {"holds", c.holds}});
    }
    nlohmann::json ext = nlohmann::json::object();
    for (int k = 4; k <= 6; ++k) {
        nlohmann::json row = nlohmann::json::array();
        for (const auto& v : ext_square(k)) {
            row.push_back(v.get_si());
        }
        ext[std::to_string(k)] = row;
    }

    const Permutation sigma{1, 2, 0, 3, 4, 5};
    const SigmaSystem sys = sigma_forms(sigma);
    const SigmaSolutions sols = solve_sigma(sys);
    nlohmann::json example = nullptr;
    bool example_ok = false;
    for (const auto& comp : sols.components) {
        if (!comp.degenerate && comp.projective_dimension() == 0) {
            const CurveFamily f = family_from_point(sys, comp.basis[0]);
            const NormalizedFamily norm = normalize_family(f);
            example = family_to_json(f, norm);
            example["normalized_curve"] = curve_to_json(norm.curve);
            nlohmann::json pts = nlohmann::json::array();
            for (const auto& p : norm.points) {
                pts.push_back(point_to_json(p));
            }
            example["normalized_points"] = pts;
            example_ok = true;
        }
    }
    const bool ok = ids.all_pass() && example_ok;
    emit(out, {{"identities", checks}, {"ext_square", ext}, {"example", example}, {"ok", ok}}, pretty);
    return ok ? 0 : 1;
}

int cmd_torsion(const std::string& curve, long plimit, bool pretty, std::ostream& out)
{
    const TorsionBound t = torsion_bound(read_curve(curve), plimit);
    emit(out, {{"bound", t.bound}, {"primes_used", t.primes_used}}, pretty);
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Simultaneous arithmetic progressions on elliptic curves over Q", "sapforge"};
    app.require_subcommand(1);
    app.fallthrough();
    bool pretty = false;
    app.add_flag("--pretty", pretty, "human-readable tables instead of JSON");

    DetectArgs det;
    auto* detect = app.add_subcommand("detect", "find s.a.p. witnesses over an x-progression");
    detect->add_option("--curve", det.curve, "curve JSON file")->required();
    detect->add_option("--start", det.start, "first x")->required();
    detect->add_option("--diff", det.diff, "x difference")->required();
    detect->add_option("--len", det.len, "last index n (points P_0..P_n)")->required()->check(CLI::PositiveNumber);
    detect->add_option("--alg", det.alg, "1: rank test, 2: coplanarity")->check(CLI::IsMember({1, 2}));
    detect->add_option("--ys", det.ys, "fix the y-vector (comma separated)");
    detect->add_flag("--dedup", det.dedup, "keep one of each reversed pair");

    std::string lift_curve, lift_xv;
    auto* lift = app.add_subcommand("lift", "rational points above an x-coordinate");
    lift->add_option("--curve", lift_curve, "curve JSON file")->required();
    lift->add_option("--x", lift_xv, "x-coordinate")->required();

    int search_len = 6;
    std::string search_sigma, search_out;
    unsigned threads = 0;
    auto* search = app.add_subcommand("search", "exhaustive search for length 6 or 7");
    search->add_option("--len", search_len, "number of points")->required()->check(CLI::IsMember({6, 7}));
    search->add_option("--sigma", search_sigma, "single arrangement (comma separated)");
    search->add_option("--out", search_out, "census JSONL output");
    search->add_option("--threads", threads, "worker threads (default: all)");

    std::string vfile, voverlay, vreport;
    long vplimit = 100;
    auto* verify = app.add_subcommand("verify-corpus", "verify every corpus entry by substitution");
    verify->add_option("--file", vfile, "corpus JSONL")->required();
    verify->add_option("--overlay", voverlay, "corrections JSONL");
    verify->add_option("--report", vreport, "write the full report here");
    verify->add_option("--plimit", vplimit, "prime limit for the torsion bound");

    std::string dfile, doverlay;
    auto* dedupe = app.add_subcommand("dedupe", "isomorphism classes of the passing entries");
    dedupe->add_option("--file", dfile, "corpus JSONL")->required();
    dedupe->add_option("--overlay", doverlay, "corrections JSONL");

    auto* param = app.add_subcommand("param-check", "check the four-point parametrization identities");

    std::string tcurve;
    long tplimit = 100;
    auto* torsion = app.add_subcommand("torsion", "torsion bound by point counts mod p");
    torsion->add_option("--curve", tcurve, "curve JSON file")->required();
    torsion->add_option("--plimit", tplimit, "prime limit")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    try {
        if (*detect) return cmd_detect(det, pretty, out);
        if (*lift) return cmd_lift(lift_curve, lift_xv, pretty, out);
        if (*search) return cmd_search(search_len, search_sigma, search_out, threads, pretty, out, err);
        if (*verify) return cmd_verify(vfile, voverlay, vreport, vplimit, pretty, out, err);
        if (*dedupe) return cmd_dedupe(dfile, doverlay, pretty, out, err);
        if (*param) return cmd_param_check(pretty, out);
        if (*torsion) return cmd_torsion(tcurve, tplimit, pretty, out);
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const CorpusError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace sapforge
