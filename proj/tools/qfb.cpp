// qfb: zeros, evaluation, coefficients and convergence diagnostics for
// q-Fourier-Bessel series on the q-linear grid.
//
// Exit codes: 0 ok, 1 usage or invalid parameters, 2 numerical failure
// (out of regime, zero not found, no convergence), 3 input file parse
// error, 4 verify found a residual above tolerance.

#include "qfb/qfb.hpp"
#include "qfb/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using qfb::mp_real;
using json = nlohmann::ordered_json;

enum exit_code { ok = 0, usage = 1, numeric_failure = 2, parse_failure = 3, verify_failure = 4 };

struct usage_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Options
// ---------------------------------------------------------------------------

struct options {
    std::string q = "0.5";
    std::string nu = "1";
    std::optional<std::string> mu;
    int kmax = 10;
    std::optional<std::string> k_range;
    long ngrid = 32;
    std::size_t depth = 256;
    double tol = 1e-30;
    std::string format;  // empty: json for verify, csv otherwise
    std::optional<std::string> cache;
    bool no_cache = false;
    std::uint64_t seed = 1;
    unsigned precision = 0;

    std::string f = "power-nu";
    std::optional<std::string> values;
    std::vector<std::string> families;
    std::vector<std::string> xs;
    std::optional<int> pn;
};

std::pair<int, int> parse_k_range(const std::string& s) {
    const auto dots = s.find("..");
    try {
        if (dots == std::string::npos) {
            const int k = std::stoi(s);
            return {k, k};
        }
        return {std::stoi(s.substr(0, dots)), std::stoi(s.substr(dots + 2))};
    } catch (const std::exception&) {
        throw usage_error("--k expects N or A..B, got '" + s + "'");
    }
}

double parse_double(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw usage_error(std::string(what) + " is not a number: '" + s + "'");
    }
}

/// Checked parameters plus the working precision they imply.
struct run {
    double q;
    double nu;
    int k_lo = 1;
    int k_hi;
    unsigned bits;
};

run validate(const options& o, int k_needed) {
    run r{};
    r.q = parse_double(o.q, "--q");
    r.nu = parse_double(o.nu, "--nu");
    if (!(r.q > 0 && r.q < 1)) throw usage_error("--q must lie in (0,1)");
    if (!(r.nu > -1)) throw usage_error("--nu must exceed -1");
    const double mu = o.mu ? parse_double(*o.mu, "--mu") : r.nu;
    if (!(o.tol > 0)) throw usage_error("--tol must be positive");
    if (o.depth < 8) throw usage_error("--depth must be at least 8");
    if (o.ngrid < 0 || o.ngrid > static_cast<long>(o.depth) - 1) throw usage_error("--ngrid must lie in 0..depth-1");
    if (!o.format.empty() && o.format != "csv" && o.format != "json")
        throw usage_error("--format must be csv or json");
    if (o.kmax < 1) throw usage_error("--kmax must be at least 1");
    r.k_hi = std::max(o.kmax, k_needed);
    if (o.k_range) {
        auto [a, b] = parse_k_range(*o.k_range);
        if (a < 1 || b < a) throw usage_error("--k range must satisfy 1 <= A <= B");
        r.k_lo = a;
        r.k_hi = b;
    }
    r.bits = o.precision ? o.precision : qfb::required_precision_bits(r.q, std::max(r.nu, mu), r.k_hi);
    return r;
}

qfb::basic_context<mp_real> make_context(const options& o) {
    return {qfb::from_string<mp_real>(o.q), qfb::from_string<mp_real>(o.nu), mp_real(o.tol), 100000, o.depth};
}

// ---------------------------------------------------------------------------
// Tables: CSV or JSON, numbers outside the binary64 range as strings
// ---------------------------------------------------------------------------

struct cell {
    json j;
    std::string text;
};

cell num(const mp_real& x) {
    if (boost::multiprecision::isnan(x)) return {json(nullptr), "nan"};
    const std::string s = qfb::format_real(x);
    if (qfb::fits_double(x)) return {json(qfb::to_double(x)), s};
    return {json(s), s};
}
cell num(double x) {
    if (std::isnan(x)) return {json(nullptr), "nan"};
    if (std::isinf(x)) return {json(qfb::format_double(x)), qfb::format_double(x)};
    return {json(x), qfb::format_double(x)};
}
cell integer(long long v) { return {json(v), std::to_string(v)}; }
cell boolean(bool b) { return {json(b), b ? "true" : "false"}; }
cell text(const std::string& s) { return {json(s), s}; }
cell empty() { return {json(nullptr), ""}; }

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

struct table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<cell>> rows;

    json to_json() const {
        json a = json::array();
        for (const auto& r : rows) {
            json o = json::object();
            for (std::size_t i = 0; i < columns.size(); ++i) o[columns[i]] = r[i].j;
            a.push_back(std::move(o));
        }
        return a;
    }
    void write_csv(std::ostream& out) const {
        for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
        out << '\n';
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(r[i].text);
            out << '\n';
        }
    }
};

/// A command's output: header fields, tables, and summary fields.
struct report {
    std::vector<std::pair<std::string, cell>> meta;
    std::vector<table> tables;
    std::vector<std::pair<std::string, cell>> summary;
    std::vector<std::string> warnings;

    void emit(const std::string& format, std::ostream& out, const char* fallback = "csv") const {
        if ((format.empty() ? std::string(fallback) : format) == "json") {
            json doc = json::object();
            for (const auto& [k, v] : meta) doc[k] = v.j;
            for (const auto& t : tables) doc[t.name] = t.to_json();
            for (const auto& [k, v] : summary) doc[k] = v.j;
            if (!warnings.empty()) doc["warnings"] = warnings;
            out << doc.dump(2) << '\n';
            return;
        }
        for (const auto& [k, v] : meta) out << "# " << k << '=' << v.text << '\n';
        for (std::size_t i = 0; i < tables.size(); ++i) {
            if (tables.size() > 1) out << (i ? "\n" : "") << "# " << tables[i].name << '\n';
            tables[i].write_csv(out);
        }
        for (const auto& [k, v] : summary) out << "# " << k << '=' << v.text << '\n';
        for (const auto& w : warnings) out << "# warning: " << w << '\n';
    }
};

report base_report(const char* command, const options& o, const run& r) {
    report rep;
    rep.meta.emplace_back("command", text(command));
    rep.meta.emplace_back("q", text(o.q));
    rep.meta.emplace_back("nu", text(o.nu));
    if (o.mu) rep.meta.emplace_back("mu", text(*o.mu));
    rep.meta.emplace_back("precision_bits", integer(r.bits));
    rep.meta.emplace_back("seed", integer(static_cast<long long>(o.seed)));
    return rep;
}

// ---------------------------------------------------------------------------
// Shared pieces
// ---------------------------------------------------------------------------

constexpr double condition_warning = 1e12;

std::vector<qfb::bessel_zero<mp_real>> load_zeros(const options& o, const run& r,
                                                  const qfb::basic_context<mp_real>& ctx, int k_max) {
    qfb::zero_finder<mp_real> zf(ctx);
    std::unique_ptr<qfb::zero_cache> cache;
    if (!o.no_cache) cache = std::make_unique<qfb::zero_cache>(qfb::resolve_cache_dir(o.cache), r.q, r.nu);
    std::string warning;
    std::vector<qfb::bessel_zero<mp_real>> zs;
    try {
        zs = qfb::zeros_with_cache(zf, k_max, cache.get(), nullptr, &warning);
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "qfb: warning: zero cache unavailable (" << e.what() << ")\n";
        zs = qfb::zeros_with_cache<mp_real>(zf, k_max, nullptr);
    } catch (const std::runtime_error& e) {
        if (dynamic_cast<const qfb::convergence_error*>(&e)) throw;
        std::cerr << "qfb: warning: " << e.what() << '\n';
        zs = qfb::zeros_with_cache<mp_real>(zf, k_max, nullptr);
    }
    if (!warning.empty()) std::cerr << "qfb: warning: " << warning << '\n';
    return zs;
}

/// The target as grid samples, and its closed form when there is one.
struct target {
    qfb::grid_function<mp_real> grid;
    std::optional<qfb::closed_form_expansion<mp_real>> closed;
    std::string name;
};

target make_target(const options& o, const qfb::basic_context<mp_real>& ctx) {
    if (o.values) {
        std::ifstream in(*o.values);
        if (!in) throw qfb::format_error("cannot open values file '" + *o.values + "'");
        return {qfb::read_grid_values(in, ctx.q), std::nullopt, "values:" + *o.values};
    }
    if (o.f == "power-nu") {
        auto ex = qfb::closed_form_expansion<mp_real>::power(ctx.nu);
        return {ex.grid(ctx, ctx.depth), ex, ex.name()};
    }
    if (o.f == "g-nu-mu") {
        if (!o.mu) throw usage_error("--f g-nu-mu needs --mu");
        auto ex = qfb::closed_form_expansion<mp_real>::g(ctx.nu, qfb::from_string<mp_real>(*o.mu));
        return {ex.grid(ctx, ctx.depth), ex, ex.name()};
    }
    throw usage_error("--f must be power-nu or g-nu-mu");
}

table coefficient_table(const qfb::fourier_bessel_system<mp_real>& S, const target& t,
                        const std::vector<qfb::fourier_coefficient<mp_real>>& coeffs) {
    table tab{"coefficients", {"k", "zero", "eta", "a_numeric", "a_closed_form", "relative_difference"}, {}};
    for (const auto& c : coeffs) {
        std::vector<cell> row{integer(c.k), num(S.zero(c.k).value), num(c.eta), num(c.value)};
        if (t.closed) {
            const mp_real a = t.closed->coefficient(S, c.k);
            row.push_back(num(a));
            row.push_back(num(qfb::relative_difference(c.value, a)));
        } else {
            row.push_back(empty());
            row.push_back(empty());
        }
        tab.rows.push_back(std::move(row));
    }
    return tab;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_zeros(const options& o) {
    const run r = validate(o, 0);
    qfb::working_precision wp(r.bits);
    const auto ctx = make_context(o);
    const auto zs = load_zeros(o, r, ctx, r.k_hi);
    report rep = base_report("zeros", o, r);
    table tab{"zeros", {"k", "value", "eps", "alpha", "certified"}, {}};
    for (const auto& z : zs) {
        if (z.k < r.k_lo) continue;
        tab.rows.push_back({integer(z.k), num(z.value), num(z.eps), num(z.alpha), boolean(z.certified)});
    }
    rep.tables.push_back(std::move(tab));
    rep.emit(o.format, std::cout);
    return ok;
}

int cmd_eval(const options& o) {
    const run r = validate(o, 0);
    if (o.xs.empty()) throw usage_error("eval needs at least one --x");
    if (o.pn && *o.pn < 0) throw usage_error("--pn must be non-negative");
    qfb::working_precision wp(r.bits);
    const auto ctx = make_context(o);
    const qfb::hahn_exton<mp_real> J(ctx);
    std::optional<qfb::poly_p<mp_real>> P;
    if (o.pn) P = qfb::poly_p_by_recurrence(ctx, *o.pn);

    report rep = base_report("eval", o, r);
    table tab{"values", {"x", "J", "J_prime", "error_bound", "condition"}, {}};
    if (P) tab.columns.push_back("P_n(x^2)");
    for (const auto& xs : o.xs) {
        parse_double(xs, "--x");
        const mp_real x = qfb::from_string<mp_real>(xs);
        if (x < 0) throw usage_error("--x must be non-negative");
        const auto v = J.value(x);
        const auto d = J.derivative(x);
        const mp_real cond = v.condition();
        if (cond > condition_warning)
            std::cerr << "qfb: warning: condition estimate " << qfb::format_real(cond) << " at x=" << xs << '\n';
        std::vector<cell> row{text(xs), num(v.value), num(d.value), num(v.error_bound()), num(cond)};
        if (P) row.push_back(num(qfb::horner(P->coeffs, mp_real(x * x)).value));
        tab.rows.push_back(std::move(row));
    }
    rep.tables.push_back(std::move(tab));
    if (P) rep.meta.emplace_back("n", integer(*o.pn));
    rep.emit(o.format, std::cout);
    return ok;
}

int cmd_coeffs(const options& o, bool with_points) {
    const run r = validate(o, 0);
    qfb::working_precision wp(r.bits);
    const auto ctx = make_context(o);
    const target t = make_target(o, ctx);
    const qfb::fourier_bessel_system<mp_real> S(ctx, load_zeros(o, r, ctx, r.k_hi));
    const auto coeffs = qfb::compute_coefficients(S, t.grid, r.k_hi);

    report rep = base_report(with_points ? "expand" : "coeffs", o, r);
    rep.meta.emplace_back("f", text(t.name));
    rep.meta.emplace_back("kmax", integer(r.k_hi));
    rep.tables.push_back(coefficient_table(S, t, coeffs));
    if (with_points) {
        table pts{"points", {"n", "x", "f", "partial_sum", "error"}, {}};
        const long last = std::min<long>(o.ngrid, static_cast<long>(t.grid.depth()));
        mp_real sup(0);
        for (long n = 0; n <= last; ++n) {
            const mp_real s = qfb::partial_sum_at_node(S, coeffs, n);
            const mp_real e = abs(t.grid.at(n) - s);
            sup = std::max(sup, e);
            pts.rows.push_back({integer(n), num(mp_real(qfb::ipow(ctx.q, n))), num(t.grid.at(n)), num(s), num(e)});
        }
        rep.tables.push_back(std::move(pts));
        rep.summary.emplace_back("sup_error", num(sup));
    }
    rep.emit(o.format, std::cout);
    return ok;
}

int cmd_converge(const options& o) {
    const run r = validate(o, 0);
    qfb::working_precision wp(r.bits);
    const auto ctx = make_context(o);
    const target t = make_target(o, ctx);
    const qfb::fourier_bessel_system<mp_real> S(ctx, load_zeros(o, r, ctx, r.k_hi));
    const auto cr = qfb::make_convergence_report(S, t.grid, r.k_hi, o.ngrid);

    report rep = base_report("converge", o, r);
    rep.meta.emplace_back("f", text(t.name));
    rep.meta.emplace_back("ngrid", integer(o.ngrid));
    table tab{"partial_sums", {"K", "sup_error", "term_sup"}, {}};
    for (std::size_t i = 0; i < cr.partial_sum_depths.size(); ++i)
        tab.rows.push_back({integer(cr.partial_sum_depths[i]), num(cr.sup_errors[i]), num(cr.term_sup[i])});
    rep.tables.push_back(std::move(tab));
    rep.summary.emplace_back("error_rate", num(cr.error_rate));
    rep.summary.emplace_back("term_rate", num(cr.term_rate));
    rep.summary.emplace_back("holder_order", num(cr.holder_order));
    rep.summary.emplace_back("sup_errors_monotone", boolean(cr.sup_errors_monotone));
    rep.summary.emplace_back("limit_finite", boolean(cr.limit_finite));
    rep.summary.emplace_back("weighted_l2_finite", boolean(cr.weighted_l2_finite));
    rep.warnings = cr.warnings;
    for (const auto& w : cr.warnings) std::cerr << "qfb: warning: " << w << '\n';
    rep.emit(o.format, std::cout);
    return ok;
}

int cmd_verify(const options& o) {
    const run r = validate(o, 0);
    std::vector<std::string> families = o.families;
    if (families.empty()) families = qfb::verify_family_names();
    for (const auto& f : families)
        if (std::find(qfb::verify_family_names().begin(), qfb::verify_family_names().end(), f) ==
            qfb::verify_family_names().end())
            throw usage_error("unknown family '" + f + "'");

    qfb::working_precision wp(r.bits);
    const auto ctx = make_context(o);
    qfb::verify_config<mp_real> cfg{ctx, r.k_hi, o.seed, std::nullopt};
    if (o.mu) cfg.mu = qfb::from_string<mp_real>(*o.mu);
    const qfb::verifier<mp_real> v(cfg, load_zeros(o, r, ctx, r.k_hi));

    report rep = base_report("verify", o, r);
    rep.meta.emplace_back("kmax", integer(r.k_hi));
    table tab{"families", {"family", "max_residual", "tolerance", "cases", "pass", "note"}, {}};
    bool all = true;
    for (const auto& f : families) {
        qfb::family_result fr;
        try {
            fr = v.run(f);
        } catch (const std::exception& e) {
            fr.name = f;
            fr.max_residual = std::numeric_limits<double>::infinity();
            fr.note = std::string("error: ") + e.what();
        }
        all = all && fr.pass();
        tab.rows.push_back({text(fr.name), num(fr.max_residual), num(fr.tolerance),
                            integer(static_cast<long long>(fr.cases)), boolean(fr.pass()), text(fr.note)});
    }
    rep.tables.push_back(std::move(tab));
    rep.summary.emplace_back("pass", boolean(all));
    rep.emit(o.format, std::cout, "json");
    return all ? ok : verify_failure;
}

constexpr int series_kmax = 40;

void add_common(CLI::App* sub, options& o, bool series = false) {
    sub->add_option("--q", o.q, "Base q in (0,1)")->capture_default_str();
    sub->add_option("--nu", o.nu, "Order nu > -1")->capture_default_str();
    sub->add_option("--mu", o.mu, "Second order for g-nu-mu");
    if (series)
        sub->add_option("--kmax", o.kmax, "Number of terms [" + std::to_string(series_kmax) + "]");
    else
        sub->add_option("--kmax", o.kmax, "Number of zeros / terms")->capture_default_str();
    sub->add_option("--ngrid", o.ngrid, "Grid points n = 0..ngrid in error reports")->capture_default_str();
    sub->add_option("--depth", o.depth, "Grid depth for q-integrals")->capture_default_str();
    sub->add_option("--tol", o.tol, "Series truncation tolerance")->capture_default_str();
    sub->add_option("--format", o.format, "csv or json (verify defaults to json)");
    sub->add_option("--cache", o.cache, "Zero cache directory (overrides QBF_CACHE_DIR)");
    sub->add_flag("--no-cache", o.no_cache, "Do not read or write the zero cache");
    sub->add_option("--seed", o.seed, "Seed for random test sequences")->capture_default_str();
    sub->add_option("--precision", o.precision, "Working precision in bits (default: derived from q, nu, kmax)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"q-Fourier-Bessel series on the q-linear grid"};
    app.require_subcommand(1);
    options o;

    auto* zeros = app.add_subcommand("zeros", "Positive zeros j_k with eps_k, alpha_k and certification");
    add_common(zeros, o);
    zeros->add_option("--k", o.k_range, "Index range A..B (default 1..kmax)");

    auto* eval = app.add_subcommand("eval", "Evaluate J_nu(x;q^2), its derivative and optionally P_n(x^2)");
    add_common(eval, o);
    eval->add_option("--x", o.xs, "Evaluation points")->required();
    eval->add_option("--pn", o.pn, "Also evaluate P_n at x^2");

    auto* coeffs = app.add_subcommand("coeffs", "Fourier-Bessel coefficients of a target");
    auto* expand = app.add_subcommand("expand", "Coefficients and partial-sum errors on the grid");
    auto* converge = app.add_subcommand("converge", "Convergence diagnostics of partial sums");
    for (auto* sub : {coeffs, expand, converge}) {
        add_common(sub, o, true);
        sub->add_option("--f", o.f, "Target: power-nu or g-nu-mu")->capture_default_str();
        sub->add_option("--values", o.values, "CSV file with header n,f of grid samples f(q^n)");
    }

    auto* verify = app.add_subcommand("verify", "Run identity families and report max residuals");
    add_common(verify, o);
    verify->add_option("--family", o.families, "Families to run (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage;
    }

    for (auto* sub : {coeffs, expand, converge})
        if (*sub && sub->count("--kmax") == 0) o.kmax = series_kmax;

    try {
        if (*zeros) return cmd_zeros(o);
        if (*eval) return cmd_eval(o);
        if (*coeffs) return cmd_coeffs(o, false);
        if (*expand) return cmd_coeffs(o, true);
        if (*converge) return cmd_converge(o);
        if (*verify) return cmd_verify(o);
    } catch (const usage_error& e) {
        std::cerr << "qfb: " << e.what() << '\n';
        return usage;
    } catch (const qfb::format_error& e) {
        std::cerr << "qfb: " << e.what() << '\n';
        return parse_failure;
    } catch (const qfb::out_of_regime& e) {
        std::cerr << "qfb: out of regime: " << e.what() << '\n';
        return numeric_failure;
    } catch (const std::invalid_argument& e) {
        std::cerr << "qfb: " << e.what() << '\n';
        return usage;
    } catch (const std::exception& e) {
        std::cerr << "qfb: " << e.what() << '\n';
        return numeric_failure;
    }
    return usage;
}
