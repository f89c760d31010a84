#pragma once

// Text formats: the zero cache and user-supplied grid samples.
//
// Zero cache (one file per (q, nu)):
//   #qbf-zeros v1 q=0.500000000000 nu=1.000000000000
//   k<TAB>value<TAB>eps<TAB>alpha<TAB>certified
// value and alpha carry 17 significant digits, eps carries the canonical
// digit count (the zero is rebuilt from it), certified is 0 or 1.
//
// Grid samples (CSV):
//   n,f
//   -1,<f(1/q)>     optional
//   0,<f(1)>
//   ...
//   inf,<f(0+)>     optional

#include "numeric.hpp"
#include "qcore.hpp"
#include "zeros.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qfb {

class format_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fixed12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", v);
    return buf;
}

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Zero cache
// ---------------------------------------------------------------------------

struct cache_record {
    int k = 0;
    std::string value;
    std::string eps;
    std::string alpha;
    bool certified = false;
};

inline std::string zero_cache_header(double q, double nu) {
    return "#qbf-zeros v1 q=" + detail::fixed12(q) + " nu=" + detail::fixed12(nu);
}

inline std::string zero_cache_filename(double q, double nu) {
    return "zeros_q" + detail::fixed12(q) + "_nu" + detail::fixed12(nu) + ".tsv";
}

/// Cache directory: explicit flag, else $QBF_CACHE_DIR, else
/// $XDG_CACHE_HOME/qfb, else $HOME/.cache/qfb, else ./.qfb-cache.
inline std::filesystem::path resolve_cache_dir(const std::optional<std::string>& flag) {
    if (flag && !flag->empty()) return *flag;
    if (const char* env = std::getenv("QBF_CACHE_DIR"); env && *env) return env;
    if (const char* xdg = std::getenv("XDG_CACHE_HOME"); xdg && *xdg)
        return std::filesystem::path(xdg) / "qfb";
    if (const char* home = std::getenv("HOME"); home && *home)
        return std::filesystem::path(home) / ".cache" / "qfb";
    return ".qfb-cache";
}

template <class Real>
cache_record to_record(const bessel_zero<Real>& z) {
    cache_record r;
    r.k = z.k;
    r.value = to_decimal(z.value, 17);
    r.eps = to_decimal(z.eps, canonical_eps_digits);
    r.alpha = (z.alpha == z.alpha) ? to_decimal(z.alpha, 17) : "nan";
    r.certified = z.certified;
    return r;
}

inline void write_zero_cache(std::ostream& out, double q, double nu, const std::vector<cache_record>& rows) {
    out << zero_cache_header(q, nu) << '\n';
    for (const auto& r : rows)
        out << r.k << '\t' << r.value << '\t' << r.eps << '\t' << r.alpha << '\t' << (r.certified ? 1 : 0)
            << '\n';
}

/// Parses a cache stream. Rows must be k = 1, 2, ... in order.
inline std::vector<cache_record> read_zero_cache(std::istream& in, double q, double nu) {
    std::string line;
    if (!std::getline(in, line)) throw format_error("zero cache: empty file");
    if (detail::trim(line) != zero_cache_header(q, nu)) throw format_error("zero cache: header mismatch");
    std::vector<cache_record> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (detail::trim(line).empty()) continue;
        const auto f = detail::split(line, '\t');
        if (f.size() != 5) throw format_error("zero cache line " + std::to_string(lineno) + ": expected 5 fields");
        cache_record r;
        try {
            std::size_t pos = 0;
            r.k = std::stoi(f[0], &pos);
            if (pos != f[0].size()) throw std::invalid_argument("k");
        } catch (const std::exception&) {
            throw format_error("zero cache line " + std::to_string(lineno) + ": bad index");
        }
        if (r.k != static_cast<int>(rows.size()) + 1)
            throw format_error("zero cache line " + std::to_string(lineno) + ": indices not consecutive");
        r.value = f[1];
        r.eps = f[2];
        r.alpha = f[3];
        if (f[4] != "0" && f[4] != "1")
            throw format_error("zero cache line " + std::to_string(lineno) + ": certified must be 0 or 1");
        r.certified = f[4] == "1";
        rows.push_back(std::move(r));
    }
    return rows;
}

/// Persistent zeros for one (q, nu). Reads are tolerant: a damaged file is
/// treated as empty and rewritten. Writes go to a temporary file that is
/// renamed over the target.
class zero_cache {
public:
    zero_cache(std::filesystem::path dir, double q, double nu)
        : dir_(std::move(dir)), q_(q), nu_(nu), path_(dir_ / zero_cache_filename(q, nu)) {}

    const std::filesystem::path& path() const { return path_; }

    std::vector<cache_record> load(std::string* warning = nullptr) const {
        std::ifstream in(path_);
        if (!in) return {};
        try {
            return read_zero_cache(in, q_, nu_);
        } catch (const format_error& e) {
            if (warning) *warning = e.what();
            return {};
        }
    }

    void store(const std::vector<cache_record>& rows) const {
        std::filesystem::create_directories(dir_);
        auto tmp = path_;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            if (!out) throw std::runtime_error("cannot write zero cache " + tmp.string());
            write_zero_cache(out, q_, nu_, rows);
            if (!out) throw std::runtime_error("cannot write zero cache " + tmp.string());
        }
        std::filesystem::rename(tmp, path_);
    }

private:
    std::filesystem::path dir_;
    double q_;
    double nu_;
    std::filesystem::path path_;
};

/// Zeros k = 1..k_max, taking what the cache has (rebuilt and re-verified
/// from eps) and computing the rest. Reports how many came from the cache.
template <class Real>
std::vector<bessel_zero<Real>> zeros_with_cache(const zero_finder<Real>& zf, int k_max,
                                                const zero_cache* cache, int* hits = nullptr,
                                                std::string* warning = nullptr) {
    std::vector<bessel_zero<Real>> out;
    std::vector<cache_record> rows;
    if (cache) rows = cache->load(warning);
    int from_cache = 0;
    for (int k = 1; k <= k_max; ++k) {
        if (static_cast<std::size_t>(k) <= rows.size()) {
            try {
                const auto& r = rows[static_cast<std::size_t>(k - 1)];
                out.push_back(zf.from_eps(k, from_string<Real>(r.eps), r.certified));
                ++from_cache;
                continue;
            } catch (const std::exception& e) {
                if (warning) *warning = std::string("zero cache entry rejected: ") + e.what();
                rows.resize(static_cast<std::size_t>(k - 1));
            }
        }
        out.push_back(zf.find(k));
    }
    if (cache && static_cast<std::size_t>(k_max) > rows.size()) {
        std::vector<cache_record> all;
        all.reserve(out.size());
        for (const auto& z : out) all.push_back(to_record(z));
        cache->store(all);
    }
    if (hits) *hits = from_cache;
    return out;
}

// ---------------------------------------------------------------------------
// Grid samples
// ---------------------------------------------------------------------------

/// Reads `n,f` rows into a grid function over q. Indices 0..N must all be
/// present exactly once.
template <class Real>
grid_function<Real> read_grid_values(std::istream& in, const Real& q) {
    std::string line;
    int lineno = 0;
    bool header = false;
    std::map<long, Real> rows;
    std::optional<Real> pre, limit;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto f = detail::split(t, ',');
        if (!header) {
            if (f.size() != 2 || detail::trim(f[0]) != "n" || detail::trim(f[1]) != "f")
                throw format_error("values line " + std::to_string(lineno) + ": expected header 'n,f'");
            header = true;
            continue;
        }
        if (f.size() != 2) throw format_error("values line " + std::to_string(lineno) + ": expected 2 fields");
        const std::string key = detail::trim(f[0]);
        Real v;
        try {
            v = from_string<Real>(detail::trim(f[1]));
        } catch (const std::exception&) {
            throw format_error("values line " + std::to_string(lineno) + ": bad number '" + f[1] + "'");
        }
        if (!(v - v == 0)) throw format_error("values line " + std::to_string(lineno) + ": non-finite value");
        if (key == "inf") {
            if (limit) throw format_error("values: duplicate n=inf");
            limit = v;
            continue;
        }
        long n = 0;
        try {
            std::size_t pos = 0;
            n = std::stol(key, &pos);
            if (pos != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            throw format_error("values line " + std::to_string(lineno) + ": bad index '" + key + "'");
        }
        if (n == -1) {
            if (pre) throw format_error("values: duplicate n=-1");
            pre = v;
            continue;
        }
        if (n < 0) throw format_error("values line " + std::to_string(lineno) + ": index below -1");
        if (!rows.emplace(n, v).second)
            throw format_error("values: duplicate index " + std::to_string(n));
    }
    if (!header) throw format_error("values: missing header 'n,f'");
    if (rows.empty()) throw format_error("values: no grid rows");
    grid_function<Real> g{q, {}, pre, limit, std::nullopt};
    long expect = 0;
    for (auto& [n, v] : rows) {
        if (n != expect) throw format_error("values: index " + std::to_string(expect) + " missing");
        g.values.push_back(v);
        ++expect;
    }
    return g;
}

}  // namespace qfb
