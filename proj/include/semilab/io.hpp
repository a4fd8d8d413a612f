#pragma once

// Text formats: complex literals, vectors, operator description files, probe
// files and mu-grid descriptions. All failures throw ErrorKind::ParseError.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semilab/cauchy.hpp"
#include "semilab/core.hpp"
#include "semilab/forcing.hpp"
#include "semilab/linop.hpp"
#include "semilab/theorem.hpp"

namespace semilab::io {

[[noreturn]] inline void parse_fail(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string strip_comment(const std::string& line) {
    const auto p = line.find('#');
    return p == std::string::npos ? line : line.substr(0, p);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto p = s.find(sep, start);
        out.push_back(trim(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start)));
        if (p == std::string_view::npos) break;
        start = p + 1;
    }
    return out;
}

inline double parse_real(std::string_view text) {
    const std::string s = trim(text);
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (s.empty() || ec != std::errc{} || ptr != last) parse_fail("invalid real number '" + s + "'");
    return v;
}

inline long long parse_int(std::string_view text) {
    const std::string s = trim(text);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) parse_fail("invalid integer '" + s + "'");
    return v;
}

/// Complex literal: `a`, `bi`, `a+bi`, `a-bi`, `i`, `-i` (spaces ignored).
inline Complex parse_complex(std::string_view text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) parse_fail("empty complex literal");
    if (s.back() != 'i') return {parse_real(s), 0.0};
    s.pop_back();
    // Split at the last sign that is not part of an exponent.
    std::size_t split_at = std::string::npos;
    for (std::size_t k = s.size(); k-- > 1;) {
        if ((s[k] == '+' || s[k] == '-') && s[k - 1] != 'e' && s[k - 1] != 'E') {
            split_at = k;
            break;
        }
    }
    const std::string re = split_at == std::string::npos ? std::string() : s.substr(0, split_at);
    std::string im = split_at == std::string::npos ? s : s.substr(split_at);
    if (im.empty() || im == "+") im = "1";
    if (im == "-") im = "-1";
    return {re.empty() ? 0.0 : parse_real(re), parse_real(im)};
}

/// Comma-separated complex list; optional surrounding brackets or parentheses.
inline std::vector<Complex> parse_complex_list(std::string_view text) {
    std::string s = trim(text);
    if (s.size() >= 2 && ((s.front() == '(' && s.back() == ')') || (s.front() == '[' && s.back() == ']')))
        s = s.substr(1, s.size() - 2);
    if (trim(s).empty()) parse_fail("empty list");
    std::vector<Complex> out;
    for (const auto& item : split(s, ',')) out.push_back(parse_complex(item));
    return out;
}

inline Vec to_vec(const std::vector<Complex>& v) {
    Vec x(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) x(static_cast<Eigen::Index>(i)) = v[i];
    return x;
}

/// `key=value` tokens separated by whitespace, after a leading word.
inline std::map<std::string, std::string> parse_kv_tokens(const std::vector<std::string>& tokens, std::size_t from) {
    std::map<std::string, std::string> kv;
    for (std::size_t i = from; i < tokens.size(); ++i) {
        const auto eq = tokens[i].find('=');
        if (eq == std::string::npos || eq == 0) parse_fail("expected key=value, got '" + tokens[i] + "'");
        kv[tokens[i].substr(0, eq)] = tokens[i].substr(eq + 1);
    }
    return kv;
}

inline std::vector<std::string> tokens_of(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> t;
    for (std::string w; in >> w;) t.push_back(w);
    return t;
}

// ---------------------------------------------------------------------------
// Operator files

/// Matrix generator line: `laplacian1d n=<int>`, `diag <list>`, `jordan lambda=<complex> size=<int>`.
inline std::optional<Mat> parse_generator(const std::string& line) {
    const auto t = tokens_of(line);
    if (t.empty()) return std::nullopt;
    if (t[0] == "laplacian1d") {
        const auto kv = parse_kv_tokens(t, 1);
        if (!kv.count("n") || kv.size() != 1) parse_fail("laplacian1d needs exactly n=<int>");
        const auto n = parse_int(kv.at("n"));
        if (n < 1) parse_fail("laplacian1d needs n >= 1");
        return laplacian1d(n);
    }
    if (t[0] == "diag") {
        const auto p = line.find("diag");
        return diagonal_matrix(parse_complex_list(line.substr(p + 4)));
    }
    if (t[0] == "jordan") {
        const auto kv = parse_kv_tokens(t, 1);
        if (!kv.count("lambda") || !kv.count("size") || kv.size() != 2)
            parse_fail("jordan needs lambda=<complex> size=<int>");
        const auto size = parse_int(kv.at("size"));
        if (size < 1) parse_fail("jordan needs size >= 1");
        return jordan_block(parse_complex(kv.at("lambda")), size);
    }
    return std::nullopt;
}

inline NormKind parse_norm_kind(const std::string& s) {
    if (s == "euclidean") return NormKind::euclidean;
    if (s == "sup") return NormKind::sup;
    parse_fail("unknown e0_norm '" + s + "' (expected euclidean or sup)");
}

inline Structure parse_structure(const std::string& s) {
    if (s == "dense") return Structure::dense;
    if (s == "diagonal") return Structure::diagonal;
    if (s == "tridiagonal") return Structure::tridiagonal;
    parse_fail("unknown structure '" + s + "' (expected dense, diagonal or tridiagonal)");
}

/// Operator description: `key = value` lines (`dim`, `structure`, `e0_norm`,
/// `row`, `matrix`), bare generator lines, `#` comments.
inline OperatorPair parse_operator(std::istream& in) {
    std::optional<long long> dim;
    std::optional<Structure> structure;
    NormKind norm = NormKind::euclidean;
    std::vector<std::vector<Complex>> rows;
    std::optional<Mat> generated;
    std::string raw;
    int lineno = 0;
    auto set_generated = [&](Mat m) {
        if (generated) parse_fail("more than one matrix generator");
        generated = std::move(m);
    };
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string head = trim(line.substr(0, eq == std::string::npos ? line.size() : eq));
        try {
            if (eq != std::string::npos && head.find(' ') == std::string::npos &&
                (head == "dim" || head == "structure" || head == "e0_norm" || head == "row" || head == "matrix")) {
                const std::string value = trim(line.substr(eq + 1));
                if (head == "dim") dim = parse_int(value);
                else if (head == "structure") structure = parse_structure(value);
                else if (head == "e0_norm") norm = parse_norm_kind(value);
                else if (head == "row") rows.push_back(parse_complex_list(value));
                else {
                    auto g = parse_generator(value);
                    if (!g) parse_fail("unknown matrix generator '" + value + "'");
                    set_generated(std::move(*g));
                }
                continue;
            }
            auto g = parse_generator(line);
            if (!g) parse_fail("unrecognized line '" + line + "'");
            set_generated(std::move(*g));
        } catch (const Error& e) {
            parse_fail("operator line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (generated && !rows.empty()) parse_fail("operator has both rows and a generator");
    Mat m;
    if (generated) {
        m = std::move(*generated);
    } else {
        if (rows.empty()) parse_fail("operator has no matrix");
        const auto n = static_cast<Eigen::Index>(rows.size());
        m.resize(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto& r = rows[static_cast<std::size_t>(i)];
            if (static_cast<Eigen::Index>(r.size()) != n)
                parse_fail("row " + std::to_string(i + 1) + " has " + std::to_string(r.size()) + " entries, expected " +
                           std::to_string(n));
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = r[static_cast<std::size_t>(j)];
        }
    }
    if (dim && *dim != m.rows())
        parse_fail("dim = " + std::to_string(*dim) + " but the matrix has " + std::to_string(m.rows()) + " rows");
    try {
        return OperatorPair(std::move(m), norm, structure);
    } catch (const Error& e) {
        parse_fail(std::string("invalid operator: ") + e.what());
    }
}

inline OperatorPair parse_operator_text(const std::string& text) {
    std::istringstream in(text);
    return parse_operator(in);
}

inline OperatorPair load_operator(const std::string& path) {
    std::ifstream in(path);
    if (!in) parse_fail("cannot open operator file '" + path + "'");
    return parse_operator(in);
}

// ---------------------------------------------------------------------------
// Probe files

/// Vector value: a literal list, `ones`, `zero`, `random` (seeded), or `e<k>` (unit vector, 1-based).
inline Vec parse_vector_value(const std::string& s, Eigen::Index dim, std::mt19937_64& rng) {
    if (s == "ones") return Vec::Ones(dim);
    if (s == "zero") return Vec::Zero(dim);
    if (s == "random") return random_vector(dim, rng);
    if (s.size() > 1 && s[0] == 'e' && std::isdigit(static_cast<unsigned char>(s[1]))) {
        const auto k = parse_int(s.substr(1));
        if (k < 1 || k > dim) parse_fail("unit vector index out of range in '" + s + "'");
        return Vec::Unit(dim, static_cast<Eigen::Index>(k - 1));
    }
    Vec v = to_vec(parse_complex_list(s));
    if (v.size() != dim)
        parse_fail("vector has " + std::to_string(v.size()) + " entries, expected " + std::to_string(dim));
    return v;
}

/// One probe per line: `exp mu=<complex> y=<vec>` | `poly coeffs=<list> [y=<vec>]` | `ic x=<vec>`.
/// For poly the spatial direction y defaults to the all-ones vector.
inline std::vector<Probe> parse_probes(std::istream& in, Eigen::Index dim, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<Probe> probes;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const std::string line = trim(strip_comment(raw));
        if (line.empty()) continue;
        try {
            const auto t = tokens_of(line);
            const auto kv = parse_kv_tokens(t, 1);
            auto allow = [&](std::initializer_list<const char*> keys) {
                for (const auto& [k, v] : kv)
                    if (std::none_of(keys.begin(), keys.end(), [&](const char* a) { return k == a; }))
                        parse_fail("unexpected key '" + k + "'");
            };
            auto need = [&](const char* k) -> const std::string& {
                const auto it = kv.find(k);
                if (it == kv.end()) parse_fail(std::string("missing ") + k + "=");
                return it->second;
            };
            const Vec zero = Vec::Zero(dim);
            if (t[0] == "exp") {
                allow({"mu", "y"});
                const Complex mu = parse_complex(need("mu"));
                const Vec y = parse_vector_value(need("y"), dim, rng);
                probes.push_back({line, Forcing::exponential(mu, y), zero});
            } else if (t[0] == "poly") {
                allow({"coeffs", "y"});
                const auto c = parse_complex_list(need("coeffs"));
                const Vec y = kv.count("y") ? parse_vector_value(kv.at("y"), dim, rng) : Vec(Vec::Ones(dim));
                probes.push_back({line, Forcing::polynomial(c, y), zero});
            } else if (t[0] == "ic") {
                allow({"x"});
                probes.push_back({line, Forcing::zero(dim), parse_vector_value(need("x"), dim, rng)});
            } else {
                parse_fail("unknown probe kind '" + t[0] + "'");
            }
        } catch (const Error& e) {
            parse_fail("probe line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (probes.empty()) throw Error(ErrorKind::EmptyProbeSet, "probe file contains no probes");
    return probes;
}

inline std::vector<Probe> load_probes(const std::string& path, Eigen::Index dim, std::uint64_t seed) {
    std::ifstream in(path);
    if (!in) parse_fail("cannot open probe file '" + path + "'");
    return parse_probes(in, dim, seed);
}

// ---------------------------------------------------------------------------
// mu grids

/// `re=lo:hi:n[:log|lin],im=lo:hi:n[:log|lin]` (Re defaults to log spacing,
/// Im to linear; a missing im= means Im mu = 0) or `list=<c1>;<c2>;...`.
inline std::vector<Complex> parse_mu_grid(const std::string& text) {
    const std::string s = trim(text);
    if (s.rfind("list=", 0) == 0) {
        std::vector<Complex> out;
        for (const auto& item : split(s.substr(5), ';')) out.push_back(parse_complex(item));
        return out;
    }
    std::optional<std::vector<double>> re, im;
    for (const auto& part : split(s, ',')) {
        const auto eq = part.find('=');
        if (eq == std::string::npos) parse_fail("mu-grid part '" + part + "' lacks '='");
        const std::string key = trim(part.substr(0, eq));
        const auto f = split(part.substr(eq + 1), ':');
        if (f.size() != 3 && f.size() != 4) parse_fail("mu-grid axis must be lo:hi:n[:log|lin]");
        const double lo = parse_real(f[0]), hi = parse_real(f[1]);
        const auto n = parse_int(f[2]);
        if (n < 1 || n > 100000) parse_fail("mu-grid axis point count out of range");
        bool log_scale = key == "re";
        if (f.size() == 4) {
            if (f[3] == "log") log_scale = true;
            else if (f[3] == "lin") log_scale = false;
            else parse_fail("mu-grid spacing must be log or lin");
        }
        if (log_scale && (lo <= 0.0 || hi <= 0.0)) parse_fail("log spacing needs positive bounds");
        auto values = spaced(lo, hi, static_cast<int>(n), log_scale);
        if (key == "re") re = std::move(values);
        else if (key == "im") im = std::move(values);
        else parse_fail("mu-grid key must be re, im or list");
    }
    if (!re) parse_fail("mu-grid needs re=");
    return product_grid(*re, im.value_or(std::vector<double>{0.0}));
}

}  // namespace semilab::io
