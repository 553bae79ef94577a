#include "msr/observation.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "msr/rng.hpp"

namespace msr {

ObservationSet generate_observations(const Signal& x, const ShiftPmf& p, int m,
                                     double sigma, std::int64_t count,
                                     std::uint64_t seed) {
    const int d = x.size();
    if (p.size() != d) {
        throw std::invalid_argument("generate_observations: pmf length != d");
    }
    if (m < 1 || m > d) {
        throw std::domain_error("generate_observations: window length out of [1, d]");
    }
    if (count < 1) {
        throw std::invalid_argument("generate_observations: need at least one segment");
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw std::invalid_argument("generate_observations: sigma must be finite and >= 0");
    }

    ObservationSet obs;
    obs.d = d;
    obs.m = m;
    obs.count = count;
    obs.sigma = sigma;
    obs.seed = seed;
    obs.segments.resize(static_cast<size_t>(count) * m);
    obs.true_shifts.emplace();
    obs.true_shifts->reserve(static_cast<size_t>(count));

    Rng rng(seed);
    double* out = obs.segments.data();
    for (std::int64_t k = 0; k < count; ++k) {
        const int s = rng.categorical(p.mass());
        obs.true_shifts->push_back(s);
        for (int n = 0; n < m; ++n) {
            double v = x[(n + s) % d];
            if (sigma > 0.0) v += sigma * rng.gaussian();
            *out++ = v;
        }
    }
    return obs;
}

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& what) {
    throw std::runtime_error(name + ":" + std::to_string(line) + ": " + what);
}

double parse_double(std::string_view tok, const std::string& name, int line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        parse_fail(name, line, "bad float '" + std::string(tok) + "'");
    }
    return v;
}

long parse_long(std::string_view tok, const std::string& name, int line) {
    long v = 0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        parse_fail(name, line, "bad integer '" + std::string(tok) + "'");
    }
    return v;
}

std::string_view expect_field(std::string_view& rest, std::string_view key,
                              const std::string& name, int line) {
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    if (rest.substr(0, key.size()) != key) {
        parse_fail(name, line, "expected '" + std::string(key) + "' in header");
    }
    rest.remove_prefix(key.size());
    size_t end = rest.find(' ');
    std::string_view tok = rest.substr(0, end);
    rest.remove_prefix(end == std::string_view::npos ? rest.size() : end);
    return tok;
}

}  // namespace

void save_msr1(const ObservationSet& obs, std::ostream& out) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", obs.sigma);
    out << "MSR1 d=" << obs.d << " m=" << obs.m << " K=" << obs.count
        << " sigma=" << buf << "\n";
    for (std::int64_t k = 0; k < obs.count; ++k) {
        auto r = obs.row(k);
        for (int n = 0; n < obs.m; ++n) {
            std::snprintf(buf, sizeof(buf), "%.17g", r[static_cast<size_t>(n)]);
            if (n) out << ',';
            out << buf;
        }
        out << "\n";
    }
}

void save_msr1(const ObservationSet& obs, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    save_msr1(obs, f);
    if (!f) throw std::runtime_error("write failed on '" + path + "'");
}

ObservationSet load_msr1(std::istream& in, const std::string& name) {
    std::string line;
    if (!std::getline(in, line)) parse_fail(name, 1, "empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::string_view rest(line);
    if (rest.substr(0, 4) != "MSR1") parse_fail(name, 1, "missing MSR1 magic");
    rest.remove_prefix(4);
    const long d = parse_long(expect_field(rest, "d=", name, 1), name, 1);
    const long m = parse_long(expect_field(rest, "m=", name, 1), name, 1);
    const long count = parse_long(expect_field(rest, "K=", name, 1), name, 1);
    const double sigma = parse_double(expect_field(rest, "sigma=", name, 1), name, 1);
    while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
    if (!rest.empty()) parse_fail(name, 1, "trailing junk in header");

    if (d < 1) parse_fail(name, 1, "d must be >= 1");
    if (m < 1 || m > d) parse_fail(name, 1, "need 1 <= m <= d");
    if (count < 1) parse_fail(name, 1, "no observations");
    if (!(sigma >= 0.0)) parse_fail(name, 1, "sigma must be >= 0");

    ObservationSet obs;
    obs.d = static_cast<int>(d);
    obs.m = static_cast<int>(m);
    obs.count = count;
    obs.sigma = sigma;
    obs.segments.reserve(static_cast<size_t>(count) * static_cast<size_t>(m));

    int lineno = 1;
    std::int64_t rows = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (rows == count) parse_fail(name, lineno, "more rows than K in header");
        std::string_view sv(line);
        int fields = 0;
        size_t pos = 0;
        while (true) {
            size_t comma = sv.find(',', pos);
            std::string_view tok = sv.substr(pos, comma == std::string_view::npos
                                                      ? std::string_view::npos
                                                      : comma - pos);
            if (fields == m) parse_fail(name, lineno, "row has more than m values");
            obs.segments.push_back(parse_double(tok, name, lineno));
            ++fields;
            if (comma == std::string_view::npos) break;
            pos = comma + 1;
        }
        if (fields != m) {
            parse_fail(name, lineno,
                       "row has " + std::to_string(fields) + " values, expected " +
                           std::to_string(m));
        }
        ++rows;
    }
    if (rows == 0) parse_fail(name, lineno, "no observations");
    if (rows != count) {
        parse_fail(name, lineno,
                   "got " + std::to_string(rows) + " rows, header says K=" +
                       std::to_string(count));
    }
    return obs;
}

ObservationSet load_msr1(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    return load_msr1(f, path);
}

}  // namespace msr
