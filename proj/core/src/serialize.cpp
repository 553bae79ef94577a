#include "msr/serialize.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace msr {

namespace {

using nlohmann::json;

json matrix_to_json(const Matrix& c) {
    json rows = json::array();
    for (int i = 0; i < c.size(); ++i) {
        json row = json::array();
        for (int j = 0; j < c.size(); ++j) row.push_back(c(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

json tensor_to_json(const Tensor3& t) {
    json slabs = json::array();
    for (int i = 0; i < t.size(); ++i) {
        json rows = json::array();
        for (int j = 0; j < t.size(); ++j) {
            json row = json::array();
            for (int k = 0; k < t.size(); ++k) row.push_back(t(i, j, k));
            rows.push_back(std::move(row));
        }
        slabs.push_back(std::move(rows));
    }
    return slabs;
}

Matrix matrix_from_json(const json& j, int n, const char* what) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw std::runtime_error(std::string("features: bad shape for ") + what);
    }
    Matrix c(n);
    for (int i = 0; i < n; ++i) {
        const auto& row = j[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<int>(row.size()) != n) {
            throw std::runtime_error(std::string("features: bad shape for ") + what);
        }
        for (int k = 0; k < n; ++k) c(i, k) = row[static_cast<size_t>(k)].get<double>();
    }
    // Snap onto the simplex: the upper triangle is authoritative.
    for (int i = 0; i < n; ++i) {
        for (int k = i + 1; k < n; ++k) {
            if (std::abs(c(i, k) - c(k, i)) > 1e-9 * std::max(1.0, std::abs(c(i, k)))) {
                throw std::runtime_error(std::string("features: ") + what + " not symmetric");
            }
            c(k, i) = c(i, k);
        }
    }
    return c;
}

Tensor3 tensor_from_json(const json& j, int n) {
    if (!j.is_array() || static_cast<int>(j.size()) != n) {
        throw std::runtime_error("features: bad shape for t");
    }
    Tensor3 t(n);
    for (int i = 0; i < n; ++i) {
        const auto& rows = j[static_cast<size_t>(i)];
        if (!rows.is_array() || static_cast<int>(rows.size()) != n) {
            throw std::runtime_error("features: bad shape for t");
        }
        for (int a = 0; a < n; ++a) {
            const auto& row = rows[static_cast<size_t>(a)];
            if (!row.is_array() || static_cast<int>(row.size()) != n) {
                throw std::runtime_error("features: bad shape for t");
            }
            for (int b = 0; b < n; ++b) t(i, a, b) = row[static_cast<size_t>(b)].get<double>();
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int a = i; a < n; ++a) {
            for (int b = a; b < n; ++b) {
                const double v = t(i, a, b);
                const double tol = 1e-9 * std::max(1.0, std::abs(v));
                if (std::abs(t(i, b, a) - v) > tol || std::abs(t(a, i, b) - v) > tol ||
                    std::abs(t(a, b, i) - v) > tol || std::abs(t(b, i, a) - v) > tol ||
                    std::abs(t(b, a, i) - v) > tol) {
                    throw std::runtime_error("features: t not symmetric");
                }
                t(i, b, a) = v;
                t(a, i, b) = v;
                t(a, b, i) = v;
                t(b, i, a) = v;
                t(b, a, i) = v;
            }
        }
    }
    return t;
}

std::vector<double> vector_from_json(const json& j, const char* what) {
    if (!j.is_array()) throw std::runtime_error(std::string("bad array for ") + what);
    std::vector<double> out;
    out.reserve(j.size());
    for (const auto& e : j) out.push_back(e.get<double>());
    return out;
}

void require_schema(const json& j) {
    if (!j.contains("schema") || j["schema"].get<int>() != 1) {
        throw std::runtime_error("unsupported or missing schema version");
    }
}

}  // namespace

nlohmann::json to_json(const InvariantFeatures& f) {
    json j;
    j["schema"] = 1;
    j["kind"] = "non-uniform";
    j["m"] = f.m;
    j["sigma_used"] = f.sigma_used;
    j["mu"] = f.mu;
    j["c"] = matrix_to_json(f.c);
    j["t"] = tensor_to_json(f.t);
    return j;
}

nlohmann::json to_json(const UniformInvariantFeatures& f) {
    json j;
    j["schema"] = 1;
    j["kind"] = "uniform";
    j["d"] = f.d;
    j["sigma_used"] = f.sigma_used;
    j["mu"] = f.mu;
    j["c"] = f.c;
    j["t"] = matrix_to_json(f.t);
    return j;
}

AnyFeatures features_from_json(const nlohmann::json& j) {
    require_schema(j);
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "non-uniform") {
        InvariantFeatures f;
        f.m = j.at("m").get<int>();
        if (f.m < 1) throw std::runtime_error("features: m must be >= 1");
        f.sigma_used = j.at("sigma_used").get<double>();
        f.mu = vector_from_json(j.at("mu"), "mu");
        if (static_cast<int>(f.mu.size()) != f.m) {
            throw std::runtime_error("features: mu length != m");
        }
        f.c = matrix_from_json(j.at("c"), f.m, "c");
        f.t = tensor_from_json(j.at("t"), f.m);
        return f;
    }
    if (kind == "uniform") {
        UniformInvariantFeatures f;
        f.d = j.at("d").get<int>();
        if (f.d < 1) throw std::runtime_error("features: d must be >= 1");
        f.sigma_used = j.at("sigma_used").get<double>();
        f.mu = j.at("mu").get<double>();
        f.c = vector_from_json(j.at("c"), "c");
        if (static_cast<int>(f.c.size()) != f.d) {
            throw std::runtime_error("features: c length != d");
        }
        f.t = matrix_from_json(j.at("t"), f.d, "t");
        return f;
    }
    throw std::runtime_error("features: unknown kind '" + kind + "'");
}

nlohmann::json to_json(const SolveReport& r, bool include_trace) {
    json j;
    j["schema"] = 1;
    j["x_hat"] = r.x_hat.values();
    j["p_hat"] = r.p_hat.mass();
    j["final_objective"] = r.final_objective;
    j["iterations"] = r.iterations;
    j["converged"] = r.converged;
    j["projected_grad_norm"] = r.projected_grad_norm;
    if (include_trace) j["trace"] = r.trace;
    return j;
}

nlohmann::json to_json(const TrialBatchReport& r) {
    json per = json::array();
    for (const auto& t : r.per_trial) {
        json e;
        e["final_objective"] = t.final_objective;
        e["mse_x"] = t.mse_x;
        e["mse_p"] = t.mse_p;
        e["best_shift"] = t.best_shift;
        e["converged"] = t.converged;
        e["aborted"] = t.aborted;
        if (t.x_hat) e["x_hat"] = *t.x_hat;
        if (t.p_hat) e["p_hat"] = *t.p_hat;
        per.push_back(std::move(e));
    }
    json j;
    j["schema"] = 1;
    j["n_trials"] = r.n_trials;
    j["p_rec"] = r.p_rec;
    j["f_bar"] = r.f_bar;
    j["th"] = r.th;
    j["n_aborted"] = r.n_aborted;
    j["per_trial"] = std::move(per);
    return j;
}

nlohmann::json to_json(const EmReport& r, bool include_trace) {
    json j;
    j["schema"] = 1;
    j["x_hat"] = r.x_hat.values();
    j["p_hat"] = r.p_hat.mass();
    j["iterations"] = r.iterations;
    j["wall_time"] = r.wall_time;
    if (include_trace) j["log_likelihood_trace"] = r.log_likelihood_trace;
    return j;
}

nlohmann::json to_json(const GroundTruth& t) {
    json j;
    j["schema"] = 1;
    j["d"] = t.x.size();
    j["x"] = t.x.values();
    j["p"] = t.p.mass();
    return j;
}

GroundTruth truth_from_json(const nlohmann::json& j) {
    require_schema(j);
    Signal x(vector_from_json(j.at("x"), "x"));
    ShiftPmf p(vector_from_json(j.at("p"), "p"));
    if (p.size() != x.size()) throw std::runtime_error("truth: x and p lengths differ");
    return {std::move(x), std::move(p)};
}

ObjectivePoint point_from_json(const nlohmann::json& j, int d) {
    const char* xk = j.contains("x_hat") ? "x_hat" : "x";
    const char* pk = j.contains("p_hat") ? "p_hat" : "p";
    if (!j.contains(xk)) throw std::runtime_error("init: missing x / x_hat");
    Signal x(vector_from_json(j.at(xk), "x"));
    if (x.size() != d) throw std::runtime_error("init: x length != d");
    ShiftPmf p = j.contains(pk) ? ShiftPmf(vector_from_json(j.at(pk), "p"))
                                : ShiftPmf::uniform(d);
    if (p.size() != d) throw std::runtime_error("init: p length != d");
    return {std::move(x), std::move(p)};
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    json j;
    try {
        f >> j;
    } catch (const json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    return j;
}

void write_json_file(const nlohmann::json& j, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << j.dump(2) << "\n";
    if (!f) throw std::runtime_error("write failed on '" + path + "'");
}

void write_trace_csv(const std::vector<double>& trace, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << "iteration,objective\n";
    char buf[64];
    for (size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", trace[i]);
        f << i << ',' << buf << "\n";
    }
    if (!f) throw std::runtime_error("write failed on '" + path + "'");
}

}  // namespace msr
