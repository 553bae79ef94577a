#pragma once

#include <string>
#include <variant>

#include <json.hpp>

#include "msr/em.hpp"
#include "msr/invariants.hpp"
#include "msr/solver.hpp"

namespace msr {

// All documents carry "schema": 1.

nlohmann::json to_json(const InvariantFeatures& f);
nlohmann::json to_json(const UniformInvariantFeatures& f);
nlohmann::json to_json(const SolveReport& r, bool include_trace = true);
nlohmann::json to_json(const TrialBatchReport& r);
nlohmann::json to_json(const EmReport& r, bool include_trace = true);

using AnyFeatures = std::variant<InvariantFeatures, UniformInvariantFeatures>;

/// Parses a features document; "kind" selects the shape. Symmetric
/// arrays are validated and snapped exactly onto their index simplex.
AnyFeatures features_from_json(const nlohmann::json& j);

/// Ground-truth document: {schema, d, x, p}.
struct GroundTruth {
    Signal x;
    ShiftPmf p;
};
nlohmann::json to_json(const GroundTruth& t);
GroundTruth truth_from_json(const nlohmann::json& j);

/// Starting point for solve/em; accepts {x, p} or {x_hat, p_hat} spellings
/// so reports can seed each other.
ObjectivePoint point_from_json(const nlohmann::json& j, int d);

nlohmann::json read_json_file(const std::string& path);
void write_json_file(const nlohmann::json& j, const std::string& path);

/// Trace CSV: header "iteration,objective", one row per entry.
void write_trace_csv(const std::vector<double>& trace, const std::string& path);

}  // namespace msr
