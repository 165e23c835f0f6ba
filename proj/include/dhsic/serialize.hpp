#pragma once

#include <json.hpp>

#include "dhsic/bplanner.hpp"
#include "dhsic/manifest.hpp"
#include "dhsic/perm_test.hpp"
#include "dhsic/permutation.hpp"
#include "dhsic/simulate.hpp"
#include "dhsic/statistic.hpp"

// nlohmann::json's default object keeps keys sorted, which makes every
// document here diffable across runs.

namespace dhsic {

nlohmann::json to_json(const StatisticValue& v);
nlohmann::json to_json(const TestResult& r);
nlohmann::json to_json(const BPlan& plan);
nlohmann::json to_json(const PermutationVector& psi);  // 1-based entries
nlohmann::json to_json(const RunManifest& m);

nlohmann::json scenario_spec_to_json(const ScenarioSpec& spec);
// Rejects unknown keys; absent keys keep the defaults of ScenarioSpec.
ScenarioSpec scenario_spec_from_json(const nlohmann::json& j);

}  // namespace dhsic
