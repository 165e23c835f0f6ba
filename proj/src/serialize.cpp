#include "dhsic/serialize.hpp"

#include <set>
#include <string>

#include "dhsic/errors.hpp"
#include "dhsic/version.hpp"

namespace dhsic {

using nlohmann::json;

json to_json(const StatisticValue& v) {
  return json{{"value", v.value},
              {"raw_value", v.raw_value},
              {"n", v.n},
              {"d", v.d},
              {"path", eval_path_name(v.path)}};
}

json to_json(const TestResult& r) {
  json j{{"statistic", to_json(r.statistic)},
         {"method", test_method_name(r.method)},
         {"tie_policy", tie_policy_name(r.tie_policy)},
         {"rank", r.rank},
         {"total", r.total},
         {"p_value", r.p_value},
         {"reject", r.reject},
         {"alpha", r.alpha.str()},
         {"num_ties_at_statistic", r.num_ties_at_statistic},
         {"seed", r.seed},
         {"resolved_bandwidths", r.resolved_bandwidths},
         {"library_version", kLibraryVersion}};
  if (r.method == TestMethod::Sampled) j["B"] = r.total - 1;
  if (!r.warning.empty()) j["warning"] = r.warning;
  if (!r.replicate_values.empty()) j["replicate_values"] = r.replicate_values;
  return j;
}

json to_json(const BPlan& plan) {
  return json{{"request",
               {{"alpha", plan.request.alpha.str()},
                {"epsilon", plan.request.epsilon},
                {"confidence", plan.request.confidence},
                {"p_max", plan.request.p_max},
                {"max_B", plan.request.max_B}}},
              {"B_min", plan.B_min},
              {"certified", plan.certified},
              {"min_coverage", plan.min_coverage},
              {"max_half_width_above", plan.max_half_width_above},
              {"note", plan.note},
              {"library_version", kLibraryVersion}};
}

json to_json(const PermutationVector& psi) {
  json parts = json::array();
  for (const auto& p : psi.perms) {
    json one = json::array();
    for (std::uint32_t v : p) one.push_back(v + 1);
    parts.push_back(std::move(one));
  }
  return json{{"n", psi.n()}, {"parts", std::move(parts)}};
}

json to_json(const RunManifest& m) {
  json inputs = json::array();
  for (const auto& in : m.inputs) inputs.push_back({{"path", in.path}, {"fnv1a64", in.fnv1a64}});
  return json{{"subcommand", m.subcommand},
              {"argv", m.argv},
              {"resolved_config", json::parse(m.resolved_config_json)},
              {"master_seed", m.master_seed},
              {"library_version", m.library_version},
              {"inputs", std::move(inputs)},
              {"started_at", m.started_at},
              {"finished_at", m.finished_at}};
}

json scenario_spec_to_json(const ScenarioSpec& spec) {
  return json{{"kind", scenario_kind_name(spec.kind)},
              {"thetas", spec.thetas},
              {"n", spec.n},
              {"dims", spec.dims},
              {"replications", spec.replications},
              {"B_list", spec.B_list},
              {"alpha", spec.alpha.str()},
              {"tie_policy", tie_policy_name(spec.tie_policy)},
              {"method", test_method_name(spec.method)},
              {"enumeration_cap", spec.enumeration_cap},
              {"master_seed", spec.master_seed},
              {"threads", spec.threads}};
}

ScenarioSpec scenario_spec_from_json(const json& j) {
  if (!j.is_object()) throw DomainError("scenario config must be a JSON object");
  static const std::set<std::string> known{
      "kind",       "thetas", "n",          "dims",        "replications", "B_list",
      "tie_policy", "method", "alpha",      "enumeration_cap", "master_seed", "threads"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) throw DomainError("scenario config: unknown key '" + key + "'");

  ScenarioSpec spec;
  try {
    if (j.contains("kind")) spec.kind = scenario_kind_from_name(j.at("kind").get<std::string>());
    if (spec.kind == ScenarioKind::Custom)
      throw DomainError("scenario config: custom scenarios need a programmatic generator");
    if (j.contains("thetas")) spec.thetas = j.at("thetas").get<std::vector<double>>();
    else spec.thetas = default_thetas(spec.kind);
    if (j.contains("n")) spec.n = j.at("n").get<std::size_t>();
    if (j.contains("dims")) spec.dims = j.at("dims").get<std::vector<std::size_t>>();
    if (j.contains("replications")) spec.replications = j.at("replications").get<std::uint64_t>();
    if (j.contains("B_list")) spec.B_list = j.at("B_list").get<std::vector<std::uint64_t>>();
    if (j.contains("alpha")) spec.alpha = Alpha::parse(j.at("alpha").get<std::string>());
    if (j.contains("tie_policy"))
      spec.tie_policy = tie_policy_from_name(j.at("tie_policy").get<std::string>());
    if (j.contains("method"))
      spec.method = test_method_from_name(j.at("method").get<std::string>());
    if (j.contains("enumeration_cap"))
      spec.enumeration_cap = j.at("enumeration_cap").get<std::uint64_t>();
    if (j.contains("master_seed")) spec.master_seed = j.at("master_seed").get<std::uint64_t>();
    if (j.contains("threads")) spec.threads = j.at("threads").get<int>();
  } catch (const json::exception& e) {
    throw DomainError(std::string("scenario config: ") + e.what());
  }
  spec.validate();
  return spec;
}

}  // namespace dhsic
