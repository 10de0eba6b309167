#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "porlhf/scenarios.hpp"

namespace porlhf {

constexpr int kScenarioFormatVersion = 1;

// Errors carry a path-like location, e.g. "transitions[3].prob".
struct ScenarioParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Scenario parse_scenario(const std::string& json_text);
Scenario load_scenario_file(const std::string& path);
// Belief is written in explicit form.
std::string scenario_to_json(const Scenario& s);

// Learned model as a state -> reward table.
std::string reward_table_json(const Mdp& mdp, const Vec& reward);

// A file path if one exists, otherwise a builder/catalog name.
Scenario load_scenario_ref(const std::string& ref, const std::map<std::string, double>& overrides = {});

}  // namespace porlhf
