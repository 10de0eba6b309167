#include "porlhf/scenario_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace porlhf {

namespace {

using json = nlohmann::ordered_json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ScenarioParseError(where + ": " + what);
}

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) fail(where, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || it.key() == a;
    if (!ok) fail(where, "unknown field '" + it.key() + "'");
  }
}

const json& need(const json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) fail(where, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(where, "non-finite number");
  return v;
}

std::string text(const json& j, const std::string& where) {
  if (!j.is_string()) fail(where, "expected a string");
  return j.get<std::string>();
}

std::vector<std::string> names(const json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) fail(where, "expected a nonempty array of names");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(text(j[i], where + "[" + std::to_string(i) + "]"));
    if (!seen.insert(out.back()).second) fail(where, "duplicate name '" + out.back() + "'");
  }
  return out;
}

int lookup(const std::vector<std::string>& list, const std::string& name, const std::string& where) {
  for (std::size_t i = 0; i < list.size(); ++i)
    if (list[i] == name) return static_cast<int>(i);
  fail(where, "unknown name '" + name + "'");
}

std::map<std::string, double> number_map(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where, "expected an object");
  std::map<std::string, double> out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = number(it.value(), where + "." + it.key());
  return out;
}

ObservationModel parse_observations(const json& j, const Mdp& mdp) {
  const std::string where = "observations";
  if (!j.is_object()) fail(where, "expected an object keyed by state");
  ObservationModel om;
  auto obs_index = [&](const std::string& o) {
    for (std::size_t i = 0; i < om.observations.size(); ++i)
      if (om.observations[i] == o) return static_cast<int>(i);
    om.observations.push_back(o);
    return static_cast<int>(om.observations.size() - 1);
  };
  std::vector<std::vector<std::pair<int, double>>> rows(mdp.num_states());
  std::vector<bool> given(mdp.num_states(), false);
  for (auto it = j.begin(); it != j.end(); ++it) {
    const int s = lookup(mdp.states, it.key(), where);
    given[s] = true;
    const std::string w = where + "." + it.key();
    if (it.value().is_string()) {
      rows[s].push_back({obs_index(it.value().get<std::string>()), 1.0});
    } else if (it.value().is_object()) {
      for (auto o = it.value().begin(); o != it.value().end(); ++o)
        rows[s].push_back({obs_index(o.key()), number(o.value(), w + "." + o.key())});
    } else {
      fail(w, "expected an observation name or {observation: probability}");
    }
  }
  for (int s = 0; s < mdp.num_states(); ++s)
    if (!given[s]) fail(where, "state '" + mdp.states[s] + "' has no observation");
  om.kernel = Mat::Zero(mdp.num_states(), om.num_observations());
  for (int s = 0; s < mdp.num_states(); ++s)
    for (auto [o, p] : rows[s]) om.kernel(s, o) += p;
  try {
    om.validate(mdp.num_states());
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  return om;
}

Policy parse_policy(const json& j, const Mdp& mdp, const std::string& where) {
  if (!j.is_object()) fail(where, "expected {state: {action: probability}}");
  Policy pi = Mat::Zero(mdp.num_states(), mdp.num_actions());
  // Unlisted states act uniformly.
  for (int s = 0; s < mdp.num_states(); ++s) pi.row(s).setConstant(1.0 / mdp.num_actions());
  for (auto it = j.begin(); it != j.end(); ++it) {
    const int s = lookup(mdp.states, it.key(), where);
    pi.row(s).setZero();
    if (it.value().is_string()) {
      pi(s, lookup(mdp.actions, it.value().get<std::string>(), where + "." + it.key())) = 1.0;
    } else {
      for (auto a = it.value().begin(); a != it.value().end(); ++a)
        pi(s, lookup(mdp.actions, a.key(), where + "." + it.key())) = number(a.value(), where + "." + it.key() + "." + a.key());
    }
  }
  try {
    validate_policy(mdp, pi);
  } catch (const std::exception& e) {
    fail(where, e.what());
  }
  return pi;
}

void parse_belief(const json& j, Scenario& s) {
  const std::string where = "belief";
  if (!j.is_object()) fail(where, "expected an object");
  const std::string form = text(need(j, where, "form"), where + ".form");
  if (form == "explicit") {
    only_keys(j, where, {"form", "rows"});
    const json& rows = need(j, where, "rows");
    if (!rows.is_object()) fail(where + ".rows", "expected {observation sequence: {state sequence: probability}}");
    s.belief = Mat::Zero(s.space.size(), static_cast<Eigen::Index>(s.sequences.size()));
    std::vector<bool> given(s.space.size(), false);
    for (auto it = rows.begin(); it != rows.end(); ++it) {
      int o = -1;
      for (int k = 0; k < s.space.size(); ++k)
        if (observation_sequence_name(s.obs, s.space.sequences[k]) == it.key()) o = k;
      if (o < 0) fail(where + ".rows", "unknown or impossible observation sequence '" + it.key() + "'");
      given[o] = true;
      const std::string w = where + ".rows." + it.key();
      if (!it.value().is_object()) fail(w, "expected {state sequence: probability}");
      for (auto c = it.value().begin(); c != it.value().end(); ++c) {
        int idx = -1;
        for (std::size_t k = 0; k < s.sequences.size(); ++k)
          if (s.sequence(static_cast<int>(k)) == c.key()) idx = static_cast<int>(k);
        if (idx < 0) fail(w, "unknown state sequence '" + c.key() + "'");
        s.belief(o, idx) = number(c.value(), w + "." + c.key());
      }
    }
    for (int k = 0; k < s.space.size(); ++k)
      if (!given[k]) fail(where + ".rows", "missing row for '" + observation_sequence_name(s.obs, s.space.sequences[k]) + "'");
  } else if (form == "posterior") {
    only_keys(j, where, {"form", "prior"});
    if (!s.space.deterministic()) fail(where, "posterior form needs deterministic observations; use policy_aware");
    Vec prior = Vec::Ones(static_cast<Eigen::Index>(s.sequences.size()));
    if (j.contains("prior")) {
      for (const auto& [name, v] : number_map(j.at("prior"), where + ".prior")) {
        int idx = -1;
        for (std::size_t k = 0; k < s.sequences.size(); ++k)
          if (s.sequence(static_cast<int>(k)) == name) idx = static_cast<int>(k);
        if (idx < 0) fail(where + ".prior", "unknown state sequence '" + name + "'");
        if (v < 0) fail(where + ".prior." + name, "negative weight");
        prior(idx) = v;
      }
    }
    try {
      s.belief = posterior_deterministic(prior, s.space.sequence_map, s.space.size());
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  } else if (form == "policy_aware") {
    only_keys(j, where, {"form", "policy"});
    const Policy pi = parse_policy(need(j, where, "policy"), s.mdp, where + ".policy");
    try {
      s.belief = policy_aware_belief(s.mdp, pi, s.obs, s.sequences, s.space);
    } catch (const std::exception& e) {
      fail(where, e.what());
    }
  } else {
    fail(where + ".form", "unknown belief form '" + form + "' (explicit, posterior, policy_aware)");
  }
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioParseError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("document", "expected an object");
  const json& ver = need(j, "document", "format_version");
  if (!ver.is_number_integer() || ver.get<int>() != kScenarioFormatVersion)
    fail("format_version", "unsupported version (expected " + std::to_string(kScenarioFormatVersion) + ")");

  if (j.contains("catalog")) {
    only_keys(j, "document", {"format_version", "catalog", "parameters"});
    std::map<std::string, double> ps;
    if (j.contains("parameters")) ps = number_map(j.at("parameters"), "parameters");
    try {
      return resolve_scenario(text(j.at("catalog"), "catalog"), ps);
    } catch (const std::invalid_argument& e) {
      fail("catalog", e.what());
    }
  }

  only_keys(j, "document", {"format_version", "name", "states", "actions", "transitions", "default_next", "initial",
                            "rewards", "gamma", "horizon", "observations", "belief", "beta", "decision_state", "default_action",
                            "notes"});
  Scenario s;
  s.name = j.contains("name") ? text(j.at("name"), "name") : "scenario";
  const auto states = names(need(j, "document", "states"), "states");
  const auto actions = names(need(j, "document", "actions"), "actions");
  const double gamma = number(need(j, "document", "gamma"), "gamma");
  const json& hz = need(j, "document", "horizon");
  if (!hz.is_number_integer() || hz.get<int>() < 0) fail("horizon", "expected a nonnegative integer");
  s.mdp = make_mdp(states, actions, gamma, hz.get<int>());

  const json& tr = need(j, "document", "transitions");
  if (!tr.is_array()) fail("transitions", "expected an array");
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const std::string w = "transitions[" + std::to_string(i) + "]";
    only_keys(tr[i], w, {"from", "action", "to", "prob"});
    const int from = lookup(states, text(need(tr[i], w, "from"), w + ".from"), w + ".from");
    const int a = lookup(actions, text(need(tr[i], w, "action"), w + ".action"), w + ".action");
    const int to = lookup(states, text(need(tr[i], w, "to"), w + ".to"), w + ".to");
    const double p = number(need(tr[i], w, "prob"), w + ".prob");
    if (p < 0) fail(w + ".prob", "negative probability");
    s.mdp.transition[a](from, to) += p;
  }
  if (j.contains("default_next")) {
    const int f = lookup(states, text(j.at("default_next"), "default_next"), "default_next");
    for (auto& t : s.mdp.transition)
      for (int st = 0; st < s.mdp.num_states(); ++st)
        if (t.row(st).sum() == 0.0) t(st, f) = 1.0;
  }
  for (const auto& [name, v] : number_map(need(j, "document", "initial"), "initial"))
    s.mdp.initial(lookup(states, name, "initial")) = v;
  for (const auto& [name, v] : number_map(need(j, "document", "rewards"), "rewards"))
    s.mdp.reward(lookup(states, name, "rewards")) = v;
  try {
    s.mdp.validate();
  } catch (const std::exception& e) {
    fail("mdp", e.what());
  }
  s.obs = parse_observations(need(j, "document", "observations"), s.mdp);
  try {
    s.derive();
  } catch (const std::exception& e) {
    fail("mdp", e.what());
  }
  parse_belief(need(j, "document", "belief"), s);
  if (j.contains("beta")) s.beta = number(j.at("beta"), "beta");
  if (j.contains("decision_state")) {
    s.decision_state = text(j.at("decision_state"), "decision_state");
    lookup(states, s.decision_state, "decision_state");
  }
  if (j.contains("default_action")) {
    s.default_action = text(j.at("default_action"), "default_action");
    lookup(actions, s.default_action, "default_action");
  }
  if (j.contains("notes")) {
    if (!j.at("notes").is_array()) fail("notes", "expected an array of strings");
    for (std::size_t i = 0; i < j.at("notes").size(); ++i)
      s.notes.push_back(text(j.at("notes")[i], "notes[" + std::to_string(i) + "]"));
  }
  try {
    s.validate();
  } catch (const std::exception& e) {
    fail("scenario", e.what());
  }
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioParseError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::string scenario_to_json(const Scenario& s) {
  json j;
  j["format_version"] = kScenarioFormatVersion;
  j["name"] = s.name;
  j["states"] = s.mdp.states;
  j["actions"] = s.mdp.actions;
  json tr = json::array();
  for (int a = 0; a < s.mdp.num_actions(); ++a)
    for (int from = 0; from < s.mdp.num_states(); ++from)
      for (int to = 0; to < s.mdp.num_states(); ++to)
        if (s.mdp.transition[a](from, to) > 0)
          tr.push_back({{"from", s.mdp.states[from]}, {"action", s.mdp.actions[a]}, {"to", s.mdp.states[to]},
                        {"prob", s.mdp.transition[a](from, to)}});
  j["transitions"] = tr;
  json init = json::object(), rew = json::object(), obs = json::object();
  for (int st = 0; st < s.mdp.num_states(); ++st) {
    if (s.mdp.initial(st) > 0) init[s.mdp.states[st]] = s.mdp.initial(st);
    rew[s.mdp.states[st]] = s.mdp.reward(st);
    if (s.obs.deterministic()) {
      obs[s.mdp.states[st]] = s.obs.observations[s.obs.observation_map()[st]];
    } else {
      json row = json::object();
      for (int o = 0; o < s.obs.num_observations(); ++o)
        if (s.obs.kernel(st, o) > 0) row[s.obs.observations[o]] = s.obs.kernel(st, o);
      obs[s.mdp.states[st]] = row;
    }
  }
  j["initial"] = init;
  j["rewards"] = rew;
  j["gamma"] = s.mdp.gamma;
  j["horizon"] = s.mdp.horizon;
  j["observations"] = obs;
  json rows = json::object();
  for (int o = 0; o < s.space.size(); ++o) {
    json row = json::object();
    for (Eigen::Index k = 0; k < s.belief.cols(); ++k)
      if (s.belief(o, k) != 0) row[s.sequence(static_cast<int>(k))] = s.belief(o, k);
    rows[observation_sequence_name(s.obs, s.space.sequences[o])] = row;
  }
  j["belief"] = {{"form", "explicit"}, {"rows", rows}};
  j["beta"] = s.beta;
  if (!s.decision_state.empty()) j["decision_state"] = s.decision_state;
  if (!s.default_action.empty()) j["default_action"] = s.default_action;
  if (!s.notes.empty()) j["notes"] = s.notes;
  return j.dump(2) + "\n";
}

std::string reward_table_json(const Mdp& mdp, const Vec& reward) {
  json j;
  j["format_version"] = kScenarioFormatVersion;
  json rew = json::object();
  for (int st = 0; st < mdp.num_states(); ++st) rew[mdp.states[st]] = reward(st);
  j["rewards"] = rew;
  return j.dump(2) + "\n";
}

Scenario load_scenario_ref(const std::string& ref, const std::map<std::string, double>& overrides) {
  std::error_code ec;
  if (std::filesystem::is_regular_file(ref, ec)) {
    if (!overrides.empty()) throw std::invalid_argument("parameter overrides apply only to named scenarios");
    return load_scenario_file(ref);
  }
  return resolve_scenario(ref, overrides);
}

}  // namespace porlhf
