#include "iptvq/scenario_io.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "iptvq/presets.hpp"

namespace iptvq {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ValidationError(path + ": " + message);
}

const json& member(const json& object, const std::string& key, const std::string& path) {
  if (!object.is_object()) fail(path, "expected an object");
  const auto it = object.find(key);
  if (it == object.end()) fail(path + "." + key, "missing");
  return *it;
}

double number(const json& value, const std::string& path) {
  if (!value.is_number()) fail(path, "expected a number");
  const double x = value.get<double>();
  if (!std::isfinite(x)) fail(path, "must be finite");
  return x;
}

double number_at(const json& object, const std::string& key, const std::string& path) {
  return number(member(object, key, path), path + "." + key);
}

std::string text_at(const json& object, const std::string& key, const std::string& path) {
  const auto& value = member(object, key, path);
  if (!value.is_string()) fail(path + "." + key, "expected a string");
  return value.get<std::string>();
}

std::vector<McsClass> parse_mcs(const json& doc) {
  const auto& list = member(doc, "mcs", "$");
  if (!list.is_array() || list.empty()) fail("$.mcs", "expected a non-empty array");
  std::vector<McsClass> mcs;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string path = "$.mcs[" + std::to_string(i) + "]";
    McsClass c;
    if (list[i].contains("label")) c.label = text_at(list[i], "label", path);
    const double slots = number_at(list[i], "slots", path);
    if (slots != std::floor(slots) || slots < 1) fail(path + ".slots", "expected a positive integer");
    c.slots = static_cast<int>(slots);
    c.area_fraction = number_at(list[i], "area_fraction", path);
    if (!(c.area_fraction > 0 && c.area_fraction <= 1)) fail(path + ".area_fraction", "must lie in (0, 1]");
    mcs.push_back(std::move(c));
  }
  try {
    return normalize_area_fractions(std::move(mcs));
  } catch (const ValidationError& e) {
    fail("$.mcs", e.what());
  }
}

TransitionRates parse_rates(const json& value, int zones, const std::string& path) {
  if (!value.is_array() || static_cast<int>(value.size()) != zones) {
    fail(path, "expected " + std::to_string(zones) + " rows");
  }
  TransitionRates rates(zones);
  for (int i = 1; i <= zones; ++i) {
    const auto& row = value[i - 1];
    const std::string row_path = path + "[" + std::to_string(i - 1) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != zones + 1) {
      fail(row_path, "expected " + std::to_string(zones + 1) + " entries");
    }
    for (int j = 0; j <= zones; ++j) {
      const std::string cell = row_path + "[" + std::to_string(j) + "]";
      const double v = number(row[j], cell);
      if (j == i) {
        if (v != 0) fail(cell, "self transition must be 0");
        continue;
      }
      try {
        rates.set(i, j, v);
      } catch (const std::exception& e) {
        fail(cell, e.what());
      }
    }
  }
  return rates;
}

const char* model_name(MobilityModel model) {
  switch (model) {
    case MobilityModel::kNone: return "none";
    case MobilityModel::kMarkov: return "markov";
    case MobilityModel::kRandomWalk: return "random_walk";
    case MobilityModel::kExplicit: return "explicit";
  }
  return "none";
}

}  // namespace

int capacity_slots_for(double k_connections, const std::vector<McsClass>& mcs) {
  const double slots = k_connections * mcs.front().slots;
  const double rounded = std::round(slots);
  if (!(k_connections >= 0) || std::abs(slots - rounded) > 1e-9 * std::max(1.0, slots)) {
    throw ValidationError("K = " + std::to_string(k_connections) +
                          " is not a whole number of slots");
  }
  return static_cast<int>(rounded);
}

ScenarioDocument parse_scenario(const json& doc) {
  auto mcs = parse_mcs(doc);
  const int zones = static_cast<int>(mcs.size());

  const auto& traffic = member(doc, "traffic", "$");
  const double lambda = number_at(traffic, "lambda", "$.traffic");
  if (!(lambda >= 0)) fail("$.traffic.lambda", "must be nonnegative");
  const double watch = number_at(traffic, "mean_watch_minutes", "$.traffic");
  if (!(watch > 0)) fail("$.traffic.mean_watch_minutes", "must be positive");

  const auto& capacity = member(doc, "capacity", "$");
  const bool has_k = capacity.is_object() && capacity.contains("K_connections");
  const bool has_slots = capacity.is_object() && capacity.contains("K_slots");
  if (has_k == has_slots) fail("$.capacity", "give exactly one of K_connections and K_slots");
  int capacity_slots;
  if (has_slots) {
    const double k = number_at(capacity, "K_slots", "$.capacity");
    if (k != std::floor(k) || k < 0) fail("$.capacity.K_slots", "expected a nonnegative integer");
    capacity_slots = static_cast<int>(k);
  } else {
    try {
      capacity_slots = capacity_slots_for(number_at(capacity, "K_connections", "$.capacity"), mcs);
    } catch (const ValidationError& e) {
      fail("$.capacity.K_connections", e.what());
    }
  }

  MobilityModel model = MobilityModel::kNone;
  MobilitySpec mobility = NoMobility{};
  RandomWalkEngine walk;
  if (doc.contains("mobility")) {
    const auto& section = doc["mobility"];
    const std::string name = text_at(section, "model", "$.mobility");
    if (name == "none") {
      model = MobilityModel::kNone;
    } else if (name == "markov") {
      model = MobilityModel::kMarkov;
      const double w = number_at(section, "w_minutes", "$.mobility");
      if (!(w > 0)) fail("$.mobility.w_minutes", "must be positive");
      mobility = MarkovSojourn{w};
    } else if (name == "random_walk") {
      model = MobilityModel::kRandomWalk;
      if (section.contains("d")) walk.step_distance = number_at(section, "d", "$.mobility");
      if (section.contains("f_per_second")) {
        walk.speed_per_second = number_at(section, "f_per_second", "$.mobility");
      }
      if (!(walk.step_distance > 0)) fail("$.mobility.d", "must be positive");
      if (!(walk.speed_per_second > 0)) fail("$.mobility.f_per_second", "must be positive");
    } else if (name == "explicit") {
      model = MobilityModel::kExplicit;
      mobility = ExplicitRates{parse_rates(member(section, "rates", "$.mobility"), zones,
                                           "$.mobility.rates")};
    } else {
      fail("$.mobility.model", "expected none, markov, random_walk or explicit");
    }
  }

  AlphaPolicy alpha = FittedAlpha{};
  if (doc.contains("alpha")) {
    const auto& section = doc["alpha"];
    const std::string policy = text_at(section, "policy", "$.alpha");
    if (policy == "fixed") {
      const double value = number_at(section, "value", "$.alpha");
      if (!(value >= 0 && value <= 1)) fail("$.alpha.value", "must lie in [0, 1]");
      alpha = FixedAlpha{value};
    } else if (policy != "fitted") {
      fail("$.alpha.policy", "expected fitted or fixed");
    }
  }

  std::optional<SweepSection> sweep;
  if (doc.contains("sweep")) {
    const auto& section = doc["sweep"];
    SweepSection s;
    const std::string parameter = text_at(section, "parameter", "$.sweep");
    if (parameter == "lambda") {
      s.parameter = SweepParameter::kLambda;
    } else if (parameter == "K") {
      s.parameter = SweepParameter::kCapacity;
    } else {
      fail("$.sweep.parameter", "expected lambda or K");
    }
    const auto& values = member(section, "values", "$.sweep");
    if (!values.is_array()) fail("$.sweep.values", "expected an array");
    for (std::size_t i = 0; i < values.size(); ++i) {
      const std::string path = "$.sweep.values[" + std::to_string(i) + "]";
      const double v = number(values[i], path);
      if (s.parameter == SweepParameter::kLambda && !(v >= 0)) fail(path, "must be nonnegative");
      if (s.parameter == SweepParameter::kCapacity) {
        try {
          capacity_slots_for(v, mcs);
        } catch (const ValidationError& e) {
          fail(path, e.what());
        }
      }
      s.values.push_back(v);
    }
    sweep = std::move(s);
  }

  try {
    return ScenarioDocument{CellScenario(std::move(mcs), capacity_slots, lambda, 1.0 / watch, mobility),
                            watch, model, walk, alpha, has_slots, std::move(sweep)};
  } catch (const ValidationError& e) {
    fail("$", e.what());
  }
}

ScenarioDocument parse_scenario_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return parse_scenario(doc);
}

ScenarioDocument load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open scenario file " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_scenario_text(buffer.str());
}

json to_json(const ScenarioDocument& document) {
  const auto& s = document.scenario;
  json doc;
  doc["mcs"] = json::array();
  for (const auto& c : s.mcs()) {
    doc["mcs"].push_back({{"label", c.label}, {"slots", c.slots}, {"area_fraction", c.area_fraction}});
  }
  doc["traffic"] = {{"lambda", s.lambda()}, {"mean_watch_minutes", document.mean_watch_minutes}};
  if (document.capacity_in_slots) {
    doc["capacity"] = {{"K_slots", s.capacity_slots()}};
  } else {
    doc["capacity"] = {{"K_connections", s.capacity_connections()}};
  }

  json mobility = {{"model", model_name(document.model)}};
  if (const auto* m = std::get_if<MarkovSojourn>(&s.mobility())) {
    mobility["w_minutes"] = m->mean_sojourn_minutes;
  } else if (const auto* e = std::get_if<ExplicitRates>(&s.mobility())) {
    json rows = json::array();
    for (int i = 1; i <= s.zones(); ++i) {
      json row = json::array();
      for (int j = 0; j <= s.zones(); ++j) row.push_back(j == i ? 0.0 : e->rates.at(i, j));
      rows.push_back(row);
    }
    mobility["rates"] = rows;
  }
  if (document.model == MobilityModel::kRandomWalk) {
    mobility["d"] = document.walk.step_distance;
    mobility["f_per_second"] = document.walk.speed_per_second;
  }
  doc["mobility"] = mobility;

  if (const auto* fixed = std::get_if<FixedAlpha>(&document.alpha)) {
    doc["alpha"] = {{"policy", "fixed"}, {"value", fixed->value}};
  } else {
    doc["alpha"] = {{"policy", "fitted"}};
  }
  if (document.sweep) {
    doc["sweep"] = {{"parameter", document.sweep->parameter == SweepParameter::kLambda ? "lambda" : "K"},
                    {"values", document.sweep->values}};
  }
  return doc;
}

std::string dump_scenario(const ScenarioDocument& document) { return to_json(document).dump(2) + "\n"; }

}  // namespace iptvq
