#include <cmath>
#include <set>
#include <string>

#include <json.hpp>

#include "qball/error.hpp"
#include "qball/experiments.hpp"

namespace qball {

using nlohmann::json;

namespace {

struct KindName {
  ScenarioKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {ScenarioKind::RestRelease, "rest_release"},
    {ScenarioKind::BarrierScatter, "barrier_scatter"},
    {ScenarioKind::HoleScatter, "hole_scatter"},
    {ScenarioKind::CriticalVelocitySearch, "critical_velocity"},
    {ScenarioKind::ImpactParameterSweep, "impact_sweep"},
    {ScenarioKind::TwoHoleSymmetric, "two_hole"},
    {ScenarioKind::StabilityCurves, "stability"},
};

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorKind::Config, what);
}

// Reads a number or a list of numbers.
std::vector<double> number_list(const json& v, const std::string& key) {
  if (v.is_number()) return {v.get<double>()};
  if (!v.is_array()) config_error("'" + key + "' must be a number or a list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) config_error("'" + key + "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

double number(const json& v, const std::string& key) {
  if (!v.is_number()) config_error("'" + key + "' must be a number");
  return v.get<double>();
}

std::size_t count(const json& v, const std::string& key) {
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    config_error("'" + key + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

bool boolean(const json& v, const std::string& key) {
  if (!v.is_boolean()) config_error("'" + key + "' must be true or false");
  return v.get<bool>();
}

// Walks the keys of an object, rejecting unknown ones.
template <class F>
void each_key(const json& obj, const std::string& where,
              std::initializer_list<const char*> allowed, F&& f) {
  if (!obj.is_object()) config_error("'" + where + "' must be an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : obj.items()) {
    if (!ok.count(k)) {
      config_error("unknown key '" + k + "'" +
                   (where.empty() ? "" : " in '" + where + "'"));
    }
    f(k, v);
  }
}

json list_or_scalar(const std::vector<double>& v) {
  if (v.size() == 1) return v.front();
  return v;
}

}  // namespace

std::string to_string(ScenarioKind kind) {
  for (const auto& k : kKindNames) {
    if (k.kind == kind) return k.name;
  }
  return "unknown";
}

ScenarioKind scenario_kind_from_string(std::string_view name) {
  for (const auto& k : kKindNames) {
    if (name == k.name) return k.kind;
  }
  std::string known;
  for (const auto& k : kKindNames) known += std::string(known.empty() ? "" : ", ") + k.name;
  config_error("unknown scenario kind '" + std::string(name) + "' (expected one of " +
               known + ")");
}

ScenarioConfig default_config(ScenarioKind kind, int dim) {
  if (dim != 1 && dim != 2) config_error("dim must be 1 or 2");
  ScenarioConfig c;
  c.kind = kind;
  c.name = to_string(kind);
  c.dim = dim;
  c.grid = dim == 1 ? Grid::default_1d() : Grid::default_2d();
  c.absorber = AbsorberSpec::default_for(dim);
  c.t_end = dim == 1 ? 400.0 : 250.0;
  c.x0 = dim == 1 ? -20.0 : -9.0;
  switch (kind) {
    case ScenarioKind::RestRelease:
      c.velocities = {0.0};
      c.x0 = dim == 1 ? -15.0 : -9.0;
      c.t_end = 200.0;
      c.early_stop = false;
      break;
    case ScenarioKind::BarrierScatter:
      c.lambda0s = {0.01};
      break;
    case ScenarioKind::HoleScatter:
      c.omegas = {1.5};
      c.velocities = {0.023, 0.025};
      c.lambda0s = {-0.1};
      if (dim == 1) {
        c.x0 = -15.0;
        c.t_end = 1500.0;
      }
      break;
    case ScenarioKind::CriticalVelocitySearch:
      c.velocities.clear();
      break;
    case ScenarioKind::ImpactParameterSweep:
      c.omegas = {1.75};
      c.lambda0s = {0.9};
      c.impacts = {0, 3, 4, 5, 6, 7, 8, 10};
      c.early_stop = false;
      break;
    case ScenarioKind::TwoHoleSymmetric:
      c.omegas = {1.6};
      c.lambda0s = {-0.9};
      c.impacts = {11.5};
      c.early_stop = false;
      break;
    case ScenarioKind::StabilityCurves:
      c.omegas.clear();
      for (int i = 0; i <= 57; ++i) c.omegas.push_back(1.42 + 0.01 * i);
      c.velocities = {0.0, 0.1, 0.2, 0.3};
      c.lambdas = {1.0};
      break;
  }
  return c;
}

void ScenarioConfig::validate() const {
  if (dim != 1 && dim != 2) config_error("dim must be 1 or 2");
  if (grid.dim != dim) config_error("grid dimension does not match dim");
  grid.validate();
  if (omegas.empty()) config_error("omega list is empty");
  if (kind == ScenarioKind::StabilityCurves) {
    if (velocities.empty()) config_error("u list is empty");
    if (lambdas.empty()) config_error("lambda list is empty");
    for (double l : lambdas) {
      if (!(l > 0.0)) config_error("lambda values must be positive");
    }
    for (double w : omegas) require_existence(w);
    return;
  }
  if (kind != ScenarioKind::CriticalVelocitySearch && velocities.empty()) {
    config_error("u list is empty");
  }
  if (lambda0s.empty()) config_error("lambda0 list is empty");
  if (impacts.empty()) config_error("impact list is empty");
  if (!(t_end > 0.0)) config_error("t_end must be positive");
  if (!(observe_every > 0.0)) config_error("observe_every must be positive");
  if (threads == 0) config_error("threads must be at least 1");
  for (double w : omegas) require_existence(w);
  for (double u : velocities) {
    if (!(std::abs(u) < 1.0)) config_error("launch speeds must satisfy |u| < 1");
  }
  for (double l : lambda0s) {
    if (!(l > -1.0)) config_error("lambda0 must exceed -1");
  }
  if (dim == 1 && !(region_lo < region_hi)) {
    config_error("obstruction interval needs region_lo < region_hi");
  }
  if (dim == 2 && !(radius > 0.0)) config_error("disk radius must be positive");
  if ((kind == ScenarioKind::ImpactParameterSweep ||
       kind == ScenarioKind::TwoHoleSymmetric) &&
      dim != 2) {
    config_error(to_string(kind) + " needs dim = 2");
  }
  if (kind == ScenarioKind::CriticalVelocitySearch) {
    if (!(0.0 <= u_lo && u_lo < u_hi && u_hi < 1.0)) {
      config_error("critical velocity bracket needs 0 <= u_lo < u_hi < 1");
    }
    if (!(tolerance > 0.0)) config_error("bisection tolerance must be positive");
  }
}

ScenarioConfig config_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    config_error(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) config_error("config must be a JSON object");

  ScenarioKind kind = ScenarioKind::BarrierScatter;
  int dim = 1;
  if (doc.contains("kind")) {
    if (!doc["kind"].is_string()) config_error("'kind' must be a string");
    kind = scenario_kind_from_string(doc["kind"].get<std::string>());
  }
  if (doc.contains("dim")) dim = static_cast<int>(count(doc["dim"], "dim"));
  ScenarioConfig c = default_config(kind, dim);

  each_key(doc, "",
           {"kind", "dim", "name", "omega", "u", "lambda0", "impact", "lambda",
            "x0", "y0", "region_lo", "region_hi", "radius", "center_x", "grid",
            "absorber", "t_end", "observe_every", "threads", "early_stop",
            "search", "tracker", "classify", "deflection", "shoot", "out_dir",
            "write_csv", "schema"},
           [&](const std::string& k, const json& v) {
             if (k == "kind" || k == "dim" || k == "schema") return;
             if (k == "name") {
               if (!v.is_string()) config_error("'name' must be a string");
               c.name = v.get<std::string>();
             } else if (k == "omega") c.omegas = number_list(v, k);
             else if (k == "u") c.velocities = number_list(v, k);
             else if (k == "lambda0") c.lambda0s = number_list(v, k);
             else if (k == "impact") c.impacts = number_list(v, k);
             else if (k == "lambda") c.lambdas = number_list(v, k);
             else if (k == "x0") c.x0 = number(v, k);
             else if (k == "y0") c.y0 = number(v, k);
             else if (k == "region_lo") c.region_lo = number(v, k);
             else if (k == "region_hi") c.region_hi = number(v, k);
             else if (k == "radius") c.radius = number(v, k);
             else if (k == "center_x") c.center_x = number(v, k);
             else if (k == "t_end") c.t_end = number(v, k);
             else if (k == "observe_every") c.observe_every = number(v, k);
             else if (k == "threads") c.threads = static_cast<unsigned>(count(v, k));
             else if (k == "early_stop") c.early_stop = boolean(v, k);
             else if (k == "write_csv") c.write_csv = boolean(v, k);
             else if (k == "out_dir") {
               if (!v.is_string()) config_error("'out_dir' must be a string");
               c.out_dir = v.get<std::string>();
             } else if (k == "grid") {
               each_key(v, k, {"nx", "ny", "dx", "dy", "dt"},
                        [&](const std::string& g, const json& gv) {
                          if (g == "nx") c.grid.nx = count(gv, g);
                          else if (g == "ny") c.grid.ny = count(gv, g);
                          else if (g == "dx") c.grid.dx = number(gv, g);
                          else if (g == "dy") c.grid.dy = number(gv, g);
                          else c.grid.dt = number(gv, g);
                        });
             } else if (k == "absorber") {
               each_key(v, k, {"width", "sigma_max", "field_damping"},
                        [&](const std::string& a, const json& av) {
                          if (a == "width") c.absorber.width = number(av, a);
                          else if (a == "sigma_max") c.absorber.sigma_max = number(av, a);
                          else c.absorber.field_damping = number(av, a);
                        });
             } else if (k == "search") {
               each_key(v, k, {"u_lo", "u_hi", "tolerance"},
                        [&](const std::string& s, const json& sv) {
                          if (s == "u_lo") c.u_lo = number(sv, s);
                          else if (s == "u_hi") c.u_hi = number(sv, s);
                          else c.tolerance = number(sv, s);
                        });
             } else if (k == "tracker") {
               each_key(v, k,
                        {"centroid_threshold", "blob_threshold", "blob_min_cells",
                         "velocity_window"},
                        [&](const std::string& s, const json& sv) {
                          if (s == "centroid_threshold") c.tracker.centroid_threshold = number(sv, s);
                          else if (s == "blob_threshold") c.tracker.blob_threshold = number(sv, s);
                          else if (s == "blob_min_cells") c.tracker.blob_min_cells = count(sv, s);
                          else c.tracker.velocity_window = count(sv, s);
                        });
             } else if (k == "classify") {
               each_key(v, k, {"margin", "persistence"},
                        [&](const std::string& s, const json& sv) {
                          if (s == "margin") c.classify.margin = number(sv, s);
                          else c.classify.persistence = count(sv, s);
                        });
             } else if (k == "deflection") {
               each_key(v, k, {"free_radius", "edge_margin", "min_samples"},
                        [&](const std::string& s, const json& sv) {
                          if (s == "free_radius") c.deflection.free_radius = number(sv, s);
                          else if (s == "edge_margin") c.deflection.edge_margin = number(sv, s);
                          else c.deflection.min_samples = count(sv, s);
                        });
             } else if (k == "shoot") {
               each_key(v, k, {"r_max", "dr", "tol"},
                        [&](const std::string& s, const json& sv) {
                          if (s == "r_max") c.shoot.r_max = number(sv, s);
                          else if (s == "dr") c.shoot.dr = number(sv, s);
                          else c.shoot.tol = number(sv, s);
                        });
             }
           });
  c.validate();
  return c;
}

std::string config_to_json(const ScenarioConfig& c, int indent) {
  json j;
  j["schema"] = "qball-scenario/1";
  j["kind"] = to_string(c.kind);
  j["name"] = c.name;
  j["dim"] = c.dim;
  j["omega"] = list_or_scalar(c.omegas);
  j["u"] = list_or_scalar(c.velocities);
  j["lambda0"] = list_or_scalar(c.lambda0s);
  j["impact"] = list_or_scalar(c.impacts);
  j["lambda"] = list_or_scalar(c.lambdas);
  j["x0"] = c.x0;
  j["y0"] = c.y0;
  j["region_lo"] = c.region_lo;
  j["region_hi"] = c.region_hi;
  j["radius"] = c.radius;
  j["center_x"] = c.center_x;
  j["grid"] = {{"nx", c.grid.nx}, {"ny", c.grid.ny}, {"dx", c.grid.dx},
               {"dy", c.grid.dy}, {"dt", c.grid.dt}};
  j["absorber"] = {{"width", c.absorber.width},
                   {"sigma_max", c.absorber.sigma_max},
                   {"field_damping", c.absorber.field_damping}};
  j["t_end"] = c.t_end;
  j["observe_every"] = c.observe_every;
  j["threads"] = c.threads;
  j["early_stop"] = c.early_stop;
  j["search"] = {{"u_lo", c.u_lo}, {"u_hi", c.u_hi}, {"tolerance", c.tolerance}};
  j["tracker"] = {{"centroid_threshold", c.tracker.centroid_threshold},
                  {"blob_threshold", c.tracker.blob_threshold},
                  {"blob_min_cells", c.tracker.blob_min_cells},
                  {"velocity_window", c.tracker.velocity_window}};
  j["classify"] = {{"margin", c.classify.margin},
                   {"persistence", c.classify.persistence}};
  json d = {{"edge_margin", c.deflection.edge_margin},
            {"min_samples", c.deflection.min_samples}};
  if (c.deflection.free_radius) d["free_radius"] = *c.deflection.free_radius;
  j["deflection"] = d;
  j["shoot"] = {{"r_max", c.shoot.r_max}, {"dr", c.shoot.dr}, {"tol", c.shoot.tol}};
  j["out_dir"] = c.out_dir;
  j["write_csv"] = c.write_csv;
  return j.dump(indent);
}

}  // namespace qball
