#include "flock/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "flock/errors.hpp"

namespace flock {

using nlohmann::json;

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"", {"mode", "params", "initial", "noise", "run", "output"}},
    {"params", {"k", "K", "alpha", "h", "nu"}},
    {"initial", {"kind", "positions", "velocities", "x_dissimilarity", "v_dissimilarity"}},
    {"noise", {"kind", "r", "sigma", "delta", "dt_w"}},
    {"run",
     {"seed", "trials", "confidence", "variant", "chi_variant", "workers", "max_steps", "T",
      "dt", "record_fiedler"}},
    {"output", {"trajectory_csv", "trials_csv", "noise_csv", "states_jsonl"}},
};

void reject_unknown_keys(const json& doc, const std::string& scope) {
  const auto it = kSchema.find(scope);
  if (it == kSchema.end()) return;
  for (const auto& [key, value] : doc.items()) {
    if (!it->second.count(key)) {
      throw config_error("config: unknown key '" + (scope.empty() ? key : scope + "." + key) +
                         "'");
    }
    if (value.is_object()) reject_unknown_keys(value, scope.empty() ? key : key);
  }
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double require_number(const json& j, const std::string& path) {
  if (!j.is_number()) throw config_error("config: '" + path + "' must be a number");
  return j.get<double>();
}

std::int64_t require_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw config_error("config: '" + path + "' must be an integer");
  return j.get<std::int64_t>();
}

bool require_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) throw config_error("config: '" + path + "' must be a boolean");
  return j.get<bool>();
}

std::string require_string(const json& j, const std::string& path) {
  if (!j.is_string()) throw config_error("config: '" + path + "' must be a string");
  return j.get<std::string>();
}

AgentVector parse_agent_vector(const json& j, const std::string& path, int k) {
  if (!j.is_array()) throw config_error("config: '" + path + "' must be an array");
  if (static_cast<int>(j.size()) != k)
    throw config_error("config: '" + path + "' must hold params.k entries");
  AgentVector v;
  v.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_array() || e.size() != 3)
      throw config_error("config: entries of '" + path + "' must be [x, y, z]");
    v.push_back({e[0].get<double>(), e[1].get<double>(), e[2].get<double>()});
  }
  return v;
}

// Zero-mean direction with the requested dissimilarity norm.
AgentVector sampled_component(int k, double target, Rng& rng) {
  AgentVector v(static_cast<std::size_t>(k));
  if (target == 0.0) return v;
  double dis = 0.0;
  do {
    for (Vec3& vi : v) vi = {rng.normal(), rng.normal(), rng.normal()};
    v = project_perp(v);
    dis = norm(v);
  } while (dis == 0.0);
  const double scale = target / dis;
  for (Vec3& vi : v) vi *= scale;
  return v;
}

json vec_to_json(const AgentVector& v) {
  json a = json::array();
  for (const Vec3& vi : v) a.push_back(json::array({vi.x, vi.y, vi.z}));
  return a;
}

}  // namespace

const char* to_string(Mode mode) {
  return mode == Mode::Discrete ? "discrete" : "continuous";
}
const char* to_string(RateVariant v) { return v == RateVariant::Paper ? "paper" : "derived"; }
const char* to_string(ChiVariant v) { return v == ChiVariant::Paper ? "paper" : "standard"; }
const char* to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::None: return "none";
    case NoiseKind::UniformBall: return "uniform_ball";
    case NoiseKind::GaussianIID: return "gaussian";
    case NoiseKind::SmoothedWiener: return "smoothed_wiener";
  }
  return "none";
}

json parse_config_text(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    json doc = json::parse(text);
    if (doc.contains("command") && doc.contains("config")) return doc["config"];
    return doc;
  }

  // Flat form: one `dotted.key = value` per line, # starts a comment,
  // values use JSON syntax with bare words read as strings.
  json doc = json::object();
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw config_error("config: line " + std::to_string(lineno) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty() || raw.empty())
      throw config_error("config: line " + std::to_string(lineno) + " is not 'key = value'");

    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;  // bare word
    }

    json* node = &doc;
    std::size_t pos = 0;
    for (;;) {
      const auto dot = key.find('.', pos);
      const std::string part = key.substr(pos, dot == std::string::npos ? dot : dot - pos);
      if (part.empty())
        throw config_error("config: line " + std::to_string(lineno) + " has an empty key part");
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      node = &((*node)[part]);
      pos = dot + 1;
    }
  }
  return doc;
}

RunConfig parse_config(const json& doc, const ConfigOverrides& ov) {
  if (!doc.is_object()) throw config_error("config: document must be an object");
  reject_unknown_keys(doc, "");

  RunConfig cfg;

  if (!doc.contains("mode")) throw config_error("config: 'mode' is required");
  const std::string mode = require_string(doc["mode"], "mode");
  if (mode == "discrete")
    cfg.mode = Mode::Discrete;
  else if (mode == "continuous")
    cfg.mode = Mode::Continuous;
  else
    throw config_error("config: 'mode' must be 'discrete' or 'continuous'");

  if (!doc.contains("params") || !doc["params"].is_object())
    throw config_error("config: 'params' object is required");
  const json& jp = doc["params"];
  for (const char* key : {"k", "K", "alpha", "nu"})
    if (!jp.contains(key))
      throw config_error(std::string("config: 'params.") + key + "' is required");
  cfg.params.k = static_cast<int>(require_integer(jp["k"], "params.k"));
  cfg.params.K = require_number(jp["K"], "params.K");
  cfg.params.alpha = require_number(jp["alpha"], "params.alpha");
  cfg.params.nu = require_number(jp["nu"], "params.nu");
  if (jp.contains("h")) cfg.params.h = require_number(jp["h"], "params.h");
  if (cfg.mode == Mode::Discrete && !(cfg.params.h > 0.0))
    throw config_error("config: 'params.h' is required and positive in discrete mode");
  cfg.params.validate(cfg.mode);

  if (!doc.contains("run") || !doc["run"].is_object() || !doc["run"].contains("seed"))
    throw config_error("config: 'run.seed' is required (runs must be reproducible)");
  const json& jr = doc["run"];
  cfg.seed = jr["seed"].get<std::uint64_t>();
  if (ov.seed) cfg.seed = *ov.seed;
  if (jr.contains("trials")) {
    cfg.trials = require_integer(jr["trials"], "run.trials");
    if (cfg.trials < 1) throw config_error("config: 'run.trials' must be >= 1");
  }
  if (jr.contains("confidence")) {
    cfg.confidence = require_number(jr["confidence"], "run.confidence");
    if (!(cfg.confidence > 0.0 && cfg.confidence < 1.0))
      throw config_error("config: 'run.confidence' must lie in (0, 1)");
  }
  if (jr.contains("variant")) {
    const std::string v = require_string(jr["variant"], "run.variant");
    if (v == "paper")
      cfg.variant = RateVariant::Paper;
    else if (v == "derived")
      cfg.variant = RateVariant::Derived;
    else
      throw config_error("config: 'run.variant' must be 'paper' or 'derived'");
  }
  if (ov.variant) cfg.variant = *ov.variant;
  if (jr.contains("chi_variant")) {
    const std::string v = require_string(jr["chi_variant"], "run.chi_variant");
    if (v == "paper")
      cfg.chi_variant = ChiVariant::Paper;
    else if (v == "standard")
      cfg.chi_variant = ChiVariant::Standard;
    else
      throw config_error("config: 'run.chi_variant' must be 'paper' or 'standard'");
  }
  if (jr.contains("workers")) {
    cfg.workers = static_cast<int>(require_integer(jr["workers"], "run.workers"));
    if (cfg.workers < 1) throw config_error("config: 'run.workers' must be >= 1");
  }
  if (ov.workers) cfg.workers = *ov.workers;
  if (jr.contains("max_steps")) {
    cfg.max_steps = require_integer(jr["max_steps"], "run.max_steps");
    if (cfg.max_steps < 0) throw config_error("config: 'run.max_steps' must be >= 0");
  }
  if (jr.contains("T")) {
    cfg.T = require_number(jr["T"], "run.T");
    if (cfg.T < 0.0) throw config_error("config: 'run.T' must be >= 0");
  }
  if (jr.contains("dt")) {
    cfg.dt = require_number(jr["dt"], "run.dt");
    if (cfg.dt < 0.0) throw config_error("config: 'run.dt' must be >= 0");
  }
  if (jr.contains("record_fiedler"))
    cfg.record_fiedler = require_bool(jr["record_fiedler"], "run.record_fiedler");

  if (!doc.contains("initial") || !doc["initial"].is_object())
    throw config_error("config: 'initial' object is required");
  const json& ji = doc["initial"];
  const std::string kind =
      ji.contains("kind") ? require_string(ji["kind"], "initial.kind") : "explicit";
  if (kind == "explicit") {
    if (!ji.contains("positions") || !ji.contains("velocities"))
      throw config_error("config: explicit initial state needs positions and velocities");
    cfg.initial.positions = parse_agent_vector(ji["positions"], "initial.positions",
                                               cfg.params.k);
    cfg.initial.velocities = parse_agent_vector(ji["velocities"], "initial.velocities",
                                                cfg.params.k);
  } else if (kind == "sampled") {
    const double x_dis = ji.contains("x_dissimilarity")
                             ? require_number(ji["x_dissimilarity"], "initial.x_dissimilarity")
                             : 0.0;
    const double v_dis = ji.contains("v_dissimilarity")
                             ? require_number(ji["v_dissimilarity"], "initial.v_dissimilarity")
                             : 0.0;
    if (x_dis < 0.0 || v_dis < 0.0)
      throw config_error("config: initial dissimilarities must be nonnegative");
    Rng rng = derive_stream(cfg.seed, 0x494E4954 /* initial-state stream */, 0, 0);
    cfg.initial.positions = sampled_component(cfg.params.k, x_dis, rng);
    cfg.initial.velocities = sampled_component(cfg.params.k, v_dis, rng);
  } else {
    throw config_error("config: 'initial.kind' must be 'explicit' or 'sampled'");
  }
  cfg.initial.time = 0.0;

  if (!doc.contains("noise") || !doc["noise"].is_object() || !doc["noise"].contains("kind"))
    throw config_error("config: 'noise.kind' is required");
  const json& jn = doc["noise"];
  const std::string nk = require_string(jn["kind"], "noise.kind");
  const auto forbid = [&](const char* key) {
    if (jn.contains(key))
      throw config_error(std::string("config: 'noise.") + key + "' does not apply to noise '" +
                         nk + "'");
  };
  if (nk == "none") {
    forbid("r");
    forbid("sigma");
    forbid("delta");
    forbid("dt_w");
    cfg.noise = NoiseModel::none();
  } else if (nk == "uniform_ball") {
    forbid("sigma");
    forbid("delta");
    forbid("dt_w");
    if (!jn.contains("r")) throw config_error("config: 'noise.r' is required");
    cfg.noise = NoiseModel::uniform_ball(require_number(jn["r"], "noise.r"));
  } else if (nk == "gaussian") {
    forbid("r");
    forbid("delta");
    forbid("dt_w");
    if (!jn.contains("sigma")) throw config_error("config: 'noise.sigma' is required");
    cfg.noise = NoiseModel::gaussian(require_number(jn["sigma"], "noise.sigma"));
  } else if (nk == "smoothed_wiener") {
    forbid("r");
    if (!jn.contains("sigma") || !jn.contains("delta"))
      throw config_error("config: smoothed_wiener noise needs sigma and delta");
    const double dt_w = jn.contains("dt_w") ? require_number(jn["dt_w"], "noise.dt_w") : 0.0;
    cfg.noise = NoiseModel::smoothed_wiener(require_number(jn["sigma"], "noise.sigma"),
                                            require_number(jn["delta"], "noise.delta"), dt_w);
  } else {
    throw config_error("config: unknown noise kind '" + nk + "'");
  }

  if (cfg.mode == Mode::Discrete && cfg.noise.kind == NoiseKind::SmoothedWiener)
    throw config_error("config: smoothed_wiener noise drives the continuous system");
  if (cfg.mode == Mode::Continuous &&
      (cfg.noise.kind == NoiseKind::UniformBall || cfg.noise.kind == NoiseKind::GaussianIID))
    throw config_error("config: per-step noise drives the discrete system");

  if (doc.contains("output")) {
    const json& jo = doc["output"];
    if (jo.contains("trajectory_csv"))
      cfg.output.trajectory_csv = require_bool(jo["trajectory_csv"], "output.trajectory_csv");
    if (jo.contains("trials_csv"))
      cfg.output.trials_csv = require_bool(jo["trials_csv"], "output.trials_csv");
    if (jo.contains("noise_csv"))
      cfg.output.noise_csv = require_bool(jo["noise_csv"], "output.noise_csv");
    if (jo.contains("states_jsonl"))
      cfg.output.states_jsonl = require_bool(jo["states_jsonl"], "output.states_jsonl");
  }

  return cfg;
}

RunConfig load_config(const std::string& path, const ConfigOverrides& ov) {
  std::ifstream in(path);
  if (!in) throw config_error("config: cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(parse_config_text(buf.str()), ov);
}

json RunConfig::to_json() const {
  json j;
  j["mode"] = to_string(mode);
  j["params"] = {{"k", params.k}, {"K", params.K}, {"alpha", params.alpha},
                 {"h", params.h}, {"nu", params.nu}};
  j["initial"] = {{"kind", "explicit"},
                  {"positions", vec_to_json(initial.positions)},
                  {"velocities", vec_to_json(initial.velocities)}};
  json jn;
  jn["kind"] = to_string(noise.kind);
  switch (noise.kind) {
    case NoiseKind::None:
      break;
    case NoiseKind::UniformBall:
      jn["r"] = noise.r;
      break;
    case NoiseKind::GaussianIID:
      jn["sigma"] = noise.sigma;
      break;
    case NoiseKind::SmoothedWiener:
      jn["sigma"] = noise.sigma;
      jn["delta"] = noise.delta;
      jn["dt_w"] = noise.grid_step();
      break;
  }
  j["noise"] = jn;
  j["run"] = {{"seed", seed},
              {"trials", trials},
              {"confidence", confidence},
              {"variant", to_string(variant)},
              {"chi_variant", to_string(chi_variant)},
              {"workers", workers},
              {"max_steps", max_steps},
              {"T", T},
              {"dt", dt},
              {"record_fiedler", record_fiedler}};
  j["output"] = {{"trajectory_csv", output.trajectory_csv},
                 {"trials_csv", output.trials_csv},
                 {"noise_csv", output.noise_csv},
                 {"states_jsonl", output.states_jsonl}};
  return j;
}

ExperimentSpec RunConfig::experiment_spec() const {
  ExperimentSpec spec;
  spec.params = params;
  spec.initial = initial;
  spec.mode = mode;
  spec.noise = noise;
  spec.trials = trials;
  spec.seed = seed;
  spec.confidence = confidence;
  spec.variant = variant;
  spec.chi_variant = chi_variant;
  spec.workers = workers;
  spec.dt = dt;
  spec.horizon_override =
      mode == Mode::Discrete ? static_cast<double>(max_steps) : T;
  spec.record_fiedler = record_fiedler;
  return spec;
}

}  // namespace flock
