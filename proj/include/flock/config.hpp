#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "flock/montecarlo.hpp"

namespace flock {

struct OutputToggles {
  bool trajectory_csv = true;
  bool trials_csv = false;
  bool noise_csv = false;
  bool states_jsonl = false;
};

// A fully-resolved run description: defaults filled in, sampled initial
// states materialized. Reports embed to_json() of this object, so feeding a
// report back as --config reproduces the run exactly.
struct RunConfig {
  Mode mode = Mode::Discrete;
  ModelParams params;
  FlockState initial;
  NoiseModel noise;

  std::int64_t trials = 1;
  std::uint64_t seed = 0;
  double confidence = 0.95;
  RateVariant variant = RateVariant::Derived;
  ChiVariant chi_variant = ChiVariant::Standard;
  int workers = 1;
  std::int64_t max_steps = 0;  // discrete run length / horizon override (0 = auto)
  double T = 0.0;              // continuous run length / horizon override (0 = auto)
  double dt = 0.0;             // continuous integrator step (0 = auto)
  bool record_fiedler = false;
  OutputToggles output;

  nlohmann::json to_json() const;
  ExperimentSpec experiment_spec() const;
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<RateVariant> variant;
  std::optional<int> workers;
};

/// Parses either JSON or the flat `a.b.c = value` text form into a config
/// document. Report documents are unwrapped to their embedded config.
nlohmann::json parse_config_text(const std::string& text);

/// Validates the document (unknown keys rejected), fills defaults, and
/// materializes the initial state.
RunConfig parse_config(const nlohmann::json& doc, const ConfigOverrides& ov = {});

RunConfig load_config(const std::string& path, const ConfigOverrides& ov = {});

const char* to_string(Mode mode);
const char* to_string(RateVariant v);
const char* to_string(ChiVariant v);
const char* to_string(NoiseKind k);

}  // namespace flock
