#pragma once

#include "ncskit/cclsynth.hpp"
#include "ncskit/ncsmodel.hpp"
#include "ncskit/sim.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

// Flat-file formats: JSON for models and gain schedules, CSV for simulation
// traces. Everything the CLI writes can be read back by the CLI.

namespace ncskit::model_io {

using densela::Matrix;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Model file: {"sample_period": h, "n_drop": N, "continuous_modes": [...]}
// or "discrete_modes"; exactly one of the two lists must be present.
struct ModelFile {
  double sample_period = 0.0;
  int n_drop = 1;
  std::vector<ncsmodel::ContinuousMode> continuous_modes;
  std::vector<ncsmodel::PlantMode> discrete_modes;

  bool is_continuous() const { return !continuous_modes.empty(); }
  // Discretizes on demand when the file carries continuous modes.
  ncsmodel::SwitchedPlant to_plant() const;
};

ModelFile parse_model(const std::string& json_text);
ModelFile load_model(const std::string& path);
std::string model_to_json(const ModelFile& model);

// FNV-1a over the raw file bytes, hex-encoded; ties a gain file to the model
// it was synthesized from.
std::string fingerprint(const std::string& content);

struct GainFile {
  ncsmodel::GainSchedule gains;
  Matrix p;
  Matrix q;
  std::string status;
  std::vector<cclsynth::CclIterationRecord> history;
  cclsynth::CclSettings settings;
  std::string plant_fingerprint;
};

GainFile parse_gains(const std::string& json_text);
GainFile load_gains(const std::string& path);
std::string gains_to_json(const GainFile& gains);

// Trace CSV: header step,time,mode,s1_ok,s2_ok,effective,buffer_age,u,x1..xn
// (u1..um when m > 1), 17 significant digits, summary as trailing comments.
std::string trace_to_csv(const sim::SimTrace& trace);
sim::SimTrace parse_trace(const std::string& csv_text);
sim::SimTrace load_trace(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

}  // namespace ncskit::model_io
