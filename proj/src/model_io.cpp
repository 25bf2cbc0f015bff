#include "ncskit/model_io.hpp"

#include <json.hpp>

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ncskit::model_io {

namespace {

using nlohmann::json;

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw ParseError(what + ": expected a non-empty array of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : j) {
    if (!r.is_array()) throw ParseError(what + ": row is not an array");
    std::vector<double> row;
    for (const auto& v : r) {
      if (!v.is_number()) throw ParseError(what + ": non-numeric entry");
      row.push_back(v.get<double>());
    }
    rows.push_back(std::move(row));
  }
  try {
    return densela::make_matrix(rows);
  } catch (const std::exception& e) {
    throw ParseError(what + ": " + e.what());
  }
}

json parse_json(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw ParseError(what + ": malformed JSON");
  return j;
}

}  // namespace

ncsmodel::SwitchedPlant ModelFile::to_plant() const {
  ncsmodel::SwitchedPlant plant;
  plant.sample_period = sample_period;
  plant.n_drop = n_drop;
  if (is_continuous()) {
    for (const auto& cm : continuous_modes) plant.modes.push_back(ncsmodel::discretize(cm, sample_period));
  } else {
    plant.modes = discrete_modes;
  }
  plant.validate();
  return plant;
}

ModelFile parse_model(const std::string& json_text) {
  json j = parse_json(json_text, "model");
  ModelFile m;
  if (!j.contains("sample_period") || !j["sample_period"].is_number())
    throw ParseError("model: missing numeric field 'sample_period'");
  m.sample_period = j["sample_period"].get<double>();
  if (m.sample_period <= 0.0) throw ParseError("model: 'sample_period' must be > 0");
  if (!j.contains("n_drop") || !j["n_drop"].is_number_integer())
    throw ParseError("model: missing integer field 'n_drop'");
  m.n_drop = j["n_drop"].get<int>();
  if (m.n_drop < 1) throw ParseError("model: 'n_drop' must be >= 1");

  const bool has_cont = j.contains("continuous_modes");
  const bool has_disc = j.contains("discrete_modes");
  if (has_cont == has_disc)
    throw ParseError("model: exactly one of 'continuous_modes' or 'discrete_modes' required");

  if (has_cont) {
    for (const auto& e : j["continuous_modes"]) {
      ncsmodel::ContinuousMode cm;
      cm.label = e.value("label", "");
      cm.a = matrix_from_json(e.at("a"), "model: continuous mode 'a'");
      cm.b = matrix_from_json(e.at("b"), "model: continuous mode 'b'");
      m.continuous_modes.push_back(std::move(cm));
    }
    if (m.continuous_modes.empty()) throw ParseError("model: 'continuous_modes' is empty");
  } else {
    for (const auto& e : j["discrete_modes"]) {
      ncsmodel::PlantMode pm;
      pm.label = e.value("label", "");
      pm.f = matrix_from_json(e.at("f"), "model: discrete mode 'f'");
      pm.g = matrix_from_json(e.at("g"), "model: discrete mode 'g'");
      m.discrete_modes.push_back(std::move(pm));
    }
    if (m.discrete_modes.empty()) throw ParseError("model: 'discrete_modes' is empty");
  }
  return m;
}

ModelFile load_model(const std::string& path) { return parse_model(read_file(path)); }

std::string model_to_json(const ModelFile& model) {
  json j;
  j["sample_period"] = model.sample_period;
  j["n_drop"] = model.n_drop;
  if (model.is_continuous()) {
    json arr = json::array();
    for (const auto& cm : model.continuous_modes)
      arr.push_back({{"label", cm.label}, {"a", matrix_to_json(cm.a)}, {"b", matrix_to_json(cm.b)}});
    j["continuous_modes"] = std::move(arr);
  } else {
    json arr = json::array();
    for (const auto& pm : model.discrete_modes)
      arr.push_back({{"label", pm.label}, {"f", matrix_to_json(pm.f)}, {"g", matrix_to_json(pm.g)}});
    j["discrete_modes"] = std::move(arr);
  }
  return j.dump(2) + "\n";
}

std::string fingerprint(const std::string& content) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : content) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
  return buf;
}

GainFile parse_gains(const std::string& json_text) {
  json j = parse_json(json_text, "gains");
  GainFile g;
  // an empty list is legal: failed synthesis runs still write a post-mortem file
  if (!j.contains("gains") || !j["gains"].is_array())
    throw ParseError("gains: missing array field 'gains'");
  for (const auto& k : j["gains"])
    g.gains.gains.push_back(matrix_from_json(k, "gains: gain matrix"));
  if (j.contains("p")) g.p = matrix_from_json(j["p"], "gains: 'p'");
  if (j.contains("q")) g.q = matrix_from_json(j["q"], "gains: 'q'");
  g.status = j.value("status", "");
  g.plant_fingerprint = j.value("plant_fingerprint", "");
  if (j.contains("history")) {
    for (const auto& h : j["history"]) {
      cclsynth::CclIterationRecord rec;
      rec.iteration = h.value("iteration", 0);
      rec.objective = h.value("objective", 0.0);
      rec.inverse_gap = h.value("inverse_gap", 0.0);
      rec.verified = h.value("verified", false);
      g.history.push_back(rec);
    }
  }
  if (j.contains("settings")) {
    const auto& s = j["settings"];
    g.settings.max_iterations = s.value("max_iterations", g.settings.max_iterations);
    g.settings.trace_tol = s.value("trace_tol", g.settings.trace_tol);
    g.settings.epsilon = s.value("epsilon", g.settings.epsilon);
    if (s.contains("sdp")) {
      const auto& sd = s["sdp"];
      g.settings.sdp.feas_tol = sd.value("feas_tol", g.settings.sdp.feas_tol);
      g.settings.sdp.gap_tol = sd.value("gap_tol", g.settings.sdp.gap_tol);
      g.settings.sdp.max_iterations = sd.value("max_iterations", g.settings.sdp.max_iterations);
      g.settings.sdp.initial_margin = sd.value("initial_margin", g.settings.sdp.initial_margin);
    }
  }
  return g;
}

GainFile load_gains(const std::string& path) { return parse_gains(read_file(path)); }

std::string gains_to_json(const GainFile& gains) {
  json j;
  json karr = json::array();
  for (const auto& k : gains.gains.gains) karr.push_back(matrix_to_json(k));
  j["gains"] = std::move(karr);
  if (gains.p.size() > 0) j["p"] = matrix_to_json(gains.p);
  if (gains.q.size() > 0) j["q"] = matrix_to_json(gains.q);
  j["status"] = gains.status;
  json hist = json::array();
  for (const auto& h : gains.history)
    hist.push_back({{"iteration", h.iteration},
                    {"objective", h.objective},
                    {"inverse_gap", h.inverse_gap},
                    {"verified", h.verified}});
  j["history"] = std::move(hist);
  j["settings"] = {{"max_iterations", gains.settings.max_iterations},
                   {"trace_tol", gains.settings.trace_tol},
                   {"epsilon", gains.settings.epsilon},
                   {"sdp",
                    {{"feas_tol", gains.settings.sdp.feas_tol},
                     {"gap_tol", gains.settings.sdp.gap_tol},
                     {"max_iterations", gains.settings.sdp.max_iterations},
                     {"initial_margin", gains.settings.sdp.initial_margin}}}};
  j["plant_fingerprint"] = gains.plant_fingerprint;
  return j.dump(2) + "\n";
}

std::string trace_to_csv(const sim::SimTrace& trace) {
  std::ostringstream out;
  const Eigen::Index n = trace.steps.empty() ? 0 : trace.steps.front().x.size();
  const Eigen::Index m = trace.steps.empty() ? 0 : trace.steps.front().u.size();
  out << "step,time,mode,s1_ok,s2_ok,effective,buffer_age";
  if (m == 1)
    out << ",u";
  else
    for (Eigen::Index i = 0; i < m; ++i) out << ",u" << (i + 1);
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << (i + 1);
  out << "\n";
  for (const auto& s : trace.steps) {
    out << s.step << ',' << fmt17(s.time) << ',' << s.mode << ',' << (s.s1_ok ? 1 : 0) << ','
        << (s.s2_ok ? 1 : 0) << ',' << (s.effective ? 1 : 0) << ',' << s.buffer_age;
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << fmt17(s.u[i]);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << fmt17(s.x[i]);
    out << "\n";
  }
  out << "# settled_at=" << trace.summary.settled_at << "\n";
  out << "# settle_threshold=" << fmt17(trace.summary.settle_threshold) << "\n";
  out << "# max_post_settle=" << fmt17(trace.summary.max_post_settle) << "\n";
  return out.str();
}

sim::SimTrace parse_trace(const std::string& csv_text) {
  std::istringstream in(csv_text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace: empty file");

  std::vector<std::string> header;
  {
    std::istringstream hs(line);
    std::string col;
    while (std::getline(hs, col, ',')) header.push_back(col);
  }
  if (header.size() < 8 || header[0] != "step")
    throw ParseError("trace: unexpected CSV header");
  int m = 0, n = 0;
  for (const auto& c : header) {
    if (c == "u" || (c.size() > 1 && c[0] == 'u')) ++m;
    if (c.size() > 1 && c[0] == 'x') ++n;
  }
  if (m < 1 || n < 1) throw ParseError("trace: header lacks input/state columns");

  sim::SimTrace trace;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      auto eq = line.find('=');
      if (eq != std::string::npos) {
        const std::string key = line.substr(2, eq - 2);
        const std::string val = line.substr(eq + 1);
        if (key == "settled_at") trace.summary.settled_at = std::stoi(val);
        if (key == "settle_threshold") trace.summary.settle_threshold = std::stod(val);
        if (key == "max_post_settle") trace.summary.max_post_settle = std::stod(val);
      }
      continue;
    }
    std::istringstream ls(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (static_cast<int>(cells.size()) != 7 + m + n)
      throw ParseError("trace: row width differs from header");
    sim::SimStep s;
    try {
      s.step = std::stoi(cells[0]);
      s.time = std::stod(cells[1]);
      s.mode = std::stoi(cells[2]);
      s.s1_ok = std::stoi(cells[3]) != 0;
      s.s2_ok = std::stoi(cells[4]) != 0;
      s.effective = std::stoi(cells[5]) != 0;
      s.buffer_age = std::stoi(cells[6]);
      s.u.resize(m);
      for (int i = 0; i < m; ++i) s.u[i] = std::stod(cells[static_cast<size_t>(7 + i)]);
      s.x.resize(n);
      for (int i = 0; i < n; ++i) s.x[i] = std::stod(cells[static_cast<size_t>(7 + m + i)]);
    } catch (const std::exception&) {
      throw ParseError("trace: non-numeric cell");
    }
    trace.steps.push_back(std::move(s));
  }
  return trace;
}

sim::SimTrace load_trace(const std::string& path) { return parse_trace(read_file(path)); }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError("cannot write file: " + path);
  out << content;
}

}  // namespace ncskit::model_io
