#include "offsetctrl/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace offsetctrl {

namespace {

using nlohmann::json;

// Converts a byte offset from a json parse error into a 1-based line number.
int line_of_offset(const std::string& text, std::size_t byte) {
  byte = std::min(byte, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() +
                                             static_cast<std::ptrdiff_t>(byte),
                                         '\n'));
}

[[noreturn]] void fail(const std::string& path, int line, const std::string& msg) {
  std::ostringstream out;
  out << path << ":" << line << ": " << msg;
  throw std::runtime_error(out.str());
}

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw std::runtime_error(path + ": " + msg);
}

json parse_file(const std::string& path, std::string* text_out = nullptr) {
  std::ifstream in(path);
  if (!in) fail(path, "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  if (text_out != nullptr) *text_out = text;
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    fail(path, line_of_offset(text, e.byte), e.what());
  }
}

Matrix json_to_matrix(const json& j, const std::string& path, const std::string& key) {
  if (!j.is_array() || j.empty() || !j.front().is_array()) {
    fail(path, "\"" + key + "\" must be a non-empty array of rows");
  }
  const std::size_t rows = j.size();
  const std::size_t cols = j.front().size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      fail(path, "\"" + key + "\" row " + std::to_string(r) +
                     " has inconsistent length");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) {
        fail(path, "\"" + key + "\" entry (" + std::to_string(r) + "," +
                       std::to_string(c) + ") is not a number");
      }
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          j[r][c].get<double>();
    }
  }
  return m;
}

json matrix_to_json(const Matrix& m, int digits) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      row.push_back(round_significant(m(r, c), digits));
    }
    rows.push_back(row);
  }
  return rows;
}

const json& require(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) fail(path, "missing required key \"" + key + "\"");
  return j.at(key);
}

}  // namespace

double round_significant(double value, int digits) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return std::strtod(buf, nullptr);
}

std::string format_significant(double value, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
  return buf;
}

PlantFile load_plant(const std::string& path) {
  const json j = parse_file(path);
  if (!j.is_object()) fail(path, "top level must be an object");

  PlantFile pf;
  pf.plant.A = json_to_matrix(require(j, path, "A"), path, "A");
  pf.plant.B = json_to_matrix(require(j, path, "B"), path, "B");
  const json& h = require(j, path, "h");
  if (!h.is_number()) fail(path, "\"h\" must be a number");
  pf.plant.h = h.get<double>();

  if (pf.plant.A.rows() != pf.plant.A.cols()) fail(path, "\"A\" must be square");
  if (pf.plant.B.rows() != pf.plant.A.rows()) {
    fail(path, "\"B\" must have as many rows as \"A\"");
  }
  if (!(pf.plant.h > 0.0)) fail(path, "\"h\" must be positive");

  if (j.contains("C")) pf.C = json_to_matrix(j.at("C"), path, "C");
  if (j.contains("L")) pf.L = json_to_matrix(j.at("L"), path, "L");
  if (pf.C.size() > 0 || pf.L.size() > 0) {
    if (pf.C.cols() != pf.plant.A.rows() || pf.L.rows() != pf.plant.A.rows() ||
        pf.C.rows() != pf.L.cols()) {
      fail(path, "observer pair \"C\", \"L\" has inconsistent dimensions");
    }
  }
  if (j.contains("label")) {
    if (!j.at("label").is_string()) fail(path, "\"label\" must be a string");
    pf.label = j.at("label").get<std::string>();
  }
  return pf;
}

void save_plant(const std::string& path, const PlantFile& pf) {
  json j;
  j["A"] = matrix_to_json(pf.plant.A, 12);
  j["B"] = matrix_to_json(pf.plant.B, 12);
  j["h"] = round_significant(pf.plant.h, 12);
  if (pf.C.size() > 0) j["C"] = matrix_to_json(pf.C, 12);
  if (pf.L.size() > 0) j["L"] = matrix_to_json(pf.L, 12);
  if (!pf.label.empty()) j["label"] = pf.label;
  std::ofstream out(path);
  if (!out) fail(path, "cannot open file for writing");
  out << j.dump(2) << "\n";
}

ControllerFile load_controller(const std::string& path) {
  const json j = parse_file(path);
  if (!j.is_object()) fail(path, "top level must be an object");

  ControllerFile cf;
  cf.controller.F = json_to_matrix(require(j, path, "Ac"), path, "Ac");
  cf.controller.G = json_to_matrix(require(j, path, "Bc"), path, "Bc");
  cf.controller.H = json_to_matrix(require(j, path, "Cc"), path, "Cc");
  cf.controller.D = json_to_matrix(require(j, path, "Dc"), path, "Dc");
  try {
    cf.controller.validate();
  } catch (const std::exception& e) {
    fail(path, std::string("controller matrices inconsistent: ") + e.what());
  }

  if (j.contains("meta")) {
    const json& meta = j.at("meta");
    if (meta.contains("gamma") && meta.at("gamma").is_number()) {
      cf.meta.gamma = meta.at("gamma").get<double>();
    }
    if (meta.contains("norm") && meta.at("norm").is_number()) {
      cf.meta.norm = meta.at("norm").get<double>();
    }
    if (meta.contains("interval") && meta.at("interval").is_array() &&
        meta.at("interval").size() == 2) {
      cf.meta.interval.lo = meta.at("interval")[0].get<double>();
      cf.meta.interval.hi = meta.at("interval")[1].get<double>();
    }
    if (meta.contains("seed") && meta.at("seed").is_number_unsigned()) {
      cf.meta.seed = meta.at("seed").get<std::uint64_t>();
    }
    if (meta.contains("config")) {
      cf.meta.config_json = meta.at("config").dump();
    }
  }
  return cf;
}

void save_controller(const std::string& path, const ControllerFile& cf) {
  json j;
  j["Ac"] = matrix_to_json(cf.controller.F, 12);
  j["Bc"] = matrix_to_json(cf.controller.G, 12);
  j["Cc"] = matrix_to_json(cf.controller.H, 12);
  j["Dc"] = matrix_to_json(cf.controller.D, 12);
  json meta;
  meta["gamma"] = round_significant(cf.meta.gamma, 12);
  meta["norm"] = round_significant(cf.meta.norm, 12);
  meta["interval"] = {round_significant(cf.meta.interval.lo, 12),
                      round_significant(cf.meta.interval.hi, 12)};
  meta["seed"] = cf.meta.seed;
  if (!cf.meta.config_json.empty()) {
    try {
      meta["config"] = json::parse(cf.meta.config_json);
    } catch (const json::parse_error&) {
      meta["config"] = cf.meta.config_json;
    }
  }
  j["meta"] = meta;
  std::ofstream out(path);
  if (!out) fail(path, "cannot open file for writing");
  out << j.dump(2) << "\n";
}

void write_sweep_csv(const std::string& path, const SweepReport& report) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open file for writing");
  out << "delta,spectral_radius,stable\n";
  for (std::size_t i = 0; i < report.grid.size(); ++i) {
    const bool stable = report.radii[i] < 1.0 - report.margin;
    out << format_significant(report.grid[i]) << ","
        << format_significant(report.radii[i]) << "," << (stable ? 1 : 0) << "\n";
  }
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open file for writing");
  const std::size_t steps1 = traj.t.size();
  if (steps1 == 0) fail(path, "empty trajectory");
  const Eigen::Index n = traj.x.front().size();
  const Eigen::Index nc = traj.zeta.front().size();
  const Eigen::Index m = traj.u.empty() ? 0 : traj.u.front().size();

  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",xhat_" << i;
  for (Eigen::Index i = 1; i <= nc; ++i) out << ",zeta_" << i;
  for (Eigen::Index i = 1; i <= m; ++i) out << ",u_" << i;
  out << "\n";

  for (std::size_t k = 0; k < steps1; ++k) {
    out << format_significant(traj.t[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      out << "," << format_significant(traj.x[k](i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      out << "," << format_significant(traj.xhat[k](i));
    }
    for (Eigen::Index i = 0; i < nc; ++i) {
      out << "," << format_significant(traj.zeta[k](i));
    }
    const Vector& uk = traj.u.empty()
                           ? Vector()
                           : traj.u[std::min(k, traj.u.size() - 1)];
    for (Eigen::Index i = 0; i < m; ++i) {
      out << "," << format_significant(uk(i));
    }
    out << "\n";
  }
}

void write_intersample_csv(const std::string& path, const Trajectory& traj) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open file for writing");
  if (traj.t_fine.empty()) fail(path, "trajectory has no intersample trace");
  const Eigen::Index n = traj.x_fine.front().size();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",x_" << i;
  for (Eigen::Index i = 1; i <= n; ++i) out << ",xhat_" << i;
  out << "\n";
  for (std::size_t k = 0; k < traj.t_fine.size(); ++k) {
    out << format_significant(traj.t_fine[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      out << "," << format_significant(traj.x_fine[k](i));
    }
    for (Eigen::Index i = 0; i < n; ++i) {
      out << "," << format_significant(traj.xhat_fine[k](i));
    }
    out << "\n";
  }
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows, int digits) {
  std::ofstream out(path);
  if (!out) fail(path, "cannot open file for writing");
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i == 0 ? "" : ",") << header[i];
  }
  out << "\n";
  for (const auto& row : rows) {
    if (row.size() != header.size()) fail(path, "row width does not match header");
    for (std::size_t i = 0; i < row.size(); ++i) {
      out << (i == 0 ? "" : ",") << format_significant(row[i], digits);
    }
    out << "\n";
  }
}

}  // namespace offsetctrl
