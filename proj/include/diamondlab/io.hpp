// Copyright 2026 The diamondlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// File formats.
//
// Matrix file (JSON):
//   {"rows": R, "cols": C, "row_dims": [...], "col_dims": [...],
//    "data": [[re, im], ...]}   row-major, 17 significant digits.
//
// Channel directory: manifest.json plus one matrix file per Kraus operator.
//   {"format": "diamondlab-channels", "version": 1, "case": "equal"|"tilted",
//    "d_A", "d_B", "d_E", "output_dim", "r", "eps", "M", "seed", "theta",
//    "members": [{"index": x, "kraus": ["member_x_kraus_e.json", ...]}, ...],
//    "reference_kraus": ["reference_kraus_i.json", ...]}
// d_B is the construction parameter; output_dim is the channel output
// dimension (2 d_B in the tilted case).

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "diamondlab/channels.hpp"
#include "diamondlab/ensembles.hpp"
#include "diamondlab/errors.hpp"
#include "diamondlab/matrix.hpp"

namespace diamondlab {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

inline std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

/// Writes through a temporary file and a rename.
inline void write_text_atomic(const fs::path& path, const std::string& content) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

inline std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json_file(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw IoError("corrupt JSON in " + path.string() + ": " + e.what());
  }
}

/// JSON with a trailing newline; doubles stay in the shortest round-trip form.
inline std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------------------
// Matrix files

inline std::string matrix_to_text(const Operator& x) {
  auto dims = [](const Dims& d) {
    std::string s = "[";
    for (std::size_t i = 0; i < d.size(); ++i) s += (i ? ", " : "") + std::to_string(d[i]);
    return s + "]";
  };
  std::string s = "{\n  \"rows\": " + std::to_string(x.rows()) + ",\n  \"cols\": " + std::to_string(x.cols()) +
                  ",\n  \"row_dims\": " + dims(x.row_dims()) + ",\n  \"col_dims\": " + dims(x.col_dims()) +
                  ",\n  \"data\": [";
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < x.cols(); ++j) {
      s += (i || j) ? ",\n    " : "\n    ";
      s += "[" + format_double(x(i, j).real()) + ", " + format_double(x(i, j).imag()) + "]";
    }
  s += x.rows() * x.cols() > 0 ? "\n  ]\n}\n" : "]\n}\n";
  return s;
}

inline Operator matrix_from_json(const Json& j, const std::string& where) {
  try {
    const auto rows = j.at("rows").get<std::size_t>(), cols = j.at("cols").get<std::size_t>();
    const auto row_dims = j.at("row_dims").get<Dims>(), col_dims = j.at("col_dims").get<Dims>();
    const auto& data = j.at("data");
    if (data.size() != rows * cols) throw IoError(where + ": data has " + std::to_string(data.size()) + " entries");
    Matrix m(rows, cols);
    for (std::size_t k = 0; k < data.size(); ++k) {
      const auto& e = data[k];
      if (!e.is_array() || e.size() != 2) throw IoError(where + ": entry " + std::to_string(k) + " is not [re, im]");
      m(k / cols, k % cols) = cplx(e[0].get<double>(), e[1].get<double>());
    }
    return Operator(std::move(m), row_dims, col_dims);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(where + ": " + e.what());
  }
}

inline void write_matrix_file(const fs::path& path, const Operator& x) { write_text_atomic(path, matrix_to_text(x)); }

inline Operator read_matrix_file(const fs::path& path) { return matrix_from_json(parse_json_file(path), path.string()); }

// ---------------------------------------------------------------------------
// Channel directories

inline void save_ensemble(const ChannelEnsemble& ens, const fs::path& dir) {
  const auto& p = ens.params;
  Json members = Json::array();
  for (std::size_t x = 0; x < ens.isometries.size(); ++x) {
    const Isometry& v = ens.isometries[x];
    Json files = Json::array();
    for (std::size_t e = 0; e < v.d_E(); ++e) {
      const std::string name = "member_" + std::to_string(x) + "_kraus_" + std::to_string(e) + ".json";
      write_matrix_file(dir / name, Operator(v.kraus(e)));
      files.push_back(name);
    }
    members.push_back(Json{{"index", x}, {"kraus", files}});
  }
  Json reference = Json::array();
  for (std::size_t i = 0; i < ens.reference_kraus.size(); ++i) {
    const std::string name = "reference_kraus_" + std::to_string(i) + ".json";
    write_matrix_file(dir / name, Operator(ens.reference_kraus[i]));
    reference.push_back(name);
  }
  Json m;
  m["format"] = "diamondlab-channels";
  m["version"] = 1;
  m["case"] = to_string(p.kind);
  m["d_A"] = p.d_A;
  m["d_B"] = p.d_B;
  m["d_E"] = p.r;
  m["output_dim"] = p.output_dim();
  m["r"] = p.r;
  m["eps"] = p.eps;
  m["M"] = p.M;
  m["seed"] = p.seed;
  m["theta"] = ens.theta;
  m["members"] = members;
  m["reference_kraus"] = reference;
  write_text_atomic(dir / "manifest.json", dump_json(m));
}

inline ChannelEnsemble load_ensemble(const fs::path& dir) {
  const fs::path mpath = dir / "manifest.json";
  const Json m = parse_json_file(mpath);
  try {
    if (m.at("format").get<std::string>() != "diamondlab-channels")
      throw IoError(mpath.string() + ": not a channel manifest");
    ChannelEnsemble ens{};
    auto& p = ens.params;
    p.kind = parse_ensemble_case(m.at("case").get<std::string>());
    p.d_A = m.at("d_A").get<std::size_t>();
    p.d_B = m.at("d_B").get<std::size_t>();
    p.r = m.at("r").get<std::size_t>();
    p.eps = m.at("eps").get<double>();
    p.M = m.at("M").get<std::size_t>();
    p.seed = m.at("seed").get<std::uint64_t>();
    ens.theta = m.at("theta").get<double>();
    const auto d_E = m.at("d_E").get<std::size_t>();
    for (const auto& mem : m.at("members")) {
      std::vector<Matrix> ops;
      for (const auto& f : mem.at("kraus")) ops.push_back(read_matrix_file(dir / f.get<std::string>()).matrix());
      if (ops.size() != d_E) throw IoError(mpath.string() + ": member Kraus count differs from d_E");
      ens.isometries.push_back(kraus_to_stinespring(KrausSet(std::move(ops))));
    }
    if (ens.isometries.size() != p.M) throw IoError(mpath.string() + ": member count differs from M");
    for (const auto& f : m.at("reference_kraus"))
      ens.reference_kraus.push_back(read_matrix_file(dir / f.get<std::string>()).matrix());
    return ens;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(mpath.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// CSV

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) : columns_(header.size()) { add(header); }

  void add(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw DimensionError("CsvWriter: row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text_ += ',';
      text_ += escape(cells[i]);
    }
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

 private:
  static std::string escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
  }

  std::size_t columns_;
  std::string text_;
};

}  // namespace diamondlab
