#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "tcplab/errors.hpp"
#include "tcplab/face_solver.hpp"
#include "tcplab/lab.hpp"
#include "tcplab/properties.hpp"
#include "tcplab/tcp.hpp"
#include "tcplab/tensor.hpp"

namespace tcplab {

using Json = nlohmann::ordered_json;

// Tensor JSON:   {"m": int, "n": int, "format": "dense" | "sparse",
//                 "entries": [real...] | [{"index": [i1..im], "value": real}]}
// Instance JSON: {"tensor": <tensor>, "a": [real...]}
// Indices are 1-based in every file; unspecified sparse entries are zero.

namespace detail {

inline std::string field_path(const std::string& where, const std::string& key) {
  return where.empty() ? key : where + "." + key;
}

inline const Json& require_field(const Json& j, const std::string& where, const char* key) {
  if (!j.is_object()) throw LoadError(where + ": expected an object");
  const auto it = j.find(key);
  if (it == j.end()) throw LoadError(field_path(where, key) + ": missing field");
  return *it;
}

inline double require_number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw LoadError(where + ": expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw LoadError(where + ": non-finite number");
  return v;
}

inline int require_int(const Json& j, const std::string& where) {
  if (!j.is_number_integer()) throw LoadError(where + ": expected an integer, got " + std::string(j.type_name()));
  const auto v = j.get<long long>();
  if (v < -1'000'000'000 || v > 1'000'000'000) throw LoadError(where + ": integer out of range");
  return static_cast<int>(v);
}

inline std::string indexed(const std::string& where, std::size_t k) { return where + "[" + std::to_string(k) + "]"; }

inline Json vec_json(const Vec& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(json_number(v[i]));
  return out;
}

inline Json face_json(const FaceMask& f) {
  Json out = Json::array();
  for (int i : f.members()) out.push_back(i + 1);
  return out;
}

/// Rounds every floating-point number in place to `digits` significant
/// digits.
inline void round_numbers(Json& j, int digits) {
  if (j.is_number_float()) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, j.get<double>());
    j = std::strtod(buf, nullptr);
  } else if (j.is_structured()) {
    for (auto& child : j) round_numbers(child, digits);
  }
}

}  // namespace detail

/// Parses JSON text; syntax errors report line and column.
inline Json parse_json_text(const std::string& text, const std::string& source = "input") {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t byte = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    const std::size_t line = 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
    const std::size_t last_nl = text.rfind('\n', byte == 0 ? 0 : byte - 1);
    const std::size_t col = last_nl == std::string::npos || byte == 0 ? byte + 1 : byte - last_nl;
    throw LoadError(source + ":" + std::to_string(line) + ":" + std::to_string(col) + ": JSON syntax error");
  }
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Tensor tensor_from_json(const Json& j, const std::string& where = "tensor") {
  const int m = detail::require_int(detail::require_field(j, where, "m"), detail::field_path(where, "m"));
  const int n = detail::require_int(detail::require_field(j, where, "n"), detail::field_path(where, "n"));
  if (m < 2) throw LoadError(detail::field_path(where, "m") + ": order must be >= 2");
  if (n < 2) throw LoadError(detail::field_path(where, "n") + ": dimension must be >= 2");
  std::string format = "dense";
  if (j.contains("format")) {
    const Json& f = j["format"];
    if (!f.is_string()) throw LoadError(detail::field_path(where, "format") + ": expected a string");
    format = f.get<std::string>();
  }
  Tensor shape(m, n);  // ResourceError on oversize
  const std::string ewhere = detail::field_path(where, "entries");
  const Json& entries = detail::require_field(j, where, "entries");
  if (!entries.is_array()) throw LoadError(ewhere + ": expected an array");
  std::vector<double> values(shape.size(), 0.0);
  if (format == "dense") {
    if (entries.size() != shape.size())
      throw LoadError(ewhere + ": expected " + std::to_string(shape.size()) + " entries (n^m), got " +
                      std::to_string(entries.size()));
    for (std::size_t k = 0; k < entries.size(); ++k) values[k] = detail::require_number(entries[k], detail::indexed(ewhere, k));
  } else if (format == "sparse") {
    std::set<std::size_t> seen;
    for (std::size_t k = 0; k < entries.size(); ++k) {
      const std::string at = detail::indexed(ewhere, k);
      const Json& idx = detail::require_field(entries[k], at, "index");
      const std::string iwhere = detail::field_path(at, "index");
      if (!idx.is_array() || static_cast<int>(idx.size()) != m)
        throw LoadError(iwhere + ": expected an array of " + std::to_string(m) + " indices");
      std::vector<int> zero_based;
      for (std::size_t d = 0; d < idx.size(); ++d) {
        const int i = detail::require_int(idx[d], detail::indexed(iwhere, d));
        if (i < 1 || i > n) throw LoadError(detail::indexed(iwhere, d) + ": index " + std::to_string(i) + " outside 1.." + std::to_string(n));
        zero_based.push_back(i - 1);
      }
      const std::size_t flat = shape.flat_index(zero_based);
      if (!seen.insert(flat).second) throw LoadError(iwhere + ": duplicate index");
      values[flat] = detail::require_number(detail::require_field(entries[k], at, "value"), detail::field_path(at, "value"));
    }
  } else {
    throw LoadError(detail::field_path(where, "format") + ": expected \"dense\" or \"sparse\", got \"" + format + "\"");
  }
  return Tensor(m, n, std::move(values));
}

/// Numbers are written at full precision so that files re-parse exactly.
inline Json tensor_to_json(const Tensor& a, bool sparse = false) {
  Json j;
  j["m"] = a.order();
  j["n"] = a.dim();
  j["format"] = sparse ? "sparse" : "dense";
  Json entries = Json::array();
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!sparse) {
      entries.push_back(a[k]);
      continue;
    }
    if (a[k] == 0.0) continue;
    Json idx = Json::array();
    for (int i : a.multi_index(k)) idx.push_back(i + 1);
    entries.push_back({{"index", idx}, {"value", a[k]}});
  }
  j["entries"] = entries;
  return j;
}

inline Vec vec_from_json(const Json& j, const std::string& where) {
  if (!j.is_array()) throw LoadError(where + ": expected an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = detail::require_number(j[k], detail::indexed(where, k));
  return v;
}

inline TcpInstance instance_from_json(const Json& j, const std::string& where = "instance") {
  Tensor t = tensor_from_json(detail::require_field(j, where, "tensor"), detail::field_path(where, "tensor"));
  const std::string awhere = detail::field_path(where, "a");
  Vec a = vec_from_json(detail::require_field(j, where, "a"), awhere);
  if (a.size() != t.dim())
    throw LoadError(awhere + ": expected " + std::to_string(t.dim()) + " entries, got " + std::to_string(a.size()));
  return TcpInstance(std::move(t), std::move(a));
}

inline Json instance_to_json(const TcpInstance& inst, bool sparse = false) {
  Json j;
  j["tensor"] = tensor_to_json(inst.tensor(), sparse);
  Json a = Json::array();
  for (Eigen::Index i = 0; i < inst.offset().size(); ++i) a.push_back(inst.offset()[i]);
  j["a"] = a;
  return j;
}

inline Tensor load_tensor_file(const std::string& path) {
  return tensor_from_json(parse_json_text(read_file(path), path), path);
}

inline TcpInstance load_instance_file(const std::string& path) {
  return instance_from_json(parse_json_text(read_file(path), path), path);
}

inline Json to_json(const SolutionSet& s) {
  Json j;
  j["status"] = to_string(s.status);
  Json points = Json::array();
  for (const auto& p : s.points)
    points.push_back({{"x", detail::vec_json(p.x)}, {"face", detail::face_json(p.face)}, {"kkt_res", p.kkt_res}});
  j["points"] = points;
  Json rays = Json::array();
  for (const auto& r : s.rays)
    rays.push_back({{"direction", detail::vec_json(r.direction)}, {"face", detail::face_json(r.face)}});
  j["rays"] = rays;
  Json posdim = Json::array();
  for (const auto& f : s.posdim_suspect) posdim.push_back(detail::face_json(f));
  j["posdim_suspect"] = posdim;
  Json samples = Json::array();
  for (const auto& x : s.component_samples) samples.push_back(detail::vec_json(x));
  j["posdim_samples"] = samples;
  const SolveMeta& m = s.meta;
  j["meta"] = {{"tol", m.tol},
               {"dedup_radius", m.dedup_radius},
               {"seed", m.seed},
               {"newton_max_iter", m.newton_max_iter},
               {"grid_starts_per_axis", m.grid_starts_per_axis},
               {"start_box_radius", m.start_box_radius},
               {"random_starts", m.random_starts},
               {"faces", m.faces},
               {"newton_starts", m.newton_starts},
               {"homogeneous", m.homogeneous}};
  return j;
}

inline Json to_json(const PropertyReport& r) {
  Json j;
  j["property"] = to_string(r.property);
  j["verdict"] = to_string(r.verdict);
  if (r.certificate_partner) {
    j["certificate"] = {{"x", detail::vec_json(*r.certificate)}, {"y", detail::vec_json(*r.certificate_partner)}};
  } else if (r.certificate) {
    j["certificate"] = detail::vec_json(*r.certificate);
  } else {
    j["certificate"] = nullptr;
  }
  j["certificate_value"] = r.certificate ? json_number(r.certificate_value) : Json(nullptr);
  j["effort"] = r.effort;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

inline Json row_json(const ExperimentRow& r) {
  return {{"sample_id", r.sample_id},
          {"pert_norm_tensor", json_number(r.pert_norm_tensor)},
          {"pert_norm_vec", json_number(r.pert_norm_vec)},
          {"n_points", r.n_points},
          {"max_norm", json_number(r.max_norm)},
          {"excess", json_number(r.excess)},
          {"flags", r.flags}};
}

inline Json to_json(const ExperimentReport& r) {
  Json j;
  j["kind"] = to_string(r.kind);
  j["params"] = r.params;
  Json rows = Json::array();
  for (const auto& row : r.rows) rows.push_back(row_json(row));
  j["rows"] = rows;
  j["summary"] = r.summary;
  return j;
}

/// Report text: every float rounded to 12 significant digits.
inline std::string dump_report(Json j) {
  detail::round_numbers(j, 12);
  return j.dump(2) + "\n";
}

/// Exact text for tensor and instance files.
inline std::string dump_exact(const Json& j) { return j.dump(2) + "\n"; }

/// Shortest decimal that round-trips; "inf", "-inf", "nan" otherwise.
inline std::string shortest_decimal(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline const char* kCsvHeader = "sample_id,pert_norm_tensor,pert_norm_vec,n_points,max_norm,excess,flags";

inline std::string report_csv(const ExperimentReport& r) {
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& row : r.rows) {
    out += std::to_string(row.sample_id);
    for (double v : {row.pert_norm_tensor, row.pert_norm_vec}) out += "," + shortest_decimal(v);
    out += "," + std::to_string(row.n_points);
    for (double v : {row.max_norm, row.excess}) out += "," + shortest_decimal(v);
    out += "," + row.flags + "\n";
  }
  return out;
}

}  // namespace tcplab
