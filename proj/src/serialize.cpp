#include "bary/serialize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <set>
#include <sstream>
#include <unistd.h>

#include "bary/errors.hpp"

namespace bary {

namespace {

std::string format_double(double v) {
  if (!std::isfinite(v)) return "null";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string scalar_text(const Json& j) {
  switch (j.type()) {
    case Json::value_t::number_float:
      return format_double(j.get<double>());
    case Json::value_t::number_integer:
      return std::to_string(j.get<std::int64_t>());
    case Json::value_t::number_unsigned:
      return std::to_string(j.get<std::uint64_t>());
    default:
      return j.dump();
  }
}

void emit(const Json& j, bool pretty, int depth, std::string& out) {
  const std::string pad = pretty ? std::string(2 * (depth + 1), ' ') : "";
  const std::string close_pad = pretty ? std::string(2 * depth, ' ') : "";
  const char* nl = pretty ? "\n" : "";
  if (j.is_object()) {
    if (j.empty()) {
      out += "{}";
      return;
    }
    out += "{";
    out += nl;
    bool first = true;
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (!first) {
        out += ",";
        out += nl;
      }
      first = false;
      out += pad + Json(it.key()).dump() + (pretty ? ": " : ":");
      emit(it.value(), pretty, depth + 1, out);
    }
    out += nl + close_pad + "}";
  } else if (j.is_array()) {
    if (j.empty()) {
      out += "[]";
      return;
    }
    const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
    if (flat) {
      out += "[";
      for (std::size_t i = 0; i < j.size(); ++i) out += (i ? (pretty ? ", " : ",") : "") + scalar_text(j[i]);
      out += "]";
      return;
    }
    out += "[";
    out += nl;
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (i) {
        out += ",";
        out += nl;
      }
      out += pad;
      emit(j[i], pretty, depth + 1, out);
    }
    out += nl + close_pad + "]";
  } else {
    out += scalar_text(j);
  }
}

std::string cell(const Json& j) {
  if (j.is_null()) return "";
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (j.is_structured()) return cell(Json(dump_json(j, false)));
  return scalar_text(j);
}

std::vector<std::string> columns_of(const Json& rows) {
  std::set<std::string> keys;
  for (const Json& r : rows)
    if (r.is_object())
      for (auto it = r.begin(); it != r.end(); ++it) keys.insert(it.key());
  return {keys.begin(), keys.end()};
}

}  // namespace

std::string dump_json(const Json& j, bool pretty) {
  std::string out;
  emit(j, pretty, 0, out);
  if (pretty) out += "\n";
  return out;
}

std::string dump_csv(const Json& rows_in) {
  const Json rows = rows_in.is_array() ? rows_in : Json::array({rows_in});
  const std::vector<std::string> cols = columns_of(rows);
  std::string out;
  for (std::size_t c = 0; c < cols.size(); ++c) out += (c ? "," : "") + cols[c];
  out += "\n";
  for (const Json& r : rows) {
    for (std::size_t c = 0; c < cols.size(); ++c)
      out += (c ? "," : "") + (r.contains(cols[c]) ? cell(r[cols[c]]) : std::string());
    out += "\n";
  }
  return out;
}

std::string dump_text(const Json& j) {
  if (j.is_array() && !j.empty() && j[0].is_object()) {
    const std::vector<std::string> cols = columns_of(j);
    std::vector<std::vector<std::string>> cells;
    std::vector<std::size_t> width(cols.size());
    for (std::size_t c = 0; c < cols.size(); ++c) width[c] = cols[c].size();
    for (const Json& r : j) {
      std::vector<std::string> line;
      for (std::size_t c = 0; c < cols.size(); ++c) {
        line.push_back(r.contains(cols[c]) ? cell(r[cols[c]]) : "");
        width[c] = std::max(width[c], line.back().size());
      }
      cells.push_back(std::move(line));
    }
    std::ostringstream os;
    auto row = [&](const std::vector<std::string>& line) {
      for (std::size_t c = 0; c < line.size(); ++c) {
        os << line[c];
        if (c + 1 < line.size()) os << std::string(width[c] - line[c].size() + 2, ' ');
      }
      os << "\n";
    };
    row(cols);
    for (const auto& line : cells) row(line);
    return os.str();
  }
  if (j.is_object()) {
    std::vector<std::pair<std::string, std::string>> lines;
    std::function<void(const std::string&, const Json&)> flatten = [&](const std::string& prefix, const Json& v) {
      if (v.is_object() && !v.empty()) {
        for (auto it = v.begin(); it != v.end(); ++it) flatten(prefix.empty() ? it.key() : prefix + "." + it.key(), it.value());
      } else {
        lines.emplace_back(prefix, cell(v));
      }
    };
    flatten("", j);
    std::size_t w = 0;
    for (const auto& l : lines) w = std::max(w, l.first.size());
    std::string out;
    for (const auto& l : lines) out += l.first + std::string(w - l.first.size() + 2, ' ') + l.second + "\n";
    return out;
  }
  return dump_json(j);
}

void write_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw ArgumentError("cannot open '" + tmp.string() + "' for writing");
    f << contents;
    f.flush();
    if (!f) throw ArgumentError("failed writing '" + tmp.string() + "'");
  }
  fs::rename(tmp, target);
}

Json to_json(const Eigen::VectorXd& v) {
  Json j = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Json to_json(const Eigen::MatrixXd& m) {
  Json j = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) j.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return j;
}

Json to_json(const Point& p) { return to_json(p.coords); }

Json to_json(const SymOp& a) { return to_json(a.matrix()); }

Json to_json(const BcgReport& r) {
  return Json{{"dim", r.dim},
              {"traceH", r.traceH},
              {"minEigHKI", r.minEigHKI},
              {"ratio", r.ratio},
              {"bound", r.bound},
              {"hPsd", r.hPsd},
              {"kPd", r.kPd},
              {"traceOne", r.traceOne},
              {"sumDominatesIdentity", r.sumDominatesIdentity},
              {"hypothesesHold", r.hypothesesHold},
              {"holds", r.holds}};
}

Json to_json(const JacobianReport& r) {
  return Json{{"delta", to_json(r.delta)},
              {"imagePoint", to_json(r.imagePoint)},
              {"jacAbs", r.jacAbs},
              {"H", to_json(r.h)},
              {"K", to_json(r.k)},
              {"ratio", r.ratio},
              {"rhs", r.rhs},
              {"globalBound", r.globalBound},
              {"traceH", r.traceH},
              {"identityResidual", r.identityResidual},
              {"firstOrderResidual", r.firstOrderResidual},
              {"minSingularValue", r.minSingularValue},
              {"degenerate", r.degenerate}};
}

Json to_json(const JacScanSample& s) {
  Json j = to_json(s.report);
  j["index"] = s.index;
  Json verts = Json::array();
  for (const Point& p : s.vertices) verts.push_back(to_json(p));
  j["vertices"] = verts;
  return j;
}

Json to_json(const JacScanSummary& s, bool with_records) {
  Json j{{"n", s.n},
         {"samples", s.samples},
         {"seed", s.seed},
         {"radius", s.radius},
         {"grid", s.grid},
         {"maxJacAbs", s.maxJacAbs},
         {"maxRatio", s.maxRatio},
         {"maxTightness", s.maxTightness},
         {"maxTraceError", s.maxTraceError},
         {"maxIdentityResidual", s.maxIdentityResidual},
         {"maxFirstOrderResidual", s.maxFirstOrderResidual},
         {"bound", s.bound},
         {"globalBound", s.globalBound},
         {"degenerate", s.degenerate},
         {"histogram", s.histogram}};
  if (with_records) {
    Json recs = Json::array();
    for (const JacScanSample& r : s.records) recs.push_back(to_json(r));
    j["records"] = recs;
  }
  return j;
}

Json to_json(const BoundReport& r) {
  return Json{{"n", r.n},
              {"integralUn", r.integralUn},
              {"lowerBound", r.lowerBound},
              {"coefficient", r.coefficient},
              {"omega", r.omega},
              {"nMinusOnePowN", r.nMinusOnePowN},
              {"nPowHalfN", r.nPowHalfN}};
}

Json to_json(const SigmaRow& r) {
  return Json{{"n", r.n}, {"sigmaUpper", r.sigmaUpper}, {"thurstonUpper", r.thurstonUpper}, {"inferior", r.inferior}};
}

Json to_json(const BochnerResult& r) {
  return Json{{"ricci", r.ricci},
              {"divergenceSq", r.divergenceSq},
              {"traceNablaSq", r.traceNablaSq},
              {"residual", r.residual},
              {"gridRes", r.gridRes}};
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw ArgumentError("expected a JSON array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ArgumentError("expected a JSON array of numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

}  // namespace bary
