#include "skewcrit/report.hpp"

#include "skewcrit/error.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace skewcrit {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

// JSON has no encoding for inf/nan; keep them distinguishable as strings.
ojson number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

}  // namespace

ojson to_json(const Vec& v) {
  ojson a = ojson::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v(i)));
  return a;
}

ojson to_json(const Mat& m) {
  ojson a = ojson::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
  return a;
}

ojson to_json(const SkewHessianReport& h) {
  ojson j;
  j["matrix"] = to_json(h.matrix);
  j["condition_number"] = number(h.condition_number);
  j["nondegenerate"] = h.nondegenerate;
  j["tolerance"] = h.tolerance;
  j["critical_residual"] = number(h.critical_residual);
  j["at_critical_point"] = h.at_critical_point ? "verified" : "unverified";
  return j;
}

ojson to_json(const SolveResult& r) {
  ojson j;
  j["y"] = to_json(r.y);
  j["x_c"] = to_json(r.x_c);
  j["iterations"] = r.iterations;
  ojson hist = ojson::array();
  for (double v : r.residual_history) hist.push_back(number(v));
  j["residual_history"] = hist;
  j["converged"] = r.converged;
  j["hessian"] = to_json(r.hessian);
  return j;
}

ojson to_json(const ContactEstimate& e) {
  ojson j;
  j["status"] = to_string(e.status);
  j["r_est"] = number(e.r_est);
  j["r_claimed"] = e.r_claimed ? ojson(*e.r_claimed) : ojson(nullptr);
  j["r_used"] = e.r_used;
  j["order_exponent"] = e.order_exponent;
  j["fit_r2"] = number(e.fit_r2);
  j["method"] = to_string(e.method);
  j["residual"] = to_json(e.residual);
  ojson pairs = ojson::array();
  for (std::size_t i = 0; i < e.h_seq.size(); ++i) pairs.push_back({number(e.h_seq[i]), number(e.errors[i])});
  j["h_error"] = pairs;
  return j;
}

ojson to_json(const ResidualSystem& s) {
  ojson j;
  j["A"] = to_json(s.a);
  j["b"] = to_json(s.b);
  j["rows_F"] = s.d;
  j["rows_G"] = s.m;
  j["gamma_dot"] = s.gamma_dot;
  j["condition_number"] = number(s.condition_number);
  j["alpha_residual"] = to_json(s.alpha_residual);
  j["delta_residual"] = to_json(s.delta_residual);
  j["g_residual"] = to_json(s.g_residual);
  return j;
}

ojson report_header(const std::string& command, const std::string& config_hash, bool include_timestamp) {
  ojson j;
  j["command"] = command;
  j["config_hash"] = config_hash;
  if (include_timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["timestamp"] = buf;
  }
  return j;
}

ojson check_entry(const std::string& name, bool pass, double value, double tolerance) {
  ojson j;
  j["name"] = name;
  j["pass"] = pass;
  j["value"] = number(value);
  j["tolerance"] = number(tolerance);
  return j;
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(ErrorCode::InvalidArgument, "failed writing '" + path + "'");
}

}  // namespace skewcrit
