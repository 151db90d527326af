#pragma once

#include "skewcrit/contact.hpp"
#include "skewcrit/solver.hpp"
#include "skewcrit/variation.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace skewcrit {

using ojson = nlohmann::ordered_json;

std::string format_double(double v);  // %.17g
std::string fnv1a_hex(const std::string& text);

ojson to_json(const Vec& v);
ojson to_json(const Mat& m);  // list of rows
ojson to_json(const SkewHessianReport& h);
ojson to_json(const SolveResult& r);
ojson to_json(const ContactEstimate& e);
ojson to_json(const ResidualSystem& s);

/// Run metadata block; the timestamp is omitted when include_timestamp is false.
ojson report_header(const std::string& command, const std::string& config_hash, bool include_timestamp);

/// One check entry: name, pass, measured value and tolerance.
ojson check_entry(const std::string& name, bool pass, double value, double tolerance);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::string str() const;
};

void write_file(const std::string& path, const std::string& text);

}  // namespace skewcrit
