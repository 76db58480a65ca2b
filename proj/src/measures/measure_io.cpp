#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "wpmp/measures.hpp"

namespace wpmp {

namespace {

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& token, int line) {
  const std::string t = trim(token);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(t, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (t.empty() || used != t.size()) {
    throw InvalidArgument("measure CSV line " + std::to_string(line) + ": cannot parse '" + t + "' as a number");
  }
  return value;
}

}  // namespace

void write_measure_csv(std::ostream& out, const DiscreteMeasure& mu) {
  out << "# dim=" << mu.dim() << "\n";
  for (int i = 0; i < mu.size(); ++i) {
    out << format_double(mu.weight(i));
    for (int k = 0; k < mu.dim(); ++k) out << "," << format_double(mu.points()(i, k));
    out << "\n";
  }
}

DiscreteMeasure read_measure_csv(std::istream& in) {
  std::string line;
  int dim = -1;
  int line_no = 0;
  std::vector<double> weights;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#') {
      const auto pos = t.find("dim=");
      if (pos != std::string::npos) dim = static_cast<int>(parse_double(t.substr(pos + 4), line_no));
      continue;
    }
    if (dim < 1) throw InvalidArgument("measure CSV: missing '# dim=d' header before data");
    std::vector<double> fields;
    std::stringstream ss(t);
    std::string tok;
    while (std::getline(ss, tok, ',')) fields.push_back(parse_double(tok, line_no));
    if (static_cast<int>(fields.size()) != dim + 1) {
      throw DimensionError("measure CSV line " + std::to_string(line_no) + ": expected " +
                           std::to_string(dim + 1) + " columns, got " + std::to_string(fields.size()));
    }
    weights.push_back(fields[0]);
    rows.emplace_back(fields.begin() + 1, fields.end());
  }
  if (rows.empty()) throw InvalidArgument("measure CSV: no atoms");
  Matrix pts(static_cast<Eigen::Index>(rows.size()), dim);
  Vector w(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    w(static_cast<Eigen::Index>(i)) = weights[i];
    for (int k = 0; k < dim; ++k) pts(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  }
  return DiscreteMeasure(std::move(pts), std::move(w));
}

DiscreteMeasure read_measure_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open measure file '" + path + "'");
  return read_measure_csv(in);
}

}  // namespace wpmp
