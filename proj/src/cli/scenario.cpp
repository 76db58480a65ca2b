#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "wpmp/cli.hpp"

namespace wpmp::cli {

using nlohmann::json;

namespace {

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) {
    throw InvalidArgument(where + ": missing field '" + key + "'");
  }
  return obj.at(key);
}

Vector to_vector(const json& j, const std::string& where) {
  if (j.is_number()) return Vector::Constant(1, j.get<double>());
  if (!j.is_array()) throw InvalidArgument(where + ": expected a number list");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  return v;
}

Matrix to_matrix(const json& j, int cols, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected a nonempty list of rows");
  Matrix m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Vector row = to_vector(j[r], where);
    require_dim(cols, row.size(), where.c_str());
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Params to_params(const json& j) {
  Params p;
  if (j.is_null()) return p;
  if (!j.is_object()) throw InvalidArgument("parameter table must be an object");
  for (const auto& [name, value] : j.items()) {
    if (value.is_number()) {
      p.set(name, value.get<double>());
    } else {
      p.set(name, value.get<std::vector<double>>());
    }
  }
  return p;
}

json params_of(const json& obj) { return obj.value("params", json::object()); }

std::string resolve(const std::string& base, const std::string& path) {
  const std::filesystem::path p(path);
  return p.is_absolute() ? path : (std::filesystem::path(base) / p).string();
}

DiscreteMeasure build_initial(const json& j, int dim, std::uint64_t seed, const std::string& base) {
  const std::string where = "initial_measure";
  if (j.contains("file")) {
    DiscreteMeasure mu = read_measure_csv_file(resolve(base, j.at("file").get<std::string>()));
    require_dim(dim, mu.dim(), "initial_measure file");
    return mu;
  }
  if (j.contains("sample")) {
    const json& s = j.at("sample");
    const int count = require(s, "count", where + ".sample").get<int>();
    const double radius = s.value("radius", 1.0);
    if (count < 1) throw InvalidArgument(where + ".sample: count must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-radius, radius);
    Matrix pts(count, dim);
    for (int i = 0; i < count; ++i)
      for (int k = 0; k < dim; ++k) pts(i, k) = u(rng);
    return DiscreteMeasure::uniform(pts);
  }
  const Matrix pts = to_matrix(require(j, "atoms", where), dim, where + ".atoms");
  if (!j.contains("weights")) return DiscreteMeasure::uniform(pts);
  return DiscreteMeasure(pts, to_vector(j.at("weights"), where + ".weights"));
}

TerminalFunctional build_terminal(const json& j, int dim, const std::string& where) {
  const std::string family = require(j, "family", where).get<std::string>();
  const std::string name = j.value("name", family);
  const double offset = j.value("offset", 0.0);
  if (family == "nbody") {
    const std::string pot = require(j, "potential", where).get<std::string>();
    return TerminalFunctional(name, NBody{make_potential(pot, dim, to_params(params_of(j)))}, offset);
  }
  if (family == "variance") return TerminalFunctional(name, Variance{}, offset);
  if (family == "support_distance") {
    return TerminalFunctional(name, SupportDistance{to_matrix(require(j, "targets", where), dim, where + ".targets")},
                              offset);
  }
  throw InvalidArgument(where + ": unknown functional family '" + family + "'");
}

MomentPtr build_moment(const json& j, int dim) {
  if (!j.contains("moment")) return make_moment_map("zero", dim);
  const json& m = j.at("moment");
  if (m.is_string()) return make_moment_map(m.get<std::string>(), dim);
  return make_moment_map(require(m, "id", "moment").get<std::string>(), dim, to_params(params_of(m)));
}

// CSV table with header `t_cell,c_1..c_m`; row k starts at t = k T / cells.
Matrix read_coefficient_table(const std::string& path, int m, double horizon) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open coefficient table '" + path + "'");
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (header) {
      header = false;
      if (line.rfind("t_cell", 0) == 0) continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (static_cast<int>(row.size()) != m + 1) {
      throw InvalidArgument("coefficient table row has " + std::to_string(row.size()) + " columns, expected " +
                            std::to_string(m + 1));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InvalidArgument("coefficient table '" + path + "' is empty");
  const int cells = static_cast<int>(rows.size());
  Matrix coef(cells, m);
  for (int k = 0; k < cells; ++k) {
    const double expected = k * horizon / cells;
    if (std::abs(rows[static_cast<std::size_t>(k)][0] - expected) > 1e-9 * std::max(1.0, horizon)) {
      throw InvalidArgument("coefficient table: t_cell of row " + std::to_string(k) + " should be " +
                            std::to_string(expected));
    }
    for (int j = 0; j < m; ++j) coef(k, j) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(j + 1)];
  }
  return coef;
}

MultiplierMeasure build_measure(const json& j, const std::string& where) {
  MultiplierMeasure m;
  m.times = j.value("times", std::vector<double>{});
  m.masses = j.value("masses", std::vector<double>{});
  if (m.times.size() != m.masses.size()) throw InvalidArgument(where + ": times and masses differ in length");
  return m;
}

}  // namespace

Scenario load_scenario(const json& doc, const std::string& base_dir, const Overrides& ov) {
  if (!doc.is_object()) throw InvalidArgument("scenario must be a JSON object");
  Scenario sc;
  sc.spec = doc;
  json& spec = sc.spec;
  if (ov.seed) spec["seed"] = *ov.seed;
  sc.seed = spec.value("seed", std::uint64_t{0});
  spec["seed"] = sc.seed;

  sc.dimension = require(spec, "dimension", "scenario").get<int>();
  if (sc.dimension < 1) throw InvalidArgument("scenario: dimension must be positive");
  const double horizon = require(spec, "horizon", "scenario").get<double>();
  int steps = require(spec, "steps", "scenario").get<int>();
  if (ov.dt) {
    if (!(*ov.dt > 0.0)) throw InvalidArgument("--dt-override must be positive");
    const double s = horizon / *ov.dt;
    if (std::abs(s - std::round(s)) > 1e-9 * std::max(1.0, s)) {
      throw InvalidArgument("--dt-override does not divide the horizon");
    }
    steps = static_cast<int>(std::round(s));
    spec["steps"] = steps;
  }
  sc.grid = TimeGrid(horizon, steps);
  const int d = sc.dimension;

  sc.initial = build_initial(require(spec, "initial_measure", "scenario"), d, sc.seed, base_dir);

  const json& k = require(spec, "kernel", "scenario");
  sc.kernel = make_kernel(require(k, "id", "kernel").get<std::string>(), d, to_params(params_of(k)));

  const json& c = require(spec, "control", "scenario");
  std::vector<BasisFieldPtr> fields;
  for (const json& b : require(c, "basis", "control")) {
    if (b.is_string()) {
      fields.push_back(make_basis_field(b.get<std::string>(), d));
    } else {
      fields.push_back(make_basis_field(require(b, "id", "control.basis").get<std::string>(), d,
                                        to_params(params_of(b))));
    }
  }
  sc.basis = std::make_shared<const ControlBasis>(d, std::move(fields));
  const int m = sc.basis->size();
  const Matrix coef = c.contains("coefficients_file")
                           ? read_coefficient_table(resolve(base_dir, c.at("coefficients_file").get<std::string>()),
                                                    m, horizon)
                           : to_matrix(require(c, "coefficients", "control"), m, "control.coefficients");
  sc.law.emplace(sc.basis, horizon, coef, require(c, "bound", "control").get<double>());
  if (steps % sc.law->cells() != 0) {
    throw InvalidArgument("control cells (" + std::to_string(sc.law->cells()) + ") must divide steps (" +
                          std::to_string(steps) + ")");
  }

  const json fns = spec.value("functionals", json::object());
  if (fns.contains("terminal")) sc.functionals.terminal = build_terminal(fns.at("terminal"), d, "functionals.terminal");
  if (fns.contains("running")) {
    const json& r = fns.at("running");
    const MomentPtr mom = build_moment(r, d);
    const std::string id = require(r, "integrand", "functionals.running").get<std::string>();
    sc.functionals.running.emplace(r.value("name", id),
                                   make_running_integrand(id, d, mom->out_dim(), to_params(params_of(r))), mom);
  }
  for (const json& f : fns.value("inequality", json::array())) {
    sc.functionals.inequality.push_back(build_terminal(f, d, "functionals.inequality"));
  }
  for (const json& f : fns.value("equality", json::array())) {
    sc.functionals.equality.push_back(build_terminal(f, d, "functionals.equality"));
  }
  for (const json& f : fns.value("state", json::array())) {
    const MomentPtr mom = build_moment(f, d);
    const std::string id = require(f, "integrand", "functionals.state").get<std::string>();
    sc.functionals.state.emplace_back(f.value("name", id),
                                      make_constraint_integrand(id, d, mom->out_dim(), to_params(params_of(f))), mom);
  }

  const json mj = spec.value("multipliers", json::object());
  sc.multipliers.lambda0 = mj.value("lambda0", 1.0);
  sc.multipliers.lambda_inequality = mj.contains("inequality") ? to_vector(mj.at("inequality"), "multipliers.inequality")
                                                               : Vector::Zero(0);
  sc.multipliers.eta_equality = mj.contains("equality") ? to_vector(mj.at("equality"), "multipliers.equality")
                                                        : Vector::Zero(0);
  for (const json& s : mj.value("state", json::array())) {
    sc.multipliers.state.push_back(build_measure(s, "multipliers.state"));
  }
  if (sc.multipliers.state.empty() && !sc.functionals.state.empty()) {
    sc.multipliers.state.resize(sc.functionals.state.size());
  }
  sc.costate_sign = mj.value("costate_sign", 1.0);
  sc.multipliers.validate();
  check_arity(sc.multipliers, sc.functionals);
  for (const MultiplierMeasure& mm : sc.multipliers.state) zeta_from_measure(mm, sc.grid);

  for (const json& w : spec.value("dictionary", json::array())) {
    sc.dictionary.emplace_back(sc.basis, to_vector(w, "dictionary"));
    require_dim(m, sc.dictionary.back().coefficients().size(), "dictionary entry");
  }

  for (const json& n : spec.value("needles", json::array())) {
    NeedleSpec ns{to_vector(require(n, "omega", "needles"), "needles.omega"), require(n, "tau", "needles").get<double>(),
                  require(n, "length", "needles").get<double>()};
    require_dim(m, ns.omega.size(), "needle omega");
    sc.needles.push_back(std::move(ns));
  }
  sc.halvings = spec.value("halvings", 3);

  const json cj = spec.value("certificate", json::object());
  sc.certificate.maximization_tolerance = cj.value("maximization_tolerance", 1e-6);
  sc.certificate.active_tolerance = cj.value("active_tolerance", 1e-6);
  sc.certificate.slackness_tolerance = cj.value("slackness_tolerance", 1e-6);
  sc.certificate.k_nodes = cj.value("k_nodes", std::vector<int>{});
  return sc;
}

Scenario load_scenario_file(const std::string& path, const Overrides& ov) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open scenario file '" + path + "'");
  const json doc = json::parse(in);
  return load_scenario(doc, std::filesystem::path(path).parent_path().string(), ov);
}

void save_scenario(const Scenario& sc, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write scenario file '" + path + "'");
  out << sc.spec.dump(2) << "\n";
}

}  // namespace wpmp::cli
