#pragma once

#include <iosfwd>
#include <optional>

#include "json.hpp"
#include "wpmp/pmp.hpp"

namespace wpmp::cli {

enum ExitStatus : int { kPass = 0, kGateFail = 1, kConfigError = 2, kBlowUp = 3 };

struct NeedleSpec {
  Vector omega;
  double tau;
  double length;
};

/// Parsed scenario. `spec` holds the normalized JSON document (defaults filled in).
struct Scenario {
  nlohmann::json spec;
  int dimension = 1;
  TimeGrid grid{1.0, 1};
  std::uint64_t seed = 0;
  DiscreteMeasure initial = DiscreteMeasure::dirac(Vector::Zero(1));
  KernelPtr kernel;
  BasisPtr basis;
  std::optional<ControlLaw> law;
  ProblemFunctionals functionals;
  MultiplierSet multipliers;
  double costate_sign = 1.0;
  std::vector<ControlField> dictionary;
  std::vector<NeedleSpec> needles;
  int halvings = 3;
  CertificateOptions certificate;
};

struct Overrides {
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
};

/// Builds a scenario; relative file paths resolve against `base_dir`.
/// Throws InvalidArgument / DimensionError / nlohmann::json::exception on bad input.
Scenario load_scenario(const nlohmann::json& doc, const std::string& base_dir = ".", const Overrides& ov = {});
Scenario load_scenario_file(const std::string& path, const Overrides& ov = {});
void save_scenario(const Scenario& sc, const std::string& path);

nlohmann::json certificate_to_json(const PMPCertificate& cert, const TimeGrid& grid);

int cmd_simulate(const std::string& scenario, const std::string& out_dir, const Overrides& ov, std::ostream& log);
int cmd_gradcheck(const std::string& scenario, const Overrides& ov, std::ostream& log);
int cmd_pmp_check(const std::string& scenario, const std::string& out_dir, const Overrides& ov, std::ostream& log);
int cmd_needle_check(const std::string& scenario, const Overrides& ov, std::ostream& log);

}  // namespace wpmp::cli
