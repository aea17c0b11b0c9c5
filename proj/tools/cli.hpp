#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "gkp/factory.hpp"
#include "gkp/gps.hpp"

namespace gkpsim {

enum class Variant { proposed, cat };

struct RunConfig {
  gkp::factory::FactoryConfig factory;
  // Explicit GPS parameters; any missing piece is solved for.
  std::optional<double> r;
  std::optional<double> input_db;
  std::optional<double> transmittance;
  std::optional<double> p_hd;
  std::optional<double> reference_p_hd;  // expected P_HD for the diagnostic
  std::vector<double> c_scan;
  long c_scan_trials = 50;
  Variant variant = Variant::proposed;
  std::string out = "runs";
  int workers = 0;
  std::string mode;
  std::pair<int, int> m_range{5, 40};
  double sweep_target = 0.10;
};

/// Bad input: unknown fields, wrong types, invalid values. Exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Strict field-by-field load. `where` prefixes diagnostics.
RunConfig config_from_json(const nlohmann::json& j, const std::string& where = "config");
RunConfig load_config_file(const std::string& path);
nlohmann::json config_to_json(const RunConfig& cfg);

/// GKPSIM_<FIELD> variables; only scalar fields are recognised.
void apply_env(RunConfig& cfg, const std::map<std::string, std::string>& env);
std::map<std::string, std::string> environment_with_prefix(const char* prefix = "GKPSIM_");

std::pair<int, int> parse_m_range(const std::string& text);

/// Full validation of everything a subcommand will touch.
void validate(const RunConfig& cfg);

/// r/T from the config, or solved with the envelope rule when absent.
gkp::gps::SolveResult resolve_params(const RunConfig& cfg);

/// Entry point shared by the binary and the tests. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gkpsim
