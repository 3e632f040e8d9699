#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace eqsem::driver {

/// Raised for configurations rejected before any computation.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Run, Sweep, Compare };
enum class Method { Equilibrium, Fem };

struct MeshSize {
  int nx = 1, ny = 1;
};

struct RunConfig {
  std::string case_id;
  std::vector<int> orders{2};
  std::vector<MeshSize> meshes;        // square cases
  std::vector<double> element_sizes;   // lshape
  double c = 0.0;
  bool gll_rotation = false;
  Method method = Method::Equilibrium;
  int fem_order = 1;
  std::filesystem::path out{"out"};
  int samples = 100;       // per direction per element, for metrics
  int field_samples = 5;   // per direction per element, for fields.csv
  double overint = 0.0;    // compliance Gauss points on curved maps = overint * (N + 1); 0 = default

  /// Number of (order, mesh) points the configuration describes.
  [[nodiscard]] int point_count() const;
  [[nodiscard]] nlohmann::json to_json() const;
};

/// Builds a validated configuration from key/value strings (the long option
/// names without dashes; lists comma separated). Throws ConfigError.
[[nodiscard]] RunConfig parse_config(const std::map<std::string, std::string>& values, Mode mode);
/// Flattens a JSON config object into the same key/value form.
[[nodiscard]] std::map<std::string, std::string> flatten_config(const nlohmann::json& j);

/// Executes the mode and writes its output files into config.out. Returns
/// the summary that was written.
nlohmann::json run(const RunConfig& config);
nlohmann::json sweep(const RunConfig& config);
nlohmann::json compare(const RunConfig& config);

/// %.17g, with "nan" / "inf" spelled out.
[[nodiscard]] std::string format_double(double v);
/// Writes via a temporary file and rename.
void write_atomic(const std::filesystem::path& path, const std::string& content);

[[nodiscard]] const char* build_id();

}  // namespace eqsem::driver
