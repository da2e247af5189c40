#pragma once

// Run configuration, CSV artifacts and the run manifest.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "scalelaw/spectrum.hpp"

namespace scalelaw {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class SolverKind { simulate, dmft, fourier, sgd, ensemble, asymptote, frontier };

std::string to_string(SolverKind k);

struct SpectrumSource {
  enum class Kind { power_law, white, file } kind = Kind::power_law;
  double a = 1.5, b = 1.25;
  std::size_t M = 512;
  std::string path;
};

struct RunConfig {
  SolverKind solver = SolverKind::dmft;
  std::string output = "out";
  std::vector<std::uint64_t> seeds{1};

  SpectrumSource spectrum;

  // Either counts or ratios; ratios are converted with M once the spectrum is known.
  std::optional<double> N, P, nu, alpha;
  double sigma = 0.0;
  Limit limit = Limit::proportional;

  std::string optimizer = "gd";  // gd | momentum | flow | sgd (simulate only)
  double eta = 0.05;
  double mu = 0.0;
  std::size_t batch = 32;
  std::size_t steps = 200;

  double t_min = 0.1, t_max = 1e3;  // fourier / ensemble / frontier time grid
  std::size_t t_points = 60;
  int talbot_nodes = 24;

  double E = 1, bags = 1;
  // Optional fixed-compute table for the ensemble solver.
  std::optional<double> width_compute;
  std::vector<double> width_E{1, 2, 4, 8};
  double width_t = 100.0;

  std::size_t frontier_buckets = 64;
  double fit_min = 0.0, fit_max = kInf;  // window in C for the frontier fit

  bool with_simulation = false;  // dmft: also write simulator bands

  std::string sweep_parameter;
  std::vector<double> sweep_values;

  std::string text;  // verbatim config
  std::string hash;  // sha256 of text
};

// Parses the [section] key = value grammar; throws ConfigError naming the
// offending section or key.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

Spectrum build_spectrum(const RunConfig& cfg);
SystemShape build_shape(const RunConfig& cfg, const Spectrum& spec);

// Sweepable parameters.
const std::vector<std::string>& sweep_parameters();
// Copy of cfg with the parameter set to value; throws ConfigError for unknown names.
RunConfig with_parameter(const RunConfig& cfg, const std::string& name, double value);
// Sorted unique values; duplicates are reported through `removed`.
std::vector<double> dedup_values(const std::vector<double>& values, std::size_t* removed);

std::vector<double> parse_list(const std::string& s);
std::vector<std::uint64_t> parse_seeds(const std::string& s);

std::string sha256_hex(const std::string& data);

struct Provenance {
  std::string config_hash;
  std::vector<std::uint64_t> seeds;
  std::vector<std::pair<std::string, std::string>> extra;
};

// '#' key: value header lines, then the column line, then rows formatted with %.17g.
void write_csv(const std::string& path, const Provenance& prov,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

struct CsvData {
  std::map<std::string, std::string> header;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};
CsvData read_csv(const std::string& path);

}  // namespace scalelaw
