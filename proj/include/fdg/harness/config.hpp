#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fdg/basis.hpp"
#include "fdg/core1d.hpp"
#include "fdg/errors.hpp"
#include "fdg/euler.hpp"

namespace fdg::harness {

using json = nlohmann::json;

enum class Experiment { Equivalence, Convergence1d, Convergence2d, Sedov, Freestream };

inline const std::vector<std::pair<Experiment, const char*>>& experiment_names() {
  static const std::vector<std::pair<Experiment, const char*>> names{
      {Experiment::Equivalence, "equivalence"},
      {Experiment::Convergence1d, "convergence1d"},
      {Experiment::Convergence2d, "convergence2d"},
      {Experiment::Sedov, "sedov"},
      {Experiment::Freestream, "freestream"}};
  return names;
}

inline const char* to_string(Experiment e) {
  for (const auto& [k, s] : experiment_names())
    if (k == e) return s;
  return "?";
}

inline const char* describe(Experiment e) {
  switch (e) {
    case Experiment::Equivalence:
      return "matrix-form vs telescoping 1D RHS in lockstep, L2 difference table";
    case Experiment::Convergence1d:
      return "1D manufactured advection, L2 density error and slopes";
    case Experiment::Convergence2d:
      return "2D manufactured advection, L2 density error and slopes";
    case Experiment::Sedov:
      return "Gaussian Sedov blast with subcell DG/FV limiting";
    case Experiment::Freestream:
      return "constant state on a warped mesh, max |u_t| and subcell closure";
  }
  return "?";
}

/// Resolved run configuration. Lists hold the refinement sweep for table
/// experiments; single runs use the first entry.
struct RunConfig {
  Experiment experiment = Experiment::Sedov;
  NodeKind nodes = NodeKind::Gauss;
  std::vector<int> degrees;
  std::vector<std::size_t> elements;  ///< elements per direction
  double cfl = 0.0;
  double t_end = 0.0;
  double gamma = 1.4;
  euler::TwoPointFlux volume_flux = euler::TwoPointFlux::Chandrashekar;
  bool dissipative_interface = true;  ///< LLF if true, central volume flux otherwise
  FaceProjection projection = FaceProjection::Entropy;
  bool limiting = false;
  double warp_amplitude = 0.0;
  std::vector<double> snapshots;
  std::string output = "out";
  std::uint64_t seed = 0;
  bool paper_scale = false;

  euler::GasModel gas() const { return euler::GasModel{gamma}; }
  euler::SurfaceFlux surface_flux() const { return {volume_flux, dissipative_interface}; }
};

namespace detail {

template <class E>
E parse_enum(const json& j, const char* key,
             const std::vector<std::pair<E, const char*>>& table) {
  if (!j.is_string()) throw ConfigError(std::string(key) + " must be a string");
  const auto s = j.get<std::string>();
  for (const auto& [k, name] : table)
    if (s == name) return k;
  std::string opts;
  for (const auto& [k, name] : table) opts += (opts.empty() ? "" : ", ") + std::string(name);
  throw ConfigError(std::string(key) + ": unknown value '" + s + "' (expected one of " + opts + ")");
}

template <class E>
const char* enum_name(E v, const std::vector<std::pair<E, const char*>>& table) {
  for (const auto& [k, name] : table)
    if (k == v) return name;
  return "?";
}

inline const std::vector<std::pair<NodeKind, const char*>> node_names{
    {NodeKind::Gauss, "gauss"}, {NodeKind::GaussLobatto, "lobatto"}};
inline const std::vector<std::pair<euler::TwoPointFlux, const char*>> flux_names{
    {euler::TwoPointFlux::Chandrashekar, "chandrashekar"}, {euler::TwoPointFlux::Average, "average"}};
inline const std::vector<std::pair<bool, const char*>> interface_names{{true, "llf"},
                                                                       {false, "central"}};
inline const std::vector<std::pair<FaceProjection, const char*>> projection_names{
    {FaceProjection::Entropy, "entropy"}, {FaceProjection::Conservative, "conservative"}};

template <class T>
std::vector<T> scalar_or_list(const json& j, const char* key) {
  std::vector<T> out;
  try {
    if (j.is_array())
      for (const auto& x : j) out.push_back(x.get<T>());
    else
      out.push_back(j.get<T>());
  } catch (const json::exception&) {
    throw ConfigError(std::string(key) + " must be a number or a list of numbers");
  }
  return out;
}

}  // namespace detail

/// Defaults for an experiment at desk or full scale.
inline RunConfig defaults(Experiment e, bool paper_scale = false) {
  RunConfig c;
  c.experiment = e;
  c.paper_scale = paper_scale;
  switch (e) {
    case Experiment::Equivalence:
      c.degrees = {1, 2, 3, 4, 5};
      c.elements = paper_scale ? std::vector<std::size_t>{4, 8, 16, 32, 64}
                               : std::vector<std::size_t>{4, 8, 16};
      c.cfl = 0.125;
      c.t_end = 0.7;
      break;
    case Experiment::Convergence1d:
      c.degrees = {2, 3, 4};
      c.elements = paper_scale ? std::vector<std::size_t>{4, 8, 16, 32}
                               : std::vector<std::size_t>{4, 8, 16};
      c.cfl = 0.125;
      c.t_end = 0.7;
      break;
    case Experiment::Convergence2d:
      c.degrees = {2, 3, 4};
      c.elements = paper_scale ? std::vector<std::size_t>{4, 8, 16, 32}
                               : std::vector<std::size_t>{4, 8, 16};
      c.cfl = 0.125;
      c.t_end = 0.7;
      break;
    case Experiment::Sedov:
      c.degrees = {3};
      c.elements = {paper_scale ? std::size_t{64} : std::size_t{16}};
      c.cfl = 0.9;
      c.t_end = 1.0;
      c.volume_flux = euler::TwoPointFlux::Average;
      c.limiting = true;
      c.snapshots = {0.6, 1.0};
      break;
    case Experiment::Freestream:
      c.degrees = {3};
      c.elements = {4};
      c.warp_amplitude = 0.06;
      break;
  }
  c.output = std::string("out/") + to_string(e);
  return c;
}

/// Builds a configuration from JSON. Unknown keys are rejected; missing keys
/// take the experiment defaults. `paper_scale` selects the larger defaults
/// and is also honoured as a JSON key.
inline RunConfig parse_config(const json& j, bool paper_scale = false) {
  if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
  if (!j.contains("experiment")) throw ConfigError("missing required key 'experiment'");
  static const std::vector<std::string> known{
      "experiment", "nodes",      "N",          "K",         "cfl",
      "t_end",      "gamma",      "volume_flux", "interface_flux", "projection",
      "limiting",   "warp_amplitude", "snapshots", "output",    "seed",
      "paper_scale"};
  for (const auto& [key, _] : j.items())
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError("unknown configuration key '" + key + "'");

  const auto exp = detail::parse_enum(j["experiment"], "experiment", experiment_names());
  if (j.contains("paper_scale")) {
    if (!j["paper_scale"].is_boolean()) throw ConfigError("paper_scale must be a boolean");
    paper_scale = paper_scale || j["paper_scale"].get<bool>();
  }
  RunConfig c = defaults(exp, paper_scale);

  auto number = [&](const char* key, double& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_number()) throw ConfigError(std::string(key) + " must be a number");
    dst = j[key].get<double>();
  };
  auto boolean = [&](const char* key, bool& dst) {
    if (!j.contains(key)) return;
    if (!j[key].is_boolean()) throw ConfigError(std::string(key) + " must be a boolean");
    dst = j[key].get<bool>();
  };

  if (j.contains("nodes")) c.nodes = detail::parse_enum(j["nodes"], "nodes", detail::node_names);
  if (j.contains("N")) c.degrees = detail::scalar_or_list<int>(j["N"], "N");
  if (j.contains("K")) {
    for (double k : detail::scalar_or_list<double>(j["K"], "K"))
      if (!(k >= 1.0) || k != static_cast<double>(static_cast<std::size_t>(k)))
        throw ConfigError("K entries must be positive integers");
    c.elements.clear();
    for (double k : detail::scalar_or_list<double>(j["K"], "K"))
      c.elements.push_back(static_cast<std::size_t>(k));
  }
  number("cfl", c.cfl);
  number("t_end", c.t_end);
  number("gamma", c.gamma);
  if (j.contains("volume_flux"))
    c.volume_flux = detail::parse_enum(j["volume_flux"], "volume_flux", detail::flux_names);
  if (j.contains("interface_flux"))
    c.dissipative_interface =
        detail::parse_enum(j["interface_flux"], "interface_flux", detail::interface_names);
  if (j.contains("projection"))
    c.projection = detail::parse_enum(j["projection"], "projection", detail::projection_names);
  boolean("limiting", c.limiting);
  number("warp_amplitude", c.warp_amplitude);
  if (j.contains("snapshots")) c.snapshots = detail::scalar_or_list<double>(j["snapshots"], "snapshots");
  if (j.contains("output")) {
    if (!j["output"].is_string()) throw ConfigError("output must be a string");
    c.output = j["output"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0))
      throw ConfigError("seed must be a nonnegative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  return c;
}

/// Checks value ranges and experiment-specific requirements.
inline void validate(const RunConfig& c) {
  if (c.degrees.empty()) throw ConfigError("N must not be empty");
  for (int n : c.degrees)
    if (n < 1 || n > max_degree)
      throw ConfigError("N = " + std::to_string(n) + " outside 1.." + std::to_string(max_degree));
  if (c.elements.empty()) throw ConfigError("K must not be empty");
  if (!(c.gamma > 1.0)) throw ConfigError("gamma must exceed 1");
  if (!(c.t_end >= 0.0)) throw ConfigError("t_end must be nonnegative");
  if (c.output.empty()) throw ConfigError("output directory must not be empty");
  for (double s : c.snapshots)
    if (!(s >= 0.0) || s > c.t_end) throw ConfigError("snapshot times must lie in [0, t_end]");
  const bool dynamic = c.experiment != Experiment::Freestream;
  if (dynamic && !(c.cfl > 0.0)) throw ConfigError("cfl must be positive");
  if (c.experiment == Experiment::Sedov && !c.limiting)
    throw ConfigError("the sedov experiment requires limiting");
  if (c.limiting && c.experiment != Experiment::Sedov)
    throw ConfigError("limiting is only available for the sedov experiment");
  if (c.experiment == Experiment::Equivalence && c.nodes != NodeKind::Gauss)
    throw ConfigError("equivalence compares two Gauss formulations; nodes must be gauss");
  if (!(c.warp_amplitude >= 0.0)) throw ConfigError("warp_amplitude must be nonnegative");
  if (c.experiment != Experiment::Freestream && c.experiment != Experiment::Convergence2d &&
      c.warp_amplitude != 0.0)
    throw ConfigError("warp_amplitude applies to convergence2d and freestream only");
}

inline json to_json(const RunConfig& c) {
  json j;
  j["experiment"] = to_string(c.experiment);
  j["nodes"] = detail::enum_name(c.nodes, detail::node_names);
  j["N"] = c.degrees;
  j["K"] = c.elements;
  j["cfl"] = c.cfl;
  j["t_end"] = c.t_end;
  j["gamma"] = c.gamma;
  j["volume_flux"] = detail::enum_name(c.volume_flux, detail::flux_names);
  j["interface_flux"] = detail::enum_name(c.dissipative_interface, detail::interface_names);
  j["projection"] = detail::enum_name(c.projection, detail::projection_names);
  j["limiting"] = c.limiting;
  j["warp_amplitude"] = c.warp_amplitude;
  j["snapshots"] = c.snapshots;
  j["output"] = c.output;
  j["seed"] = c.seed;
  j["paper_scale"] = c.paper_scale;
  return j;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read configuration file " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

/// Creates the output directory and checks that it accepts files.
inline void prepare_output(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir + ": " + ec.message());
  const auto probe = std::filesystem::path(dir) / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw ConfigError("output directory " + dir + " is not writable");
  }
  std::filesystem::remove(probe, ec);
}

}  // namespace fdg::harness
