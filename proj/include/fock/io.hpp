#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fock/bergman.hpp"
#include "fock/dbar.hpp"
#include "fock/grid.hpp"
#include "fock/weights.hpp"

namespace fock::io {

using json = nlohmann::json;
namespace fs = std::filesystem;

/// Point table with a declared column order.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add(std::vector<double> row);
};

inline const std::vector<std::string> kGridColumns{"re", "im", "value"};
inline const std::vector<std::string> kDistanceColumns{"z_re", "z_im", "zeta_re", "zeta_im", "dphi"};
inline const std::vector<std::string> kKernelColumns{"z_re",  "z_im", "zeta_re",   "zeta_im",
                                                     "K_re", "K_im", "normalized"};
inline const std::vector<std::string> kProbeColumns{"abs_zj", "rho_zj", "norm_uj", "ratio"};

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

/// {"family":"radial_power","alpha":..,"coeff":..},
/// {"family":"perturbed_radial","base":{"alpha":..,"coeff":..},"bumps":[{"center":[x,y],"height":..,"width":..}]},
/// {"family":"grid_sampled","csv":"path"} (GridField CSV with its sidecar).
/// Throws ConfigError naming the offending field.
weights::WeightSpec weight_from_json(const json& j, const fs::path& base_dir = {});
json weight_to_json(const weights::WeightSpec& spec);

void write_csv(const Table& table, const fs::path& path);
void write_csv(const Table& table, std::ostream& os);
Table read_csv(const fs::path& path);

/// CSV `re,im,value` at `path` and the sidecar {L, n, meaning} next to it
/// (same stem, extension .json).
void write_grid_field(const GridField& field, const fs::path& path);
GridField read_grid_field(const fs::path& path);
Table grid_field_table(const GridField& field, std::string name);

json to_json(const bergman::DecayFit& fit);
json to_json(const dbar::SolveReport& report);

/// Deterministic pretty print with a trailing newline.
void write_json(const json& j, const fs::path& path);
json read_json(const fs::path& path);

/// Pairs from a CSV with columns z_re,z_im,zeta_re,zeta_im (header required).
std::vector<std::pair<cplx, cplx>> read_pairs(const fs::path& path);

/// "x,y" to a complex number; throws ConfigError.
cplx parse_point(const std::string& text);

}  // namespace fock::io
