#include "fock/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace fock::io {

namespace {

double require_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + "." + key + ": missing");
  if (!j.at(key).is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return j.at(key).get<double>();
}

double positive_number(const json& j, const std::string& key, const std::string& where) {
  const double v = require_number(j, key, where);
  if (!(v > 0.0)) throw ConfigError(where + "." + key + ": must be positive");
  return v;
}

weights::RadialPower radial_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  return {positive_number(j, "alpha", where), positive_number(j, "coeff", where)};
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& text, const std::string& where) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\r' || last[-1] == '\t')) --last;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ConfigError(where + ": not a number: '" + text + "'");
  return v;
}

}  // namespace

void Table::add(std::vector<double> row) {
  if (row.size() != columns.size()) {
    throw DomainError("table " + name + ": row has " + std::to_string(row.size()) + " cells, expected " +
                      std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw Error("format_double failed");
  return std::string(buf, ptr);
}

weights::WeightSpec weight_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw ConfigError("weight: expected an object");
  if (!j.contains("family") || !j.at("family").is_string()) throw ConfigError("weight.family: missing");
  const auto family = j.at("family").get<std::string>();
  weights::WeightSpec spec;
  if (family == "radial_power") {
    spec.family = radial_from_json(j, "weight");
  } else if (family == "perturbed_radial") {
    if (!j.contains("base")) throw ConfigError("weight.base: missing");
    weights::PerturbedRadial p;
    p.base = radial_from_json(j.at("base"), "weight.base");
    if (j.contains("bumps")) {
      if (!j.at("bumps").is_array()) throw ConfigError("weight.bumps: expected an array");
      std::size_t k = 0;
      for (const auto& b : j.at("bumps")) {
        const std::string where = "weight.bumps[" + std::to_string(k++) + "]";
        if (!b.is_object()) throw ConfigError(where + ": expected an object");
        weights::Bump bump;
        if (!b.contains("center") || !b.at("center").is_array() || b.at("center").size() != 2 ||
            !b.at("center")[0].is_number() || !b.at("center")[1].is_number()) {
          throw ConfigError(where + ".center: expected [x, y]");
        }
        bump.center = {b.at("center")[0].get<double>(), b.at("center")[1].get<double>()};
        bump.height = require_number(b, "height", where);
        bump.width = positive_number(b, "width", where);
        p.bumps.push_back(bump);
      }
    }
    spec.family = std::move(p);
  } else if (family == "grid_sampled") {
    if (!j.contains("csv") || !j.at("csv").is_string()) throw ConfigError("weight.csv: missing");
    fs::path path = j.at("csv").get<std::string>();
    if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
    spec.family = weights::GridSampled{std::make_shared<const GridField>(read_grid_field(path))};
  } else {
    throw ConfigError("weight.family: unknown family '" + family + "'");
  }
  try {
    spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("weight: ") + e.what());
  }
  return spec;
}

json weight_to_json(const weights::WeightSpec& spec) {
  if (const auto* p = std::get_if<weights::RadialPower>(&spec.family)) {
    return {{"family", "radial_power"}, {"alpha", p->alpha}, {"coeff", p->coeff}};
  }
  if (const auto* p = std::get_if<weights::PerturbedRadial>(&spec.family)) {
    json bumps = json::array();
    for (const auto& b : p->bumps) {
      bumps.push_back({{"center", {b.center.real(), b.center.imag()}}, {"height", b.height}, {"width", b.width}});
    }
    return {{"family", "perturbed_radial"},
            {"base", {{"alpha", p->base.alpha}, {"coeff", p->base.coeff}}},
            {"bumps", bumps}};
  }
  const auto& g = std::get<weights::GridSampled>(spec.family);
  return {{"family", "grid_sampled"}, {"L", g.field->grid().half_width()}, {"n", g.field->grid().n()}};
}

void write_csv(const Table& table, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  write_csv(table, os);
}

void write_csv(const Table& table, std::ostream& os) {
  for (std::size_t c = 0; c < table.columns.size(); ++c) os << (c ? "," : "") << table.columns[c];
  os << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << format_double(row[c]);
    os << '\n';
  }
}

Table read_csv(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  Table t;
  t.name = path.stem().string();
  std::string line;
  if (!std::getline(is, line)) throw ConfigError(path.string() + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  t.columns = split(line, ',');
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line, ',');
    const std::string where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != t.columns.size()) throw ConfigError(where + ": wrong number of cells");
    std::vector<double> row;
    for (const auto& c : cells) row.push_back(parse_double(c, where));
    t.rows.push_back(std::move(row));
  }
  return t;
}

Table grid_field_table(const GridField& field, std::string name) {
  Table t{std::move(name), kGridColumns, {}};
  const Grid& g = field.grid();
  t.rows.reserve(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx z = g.node(k);
    t.rows.push_back({z.real(), z.imag(), field[k]});
  }
  return t;
}

void write_grid_field(const GridField& field, const fs::path& path) {
  write_csv(grid_field_table(field, path.stem().string()), path);
  fs::path side = path;
  side.replace_extension(".json");
  write_json({{"L", field.grid().half_width()},
              {"n", field.grid().n()},
              {"meaning", std::string(to_string(field.meaning()))}},
             side);
}

GridField read_grid_field(const fs::path& path) {
  fs::path side = path;
  side.replace_extension(".json");
  const json meta = read_json(side);
  const double L = positive_number(meta, "L", side.string());
  const double n_raw = positive_number(meta, "n", side.string());
  const auto n = static_cast<std::size_t>(n_raw);
  if (!meta.contains("meaning") || !meta.at("meaning").is_string()) {
    throw ConfigError(side.string() + ".meaning: missing");
  }
  const Grid grid(L, n);
  const Table t = read_csv(path);
  if (t.columns != kGridColumns) throw ConfigError(path.string() + ": expected columns re,im,value");
  if (t.rows.size() != grid.size()) throw ConfigError(path.string() + ": expected n*n rows");
  std::vector<double> values(grid.size());
  const double tol = 1e-9 * (1.0 + L);
  for (const auto& row : t.rows) {
    const std::size_t k = grid.snap({row[0], row[1]});
    if (std::abs(grid.node(k) - cplx{row[0], row[1]}) > tol) {
      throw ConfigError(path.string() + ": point off the grid");
    }
    values[k] = row[2];
  }
  return GridField(grid, meaning_from_string(meta.at("meaning").get<std::string>()), std::move(values));
}

json to_json(const bergman::DecayFit& fit) {
  return {{"model", std::string(bergman::to_string(fit.model))},
          {"C_fit", fit.C_fit},
          {"eps_fit", fit.eps_fit},
          {"coverage", fit.coverage},
          {"rate", fit.rate},
          {"fit_used", fit.fit_used},
          {"holdout_used", fit.holdout_used}};
}

json to_json(const dbar::SolveReport& r) {
  return {{"method", std::string(dbar::to_string(r.method))},
          {"residual", r.residual},
          {"norm_u", r.norm_u},
          {"orthogonality_defect", r.orthogonality_defect},
          {"norm_u0", r.norm_u0},
          {"norm_projection", r.norm_projection},
          {"grid_nodes", r.grid_nodes},
          {"active_centers", r.active_centers}};
}

void write_json(const json& j, const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << j.dump(2) << '\n';
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read " + path.string());
  try {
    return json::parse(is);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::pair<cplx, cplx>> read_pairs(const fs::path& path) {
  const Table t = read_csv(path);
  const std::vector<std::string> want{"z_re", "z_im", "zeta_re", "zeta_im"};
  std::vector<std::size_t> col;
  for (const auto& name : want) {
    auto it = std::find(t.columns.begin(), t.columns.end(), name);
    if (it == t.columns.end()) throw ConfigError(path.string() + ": missing column " + name);
    col.push_back(static_cast<std::size_t>(it - t.columns.begin()));
  }
  std::vector<std::pair<cplx, cplx>> out;
  for (const auto& r : t.rows) out.emplace_back(cplx{r[col[0]], r[col[1]]}, cplx{r[col[2]], r[col[3]]});
  return out;
}

cplx parse_point(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 2) throw ConfigError("point: expected 'x,y', got '" + text + "'");
  return {parse_double(parts[0], "point"), parse_double(parts[1], "point")};
}

}  // namespace fock::io
