#include "leki/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace leki {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

const char* const kRowHeader =
    "iter,t,misfit,max_error,rmse,scaled_misfit,trace_cuu,max_diag,min_diag,"
    "r_opnorm,r_onenorm,obs_ratio,reg_ratio";

namespace {

std::string opt_field(const std::optional<double>& x) {
  return x ? format_double(*x) : std::string();
}

std::optional<double> parse_opt(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  return std::stod(cell);
}

}  // namespace

std::string row_to_csv(const MetricsRow& r) {
  std::string s;
  s += std::to_string(r.iter);
  s += ',';
  s += format_double(r.t);
  s += ',';
  s += format_double(r.misfit);
  s += ',';
  s += format_double(r.max_error);
  s += ',';
  s += opt_field(r.rmse);
  s += ',';
  s += opt_field(r.scaled_misfit);
  s += ',';
  s += format_double(r.trace_cuu);
  s += ',';
  s += format_double(r.max_diag);
  s += ',';
  s += format_double(r.min_diag);
  s += ',';
  s += opt_field(r.r_opnorm);
  s += ',';
  s += opt_field(r.r_onenorm);
  s += ',';
  s += opt_field(r.obs_ratio);
  s += ',';
  s += opt_field(r.reg_ratio);
  return s;
}

void write_rows_csv(const std::string& path,
                    const std::vector<MetricsRow>& rows) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << kRowHeader << '\n';
  for (const auto& r : rows) f << row_to_csv(r) << '\n';
}

void write_rows_json(const std::string& path,
                     const std::vector<MetricsRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    nlohmann::json o{{"iter", r.iter},
                     {"t", r.t},
                     {"misfit", r.misfit},
                     {"max_error", r.max_error},
                     {"trace_cuu", r.trace_cuu},
                     {"max_diag", r.max_diag},
                     {"min_diag", r.min_diag}};
    auto put = [&](const char* key, const std::optional<double>& v) {
      if (v) o[key] = *v;
    };
    put("rmse", r.rmse);
    put("scaled_misfit", r.scaled_misfit);
    put("r_opnorm", r.r_opnorm);
    put("r_onenorm", r.r_onenorm);
    put("obs_ratio", r.obs_ratio);
    put("reg_ratio", r.reg_ratio);
    arr.push_back(std::move(o));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot write '" + path + "'");
  f << arr.dump(2) << '\n';
}

std::vector<MetricsRow> read_rows_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read '" + path + "'");
  std::string line;
  if (!std::getline(f, line)) throw ConfigError("empty file '" + path + "'");
  if (line != kRowHeader)
    throw ConfigError("'" + path + "' is not a per-iteration record");
  std::vector<MetricsRow> rows;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    while (cells.size() < 13) cells.emplace_back();
    MetricsRow r;
    r.iter = std::stoi(cells[0]);
    r.t = std::stod(cells[1]);
    r.misfit = std::stod(cells[2]);
    r.max_error = std::stod(cells[3]);
    r.rmse = parse_opt(cells[4]);
    r.scaled_misfit = parse_opt(cells[5]);
    r.trace_cuu = std::stod(cells[6]);
    r.max_diag = std::stod(cells[7]);
    r.min_diag = std::stod(cells[8]);
    r.r_opnorm = parse_opt(cells[9]);
    r.r_onenorm = parse_opt(cells[10]);
    r.obs_ratio = parse_opt(cells[11]);
    r.reg_ratio = parse_opt(cells[12]);
    rows.push_back(std::move(r));
  }
  return rows;
}

}  // namespace leki
