#include "ddpose/reports.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>

#include "ddpose/errors.hpp"

namespace ddpose {
namespace {

constexpr std::string_view kEstimateColumns =
    "epoch_iso8601,method,est_x,est_y,est_z,est_vx,est_vy,est_vz,err_n,err_e,err_u,err_3d,iterations,converged,n_sats";

EstimateRow row_from(const EpochSolution& s) {
  EstimateRow r;
  r.epoch = s.epoch;
  r.method = s.method;
  r.ok = s.ok;
  r.estimate = s.estimate;
  r.iterations = s.iterations;
  r.converged = s.converged;
  r.n_sats = s.n_sats;
  return r;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, (comma == std::string_view::npos ? line.size() : comma) - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

}  // namespace

EnuVector neu_error(const Vec3& estimate, const Vec3& truth) {
  return rotate_to_enu(estimate - truth, ecef_to_geodetic(truth));
}

std::vector<EstimateRow> estimate_rows(const ScenarioResult& result) {
  std::vector<EstimateRow> rows;
  for (const auto& e : result.epochs) {
    for (const auto& m : e.methods) {
      EstimateRow r = row_from(m.solution);
      r.error = m.error;
      rows.push_back(r);
    }
  }
  return rows;
}

std::vector<EstimateRow> estimate_rows(std::span<const SolutionReport> reports, std::span<const TruthSample> truth) {
  std::map<UtcTime, const TruthSample*> by_epoch;
  for (const auto& t : truth) by_epoch[t.epoch] = &t;
  std::size_t n_epochs = 0;
  for (const auto& rep : reports) n_epochs = std::max(n_epochs, rep.epochs.size());

  std::vector<EstimateRow> rows;
  for (std::size_t k = 0; k < n_epochs; ++k) {
    for (const auto& rep : reports) {
      if (k >= rep.epochs.size()) continue;
      EstimateRow r = row_from(rep.epochs[k]);
      if (r.ok) {
        if (const auto it = by_epoch.find(r.epoch); it != by_epoch.end()) {
          r.error = neu_error(r.estimate.position, it->second->position);
        }
      }
      rows.push_back(r);
    }
  }
  return rows;
}

std::string format_estimates_csv(std::span<const EstimateRow> rows) {
  std::string out(kEstimateColumns);
  out += '\n';
  for (const auto& r : rows) {
    out += r.epoch.to_iso8601();
    out += ',';
    out += to_string(r.method);
    for (int i = 0; i < 3; ++i) out += "," + (r.ok ? format_double(r.estimate.position[i]) : std::string());
    for (int i = 0; i < 3; ++i) out += "," + (r.ok ? format_double(r.estimate.velocity[i]) : std::string());
    if (r.error) {
      out += "," + format_double(r.error->north) + "," + format_double(r.error->east) + "," +
             format_double(r.error->up) + "," + format_double(r.error->norm());
    } else {
      out += ",,,,";
    }
    out += "," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," + std::to_string(r.n_sats);
    out += '\n';
  }
  return out;
}

std::vector<EstimateRow> parse_estimates_csv(std::string_view text, const std::string& source_name) {
  std::vector<EstimateRow> rows;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, (nl == std::string_view::npos ? text.size() : nl) - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line_no == 1) {
      if (line != kEstimateColumns) throw ParseError(source_name, 1, 1, "unexpected estimates header");
      continue;
    }
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 15) {
      throw ParseError(source_name, line_no, 1, "expected 15 fields, found " + std::to_string(f.size()));
    }
    std::size_t column = 1;
    std::vector<std::size_t> columns;
    for (const auto& field : f) {
      columns.push_back(column);
      column += field.size() + 1;
    }
    const auto fail = [&](std::size_t i, const std::string& msg) -> void {
      throw ParseError(source_name, line_no, columns[i], msg);
    };
    const auto number = [&](std::size_t i) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
      if (f[i].empty() || ec != std::errc() || ptr != f[i].data() + f[i].size()) {
        fail(i, "invalid number '" + std::string(f[i]) + "'");
      }
      return v;
    };
    const auto integer = [&](std::size_t i) {
      long long v = 0;
      const auto [ptr, ec] = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
      if (f[i].empty() || ec != std::errc() || ptr != f[i].data() + f[i].size() || v < 0) {
        fail(i, "invalid integer '" + std::string(f[i]) + "'");
      }
      return v;
    };

    EstimateRow r;
    try {
      r.epoch = UtcTime::parse_iso8601(f[0]);
    } catch (const std::exception& e) {
      fail(0, std::string("invalid epoch: ") + e.what());
    }
    try {
      r.method = method_from_string(f[1]);
    } catch (const std::exception& e) {
      fail(1, e.what());
    }
    r.ok = !f[2].empty();
    if (r.ok) {
      for (int i = 0; i < 3; ++i) r.estimate.position[i] = number(2 + i);
      for (int i = 0; i < 3; ++i) r.estimate.velocity[i] = number(5 + i);
    }
    if (!f[8].empty()) r.error = EnuVector{number(9), number(8), number(10)};
    r.iterations = static_cast<int>(integer(12));
    r.converged = integer(13) != 0;
    r.n_sats = static_cast<std::size_t>(integer(14));
    rows.push_back(r);
  }
  if (line_no == 0) throw ParseError(source_name, 1, 1, "empty estimates file");
  return rows;
}

std::vector<RmseSummary> summarize(std::span<const EstimateRow> rows, std::span<const Method> methods) {
  std::vector<Method> order(methods.begin(), methods.end());
  if (order.empty()) {
    for (const auto& r : rows) {
      if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
    }
  }
  std::vector<RmseSummary> out;
  for (const Method m : order) {
    std::vector<EnuVector> errors;
    std::size_t total = 0, converged = 0;
    for (const auto& r : rows) {
      if (r.method != m) continue;
      ++total;
      if (r.ok && r.converged) ++converged;
      if (r.error) errors.push_back(*r.error);
    }
    RmseSummary s;
    if (!errors.empty()) s = rmse_neu(errors);
    s.method = m;
    s.total_epochs = total;
    s.convergence_rate = total ? static_cast<double>(converged) / static_cast<double>(total) : 0.0;
    out.push_back(s);
  }
  return out;
}

std::string format_rmse_csv(std::span<const RmseSummary> summary) {
  std::string out = "method,rmse_n,rmse_e,rmse_u,rmse_3d,epochs_solved,epochs_total,convergence_rate\n";
  for (const auto& s : summary) {
    out += std::string(to_string(s.method)) + "," + format_double(s.north) + "," + format_double(s.east) + "," +
           format_double(s.up) + "," + format_double(s.three_d) + "," + std::to_string(s.epoch_count) + "," +
           std::to_string(s.total_epochs) + "," + format_double(s.convergence_rate) + "\n";
  }
  return out;
}

std::string format_rmse_table(std::span<const RmseSummary> summary, const std::string& title) {
  std::string out;
  if (!title.empty()) out += title + "\n";
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-12s %10s %10s %10s %10s %9s\n", "method", "N (m)", "E (m)", "U (m)", "3-D (m)",
                "epochs");
  out += buf;
  for (const auto& s : summary) {
    const std::string epochs = std::to_string(s.epoch_count) + "/" + std::to_string(s.total_epochs);
    std::snprintf(buf, sizeof buf, "%-12s %10.3f %10.3f %10.3f %10.3f %9s\n", std::string(to_string(s.method)).c_str(),
                  s.north, s.east, s.up, s.three_d, epochs.c_str());
    out += buf;
  }
  return out;
}

std::string format_geojson(std::span<const EstimateRow> rows, std::span<const TruthSample> truth,
                           std::span<const RmseSummary> summary) {
  using Json = nlohmann::ordered_json;
  const auto point = [](const Vec3& ecef) {
    const GeodeticCoord g = ecef_to_geodetic(ecef);
    return Json::array({g.longitude_deg, g.latitude_deg, g.height_m});
  };
  Json features = Json::array();
  if (!truth.empty()) {
    Json coords = Json::array();
    for (const auto& t : truth) coords.push_back(point(t.position));
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties", {{"method", "truth"}}}});
  }
  std::vector<Method> order;
  for (const auto& r : rows) {
    if (std::find(order.begin(), order.end(), r.method) == order.end()) order.push_back(r.method);
  }
  for (const Method m : order) {
    Json coords = Json::array();
    for (const auto& r : rows) {
      if (r.method == m && r.ok) coords.push_back(point(r.estimate.position));
    }
    Json props = {{"method", std::string(to_string(m))}};
    for (const auto& s : summary) {
      if (s.method != m) continue;
      props["rmse_n"] = s.north;
      props["rmse_e"] = s.east;
      props["rmse_u"] = s.up;
      props["rmse_3d"] = s.three_d;
    }
    features.push_back({{"type", "Feature"},
                        {"geometry", {{"type", "LineString"}, {"coordinates", coords}}},
                        {"properties", props}});
  }
  const Json doc = {{"type", "FeatureCollection"}, {"features", features}};
  return doc.dump(1) + "\n";
}

std::vector<TruthSample> truth_samples(const ScenarioResult& result) {
  std::vector<TruthSample> out;
  out.reserve(result.epochs.size());
  for (const auto& e : result.epochs) out.push_back({e.truth.epoch, e.truth.position, e.truth.velocity});
  return out;
}

}  // namespace ddpose
