#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddpose/exchange.hpp"
#include "ddpose/scenario.hpp"
#include "ddpose/solver.hpp"

namespace ddpose {

/// One line of the per-epoch estimates table.
struct EstimateRow {
  UtcTime epoch;
  Method method = Method::vanilla_dd;
  bool ok = false;
  PvState estimate;
  std::optional<EnuVector> error;
  int iterations = 0;
  bool converged = false;
  std::size_t n_sats = 0;
};

/// Epoch-major rows (all methods of an epoch before the next epoch).
std::vector<EstimateRow> estimate_rows(const ScenarioResult& result);

/// Rows from solver reports; an error is attached when `truth` holds a sample at that epoch.
std::vector<EstimateRow> estimate_rows(std::span<const SolutionReport> reports, std::span<const TruthSample> truth);

/// North/east/up error of `estimate` in the tangent plane at `truth`.
EnuVector neu_error(const Vec3& estimate, const Vec3& truth);

std::string format_estimates_csv(std::span<const EstimateRow> rows);
std::vector<EstimateRow> parse_estimates_csv(std::string_view text, const std::string& source_name);

/// Per-method RMSE over rows carrying an error, in order of first appearance (or `methods`).
std::vector<RmseSummary> summarize(std::span<const EstimateRow> rows, std::span<const Method> methods = {});

std::string format_rmse_csv(std::span<const RmseSummary> summary);

/// Fixed-width table with three decimals, one row per method.
std::string format_rmse_table(std::span<const RmseSummary> summary, const std::string& title = {});

/// FeatureCollection with a LineString per method and one for the truth track (when given).
std::string format_geojson(std::span<const EstimateRow> rows, std::span<const TruthSample> truth,
                           std::span<const RmseSummary> summary);

std::vector<TruthSample> truth_samples(const ScenarioResult& result);

}  // namespace ddpose
