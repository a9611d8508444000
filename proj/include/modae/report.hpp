#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "modae/graph.hpp"

namespace modae {

inline constexpr const char* kCodeVersion = "modae 0.1.0";

/// Per-seed outcome of a train or eval run. Metrics that do not apply stay
/// unset and are omitted from emissions.
struct SeedResult {
  uint64_t seed = 0;
  std::optional<double> nmi;
  std::optional<double> ac;
  std::optional<double> q;
  std::optional<double> loss_initial;
  std::optional<double> loss_final;
  int chosen_k = 0;
};

/// Everything a run reports. The `timings` section is wall-clock and therefore
/// excluded from the determinism contract; every other field is a pure
/// function of (spec, seeds, code version).
struct RunReport {
  std::string version = kCodeVersion;
  std::map<std::string, std::string> spec_echo;  // flat key=value echo
  std::vector<SeedResult> per_seed;
  std::vector<std::string> notes;
  std::map<std::string, double> timings;  // phase -> seconds

  std::optional<double> best_nmi() const;
  std::optional<double> median_nmi() const;
  std::optional<double> best_q() const;
  std::optional<double> median_q() const;
};

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& json_text);

/// Flat CSV: seed,k,nmi,ac,q,loss_initial,loss_final ("" for absent values).
std::string report_to_csv(const RunReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

/// Two-column "node-label community-id" text, in node-index order.
void write_assignment(const std::string& path, const Graph& g, const CommunityAssignment& a);

/// k,q,inertia table for K sweeps.
std::string sweep_table_csv(const std::vector<std::array<double, 3>>& rows);

double median(std::vector<double> values);

}  // namespace modae
