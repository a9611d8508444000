#include "modae/report.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace modae {

namespace {

using nlohmann::json;

std::optional<double> metric_best(const std::vector<SeedResult>& seeds,
                                  std::optional<double> SeedResult::*field) {
  std::optional<double> best;
  for (const auto& s : seeds) {
    if (s.*field && (!best || *(s.*field) > *best)) best = *(s.*field);
  }
  return best;
}

std::optional<double> metric_median(const std::vector<SeedResult>& seeds,
                                    std::optional<double> SeedResult::*field) {
  std::vector<double> vals;
  for (const auto& s : seeds) {
    if (s.*field) vals.push_back(*(s.*field));
  }
  if (vals.empty()) return std::nullopt;
  return median(std::move(vals));
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of empty set");
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return (n % 2 == 1) ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::optional<double> RunReport::best_nmi() const { return metric_best(per_seed, &SeedResult::nmi); }
std::optional<double> RunReport::median_nmi() const { return metric_median(per_seed, &SeedResult::nmi); }
std::optional<double> RunReport::best_q() const { return metric_best(per_seed, &SeedResult::q); }
std::optional<double> RunReport::median_q() const { return metric_median(per_seed, &SeedResult::q); }

std::string report_to_json(const RunReport& report) {
  json j;
  j["version"] = report.version;
  j["spec"] = report.spec_echo;
  json seeds = json::array();
  for (const auto& s : report.per_seed) {
    json e;
    e["seed"] = s.seed;
    e["k"] = s.chosen_k;
    if (s.nmi) e["nmi"] = *s.nmi;
    if (s.ac) e["ac"] = *s.ac;
    if (s.q) e["q"] = *s.q;
    if (s.loss_initial) e["loss_initial"] = *s.loss_initial;
    if (s.loss_final) e["loss_final"] = *s.loss_final;
    seeds.push_back(std::move(e));
  }
  j["per_seed"] = std::move(seeds);
  json summary;
  if (auto v = report.best_nmi()) summary["best_nmi"] = *v;
  if (auto v = report.median_nmi()) summary["median_nmi"] = *v;
  if (auto v = report.best_q()) summary["best_q"] = *v;
  if (auto v = report.median_q()) summary["median_q"] = *v;
  j["summary"] = std::move(summary);
  j["notes"] = report.notes;
  j["timings"] = report.timings;
  return j.dump(2) + "\n";
}

RunReport report_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  RunReport r;
  r.version = j.at("version").get<std::string>();
  r.spec_echo = j.at("spec").get<std::map<std::string, std::string>>();
  for (const auto& e : j.at("per_seed")) {
    SeedResult s;
    s.seed = e.at("seed").get<uint64_t>();
    s.chosen_k = e.at("k").get<int>();
    if (e.contains("nmi")) s.nmi = e["nmi"].get<double>();
    if (e.contains("ac")) s.ac = e["ac"].get<double>();
    if (e.contains("q")) s.q = e["q"].get<double>();
    if (e.contains("loss_initial")) s.loss_initial = e["loss_initial"].get<double>();
    if (e.contains("loss_final")) s.loss_final = e["loss_final"].get<double>();
    r.per_seed.push_back(std::move(s));
  }
  r.notes = j.at("notes").get<std::vector<std::string>>();
  r.timings = j.at("timings").get<std::map<std::string, double>>();
  return r;
}

namespace {

std::string csv_number(const std::optional<double>& v) {
  if (!v) return "";
  json num = *v;  // shortest round-trip formatting
  return num.dump();
}

}  // namespace

std::string report_to_csv(const RunReport& report) {
  std::ostringstream out;
  out << "seed,k,nmi,ac,q,loss_initial,loss_final\n";
  for (const auto& s : report.per_seed) {
    out << s.seed << ',' << s.chosen_k << ',' << csv_number(s.nmi) << ',' << csv_number(s.ac)
        << ',' << csv_number(s.q) << ',' << csv_number(s.loss_initial) << ','
        << csv_number(s.loss_final) << '\n';
  }
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
  if (!out) throw std::runtime_error("failed while writing " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_assignment(const std::string& path, const Graph& g, const CommunityAssignment& a) {
  if (static_cast<int>(a.labels.size()) != g.n_nodes) {
    throw std::invalid_argument("assignment does not cover the graph");
  }
  std::ostringstream out;
  for (int i = 0; i < g.n_nodes; ++i) {
    out << g.node_names[static_cast<size_t>(i)] << ' ' << a.labels[static_cast<size_t>(i)] << '\n';
  }
  write_text_file(path, out.str());
}

std::string sweep_table_csv(const std::vector<std::array<double, 3>>& rows) {
  std::ostringstream out;
  out << "k,q,inertia\n";
  for (const auto& row : rows) {
    out << static_cast<int>(row[0]) << ',' << json(row[1]).dump() << ',' << json(row[2]).dump()
        << '\n';
  }
  return out.str();
}

}  // namespace modae
