#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "doctest.h"
#include "fdsched/harness.hpp"
#include "json.hpp"

using namespace fdsched;
namespace fs = std::filesystem;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.n_slots = 20000;
  cfg.n_drops = 3;
  cfg.master_seed = 11;
  cfg.threads = 2;
  return cfg;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("fdsched_test_" + name);
  fs::remove_all(p);
  return p;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::vector<std::map<std::string, std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  std::vector<std::map<std::string, std::string>> rows;
  while (std::getline(in, line)) {
    const auto cells = split(line);
    REQUIRE(cells.size() == header.size());
    std::map<std::string, std::string> row;
    for (std::size_t i = 0; i < header.size(); ++i) row[header[i]] = cells[i];
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("fraction parsing") {
  CHECK(parse_fraction("1/8") == 0.125);
  CHECK(parse_fraction("0.25") == 0.25);
  CHECK(parse_fraction(" 3 / 16 ") == doctest::Approx(3.0 / 16));
  CHECK_THROWS_AS(parse_fraction("1/0"), std::invalid_argument);
  CHECK_THROWS_AS(parse_fraction("abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_fraction("1/8x"), std::invalid_argument);
}

TEST_CASE("config defaults and overrides") {
  const SimConfig def = parse_config("{}");
  CHECK(def.cell.n_users == 4);
  CHECK(def.demands.lower_ul == std::vector<double>(4, 0.125));
  CHECK(def.run_tbs);
  CHECK(def.run_hd);

  const SimConfig cfg = parse_config(R"({
    "cell": {"n_users": 3, "placement": {"model": "hotspot", "n_hotspots": 3, "radius": 8}},
    "channel": {"sim_db": 60},
    "demands": {"lower_ul": "1/8", "lower_dl": [0.1, "1/5", 0], "upper_dl": 0.5},
    "scenario": "all_sic",
    "schedulers": ["tbs"],
    "seed": 99, "n_slots": 1234, "n_drops": 2,
    "optimizer": {"step_size": 0.01}
  })");
  CHECK(cfg.cell.n_users == 3);
  REQUIRE(std::holds_alternative<HotspotPlacement>(cfg.cell.placement));
  CHECK(std::get<HotspotPlacement>(cfg.cell.placement).n_hotspots == 3);
  CHECK(cfg.channel.sim_db == 60.0);
  CHECK(cfg.demands.lower_ul == std::vector<double>(3, 0.125));
  CHECK(cfg.demands.lower_dl[1] == doctest::Approx(0.2));
  CHECK(cfg.demands.upper_dl == std::vector<double>(3, 0.5));
  CHECK(cfg.scenario == Scenario::AllSic);
  CHECK(cfg.run_tbs);
  CHECK_FALSE(cfg.run_hd);
  CHECK(cfg.master_seed == 99);
  CHECK(cfg.optimizer.step_size == 0.01);
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config("[1,2]"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"n_slot": 5})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"cell": {"placement": {"model": "ring"}}})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"scenario": "half"})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"schedulers": ["atbs"]})"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config(R"({"demands": {"lower_ul": [0.1, 0.1]}})"), std::invalid_argument);
  CHECK_THROWS_AS(load_config("/nonexistent/fdsched.json"), std::exception);
}

TEST_CASE("config round trip") {
  SimConfig cfg = parse_config(R"({"cell": {"n_users": 2, "los": {"model": "fixed", "p": 0.3}},
                                   "demands": {"lower_ul": [0.2, 0.1], "upper_dl": [0.6, 0.7]},
                                   "sic_flags": [true, false], "atbs_windows": [8, 80]})");
  const SimConfig back = parse_config(config_to_json(cfg));
  CHECK(config_to_json(back) == config_to_json(cfg));
  CHECK(back.demands.lower_ul == cfg.demands.lower_ul);
  CHECK(back.demands.upper_dl == cfg.demands.upper_dl);
  CHECK(back.sic_flags == cfg.sic_flags);
  CHECK(back.atbs_windows == cfg.atbs_windows);
  CHECK(std::get<FixedLosProbability>(back.cell.los_mode).p == 0.3);
}

TEST_CASE("long-term runs are deterministic and share realizations") {
  SimConfig cfg = small_config();
  const MetricsReport a = run_longterm(cfg);
  cfg.threads = 1;
  const MetricsReport b = run_longterm(cfg);
  REQUIRE(a.runs.size() == 6);
  REQUIRE(b.runs.size() == a.runs.size());
  for (std::size_t k = 0; k < a.runs.size(); ++k) {
    CHECK(a.runs[k].scheduler == b.runs[k].scheduler);
    CHECK(a.runs[k].utility_sum == b.runs[k].utility_sum);
    CHECK(a.runs[k].realization_checksum == b.runs[k].realization_checksum);
  }
  for (int drop = 0; drop < cfg.n_drops; ++drop) {
    const SchedulerRun* tbs = nullptr;
    const SchedulerRun* hd = nullptr;
    for (const auto& r : a.runs)
      if (r.drop == drop) (r.scheduler == "tbs" ? tbs : hd) = &r;
    REQUIRE(tbs);
    REQUIRE(hd);
    CHECK(tbs->realization_checksum == hd->realization_checksum);
    CHECK(tbs->drop_seed == hd->drop_seed);
    CHECK(tbs->mean_utility() >= hd->mean_utility() * 0.99);
  }
  // Different master seeds give different drops.
  cfg.master_seed = 12;
  const MetricsReport c = run_longterm(cfg);
  CHECK(c.runs[0].realization_checksum != a.runs[0].realization_checksum);
}

TEST_CASE("summary statistics follow the per-run data") {
  SimConfig cfg = small_config();
  cfg.optimizer.checkpoint_interval = 5000;
  const MetricsReport rep = run_longterm(cfg);
  const SchedulerSummary* tbs = rep.find("tbs");
  const SchedulerSummary* hd = rep.find("hd");
  REQUIRE(tbs);
  REQUIRE(hd);
  CHECK(rep.find("atbs", 8) == nullptr);

  const auto fd = rep.per_drop_utility("tbs");
  const auto half = rep.per_drop_utility("hd");
  REQUIRE(fd.size() == 3);
  double sum = 0.0, sumh = 0.0;
  for (std::size_t k = 0; k < fd.size(); ++k) sum += fd[k], sumh += half[k];
  CHECK(tbs->mean_utility == doctest::Approx(sum / 3).epsilon(1e-12));
  double var = 0.0;
  for (double x : fd) var += (x - sum / 3) * (x - sum / 3);
  CHECK(tbs->std_error == doctest::Approx(std::sqrt(var / 2 / 3)).epsilon(1e-9));
  CHECK(tbs->mean_mbps == doctest::Approx(tbs->mean_utility * rep.bandwidth_hz / 1e6).epsilon(1e-12));
  REQUIRE(rep.fd_gain_percent);
  CHECK(*rep.fd_gain_percent == doctest::Approx(100.0 * (sum - sumh) / sumh).epsilon(1e-12));
  CHECK(gain_percent({2.0, 4.0}, {1.0, 2.0}) == doctest::Approx(100.0));

  for (const auto& r : rep.runs) {
    // Checkpoints every 5000 slots, ending with the final state.
    REQUIRE(r.trace.size() == 4);
    CHECK(r.trace.back().slot == r.slots);
    CHECK(r.trace.back().utility_sum == r.utility_sum);
    for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].utility_sum >= r.trace[k - 1].utility_sum);
    // Each drop's shares add up to at most one per direction and to at least one overall.
    double su = 0.0, sd = 0.0;
    for (double x : r.final_state().share_ul) su += x;
    for (double x : r.final_state().share_dl) sd += x;
    CHECK(su <= 1.0 + 1e-9);
    CHECK(sd <= 1.0 + 1e-9);
    CHECK(su + sd >= 1.0 - 1e-9);
    if (r.scheduler == "hd") CHECK(su + sd == doctest::Approx(1.0));
  }
}

TEST_CASE("infeasible demands are rejected") {
  SimConfig cfg = small_config();
  cfg.demands = TemporalDemands::uniform(4, 0.3, 0.3);
  CHECK_THROWS_AS(run_longterm(cfg), InfeasibleDemands);
  // Feasible for FD but not for HD.
  cfg.demands = TemporalDemands::uniform(4, 0.2, 0.2);
  CHECK_THROWS_AS(run_longterm(cfg), InfeasibleDemands);
  cfg.run_hd = false;
  CHECK_NOTHROW(run_longterm(cfg));
  // Invalid parameters are a different error.
  cfg.n_drops = 0;
  CHECK_THROWS_AS(run_longterm(cfg), std::invalid_argument);
}

TEST_CASE("short-term runs meet window demands") {
  SimConfig cfg = small_config();
  cfg.n_drops = 2;
  cfg.eval_slots = 8000;
  const MetricsReport rep = run_shortterm(cfg, {8, 80});
  for (int w : {8, 80}) {
    const SchedulerSummary* s = rep.find("atbs", w);
    REQUIRE(s);
    CHECK(s->window_violations == 0);
    CHECK(s->drops == 2);
  }
  REQUIRE(rep.find("tbs-fixed"));
  for (const auto& r : rep.runs) {
    // The learning run precedes the evaluation slots.
    CHECK(r.slots == (r.scheduler == "tbs" ? cfg.n_slots : 8000));
    if (r.scheduler == "atbs") {
      CHECK(r.windows == 8000 / r.window);
      CHECK(r.window_utilities.size() == static_cast<std::size_t>(r.windows));
    }
  }
  CHECK_THROWS_AS(run_shortterm(cfg, {0}), std::invalid_argument);
}

TEST_CASE("export writes matching CSV and JSON lines") {
  SimConfig cfg = small_config();
  cfg.n_drops = 2;
  cfg.optimizer.checkpoint_interval = 10000;
  MetricsReport rep = run_longterm(cfg);
  rep.label = "unit";
  const fs::path dir = scratch("export");
  export_report(rep, dir, ExportFormat::Csv);
  export_report(rep, dir, ExportFormat::JsonLines);

  const auto runs = read_csv(dir / "runs.csv");
  const auto summary = read_csv(dir / "summary.csv");
  CHECK(runs.size() == 2 * 2 * 2);
  CHECK(summary.size() == 2);
  {
    std::ifstream in(dir / "runs.csv");
    std::string header;
    std::getline(in, header);
    CHECK(split(header) == run_columns(4));
  }

  // Gain recomputed from the CSV matches the report.
  std::map<std::string, double> sums;
  for (const auto& r : runs)
    if (r.at("final") == "1") sums[r.at("scheduler")] += std::stod(r.at("run_mean_utility"));
  const double gain = 100.0 * (sums["tbs"] - sums["hd"]) / sums["hd"];
  CHECK(std::abs(gain - *rep.fd_gain_percent) < 1e-9);
  CHECK(std::stod(summary[0].at("fd_gain_percent")) == *rep.fd_gain_percent);

  // JSON lines carry the same values in the same order.
  std::ifstream in(dir / "runs.jsonl");
  std::string line;
  std::size_t k = 0;
  while (std::getline(in, line)) {
    const auto j = nlohmann::json::parse(line);
    REQUIRE(k < runs.size());
    CHECK(j.at("utility_sum").get<double>() == std::stod(runs[k].at("utility_sum")));
    CHECK(j.at("realization_checksum").get<std::uint64_t>() == std::stoull(runs[k].at("realization_checksum")));
    CHECK(j.at("scheduler").get<std::string>() == runs[k].at("scheduler"));
    ++k;
  }
  CHECK(k == runs.size());
  fs::remove_all(dir);
}

TEST_CASE("export of an empty report writes headers only") {
  MetricsReport rep;
  rep.n_users = 2;
  const fs::path dir = scratch("empty");
  export_report(rep, dir, ExportFormat::Csv);
  std::ifstream in(dir / "summary.csv");
  std::string header, rest;
  std::getline(in, header);
  CHECK(split(header) == summary_columns(2));
  CHECK_FALSE(std::getline(in, rest));
  CHECK(fs::file_size(dir / "runs.csv") > 0);
  fs::remove_all(dir);
}

TEST_CASE("gain sweep cells are paired") {
  SimConfig cfg = small_config();
  cfg.n_slots = 5000;
  cfg.n_drops = 2;
  const auto cells = run_gain_sweep(cfg, SweepAxis::Sim);
  REQUIRE(cells.size() == 3);
  CHECK(cells[0].config.channel.sim_db == 60.0);
  CHECK(cells[2].config.channel.sim_db == 100.0);
  for (const auto& c : cells) {
    CHECK(c.report.runs[0].drop_seed == cells[0].report.runs[0].drop_seed);
    CHECK(c.report.fd_gain_percent.has_value());
  }
  const auto places = run_gain_sweep(cfg, SweepAxis::Placement);
  CHECK(places.size() == 6);
}

TEST_CASE("aggregate utility equals the mean of exported per-slot utilities") {
  SimConfig cfg = small_config();
  cfg.n_slots = 3000;
  cfg.n_drops = 2;
  cfg.optimizer.checkpoint_interval = 1;
  const MetricsReport rep = run_longterm(cfg);
  const fs::path dir = scratch("trace");
  export_report(rep, dir, ExportFormat::Csv);
  std::map<std::pair<std::string, std::string>, double> sums;
  std::map<std::pair<std::string, std::string>, double> reported;
  std::map<std::pair<std::string, std::string>, long> rows;
  for (const auto& r : read_csv(dir / "runs.csv")) {
    const auto key = std::make_pair(r.at("scheduler"), r.at("drop"));
    sums[key] += std::stod(r.at("slot_utility"));
    reported[key] = std::stod(r.at("run_mean_utility"));
    ++rows[key];
  }
  REQUIRE(sums.size() == 4);
  for (const auto& [key, sum] : sums) {
    CHECK(rows[key] == 3000);
    CHECK(sum / 3000 == doctest::Approx(reported[key]).epsilon(1e-12));
  }
  fs::remove_all(dir);
}
