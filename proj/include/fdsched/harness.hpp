#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fdsched/feasibility.hpp"
#include "fdsched/geomchan.hpp"
#include "fdsched/ratemodel.hpp"
#include "fdsched/scheduler.hpp"
#include "fdsched/threshopt.hpp"

namespace fdsched {

enum class Scenario { NoSic, AllSic };

struct OptimizerConfig {
  double step_size = 0.001;
  std::int64_t checkpoint_interval = 0;  // 0: final state only
};

struct SimConfig {
  CellConfig cell;
  ChannelParams channel;
  TemporalDemands demands = TemporalDemands::uniform(4, 0.125, 0.125);
  Scenario scenario = Scenario::NoSic;
  std::optional<double> sic_fraction;     // first round(f * n) users can do SIC
  std::vector<std::uint8_t> sic_flags;    // explicit per-user flags win
  bool run_tbs = true;
  bool run_hd = true;
  std::vector<int> atbs_windows;
  std::int64_t n_slots = 100000;
  int n_drops = 20;
  std::uint64_t master_seed = 1;
  std::int64_t eval_slots = 200000;       // short-term evaluation horizon per drop
  int threads = 0;                        // 0: hardware concurrency
  OptimizerConfig optimizer;

  /// Throws std::invalid_argument.
  void validate() const;
  SicCapability sic() const;
  double fd_demand_total() const;
};

class InfeasibleDemands : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Snapshot of one scheduler run.
struct Checkpoint {
  std::int64_t slot = 0;
  double utility_sum = 0.0;
  double slot_utility = 0.0;  // utility of the virtual user picked in `slot`
  VirtualUser last_choice{};
  std::vector<double> share_ul;
  std::vector<double> share_dl;
  std::vector<double> lambda_ul;
  std::vector<double> lambda_dl;
};

struct SchedulerRun {
  std::string scheduler;  // "tbs", "hd", "tbs-fixed", "atbs"
  int window = 0;         // ATBS window; 0 for long-term schedulers
  int drop = 0;
  std::uint64_t drop_seed = 0;
  std::int64_t slots = 0;
  double utility_sum = 0.0;
  std::int64_t windows = 0;          // completed ATBS windows
  std::int64_t window_violations = 0;
  std::vector<double> window_utilities;  // per-window means (ATBS)
  std::uint64_t realization_checksum = 0;
  std::vector<Checkpoint> trace;     // always ends with the final state

  double mean_utility() const { return slots > 0 ? utility_sum / static_cast<double>(slots) : 0.0; }
  const Checkpoint& final_state() const { return trace.back(); }
};

struct SchedulerSummary {
  std::string scheduler;
  int window = 0;
  int drops = 0;
  double mean_utility = 0.0;   // bps/Hz, ratio of pooled sums
  double std_error = 0.0;      // over drops, or over windows for ATBS
  double mean_mbps = 0.0;
  std::vector<double> share_ul;  // averaged over drops
  std::vector<double> share_dl;
  std::int64_t window_violations = 0;
};

struct MetricsReport {
  std::string label;
  std::string config_echo;  // JSON
  std::uint64_t master_seed = 0;
  int n_users = 0;
  double bandwidth_hz = 0.0;
  std::vector<SchedulerRun> runs;
  std::vector<SchedulerSummary> summary;
  std::optional<double> fd_gain_percent;  // 100 (U_tbs - U_hd) / U_hd

  const SchedulerSummary* find(const std::string& scheduler, int window = 0) const;
  /// Per-drop mean utilities of one scheduler, ordered by drop.
  std::vector<double> per_drop_utility(const std::string& scheduler, int window = 0) const;
};

/// Gain of `fd` over `hd` from per-drop mean utilities: ratio of means.
double gain_percent(const std::vector<double>& fd, const std::vector<double>& hd);

/// Long-term study: per drop, TBS with online threshold learning and (if
/// enabled) the HD baseline with its own learner, on shared realizations.
MetricsReport run_longterm(const SimConfig& cfg);

enum class SweepAxis { Sim, Placement };

struct SweepCell {
  std::string label;  // e.g. "sim=80" or "hotspot1/scenario2"
  SimConfig config;
  MetricsReport report;
};

/// The SIM axis runs {60, 80, 100} dB; the placement axis runs
/// {uniform, 1-hotspot, 2-hotspot} x {no SIC, all SIC}. Every cell reuses
/// the same master seed, so drops are paired across cells.
std::vector<SweepCell> run_gain_sweep(const SimConfig& cfg, SweepAxis axis);

/// Short-term study: per drop, learn thresholds for cfg.n_slots slots, then
/// freeze them and run ATBS for each window (and a fixed-threshold TBS
/// reference) over cfg.eval_slots shared slots.
MetricsReport run_shortterm(const SimConfig& cfg, const std::vector<int>& windows);

enum class ExportFormat { Csv, JsonLines };

/// Writes runs.{csv,jsonl} (one row per drop, scheduler and checkpoint) and
/// summary.{csv,jsonl}. Throws std::runtime_error if a file cannot be written.
void export_report(const MetricsReport& report, const std::filesystem::path& dir, ExportFormat format);

/// Column names of runs.csv for n users, in file order.
std::vector<std::string> run_columns(int n_users);
std::vector<std::string> summary_columns(int n_users);

/// Config file I/O (JSON).
SimConfig load_config(const std::filesystem::path& path);
SimConfig parse_config(const std::string& json_text);
std::string config_to_json(const SimConfig& cfg);

/// Parses "1/8", "0.125" or a plain number.
double parse_fraction(const std::string& text);

}  // namespace fdsched
