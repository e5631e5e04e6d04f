#include "fdsched/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <exception>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <thread>

#include "fdsched/rng.hpp"

namespace fdsched {

namespace {

std::uint64_t realization_checksum(const ChannelRealization& r) {
  std::uint64_t h = 0x84222325cbf29ce4ULL;
  for (double v : r.g_sq) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
  for (double v : r.h_sq) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
  return h;
}

std::uint64_t drop_seed_for(std::uint64_t master, int drop) {
  return derive_seed(master, {static_cast<std::uint64_t>(drop)});
}

/// Runs `body(i)` for i in [0, count) on up to `threads` workers. Results are
/// written by index, so the outcome does not depend on scheduling order.
template <typename F>
void parallel_for(int count, int threads, F&& body) {
  int workers = threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int i = next++; i < count; i = next++) {
          try {
            body(i);
          } catch (...) {
            std::lock_guard lk(error_mu);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

Checkpoint snapshot(const ScheduleState& st, const ThresholdVector& th, double slot_utility) {
  Checkpoint cp;
  cp.slot = st.t;
  cp.utility_sum = st.utility_sum;
  cp.slot_utility = slot_utility;
  cp.last_choice = st.last_choice;
  for (int u = 1; u <= st.n_users(); ++u) {
    cp.share_ul.push_back(st.share_ul(u));
    cp.share_dl.push_back(st.share_dl(u));
  }
  cp.lambda_ul = th.lambda_ul;
  cp.lambda_dl = th.lambda_dl;
  return cp;
}

/// Scheduler fed one performance matrix per slot.
class Runner {
 public:
  Runner(std::string name, int n_users, int window, std::int64_t checkpoint_interval)
      : checkpoint_interval_(checkpoint_interval), state_(ScheduleState::fresh(n_users)) {
    run_.scheduler = std::move(name);
    run_.window = window;
  }
  virtual ~Runner() = default;

  void consume(std::uint64_t slot_checksum, const PerformanceMatrix& pm) {
    run_.realization_checksum = splitmix64(run_.realization_checksum ^ slot_checksum);
    const VirtualUser v = select(pm);
    const double u = pm.utility(v);
    state_.record(v, u);
    last_utility_ = u;
    after_record();
    if (checkpoint_interval_ > 0 && state_.t % checkpoint_interval_ == 0)
      run_.trace.push_back(snapshot(state_, thresholds(), u));
  }

  SchedulerRun finish(int drop, std::uint64_t drop_seed) {
    run_.drop = drop;
    run_.drop_seed = drop_seed;
    run_.slots = total_slots_ + state_.t;
    run_.utility_sum = total_utility_ + state_.utility_sum;
    if (run_.trace.empty() || run_.trace.back().slot != state_.t) run_.trace.push_back(snapshot(state_, thresholds(), last_utility_));
    return std::move(run_);
  }

 protected:
  virtual VirtualUser select(const PerformanceMatrix& pm) = 0;
  virtual const ThresholdVector& thresholds() const = 0;
  virtual void after_record() {}

  std::int64_t checkpoint_interval_;
  ScheduleState state_;
  SchedulerRun run_;
  double last_utility_ = 0.0;
  std::int64_t total_slots_ = 0;  // slots of completed (reset) windows
  double total_utility_ = 0.0;
};

/// Algorithm-1 learner driving its own TBS decisions.
class LearningRunner final : public Runner {
 public:
  LearningRunner(std::string name, VirtualUserSet candidates, const TemporalDemands& d, double step,
                 std::int64_t checkpoint_interval)
      : Runner(std::move(name), d.n_users(), 0, checkpoint_interval),
        candidates_(std::move(candidates)),
        demands_(d),
        opt_(OptimizerState::initial(d.n_users(), step)) {}

  const OptimizerState& optimizer() const { return opt_; }

 protected:
  VirtualUser select(const PerformanceMatrix& pm) override {
    return opt_step_inplace(opt_, pm, demands_, candidates_);
  }
  const ThresholdVector& thresholds() const override { return opt_.th; }

 private:
  VirtualUserSet candidates_;
  const TemporalDemands& demands_;
  OptimizerState opt_;
};

/// TBS with frozen thresholds.
class FixedRunner final : public Runner {
 public:
  FixedRunner(std::string name, ThresholdVector th, std::int64_t checkpoint_interval)
      : Runner(std::move(name), th.n_users(), 0, checkpoint_interval),
        th_(std::move(th)),
        all_(VirtualUserSet::all(th_.n_users())) {}

 protected:
  VirtualUser select(const PerformanceMatrix& pm) override { return tbs_select(pm, th_, all_); }
  const ThresholdVector& thresholds() const override { return th_; }

 private:
  ThresholdVector th_;
  VirtualUserSet all_;
};

/// ATBS over consecutive windows of length s; the state resets per window.
class AtbsRunner final : public Runner {
 public:
  AtbsRunner(ThresholdVector th, const TemporalDemands& d, int window)
      : Runner("atbs", th.n_users(), window, 0), th_(std::move(th)), targets_(WindowTargets::from(d, window)) {}

 protected:
  VirtualUser select(const PerformanceMatrix& pm) override { return atbs_select(pm, th_, state_, targets_); }
  const ThresholdVector& thresholds() const override { return th_; }

  void after_record() override {
    if (state_.t < targets_.window) return;
    bool violated = false;
    for (std::size_t i = 0; i < targets_.need_ul.size(); ++i) {
      violated |= state_.count_ul[i] < targets_.need_ul[i] || state_.count_ul[i] > targets_.cap_ul[i];
      violated |= state_.count_dl[i] < targets_.need_dl[i] || state_.count_dl[i] > targets_.cap_dl[i];
    }
    run_.window_violations += violated ? 1 : 0;
    run_.window_utilities.push_back(state_.mean_utility());
    ++run_.windows;
    total_slots_ += state_.t;
    total_utility_ += state_.utility_sum;
    const int n = state_.n_users();
    state_ = ScheduleState::fresh(n);
  }

 private:
  ThresholdVector th_;
  WindowTargets targets_;
};

double mean(const std::vector<double>& v) {
  return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_error(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

void summarize(MetricsReport& rep) {
  std::map<std::pair<std::string, int>, std::vector<const SchedulerRun*>> groups;
  for (const auto& r : rep.runs) groups[{r.scheduler, r.window}].push_back(&r);

  for (const auto& [key, runs] : groups) {
    SchedulerSummary s;
    s.scheduler = key.first;
    s.window = key.second;
    s.drops = static_cast<int>(runs.size());
    double pooled_sum = 0.0;
    double pooled_slots = 0.0;
    std::vector<double> samples;
    s.share_ul.assign(static_cast<std::size_t>(rep.n_users), 0.0);
    s.share_dl.assign(static_cast<std::size_t>(rep.n_users), 0.0);
    for (const auto* r : runs) {
      pooled_sum += r->utility_sum;
      pooled_slots += static_cast<double>(r->slots);
      s.window_violations += r->window_violations;
      if (r->window > 0) {
        samples.insert(samples.end(), r->window_utilities.begin(), r->window_utilities.end());
      } else {
        samples.push_back(r->mean_utility());
        const Checkpoint& f = r->final_state();
        for (std::size_t i = 0; i < s.share_ul.size(); ++i) {
          s.share_ul[i] += f.share_ul[i] / static_cast<double>(runs.size());
          s.share_dl[i] += f.share_dl[i] / static_cast<double>(runs.size());
        }
      }
    }
    s.mean_utility = pooled_slots > 0 ? pooled_sum / pooled_slots : 0.0;
    s.std_error = std_error(samples);
    s.mean_mbps = s.mean_utility * rep.bandwidth_hz / 1e6;
    rep.summary.push_back(std::move(s));
  }

  if (rep.find("tbs") && rep.find("hd"))
    rep.fd_gain_percent = gain_percent(rep.per_drop_utility("tbs"), rep.per_drop_utility("hd"));
}

void check_longterm_demands(const SimConfig& cfg) {
  if (cfg.run_tbs && !feasible_longterm_box(cfg.demands))
    throw InfeasibleDemands("demands are outside the long-term feasible region of the FD system");
  if (cfg.run_hd) {
    const auto& d = cfg.demands;
    const double lo = std::accumulate(d.lower_ul.begin(), d.lower_ul.end(), 0.0) +
                      std::accumulate(d.lower_dl.begin(), d.lower_dl.end(), 0.0);
    const double hi = std::accumulate(d.upper_ul.begin(), d.upper_ul.end(), 0.0) +
                      std::accumulate(d.upper_dl.begin(), d.upper_dl.end(), 0.0);
    // HD: exactly one direction of one user per slot, so shares sum to 1.
    if (lo > 1.0 + 1e-9 || hi < 1.0 - 1e-9)
      throw InfeasibleDemands("demands are infeasible for the HD baseline (lower demands sum to " +
                              std::to_string(lo) + ")");
  }
}

MetricsReport new_report(const SimConfig& cfg, std::string label) {
  MetricsReport rep;
  rep.label = std::move(label);
  rep.config_echo = config_to_json(cfg);
  rep.master_seed = cfg.master_seed;
  rep.n_users = cfg.cell.n_users;
  rep.bandwidth_hz = cfg.channel.bandwidth_hz;
  return rep;
}

}  // namespace

// SimConfig ----------------------------------------------------------------------------

void SimConfig::validate() const {
  cell.validate();
  channel.validate();
  demands.validate();
  if (demands.n_users() != cell.n_users) throw std::invalid_argument("demand vectors must have n_users entries");
  if (n_slots < 1) throw std::invalid_argument("n_slots must be at least 1");
  if (n_drops < 1) throw std::invalid_argument("n_drops must be at least 1");
  if (eval_slots < 1) throw std::invalid_argument("eval_slots must be at least 1");
  if (!sic_flags.empty() && static_cast<int>(sic_flags.size()) != cell.n_users)
    throw std::invalid_argument("sic_flags must have n_users entries");
  if (sic_fraction && !(*sic_fraction >= 0.0 && *sic_fraction <= 1.0))
    throw std::invalid_argument("sic_fraction must lie in [0,1]");
  if (!(optimizer.step_size >= 0.0)) throw std::invalid_argument("step_size must be non-negative");
  if (optimizer.checkpoint_interval < 0) throw std::invalid_argument("checkpoint_interval must be non-negative");
  for (int s : atbs_windows)
    if (s < 1) throw std::invalid_argument("ATBS windows must be positive");
}

SicCapability SimConfig::sic() const {
  if (!sic_flags.empty()) return sic_flags;
  if (sic_fraction) {
    SicCapability s = sic_none(cell.n_users);
    const auto k = static_cast<std::size_t>(std::lround(*sic_fraction * cell.n_users));
    for (std::size_t i = 0; i < k && i < s.size(); ++i) s[i] = 1;
    return s;
  }
  return scenario == Scenario::AllSic ? sic_all(cell.n_users) : sic_none(cell.n_users);
}

double SimConfig::fd_demand_total() const {
  return std::accumulate(demands.lower_ul.begin(), demands.lower_ul.end(), 0.0) +
         std::accumulate(demands.lower_dl.begin(), demands.lower_dl.end(), 0.0);
}

// MetricsReport ------------------------------------------------------------------------

const SchedulerSummary* MetricsReport::find(const std::string& scheduler, int window) const {
  for (const auto& s : summary)
    if (s.scheduler == scheduler && s.window == window) return &s;
  return nullptr;
}

std::vector<double> MetricsReport::per_drop_utility(const std::string& scheduler, int window) const {
  std::vector<std::pair<int, double>> rows;
  for (const auto& r : runs)
    if (r.scheduler == scheduler && r.window == window) rows.emplace_back(r.drop, r.mean_utility());
  std::sort(rows.begin(), rows.end());
  std::vector<double> out;
  for (const auto& [d, u] : rows) out.push_back(u);
  return out;
}

double gain_percent(const std::vector<double>& fd, const std::vector<double>& hd) {
  const double hd_mean = mean(hd);
  if (hd_mean <= 0.0) return 0.0;
  return 100.0 * (mean(fd) - hd_mean) / hd_mean;
}

// Studies ------------------------------------------------------------------------------

MetricsReport run_longterm(const SimConfig& cfg) {
  cfg.validate();
  check_longterm_demands(cfg);

  const int n = cfg.cell.n_users;
  const SicCapability sic = cfg.sic();
  std::vector<std::vector<SchedulerRun>> per_drop(static_cast<std::size_t>(cfg.n_drops));

  parallel_for(cfg.n_drops, cfg.threads, [&](int d) {
    const std::uint64_t seed = drop_seed_for(cfg.master_seed, d);
    const CellDrop drop = make_drop(cfg.cell, cfg.channel, seed);
    const LinkBudget lb = LinkBudget::from(cfg.channel, drop);

    std::vector<std::unique_ptr<LearningRunner>> runners;
    if (cfg.run_tbs)
      runners.push_back(std::make_unique<LearningRunner>("tbs", VirtualUserSet::all(n), cfg.demands,
                                                         cfg.optimizer.step_size, cfg.optimizer.checkpoint_interval));
    if (cfg.run_hd)
      runners.push_back(std::make_unique<LearningRunner>("hd", VirtualUserSet::hd_only(n), cfg.demands,
                                                         cfg.optimizer.step_size, cfg.optimizer.checkpoint_interval));

    ChannelRealization real;
    PerformanceMatrix pm(n);
    for (std::int64_t t = 0; t < cfg.n_slots; ++t) {
      draw_realization_into(drop, seed, static_cast<std::uint64_t>(t), real);
      const std::uint64_t ck = realization_checksum(real);
      performance_matrix_into(real, lb, sic, pm);
      for (auto& r : runners) r->consume(ck, pm);
    }
    for (auto& r : runners) per_drop[static_cast<std::size_t>(d)].push_back(r->finish(d, seed));
  });

  MetricsReport rep = new_report(cfg, "longterm");
  for (auto& v : per_drop)
    for (auto& r : v) rep.runs.push_back(std::move(r));
  summarize(rep);
  return rep;
}

std::vector<SweepCell> run_gain_sweep(const SimConfig& cfg, SweepAxis axis) {
  std::vector<SweepCell> cells;
  auto add = [&](std::string label, SimConfig c) {
    c.run_tbs = true;
    c.run_hd = true;
    cells.push_back({std::move(label), std::move(c), {}});
  };

  if (axis == SweepAxis::Sim) {
    for (double sim : {60.0, 80.0, 100.0}) {
      SimConfig c = cfg;
      c.channel.sim_db = sim;
      add("sim=" + std::to_string(static_cast<int>(sim)), std::move(c));
    }
  } else {
    const std::vector<std::pair<std::string, Placement>> placements = {
        {"uniform", UniformPlacement{}},
        {"hotspot1", HotspotPlacement{1, 10.0}},
        {"hotspot2", HotspotPlacement{2, 10.0}},
    };
    for (const auto& [name, placement] : placements) {
      for (Scenario sc : {Scenario::NoSic, Scenario::AllSic}) {
        SimConfig c = cfg;
        c.cell.placement = placement;
        if (const auto* hs = std::get_if<HotspotPlacement>(&cfg.cell.placement); hs && name != "uniform")
          std::get<HotspotPlacement>(c.cell.placement).hotspot_radius = hs->hotspot_radius;
        c.scenario = sc;
        c.sic_flags.clear();
        c.sic_fraction.reset();
        add(name + (sc == Scenario::NoSic ? "/scenario1" : "/scenario2"), std::move(c));
      }
    }
  }

  for (auto& cell : cells) {
    cell.report = run_longterm(cell.config);
    cell.report.label = cell.label;
  }
  return cells;
}

MetricsReport run_shortterm(const SimConfig& cfg, const std::vector<int>& windows) {
  cfg.validate();
  if (windows.empty()) throw std::invalid_argument("no windows given");
  if (!feasible_longterm_box(cfg.demands))
    throw InfeasibleDemands("demands are outside the long-term feasible region");
  // Every window must admit an allocation with counts inside the integer targets.
  for (int s : windows) {
    if (s < 1) throw std::invalid_argument("windows must be positive");
    const WindowTargets tg = WindowTargets::from(cfg.demands, s);
    TemporalDemands lo = cfg.demands;
    for (std::size_t i = 0; i < lo.lower_ul.size(); ++i) {
      lo.lower_ul[i] = static_cast<double>(tg.need_ul[i]) / s;
      lo.lower_dl[i] = static_cast<double>(tg.need_dl[i]) / s;
      lo.upper_ul[i] = static_cast<double>(tg.cap_ul[i]) / s;
      lo.upper_dl[i] = static_cast<double>(tg.cap_dl[i]) / s;
    }
    // Integer bounds make the transportation polytope integral, so the
    // fractional box test on the scaled counts decides the window.
    if (!feasible_longterm_box(lo))
      throw InfeasibleDemands("window " + std::to_string(s) + " admits no allocation within the demand bounds");
  }

  const int n = cfg.cell.n_users;
  const SicCapability sic = cfg.sic();
  std::vector<std::vector<SchedulerRun>> per_drop(static_cast<std::size_t>(cfg.n_drops));

  parallel_for(cfg.n_drops, cfg.threads, [&](int d) {
    const std::uint64_t seed = drop_seed_for(cfg.master_seed, d);
    const CellDrop drop = make_drop(cfg.cell, cfg.channel, seed);
    const LinkBudget lb = LinkBudget::from(cfg.channel, drop);

    ChannelRealization real;
    PerformanceMatrix pm(n);

    LearningRunner learner("tbs", VirtualUserSet::all(n), cfg.demands, cfg.optimizer.step_size,
                           cfg.optimizer.checkpoint_interval);
    for (std::int64_t t = 0; t < cfg.n_slots; ++t) {
      draw_realization_into(drop, seed, static_cast<std::uint64_t>(t), real);
      performance_matrix_into(real, lb, sic, pm);
      learner.consume(realization_checksum(real), pm);
    }
    const ThresholdVector th = learner.optimizer().th;

    std::vector<std::unique_ptr<Runner>> runners;
    runners.push_back(std::make_unique<FixedRunner>("tbs-fixed", th, 0));
    for (int s : windows) runners.push_back(std::make_unique<AtbsRunner>(th, cfg.demands, s));

    for (std::int64_t k = 0; k < cfg.eval_slots; ++k) {
      const auto slot = static_cast<std::uint64_t>(cfg.n_slots + k);
      draw_realization_into(drop, seed, slot, real);
      const std::uint64_t ck = realization_checksum(real);
      performance_matrix_into(real, lb, sic, pm);
      for (auto& r : runners) r->consume(ck, pm);
    }

    auto& out = per_drop[static_cast<std::size_t>(d)];
    out.push_back(learner.finish(d, seed));
    for (auto& r : runners) out.push_back(r->finish(d, seed));
  });

  MetricsReport rep = new_report(cfg, "shortterm");
  for (auto& v : per_drop)
    for (auto& r : v) rep.runs.push_back(std::move(r));
  summarize(rep);
  return rep;
}

}  // namespace fdsched
