#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "fdsched/harness.hpp"
#include "json.hpp"

using namespace fdsched;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInfeasible = 2;

struct DemandInput {
  TemporalDemands box;
  bool equality = false;
};

std::vector<double> split_fractions(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(parse_fraction(item));
  return out;
}

/// Accepts a path to a JSON file, inline JSON, or "ul=a,b,..;dl=c,d,..".
/// JSON takes {"ul": [...], "dl": [...]} for equality demands or
/// {"lower_ul": ..., "upper_ul": ..., "lower_dl": ..., "upper_dl": ...}.
DemandInput read_demands(const std::string& arg) {
  std::string text = arg;
  if (std::ifstream in(arg); in) {
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }
  const auto first = text.find_first_not_of(" \t\r\n");
  DemandInput out;
  if (first != std::string::npos && text[first] == '{') {
    const auto j = nlohmann::json::parse(text);
    auto vec = [](const nlohmann::json& v) {
      std::vector<double> r;
      for (const auto& x : v) r.push_back(x.is_string() ? parse_fraction(x.get<std::string>()) : x.get<double>());
      return r;
    };
    if (j.contains("ul") || j.contains("dl")) {
      out.box = TemporalDemands::equality(vec(j.at("ul")), vec(j.at("dl")));
      out.equality = true;
    } else {
      out.box.lower_ul = vec(j.at("lower_ul"));
      out.box.lower_dl = vec(j.at("lower_dl"));
      const auto n = out.box.lower_ul.size();
      out.box.upper_ul = j.contains("upper_ul") ? vec(j.at("upper_ul")) : std::vector<double>(n, 1.0);
      out.box.upper_dl = j.contains("upper_dl") ? vec(j.at("upper_dl")) : std::vector<double>(n, 1.0);
    }
  } else {
    std::vector<double> ul, dl;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ';')) {
      const auto eq = part.find('=');
      if (eq == std::string::npos) throw std::invalid_argument("expected ul=... and dl=... in '" + text + "'");
      const auto key_start = part.find_first_not_of(' ');
      const std::string k = part.substr(key_start, eq - key_start);
      if (k == "ul")
        ul = split_fractions(part.substr(eq + 1));
      else if (k == "dl")
        dl = split_fractions(part.substr(eq + 1));
      else
        throw std::invalid_argument("unknown demand key '" + k + "'");
    }
    out.box = TemporalDemands::equality(ul, dl);
    out.equality = true;
  }
  out.box.validate();
  return out;
}

void print_allocation(const SlotAllocation& a) {
  const int n = a.n_users();
  std::printf("slot counts a[ul][dl] (row: UL user, column: DL user, 0 = idle)\n");
  std::printf("%6s", "ul\\dl");
  for (int j = 0; j <= n; ++j) std::printf("%6d", j);
  std::printf("\n");
  for (int i = 0; i <= n; ++i) {
    std::printf("%6d", i);
    for (int j = 0; j <= n; ++j) {
      if (VirtualUser{i, j}.valid(n))
        std::printf("%6d", a.at(i, j));
      else
        std::printf("%6s", "-");
    }
    std::printf("\n");
  }
  std::printf("schedule:");
  for (const auto& v : witness_schedule(a)) std::printf(" (%d,%d)", v.ul, v.dl);
  std::printf("\n");
}

void print_fractional(const FractionalAllocation& a) {
  const int n = a.n_users;
  std::printf("time shares a[ul][dl] (row: UL user, column: DL user, 0 = idle)\n");
  std::printf("%8s", "ul\\dl");
  for (int j = 0; j <= n; ++j) std::printf("%10d", j);
  std::printf("\n");
  for (int i = 0; i <= n; ++i) {
    std::printf("%8d", i);
    for (int j = 0; j <= n; ++j) {
      if (VirtualUser{i, j}.valid(n))
        std::printf("%10.6f", a.at(i, j));
      else
        std::printf("%10s", "-");
    }
    std::printf("\n");
  }
}

int cmd_feasibility(const std::string& demands_arg, int window) {
  const DemandInput in = read_demands(demands_arg);
  const TemporalDemands& d = in.box;
  if (window > 0) {
    if (!in.equality) throw std::invalid_argument("--window needs equality demands (ul=..., dl=...)");
    const ShortTermResult r = feasible_shortterm(window, d.lower_ul, d.lower_dl);
    switch (r.status) {
      case ShortTermStatus::Feasible:
        std::printf("feasible for window %d\n", window);
        print_allocation(*r.allocation);
        return kExitOk;
      case ShortTermStatus::NonIntegral:
        std::printf("infeasible for window %d: demands times window are not integers (%s)\n", window,
                    r.diagnosis.c_str());
        return kExitInfeasible;
      case ShortTermStatus::Infeasible:
        std::printf("infeasible for window %d: %s\n", window, r.diagnosis.c_str());
        return kExitInfeasible;
    }
  }
  if (in.equality) {
    if (!feasible_longterm(d.lower_ul, d.lower_dl)) {
      std::printf("infeasible (long-term)\n");
      return kExitInfeasible;
    }
    std::printf("feasible (long-term)\n");
    print_fractional(longterm_witness(d.lower_ul, d.lower_dl));
    return kExitOk;
  }
  const bool ok = feasible_longterm_box(d);
  std::printf("%s (long-term, demand bounds)\n", ok ? "feasible" : "infeasible");
  return ok ? kExitOk : kExitInfeasible;
}

std::filesystem::path output_dir(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("FDSCHED_OUT_DIR"); env && *env) return env;
  return "fdsched_out";
}

void print_summary(const MetricsReport& rep) {
  std::printf("%-22s %-10s %7s %6s %12s %10s %10s\n", "label", "scheduler", "window", "drops", "bps/Hz", "stderr",
              "Mbps");
  for (const auto& s : rep.summary)
    std::printf("%-22s %-10s %7d %6d %12.6f %10.6f %10.3f\n", rep.label.c_str(), s.scheduler.c_str(), s.window,
                s.drops, s.mean_utility, s.std_error, s.mean_mbps);
  if (rep.fd_gain_percent) std::printf("%-22s FD gain over HD: %.2f%%\n", rep.label.c_str(), *rep.fd_gain_percent);
}

std::vector<int> parse_windows(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const int v = std::stoi(item, &used);
    if (used != item.size() || v < 1) throw std::invalid_argument("bad window '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Full-duplex scheduling simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string out_flag;
  std::string format = "csv";
  app.add_option("--out", out_flag, "Output directory (default: $FDSCHED_OUT_DIR or ./fdsched_out)");
  app.add_option("--format", format, "Export format")->check(CLI::IsMember({"csv", "jsonl"}));

  auto* feas = app.add_subcommand("feasibility", "Test whether demands are feasible and print a witness");
  std::string demands_arg;
  int window = 0;
  feas->add_option("--demands", demands_arg, "File or inline demands, e.g. ul=1/4,1/4;dl=1/4,1/4")->required();
  feas->add_option("--window", window, "Short-term window length in slots")->check(CLI::PositiveNumber);

  auto* sim = app.add_subcommand("simulate", "Long-term study: TBS and HD baseline over drops");
  std::string config_path;
  std::optional<std::uint64_t> seed;
  sim->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  sim->add_option("--seed", seed, "Master seed (overrides config)");

  auto* sweep = app.add_subcommand("sweep", "FD gain over a parameter axis");
  std::string axis;
  sweep->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--axis", axis, "Sweep axis")->required()->check(CLI::IsMember({"sim", "placement"}));
  sweep->add_option("--seed", seed, "Master seed (overrides config)");

  auto* conv = app.add_subcommand("convergence", "Short-term study: ATBS per window length");
  std::string windows_arg;
  conv->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  conv->add_option("--windows", windows_arg, "Comma-separated window lengths (default: config atbs_windows, else 8,80,800,8000)");
  conv->add_option("--seed", seed, "Master seed (overrides config)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version requests exit 0; usage errors map to the generic error code.
    return app.exit(e) == 0 ? kExitOk : kExitError;
  }

  const ExportFormat fmt = format == "csv" ? ExportFormat::Csv : ExportFormat::JsonLines;
  try {
    if (*feas) return cmd_feasibility(demands_arg, window);

    SimConfig cfg = load_config(config_path);
    if (seed) cfg.master_seed = *seed;
    const auto out = output_dir(out_flag);

    if (*sim) {
      const MetricsReport rep = run_longterm(cfg);
      print_summary(rep);
      export_report(rep, out, fmt);
    } else if (*sweep) {
      const auto cells = run_gain_sweep(cfg, axis == "sim" ? SweepAxis::Sim : SweepAxis::Placement);
      for (const auto& c : cells) {
        print_summary(c.report);
        std::string dir = c.label;
        for (char& ch : dir)
          if (ch == '/' || ch == '=') ch = '_';
        export_report(c.report, out / dir, fmt);
      }
    } else if (*conv) {
      std::vector<int> windows = parse_windows(windows_arg);
      if (windows.empty()) windows = cfg.atbs_windows;
      if (windows.empty()) windows = {8, 80, 800, 8000};
      const MetricsReport rep = run_shortterm(cfg, windows);
      print_summary(rep);
      export_report(rep, out, fmt);
    }
    std::printf("results written to %s\n", out.string().c_str());
    return kExitOk;
  } catch (const InfeasibleDemands& e) {
    std::fprintf(stderr, "infeasible demands: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
}
