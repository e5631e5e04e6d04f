#include <cstdio>
#include <fstream>

#include "fdsched/harness.hpp"
#include "json.hpp"

namespace fdsched {

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_users(std::vector<std::string>& cols, const char* prefix, int n) {
  for (int u = 1; u <= n; ++u) cols.push_back(prefix + std::to_string(u));
}

std::ofstream open_for_write(const std::filesystem::path& p) {
  std::ofstream out(p, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

/// A row as (column, value) pairs; values are already formatted for CSV.
using Row = std::vector<std::pair<std::string, nlohmann::json>>;

std::string csv_cell(const nlohmann::json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return num(v.get<double>());
  return v.dump();
}

void write_rows(const std::filesystem::path& dir, const std::string& stem, const std::vector<std::string>& cols,
                const std::vector<Row>& rows, ExportFormat format) {
  if (format == ExportFormat::Csv) {
    auto out = open_for_write(dir / (stem + ".csv"));
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << csv_cell(row[i].second);
      out << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + stem + ".csv");
  } else {
    auto out = open_for_write(dir / (stem + ".jsonl"));
    for (const auto& row : rows) {
      nlohmann::ordered_json obj;
      for (const auto& [k, v] : row) obj[k] = v;
      out << obj.dump() << '\n';
    }
    if (!out) throw std::runtime_error("write failed for " + stem + ".jsonl");
  }
}

}  // namespace

std::vector<std::string> run_columns(int n) {
  std::vector<std::string> c = {"label",       "scheduler", "window",      "drop",        "drop_seed",
                                "slot",        "final",     "utility_sum", "slot_utility", "run_slots",
                                "run_utility_sum", "run_mean_utility", "last_ul", "last_dl"};
  append_users(c, "share_ul_", n);
  append_users(c, "share_dl_", n);
  append_users(c, "lambda_ul_", n);
  append_users(c, "lambda_dl_", n);
  for (const char* s : {"windows", "window_violations", "realization_checksum"}) c.emplace_back(s);
  return c;
}

std::vector<std::string> summary_columns(int n) {
  std::vector<std::string> c = {"label",        "scheduler", "window",   "drops",     "mean_utility",
                                "std_error",    "mean_mbps", "window_violations", "fd_gain_percent",
                                "master_seed"};
  append_users(c, "share_ul_", n);
  append_users(c, "share_dl_", n);
  return c;
}

void export_report(const MetricsReport& report, const std::filesystem::path& dir, ExportFormat format) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());

  const int n = report.n_users;
  std::vector<Row> runs;
  for (const auto& r : report.runs) {
    for (std::size_t k = 0; k < r.trace.size(); ++k) {
      const Checkpoint& cp = r.trace[k];
      Row row = {{"label", report.label},
                 {"scheduler", r.scheduler},
                 {"window", r.window},
                 {"drop", r.drop},
                 {"drop_seed", r.drop_seed},
                 {"slot", cp.slot},
                 {"final", k + 1 == r.trace.size() ? 1 : 0},
                 {"utility_sum", cp.utility_sum},
                 {"slot_utility", cp.slot_utility},
                 {"run_slots", r.slots},
                 {"run_utility_sum", r.utility_sum},
                 {"run_mean_utility", r.mean_utility()},
                 {"last_ul", cp.last_choice.ul},
                 {"last_dl", cp.last_choice.dl}};
      auto users = [&](const char* prefix, const std::vector<double>& v) {
        for (int u = 1; u <= n; ++u) row.emplace_back(prefix + std::to_string(u), v[static_cast<std::size_t>(u - 1)]);
      };
      users("share_ul_", cp.share_ul);
      users("share_dl_", cp.share_dl);
      users("lambda_ul_", cp.lambda_ul);
      users("lambda_dl_", cp.lambda_dl);
      row.emplace_back("windows", r.windows);
      row.emplace_back("window_violations", r.window_violations);
      row.emplace_back("realization_checksum", r.realization_checksum);
      runs.push_back(std::move(row));
    }
  }

  std::vector<Row> summary;
  for (const auto& s : report.summary) {
    Row row = {{"label", report.label},
               {"scheduler", s.scheduler},
               {"window", s.window},
               {"drops", s.drops},
               {"mean_utility", s.mean_utility},
               {"std_error", s.std_error},
               {"mean_mbps", s.mean_mbps},
               {"window_violations", s.window_violations},
               {"fd_gain_percent", report.fd_gain_percent ? nlohmann::json(*report.fd_gain_percent) : nlohmann::json()},
               {"master_seed", report.master_seed}};
    for (int u = 1; u <= n; ++u)
      row.emplace_back("share_ul_" + std::to_string(u), s.share_ul.empty() ? 0.0 : s.share_ul[static_cast<std::size_t>(u - 1)]);
    for (int u = 1; u <= n; ++u)
      row.emplace_back("share_dl_" + std::to_string(u), s.share_dl.empty() ? 0.0 : s.share_dl[static_cast<std::size_t>(u - 1)]);
    summary.push_back(std::move(row));
  }

  write_rows(dir, "runs", run_columns(n), runs, format);
  write_rows(dir, "summary", summary_columns(n), summary, format);
}

}  // namespace fdsched
