#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "fdsched/harness.hpp"
#include "json.hpp"

namespace fdsched {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items())
    if (!known.contains(key)) throw std::invalid_argument("unknown key '" + key + "' in " + where);
}

template <typename T>
void read(const json& obj, const char* key, T& out) {
  if (obj.contains(key)) out = obj.at(key).get<T>();
}

double fraction_value(const json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_fraction(v.get<std::string>());
  throw std::invalid_argument("expected a number or a fraction string");
}

/// A demand entry: a scalar broadcast to every user or an n-vector.
std::vector<double> demand_vector(const json& v, int n, const char* name) {
  if (v.is_array()) {
    if (static_cast<int>(v.size()) != n)
      throw std::invalid_argument(std::string("demands.") + name + " must have n_users entries");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(fraction_value(x));
    return out;
  }
  return std::vector<double>(static_cast<std::size_t>(n), fraction_value(v));
}

void parse_cell(const json& j, CellConfig& c) {
  reject_unknown(j, {"side", "exclusion_radius", "n_users", "placement", "los"}, "cell");
  read(j, "side", c.cell_side);
  read(j, "exclusion_radius", c.exclusion_radius);
  read(j, "n_users", c.n_users);
  if (j.contains("placement")) {
    const json& p = j.at("placement");
    reject_unknown(p, {"model", "n_hotspots", "radius"}, "cell.placement");
    const std::string model = p.value("model", "uniform");
    if (model == "uniform") {
      c.placement = UniformPlacement{};
    } else if (model == "hotspot") {
      HotspotPlacement h;
      read(p, "n_hotspots", h.n_hotspots);
      read(p, "radius", h.hotspot_radius);
      c.placement = h;
    } else {
      throw std::invalid_argument("unknown placement model '" + model + "'");
    }
  }
  if (j.contains("los")) {
    const json& l = j.at("los");
    reject_unknown(l, {"model", "p"}, "cell.los");
    const std::string model = l.value("model", "all_nlos");
    if (model == "all_nlos") {
      c.los_mode = AllNlos{};
    } else if (model == "fixed") {
      c.los_mode = FixedLosProbability{l.value("p", 0.0)};
    } else {
      throw std::invalid_argument("unknown LOS model '" + model + "'");
    }
  }
}

void parse_pathloss(const json& j, PathlossModel& m, const std::string& where) {
  reject_unknown(j, {"intercept_db", "slope_db"}, where);
  read(j, "intercept_db", m.intercept_db);
  read(j, "slope_db", m.slope_db);
}

void parse_channel(const json& j, ChannelParams& c) {
  reject_unknown(j,
                 {"bandwidth_hz", "noise_psd_dbm_hz", "nf_bs_db", "nf_user_db", "sim_db", "shadow_std_los_db",
                  "shadow_std_nlos_db", "pathloss_los", "pathloss_nlos", "gamma_max", "min_link_distance"},
                 "channel");
  read(j, "bandwidth_hz", c.bandwidth_hz);
  read(j, "noise_psd_dbm_hz", c.noise_psd_dbm_hz);
  read(j, "nf_bs_db", c.nf_bs_db);
  read(j, "nf_user_db", c.nf_user_db);
  read(j, "sim_db", c.sim_db);
  read(j, "shadow_std_los_db", c.shadow_std_los_db);
  read(j, "shadow_std_nlos_db", c.shadow_std_nlos_db);
  read(j, "gamma_max", c.gamma_max);
  read(j, "min_link_distance", c.min_link_distance);
  if (j.contains("pathloss_los")) parse_pathloss(j.at("pathloss_los"), c.pathloss_los, "channel.pathloss_los");
  if (j.contains("pathloss_nlos")) parse_pathloss(j.at("pathloss_nlos"), c.pathloss_nlos, "channel.pathloss_nlos");
}

TemporalDemands parse_demands_json(const json& j, int n) {
  reject_unknown(j, {"lower_ul", "upper_ul", "lower_dl", "upper_dl"}, "demands");
  TemporalDemands d = TemporalDemands::uniform(n, 0.0, 0.0);
  if (j.contains("lower_ul")) d.lower_ul = demand_vector(j.at("lower_ul"), n, "lower_ul");
  if (j.contains("upper_ul")) d.upper_ul = demand_vector(j.at("upper_ul"), n, "upper_ul");
  if (j.contains("lower_dl")) d.lower_dl = demand_vector(j.at("lower_dl"), n, "lower_dl");
  if (j.contains("upper_dl")) d.upper_dl = demand_vector(j.at("upper_dl"), n, "upper_dl");
  return d;
}

json pathloss_json(const PathlossModel& m) { return {{"intercept_db", m.intercept_db}, {"slope_db", m.slope_db}}; }

}  // namespace

double parse_fraction(const std::string& text) {
  const auto slash = text.find('/');
  auto number = [&](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    s = b == std::string::npos ? "" : s.substr(b, s.find_last_not_of(" \t") - b + 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
    return v;
  };
  if (slash == std::string::npos) return number(text);
  const double den = number(text.substr(slash + 1));
  if (den == 0.0) throw std::invalid_argument("zero denominator in '" + text + "'");
  return number(text.substr(0, slash)) / den;
}

SimConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  reject_unknown(j,
                 {"cell", "channel", "demands", "scenario", "sic_fraction", "sic_flags", "schedulers",
                  "atbs_windows", "n_slots", "n_drops", "seed", "eval_slots", "threads", "optimizer"},
                 "config");

  SimConfig cfg;
  try {
    if (j.contains("cell")) parse_cell(j.at("cell"), cfg.cell);
    if (j.contains("channel")) parse_channel(j.at("channel"), cfg.channel);
    const int n = cfg.cell.n_users;
    cfg.demands = j.contains("demands") ? parse_demands_json(j.at("demands"), n) : TemporalDemands::uniform(n, 0.125, 0.125);

    if (j.contains("scenario")) {
      const auto s = j.at("scenario").get<std::string>();
      if (s == "no_sic")
        cfg.scenario = Scenario::NoSic;
      else if (s == "all_sic")
        cfg.scenario = Scenario::AllSic;
      else
        throw std::invalid_argument("scenario must be 'no_sic' or 'all_sic'");
    }
    if (j.contains("sic_fraction")) cfg.sic_fraction = fraction_value(j.at("sic_fraction"));
    if (j.contains("sic_flags"))
      for (const auto& f : j.at("sic_flags")) cfg.sic_flags.push_back(f.get<bool>() ? 1 : 0);
    if (j.contains("schedulers")) {
      cfg.run_tbs = cfg.run_hd = false;
      for (const auto& s : j.at("schedulers")) {
        const auto name = s.get<std::string>();
        if (name == "tbs")
          cfg.run_tbs = true;
        else if (name == "hd")
          cfg.run_hd = true;
        else
          throw std::invalid_argument("unknown scheduler '" + name + "' (expected tbs or hd)");
      }
    }
    read(j, "atbs_windows", cfg.atbs_windows);
    read(j, "n_slots", cfg.n_slots);
    read(j, "n_drops", cfg.n_drops);
    read(j, "seed", cfg.master_seed);
    read(j, "eval_slots", cfg.eval_slots);
    read(j, "threads", cfg.threads);
    if (j.contains("optimizer")) {
      const json& o = j.at("optimizer");
      reject_unknown(o, {"step_size", "checkpoint_interval"}, "optimizer");
      read(o, "step_size", cfg.optimizer.step_size);
      read(o, "checkpoint_interval", cfg.optimizer.checkpoint_interval);
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("bad config value: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string config_to_json(const SimConfig& cfg) {
  json cell = {{"side", cfg.cell.cell_side}, {"exclusion_radius", cfg.cell.exclusion_radius}, {"n_users", cfg.cell.n_users}};
  if (const auto* h = std::get_if<HotspotPlacement>(&cfg.cell.placement))
    cell["placement"] = {{"model", "hotspot"}, {"n_hotspots", h->n_hotspots}, {"radius", h->hotspot_radius}};
  else
    cell["placement"] = {{"model", "uniform"}};
  if (const auto* l = std::get_if<FixedLosProbability>(&cfg.cell.los_mode))
    cell["los"] = {{"model", "fixed"}, {"p", l->p}};
  else
    cell["los"] = {{"model", "all_nlos"}};

  const ChannelParams& c = cfg.channel;
  json channel = {{"bandwidth_hz", c.bandwidth_hz},
                  {"noise_psd_dbm_hz", c.noise_psd_dbm_hz},
                  {"nf_bs_db", c.nf_bs_db},
                  {"nf_user_db", c.nf_user_db},
                  {"sim_db", c.sim_db},
                  {"shadow_std_los_db", c.shadow_std_los_db},
                  {"shadow_std_nlos_db", c.shadow_std_nlos_db},
                  {"pathloss_los", pathloss_json(c.pathloss_los)},
                  {"pathloss_nlos", pathloss_json(c.pathloss_nlos)},
                  {"gamma_max", c.gamma_max},
                  {"min_link_distance", c.min_link_distance}};

  json j = {{"cell", cell},
            {"channel", channel},
            {"demands",
             {{"lower_ul", cfg.demands.lower_ul},
              {"upper_ul", cfg.demands.upper_ul},
              {"lower_dl", cfg.demands.lower_dl},
              {"upper_dl", cfg.demands.upper_dl}}},
            {"scenario", cfg.scenario == Scenario::NoSic ? "no_sic" : "all_sic"},
            {"atbs_windows", cfg.atbs_windows},
            {"n_slots", cfg.n_slots},
            {"n_drops", cfg.n_drops},
            {"seed", cfg.master_seed},
            {"eval_slots", cfg.eval_slots},
            {"threads", cfg.threads},
            {"optimizer",
             {{"step_size", cfg.optimizer.step_size},
              {"checkpoint_interval", cfg.optimizer.checkpoint_interval}}}};
  json sched = json::array();
  if (cfg.run_tbs) sched.push_back("tbs");
  if (cfg.run_hd) sched.push_back("hd");
  j["schedulers"] = sched;
  if (cfg.sic_fraction) j["sic_fraction"] = *cfg.sic_fraction;
  if (!cfg.sic_flags.empty()) {
    json flags = json::array();
    for (auto f : cfg.sic_flags) flags.push_back(f != 0);
    j["sic_flags"] = flags;
  }
  return j.dump();
}

}  // namespace fdsched
