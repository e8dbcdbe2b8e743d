// coop-ht: exponent computations, Fig.-style sum-rate sweeps, brute-force
// oracle comparisons, and Monte-Carlo simulation of the variable-length
// scheme. Single JSON config as input; CSV/JSON artifacts as output.

#include "coopht/exponent.hpp"
#include "coopht/source_model.hpp"
#include "coopht/vlsim.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace {

using coopht::AuxiliarySystem;
using coopht::ExponentResult;
using coopht::RatePair;
using coopht::SolverConfig;
using coopht::SourceModel;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitGuard = 3;

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json r = json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) r.push_back(m(i, k));
    rows.push_back(std::move(r));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const json& rows) {
  if (!rows.is_array() || rows.empty() || !rows[0].is_array())
    throw coopht::usage_error("aux table: expected array of rows");
  Eigen::MatrixXd m(rows.size(), rows[0].size());
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size())
      throw coopht::usage_error("aux table: ragged rows");
    for (size_t k = 0; k < rows[i].size(); ++k)
      m(i, k) = rows[i][k].get<double>();
  }
  return m;
}

SourceModel source_from_config(const json& cfg) {
  if (!cfg.contains("source"))
    throw coopht::usage_error("config: missing \"source\"");
  const json& src = cfg["source"];
  if (src.is_string()) return coopht::load_source(src.get<std::string>());
  return coopht::parse_source_json(src.dump());
}

SolverConfig solver_from_config(const json& cfg) {
  SolverConfig sc;
  if (!cfg.contains("solver")) return sc;
  const json& s = cfg["solver"];
  sc.restarts = s.value("restarts", sc.restarts);
  sc.max_iters = s.value("max_iters", sc.max_iters);
  sc.step = s.value("step", sc.step);
  sc.penalty_init = s.value("penalty_init", sc.penalty_init);
  sc.penalty_growth = s.value("penalty_growth", sc.penalty_growth);
  sc.penalty_stages = s.value("penalty_stages", sc.penalty_stages);
  sc.tol = s.value("tol", sc.tol);
  sc.grid_resolution = s.value("grid_resolution", sc.grid_resolution);
  sc.seed = s.value("seed", sc.seed);
  sc.u1_size = s.value("u1_size", sc.u1_size);
  sc.u2_size = s.value("u2_size", sc.u2_size);
  return sc;
}

json exponent_to_json(const ExponentResult& r) {
  json out;
  out["theta"] = r.theta;
  out["i_u1_x1"] = r.i_u1_x1;
  out["i_u2_x2_given_u1"] = r.i_u2_x2_given_u1;
  out["i_u1u2_y"] = r.i_u1u2_y;
  out["feasible"] = r.feasible;
  out["best_restart"] = r.best_restart;
  out["restarts_run"] = r.restarts_run;
  out["slack1"] = r.slack1;
  out["slack2"] = r.slack2;
  out["effective_r1"] = r.effective_rates.r1;
  out["effective_r2"] = r.effective_rates.r2;
  out["pu1_given_x1"] = matrix_to_json(r.achieving.pu1_given_x1.table());
  out["pu2_given_u1x2"] = matrix_to_json(r.achieving.pu2_given_u1x2.table());
  return out;
}

void write_output(const json& cfg, const std::string& text) {
  std::string path = "-";
  if (cfg.contains("output")) path = cfg["output"].value("path", path);
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw coopht::usage_error("cannot open output file " + path);
  out << text;
}

std::string output_format(const json& cfg, const std::string& def) {
  if (!cfg.contains("output")) return def;
  return cfg["output"].value("format", def);
}

RatePair rates_from_config(const json& cfg) {
  if (!cfg.contains("rates"))
    throw coopht::usage_error("config: missing \"rates\"");
  return {cfg["rates"].at("r1").get<double>(),
          cfg["rates"].at("r2").get<double>()};
}

int cmd_exponent(const json& cfg) {
  const SourceModel s = source_from_config(cfg);
  const SolverConfig sc = solver_from_config(cfg);
  const RatePair rates = rates_from_config(cfg);

  json out;
  out["fixed_length"] =
      exponent_to_json(coopht::fixed_length_exponent(s, rates, sc));
  if (cfg.contains("epsilon")) {
    const double eps = cfg["epsilon"].get<double>();
    out["epsilon"] = eps;
    out["variable_length"] =
        exponent_to_json(coopht::variable_length_exponent(s, rates, eps, sc));
  }
  out["r1"] = rates.r1;
  out["r2"] = rates.r2;
  write_output(cfg, out.dump(2) + "\n");
  return 0;
}

int cmd_sweep(const json& cfg) {
  const SourceModel s = source_from_config(cfg);
  const SolverConfig sc = solver_from_config(cfg);
  if (!cfg.contains("sum_rate"))
    throw coopht::usage_error("config: missing \"sum_rate\"");
  const json& sr = cfg["sum_rate"];
  std::vector<double> grid;
  for (const auto& v : sr.at("grid")) grid.push_back(v.get<double>());
  const int split_grid = sr.value("split_grid", 23);
  const double eps = cfg.value("epsilon", 0.07);

  std::ostringstream csv;
  csv << "R,theta_vl,theta_fix,best_r1_vl,best_r1_fix\n";
  json rows = json::array();
  for (double R : grid) {
    const auto vl = coopht::sum_rate_envelope(s, R, eps, split_grid, sc);
    const auto fl = coopht::sum_rate_envelope(s, R, -1.0, split_grid, sc);
    csv << fixed6(R) << ',' << fixed6(vl.best.theta) << ','
        << fixed6(fl.best.theta) << ',' << fixed6(vl.best.r1) << ','
        << fixed6(fl.best.r1) << "\n";
    rows.push_back({{"R", R},
                    {"theta_vl", vl.best.theta},
                    {"theta_fix", fl.best.theta},
                    {"best_r1_vl", vl.best.r1},
                    {"best_r1_fix", fl.best.r1}});
  }
  if (output_format(cfg, "csv") == "json")
    write_output(cfg, rows.dump(2) + "\n");
  else
    write_output(cfg, csv.str());
  return 0;
}

AuxiliarySystem aux_from_config(const json& cfg, const SourceModel& s,
                                const SolverConfig& sc) {
  const json& sim = cfg.at("sim");
  if (sim.contains("aux") && sim["aux"].is_object()) {
    return AuxiliarySystem{
        coopht::CondPmf(matrix_from_json(sim["aux"].at("pu1_given_x1"))),
        coopht::CondPmf(matrix_from_json(sim["aux"].at("pu2_given_u1x2")))};
  }
  // Default: solve for good auxiliaries at the configured rates.
  const RatePair rates = rates_from_config(cfg);
  const double eps = cfg.value("epsilon", 0.07);
  return coopht::variable_length_exponent(s, rates, eps, sc).achieving;
}

int cmd_simulate(const json& cfg) {
  const SourceModel s = source_from_config(cfg);
  const SolverConfig sc = solver_from_config(cfg);
  if (!cfg.contains("sim"))
    throw coopht::usage_error("config: missing \"sim\"");
  const json& sim = cfg["sim"];

  coopht::SimConfig c;
  c.aux = aux_from_config(cfg, s, sc);
  c.n = sim.value("n", c.n);
  c.epsilon = sim.value("epsilon", cfg.value("epsilon", c.epsilon));
  c.mu = sim.value("mu", c.epsilon / 4.0);
  c.trials = sim.value("trials", c.trials);
  c.seed = sim.value("seed", c.seed);
  const std::string mode = sim.value("s_n_mode", std::string("coin"));
  if (mode == "coin")
    c.s_n_mode = coopht::SnMode::Coin;
  else if (mode == "enumerate")
    c.s_n_mode = coopht::SnMode::Enumerate;
  else
    throw coopht::usage_error("sim.s_n_mode: expected coin or enumerate");
  const std::string slack = sim.value("slack_mode", std::string("absolute"));
  if (slack == "absolute")
    c.slack_mode = coopht::SlackMode::Absolute;
  else if (slack == "proportional")
    c.slack_mode = coopht::SlackMode::Proportional;
  else
    throw coopht::usage_error(
        "sim.slack_mode: expected absolute or proportional");

  const coopht::Simulator simulator(s, c);
  const coopht::SimReport rep = simulator.run_monte_carlo();

  json out;
  out["n"] = rep.n;
  out["trials"] = rep.trials;
  out["alpha_hat"] = rep.alpha_hat;
  out["alpha_se"] = rep.alpha_se;
  out["beta_hat"] = rep.beta_hat;
  out["beta_se"] = rep.beta_se;
  out["mean_len1"] = rep.mean_len1;
  out["mean_len2"] = rep.mean_len2;
  out["empirical_exponent"] = rep.empirical_exponent;
  out["m1_count"] = simulator.m1_count();
  out["m2_count"] = simulator.m2_count();
  out["i_u1_x1"] = simulator.i_u1_x1();
  out["i_u2_x2_given_u1"] = simulator.i_u2_x2_given_u1();
  out["i_u1u2_y"] = simulator.i_u1u2_y();
  for (int h = 0; h <= 1; ++h) {
    const coopht::PathCounts& pc = h == 0 ? rep.h0 : rep.h1;
    json p;
    p["sn_hit"] = pc.sn_hit;
    p["enc1_fail"] = pc.enc1_fail;
    p["enc2_fail"] = pc.enc2_fail;
    p["accept"] = pc.accept;
    p["reject"] = pc.reject;
    out[h == 0 ? "paths_h0" : "paths_h1"] = std::move(p);
  }
  write_output(cfg, out.dump(2) + "\n");
  return 0;
}

int cmd_oracle(const json& cfg) {
  const SourceModel s = source_from_config(cfg);
  const SolverConfig sc = solver_from_config(cfg);
  const RatePair rates = rates_from_config(cfg);
  int u1 = sc.u1_size, u2 = sc.u2_size;
  if (cfg.contains("oracle")) {
    u1 = cfg["oracle"].value("u1_size", u1);
    u2 = cfg["oracle"].value("u2_size", u2);
  }
  if (u1 <= 0 || u2 <= 0)
    throw coopht::usage_error(
        "oracle: u1_size/u2_size must be set (small alphabets only)");
  SolverConfig sc_same = sc;
  sc_same.u1_size = u1;
  sc_same.u2_size = u2;

  const ExponentResult grid = coopht::brute_force_exponent(
      s, rates, sc.grid_resolution, u1, u2);
  const ExponentResult solver = coopht::fixed_length_exponent(s, rates, sc_same);

  json out;
  out["solver"] = exponent_to_json(solver);
  out["grid"] = exponent_to_json(grid);
  out["gap"] = solver.theta - grid.theta;
  write_output(cfg, out.dump(2) + "\n");
  return 0;
}

void apply_override(json& cfg, const std::string& key,
                    const std::string& value) {
  json* node = &cfg;
  std::stringstream ss(key);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) parts.push_back(part);
  if (parts.empty()) throw coopht::usage_error("empty override key");
  for (size_t i = 0; i + 1 < parts.size(); ++i) node = &((*node)[parts[i]]);
  json parsed;
  try {
    parsed = json::parse(value);
  } catch (...) {
    parsed = value;  // treat as plain string
  }
  (*node)[parts.back()] = parsed;
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  if (args.size() < 2) {
    std::cerr << "usage: coop-ht {exponent|sweep|simulate|oracle} "
                 "<config.json> [--key value ...]\n";
    return kExitConfig;
  }
  const std::string command = args[0];
  std::ifstream in(args[1]);
  if (!in) {
    std::cerr << "coop-ht: cannot open config " << args[1] << "\n";
    return kExitConfig;
  }
  json cfg;
  try {
    in >> cfg;
  } catch (const json::parse_error& e) {
    std::cerr << "coop-ht: config parse error: " << e.what() << "\n";
    return kExitConfig;
  }
  for (size_t i = 2; i + 1 < args.size(); i += 2) {
    if (args[i].rfind("--", 0) != 0) {
      std::cerr << "coop-ht: expected --key value override, got " << args[i]
                << "\n";
      return kExitConfig;
    }
    apply_override(cfg, args[i].substr(2), args[i + 1]);
  }

  if (command == "exponent") return cmd_exponent(cfg);
  if (command == "sweep") return cmd_sweep(cfg);
  if (command == "simulate") return cmd_simulate(cfg);
  if (command == "oracle") return cmd_oracle(cfg);
  std::cerr << "coop-ht: unknown command " << command << "\n";
  return kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const coopht::usage_error& e) {
    // Guard-type errors (enumeration or codebook limits) exit 3; other usage
    // problems are config errors.
    const std::string msg = e.what();
    std::cerr << "coop-ht: " << msg << "\n";
    if (msg.find("limit") != std::string::npos ||
        msg.find("1e8") != std::string::npos ||
        msg.find("infeasible") != std::string::npos ||
        msg.find("too large") != std::string::npos ||
        msg.find("enumerate > 1e8") != std::string::npos)
      return kExitGuard;
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "coop-ht: " << e.what() << "\n";
    return kExitConfig;
  }
}
