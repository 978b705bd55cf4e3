// cpdgrid command-line front end. Links only the C API.
//
// Exit codes:
//   0  success (certify is informational and always exits 0 on valid input)
//   1  usage, parse, validation or I/O error
//   2  no operating point found (solve) / closed-form condition violated (twoport)
//   3  infeasible: total injected power is negative (solve)
//   4  sweep recorded at least one certificate soundness violation

#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "cpdgrid/cpdgrid.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoSolution = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitViolation = 4;

struct NetworkDeleter {
  void operator()(cpdgrid_network* n) const { cpdgrid_network_free(n); }
};
struct StringDeleter {
  void operator()(cpdgrid_string* s) const { cpdgrid_string_free(s); }
};
using NetworkPtr = std::unique_ptr<cpdgrid_network, NetworkDeleter>;
using StringPtr = std::unique_ptr<cpdgrid_string, StringDeleter>;

int report_error(const std::string& context) {
  std::cerr << "error: " << context << ": " << cpdgrid_last_error() << "\n";
  return kExitError;
}

std::optional<NetworkPtr> load(const std::string& path) {
  cpdgrid_network* raw = nullptr;
  if (cpdgrid_network_load(path.c_str(), &raw) != CPDGRID_OK) {
    report_error(path);
    return std::nullopt;
  }
  return NetworkPtr(raw);
}

cpdgrid_format parse_format(const std::string& name) {
  return name == "csv" ? CPDGRID_FORMAT_CSV : CPDGRID_FORMAT_JSON;
}

bool stderr_is_terminal() { return ::isatty(STDERR_FILENO) == 1; }

std::string fmt(const nlohmann::json& value, int precision = 6) {
  if (!value.is_number()) return "-";
  std::ostringstream out;
  out << std::setprecision(precision) << value.get<double>();
  return out.str();
}

void print_certificates(const nlohmann::json& doc) {
  std::cerr << "certificate  delta       v_min       x_max       applicable\n";
  for (const char* kind : {"spectral", "inf_norm"}) {
    const auto& c = doc["certificates"][kind];
    std::cerr << std::left << std::setw(13) << kind << std::setw(12) << fmt(c["delta"])
              << std::setw(12) << fmt(c["v_min"]) << std::setw(12) << fmt(c["x_max"])
              << (c["applicable"].get<bool>() ? "yes" : "no (" + c["reason"].get<std::string>() + ")")
              << "\n";
  }
}

void print_solve_table(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  print_certificates(doc);
  std::cerr << "\nV0          ||x||_inf   residual    spectral    inf_norm    V\n";
  for (const auto& p : doc["operating_points"]) {
    std::cerr << std::left << std::setw(12) << fmt(p["V0"]) << std::setw(12) << fmt(p["x_inf"])
              << std::setw(12) << fmt(p["residual_norm"], 3) << std::setw(12)
              << p["membership"]["spectral"].get<std::string>() << std::setw(12)
              << p["membership"]["inf_norm"].get<std::string>();
    for (const auto& v : p["V"]) std::cerr << fmt(v) << " ";
    std::cerr << "\n";
  }
}

int write_text(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return std::cout ? kExitOk : kExitError;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return kExitError;
  }
  out << text;
  return out ? kExitOk : kExitError;
}

struct SolveArgs {
  std::string file;
  double tol = 0.0;
  int starts = 8;
  int max_iter = 100;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string format = "json";
  bool no_timing = false;
};

int cmd_solve(const SolveArgs& args) {
  auto network = load(args.file);
  if (!network) return kExitError;
  cpdgrid_solver_options options;
  cpdgrid_solver_options_init(&options);
  options.tol_watts = args.tol;
  options.n_starts = args.starts;
  options.max_iter = args.max_iter;
  options.seed = args.seed;
  options.threads = args.threads;

  cpdgrid_solve_status status = CPDGRID_SOLVE_NO_CONVERGENCE;
  cpdgrid_string* raw = nullptr;
  if (cpdgrid_report_solve(network->get(), &options, parse_format(args.format),
                           args.no_timing ? 0 : 1, &status, &raw) != CPDGRID_OK) {
    return report_error(args.file);
  }
  StringPtr text(raw);
  if (write_text(cpdgrid_string_data(text.get()), "") != kExitOk) return kExitError;
  if (stderr_is_terminal() && args.format == "json") print_solve_table(cpdgrid_string_data(text.get()));

  switch (status) {
    case CPDGRID_SOLVE_CONVERGED:
    case CPDGRID_SOLVE_DEGENERATE:
      return kExitOk;
    case CPDGRID_SOLVE_INFEASIBLE:
      std::cerr << "infeasible: total injected power (sum of P) is negative; the resistive "
                   "network must dissipate power, so no operating point exists\n";
      return kExitInfeasible;
    case CPDGRID_SOLVE_NO_CONVERGENCE:
      std::cerr << "no operating point found from any start (not a proof of nonexistence)\n";
      return kExitNoSolution;
  }
  return kExitError;
}

int cmd_certify(const std::string& file, const std::string& format) {
  auto network = load(file);
  if (!network) return kExitError;
  cpdgrid_string* raw = nullptr;
  if (cpdgrid_report_certify(network->get(), parse_format(format), &raw) != CPDGRID_OK) {
    return report_error(file);
  }
  StringPtr text(raw);
  if (write_text(cpdgrid_string_data(text.get()), "") != kExitOk) return kExitError;
  if (stderr_is_terminal() && format == "json") {
    print_certificates(nlohmann::json::parse(cpdgrid_string_data(text.get())));
  }
  return kExitOk;
}

int cmd_twoport(double g, double p1, double p2, const std::string& format) {
  int32_t has_solution = 0;
  cpdgrid_string* raw = nullptr;
  if (cpdgrid_report_twoport(g, p1, p2, parse_format(format), &has_solution, &raw) !=
      CPDGRID_OK) {
    return report_error("twoport");
  }
  StringPtr text(raw);
  if (write_text(cpdgrid_string_data(text.get()), "") != kExitOk) return kExitError;
  if (!has_solution) {
    std::cerr << "no high-voltage operating point: (P1 + P2) / |P1 - P2| must lie in (0, 1)\n";
    return kExitNoSolution;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir,
              std::optional<std::uint64_t> seed, std::optional<int> threads) {
  nlohmann::json config = nlohmann::json::object();
  if (!config_path.empty()) {
    std::ifstream in(config_path);
    if (!in) {
      std::cerr << "error: cannot open '" << config_path << "'\n";
      return kExitError;
    }
    try {
      config = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      std::cerr << "error: " << config_path << ": " << e.what() << "\n";
      return kExitError;
    }
    if (!config.is_object()) {
      std::cerr << "error: " << config_path << ": sweep config must be a JSON object\n";
      return kExitError;
    }
  }
  if (seed) config["seed"] = *seed;
  if (threads) config["threads"] = *threads;

  cpdgrid_sweep_summary summary{};
  const auto text = config.dump();
  if (cpdgrid_sweep_run(text.c_str(), out_dir.c_str(), &summary) != CPDGRID_OK) {
    return report_error(config_path.empty() ? "sweep" : config_path);
  }
  std::cerr << "sweep: " << summary.rows << " instances, " << summary.generation_failures
            << " generation failures, " << summary.no_convergence << " without convergence, "
            << summary.points_total << " operating points\n"
            << "  spectral: " << summary.spectral_applicable << " applicable, "
            << summary.spectral_violations << " violations\n"
            << "  inf_norm: " << summary.infnorm_applicable << " applicable, "
            << summary.infnorm_violations << " violations\n"
            << "  written to " << out_dir << "\n";
  return summary.spectral_violations + summary.infnorm_violations > 0 ? kExitViolation : kExitOk;
}

int cmd_reduce(const std::string& file, const std::string& output) {
  auto network = load(file);
  if (!network) return kExitError;
  cpdgrid_network* reduced_raw = nullptr;
  if (cpdgrid_network_reduce(network->get(), &reduced_raw) != CPDGRID_OK) {
    return report_error(file);
  }
  NetworkPtr reduced(reduced_raw);
  cpdgrid_string* raw = nullptr;
  if (cpdgrid_network_to_json(reduced.get(), &raw) != CPDGRID_OK) return report_error(file);
  StringPtr text(raw);
  return write_text(cpdgrid_string_data(text.get()), output);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Operating points and operating-region certificates of DC networks with "
               "constant-power devices"};
  app.set_version_flag("--version", std::string(cpdgrid_version()));
  app.require_subcommand(1);

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Find operating points and report certificates");
  solve_cmd->add_option("network", solve.file, "Network JSON file")->required();
  solve_cmd->add_option("--tol", solve.tol, "Residual tolerance in watts (0 = automatic)")
      ->check(CLI::NonNegativeNumber);
  solve_cmd->add_option("--starts", solve.starts, "Number of Newton starts")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--max-iter", solve.max_iter, "Newton iterations per start")
      ->check(CLI::PositiveNumber);
  solve_cmd->add_option("--seed", solve.seed, "Seed for perturbed starts");
  solve_cmd->add_option("--threads", solve.threads, "Concurrent starts")->check(CLI::PositiveNumber);
  solve_cmd->add_option("--format", solve.format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));
  solve_cmd->add_flag("--no-timing", solve.no_timing, "Omit timing from the report");

  std::string certify_file;
  std::string certify_format = "json";
  auto* certify_cmd = app.add_subcommand("certify", "Evaluate both operating-region certificates");
  certify_cmd->add_option("network", certify_file, "Network JSON file")->required();
  certify_cmd->add_option("--format", certify_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  double g = 0.0, p1 = 0.0, p2 = 0.0;
  std::string twoport_format = "json";
  auto* twoport_cmd = app.add_subcommand("twoport", "Closed-form two-port operating point");
  twoport_cmd->add_option("g", g, "Branch conductance in siemens")->required();
  twoport_cmd->add_option("p1", p1, "Injection at port 1 in watts")->required();
  twoport_cmd->add_option("p2", p2, "Injection at port 2 in watts")->required();
  twoport_cmd->add_option("--format", twoport_format, "Output format")
      ->check(CLI::IsMember({"json", "csv"}));

  std::string sweep_config;
  std::string out_dir = "sweep_out";
  std::optional<std::uint64_t> sweep_seed;
  std::optional<int> sweep_threads;
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte Carlo certificate soundness study");
  sweep_cmd->add_option("config", sweep_config, "Sweep config JSON file (defaults if omitted)");
  sweep_cmd->add_option("--out-dir", out_dir, "Directory for sweep_rows.csv and sweep_summary.json");
  sweep_cmd->add_option("--seed", sweep_seed, "Override the config seed");
  sweep_cmd->add_option("--threads", sweep_threads, "Worker threads")->check(CLI::PositiveNumber);

  std::string reduce_file;
  std::string reduce_output;
  auto* reduce_cmd = app.add_subcommand("reduce", "Kron-reduce interior nodes, write a port network");
  reduce_cmd->add_option("network", reduce_file, "Network JSON file")->required();
  reduce_cmd->add_option("--output,-o", reduce_output, "Output file (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  if (solve_cmd->parsed()) return cmd_solve(solve);
  if (certify_cmd->parsed()) return cmd_certify(certify_file, certify_format);
  if (twoport_cmd->parsed()) return cmd_twoport(g, p1, p2, twoport_format);
  if (sweep_cmd->parsed()) return cmd_sweep(sweep_config, out_dir, sweep_seed, sweep_threads);
  if (reduce_cmd->parsed()) return cmd_reduce(reduce_file, reduce_output);
  return kExitError;
}
