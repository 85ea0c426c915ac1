// powertail: fit, compare, sample and tabulate the impact-factor
// distribution from the command line.
//
// Exit codes: 0 success, 1 input or configuration error, 2 completed with
// warnings (a fit that did not converge).

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "powertail/powertail.hpp"

namespace {

using nlohmann::ordered_json;
using namespace powertail;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitWarning = 2;

struct RunConfig {
  std::string input;
  std::vector<int> years;
  std::vector<std::string> excludes;
  std::optional<double> t;
  std::optional<double> beta;
  std::optional<double> theta;
  std::optional<std::size_t> grid_points;
  std::optional<double> r_min;
  std::optional<double> r_max;
  std::optional<std::uint64_t> seed;
  std::optional<long long> n;
  std::optional<int> max_iterations;
  std::string out;
  std::string format;
  std::string delimiter = "auto";
  bool decimal_comma = false;
};

// A failure already explained to the user; carries the exit code.
struct ExitRequest {
  int code;
};

[[noreturn]] void fail(const std::string& message) {
  std::cerr << "error: " << message << '\n';
  throw ExitRequest{kExitError};
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

QuadratureSettings quad_from_env(const QuadratureSettings& fallback) {
  const char* profile = std::getenv("POWERTAIL_QUAD_PROFILE");
  if (profile == nullptr || std::string(profile).empty()) return fallback;
  const std::string p(profile);
  if (p == "fast") return QuadratureSettings::fast();
  if (p == "accurate") return QuadratureSettings::accurate();
  fail("POWERTAIL_QUAD_PROFILE must be 'fast' or 'accurate', got '" + p + "'");
}

struct LoadedData {
  std::vector<JournalRecord> records;
  std::size_t excluded_count = 0;
};

LoadedData load(const RunConfig& cfg) {
  if (cfg.input.empty()) fail("--input is required");
  std::ifstream in(cfg.input, std::ios::binary);
  if (!in) fail("cannot open input file: " + cfg.input);
  ParseOptions options;
  options.decimal_comma = cfg.decimal_comma;
  if (cfg.delimiter == "semicolon") {
    options.delimiter = Delimiter::Semicolon;
  } else if (cfg.delimiter == "tab") {
    options.delimiter = Delimiter::Tab;
  } else if (cfg.delimiter == "comma") {
    options.delimiter = Delimiter::Comma;
  }
  ParsedTable table = parse_table(in, options);
  for (const auto& m : table.report.malformed) {
    std::cerr << "warning: " << cfg.input << ":" << m.line << ": " << m.reason << '\n';
  }
  auto [records, delta] = apply_exclusions(std::move(table.records), cfg.excludes);
  for (const auto& w : delta.warnings) std::cerr << "warning: " << w << '\n';
  return {std::move(records), delta.excluded.size()};
}

int single_year(const RunConfig& cfg) {
  if (cfg.years.size() != 1) fail("select exactly one --year");
  return cfg.years.front();
}

void emit(const RunConfig& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out, std::ios::binary);
  if (!out) fail("cannot open output file: " + cfg.out);
  out << text;
}

FitConfig fit_config(const RunConfig& cfg) {
  FitConfig fc;
  if (cfg.grid_points) fc.grid_points = *cfg.grid_points;
  if (cfg.r_min.has_value() != cfg.r_max.has_value()) fail("--r-min and --r-max must be given together");
  if (cfg.r_min) fc.r_range = std::pair{*cfg.r_min, *cfg.r_max};
  if (cfg.beta) fc.beta_fixed = *cfg.beta;
  if (cfg.max_iterations) fc.minimizer.max_iterations = *cfg.max_iterations;
  fc.quad = quad_from_env(fc.quad);
  return fc;
}

ordered_json params_json(const ModelParams& p) { return {{"T", p.T}, {"beta", p.beta}, {"theta", p.theta}}; }

int cmd_fit(const RunConfig& cfg) {
  const int year = single_year(cfg);
  const LoadedData data = load(cfg);
  const std::vector<double> values = column_values(data.records, year);
  const FitResult r = fit(values, fit_config(cfg));

  std::string text;
  if (cfg.format == "table") {
    text = "T;beta;theta;objective;grid_points;converged;n;excluded_count;iterations;year\n" + num(r.params.T) + ";" +
           num(r.params.beta) + ";" + num(r.params.theta) + ";" + num(r.objective) + ";" +
           std::to_string(r.grid.size()) + ";" + (r.converged ? "true" : "false") + ";" +
           std::to_string(values.size()) + ";" + std::to_string(data.excluded_count) + ";" +
           std::to_string(r.iterations) + ";" + std::to_string(year) + "\n";
  } else {
    ordered_json j{{"T", r.params.T},
                   {"beta", r.params.beta},
                   {"theta", r.params.theta},
                   {"objective", r.objective},
                   {"grid_points", r.grid.size()},
                   {"converged", r.converged},
                   {"n", values.size()},
                   {"excluded_count", data.excluded_count},
                   {"iterations", r.iterations},
                   {"year", year}};
    text = j.dump(2) + "\n";
  }
  emit(cfg, text);
  if (!r.converged) {
    std::cerr << "warning: fit did not converge within " << r.iterations << " iterations\n";
    return kExitWarning;
  }
  return kExitOk;
}

int cmd_plotdata(const RunConfig& cfg) {
  const int year = single_year(cfg);
  const LoadedData data = load(cfg);
  const std::vector<double> values = column_values(data.records, year);
  const EmpiricalSurvival emp(values);

  int code = kExitOk;
  ModelParams params{};
  if (cfg.t && cfg.theta) {
    params = {*cfg.t, cfg.beta.value_or(2.0), *cfg.theta};
  } else if (cfg.t || cfg.theta) {
    fail("give both --t and --theta, or neither to fit them first");
  } else {
    const FitResult r = fit(values, fit_config(cfg));
    params = r.params;
    if (!r.converged) {
      std::cerr << "warning: fit did not converge; plotting the last iterate\n";
      code = kExitWarning;
    }
  }
  params.validate();

  double lo = 0.0;
  double hi = 0.0;
  if (cfg.r_min.has_value() != cfg.r_max.has_value()) fail("--r-min and --r-max must be given together");
  if (cfg.r_min) {
    lo = *cfg.r_min;
    hi = *cfg.r_max;
  } else {
    lo = emp.quantile(0.01);
    if (!(lo > 0.0)) {
      const auto& v = emp.values();
      const auto it = std::upper_bound(v.begin(), v.end(), 0.0);
      if (it == v.end()) fail("no positive impact factors to place a log grid on");
      lo = *it;
    }
    hi = emp.values().back();
    if (!(hi > lo)) fail("impact factors span no range to plot");
  }
  const std::vector<double> rs = log_grid(lo, hi, cfg.grid_points.value_or(40));
  const std::vector<double> model = Model(params, quad_from_env({})).survival(rs);

  std::string text;
  if (cfg.format == "report") {
    ordered_json rows = ordered_json::array();
    for (std::size_t i = 0; i < rs.size(); ++i) {
      rows.push_back({{"R", rs[i]},
                      {"survival_empirical", emp(rs[i])},
                      {"survival_model", model[i]},
                      {"survival_exponential", survival_small_r(params.T, rs[i])}});
    }
    text = ordered_json{{"params", params_json(params)}, {"year", year}, {"rows", rows}}.dump(2) + "\n";
  } else {
    text = "R;survival_empirical;survival_model;survival_exponential\n";
    for (std::size_t i = 0; i < rs.size(); ++i) {
      text += num(rs[i]) + ";" + num(emp(rs[i])) + ";" + num(model[i]) + ";" + num(survival_small_r(params.T, rs[i])) +
              "\n";
    }
  }
  emit(cfg, text);
  return code;
}

int cmd_compare(const RunConfig& cfg) {
  if (cfg.years.size() < 2) fail("compare needs at least two --year");
  const LoadedData data = load(cfg);
  std::vector<std::pair<std::string, std::vector<double>>> samples;
  for (int y : cfg.years) {
    std::vector<double> v = column_values(data.records, y);
    if (v.empty()) fail("year " + std::to_string(y) + " has no values");
    samples.emplace_back(std::to_string(y), std::move(v));
  }
  const StabilityReport report = stability_report(samples);

  std::string text;
  if (cfg.format == "report") {
    ordered_json pairs = ordered_json::array();
    for (const auto& p : report.pairs) {
      pairs.push_back({{"year_a", std::stoi(p.label_a)},
                       {"year_b", std::stoi(p.label_b)},
                       {"n_a", p.n_a},
                       {"n_b", p.n_b},
                       {"ks", p.ks}});
    }
    text = ordered_json{{"pairs", pairs}, {"excluded_count", data.excluded_count}}.dump(2) + "\n";
  } else {
    text = "year_a;year_b;n_a;n_b;ks\n";
    for (const auto& p : report.pairs) {
      text += p.label_a + ";" + p.label_b + ";" + std::to_string(p.n_a) + ";" + std::to_string(p.n_b) + ";" +
              num(p.ks) + "\n";
    }
  }
  emit(cfg, text);
  return kExitOk;
}

int cmd_sample(const RunConfig& cfg) {
  if (!cfg.seed) fail("--seed is required so that samples are reproducible");
  if (!cfg.n) fail("--n is required");
  if (*cfg.n <= 0) fail("--n must be positive");
  const ModelParams params{cfg.t.value_or(kReferenceParams.T), cfg.beta.value_or(kReferenceParams.beta),
                           cfg.theta.value_or(kReferenceParams.theta)};
  params.validate();
  GridSpec grid;
  if (cfg.r_min) grid.r_min = *cfg.r_min;
  if (cfg.r_max) grid.r_max = *cfg.r_max;
  if (cfg.grid_points) grid.points = *cfg.grid_points;
  const SurvivalTable table = tabulate(params, quad_from_env({}), grid);
  const std::vector<double> values = sample(table, static_cast<std::size_t>(*cfg.n), *cfg.seed);

  std::string text;
  if (cfg.format == "report") {
    text = ordered_json{{"params", params_json(params)}, {"seed", *cfg.seed}, {"values", values}}.dump(2) + "\n";
  } else {
    text.reserve(values.size() * 24);
    for (double v : values) text += num(v) + "\n";
  }
  emit(cfg, text);
  return kExitOk;
}

void add_common(CLI::App* sub, RunConfig& cfg, const std::string& default_format) {
  sub->add_option("--input", cfg.input, "Impact-factor table");
  sub->add_option("--year", cfg.years, "Year column to use (repeatable)");
  sub->add_option("--exclude", cfg.excludes, "Journal name to exclude, case-insensitive (repeatable)");
  sub->add_option("--t", cfg.t, "Effective temperature T");
  sub->add_option("--beta", cfg.beta, "Shape beta (> 1.5); fixed during fits");
  sub->add_option("--theta", cfg.theta, "Transition parameter theta");
  sub->add_option("--grid-points", cfg.grid_points, "Number of log-spaced grid points");
  sub->add_option("--r-min", cfg.r_min, "Lower end of the R grid");
  sub->add_option("--r-max", cfg.r_max, "Upper end of the R grid");
  sub->add_option("--seed", cfg.seed, "Random seed");
  sub->add_option("--n", cfg.n, "Number of values to draw");
  sub->add_option("--max-iterations", cfg.max_iterations, "Simplex iteration cap for fits");
  sub->add_option("--out", cfg.out, "Write output here instead of stdout");
  cfg.format = default_format;
  sub->add_option("--format", cfg.format, "Output format")->check(CLI::IsMember({"table", "report"}));
  sub->add_option("--delimiter", cfg.delimiter, "Input delimiter")
      ->check(CLI::IsMember({"auto", "semicolon", "tab", "comma"}));
  sub->add_flag("--decimal-comma", cfg.decimal_comma, "Accept ',' as decimal mark (not with comma delimiter)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exponential distribution with a power-law tail for journal impact factors"};
  app.require_subcommand(1);
  RunConfig fit_cfg, plot_cfg, compare_cfg, sample_cfg;
  auto* fit_cmd = app.add_subcommand("fit", "Fit T and theta (beta fixed) to one year of impact factors");
  auto* plot_cmd = app.add_subcommand("plotdata", "Empirical, model and exponential survival on a log grid");
  auto* compare_cmd = app.add_subcommand("compare", "Two-sample KS distance between every pair of years");
  auto* sample_cmd = app.add_subcommand("sample", "Draw values from the model");
  add_common(fit_cmd, fit_cfg, "report");
  add_common(plot_cmd, plot_cfg, "table");
  add_common(compare_cmd, compare_cfg, "table");
  add_common(sample_cmd, sample_cfg, "table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_cfg);
    if (plot_cmd->parsed()) return cmd_plotdata(plot_cfg);
    if (compare_cmd->parsed()) return cmd_compare(compare_cfg);
    if (sample_cmd->parsed()) return cmd_sample(sample_cfg);
  } catch (const ExitRequest& e) {
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
