// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "powertail/powertail.hpp"

namespace pt = powertail;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit_s;  // <= 0 means no limit
  std::function<Outcome()> check;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome special_functions() {
  double worst_k = 0.0;
  for (double x = 0.01; x <= 50.0; x *= 1.1) {
    const double k12 = std::sqrt(std::numbers::pi / (2.0 * x)) * std::exp(-x);
    worst_k = std::max({worst_k, rel_err(pt::bessel_k(0.5, x), k12), rel_err(pt::bessel_k(1.5, x), k12 * (1.0 + 1.0 / x))});
  }
  double worst_phi = 0.0;
  const pt::KernelOrder order(1.5);
  for (int i = 0; i <= 3000; ++i) {
    const double t = 0.01 * i;
    worst_phi = std::max(worst_phi, std::abs(pt::cf_kernel(order, t) - (1.0 + t) * std::exp(-t)));
  }
  return {worst_k <= 1e-10 && worst_phi <= 1e-10,
          "max rel err K_{1/2},K_{3/2} = " + fmt(worst_k) + "; max |phi - (1+t)e^-t| = " + fmt(worst_phi)};
}

Outcome beta2_equivalence() {
  double worst = 0.0;
  for (auto [T, theta] : std::vector<std::pair<double, double>>{{1.5, 30.0}, {1.0, 5.0}, {3.0, 10.0}}) {
    const pt::Model m({T, 2.0, theta});
    for (double r : {0.0, 0.1, 1.0, 5.0, 10.0, 50.0}) worst = std::max(worst, rel_err(m.pdf(r), pt::pdf_beta2(T, theta, r)));
  }
  return {worst <= 1e-6, "max rel diff = " + fmt(worst)};
}

Outcome normalization() {
  const pt::Model m(pt::kReferenceParams);
  const double mass = m.normalization();
  const double f0 = m.survival(0.0);
  return {mass >= 0.99 && mass <= 1.01 && f0 >= 0.99 && f0 <= 1.01,
          "integral W dR = " + fmt(mass) + " (up to R = " + fmt(m.quadrature().survival_r_max) + "), survival(0) = " +
              fmt(f0)};
}

Outcome exponential_regime() {
  const pt::Model m(pt::kReferenceParams);
  std::vector<double> rs;
  for (double r = 0.5; r <= 3.0 + 1e-12; r += 0.125) rs.push_back(r);
  const auto fs = m.survival(rs);
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    mx += rs[i];
    my += std::log(fs[i]);
  }
  mx /= static_cast<double>(rs.size());
  my /= static_cast<double>(rs.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < rs.size(); ++i) {
    sxy += (rs[i] - mx) * (std::log(fs[i]) - my);
    sxx += (rs[i] - mx) * (rs[i] - mx);
  }
  const double slope = sxy / sxx;
  const double target = -1.0 / 1.5;
  return {rel_err(slope, target) <= 0.25, "slope = " + fmt(slope) + " vs -1/T = " + fmt(target)};
}

Outcome tail_elevation() {
  const pt::Model m(pt::kReferenceParams);
  bool elevated = true;
  for (double r = 20.0; r <= 1000.0; r *= 1.25) elevated = elevated && m.survival(r) > std::exp(-r / 1.5);
  const double s = pt::tail_slope(pt::kReferenceParams, 50.0, 300.0);
  double worst = 0.0;
  for (auto [lo, hi] : std::vector<std::pair<double, double>>{{40.0, 300.0}, {60.0, 300.0}, {50.0, 250.0}, {50.0, 350.0}, {80.0, 250.0}}) {
    worst = std::max(worst, rel_err(pt::tail_slope(pt::kReferenceParams, lo, hi), s));
  }
  return {elevated && s < 0.0 && worst <= 0.05,
          std::string("survival > e^(-R/T) on [20, 1000]: ") + (elevated ? "yes" : "no") + "; slope [50,300] = " + fmt(s) +
              ", max rel change under range perturbation = " + fmt(worst)};
}

Outcome round_trip() {
  const pt::SurvivalTable table = pt::tabulate(pt::kReferenceParams);
  int within = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const pt::FitResult r = pt::fit(pt::sample(table, 10000, seed));
    if (rel_err(r.params.T, 1.5) <= 0.15) ++within;
  }
  const auto grid = pt::log_grid(0.05, 300.0, 40);
  const auto f = pt::Model(pt::kReferenceParams, pt::QuadratureSettings::fast()).survival(grid);
  const pt::FitResult clean = pt::fit_curve(grid, f, {});
  const bool clean_ok = rel_err(clean.params.T, 1.5) <= 0.01 && rel_err(clean.params.theta, 30.0) <= 0.01;
  return {within >= 18 && clean_ok, std::to_string(within) + "/20 seeds with T within 15%; noise-free fit T = " +
                                        fmt(clean.params.T) + ", theta = " + fmt(clean.params.theta)};
}

Outcome stability_mirror() {
  const pt::SurvivalTable table = pt::tabulate(pt::kReferenceParams);
  int below = 0;
  double worst = 0.0;
  for (std::uint64_t pair = 0; pair < 100; ++pair) {
    const double d = pt::ks_distance(pt::sample(table, 9028, 1000 + 2 * pair), pt::sample(table, 9028, 1001 + 2 * pair));
    worst = std::max(worst, d);
    if (d < 0.03) ++below;
  }
  return {below >= 95, std::to_string(below) + "/100 pairs with KS < 0.03; max KS = " + fmt(worst)};
}

Outcome tail_count() {
  const pt::SurvivalTable table = pt::tabulate(pt::kReferenceParams);
  std::vector<std::size_t> counts;
  for (std::uint64_t seed = 500; seed < 520; ++seed) counts.push_back(pt::count_above(pt::sample(table, 9028, seed), 10.0));
  std::sort(counts.begin(), counts.end());
  const double median = 0.5 * static_cast<double>(counts[9] + counts[10]);
  return {median >= 30.0 && median <= 500.0, "median count above 10 = " + fmt(median) + " (range " +
                                                 std::to_string(counts.front()) + ".." + std::to_string(counts.back()) + ")"};
}

Outcome ingestion() {
  const std::string header = "JOURNAL;IF_2011;IF_2012;IF_2013\n";
  pt::ParseOptions comma;
  comma.decimal_comma = true;
  std::istringstream ca(header + "Ca-A Cancer Journal For Clinicians;101,78;153,459;162,5\n");
  const auto t = pt::parse_table(ca, comma);
  const std::map<int, double> expected{{2011, 101.78}, {2012, 153.459}, {2013, 162.5}};
  const bool ca_ok = t.records.size() == 1 && t.records[0].impact_factors == expected;

  std::string body_comma;
  std::string body_point;
  for (int i = 0; i < 9027; ++i) {
    const std::string a = std::to_string(i % 97) + "," + std::to_string(i % 1000);
    const std::string b = std::to_string(i % 13) + "," + std::to_string((7 * i) % 1000);
    const std::string line = "Journal " + std::to_string(i) + ";" + a + ";" + b + ";";
    body_comma += line + "\n";
    std::string p = line;
    std::replace(p.begin(), p.end(), ',', '.');
    body_point += p + "\n";
  }
  body_comma += "Ca-A Cancer Journal For Clinicians;101,78;153,459;162,5\n";
  body_point += "Ca-A Cancer Journal For Clinicians;101.78;153.459;162.5\n";
  std::istringstream in_comma(header + body_comma);
  std::istringstream in_point(header + body_point);
  const auto pc = pt::parse_table(in_comma, comma);
  const auto pp = pt::parse_table(in_point);
  const bool same = pc.records == pp.records && pc.records.size() == 9028;
  const auto [kept, delta] = pt::apply_exclusions(pp.records, {"Ca-A Cancer Journal For Clinicians"});
  const bool excl_ok = kept.size() == 9027 && delta.excluded.size() == 1;
  return {ca_ok && same && excl_ok, std::string("CA row ") + (ca_ok ? "ok" : "wrong") + "; comma/point variants " +
                                        (same ? "identical" : "differ") + "; exclusion " +
                                        std::to_string(pp.records.size()) + " -> " + std::to_string(kept.size())};
}

struct CliRun {
  int code = -1;
  std::string out;
};

CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(POWERTAIL_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  if (pipe == nullptr) return r;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, got);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

Outcome cli_determinism() {
  const fs::path dir = fs::temp_directory_path() / ("powertail_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const pt::SurvivalTable table = pt::tabulate(pt::kReferenceParams);
  std::vector<pt::JournalRecord> recs(9028);
  for (int year = 2011; year <= 2013; ++year) {
    const auto v = pt::sample(table, recs.size(), static_cast<std::uint64_t>(year));
    for (std::size_t i = 0; i < recs.size(); ++i) recs[i].impact_factors[year] = v[i];
  }
  for (std::size_t i = 0; i < recs.size(); ++i) recs[i].name = "Journal " + std::to_string(i);
  const std::string corpus = (dir / "corpus.csv").string();
  {
    std::ofstream out(corpus);
    pt::write_table(out, recs);
  }
  recs.resize(5);
  const std::string small = (dir / "small.csv").string();
  {
    std::ofstream out(small);
    pt::write_table(out, recs);
  }

  const std::vector<std::string> cmds{
      "fit --input " + corpus + " --year 2012",
      "plotdata --input " + corpus + " --year 2012",
      "compare --input " + corpus + " --year 2011 --year 2012 --year 2013",
      "sample --seed 42 --n 1000",
  };
  int identical = 0;
  bool all_ok = true;
  for (const auto& c : cmds) {
    const CliRun a = run_cli(c);
    const CliRun b = run_cli(c);
    all_ok = all_ok && a.code == 0;
    if (a.code == b.code && a.out == b.out && !a.out.empty()) ++identical;
  }
  const int data_error = run_cli("fit --input " + small + " --year 2011").code;
  const int non_converged = run_cli("fit --input " + corpus + " --year 2011 --max-iterations 1").code;
  fs::remove_all(dir);
  const bool pass = identical == static_cast<int>(cmds.size()) && all_ok && data_error == 1 && non_converged == 2;
  return {pass, std::to_string(identical) + "/" + std::to_string(cmds.size()) +
                    " subcommands byte-identical; exit codes: success " + (all_ok ? "0" : "!=0") + ", data error " +
                    std::to_string(data_error) + ", non-converged " + std::to_string(non_converged)};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "special-function correctness", 1.0, special_functions},
      {2, "general pdf equals beta=2 form", 5.0, beta2_equivalence},
      {3, "normalization", 10.0, normalization},
      {4, "exponential regime", 0.0, exponential_regime},
      {5, "tail elevation", 0.0, tail_elevation},
      {6, "round-trip inference", 120.0, round_trip},
      {7, "stability mirror", 120.0, stability_mirror},
      {8, "tail-count order", 0.0, tail_count},
      {9, "ingestion fidelity", 0.0, ingestion},
      {10, "CLI determinism and exit codes", 0.0, cli_determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.time_limit_s <= 0.0 || secs < c.time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.title << "): " << o.detail << " ["
              << fmt(secs) << " s";
    if (c.time_limit_s > 0.0) std::cout << ", limit " << fmt(c.time_limit_s) << " s";
    std::cout << "]" << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
