// Copyright 2026 The vqb Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// vqb: command-line front end for the broadcasting overhead programs.
//
// Exit codes: 0 success, 1 verify failure, 2 bad arguments, 3 solver
// failure, 4 I/O failure.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vqb/vqb.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kVerifyFailed = 1;
constexpr int kBadArgs = 2;
constexpr int kSolverFailed = 3;
constexpr int kIoFailed = 4;

// Largest dimension accepted without --allow-large-dim.
constexpr std::size_t kDeskDim = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SolverFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::size_t dim = 2;
  std::size_t grid = 41;
  double gamma = 1.8;
  std::optional<double> delta;
  std::vector<std::size_t> dims{2, 3, 4};
  std::vector<double> gammas{1.0, 1.8};
  std::string out;
  std::string format = "csv";
  std::uint64_t seed = 42;
  std::uint64_t shots = 1000000;
  int marginal = 1;
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  std::size_t max_iter = 200;
  std::size_t jobs = 1;
  bool allow_large_dim = false;

  vqb::SolverConfig solver() const {
    vqb::SolverConfig c;
    c.tol_gap = tol_gap;
    c.tol_feas = tol_feas;
    c.max_iter = max_iter;
    c.allow_large_blocks = allow_large_dim;
    c.validate();
    return c;
  }

  void check_dim(std::size_t d) const {
    if (d < 2) throw UsageError("dimension must be at least 2");
    if (d > kDeskDim && !allow_large_dim)
      throw UsageError("dimension " + std::to_string(d) + " exceeds " + std::to_string(kDeskDim) +
                       "; pass --allow-large-dim to proceed");
  }

  vqb::RecordFormat record_format() const {
    return format == "json" ? vqb::RecordFormat::json : vqb::RecordFormat::csv;
  }

  /// --out if given, else <VQB_OUTPUT_DIR>/<stem>.<format> if that variable
  /// is set, else empty (print to stdout).
  std::string output_path(const std::string& stem) const {
    if (!out.empty()) return out;
    if (const char* dir = std::getenv("VQB_OUTPUT_DIR"); dir && *dir)
      return (std::filesystem::path(dir) / (stem + "." + format)).string();
    return {};
  }
};

void emit(const RunConfig& rc, const std::string& stem, const std::vector<vqb::SweepRecord>& rows) {
  const std::string path = rc.output_path(stem);
  if (path.empty()) {
    std::cout << (rc.record_format() == vqb::RecordFormat::csv ? vqb::to_csv(rows) : vqb::to_json(rows));
    return;
  }
  vqb::write_records(rows, rc.record_format(), path);
  std::cerr << "wrote " << rows.size() << " rows to " << path << "\n";
}

void require_optimal(const vqb::SweepRecord& r) {
  if (r.status != "optimal") throw SolverFailure("solver status: " + r.status);
}

void add_solver_flags(CLI::App* app, RunConfig& rc) {
  app->add_option("--tol-gap", rc.tol_gap, "relative duality gap tolerance")->capture_default_str();
  app->add_option("--tol-feas", rc.tol_feas, "primal/dual residual tolerance")->capture_default_str();
  app->add_option("--max-iter", rc.max_iter, "interior-point iteration limit")->capture_default_str();
  app->add_flag("--allow-large-dim", rc.allow_large_dim, "permit dimensions above 4");
}

void add_output_flags(CLI::App* app, RunConfig& rc) {
  app->add_option("--out", rc.out, "output file (default: $VQB_OUTPUT_DIR/<command>.<format> or stdout)");
  app->add_option("--format", rc.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  app->add_option("--jobs", rc.jobs, "concurrent solves")->check(CLI::PositiveNumber)->capture_default_str();
}

int cmd_exact(const RunConfig& rc) {
  rc.check_dim(rc.dim);
  const vqb::SweepRecord r = vqb::exact_record(rc.dim, rc.solver());
  require_optimal(r);
  std::printf("nu=%.6f s=%.6f\n", *r.nu, *r.s);
  if (!rc.out.empty()) vqb::write_records({r}, rc.record_format(), rc.out);
  return kOk;
}

int cmd_sweep_ab(const RunConfig& rc) {
  rc.check_dim(rc.dim);
  if (rc.grid < 2) throw UsageError("--grid must be at least 2");
  const auto rows = vqb::sweep_ab(rc.grid, rc.dim, rc.solver(), rc.jobs);
  emit(rc, "sweep-ab", rows);
  for (const auto& r : rows)
    if (r.status != "optimal") return kSolverFailed;
  return kOk;
}

int cmd_min_error(const RunConfig& rc) {
  rc.check_dim(rc.dim);
  if (rc.delta && !(*rc.delta >= 0 && *rc.delta <= 1)) throw UsageError("--delta must lie in [0, 1]");
  const vqb::SweepRecord r = vqb::tradeoff_record(rc.gamma, rc.dim, rc.solver(), rc.delta);
  if (r.status != "optimal") {
    std::printf("status=%s\n", r.status.c_str());
    return kSolverFailed;
  }
  std::printf("mu=%.6f t=%.6f nu=%.6f s=%.6f bound=%.6f\n", *r.mu, *r.t, *r.nu, *r.s,
              rc.gamma >= 1 ? vqb::mu_upper_bound(rc.gamma, rc.dim) : NAN);
  if (!rc.out.empty()) vqb::write_records({r}, rc.record_format(), rc.out);
  return kOk;
}

int cmd_tradeoff(const RunConfig& rc) {
  for (std::size_t d : rc.dims) rc.check_dim(d);
  for (double g : rc.gammas)
    if (!(g >= 0)) throw UsageError("gammas must be nonnegative");
  const auto rows = vqb::tradeoff(rc.gammas, rc.dims, rc.solver(), rc.jobs);
  emit(rc, "tradeoff", rows);
  for (const auto& r : rows)
    if (r.status != "optimal") return kSolverFailed;
  return kOk;
}

int cmd_verify(const RunConfig& rc) {
  int failed = 0;
  vqb::run_acceptance(rc.solver(), [&](const vqb::CriterionResult& c) {
    std::printf("%s\n", vqb::format_criterion(c).c_str());
    std::fflush(stdout);
    failed += c.pass ? 0 : 1;
  });
  std::printf("%d of 11 criteria failed\n", failed);
  return failed == 0 ? kOk : kVerifyFailed;
}

int cmd_simulate(const RunConfig& rc) {
  rc.check_dim(rc.dim);
  if (!(rc.gamma >= 1 && rc.gamma <= 9)) throw UsageError("--gamma must lie in [1, 9] for simulate");
  if (rc.marginal != 1 && rc.marginal != 2) throw UsageError("--marginal must be 1 or 2");
  const vqb::FeasiblePoint p = vqb::theorem5_feasible_point(rc.gamma, rc.dim);
  std::vector<double> diag(rc.dim, -1.0);
  diag[0] = 1.0;
  const vqb::Observable obs(vqb::HermitianOperator::diagonal(diag));
  std::vector<double> ket(rc.dim, 0.0);
  ket[0] = 1.0;
  const vqb::DensityOperator rho(vqb::HermitianOperator::diagonal(ket));
  const auto est = vqb::run_protocol(p.decomposition, rho, obs, rc.marginal, rc.shots, rc.seed, rc.jobs);
  const auto naive = vqb::naive_baseline(rho, obs, rc.shots, rc.seed, rc.jobs);
  const double expected = vqb::expected_value(p.decomposition, rho, obs, rc.marginal);
  const auto budget = vqb::required_samples(obs.range(), p.decomposition.nu(), 0.01, 0.05);
  std::printf("gamma=%.9g d=%zu x=%.9g y=%.9g nu=%.9g delta=%.9g\n", rc.gamma, rc.dim, p.decomposition.x,
              p.decomposition.y, p.decomposition.nu(), p.delta);
  std::printf("shots=%llu seed=%llu plus=%llu minus=%llu\n", static_cast<unsigned long long>(est.shots),
              static_cast<unsigned long long>(est.seed), static_cast<unsigned long long>(est.plus_shots),
              static_cast<unsigned long long>(est.minus_shots));
  std::printf("mean=%.9g stderr=%.3g expected=%.9g ideal=1\n", est.mean, est.standard_error(), expected);
  std::printf("naive mean=%.9g second-moment ratio=%.6g\n", naive.mean, est.second_moment / naive.second_moment);
  std::printf("hoeffding n(eps=0.01, fail=0.05)=%llu\n", static_cast<unsigned long long>(budget.n));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sampling overhead of virtual quantum broadcasting"};
  app.require_subcommand(1);
  RunConfig rc;

  auto* exact = app.add_subcommand("exact", "minimum overhead of exact broadcasting");
  exact->add_option("--dim", rc.dim, "input dimension")->capture_default_str();
  add_solver_flags(exact, rc);
  exact->add_option("--out", rc.out, "also write the record to this file");
  exact->add_option("--format", rc.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* sweep = app.add_subcommand("sweep-ab", "overhead over a grid of marginal error thresholds");
  sweep->add_option("--grid", rc.grid, "points per axis on [0, 1]")->capture_default_str();
  sweep->add_option("--dim", rc.dim, "input dimension")->capture_default_str();
  add_solver_flags(sweep, rc);
  add_output_flags(sweep, rc);

  auto* me = app.add_subcommand("min-error", "minimum balanced marginal error at a sample budget");
  me->add_option("--gamma", rc.gamma, "sample budget (x+y)^2 <= gamma")->capture_default_str();
  me->add_option("--dim", rc.dim, "input dimension")->capture_default_str();
  me->add_option("--delta", rc.delta, "pin the error and test feasibility instead");
  add_solver_flags(me, rc);
  me->add_option("--out", rc.out, "also write the record to this file");
  me->add_option("--format", rc.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  auto* to = app.add_subcommand("tradeoff", "minimum error for each budget and dimension");
  to->add_option("--gammas", rc.gammas, "sample budgets")->delimiter(',')->capture_default_str();
  to->add_option("--dims", rc.dims, "input dimensions")->delimiter(',')->capture_default_str();
  add_solver_flags(to, rc);
  add_output_flags(to, rc);

  auto* verify = app.add_subcommand("verify", "run the acceptance checks");
  add_solver_flags(verify, rc);

  auto* sim = app.add_subcommand("simulate", "Monte Carlo run of the explicit budget-gamma protocol");
  sim->add_option("--gamma", rc.gamma, "sample budget in [1, 9]")->default_val(2.0);
  sim->add_option("--dim", rc.dim, "input dimension")->capture_default_str();
  sim->add_option("--shots", rc.shots, "number of shots")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_option("--seed", rc.seed, "Philox seed")->capture_default_str();
  sim->add_option("--marginal", rc.marginal, "receiver to measure (1 or 2)")->capture_default_str();
  sim->add_option("--jobs", rc.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
  sim->add_flag("--allow-large-dim", rc.allow_large_dim, "permit dimensions above 4");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadArgs;
  }

  try {
    if (*exact) return cmd_exact(rc);
    if (*sweep) return cmd_sweep_ab(rc);
    if (*me) return cmd_min_error(rc);
    if (*to) return cmd_tradeoff(rc);
    if (*verify) return cmd_verify(rc);
    if (*sim) return cmd_simulate(rc);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  } catch (const SolverFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailed;
  } catch (const vqb::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIoFailed;
  } catch (const vqb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kBadArgs;
  }
  return kBadArgs;
}
