// dsb: command-line front end for the simulated bifurcation solver and the
// time-to-epsilon benchmark pipeline.
//
//   dsb generate --graph king --sizes 5,6 --count 125 --seed 1 --out instances/
//   dsb oracle instances/king_L4_000.txt
//   dsb solve instance.txt --steps 1000 --replicas 32 --workers 4
//   dsb bench --instances instances/ --runs 100 --out results/
//   dsb fit results/<run>/summary.csv --range 100:2000
//   dsb replay results/<run>/manifest.json

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dsb/bench.hpp"
#include "dsb/generator.hpp"
#include "dsb/graphs.hpp"
#include "dsb/instance_io.hpp"
#include "dsb/oracle.hpp"
#include "dsb/report.hpp"
#include "dsb/sbm.hpp"
#include "dsb/scaling.hpp"

namespace fs = std::filesystem;

namespace {

constexpr const char* kWorkersEnv = "DSB_WORKERS";

std::size_t default_workers() {
  if (const char* env = std::getenv(kWorkersEnv)) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    std::cerr << "warning: ignoring invalid " << kWorkersEnv << "='" << env << "'\n";
  }
  return 1;
}

struct SolverFlags {
  std::size_t steps = 1000;
  std::size_t replicas = 32;
  std::size_t workers = default_workers();
  std::uint64_t seed = 0;
  double dt_min = 0.25;
  double dt_max = 1.5;
  std::optional<double> c0;
  double a0 = 1.0;
  double slope = 0.7;
  std::string sigma = "all";
  bool track_best = false;

  void attach(CLI::App* cmd, bool with_shape) {
    if (with_shape) {
      cmd->add_option("--steps", steps, "Number of integration steps N_s")->check(CLI::PositiveNumber);
      cmd->add_option("--replicas", replicas, "Number of replicas N_r")->check(CLI::PositiveNumber);
    }
    cmd->add_option("--workers", workers, std::string("Worker threads (default from ") + kWorkersEnv + " or 1)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", seed, "Master seed");
    cmd->add_option("--dt-min", dt_min, "Lower end of the per-replica time step range");
    cmd->add_option("--dt-max", dt_max, "Upper end of the per-replica time step range");
    cmd->add_option("--c0", c0, "Coupling scale c0 (default 0.7 a0 / (sigma sqrt(N)))");
    cmd->add_option("--a0", a0, "Drive ceiling a0");
    cmd->add_option("--slope", slope, "Ternary dead-zone slope");
    cmd->add_option("--sigma-mode", sigma, "Coupling sigma for c0: all | nonzero")
        ->check(CLI::IsMember({"all", "nonzero"}));
    cmd->add_flag("--track-best", track_best, "Keep the best readout along each trajectory");
  }

  dsb::SbmParams params() const {
    dsb::SbmParams p;
    p.n_steps = steps;
    p.n_replicas = replicas;
    p.n_workers = workers;
    p.seed = seed;
    p.dt_min = dt_min;
    p.dt_max = dt_max;
    p.c0_override = c0;
    p.a0 = a0;
    p.ternary_slope = slope;
    p.sigma_mode = sigma == "all" ? dsb::SigmaMode::all_off_diagonal : dsb::SigmaMode::nonzero_only;
    p.track_best = track_best;
    p.validate();
    return p;
  }
};

std::vector<double> percent_to_fraction(const std::vector<double>& percents) {
  std::vector<double> out;
  for (const double p : percents) {
    if (!(p >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");
    // Shift the decimal exponent rather than divide, so 1.1 becomes the double nearest 0.011.
    out.push_back(std::stod(dsb::format_real(p) + "e-2"));
  }
  return out;
}

dsb::SizeRange parse_range(const std::string& text) {
  dsb::SizeRange range;
  if (text.empty()) return range;
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("range must look like MIN:MAX");
  const auto lo = text.substr(0, colon);
  const auto hi = text.substr(colon + 1);
  if (!lo.empty()) range.min = std::stod(lo);
  if (!hi.empty()) range.max = std::stod(hi);
  if (range.min > range.max) throw std::invalid_argument("range minimum exceeds maximum");
  return range;
}

void write_json_file(const fs::path& path, const dsb::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

fs::path fresh_subdirectory(const fs::path& parent, const std::string& stem) {
  fs::create_directories(parent);
  const std::string base = stem + "-" + dsb::utc_timestamp("%Y%m%dT%H%M%SZ");
  fs::path dir = parent / base;
  for (int k = 1; fs::exists(dir); ++k) dir = parent / (base + "-" + std::to_string(k));
  fs::create_directory(dir);
  return dir;
}

std::vector<fs::path> list_instances(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no .txt instances in " + dir.string());
  return files;
}

int run_cli(const std::vector<std::string>& args);

}  // namespace

namespace {

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Discretized simulated bifurcation solver and time-to-epsilon benchmarks", "dsb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dsb::kVersion);

  dsb::RunManifest manifest;
  manifest.argv = args;

  // generate
  auto* gen = app.add_subcommand("generate", "Write Sidon-28 instances on a graph family");
  std::string graph_kind = "king";
  std::vector<std::size_t> sizes;
  std::string edges_path;
  std::optional<std::size_t> count;
  std::string regime = "standard";
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("--graph", graph_kind, "king | complete | edges")
      ->check(CLI::IsMember({"king", "complete", "edges"}));
  gen->add_option("--sizes", sizes, "Side L (king) or N (complete)")->delimiter(',');
  gen->add_option("--edges", edges_path, "Edge list file for --graph edges");
  gen->add_option("--count", count, "Instances per size (125 standard, 10 large)")
      ->check(CLI::PositiveNumber);
  gen->add_option("--regime", regime, "standard | large (sets the default count)")
      ->check(CLI::IsMember({"standard", "large"}));
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--out", gen_out, "Output directory")->required();

  // solve
  auto* sol = app.add_subcommand("solve", "Run the solver once and print the outcome as JSON");
  std::string solve_path;
  std::string trace_path;
  bool one_based = false;
  SolverFlags solve_flags;
  sol->add_option("instance", solve_path, "Instance file")->required();
  sol->add_option("--trace", trace_path, "Write a per-step CSV trace to this file");
  sol->add_flag("--one-based", one_based, "Instance indices start at 1");
  solve_flags.attach(sol, true);

  // oracle
  auto* orc = app.add_subcommand("oracle", "Exhaustive ground state; writes E0 into the file");
  std::string oracle_path;
  std::size_t oracle_workers = default_workers();
  orc->add_option("instance", oracle_path, "Instance file (n <= 30)")->required();
  orc->add_option("--workers", oracle_workers, "Worker threads")->check(CLI::PositiveNumber);

  // bench
  auto* ben = app.add_subcommand("bench", "Time-to-epsilon benchmark with grid search");
  std::string bench_dir;
  std::string bench_out;
  std::vector<double> eps_percent = {0.75, 1.00, 1.10, 1.25};
  std::size_t runs = 100;
  std::vector<std::size_t> grid_steps = dsb::default_grid().steps;
  std::vector<std::size_t> grid_replicas = dsb::default_grid().replicas;
  std::string timing = "total";
  std::size_t bootstrap = 1000;
  unsigned jobs = 1;
  bool single_measurement = false;
  std::string reference = "auto";
  std::string solver_kind = "sbm";
  std::string label = "SBM";
  SolverFlags bench_flags;
  ben->add_option("--instances", bench_dir, "Directory of .txt instances")->required();
  ben->add_option("--out", bench_out, "Parent directory for the timestamped result folder")->required();
  ben->add_option("--eps", eps_percent, "Optimality gaps in percent")->delimiter(',');
  ben->add_option("--runs", runs, "Independent runs per instance and cell")->check(CLI::PositiveNumber);
  ben->add_option("--grid-steps", grid_steps, "N_s grid")->delimiter(',');
  ben->add_option("--grid-replicas", grid_replicas, "N_r grid")->delimiter(',');
  ben->add_option("--timing", timing, "Minimise total or compute TTe")
      ->check(CLI::IsMember({"total", "compute"}));
  ben->add_option("--bootstrap", bootstrap, "Bootstrap resamples")->check(CLI::PositiveNumber);
  ben->add_option("--jobs", jobs, "Concurrent (instance, cell) tasks")->check(CLI::PositiveNumber);
  ben->add_flag("--single-measurement", single_measurement,
                "Force one task at a time so timings are not shared");
  ben->add_option("--reference", reference,
                  "E0 source: auto (header, oracle for n <= 30, else best found) | metadata")
      ->check(CLI::IsMember({"auto", "metadata"}));
  ben->add_option("--solver", solver_kind, "sbm | stub (all +1 spins, for smoke tests)")
      ->check(CLI::IsMember({"sbm", "stub"}));
  ben->add_option("--label", label, "Solver label in the summary CSV");
  bench_flags.attach(ben, false);

  // fit
  auto* fit = app.add_subcommand("fit", "Power-law fits of median TTe versus N");
  std::string fit_csv;
  std::string range_text;
  std::vector<double> fit_eps;
  std::string fit_solver;
  bool weighted = false;
  std::string fit_timing;
  std::string curve_dir;
  fit->add_option("medians", fit_csv, "CSV with solver,N,eps,median,std columns")->required();
  fit->add_option("--range", range_text, "Size range MIN:MAX (either side may be empty)");
  fit->add_option("--eps", fit_eps, "Optimality gaps in percent (default: all in the file)")
      ->delimiter(',');
  fit->add_option("--solver", fit_solver, "Solver label (default: every solver)");
  fit->add_flag("--weighted", weighted, "Weight points by their bootstrap std");
  fit->add_option("--timing", fit_timing, "Read median_total/median_compute columns")
      ->check(CLI::IsMember({"total", "compute"}));
  fit->add_option("--curve-out", curve_dir, "Directory for plot-ready CSVs");

  // convert
  auto* conv = app.add_subcommand("convert", "Rewrite an instance in canonical 0-based form");
  std::string conv_in;
  std::string conv_out;
  bool conv_one_based = false;
  conv->add_option("input", conv_in)->required();
  conv->add_option("output", conv_out)->required();
  conv->add_flag("--one-based", conv_one_based, "Input indices start at 1");

  // replay
  auto* rep = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  std::string manifest_path;
  rep->add_option("manifest", manifest_path)->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) {
      if (sizes.empty() && graph_kind != "edges") throw std::invalid_argument("--sizes is required");
      const std::size_t per_size = count.value_or(regime == "large" ? 10 : 125);
      const fs::path out_dir(gen_out);
      fs::create_directories(out_dir);
      std::vector<dsb::Graph> graphs;
      if (graph_kind == "edges") {
        if (edges_path.empty()) throw std::invalid_argument("--edges is required for --graph edges");
        graphs.push_back(dsb::load_edge_list(edges_path));
        manifest.inputs.push_back(edges_path);
      } else {
        for (const auto s : sizes)
          graphs.push_back(graph_kind == "king" ? dsb::kings_graph(s) : dsb::complete_graph(s));
      }
      std::size_t written = 0;
      for (std::size_t g = 0; g < graphs.size(); ++g) {
        const std::string tag = graph_kind == "edges" ? "edges"
                                : graph_kind == "king" ? "king_L" + std::to_string(sizes[g])
                                                       : "complete_N" + std::to_string(sizes[g]);
        for (std::size_t k = 0; k < per_size; ++k) {
          char idx[24];
          std::snprintf(idx, sizeof idx, "%03zu", k);
          const std::string name = tag + "_" + idx;
          const std::uint64_t seed = dsb::combine_seeds(dsb::combine_seeds(gen_seed, graphs[g].n), k);
          dsb::InstanceMetadata meta;
          meta.name = name;
          const auto model = dsb::generate_sidon_instance(graphs[g], seed, meta);
          dsb::save_instance(model, (out_dir / (name + ".txt")).string());
          ++written;
        }
      }
      manifest.command = "generate";
      manifest.master_seed = gen_seed;
      manifest.parameters = {{"graph", graph_kind}, {"sizes", sizes}, {"count", per_size}, {"regime", regime}};
      write_json_file(out_dir / "manifest.json", manifest.to_json());
      std::cout << dsb::json({{"written", written}, {"out", out_dir.string()}}).dump() << '\n';
      return 0;
    }

    if (sol->parsed()) {
      const auto model = dsb::load_instance(solve_path, {one_based});
      const auto params = solve_flags.params();
      std::ofstream trace;
      dsb::SolveOptions options;
      if (!trace_path.empty()) {
        trace.open(trace_path);
        if (!trace) throw std::runtime_error("cannot write trace " + trace_path);
        options.trace = &trace;
      }
      const auto outcome = dsb::solve(model, params, options);
      manifest.command = "solve";
      manifest.master_seed = params.seed;
      manifest.parameters = dsb::to_json(params);
      manifest.inputs.push_back(solve_path);
      dsb::json out = {{"schema_version", dsb::kSchemaVersion},
                       {"instance", solve_path},
                       {"N", model.size()},
                       {"outcome", dsb::to_json(outcome)},
                       {"manifest", manifest.to_json()}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (orc->parsed()) {
      const auto model = dsb::load_instance(oracle_path);
      manifest.command = "oracle";
      manifest.inputs.push_back(oracle_path);
      dsb::json input_manifest = manifest.to_json();
      const auto ground = dsb::brute_force_ground_state(model, static_cast<unsigned>(oracle_workers));
      auto meta = model.metadata();
      meta.ground_energy = ground.energy;
      dsb::save_instance(model.with_metadata(meta), oracle_path);
      std::vector<int> spins(ground.spins.values().begin(), ground.spins.values().end());
      dsb::json out = {{"schema_version", dsb::kSchemaVersion},
                       {"instance", oracle_path},
                       {"E0", ground.energy},
                       {"argmin", spins},
                       {"manifest", input_manifest}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (ben->parsed()) {
      const auto epsilons = percent_to_fraction(eps_percent);
      dsb::SbmParams base = bench_flags.params();
      dsb::StudyOptions options;
      options.n_runs = runs;
      options.master_seed = bench_flags.seed;
      options.target = timing == "total" ? dsb::TimingVariant::total : dsb::TimingVariant::compute;
      options.bootstrap_resamples = bootstrap;
      options.bootstrap_seed = bench_flags.seed;
      options.jobs = single_measurement ? 1 : jobs;
      options.reference = dsb::ReferenceMode::best_found;

      dsb::Solver solver = dsb::default_solver;
      if (solver_kind == "stub") {
        solver = [](const dsb::IsingModel& m, const dsb::SbmParams& p) {
          dsb::SolveOutcome o;
          o.best_spins = dsb::SpinConfig(m.size(), 1);
          o.best_energy = dsb::energy(m, o.best_spins);
          o.replica_energies.assign(p.n_replicas, o.best_energy);
          o.t_total = 1e-6;
          o.t_compute = 1e-6;
          o.workers_used = 1;
          o.params_used = p;
          return o;
        };
      }

      std::map<std::size_t, std::vector<dsb::BenchInstance>> by_size;
      for (const auto& path : list_instances(bench_dir)) {
        auto model = dsb::load_instance(path.string());
        if (!model.metadata().ground_energy) {
          if (reference == "metadata") {
            throw std::invalid_argument(path.string() + " has no E0 header; run 'dsb oracle' first");
          }
          if (model.size() <= dsb::kOracleMaxSpins) {
            auto meta = model.metadata();
            meta.ground_energy = dsb::brute_force_ground_state(model).energy;
            model = model.with_metadata(meta);
          }
        }
        manifest.inputs.push_back(path.string());
        by_size[model.size()].push_back({path.stem().string(), std::move(model)});
      }

      const fs::path dir = fresh_subdirectory(bench_out, "bench");
      std::vector<dsb::TTEpsilonRecord> records;
      std::vector<dsb::MedianPoint> points;
      for (const auto& [n, instances] : by_size) {
        auto study = dsb::grid_study(instances, {grid_steps, grid_replicas}, base, epsilons,
                                     options, solver);
        records.insert(records.end(), study.records.begin(), study.records.end());
        points.insert(points.end(), study.points.begin(), study.points.end());
        std::cerr << "N=" << n << ": " << instances.size() << " instances done\n";
      }
      {
        std::ofstream csv(dir / "records.csv");
        dsb::write_records_csv(records, csv);
        std::ofstream summary(dir / "summary.csv");
        dsb::write_points_csv(points, label, summary);
      }
      write_json_file(dir / "results.json", dsb::study_json(records, points));
      manifest.command = "bench";
      manifest.master_seed = bench_flags.seed;
      manifest.parameters = {{"eps", epsilons},
                             {"runs", runs},
                             {"grid_steps", grid_steps},
                             {"grid_replicas", grid_replicas},
                             {"timing", timing},
                             {"bootstrap", bootstrap},
                             {"jobs", options.jobs},
                             {"reference", reference},
                             {"solver", solver_kind},
                             {"base", dsb::to_json(base)}};
      write_json_file(dir / "manifest.json", manifest.to_json());
      std::cout << dsb::json({{"out", dir.string()}, {"points", points.size()}}).dump() << '\n';
      return 0;
    }

    if (fit->parsed()) {
      dsb::ImportOptions import;
      if (!fit_timing.empty()) {
        import.median_column = "median_" + fit_timing;
        import.std_column = "std_" + fit_timing;
      }
      const auto table = dsb::import_external_medians(fit_csv, import);
      const auto range = parse_range(range_text);
      std::vector<std::string> solvers;
      for (const auto& row : table)
        if (std::find(solvers.begin(), solvers.end(), row.solver) == solvers.end())
          solvers.push_back(row.solver);
      if (!fit_solver.empty()) solvers = {fit_solver};

      dsb::json fits = dsb::json::array();
      for (const auto& solver : solvers) {
        std::vector<double> eps = percent_to_fraction(fit_eps);
        if (eps.empty()) {
          for (const auto& row : table) {
            if (row.solver != solver) continue;
            const bool known = std::any_of(eps.begin(), eps.end(), [&](double e) {
              return dsb::same_epsilon(e, row.epsilon);
            });
            if (!known) eps.push_back(row.epsilon);
          }
          std::sort(eps.begin(), eps.end());
        }
        const auto results = dsb::alpha_vs_epsilon(table, solver, eps, range, {weighted});
        for (const auto& r : results) {
          const auto points = dsb::select_points(table, solver, r.epsilon);
          dsb::json entry = {{"solver", solver}, {"eps", r.epsilon}, {"fit", dsb::to_json(r.fit)}};
          entry["fit"]["alpha_std_bootstrap"] =
              dsb::propagated_alpha_std(points, range, 1000, dsb::fnv1a64(solver));
          fits.push_back(entry);
          if (!curve_dir.empty()) {
            fs::create_directories(curve_dir);
            std::ofstream curve(fs::path(curve_dir) /
                                (solver + "_eps" + dsb::format_real(r.epsilon * 100.0) + ".csv"));
            dsb::write_fit_curve_csv(points, r.fit, curve);
          }
        }
      }
      manifest.command = "fit";
      manifest.inputs.push_back(fit_csv);
      manifest.parameters = {{"range", {range.min, dsb::real_or_null(range.max)}},
                             {"weighted", weighted},
                             {"timing", fit_timing}};
      dsb::json out = {{"schema_version", dsb::kSchemaVersion},
                       {"fits", fits},
                       {"manifest", manifest.to_json()}};
      std::cout << out.dump(2) << '\n';
      return 0;
    }

    if (conv->parsed()) {
      const auto model = dsb::load_instance(conv_in, {conv_one_based});
      dsb::save_instance(model, conv_out);
      return 0;
    }

    if (rep->parsed()) {
      std::ifstream in(manifest_path);
      if (!in) throw std::runtime_error("cannot open manifest " + manifest_path);
      const auto j = dsb::json::parse(in);
      const auto recorded = j.at("argv").get<std::vector<std::string>>();
      if (!recorded.empty() && recorded.front() == "replay") {
        throw std::invalid_argument("refusing to replay a replay");
      }
      return run_cli(recorded);
    }
  } catch (const std::exception& e) {
    std::cerr << "dsb: error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args);
}
