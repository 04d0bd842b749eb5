// zico: simulate zero-inflated count data, fit DAGs, evaluate, run grids.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "zico/error.hpp"
#include "zico/experiment.hpp"
#include "zico/io.hpp"
#include "zico/metrics.hpp"
#include "zico/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

fs::path default_out_root() {
  if (const char* env = std::getenv("ZICO_OUT")) return env;
  return "zico_out";
}

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  try {
    return json::parse(zico::io::read_file(path));
  } catch (const json::parse_error& e) {
    throw zico::IoError(path + ": " + e.what());
  }
}

template <class T>
void take(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = j.at(key).get<T>();
}

struct SimulateOpts {
  std::string config;
  std::string out;
  std::string graph = "er";
  std::size_t d = 20;
  std::size_t n = 500;
  double p = 0.25;
  std::size_t m = 3;
  std::string sign = "+-";
  std::string family = "zinb";
  double rho = -1.0;
  bool dropout = false;
  double alpha = 1.0;
  double q = 65.0;
  std::size_t reps = 10;
  std::uint64_t seed = 1;
};

struct FitOpts {
  std::string config;
  std::string data;
  std::string out;
  std::string family = "zinb";
  zico::TrainConfig cfg;
  std::string align;
  std::string mode;
};

struct EvalOpts {
  std::string fit_dir;
  std::string truth;
  std::string out;
  double threshold = 0.3;
};

struct BenchmarkOpts {
  std::string config;
  std::string out;
  std::size_t jobs = 0;
  std::size_t reps = 0;
  bool no_timing = false;
};

void apply_sim_config(const json& j, SimulateOpts& o) {
  take(j, "graph", o.graph);
  take(j, "d", o.d);
  take(j, "n", o.n);
  take(j, "p", o.p);
  take(j, "m", o.m);
  take(j, "sign", o.sign);
  take(j, "family", o.family);
  take(j, "rho", o.rho);
  take(j, "dropout", o.dropout);
  take(j, "dropout_alpha", o.alpha);
  take(j, "dropout_q", o.q);
  take(j, "reps", o.reps);
  take(j, "seed", o.seed);
}

int run_simulate(const SimulateOpts& o) {
  if (o.reps < 1) throw zico::ParameterError("--reps must be >= 1");
  zico::DataSpec spec;
  spec.graph = zico::parse_graph_model(o.graph);
  spec.d = o.d;
  spec.n = o.n;
  spec.er_p = o.p;
  spec.ba_m = o.m;
  spec.sim.sign = zico::parse_sign_config(o.sign);
  spec.sim.family = zico::parse_family(o.family);
  if (o.rho >= 0.0) spec.rho = o.rho;
  spec.dropout = o.dropout;
  spec.dropout_slope = o.alpha;
  spec.dropout_percentile = o.q;
  const fs::path root = o.out.empty() ? default_out_root() : fs::path(o.out);

  for (std::size_t r = 0; r < o.reps; ++r) {
    const std::uint64_t seed = o.seed + r;
    const zico::Replicate rep = zico::simulate_replicate(spec, seed);
    const fs::path dir = root / ("rep" + std::to_string(r));
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw zico::IoError(dir.string() + ": " + ec.message());

    std::ostringstream s;
    zico::io::write_dataset_csv(s, rep.data);
    zico::io::write_file_atomic(dir / "data.csv", s.str());
    if (rep.dropout_data) {
      s.str("");
      zico::io::write_dataset_csv(s, *rep.dropout_data);
      zico::io::write_file_atomic(dir / "data_dropout.csv", s.str());
    }
    s.str("");
    zico::io::write_matrix_csv(s, rep.sim.true_w0);
    zico::io::write_file_atomic(dir / "truth_w0.csv", s.str());
    s.str("");
    zico::io::write_matrix_csv(s, rep.sim.true_w1);
    zico::io::write_file_atomic(dir / "truth_w1.csv", s.str());
    s.str("");
    zico::write_edge_list(s, rep.graph);
    zico::io::write_file_atomic(dir / "graph.edges", s.str());

    json sim = zico::io::sim_to_json(rep.sim, spec.n, seed);
    sim["graph_model"] = std::string(zico::graph_model_name(spec.graph));
    if (spec.rho) sim["rho"] = *spec.rho;
    sim["clamped_predictors"] = rep.report.clamped_predictors;
    if (spec.dropout) sim["dropout"] = {{"alpha", spec.dropout_slope}, {"q", spec.dropout_percentile}};
    zico::io::write_file_atomic(dir / "sim.json", sim.dump(2) + "\n");
  }
  std::cout << "wrote " << o.reps << " replicate(s) to " << root.string() << "\n";
  return kExitOk;
}

int run_fit(const FitOpts& o) {
  zico::TrainConfig cfg = o.cfg;
  if (!o.align.empty()) cfg.align_norm = zico::parse_align_norm(o.align);
  if (!o.mode.empty()) cfg.acyclicity_mode = zico::parse_acyclicity_mode(o.mode);
  cfg.validate();

  const zico::Family family = zico::parse_family(o.family);
  const zico::Dataset x = zico::io::load_dataset(o.data);
  const fs::path dir = o.out.empty() ? default_out_root() / "fit" : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw zico::IoError(dir.string() + ": " + ec.message());

  const zico::FitResult r = zico::fit_noexcept(x, family, cfg);
  zico::io::write_fit_result(dir, r);

  double nll = 0.0, h0 = 0.0, h1 = 0.0;
  if (!r.trace.empty()) {
    nll = r.trace.back().nll;
    h0 = r.trace.back().h0;
    h1 = r.trace.back().h1;
  }
  std::cout << "nll=" << zico::io::format_double(nll) << " h0=" << zico::io::format_double(h0)
            << " h1=" << zico::io::format_double(h1) << " seconds=" << r.elapsed_seconds << "\n";
  if (r.aborted) {
    std::cerr << "zico: training aborted: " << r.abort_reason << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}

int run_eval(const EvalOpts& o) {
  const fs::path fit_dir = o.fit_dir;
  const zico::Matrix w1 = zico::io::load_matrix(fit_dir / "w1.csv");
  zico::Matrix w0(w1.rows(), w1.cols());
  if (fs::exists(fit_dir / "w0.csv")) w0 = zico::io::load_matrix(fit_dir / "w0.csv");
  if (w0.rows() != w1.rows() || w0.cols() != w1.cols())
    throw zico::IoError("w0.csv and w1.csv have different shapes");

  const zico::DagGraph truth = zico::io::load_edge_list(o.truth);
  if (truth.node_count() != w1.rows())
    throw zico::IoError("truth graph has " + std::to_string(truth.node_count()) + " nodes, fit has " +
                        std::to_string(w1.rows()));

  const zico::Digraph pred = zico::binarize_union(w0, w1, o.threshold);
  const zico::EvalReport rep = zico::evaluate(pred, zico::combine_scores(w0, w1), truth.digraph());

  std::ostringstream s;
  zico::write_eval_csv(s, rep);
  const fs::path out = o.out.empty() ? fit_dir / "eval.csv" : fs::path(o.out);
  zico::io::write_file_atomic(out, s.str());
  std::cout << s.str();
  return kExitOk;
}

int run_benchmark(const BenchmarkOpts& o) {
  if (o.config.empty()) throw zico::ParameterError("benchmark needs --config");
  zico::GridSpec grid = zico::grid_from_json(load_config(o.config));
  if (o.jobs > 0) grid.jobs = o.jobs;
  if (o.reps > 0) grid.replicates = o.reps;
  if (o.no_timing) grid.record_timing = false;

  const fs::path dir = o.out.empty() ? default_out_root() / "benchmark" : fs::path(o.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw zico::IoError(dir.string() + ": " + ec.message());

  const auto rows = zico::run_grid(grid, [](const zico::ResultRow& row) {
    std::cerr << "config " << row.config_id << " rep " << row.replicate << ": " << row.status
              << " auprc=" << row.eval.auprc << "\n";
  });

  std::ostringstream s;
  zico::write_results_csv(s, rows, grid.record_timing);
  zico::io::write_file_atomic(dir / "results.csv", s.str());
  s.str("");
  zico::write_summary_csv(s, rows, grid.record_timing);
  zico::io::write_file_atomic(dir / "summary.csv", s.str());
  std::cout << "wrote " << rows.size() << " rows to " << (dir / "results.csv").string() << "\n";
  return kExitOk;
}

// The config file is applied before flag parsing so that explicit flags win.
std::string find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--config" && i + 1 < argc) return argv[i + 1];
    if (a.rfind("--config=", 0) == 0) return a.substr(9);
  }
  return {};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Learn DAGs from zero-inflated count data"};
  app.require_subcommand(1);

  SimulateOpts sim;
  auto* sim_cmd = app.add_subcommand("simulate", "simulate replicate datasets");
  sim_cmd->add_option("--config", sim.config, "JSON file; flags override");
  sim_cmd->add_option("-o,--out", sim.out, "output root (default $ZICO_OUT or ./zico_out)");
  sim_cmd->add_option("--graph", sim.graph, "er or ba")->capture_default_str();
  sim_cmd->add_option("--d", sim.d, "nodes")->capture_default_str();
  sim_cmd->add_option("--n", sim.n, "samples")->capture_default_str();
  sim_cmd->add_option("--p", sim.p, "ER edge probability")->capture_default_str();
  sim_cmd->add_option("--m", sim.m, "BA edges per new node")->capture_default_str();
  sim_cmd->add_option("--sign", sim.sign, "W0/W1 signs: ++ -- +- -+")->capture_default_str();
  sim_cmd->add_option("--family", sim.family, "zinb or zip")->capture_default_str();
  sim_cmd->add_option("--rho", sim.rho, "W0/W1 support overlap in [0,1]; unset shares supports");
  sim_cmd->add_flag("--dropout", sim.dropout, "also write data_dropout.csv");
  sim_cmd->add_option("--alpha", sim.alpha, "dropout slope")->capture_default_str();
  sim_cmd->add_option("--q", sim.q, "dropout percentile")->capture_default_str();
  sim_cmd->add_option("--reps", sim.reps, "replicates")->capture_default_str();
  sim_cmd->add_option("--seed", sim.seed, "seed of replicate 0")->capture_default_str();

  FitOpts fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a DAG to a counts CSV");
  fit_cmd->add_option("--config", fit.config, "JSON file; flags override");
  fit_cmd->add_option("--data", fit.data, "counts CSV with header")->required();
  fit_cmd->add_option("-o,--out", fit.out, "output directory");
  fit_cmd->add_option("--family", fit.family, "zinb, zip, nb or poisson")->capture_default_str();
  fit_cmd->add_option("--epochs", fit.cfg.epochs)->capture_default_str();
  fit_cmd->add_option("--mu0", fit.cfg.mu0)->capture_default_str();
  fit_cmd->add_option("--alpha", fit.cfg.alpha, "central-path decay")->capture_default_str();
  fit_cmd->add_option("--decay-interval", fit.cfg.decay_interval, "0 = epochs/4");
  fit_cmd->add_option("--lambda-group", fit.cfg.lambda_group)->capture_default_str();
  fit_cmd->add_option("--warm", fit.cfg.warm, "0 = epochs/10");
  fit_cmd->add_option("--lambda-align", fit.cfg.lambda_align)->capture_default_str();
  fit_cmd->add_option("--align", fit.align, "frobenius, l1 or none");
  fit_cmd->add_option("--mode", fit.mode, "separate or coupled");
  fit_cmd->add_option("--s", fit.cfg.s)->capture_default_str();
  fit_cmd->add_option("--batch-size", fit.cfg.batch_size)->capture_default_str();
  fit_cmd->add_option("--lr", fit.cfg.learning_rate)->capture_default_str();
  fit_cmd->add_option("--weight-decay", fit.cfg.weight_decay)->capture_default_str();
  fit_cmd->add_option("--clip-norm", fit.cfg.clip_norm)->capture_default_str();
  fit_cmd->add_option("--threshold", fit.cfg.threshold)->capture_default_str();
  fit_cmd->add_option("--seed", fit.cfg.seed)->capture_default_str();

  EvalOpts ev;
  auto* eval_cmd = app.add_subcommand("eval", "score a fit against the true graph");
  eval_cmd->add_option("--fit", ev.fit_dir, "directory holding w0.csv/w1.csv")->required();
  eval_cmd->add_option("--truth", ev.truth, "graph.edges of the generating DAG")->required();
  eval_cmd->add_option("-o,--out", ev.out, "output CSV (default <fit>/eval.csv)");
  eval_cmd->add_option("--threshold", ev.threshold)->capture_default_str();

  BenchmarkOpts bench;
  auto* bench_cmd = app.add_subcommand("benchmark", "simulate, fit and evaluate over a grid");
  bench_cmd->add_option("--config", bench.config, "grid JSON")->required();
  bench_cmd->add_option("-o,--out", bench.out, "output directory");
  bench_cmd->add_option("--jobs", bench.jobs, "concurrent fits (default from grid)");
  bench_cmd->add_option("--reps", bench.reps, "replicates (default from grid)");
  bench_cmd->add_flag("--no-timing", bench.no_timing, "write NA for seconds");

  try {
    const std::string cmd = argc > 1 ? argv[1] : "";
    const std::string config = find_config(argc, argv);
    if (!config.empty() && cmd != "benchmark") {
      const json j = load_config(config);
      if (cmd == "simulate") apply_sim_config(j, sim);
      if (cmd == "fit") {
        zico::io::merge_config_json(j.contains("train") ? j.at("train") : j, fit.cfg);
        take(j, "family", fit.family);
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "zico: " << e.what() << "\n";
    return kExitIo;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*sim_cmd) return run_simulate(sim);
    if (*fit_cmd) return run_fit(fit);
    if (*eval_cmd) return run_eval(ev);
    if (*bench_cmd) return run_benchmark(bench);
  } catch (const zico::ParameterError& e) {
    std::cerr << "zico: " << e.what() << "\n";
    return kExitUsage;
  } catch (const zico::IoError& e) {
    std::cerr << "zico: " << e.what() << "\n";
    return kExitIo;
  } catch (const zico::DataError& e) {
    std::cerr << "zico: " << e.what() << "\n";
    return kExitIo;
  } catch (const zico::NumericalError& e) {
    std::cerr << "zico: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const zico::DomainError& e) {
    std::cerr << "zico: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const json::exception& e) {
    std::cerr << "zico: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}
