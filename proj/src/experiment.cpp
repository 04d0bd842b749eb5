#include "zico/experiment.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include "zico/error.hpp"
#include "zico/io.hpp"

namespace zico {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ (stream * 0xd1b54a32d192ed03ULL));
}

enum : std::uint64_t { kGraphStream = 1, kParamStream, kMaskStream, kSampleStream, kDropoutStream };

template <typename T>
std::vector<T> or_default(const std::vector<T>& axis, T fallback) {
  return axis.empty() ? std::vector<T>{fallback} : axis;
}

std::string rho_text(const std::optional<double>& rho) {
  return rho ? io::format_double(*rho) : std::string("NA");
}

}  // namespace

std::string_view graph_model_name(GraphModel g) { return g == GraphModel::kBa ? "ba" : "er"; }

GraphModel parse_graph_model(std::string_view name) {
  if (name == "er") return GraphModel::kEr;
  if (name == "ba") return GraphModel::kBa;
  throw ParameterError("unknown graph model '" + std::string(name) + "'");
}

Replicate simulate_replicate(const DataSpec& spec, std::uint64_t seed) {
  Replicate rep;
  rep.seed = seed;
  rep.graph = spec.graph == GraphModel::kEr ? generate_er(spec.d, spec.er_p, sub_seed(seed, kGraphStream))
                                            : generate_ba(spec.d, spec.ba_m, sub_seed(seed, kGraphStream));
  if (spec.rho) {
    rep.masks = split_support(rep.graph, *spec.rho, sub_seed(seed, kMaskStream));
    rep.sim = sample_params(rep.graph, *rep.masks, spec.sim, sub_seed(seed, kParamStream));
  } else {
    rep.sim = sample_params(rep.graph, spec.sim, sub_seed(seed, kParamStream));
  }
  rep.data = logic_sample(rep.sim, spec.n, sub_seed(seed, kSampleStream), &rep.report);
  if (spec.dropout) {
    rep.dropout_data = apply_dropout(
        rep.data, DropoutConfig{spec.dropout_slope, spec.dropout_percentile, sub_seed(seed, kDropoutStream)});
  }
  return rep;
}

EvalReport evaluate_fit(const FitResult& fit, const Digraph& truth, double threshold) {
  const Matrix& w0 = fit.params.w0;
  const Matrix& w1 = fit.params.w1;
  const Digraph pred = has_zero_component(fit.family) ? binarize_union(w0, w1, threshold)
                                                      : binarize(w1, threshold);
  return evaluate(pred, combine_scores(w0, w1), truth);
}

std::vector<GridCell> expand_grid(const GridSpec& grid) {
  const auto lambda_groups = or_default(grid.lambda_groups, grid.base.lambda_group);
  const auto lambda_aligns = or_default(grid.lambda_aligns, grid.base.lambda_align);
  const auto align_norms = or_default(grid.align_norms, grid.base.align_norm);
  const auto modes = or_default(grid.modes, grid.base.acyclicity_mode);
  const auto rhos = or_default(grid.rhos, std::optional<double>{});
  std::vector<GridCell> cells;
  for (GraphModel g : grid.graphs)
    for (SignConfig s : grid.signs)
      for (const auto& rho : rhos)
        for (Family f : grid.families)
          for (double lg : lambda_groups)
            for (double la : lambda_aligns)
              for (AlignNorm an : align_norms)
                for (AcyclicityMode mode : modes) {
                  GridCell c;
                  c.config_id = cells.size();
                  c.graph = g;
                  c.sign = s;
                  c.rho = rho;
                  c.family = f;
                  c.cfg = grid.base;
                  c.cfg.lambda_group = lg;
                  c.cfg.lambda_align = la;
                  c.cfg.align_norm = an;
                  c.cfg.acyclicity_mode = mode;
                  cells.push_back(c);
                }
  return cells;
}

GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec grid;
  try {
    auto strings = [&j](const char* key) {
      std::vector<std::string> out;
      if (!j.contains(key)) return out;
      if (j.at(key).is_array())
        out = j.at(key).get<std::vector<std::string>>();
      else
        out.push_back(j.at(key).get<std::string>());
      return out;
    };
    if (j.contains("graphs")) {
      grid.graphs.clear();
      for (const auto& s : strings("graphs")) grid.graphs.push_back(parse_graph_model(s));
    }
    if (j.contains("signs")) {
      grid.signs.clear();
      for (const auto& s : strings("signs")) grid.signs.push_back(parse_sign_config(s));
    }
    if (j.contains("families")) {
      grid.families.clear();
      for (const auto& s : strings("families")) grid.families.push_back(parse_family(s));
    }
    for (const auto& s : strings("align_norms")) grid.align_norms.push_back(parse_align_norm(s));
    for (const auto& s : strings("modes")) grid.modes.push_back(parse_acyclicity_mode(s));
    if (j.contains("rhos")) {
      grid.rhos.clear();
      for (const auto& v : j.at("rhos")) {
        if (v.is_null())
          grid.rhos.emplace_back(std::nullopt);
        else
          grid.rhos.emplace_back(v.get<double>());
      }
    }
    if (j.contains("lambda_groups")) grid.lambda_groups = j.at("lambda_groups").get<std::vector<double>>();
    if (j.contains("lambda_aligns")) grid.lambda_aligns = j.at("lambda_aligns").get<std::vector<double>>();
    if (j.contains("d")) grid.data.d = j.at("d").get<std::size_t>();
    if (j.contains("n")) grid.data.n = j.at("n").get<std::size_t>();
    if (j.contains("p")) grid.data.er_p = j.at("p").get<double>();
    if (j.contains("m")) grid.data.ba_m = j.at("m").get<std::size_t>();
    if (j.contains("sim_family")) grid.data.sim.family = parse_family(j.at("sim_family").get<std::string>());
    if (j.contains("dropout")) grid.data.dropout = j.at("dropout").get<bool>();
    if (j.contains("dropout_alpha")) grid.data.dropout_slope = j.at("dropout_alpha").get<double>();
    if (j.contains("dropout_q")) grid.data.dropout_percentile = j.at("dropout_q").get<double>();
    if (j.contains("reps")) grid.replicates = j.at("reps").get<std::size_t>();
    if (j.contains("seed")) grid.seed_base = j.at("seed").get<std::uint64_t>();
    if (j.contains("jobs")) grid.jobs = j.at("jobs").get<std::size_t>();
    if (j.contains("record_timing")) grid.record_timing = j.at("record_timing").get<bool>();
    if (j.contains("train")) io::merge_config_json(j.at("train"), grid.base);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("grid json: ") + e.what());
  }
  if (grid.replicates < 1) throw ParameterError("grid: reps must be >= 1");
  return grid;
}

std::vector<ResultRow> run_grid(const GridSpec& grid, const std::function<void(const ResultRow&)>& on_row) {
  const std::vector<GridCell> cells = expand_grid(grid);
  const std::size_t total = cells.size() * grid.replicates;
  std::vector<ResultRow> rows(total);
  std::atomic<std::size_t> next{0};
  std::mutex report_mutex;

  auto worker = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      const GridCell& cell = cells[task / grid.replicates];
      const std::size_t rep = task % grid.replicates;
      ResultRow& row = rows[task];
      row.config_id = cell.config_id;
      row.replicate = rep;
      row.cell = cell;
      try {
        DataSpec spec = grid.data;
        spec.graph = cell.graph;
        spec.rho = cell.rho;
        spec.sim.sign = cell.sign;
        spec.sim.ranges.reset();
        const std::uint64_t seed = grid.seed_base + rep;
        const Replicate data = simulate_replicate(spec, seed);
        TrainConfig cfg = cell.cfg;
        cfg.seed = seed;
        const auto started = std::chrono::steady_clock::now();
        const FitResult fit = zico::fit(data.training_data(), cell.family, cfg);
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        row.eval = evaluate_fit(fit, data.graph.digraph(), cfg.threshold);
      } catch (const std::exception& e) {
        row.status = e.what();
      }
      if (on_row) {
        std::lock_guard<std::mutex> lock(report_mutex);
        on_row(row);
      }
    }
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min(grid.jobs, total));
  std::vector<std::thread> threads;
  for (std::size_t t = 1; t < jobs; ++t) threads.emplace_back(worker);
  worker();
  for (auto& t : threads) t.join();
  return rows;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool record_timing) {
  out << "config_id,replicate,graph,family,sign,lambda_group,lambda_align,align_norm,rho,tpr,fdr,shd,"
         "auprc,auprc_ratio,seconds,acyclicity,status\n";
  for (const ResultRow& r : rows) {
    const GridCell& c = r.cell;
    const bool ok = r.status == "ok";
    auto metric = [ok](double v) { return ok ? io::format_double(v) : std::string("NA"); };
    std::string status = r.status;
    for (char& ch : status)
      if (ch == ',' || ch == '\n') ch = ';';
    out << r.config_id << ',' << r.replicate << ',' << graph_model_name(c.graph) << ','
        << family_name(c.family) << ',' << sign_config_name(c.sign) << ','
        << io::format_double(c.cfg.lambda_group) << ',' << io::format_double(c.cfg.lambda_align) << ','
        << align_norm_name(c.cfg.align_norm) << ',' << rho_text(c.rho) << ',' << metric(r.eval.tpr) << ','
        << metric(r.eval.fdr) << ',' << (ok ? std::to_string(r.eval.shd) : std::string("NA")) << ','
        << metric(r.eval.auprc) << ',' << metric(r.eval.auprc_ratio) << ','
        << (record_timing ? io::format_double(r.seconds) : std::string("NA")) << ','
        << acyclicity_mode_name(c.cfg.acyclicity_mode) << ',' << status << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<ResultRow>& rows, bool record_timing) {
  struct Acc {
    const GridCell* cell = nullptr;
    std::size_t ok = 0;
    std::size_t failed = 0;
    std::vector<std::vector<double>> values{6};
  };
  std::map<std::size_t, Acc> groups;
  for (const ResultRow& r : rows) {
    Acc& a = groups[r.config_id];
    a.cell = &r.cell;
    if (r.status != "ok") {
      ++a.failed;
      continue;
    }
    ++a.ok;
    const double v[6] = {r.eval.tpr, r.eval.fdr, static_cast<double>(r.eval.shd), r.eval.auprc,
                         r.eval.auprc_ratio, r.seconds};
    for (int k = 0; k < 6; ++k) a.values[k].push_back(v[k]);
  }
  static const char* kNames[6] = {"tpr", "fdr", "shd", "auprc", "auprc_ratio", "seconds"};
  out << "config_id,graph,family,sign,lambda_group,lambda_align,align_norm,rho,acyclicity,n_ok,n_failed";
  for (const char* name : kNames) out << ',' << name << "_mean," << name << "_sd";
  out << '\n';
  for (const auto& [id, a] : groups) {
    const GridCell& c = *a.cell;
    out << id << ',' << graph_model_name(c.graph) << ',' << family_name(c.family) << ','
        << sign_config_name(c.sign) << ',' << io::format_double(c.cfg.lambda_group) << ','
        << io::format_double(c.cfg.lambda_align) << ',' << align_norm_name(c.cfg.align_norm) << ','
        << rho_text(c.rho) << ',' << acyclicity_mode_name(c.cfg.acyclicity_mode) << ',' << a.ok << ','
        << a.failed;
    for (int k = 0; k < 6; ++k) {
      const auto& v = a.values[k];
      if (v.empty() || (k == 5 && !record_timing)) {
        out << ",NA,NA";
        continue;
      }
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= static_cast<double>(v.size());
      double var = 0.0;
      for (double x : v) var += (x - mean) * (x - mean);
      const double sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
      out << ',' << io::format_double(mean) << ',' << io::format_double(sd);
    }
    out << '\n';
  }
}

}  // namespace zico
