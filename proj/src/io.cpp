#include "zico/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "zico/error.hpp"

namespace zico::io {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_number(const std::string& field) {
  double v = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  while (begin < end && *begin == ' ') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw IoError("csv: cannot parse number '" + field + "'");
  return v;
}

nlohmann::json matrix_to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
  const std::size_t rows = j.size();
  const std::size_t cols = rows > 0 ? j.at(0).size() : 0;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (j.at(r).size() != cols) throw IoError("json: ragged matrix");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j.at(r).at(c).get<double>();
  }
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_dataset_csv(std::ostream& out, const Dataset& x) {
  for (std::size_t j = 0; j < x.d(); ++j) {
    if (j) out << ',';
    if (x.names().empty())
      out << 'X' << j;
    else
      out << x.names()[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < x.n(); ++i) {
    for (std::size_t j = 0; j < x.d(); ++j) {
      if (j) out << ',';
      out << static_cast<long long>(x(i, j));
    }
    out << '\n';
  }
}

Dataset read_dataset_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("csv: empty file");
  std::vector<std::string> names = split_csv_line(line);
  const std::size_t d = names.size();
  std::vector<double> values;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (fields.size() != d) throw IoError("csv: row " + std::to_string(n + 1) + " has the wrong width");
    for (const auto& f : fields) values.push_back(parse_number(f));
    ++n;
  }
  Matrix x(n, d);
  std::copy(values.begin(), values.end(), x.data());
  return Dataset(std::move(x), std::move(names));
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  std::string line;
  std::vector<double> values;
  std::size_t rows = 0;
  std::size_t cols = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    const auto fields = split_csv_line(line);
    if (rows == 0) cols = fields.size();
    if (fields.size() != cols) throw IoError("csv: ragged matrix");
    for (const auto& f : fields) values.push_back(parse_number(f));
    ++rows;
  }
  Matrix m(rows, cols);
  std::copy(values.begin(), values.end(), m.data());
  return m;
}

nlohmann::json params_to_json(const ModelParams& p) {
  return {
      {"family", std::string(family_name(p.family))},
      {"w0", matrix_to_json(p.w0)},
      {"w1", matrix_to_json(p.w1)},
      {"gamma", p.gamma},
      {"delta", p.delta},
      {"r_raw", p.r_raw},
  };
}

ModelParams params_from_json(const nlohmann::json& j) {
  ModelParams p;
  try {
    p.family = parse_family(j.at("family").get<std::string>());
    p.w0 = matrix_from_json(j.at("w0"));
    p.w1 = matrix_from_json(j.at("w1"));
    p.gamma = j.at("gamma").get<std::vector<double>>();
    p.delta = j.at("delta").get<std::vector<double>>();
    p.r_raw = j.at("r_raw").get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("params json: ") + e.what());
  }
  p.validate();
  return p;
}

nlohmann::json config_to_json(const TrainConfig& cfg) {
  return {
      {"epochs", cfg.epochs},
      {"mu0", cfg.mu0},
      {"alpha", cfg.alpha},
      {"decay_interval", cfg.effective_decay_interval()},
      {"lambda_group", cfg.lambda_group},
      {"warm", cfg.effective_warm()},
      {"lambda_align", cfg.lambda_align},
      {"align_norm", std::string(align_norm_name(cfg.align_norm))},
      {"acyclicity_mode", std::string(acyclicity_mode_name(cfg.acyclicity_mode))},
      {"s", cfg.s},
      {"epsilon", cfg.epsilon},
      {"batch_size", cfg.batch_size},
      {"learning_rate", cfg.learning_rate},
      {"beta1", cfg.beta1},
      {"beta2", cfg.beta2},
      {"adam_eps", cfg.adam_eps},
      {"weight_decay", cfg.weight_decay},
      {"clip_norm", cfg.clip_norm},
      {"threshold", cfg.threshold},
      {"seed", cfg.seed},
  };
}

void merge_config_json(const nlohmann::json& j, TrainConfig& cfg) {
  try {
    auto take = [&j](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    take("epochs", cfg.epochs);
    take("mu0", cfg.mu0);
    take("alpha", cfg.alpha);
    take("decay_interval", cfg.decay_interval);
    take("lambda_group", cfg.lambda_group);
    take("warm", cfg.warm);
    take("lambda_align", cfg.lambda_align);
    take("s", cfg.s);
    take("epsilon", cfg.epsilon);
    take("batch_size", cfg.batch_size);
    take("learning_rate", cfg.learning_rate);
    take("beta1", cfg.beta1);
    take("beta2", cfg.beta2);
    take("adam_eps", cfg.adam_eps);
    take("weight_decay", cfg.weight_decay);
    take("clip_norm", cfg.clip_norm);
    take("threshold", cfg.threshold);
    take("seed", cfg.seed);
    if (j.contains("align_norm")) cfg.align_norm = parse_align_norm(j.at("align_norm").get<std::string>());
    if (j.contains("acyclicity_mode"))
      cfg.acyclicity_mode = parse_acyclicity_mode(j.at("acyclicity_mode").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("config json: ") + e.what());
  }
}

nlohmann::json sim_to_json(const SimParams& sp, std::size_t n, std::uint64_t seed) {
  return {
      {"d", sp.graph.node_count()},
      {"n", n},
      {"seed", seed},
      {"edges", sp.graph.edge_count()},
      {"family", std::string(family_name(sp.family))},
      {"sign", std::string(sign_config_name(sp.sign))},
      {"w0_low", sp.ranges.w0_low},
      {"w0_high", sp.ranges.w0_high},
      {"w1_low", sp.ranges.w1_low},
      {"w1_high", sp.ranges.w1_high},
      {"gamma", sp.true_gamma},
      {"delta", sp.true_delta},
      {"r", sp.true_r},
  };
}

void write_trace_csv(std::ostream& out, const FitResult& r) {
  out << "epoch,objective,nll,h0,h1,mu,lambda_eff\n";
  for (const TraceRow& t : r.trace) {
    out << t.epoch << ',' << format_double(t.objective) << ',' << format_double(t.nll) << ','
        << format_double(t.h0) << ',' << format_double(t.h1) << ',' << format_double(t.mu) << ','
        << format_double(t.lambda_eff) << '\n';
  }
}

void write_fit_result(const std::filesystem::path& dir, const FitResult& r) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
  std::ostringstream w1;
  write_matrix_csv(w1, r.params.w1);
  write_file_atomic(dir / "w1.csv", w1.str());
  if (has_zero_component(r.family)) {
    std::ostringstream w0;
    write_matrix_csv(w0, r.params.w0);
    write_file_atomic(dir / "w0.csv", w0.str());
  }
  std::ostringstream trace;
  write_trace_csv(trace, r);
  write_file_atomic(dir / "trace.csv", trace.str());

  std::vector<double> dispersion;
  for (std::size_t j = 0; j < r.params.d(); ++j) dispersion.push_back(r.params.dispersion(j));
  nlohmann::json j = {
      {"family", std::string(family_name(r.family))},
      {"elapsed_seconds", r.elapsed_seconds},
      {"steps", r.steps},
      {"rejected_steps", r.rejected_steps},
      {"backtracks", r.backtracks},
      {"aborted", r.aborted},
      {"abort_reason", r.abort_reason},
      {"gamma", r.params.gamma},
      {"delta", r.params.delta},
      {"dispersion", dispersion},
      {"config", config_to_json(r.config)},
  };
  if (!r.trace.empty()) {
    const TraceRow& last = r.trace.back();
    j["final"] = {{"objective", last.objective}, {"nll", last.nll}, {"h0", last.h0}, {"h1", last.h1}};
  }
  write_file_atomic(dir / "fit.json", j.dump(2) + "\n");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out << contents;
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_dataset_csv(in);
}

Matrix load_matrix(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_matrix_csv(in);
}

DagGraph load_edge_list(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_edge_list(in);
}

}  // namespace zico::io
