// Benchmark CLI: scenario/method configs in, datasets and delimited result
// tables out.
//
//   playcs generate --config cfg.json --out DIR
//   playcs run      --config cfg.json --dataset DIR/dataset.pcsd --out DIR
//   playcs sweep    --config cfg.json --out DIR [--workers N]
//   playcs report   --series DIR/series.csv --out DIR
//
// Exit codes: 0 success, 2 config error, 3 I/O error, 4 numerical failure.
#include <CLI11.hpp>
#include <json.hpp>

#include <array>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "playcs/dataset_io.hpp"
#include "playcs/metrics.hpp"
#include "playcs/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace playcs;

namespace {

struct config_error : std::runtime_error {
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

struct SweepAxes {
  std::vector<double> snr_list;
  std::vector<int> m_list;
  int trials = 20;
};

struct RunConfig {
  ScenarioSpec scenario;
  std::vector<MethodConfig> methods;
  std::optional<SweepAxes> sweep;
  std::string out_dir = "results";
  uint64_t digest = 0;  // of the raw config file bytes
  std::string path;
};

bool g_verbose = false;

void describe(const RunConfig& cfg) {
  if (!g_verbose) return;
  std::fprintf(stderr, "config %s: scenario %s n=%d m=%d slots=%d sparsity=%d snr=%g seed=%llu, %zu methods\n",
               cfg.path.c_str(), to_string(cfg.scenario.kind), cfg.scenario.n, cfg.scenario.m,
               cfg.scenario.slots, cfg.scenario.sparsity, cfg.scenario.snr_db,
               static_cast<unsigned long long>(cfg.scenario.seed), cfg.methods.size());
}

void require_keys(const json& obj, const std::string& where,
                  const std::vector<std::string>& allowed) {
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw config_error(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
  if (const auto it = obj.find(key); it != obj.end()) out = it->get<T>();
}

ScenarioSpec parse_scenario(const json& obj) {
  require_keys(obj, "scenario",
               {"kind", "n", "m", "slots", "sparsity", "snr_db", "seed", "angle_walk_std",
                "gain_ar_coeff", "support_change_prob", "value_walk_std", "redraw_beamformer"});
  ScenarioSpec spec;
  if (const auto it = obj.find("kind"); it != obj.end()) {
    const auto kind = scenario_kind_from_string(it->get<std::string>());
    if (!kind) throw config_error("scenario.kind: unknown value '" + it->get<std::string>() + "'");
    spec.kind = *kind;
  }
  read_into(obj, "n", spec.n);
  read_into(obj, "m", spec.m);
  read_into(obj, "slots", spec.slots);
  read_into(obj, "sparsity", spec.sparsity);
  read_into(obj, "snr_db", spec.snr_db);
  read_into(obj, "seed", spec.seed);
  read_into(obj, "angle_walk_std", spec.angle_walk_std);
  read_into(obj, "gain_ar_coeff", spec.gain_ar_coeff);
  read_into(obj, "support_change_prob", spec.support_change_prob);
  read_into(obj, "value_walk_std", spec.value_walk_std);
  read_into(obj, "redraw_beamformer", spec.redraw_beamformer);
  validate(spec);
  return spec;
}

SolverOptions parse_solver(const json& obj) {
  require_keys(obj, "solver", {"max_iters", "rel_tol", "kkt_tol", "backtrack_factor"});
  SolverOptions opts;
  read_into(obj, "max_iters", opts.max_iters);
  read_into(obj, "rel_tol", opts.rel_tol);
  read_into(obj, "kkt_tol", opts.kkt_tol);
  read_into(obj, "backtrack_factor", opts.backtrack_factor);
  return opts;
}

MethodConfig parse_method(const json& obj) {
  require_keys(obj, "method",
               {"name", "kind", "gamma", "alpha", "alpha_mode", "lsm_a", "lsm_b", "lambda",
                "em_iters", "em_tol", "rwl1_epsilon", "sigma_f", "sigma_m", "solver"});
  if (!obj.contains("kind")) throw config_error("method: missing 'kind'");
  const std::string kind_str = obj.at("kind").get<std::string>();

  MethodConfig method;
  if (kind_str == "oracle") {
    method.label = "oracle";
  } else {
    const auto kind = tracker_kind_from_string(kind_str);
    if (!kind) throw config_error("method.kind: unknown value '" + kind_str + "'");
    method.kind = *kind;
    method.params.kind = *kind;
    method.label = kind_str;
  }
  read_into(obj, "name", method.label);

  auto& p = method.params;
  read_into(obj, "gamma", p.gamma);
  read_into(obj, "alpha", p.alpha);
  if (const auto it = obj.find("alpha_mode"); it != obj.end()) {
    const std::string mode = it->get<std::string>();
    if (mode == "absolute") {
      p.alpha_mode = ThresholdMode::Absolute;
    } else if (mode == "relative") {
      p.alpha_mode = ThresholdMode::Relative;
    } else {
      throw config_error("method.alpha_mode: expected 'absolute' or 'relative'");
    }
  }
  read_into(obj, "lsm_a", p.lsm.a);
  read_into(obj, "lsm_b", p.lsm.b);
  if (const auto it = obj.find("lambda"); it != obj.end()) p.lambda = it->get<double>();
  read_into(obj, "em_iters", p.em_iters);
  read_into(obj, "em_tol", p.em_tol);
  read_into(obj, "rwl1_epsilon", p.rwl1_epsilon);
  read_into(obj, "sigma_f", p.sigma_f);
  read_into(obj, "sigma_m", p.sigma_m);
  if (const auto it = obj.find("solver"); it != obj.end()) p.solver = parse_solver(*it);
  if (method.kind) validate(p);
  return method;
}

RunConfig parse_config(const std::string& path) {
  const std::string bytes = read_file(path);  // missing config file is an I/O failure
  json root;
  try {
    root = json::parse(bytes, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw config_error(std::string("config parse: ") + e.what());
  }

  require_keys(root, "config", {"scenario", "methods", "sweep", "output"});
  if (!root.contains("scenario")) throw config_error("config: missing 'scenario'");
  if (!root.contains("methods") || !root.at("methods").is_array() || root.at("methods").empty())
    throw config_error("config: 'methods' must be a nonempty array");

  RunConfig cfg;
  cfg.digest = fnv1a(bytes);
  cfg.path = path;
  try {
    cfg.scenario = parse_scenario(root.at("scenario"));
    for (const auto& entry : root.at("methods")) cfg.methods.push_back(parse_method(entry));
    if (const auto it = root.find("sweep"); it != root.end()) {
      require_keys(*it, "sweep", {"snr_list", "m_list", "trials"});
      SweepAxes axes;
      if (!it->contains("snr_list") || !it->contains("m_list"))
        throw config_error("sweep: needs snr_list and m_list");
      axes.snr_list = it->at("snr_list").get<std::vector<double>>();
      axes.m_list = it->at("m_list").get<std::vector<int>>();
      read_into(*it, "trials", axes.trials);
      if (axes.snr_list.empty() || axes.m_list.empty() || axes.trials < 1)
        throw config_error("sweep: axes must be nonempty and trials >= 1");
      cfg.sweep = std::move(axes);
    }
    if (const auto it = root.find("output"); it != root.end()) {
      require_keys(*it, "output", {"dir"});
      read_into(*it, "dir", cfg.out_dir);
    }
  } catch (const json::exception& e) {
    throw config_error(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw config_error(e.what());
  }
  return cfg;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string header_comment(uint64_t config_digest) {
  std::string out;
  out += std::string("# playcs ") + kVersion + "\n";
  out += "# config_digest " + digest_hex(config_digest) + "\n";
  return out;
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());
}

void write_summary(const std::string& path, uint64_t digest,
                   const std::vector<std::pair<std::string, std::pair<double, double>>>& rows) {
  std::string out = header_comment(digest);
  out += "method,tnmse,tcorr,tnmse_db\n";
  for (const auto& [method, vals] : rows) {
    const double tnmse_db = 10.0 * std::log10(vals.first);
    out += method + "," + fmt(vals.first) + "," + fmt(vals.second) + "," + fmt(tnmse_db) + "\n";
  }
  write_file(path, out);
}

int cmd_generate(const std::string& config_path, const std::string& out_dir,
                 std::optional<uint64_t> seed_override) {
  RunConfig cfg = parse_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed_override) cfg.scenario.seed = *seed_override;
  describe(cfg);
  ensure_dir(cfg.out_dir);
  const SequenceDataset dataset = generate(cfg.scenario);
  const std::string bytes = serialize_dataset(dataset);
  const std::string path = (fs::path(cfg.out_dir) / "dataset.pcsd").string();
  write_file(path, bytes);
  std::printf("dataset %s\n", path.c_str());
  std::printf("digest %s\n", digest_hex(fnv1a(bytes)).c_str());
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& dataset_path,
            const std::string& out_dir) {
  RunConfig cfg = parse_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  describe(cfg);
  const SequenceDataset dataset = load_dataset(dataset_path);
  if (dataset.spec.n != cfg.scenario.n || dataset.spec.m != cfg.scenario.m)
    throw config_error("dataset dimensions do not match the configured scenario");
  ensure_dir(cfg.out_dir);

  const auto series = run_experiment(dataset, cfg.methods);

  std::string series_out = header_comment(cfg.digest);
  series_out += "slot,method,nmse,corr\n";
  for (const auto& s : series)
    for (size_t t = 0; t < s.nmse.size(); ++t)
      series_out += std::to_string(t + 1) + "," + s.method + "," + fmt(s.nmse[t]) + "," +
                    fmt(s.corr[t]) + "\n";
  write_file((fs::path(cfg.out_dir) / "series.csv").string(), series_out);

  std::vector<std::pair<std::string, std::pair<double, double>>> rows;
  for (const auto& s : series) rows.push_back({s.method, {s.tnmse, s.tcorr}});
  write_summary((fs::path(cfg.out_dir) / "summary.csv").string(), cfg.digest, rows);
  std::printf("wrote %s and %s\n", (fs::path(cfg.out_dir) / "series.csv").c_str(),
              (fs::path(cfg.out_dir) / "summary.csv").c_str());
  return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& out_dir, int workers,
              std::optional<uint64_t> seed_override) {
  RunConfig cfg = parse_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (seed_override) cfg.scenario.seed = *seed_override;
  if (!cfg.sweep) throw config_error("config: sweep axes are required for 'sweep'");
  describe(cfg);
  ensure_dir(cfg.out_dir);

  const SweepResult result = run_sweep(cfg.scenario, cfg.sweep->snr_list, cfg.sweep->m_list,
                                       cfg.sweep->trials, cfg.methods, workers);

  std::string out = header_comment(cfg.digest);
  out += "snr_db,m,method,tnmse_mean,tnmse_stderr,tcorr_mean,tcorr_stderr,trials\n";
  for (const auto& c : result.cells)
    out += fmt(c.snr_db) + "," + std::to_string(c.m) + "," + c.method + "," + fmt(c.tnmse_mean) +
           "," + fmt(c.tnmse_stderr) + "," + fmt(c.tcorr_mean) + "," + fmt(c.tcorr_stderr) + "," +
           std::to_string(c.trials) + "\n";
  const std::string path = (fs::path(cfg.out_dir) / "sweep.csv").string();
  write_file(path, out);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

int cmd_report(const std::string& series_path, const std::string& out_dir) {
  const std::string bytes = read_file(series_path);
  std::istringstream in(bytes);
  std::string line;
  std::string digest_line = "0000000000000000";
  bool saw_header = false;
  // method -> (sum nmse, sum corr, count), in first-appearance order
  std::vector<std::string> order;
  std::map<std::string, std::array<double, 3>> acc;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# config_digest ", 0) == 0) digest_line = line.substr(16);
      continue;
    }
    if (!saw_header) {
      if (line != "slot,method,nmse,corr")
        throw io_error("series file: unexpected header '" + line + "'");
      saw_header = true;
      continue;
    }
    std::istringstream row(line);
    std::string slot, method, nmse_str, corr_str;
    if (!std::getline(row, slot, ',') || !std::getline(row, method, ',') ||
        !std::getline(row, nmse_str, ',') || !std::getline(row, corr_str))
      throw io_error("series file: malformed row '" + line + "'");
    if (!acc.count(method)) order.push_back(method);
    auto& a = acc[method];
    a[0] += std::stod(nmse_str);
    a[1] += std::stod(corr_str);
    a[2] += 1.0;
  }
  if (!saw_header) throw io_error("series file: missing header row");

  std::string dir = out_dir.empty() ? fs::path(series_path).parent_path().string() : out_dir;
  if (dir.empty()) dir = ".";
  ensure_dir(dir);
  std::vector<std::pair<std::string, std::pair<double, double>>> rows;
  for (const auto& method : order) {
    const auto& a = acc[method];
    rows.push_back({method, {a[0] / a[2], a[1] / a[2]}});
  }
  uint64_t digest = 0;
  std::sscanf(digest_line.c_str(), "%" SCNx64, &digest);
  const std::string path = (fs::path(dir) / "summary.csv").string();
  write_summary(path, digest, rows);
  std::printf("wrote %s\n", path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dynamic compressive sensing benchmark"};
  app.set_version_flag("--version", std::string("playcs ") + kVersion);
  app.require_subcommand(1);

  std::string config_path;
  std::string dataset_path;
  std::string series_path;
  std::string out_dir;
  int workers = 0;
  std::optional<uint64_t> seed_override;
  uint64_t seed_value = 0;

  const auto add_common = [&](CLI::App* cmd, bool needs_config) {
    auto* opt = cmd->add_option("--config", config_path, "config file (JSON, // comments allowed)");
    if (needs_config) opt->required();
    cmd->add_option("--out", out_dir, "output directory");
    cmd->add_flag("--verbose", g_verbose, "chatty progress output");
    cmd->add_option("--seed", seed_value, "override the scenario seed")
        ->each([&](const std::string&) { seed_override = seed_value; });
  };

  auto* gen = app.add_subcommand("generate", "generate a dataset file from the scenario");
  add_common(gen, true);

  auto* run = app.add_subcommand("run", "run all configured methods on a dataset");
  add_common(run, true);
  run->add_option("--dataset", dataset_path, "dataset file")->required();

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep over the SNR x m grid");
  add_common(sweep, true);
  sweep->add_option("--workers", workers, "worker threads (default: hardware concurrency)");

  auto* report = app.add_subcommand("report", "re-aggregate an existing series file");
  report->add_option("--series", series_path, "series.csv produced by 'run'")->required();
  report->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_generate(config_path, out_dir, seed_override);
    if (run->parsed()) return cmd_run(config_path, dataset_path, out_dir);
    if (sweep->parsed()) return cmd_sweep(config_path, out_dir, workers, seed_override);
    if (report->parsed()) return cmd_report(series_path, out_dir);
  } catch (const config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "numerical failure: %s\n", e.what());
    return 4;
  }
  return 0;
}
