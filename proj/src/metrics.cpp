#include "playcs/metrics.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace playcs {

double nmse(const CVec& est, const CVec& truth) {
  if (est.size() != truth.size()) throw std::invalid_argument("nmse: dimension mismatch");
  const double denom = truth.squaredNorm();
  if (denom == 0.0) throw std::invalid_argument("nmse: zero truth vector");
  return (est - truth).squaredNorm() / denom;
}

double corr(const CVec& est, const CVec& truth) {
  if (est.size() != truth.size()) throw std::invalid_argument("corr: dimension mismatch");
  const double ne = est.norm();
  const double nt = truth.norm();
  if (ne == 0.0 || nt == 0.0) throw std::invalid_argument("corr: zero vector");
  return std::abs(est.dot(truth)) / (ne * nt);
}

MetricSeries evaluate_series(std::string method, const ScenarioSpec& spec,
                             const std::vector<CVec>& truth,
                             const std::vector<CVec>& estimates) {
  if (truth.size() != estimates.size() || truth.empty())
    throw std::invalid_argument("evaluate_series: slot counts disagree");
  MetricSeries s;
  s.method = std::move(method);
  s.spec = spec;
  s.nmse.reserve(truth.size());
  s.corr.reserve(truth.size());
  for (size_t t = 0; t < truth.size(); ++t) {
    s.nmse.push_back(nmse(estimates[t], truth[t]));
    s.corr.push_back(estimates[t].norm() == 0.0 ? 0.0 : corr(estimates[t], truth[t]));
  }
  double sn = 0.0;
  double sc = 0.0;
  for (size_t t = 0; t < truth.size(); ++t) {
    sn += s.nmse[t];
    sc += s.corr[t];
  }
  s.tnmse = sn / static_cast<double>(truth.size());
  s.tcorr = sc / static_cast<double>(truth.size());
  return s;
}

std::vector<MetricSeries> run_experiment(const SequenceDataset& dataset,
                                         const std::vector<MethodConfig>& methods) {
  if (methods.empty()) throw std::invalid_argument("run_experiment: no methods");
  std::vector<MetricSeries> out;
  out.reserve(methods.size());
  for (const auto& method : methods) {
    try {
      const std::vector<CVec> estimates =
          method.kind ? run_sequence(*method.kind, dataset, method.params) : dataset.truth;
      out.push_back(evaluate_series(method.label, dataset.spec, dataset.truth, estimates));
    } catch (const std::exception& e) {
      throw numerical_error("method " + method.label + ": " + e.what());
    }
  }
  return out;
}

uint64_t derive_seed(uint64_t base, size_t snr_idx, size_t m_idx, int trial) {
  uint64_t h = splitmix64(base ^ 0x6A09E667F3BCC908ULL);
  h = splitmix64(h ^ (0x9E3779B97F4A7C15ULL * (static_cast<uint64_t>(snr_idx) + 1)));
  h = splitmix64(h ^ (0xC2B2AE3D27D4EB4FULL * (static_cast<uint64_t>(m_idx) + 1)));
  h = splitmix64(h ^ (0x165667B19E3779F9ULL * (static_cast<uint64_t>(trial) + 1)));
  return h;
}

SweepResult run_sweep(const ScenarioSpec& base, const std::vector<double>& snr_list,
                      const std::vector<int>& m_list, int trials,
                      const std::vector<MethodConfig>& methods, int workers) {
  if (snr_list.empty() || m_list.empty()) throw std::invalid_argument("run_sweep: empty axes");
  if (trials < 1) throw std::invalid_argument("run_sweep: trials must be >= 1");
  if (methods.empty()) throw std::invalid_argument("run_sweep: no methods");

  struct Task {
    size_t snr_idx;
    size_t m_idx;
    int trial;
  };
  std::vector<Task> tasks;
  for (size_t si = 0; si < snr_list.size(); ++si)
    for (size_t mi = 0; mi < m_list.size(); ++mi)
      for (int tr = 0; tr < trials; ++tr) tasks.push_back({si, mi, tr});

  // results[(cell, method)][trial] = (tnmse, tcorr); slots are preassigned so
  // the reduction is independent of worker scheduling.
  const size_t n_cells = snr_list.size() * m_list.size();
  std::vector<std::vector<std::pair<double, double>>> results(
      n_cells * methods.size(),
      std::vector<std::pair<double, double>>(static_cast<size_t>(trials)));
  std::vector<std::string> failures(tasks.size());

  std::atomic<size_t> next{0};
  const auto worker = [&]() {
    for (;;) {
      const size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) return;
      const Task& task = tasks[idx];
      try {
        ScenarioSpec spec = base;
        spec.snr_db = snr_list[task.snr_idx];
        spec.m = m_list[task.m_idx];
        spec.seed = derive_seed(base.seed, task.snr_idx, task.m_idx, task.trial);
        const SequenceDataset dataset = generate(spec);
        const auto series = run_experiment(dataset, methods);
        const size_t cell = task.snr_idx * m_list.size() + task.m_idx;
        for (size_t mi = 0; mi < methods.size(); ++mi)
          results[cell * methods.size() + mi][static_cast<size_t>(task.trial)] = {
              series[mi].tnmse, series[mi].tcorr};
      } catch (const std::exception& e) {
        failures[idx] = e.what();
      }
    }
  };

  int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
  if (n_workers < 1) n_workers = 1;
  n_workers = std::min<int>(n_workers, static_cast<int>(tasks.size()));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n_workers));
  for (int i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  std::string failure_report;
  for (size_t i = 0; i < tasks.size(); ++i) {
    if (!failures[i].empty()) {
      failure_report += "cell (snr=" + std::to_string(snr_list[tasks[i].snr_idx]) +
                        ", m=" + std::to_string(m_list[tasks[i].m_idx]) +
                        ", trial=" + std::to_string(tasks[i].trial) + "): " + failures[i] + "\n";
    }
  }
  if (!failure_report.empty()) throw numerical_error("sweep failures:\n" + failure_report);

  SweepResult sweep;
  for (size_t si = 0; si < snr_list.size(); ++si)
    for (size_t mi = 0; mi < m_list.size(); ++mi)
      for (size_t me = 0; me < methods.size(); ++me) {
        const auto& vals = results[(si * m_list.size() + mi) * methods.size() + me];
        SweepCell cell;
        cell.snr_db = snr_list[si];
        cell.m = m_list[mi];
        cell.method = methods[me].label;
        cell.trials = trials;
        double sn = 0.0;
        double sc = 0.0;
        for (const auto& [tn, tc] : vals) {
          sn += tn;
          sc += tc;
        }
        cell.tnmse_mean = sn / trials;
        cell.tcorr_mean = sc / trials;
        if (trials > 1) {
          double vn = 0.0;
          double vc = 0.0;
          for (const auto& [tn, tc] : vals) {
            vn += (tn - cell.tnmse_mean) * (tn - cell.tnmse_mean);
            vc += (tc - cell.tcorr_mean) * (tc - cell.tcorr_mean);
          }
          cell.tnmse_stderr = std::sqrt(vn / (trials - 1)) / std::sqrt(static_cast<double>(trials));
          cell.tcorr_stderr = std::sqrt(vc / (trials - 1)) / std::sqrt(static_cast<double>(trials));
        }
        sweep.cells.push_back(std::move(cell));
      }
  return sweep;
}

}  // namespace playcs
