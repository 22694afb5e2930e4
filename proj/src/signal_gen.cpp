#include "playcs/signal_gen.hpp"

#include <algorithm>
#include <cmath>

namespace playcs {

const char* to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::SyntheticSparse: return "synthetic-sparse";
    case ScenarioKind::MmwaveChannel: return "mmwave-channel";
  }
  return "?";
}

std::optional<ScenarioKind> scenario_kind_from_string(std::string_view s) {
  if (s == "synthetic-sparse") return ScenarioKind::SyntheticSparse;
  if (s == "mmwave-channel") return ScenarioKind::MmwaveChannel;
  return std::nullopt;
}

void validate(const ScenarioSpec& spec) {
  if (spec.n < 1) throw std::invalid_argument("scenario: n must be >= 1");
  if (spec.m < 1 || spec.m > spec.n)
    throw std::invalid_argument("scenario: m must satisfy 1 <= m <= n (undersampled regime)");
  if (spec.slots < 1) throw std::invalid_argument("scenario: slots must be >= 1");
  if (spec.sparsity < 1 || spec.sparsity > spec.n)
    throw std::invalid_argument("scenario: sparsity must be in [1, n]");
  if (!std::isfinite(spec.snr_db)) throw std::invalid_argument("scenario: snr_db must be finite");
  if (spec.angle_walk_std < 0.0) throw std::invalid_argument("scenario: angle_walk_std < 0");
  if (spec.gain_ar_coeff <= 0.0 || spec.gain_ar_coeff > 1.0)
    throw std::invalid_argument("scenario: gain_ar_coeff must be in (0, 1]");
  if (spec.support_change_prob < 0.0 || spec.support_change_prob > 1.0)
    throw std::invalid_argument("scenario: support_change_prob must be in [0, 1]");
  if (spec.value_walk_std < 0.0) throw std::invalid_argument("scenario: value_walk_std < 0");
}

CVec steering_vector(double theta, const UlaGeometry& geom) {
  if (geom.n_antennas < 2) throw std::invalid_argument("steering_vector: need >= 2 antennas");
  if (!(theta > -M_PI_2 && theta < M_PI_2))
    throw std::invalid_argument("steering_vector: theta outside (-pi/2, pi/2)");
  const int n = geom.n_antennas;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  const double s = std::sin(theta);
  CVec a(n);
  for (int k = 0; k < n; ++k) a[k] = std::polar(scale, M_PI * k * s);
  return a;
}

CMat dft_dictionary(const UlaGeometry& geom) {
  if (geom.n_antennas < 2) throw std::invalid_argument("dft_dictionary: need >= 2 antennas");
  const int n = geom.n_antennas;
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  CMat d(n, n);
  for (int k = 0; k < n; ++k)
    for (int c = 0; c < n; ++c)
      d(k, c) = std::polar(scale, 2.0 * M_PI * k * c / n);
  return d;
}

CMat sample_beamformer(int m, const UlaGeometry& geom, Rng& rng) {
  const int n = geom.n_antennas;
  if (m < 1 || m > n) throw std::invalid_argument("sample_beamformer: need 1 <= m <= n_antennas");
  // Partial Fisher-Yates over row indices of the analysis DFT (D^H).
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  for (int i = 0; i < m; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(n - i)));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  const CMat f = dft_dictionary(geom).adjoint();
  CMat w(m, n);
  for (int i = 0; i < m; ++i) w.row(i) = f.row(perm[static_cast<size_t>(i)]);
  return w;
}

namespace {

// Scales CN(0, I) noise so the per-slot expected SNR matches spec.snr_db;
// records y = A x + noise evaluated exactly once, in that order.
void push_slot(SequenceDataset& ds, const CVec& x, CMat a, Rng& rng) {
  const int m = static_cast<int>(a.rows());
  const CVec ax = a * x;
  const double signal_energy = ax.squaredNorm();
  double noise_var = signal_energy * std::pow(10.0, -ds.spec.snr_db / 10.0) / m;
  if (noise_var < 1e-30) noise_var = 1e-30;  // keep R invertible
  CVec noise(m);
  for (int i = 0; i < m; ++i) noise[i] = rng.cnormal();
  noise *= std::sqrt(noise_var);
  ds.truth.push_back(x);
  ds.operators.push_back(MeasurementModel::isotropic(std::move(a), noise_var));
  ds.observations.push_back(ax + noise);
  ds.noise.push_back(std::move(noise));
}

}  // namespace

SequenceDataset gen_channel_sequence(const ScenarioSpec& spec, Rng& rng) {
  validate(spec);
  if (spec.kind != ScenarioKind::MmwaveChannel)
    throw std::invalid_argument("gen_channel_sequence: wrong scenario kind");
  if (spec.n < 2)
    throw std::invalid_argument("gen_channel_sequence: the array needs >= 2 antennas");

  const UlaGeometry geom{spec.n};
  const CMat d = dft_dictionary(geom);
  const double theta_max = M_PI_2 - 1e-3;

  PathSet paths;
  paths.gains.resize(spec.sparsity);
  paths.angles.resize(spec.sparsity);
  for (int i = 0; i < spec.sparsity; ++i) {
    paths.angles[i] = (2.0 * rng.uniform() - 1.0) * (M_PI / 3.0);
    paths.gains[i] = rng.cnormal();
  }

  CMat fixed_w;
  if (!spec.redraw_beamformer) fixed_w = sample_beamformer(spec.m, geom, rng);

  SequenceDataset ds;
  ds.spec = spec;
  const double rho = spec.gain_ar_coeff;
  const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (int t = 0; t < spec.slots; ++t) {
    if (t > 0) {
      for (int i = 0; i < spec.sparsity; ++i) {
        paths.angles[i] = std::clamp(paths.angles[i] + spec.angle_walk_std * rng.normal(),
                                     -theta_max, theta_max);
        paths.gains[i] = rho * paths.gains[i] + innov * rng.cnormal();
      }
    }
    CVec h = CVec::Zero(spec.n);
    for (int i = 0; i < spec.sparsity; ++i) h += paths.gains[i] * steering_vector(paths.angles[i], geom);
    const CVec x = d.adjoint() * h;
    CMat w = spec.redraw_beamformer ? sample_beamformer(spec.m, geom, rng) : fixed_w;
    push_slot(ds, x, w * d, rng);
  }
  return ds;
}

SequenceDataset gen_synthetic_sparse_sequence(const ScenarioSpec& spec, Rng& rng) {
  validate(spec);
  if (spec.kind != ScenarioKind::SyntheticSparse)
    throw std::invalid_argument("gen_synthetic_sparse_sequence: wrong scenario kind");

  const int n = spec.n;
  const int m = spec.m;

  // Initial support: partial Fisher-Yates, then kept sorted.
  std::vector<int> perm(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
  for (int i = 0; i < spec.sparsity; ++i) {
    const int j = i + static_cast<int>(rng.below(static_cast<uint64_t>(n - i)));
    std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
  }
  std::vector<int> support(perm.begin(), perm.begin() + spec.sparsity);
  std::sort(support.begin(), support.end());

  CVec x = CVec::Zero(n);
  for (int i : support) x[i] = rng.cnormal();

  SequenceDataset ds;
  ds.spec = spec;
  for (int t = 0; t < spec.slots; ++t) {
    if (t > 0) {
      // One possible addition, then one possible removal, then the value walk.
      if (rng.uniform() < spec.support_change_prob &&
          static_cast<int>(support.size()) < n) {
        std::vector<int> comp;
        comp.reserve(static_cast<size_t>(n) - support.size());
        size_t k = 0;
        for (int i = 0; i < n; ++i) {
          if (k < support.size() && support[k] == i) {
            ++k;
          } else {
            comp.push_back(i);
          }
        }
        const int idx = comp[static_cast<size_t>(rng.below(comp.size()))];
        support.insert(std::upper_bound(support.begin(), support.end(), idx), idx);
        x[idx] = rng.cnormal();
      }
      if (rng.uniform() < spec.support_change_prob && support.size() > 1) {
        const size_t pos = static_cast<size_t>(rng.below(support.size()));
        x[support[pos]] = cplx(0.0, 0.0);
        support.erase(support.begin() + static_cast<std::ptrdiff_t>(pos));
      }
      for (int i : support) x[i] += spec.value_walk_std * rng.cnormal();
    }
    CMat a(m, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m));
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < n; ++c) a(r, c) = scale * rng.cnormal();
    push_slot(ds, x, std::move(a), rng);
  }
  return ds;
}

SequenceDataset generate(const ScenarioSpec& spec) {
  Rng rng(spec.seed);
  switch (spec.kind) {
    case ScenarioKind::SyntheticSparse: return gen_synthetic_sparse_sequence(spec, rng);
    case ScenarioKind::MmwaveChannel: return gen_channel_sequence(spec, rng);
  }
  throw std::invalid_argument("generate: unknown scenario kind");
}

}  // namespace playcs
