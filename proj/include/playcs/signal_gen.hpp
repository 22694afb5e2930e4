// Ground-truth sequence generators: a parametric multipath channel scenario
// (ULA, DFT beamforming, slowly drifting angles and AR(1) path gains) and a
// generic dynamic sparse sequence with random support churn. Both produce a
// SequenceDataset that is byte-reproducible from (spec, seed).
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "playcs/rng.hpp"
#include "playcs/types.hpp"

namespace playcs {

struct UlaGeometry {
  int n_antennas = 1;  // half-wavelength spacing implied
};

struct PathSet {
  CVec gains;
  RVec angles;  // radians, in (-pi/2, pi/2)

  int count() const { return static_cast<int>(gains.size()); }
};

enum class ScenarioKind { SyntheticSparse, MmwaveChannel };

const char* to_string(ScenarioKind k);
std::optional<ScenarioKind> scenario_kind_from_string(std::string_view s);

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::MmwaveChannel;
  int n = 64;        // ambient dimension (antennas for the channel kind)
  int m = 24;        // measurements per slot
  int slots = 100;
  int sparsity = 3;  // path count N_L (channel) or support size L (synthetic)
  double snr_db = 30.0;
  uint64_t seed = 1;
  // dynamics knobs
  double angle_walk_std = 0.002;      // rad/slot
  double gain_ar_coeff = 0.999;       // AR(1) coefficient rho
  double support_change_prob = 0.02;  // per-slot add/remove probability (synthetic)
  double value_walk_std = 0.05;       // on-support value walk std (synthetic)
  bool redraw_beamformer = true;      // fresh beam subset per slot when true
};

void validate(const ScenarioSpec& spec);

struct SequenceDataset {
  ScenarioSpec spec;
  std::vector<CVec> truth;
  std::vector<MeasurementModel> operators;
  std::vector<CVec> observations;
  std::vector<CVec> noise;  // y_t = A_t x_t + noise_t, evaluated in this order

  int slots() const { return static_cast<int>(truth.size()); }
};

// a(theta)_k = exp(j pi k sin(theta)) / sqrt(N_r), unit norm.
CVec steering_vector(double theta, const UlaGeometry& geom);

// Unitary N_r-point transform whose columns match the steering vectors at
// the grid angles sin(theta_k) = 2k/N_r (mod aliasing).
CMat dft_dictionary(const UlaGeometry& geom);

// M distinct rows of the unitary DFT, chosen uniformly at random.
CMat sample_beamformer(int m, const UlaGeometry& geom, Rng& rng);

SequenceDataset gen_channel_sequence(const ScenarioSpec& spec, Rng& rng);
SequenceDataset gen_synthetic_sparse_sequence(const ScenarioSpec& spec, Rng& rng);

// Seeds an Rng from spec.seed and dispatches on spec.kind.
SequenceDataset generate(const ScenarioSpec& spec);

}  // namespace playcs
