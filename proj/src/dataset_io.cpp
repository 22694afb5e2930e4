#include "playcs/dataset_io.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <type_traits>

namespace playcs {

namespace {

constexpr char kMagic[4] = {'P', 'C', 'S', 'D'};
constexpr uint32_t kVersion = 1;

// All scalars are written little-endian regardless of host order.
template <typename T>
void put(std::string& out, T v) {
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (size_t i = sizeof(T); i-- > 0;) out.push_back(static_cast<char>(raw[i]));
  } else {
    out.append(reinterpret_cast<const char*>(raw), sizeof(T));
  }
}

struct Cursor {
  const std::string& bytes;
  size_t pos = 0;

  template <typename T>
  T get() {
    if (pos + sizeof(T) > bytes.size()) throw io_error("dataset file truncated");
    unsigned char raw[sizeof(T)];
    std::memcpy(raw, bytes.data() + pos, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
      for (size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
    }
    pos += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }
};

void put_cvec(std::string& out, const CVec& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    put(out, v[i].real());
    put(out, v[i].imag());
  }
}

void put_cmat(std::string& out, const CMat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      put(out, m(r, c).real());
      put(out, m(r, c).imag());
    }
}

CVec get_cvec(Cursor& cur, Eigen::Index n) {
  CVec v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = cur.get<double>();
    const double im = cur.get<double>();
    v[i] = cplx(re, im);
  }
  return v;
}

CMat get_cmat(Cursor& cur, Eigen::Index rows, Eigen::Index cols) {
  CMat m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double re = cur.get<double>();
      const double im = cur.get<double>();
      m(r, c) = cplx(re, im);
    }
  return m;
}

}  // namespace

std::string serialize_dataset(const SequenceDataset& ds) {
  std::string out;
  out.append(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<uint8_t>(ds.spec.kind == ScenarioKind::MmwaveChannel ? 1 : 0));
  put(out, static_cast<uint8_t>(ds.spec.redraw_beamformer ? 1 : 0));
  put(out, static_cast<uint16_t>(0));
  put(out, static_cast<uint32_t>(ds.spec.n));
  put(out, static_cast<uint32_t>(ds.spec.m));
  put(out, static_cast<uint32_t>(ds.spec.slots));
  put(out, static_cast<uint32_t>(ds.spec.sparsity));
  put(out, ds.spec.snr_db);
  put(out, ds.spec.seed);
  put(out, ds.spec.angle_walk_std);
  put(out, ds.spec.gain_ar_coeff);
  put(out, ds.spec.support_change_prob);
  put(out, ds.spec.value_walk_std);
  for (int t = 0; t < ds.slots(); ++t) {
    const auto ut = static_cast<size_t>(t);
    put_cvec(out, ds.truth[ut]);
    put_cmat(out, ds.operators[ut].A);
    put_cmat(out, ds.operators[ut].R);
    put_cvec(out, ds.observations[ut]);
    put_cvec(out, ds.noise[ut]);
  }
  return out;
}

SequenceDataset deserialize_dataset(const std::string& bytes) {
  if (bytes.size() < 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw io_error("not a dataset file (bad magic)");
  Cursor cur{bytes, sizeof(kMagic)};
  if (cur.get<uint32_t>() != kVersion) throw io_error("unsupported dataset version");

  SequenceDataset ds;
  const uint8_t kind = cur.get<uint8_t>();
  ds.spec.kind = kind == 1 ? ScenarioKind::MmwaveChannel : ScenarioKind::SyntheticSparse;
  ds.spec.redraw_beamformer = cur.get<uint8_t>() != 0;
  cur.get<uint16_t>();
  ds.spec.n = static_cast<int>(cur.get<uint32_t>());
  ds.spec.m = static_cast<int>(cur.get<uint32_t>());
  ds.spec.slots = static_cast<int>(cur.get<uint32_t>());
  ds.spec.sparsity = static_cast<int>(cur.get<uint32_t>());
  ds.spec.snr_db = cur.get<double>();
  ds.spec.seed = cur.get<uint64_t>();
  ds.spec.angle_walk_std = cur.get<double>();
  ds.spec.gain_ar_coeff = cur.get<double>();
  ds.spec.support_change_prob = cur.get<double>();
  ds.spec.value_walk_std = cur.get<double>();
  validate(ds.spec);

  const Eigen::Index n = ds.spec.n;
  const Eigen::Index m = ds.spec.m;
  for (int t = 0; t < ds.spec.slots; ++t) {
    ds.truth.push_back(get_cvec(cur, n));
    MeasurementModel meas;
    meas.A = get_cmat(cur, m, n);
    meas.R = get_cmat(cur, m, m);
    ds.operators.push_back(std::move(meas));
    ds.observations.push_back(get_cvec(cur, m));
    ds.noise.push_back(get_cvec(cur, m));
  }
  if (cur.pos != bytes.size()) throw io_error("dataset file has trailing bytes");
  return ds;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw io_error("read failed: " + path);
  return bytes;
}

void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw io_error("cannot open " + path + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw io_error("write failed: " + path);
}

void save_dataset(const SequenceDataset& ds, const std::string& path) {
  write_file(path, serialize_dataset(ds));
}

SequenceDataset load_dataset(const std::string& path) {
  return deserialize_dataset(read_file(path));
}

uint64_t fnv1a(const std::string& bytes) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

uint64_t file_digest(const std::string& path) { return fnv1a(read_file(path)); }

std::string digest_hex(uint64_t digest) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(digest));
  return buf;
}

}  // namespace playcs
