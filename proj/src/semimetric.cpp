#include "metricforge/semimetric.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <limits>
#include <sstream>

#include "metricforge/errors.hpp"

namespace metricforge {

double seed_value(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double eps, int h) {
  if (h < 1) throw InputError("seed_value: h must be >= 1");
  double prod = 1.0;
  for (int i = 0; i < x.size(); ++i) prod *= x[i];
  double sum = 0.0;
  for (int j = 0; j < y.size(); ++j) sum += y[j];
  return 0.9 * (eps / std::sqrt(static_cast<double>(h))) * prod * sum;
}

namespace {

// Coordinates are keyed at 9 significant decimal digits. k-Means recomputes
// class means in floating point, so a designed center can come back a few
// ulps off; the quantized key maps that drift to the same noise stream while
// distinct points at any sane separation still get distinct keys.
void append_quantized(std::string& out, double v) {
  if (v == 0.0) v = 0.0;  // collapse -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
  out += ',';
}

std::string quantized_pair_key(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  std::string key;
  key.reserve(24 * static_cast<std::size_t>(x.size() + y.size()) + 1);
  for (int i = 0; i < x.size(); ++i) append_quantized(key, x[i]);
  key += '|';
  for (int i = 0; i < y.size(); ++i) append_quantized(key, y[i]);
  return key;
}

// Exact-bits key for the fixed-table mode.
std::string exact_pair_key(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  std::string key(static_cast<std::size_t>(x.size() + y.size()) * sizeof(double) + 1, '\0');
  std::memcpy(key.data(), x.data(), static_cast<std::size_t>(x.size()) * sizeof(double));
  key[static_cast<std::size_t>(x.size()) * sizeof(double)] = '|';
  std::memcpy(key.data() + static_cast<std::size_t>(x.size()) * sizeof(double) + 1, y.data(),
              static_cast<std::size_t>(y.size()) * sizeof(double));
  return key;
}

double quantize9(double v) {
  if (v == 0.0) return 0.0;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return std::strtod(buf, nullptr);
}

}  // namespace

NoiseFunction NoiseFunction::fixed_table(const NeighborAssignment& assignment,
                                         const PointCloud& cloud) {
  if (assignment.m != cloud.size() || assignment.ell != cloud.dim()) {
    throw DimensionError("fixed_table: assignment does not match the cloud");
  }
  NoiseFunction f;
  f.seeded_ = false;
  f.eps_ = assignment.eps;
  f.h_ = assignment.h;
  f.ell_ = assignment.ell;
  const int pad = assignment.h - assignment.ell;
  const double bound = assignment.eps / 6.0;

  for (int k = 0; k < static_cast<int>(assignment.pairs.size()); ++k) {
    const auto& [i, j] = assignment.pairs[k];
    const Eigen::VectorXd yi = cloud.point(i);
    const Eigen::VectorXd yj = cloud.point(j);
    const auto check_and_store = [&](const Eigen::VectorXd& z, const Eigen::VectorXd& base,
                                     const Eigen::VectorXd& other) {
      if ((z.head(base.size()).array() != base.array()).any()) {
        throw InputError("fixed_table: neighbor perturbs data coordinates");
      }
      const Eigen::VectorXd w = z.tail(pad);
      if (w.norm() > bound) {
        std::ostringstream os;
        os << "fixed_table: padding offset magnitude " << w.norm() << " exceeds eps/6 = "
           << bound;
        throw InputError(os.str());
      }
      f.table_[exact_pair_key(base, other)] = w;
    };
    check_and_store(assignment.z_fwd.col(k), yi, yj);
    check_and_store(assignment.z_rev.col(k), yj, yi);
  }
  return f;
}

NoiseFunction NoiseFunction::seeded(double eps, int h, int ell, Scheme scheme,
                                    std::uint64_t salt) {
  if (!(eps > 0.0)) throw InputError("seeded noise: eps must be positive");
  if (h < ell || ell < 1) throw DimensionError("seeded noise: requires h >= ell >= 1");
  NoiseFunction f;
  f.seeded_ = true;
  f.scheme_ = scheme;
  f.eps_ = eps;
  f.h_ = h;
  f.ell_ = ell;
  f.salt_ = salt;
  // ||s * u||_2 <= s * sqrt(h - ell) < eps/6 for every u in [0,1]^(h-ell).
  f.scale_ = 0.9 * eps / (6.0 * std::sqrt(static_cast<double>(h)));
  return f;
}

Eigen::VectorXd NoiseFunction::operator()(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& y) const {
  const int pad = h_ - ell_;
  if (x.size() != ell_ || y.size() != ell_) {
    throw DimensionError("noise: point dimension does not match the construction");
  }
  if (!seeded_) {
    const auto it = table_.find(exact_pair_key(x, y));
    if (it == table_.end()) return Eigen::VectorXd::Zero(pad);
    return it->second;
  }
  std::uint64_t seed;
  if (scheme_ == Scheme::Hashed) {
    const std::string key = quantized_pair_key(x, y);
    seed = fnv1a64(key.data(), key.size());
  } else {
    const double s = quantize9(seed_value(x, y, eps_, h_));
    std::uint64_t bits;
    std::memcpy(&bits, &s, sizeof bits);
    seed = bits;
  }
  // Salt 0 leaves the canonical stream untouched; any other salt selects an
  // unrelated stream for the same pair.
  seed ^= salt_ * 0x9E3779B97F4A7C15ull;
  SplitMix64 gen(seed);
  Eigen::VectorXd u(pad);
  for (int i = 0; i < pad; ++i) u[i] = gen.next_double();
  return scale_ * u;
}

NeighborAssignment sample_padding_neighbors(const PointCloud& cloud, double eps,
                                            SplitMix64& gen) {
  cloud.validate();
  const int m = cloud.size();
  const int ell = cloud.dim();
  if (m < 2) throw InputError("sample_padding_neighbors: needs at least two points");
  const double limit = 0.5 * cloud.min_pairwise_distance();
  if (!(eps > 0.0) || !(eps < limit)) {
    std::ostringstream os;
    os << "eps must lie in (0, " << limit << ") so the neighbor balls stay disjoint; got "
       << eps;
    throw InputError(os.str());
  }
  const int h = pair_count(m);
  if (h < ell) {
    std::ostringstream os;
    os << "capacity: C(m,2) = " << h << " is below the point dimension " << ell
       << "; add points or reduce the dimension";
    throw RankError(os.str());
  }
  const int pad = h - ell;
  const double radius = 0.9 * eps / 6.0;

  NeighborAssignment a;
  a.m = m;
  a.ell = ell;
  a.h = h;
  a.eps = eps;
  a.pairs = pair_order(m);
  a.z_fwd.resize(h, h);
  a.z_rev.resize(h, h);
  a.diff.resize(h, h);

  for (int attempt = 0; attempt < defaults::rank_retries; ++attempt) {
    for (int k = 0; k < h; ++k) {
      const auto& [i, j] = a.pairs[k];
      Eigen::VectorXd zi = lift(cloud.point(i), h);
      Eigen::VectorXd zj = lift(cloud.point(j), h);
      if (pad > 0) {
        zi.tail(pad) = sample_in_ball(gen, pad, radius);
        zj.tail(pad) = sample_in_ball(gen, pad, radius);
      }
      a.z_fwd.col(k) = zi;
      a.z_rev.col(k) = zj;
      a.diff.col(k) = zi - zj;
    }
    if (rank_check(a.diff)) {
      a.attempts = attempt + 1;
      return a;
    }
  }
  throw RankError(
      "sample_padding_neighbors: difference matrix rank-deficient after retries; "
      "padding-only noise requires the data differences to span the data dimensions");
}

double EpsilonSemimetric::eval(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  const int ell = noise.data_dim();
  const int h = noise.lifted_dim();
  if (x.size() != ell || y.size() != ell) {
    throw DimensionError("semimetric: point dimension does not match the construction");
  }
  Eigen::VectorXd u(h);
  u.head(ell) = x - y;
  if (h > ell) u.tail(h - ell) = noise(x, y) - noise(y, x);
  const double d = form.norm(u);
  if (!std::isfinite(d)) {
    throw NumericalError("distance-evaluation", "non-finite distance value");
  }
  return d;
}

DistanceFn EpsilonSemimetric::fn() const {
  // Copies *this; the callable stays valid independent of the source object.
  return [sm = *this](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return sm.eval(a, b);
  };
}

double semimetric_eval(const EpsilonSemimetric& sm, const Eigen::VectorXd& x,
                       const Eigen::VectorXd& y) {
  return sm.eval(x, y);
}

const char* metric_class_name(MetricClass c) {
  switch (c) {
    case MetricClass::Metric: return "metric";
    case MetricClass::EpsilonSemimetric: return "eps-semimetric";
    case MetricClass::Semimetric: return "semimetric";
    case MetricClass::Quasimetric: return "quasimetric";
    case MetricClass::Premetric: return "premetric";
    case MetricClass::None: return "none";
  }
  return "none";
}

AxiomReport check_axioms(const DistanceFn& distance, const std::vector<Eigen::VectorXd>& sample,
                         const AxiomOptions& options) {
  const int n = static_cast<int>(sample.size());
  if (n < 2) throw InputError("check_axioms: needs at least two sample points");

  AxiomReport report;
  report.sample_size = n;
  report.eps = options.eps;

  double max_distance = 0.0;

  for (int i = 0; i < n; ++i) {
    report.identity_defect = std::max(report.identity_defect,
                                      std::abs(distance(sample[i], sample[i])));
  }

  const bool cache_pairs = n <= 300;
  Eigen::MatrixXd dist;
  if (cache_pairs) {
    dist.resize(n, n);
    for (int i = 0; i < n; ++i) {
      dist(i, i) = 0.0;
      for (int j = 0; j < n; ++j) {
        if (i != j) dist(i, j) = distance(sample[i], sample[j]);
      }
    }
  }
  const auto d_of = [&](int i, int j) { return cache_pairs ? dist(i, j) : distance(sample[i], sample[j]); };

  SplitMix64 gen(options.seed);
  const auto record_pair = [&](int i, int j) {
    const double dij = d_of(i, j);
    const double dji = d_of(j, i);
    max_distance = std::max({max_distance, dij, dji});
    const bool identical = sample[i].size() == sample[j].size() &&
                           (sample[i].array() == sample[j].array()).all();
    if (!identical && (dij <= 0.0 || dji <= 0.0)) {
      ++report.positivity_violations;
      if (!report.positivity_witness) report.positivity_witness = {{i, j}};
    }
    const double asym = std::abs(dij - dji);
    if (asym > report.asymmetry_defect) {
      report.asymmetry_defect = asym;
      report.asymmetry_witness = {{i, j}};
    }
  };

  if (cache_pairs) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) record_pair(i, j);
  } else {
    for (long long t = 0; t < options.random_triples; ++t) {
      const int i = static_cast<int>(gen.next() % n);
      int j = static_cast<int>(gen.next() % n);
      if (i == j) continue;
      record_pair(i, j);
    }
  }

  double max_defect = -std::numeric_limits<double>::infinity();
  const auto record_triple = [&](int x, int y, int z) {
    // d(x,y) <= d(x,z) + d(z,y) + eps is the bound under audit.
    const double defect = d_of(x, y) - d_of(x, z) - d_of(z, y);
    ++report.triples_checked;
    if (defect > max_defect) {
      max_defect = defect;
      if (defect > 0.0) report.triangle_witness = {{x, y, z}};
    }
  };

  report.exhaustive = n <= options.exhaustive_limit;
  if (report.exhaustive) {
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        if (y == x) continue;
        for (int z = 0; z < n; ++z) {
          if (z == x || z == y) continue;
          record_triple(x, y, z);
        }
      }
  } else {
    for (long long t = 0; t < options.random_triples; ++t) {
      const int x = static_cast<int>(gen.next() % n);
      const int y = static_cast<int>(gen.next() % n);
      const int z = static_cast<int>(gen.next() % n);
      if (x == y || y == z || x == z) continue;
      record_triple(x, y, z);
    }
  }
  report.triangle_defect = std::max(0.0, max_defect);
  report.max_distance = max_distance;

  const bool identity_ok = report.identity_defect <= options.identity_tol;
  const bool pos_ok = report.positivity_violations == 0;
  const bool sym_ok = report.asymmetry_defect <= options.symmetry_tol;
  const double tri_floor = options.triangle_rel_tol * max_distance;
  const bool tri_ok = report.triangle_defect <= tri_floor;
  const bool eps_ok = report.triangle_defect <= options.eps + tri_floor;

  if (!identity_ok || !pos_ok) {
    report.classification = MetricClass::None;
  } else if (tri_ok) {
    report.classification = sym_ok ? MetricClass::Metric : MetricClass::Quasimetric;
  } else if (sym_ok) {
    report.classification = eps_ok ? MetricClass::EpsilonSemimetric : MetricClass::Semimetric;
  } else {
    report.classification = MetricClass::Premetric;
  }
  return report;
}

}  // namespace metricforge
