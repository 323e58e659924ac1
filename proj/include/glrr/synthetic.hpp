#pragma once

// Synthetic retrieval data: exactly low-rank clean spectra X0 = B*C with a
// planted set of grossly corrupted columns, targets derived from the latent
// factors, and a noisy baseline retrieval that tracks the target imperfectly.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "glrr/dataset.hpp"
#include "glrr/error.hpp"
#include "glrr/matrix.hpp"
#include "glrr/rng.hpp"

namespace glrr {

struct SyntheticSpec {
  int n = 200;                      // samples (columns)
  int d = 16;                       // spectral bands (rows)
  int r = 4;                        // latent rank (endmember count)
  double corrupt_fraction = 0.1;    // fraction of columns hit by gross noise
  double noise_scale = 10.0;        // scale of the corrupting entries
  bool nonlinear_warp = false;      // smooth monotone distortion per band
  std::string target_map = "linear";  // or "smooth-nonlinear"
  double baseline_noise = 0.2;      // baseline error relative to rms(target)
  std::uint64_t seed = 0;

  void validate() const {
    require(n >= 2, "synthetic: n must be at least 2");
    require(d >= 1, "synthetic: d must be at least 1");
    require(r >= 1 && r <= std::min(d, n),
            "synthetic: need 1 <= r <= min(d, n)");
    require(corrupt_fraction >= 0.0 && corrupt_fraction < 1.0,
            "synthetic: corrupt_fraction must lie in [0, 1)");
    require(noise_scale >= 0.0, "synthetic: noise_scale must be nonnegative");
    require(baseline_noise >= 0.0,
            "synthetic: baseline_noise must be nonnegative");
    require(target_map == "linear" || target_map == "smooth-nonlinear",
            "synthetic: target_map must be 'linear' or 'smooth-nonlinear'");
  }
};

struct SyntheticData {
  RetrievalDataset dataset;
  Matrix clean;                      // X0 = B*C, before warp and corruption
  std::vector<int> corrupted_columns;  // sorted planted set
};

namespace detail {

inline double softplus(double x) {
  return x > 30.0 ? x : std::log1p(std::exp(x));
}

}  // namespace detail

// All randomness comes from named substreams of the spec seed, so any one
// ingredient can be regenerated without replaying the others.
inline SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  Rng root(spec.seed);

  Rng factor_rng = root.substream("factors");
  Matrix B(spec.d, spec.r);
  for (int j = 0; j < spec.r; ++j)
    for (int i = 0; i < spec.d; ++i) B(i, j) = factor_rng.normal();
  Matrix C(spec.r, spec.n);
  for (int j = 0; j < spec.n; ++j)
    for (int i = 0; i < spec.r; ++i) C(i, j) = factor_rng.normal();

  SyntheticData out;
  out.clean = B * C;
  Matrix X = out.clean;

  // Targets depend only on the latent coordinates, never on corruption.
  Rng target_rng = root.substream("target");
  Vector w(spec.r);
  for (int i = 0; i < spec.r; ++i) w(i) = target_rng.normal();
  Vector targets = (w.transpose() * C).transpose() / std::sqrt(double(spec.r));
  if (spec.target_map == "smooth-nonlinear") {
    for (int j = 0; j < spec.n; ++j)
      targets(j) = detail::softplus(1.5 * targets(j));
  }

  if (spec.nonlinear_warp) {
    // Per-band monotone distortion asinh(c*x)/c; c near 0.5 is gentle,
    // c near 2 compresses large values harder. Destroys exact low rank.
    Rng warp_rng = root.substream("warp");
    for (int i = 0; i < spec.d; ++i) {
      const double c = 0.5 + 1.5 * warp_rng.uniform();
      for (int j = 0; j < spec.n; ++j)
        X(i, j) = std::asinh(c * X(i, j)) / c;
    }
  }

  const int m = static_cast<int>(std::llround(spec.corrupt_fraction * spec.n));
  Rng corrupt_rng = root.substream("corrupt");
  std::vector<int> order = corrupt_rng.permutation(spec.n);
  out.corrupted_columns.assign(order.begin(), order.begin() + m);
  std::sort(out.corrupted_columns.begin(), out.corrupted_columns.end());
  Rng noise_rng = root.substream("noise");
  for (int col : out.corrupted_columns)
    for (int i = 0; i < spec.d; ++i)
      X(i, col) = spec.noise_scale * noise_rng.normal();

  Rng baseline_rng = root.substream("baseline");
  const double rms = std::sqrt(targets.squaredNorm() / spec.n);
  Vector baseline(spec.n);
  for (int j = 0; j < spec.n; ++j)
    baseline(j) = targets(j) + spec.baseline_noise * rms * baseline_rng.normal();

  out.dataset.spectra = std::move(X);
  out.dataset.aeronet = targets;
  out.dataset.baseline = std::move(baseline);
  out.dataset.ids.reserve(spec.n);
  for (int j = 0; j < spec.n; ++j) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%04d", j);
    out.dataset.ids.emplace_back(buf);
  }
  validate(out.dataset);
  return out;
}

}  // namespace glrr
