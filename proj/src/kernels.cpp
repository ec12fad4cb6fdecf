#include "qbayes/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "qbayes/rng.hpp"

namespace qbayes::kernels {

namespace {

constexpr std::size_t kBlock = 4096;

std::size_t block_count(std::size_t n) { return (n + kBlock - 1) / kBlock; }

// Fixed-block reduction: partials are combined in block order, independent of threads.
template <typename F>
double blocked_sum(std::size_t n, F&& term) {
  const std::size_t nb = block_count(n);
  std::vector<double> partial(nb, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < nb; ++b) {
    const std::size_t lo = b * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    double s = 0.0;
    for (std::size_t j = lo; j < hi; ++j) s += term(j);
    partial[b] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

std::size_t log2_exact(std::size_t n) {
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft: length must be a power of two");
  std::size_t b = 0;
  while ((std::size_t{1} << b) < n) ++b;
  return b;
}

}  // namespace

std::size_t sample_cdf(std::span<const double> cdf, double u) {
  const double target = u * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), target);
  if (it == cdf.end()) --it;
  return static_cast<std::size_t>(it - cdf.begin());
}

// ---------------------------------------------------------------------------
// Serial reference

namespace ref {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

double reweight(std::span<const double> prior, std::span<const double> row, std::span<double> out) {
  double s = 0.0;
  for (std::size_t j = 0; j < prior.size(); ++j) {
    out[j] = prior[j] * row[j];
    s += out[j];
  }
  return s;
}

void scale(std::span<double> v, double factor) {
  for (double& x : v) x *= factor;
}

RawMoments raw_moments(std::span<const double> w, const MeshView& mesh) {
  const int d = mesh.dims;
  RawMoments m;
  m.first.assign(d, 0.0);
  m.second.assign(static_cast<std::size_t>(d) * d, 0.0);
  std::vector<double> x(d);
  for (std::size_t j = 0; j < w.size(); ++j) {
    if (w[j] == 0.0) continue;
    for (int i = 0; i < d; ++i) x[i] = mesh.coord(j, i);
    m.mass += w[j];
    for (int i = 0; i < d; ++i) {
      m.first[i] += w[j] * x[i];
      for (int k = 0; k < d; ++k) m.second[i * d + k] += w[j] * x[i] * x[k];
    }
  }
  return m;
}

void herald_expand(std::span<const cplx> amps, std::span<const double> success_factors,
                   std::size_t updates, std::span<cplx> out) {
  const std::size_t n = amps.size();
  const std::size_t patterns = std::size_t{1} << updates;
  for (std::size_t s = 0; s < patterns; ++s) {
    for (std::size_t j = 0; j < n; ++j) {
      double f = 1.0;
      for (std::size_t k = 0; k < updates; ++k) {
        const double r = success_factors[k * n + j];
        f *= ((s >> k) & 1U) ? std::sqrt(r) : std::sqrt(1.0 - r);
      }
      out[j + n * s] = amps[j] * f;
    }
  }
}

void schur_contract(std::span<const cplx> rho, std::span<const double> s,
                    std::span<const double> r, std::span<cplx> out) {
  const std::size_t n = s.size();
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) out[j * n + k] = rho[j * n + k] * (s[j] * s[k] + r[j] * r[k]);
}

void dft(std::span<const cplx> in, std::span<cplx> out, int sign) {
  const std::size_t n = in.size();
  for (std::size_t k = 0; k < n; ++k) {
    cplx acc{0.0, 0.0};
    for (std::size_t j = 0; j < n; ++j) {
      // Reduce jk mod n before the angle to keep the phase accurate.
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>((j * k) % n) / n;
      acc += in[j] * cplx(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
}

void circular_convolve(std::span<const double> p, std::span<const double> q, std::span<double> out) {
  const std::size_t n = p.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p[j] * q[(i + n - j) % n];
    out[i] = s;
  }
}

void sum_histogram(std::span<const double> cdf, std::size_t copies, std::size_t draws,
                   std::uint64_t key, std::span<double> hist) {
  std::fill(hist.begin(), hist.end(), 0.0);
  const Rng base(key);
  for (std::size_t t = 0; t < draws; ++t) {
    Rng rng = base.split({t});
    std::size_t sum = 0;
    for (std::size_t c = 0; c < copies; ++c) sum += sample_cdf(cdf, rng.uniform());
    hist[sum] += 1.0;
  }
  for (double& h : hist) h /= static_cast<double>(draws);
}

}  // namespace ref

// ---------------------------------------------------------------------------
// OpenMP

namespace par {

double dot(std::span<const double> a, std::span<const double> b) {
  return blocked_sum(a.size(), [&](std::size_t j) { return a[j] * b[j]; });
}

double reweight(std::span<const double> prior, std::span<const double> row, std::span<double> out) {
  const std::size_t n = prior.size();
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) out[j] = prior[j] * row[j];
  return blocked_sum(n, [&](std::size_t j) { return out[j]; });
}

void scale(std::span<double> v, double factor) {
  const std::size_t n = v.size();
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j) v[j] *= factor;
}

RawMoments raw_moments(std::span<const double> w, const MeshView& mesh) {
  const int d = mesh.dims;
  const std::size_t width = 1 + d + static_cast<std::size_t>(d) * d;
  const std::size_t n = w.size();
  const std::size_t nb = block_count(n);
  std::vector<double> partial(nb * width, 0.0);
#pragma omp parallel for schedule(static)
  for (std::size_t b = 0; b < nb; ++b) {
    double* acc = partial.data() + b * width;
    std::vector<double> x(d);
    const std::size_t hi = std::min(n, (b + 1) * kBlock);
    for (std::size_t j = b * kBlock; j < hi; ++j) {
      if (w[j] == 0.0) continue;
      for (int i = 0; i < d; ++i) x[i] = mesh.coord(j, i);
      acc[0] += w[j];
      for (int i = 0; i < d; ++i) {
        acc[1 + i] += w[j] * x[i];
        for (int k = 0; k < d; ++k) acc[1 + d + i * d + k] += w[j] * x[i] * x[k];
      }
    }
  }
  RawMoments m;
  m.first.assign(d, 0.0);
  m.second.assign(static_cast<std::size_t>(d) * d, 0.0);
  for (std::size_t b = 0; b < nb; ++b) {
    const double* acc = partial.data() + b * width;
    m.mass += acc[0];
    for (int i = 0; i < d; ++i) m.first[i] += acc[1 + i];
    for (std::size_t i = 0; i < m.second.size(); ++i) m.second[i] += acc[1 + d + i];
  }
  return m;
}

void herald_expand(std::span<const cplx> amps, std::span<const double> success_factors,
                   std::size_t updates, std::span<cplx> out) {
  const std::size_t n = amps.size();
  const std::size_t total = n << updates;
#pragma omp parallel for schedule(static)
  for (std::size_t idx = 0; idx < total; ++idx) {
    const std::size_t j = idx % n;
    const std::size_t s = idx / n;
    double f = 1.0;
    for (std::size_t k = 0; k < updates; ++k) {
      const double r = success_factors[k * n + j];
      f *= ((s >> k) & 1U) ? std::sqrt(r) : std::sqrt(1.0 - r);
    }
    out[idx] = amps[j] * f;
  }
}

void schur_contract(std::span<const cplx> rho, std::span<const double> s,
                    std::span<const double> r, std::span<cplx> out) {
  const std::size_t n = s.size();
#pragma omp parallel for schedule(static)
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < n; ++k) out[j * n + k] = rho[j * n + k] * (s[j] * s[k] + r[j] * r[k]);
}

void fft(std::span<cplx> v, int sign) {
  const std::size_t n = v.size();
  const std::size_t bits = log2_exact(n);
  if (n == 1) return;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t rev = 0;
    for (std::size_t b = 0; b < bits; ++b) rev |= ((i >> b) & 1U) << (bits - 1 - b);
    if (rev > i) std::swap(v[i], v[rev]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const std::size_t half = len / 2;
    const std::size_t groups = n / len;
#pragma omp parallel for schedule(static) if (n >= 4096)
    for (std::size_t idx = 0; idx < groups * half; ++idx) {
      const std::size_t g = idx / half;
      const std::size_t k = idx % half;
      // Twiddles are computed directly (not by recurrence) to keep 1e-15 accuracy.
      const double ang = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
      const cplx w(std::cos(ang), std::sin(ang));
      const std::size_t a = g * len + k;
      const cplx t = w * v[a + half];
      v[a + half] = v[a] - t;
      v[a] += t;
    }
  }
}

void circular_convolve(std::span<const double> p, std::span<const double> q, std::span<double> out) {
  const std::size_t n = p.size();
#pragma omp parallel for schedule(static)
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += p[j] * q[(i + n - j) % n];
    out[i] = s;
  }
}

void sum_histogram(std::span<const double> cdf, std::size_t copies, std::size_t draws,
                   std::uint64_t key, std::span<double> hist) {
  // Integer counts per thread: the merged histogram is exact whatever the schedule.
  const std::size_t len = hist.size();
  const Rng base(key);
  std::vector<std::vector<std::uint64_t>> partial(static_cast<std::size_t>(omp_get_max_threads()));
#pragma omp parallel
  {
    auto& mine = partial[static_cast<std::size_t>(omp_get_thread_num())];
    mine.assign(len, 0);
#pragma omp for schedule(static)
    for (std::size_t t = 0; t < draws; ++t) {
      Rng rng = base.split({t});
      std::size_t sum = 0;
      for (std::size_t c = 0; c < copies; ++c) sum += sample_cdf(cdf, rng.uniform());
      ++mine[sum];
    }
  }
  std::fill(hist.begin(), hist.end(), 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < p.size(); ++i) hist[i] += static_cast<double>(p[i]);
  for (double& h : hist) h /= static_cast<double>(draws);
}

}  // namespace par

}  // namespace qbayes::kernels
