#pragma once

// Data-parallel inner loops shared by every module.
//
// Each kernel exists twice with identical signatures: `ref::` is a plain
// serial loop kept as the reference for tests and benchmarks, `par::` is the
// OpenMP version the modules call. Reductions in `par::` sum fixed-size blocks
// and then combine the block partials serially in index order, so results do
// not depend on the thread count.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace qbayes::kernels {

using cplx = std::complex<double>;

/// Coordinates of cell centroids on a uniform mesh of [0,1]^dims with
/// 2^bits points per axis; axis 0 is the least significant index digit.
struct MeshView {
  int dims = 1;
  int bits = 1;
  double coord(std::size_t j, int axis) const {
    const std::size_t mask = (std::size_t{1} << bits) - 1;
    const std::size_t i = (j >> (static_cast<std::size_t>(bits) * axis)) & mask;
    return (static_cast<double>(i) + 0.5) / static_cast<double>(std::size_t{1} << bits);
  }
};

/// First and second raw moments: first[i] = sum w x_i, second[i*dims+k] = sum w x_i x_k.
struct RawMoments {
  std::vector<double> first;
  std::vector<double> second;
  double mass = 0.0;
};

namespace ref {
double dot(std::span<const double> a, std::span<const double> b);
double reweight(std::span<const double> prior, std::span<const double> row, std::span<double> out);
void scale(std::span<double> v, double factor);
RawMoments raw_moments(std::span<const double> w, const MeshView& mesh);
void herald_expand(std::span<const cplx> amps, std::span<const double> success_factors,
                   std::size_t updates, std::span<cplx> out);
void schur_contract(std::span<const cplx> rho, std::span<const double> s,
                    std::span<const double> r, std::span<cplx> out);
void dft(std::span<const cplx> in, std::span<cplx> out, int sign);
void circular_convolve(std::span<const double> p, std::span<const double> q, std::span<double> out);
void sum_histogram(std::span<const double> cdf, std::size_t copies, std::size_t draws,
                   std::uint64_t key, std::span<double> hist);
}  // namespace ref

namespace par {
double dot(std::span<const double> a, std::span<const double> b);
double reweight(std::span<const double> prior, std::span<const double> row, std::span<double> out);
void scale(std::span<double> v, double factor);
RawMoments raw_moments(std::span<const double> w, const MeshView& mesh);
void herald_expand(std::span<const cplx> amps, std::span<const double> success_factors,
                   std::size_t updates, std::span<cplx> out);
void schur_contract(std::span<const cplx> rho, std::span<const double> s,
                    std::span<const double> r, std::span<cplx> out);
/// In-place radix-2 FFT, unnormalized; sign=+1 computes sum_j v_j e^{+2 pi i jk/N}.
void fft(std::span<cplx> v, int sign);
void circular_convolve(std::span<const double> p, std::span<const double> q, std::span<double> out);
void sum_histogram(std::span<const double> cdf, std::size_t copies, std::size_t draws,
                   std::uint64_t key, std::span<double> hist);
}  // namespace par

/// Index drawn from a cumulative table by inverse transform.
std::size_t sample_cdf(std::span<const double> cdf, double u);

}  // namespace qbayes::kernels
