#include <benchmark/benchmark.h>

#include <vector>

#include "qbayes/kernels.hpp"
#include "qbayes/rng.hpp"

namespace k = qbayes::kernels;

namespace {

std::vector<double> randv(std::size_t n, std::uint64_t seed = 1) {
  qbayes::Rng r(seed);
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform();
  return v;
}

std::vector<k::cplx> randc(std::size_t n, std::uint64_t seed = 2) {
  qbayes::Rng r(seed);
  std::vector<k::cplx> v(n);
  for (auto& x : v) x = {r.uniform() - 0.5, r.uniform() - 0.5};
  return v;
}

template <auto Fn>
void BM_dot(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto a = randv(n), b = randv(n, 3);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(a, b));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}

template <auto Fn>
void BM_reweight(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto p = randv(n), row = randv(n, 3);
  std::vector<double> out(n);
  for (auto _ : st) benchmark::DoNotOptimize(Fn(p, row, out));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(n));
}

template <auto Fn>
void BM_raw_moments(benchmark::State& st) {
  const int bits = static_cast<int>(st.range(0));
  const k::MeshView mesh{2, bits};
  const auto w = randv(std::size_t{1} << (2 * bits));
  for (auto _ : st) benchmark::DoNotOptimize(Fn(w, mesh));
  st.SetItemsProcessed(st.iterations() * static_cast<long>(w.size()));
}

template <auto Fn>
void BM_herald_expand(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const std::size_t updates = 3;
  const auto amps = randc(n);
  const auto sf = randv(updates * n);
  std::vector<k::cplx> out(n << updates);
  for (auto _ : st) {
    Fn(amps, sf, updates, out);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(out.size()));
}

template <auto Fn>
void BM_schur_contract(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto rho = randc(n * n);
  const auto s = randv(n), r = randv(n, 3);
  std::vector<k::cplx> out(n * n);
  for (auto _ : st) {
    Fn(rho, s, r, out);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * static_cast<long>(n * n));
}

void BM_dft_ref(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto in = randc(n);
  std::vector<k::cplx> out(n);
  for (auto _ : st) {
    k::ref::dft(in, out, 1);
    benchmark::ClobberMemory();
  }
}

void BM_fft_par(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto in = randc(n);
  std::vector<k::cplx> v(n);
  for (auto _ : st) {
    v = in;
    k::par::fft(v, 1);
    benchmark::ClobberMemory();
  }
}

template <auto Fn>
void BM_circular_convolve(benchmark::State& st) {
  const auto n = static_cast<std::size_t>(st.range(0));
  const auto p = randv(n), q = randv(n, 3);
  std::vector<double> out(n);
  for (auto _ : st) {
    Fn(p, q, out);
    benchmark::ClobberMemory();
  }
}

template <auto Fn>
void BM_sum_histogram(benchmark::State& st) {
  const std::vector<double> cdf = {0.1, 0.3, 0.6, 0.8, 1.0};
  const auto copies = static_cast<std::size_t>(st.range(0));
  std::vector<double> hist(4 * copies + 1);
  for (auto _ : st) {
    Fn(cdf, copies, 20000, 7, hist);
    benchmark::ClobberMemory();
  }
  st.SetItemsProcessed(st.iterations() * 20000L * static_cast<long>(copies));
}

}  // namespace

BENCHMARK_TEMPLATE(BM_dot, k::ref::dot)->Name("ref/dot")->Range(1 << 10, 1 << 20);
BENCHMARK_TEMPLATE(BM_dot, k::par::dot)->Name("par/dot")->Range(1 << 10, 1 << 20);
BENCHMARK_TEMPLATE(BM_reweight, k::ref::reweight)->Name("ref/reweight")->Range(1 << 10, 1 << 20);
BENCHMARK_TEMPLATE(BM_reweight, k::par::reweight)->Name("par/reweight")->Range(1 << 10, 1 << 20);
BENCHMARK_TEMPLATE(BM_raw_moments, k::ref::raw_moments)->Name("ref/raw_moments")->DenseRange(5, 9, 2);
BENCHMARK_TEMPLATE(BM_raw_moments, k::par::raw_moments)->Name("par/raw_moments")->DenseRange(5, 9, 2);
BENCHMARK_TEMPLATE(BM_herald_expand, k::ref::herald_expand)->Name("ref/herald_expand")->Range(1 << 8, 1 << 16);
BENCHMARK_TEMPLATE(BM_herald_expand, k::par::herald_expand)->Name("par/herald_expand")->Range(1 << 8, 1 << 16);
BENCHMARK_TEMPLATE(BM_schur_contract, k::ref::schur_contract)->Name("ref/schur_contract")->Range(32, 512);
BENCHMARK_TEMPLATE(BM_schur_contract, k::par::schur_contract)->Name("par/schur_contract")->Range(32, 512);
BENCHMARK(BM_dft_ref)->Name("ref/dft")->Range(64, 1 << 10);
BENCHMARK(BM_fft_par)->Name("par/fft")->Range(64, 1 << 10);
BENCHMARK_TEMPLATE(BM_circular_convolve, k::ref::circular_convolve)->Name("ref/circular_convolve")->Range(64, 1 << 12);
BENCHMARK_TEMPLATE(BM_circular_convolve, k::par::circular_convolve)->Name("par/circular_convolve")->Range(64, 1 << 12);
BENCHMARK_TEMPLATE(BM_sum_histogram, k::ref::sum_histogram)->Name("ref/sum_histogram")->Range(8, 512);
BENCHMARK_TEMPLATE(BM_sum_histogram, k::par::sum_histogram)->Name("par/sum_histogram")->Range(8, 512);

BENCHMARK_MAIN();
