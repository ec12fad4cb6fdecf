#include <doctest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "qbayes/kernels.hpp"
#include "qbayes/rng.hpp"

using namespace qbayes;
namespace k = qbayes::kernels;

namespace {
std::vector<double> randv(Rng& r, std::size_t n) {
  std::vector<double> v(n);
  for (auto& x : v) x = r.uniform();
  return v;
}
std::vector<k::cplx> randc(Rng& r, std::size_t n) {
  std::vector<k::cplx> v(n);
  for (auto& x : v) x = {r.normal(), r.normal()};
  return v;
}
}  // namespace

TEST_SUITE("rng") {
TEST_CASE("streams are pure functions of seed and ids") {
  Rng a = Rng::stream(42, {1, 2}), b = Rng::stream(42, {1, 2}), c = Rng::stream(42, {2, 1});
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
  }
  Rng base(7);
  base();
  // split depends on the key only, not on how far the parent advanced
  CHECK(base.split({3})() == Rng(7).split({3})());
}

TEST_CASE("uniform and below ranges") {
  Rng r(1);
  double sum = 0;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  CHECK(sum / 100000 == doctest::Approx(0.5).epsilon(0.01));
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 1000; ++i) {
    const auto v = r.below(7);
    REQUIRE(v < 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 7);
}

TEST_CASE("normal moments") {
  Rng r(9);
  double s1 = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s1 += z;
    s2 += z * z;
  }
  CHECK(std::abs(s1 / n) < 0.01);
  CHECK(s2 / n == doctest::Approx(1.0).epsilon(0.02));
}
}

TEST_SUITE("kernels") {
TEST_CASE("par matches ref") {
  Rng r(3);
  for (std::size_t n : {1u, 7u, 4096u, 10001u}) {
    const auto a = randv(r, n), b = randv(r, n);
    CHECK(k::par::dot(a, b) == doctest::Approx(k::ref::dot(a, b)).epsilon(1e-13));
    std::vector<double> o1(n), o2(n);
    CHECK(k::par::reweight(a, b, o1) == doctest::Approx(k::ref::reweight(a, b, o2)).epsilon(1e-13));
    CHECK(o1 == o2);
  }
  const k::MeshView mesh{2, 5};
  const auto w = randv(r, 1024);
  const auto m1 = k::ref::raw_moments(w, mesh), m2 = k::par::raw_moments(w, mesh);
  CHECK(m1.mass == doctest::Approx(m2.mass).epsilon(1e-13));
  for (std::size_t i = 0; i < m1.second.size(); ++i) CHECK(m1.second[i] == doctest::Approx(m2.second[i]).epsilon(1e-13));

  const auto amps = randc(r, 64);
  const auto sf = randv(r, 3 * 64);
  std::vector<k::cplx> h1(64 * 8), h2(64 * 8);
  k::ref::herald_expand(amps, sf, 3, h1);
  k::par::herald_expand(amps, sf, 3, h2);
  CHECK(h1 == h2);

  const auto rho = randc(r, 32 * 32);
  const auto s = randv(r, 32), q = randv(r, 32);
  std::vector<k::cplx> c1(rho.size()), c2(rho.size());
  k::ref::schur_contract(rho, s, q, c1);
  k::par::schur_contract(rho, s, q, c2);
  CHECK(c1 == c2);
}

TEST_CASE("fft matches the direct transform") {
  Rng r(5);
  for (std::size_t n : {1u, 2u, 8u, 256u}) {
    const auto v = randc(r, n);
    for (int sign : {+1, -1}) {
      std::vector<k::cplx> direct(n), fast(v);
      k::ref::dft(v, direct, sign);
      k::par::fft(fast, sign);
      for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(direct[i] - fast[i]) < 1e-11);
    }
  }
  std::vector<k::cplx> bad(6);
  CHECK_THROWS_AS(k::par::fft(bad, 1), std::invalid_argument);
}

TEST_CASE("circular convolution") {
  const std::vector<double> p = {1, 2, 3, 4}, q = {0.5, 0.25, 0, 0.25};
  // out[i] = sum_j p[j] q[(i - j) mod 4]
  const std::vector<double> expect = {0.5 + 0.5 + 0 + 1, 0.25 + 1 + 0.75 + 0, 0 + 0.5 + 1.5 + 1, 0.25 + 0 + 0.75 + 2};
  std::vector<double> a(4), b(4);
  k::ref::circular_convolve(p, q, a);
  k::par::circular_convolve(p, q, b);
  for (int i = 0; i < 4; ++i) {
    CHECK(a[i] == doctest::Approx(expect[i]));
    CHECK(b[i] == doctest::Approx(expect[i]));
  }
}

TEST_CASE("sum_histogram ref and par agree exactly") {
  const std::vector<double> cdf = {0.2, 0.5, 1.0};
  std::vector<double> h1(2 * 10 + 1), h2(2 * 10 + 1);
  k::ref::sum_histogram(cdf, 10, 5000, 11, h1);
  k::par::sum_histogram(cdf, 10, 5000, 11, h2);
  CHECK(h1 == h2);
  CHECK(std::accumulate(h1.begin(), h1.end(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("sample_cdf") {
  const std::vector<double> cdf = {0.25, 0.25, 0.75, 1.0};
  CHECK(k::sample_cdf(cdf, 0.0) == 0);
  CHECK(k::sample_cdf(cdf, 0.3) == 2);
  CHECK(k::sample_cdf(cdf, 0.75) == 3);
  CHECK(k::sample_cdf(cdf, 0.999) == 3);
}
}
