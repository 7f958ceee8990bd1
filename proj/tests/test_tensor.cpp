#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "lrota/errors.hpp"
#include "lrota/io.hpp"
#include "lrota/rng.hpp"
#include "lrota/tensor.hpp"
#include "oracles.hpp"

using namespace lrota;

namespace {

DenseTensor counting_tensor() {  // 2x2x2 with entries 1..8, row major
  std::vector<double> data(8);
  for (std::size_t i = 0; i < 8; ++i) data[i] = static_cast<double>(i + 1);
  return DenseTensor({2, 2, 2}, data);
}

DenseTensor random_tensor(std::vector<std::size_t> dims, std::uint64_t seed) {
  Rng rng(seed);
  DenseTensor a(dims);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = rng.next_gaussian();
  return a;
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  return m;
}

}  // namespace

TEST_CASE("inner product and norm on known entries") {
  DenseTensor a = counting_tensor();
  DenseTensor ones({2, 2, 2}, 1.0);
  CHECK(inner(a, ones) == doctest::Approx(36.0));
  CHECK(norm(ones) == doctest::Approx(std::sqrt(8.0)));
  DenseTensor wrong({2, 2});
  CHECK_THROWS_AS(inner(a, wrong), DimensionError);
}

TEST_CASE("full contraction against a diagonal model") {
  DenseTensor a = diag_tensor({2.0, 1.0}, 3);
  const double s = 1.0 / std::sqrt(2.0);
  BlockVector x{{{s, s}, {s, s}, {s, s}}};
  CHECK(contract_full(a, x) == doctest::Approx(3.0 / (2.0 * std::sqrt(2.0))));
  CHECK(contract_full(a, x) == doctest::Approx(oracle::contract_full_naive(a, x)));
}

TEST_CASE("single-mode contraction picks out the right fiber") {
  DenseTensor a = counting_tensor();
  BlockVector x{{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}};  // part 1 is ignored
  std::vector<double> v = contract_mode(a, x, 1);
  REQUIRE(v.size() == 2);
  CHECK(v[0] == doctest::Approx(2.0));
  CHECK(v[1] == doctest::Approx(6.0));
}

TEST_CASE("mode contraction matches the naive oracle on random data") {
  DenseTensor a = random_tensor({3, 4, 2}, 11);
  Rng rng(12);
  BlockVector x;
  for (std::size_t n : {3ul, 4ul, 2ul}) {
    std::vector<double> part(n);
    for (double& p : part) p = rng.next_gaussian();
    x.parts.push_back(part);
  }
  for (std::size_t mode = 1; mode <= 3; ++mode) {
    std::vector<double> got = contract_mode(a, x, mode);
    std::vector<double> want = oracle::contract_mode_naive(a, x, mode);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < got.size(); ++i)
      CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
  }
  CHECK(contract_full(a, x) == doctest::Approx(oracle::contract_full_naive(a, x)));
}

TEST_CASE("diagonal tensors and their extraction") {
  DenseTensor d = diag_tensor({3.0, 4.0}, 3);
  CHECK(norm(d) == doctest::Approx(5.0));
  const std::vector<std::size_t> want_dims{2, 2, 2};
  CHECK(d.dims() == want_dims);
  const std::vector<double> want_diag{3.0, 4.0};
  CHECK(extract_diag(d) == want_diag);
  const std::vector<double> want_corners{1.0, 8.0};
  CHECK(extract_diag(counting_tensor()) == want_corners);
}

TEST_CASE("multilinear multiplication matches the naive oracle") {
  DenseTensor a = random_tensor({3, 4, 2}, 21);
  std::vector<Matrix> bs{random_matrix(2, 3, 22), random_matrix(3, 4, 23),
                         random_matrix(2, 2, 24)};
  DenseTensor got = multilinear_multiply(bs, a);
  DenseTensor want = oracle::multilinear_naive(bs, a);
  REQUIRE(got.dims() == want.dims());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("assembly equals the explicit sum of outer products") {
  std::vector<Matrix> factors{random_matrix(4, 2, 31), random_matrix(3, 2, 32),
                              random_matrix(5, 2, 33)};
  std::vector<double> lambda{1.5, -0.5};
  DenseTensor got = assemble(factors, lambda);
  DenseTensor want = oracle::assemble_naive(factors, lambda);
  REQUIRE(got.dims() == want.dims());
  for (std::size_t i = 0; i < got.size(); ++i)
    CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
}

TEST_CASE("tensor arithmetic") {
  DenseTensor a = counting_tensor();
  DenseTensor b = counting_tensor();
  DenseTensor zero = a - b;
  CHECK(norm(zero) == 0.0);
  DenseTensor twice = a + b;
  CHECK(twice[3] == doctest::Approx(8.0));
  DenseTensor scaled = 0.5 * a;
  CHECK(scaled[7] == doctest::Approx(4.0));
}

TEST_CASE("tensor text round trip is exact") {
  DenseTensor a = random_tensor({3, 2, 4}, 77);
  std::ostringstream os;
  write_tensor(os, a);
  std::istringstream is(os.str());
  DenseTensor back = read_tensor(is);
  REQUIRE(back.dims() == a.dims());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(back[i] == a[i]);
}

TEST_CASE("matrix text round trip is exact") {
  Matrix m = random_matrix(5, 3, 78);
  std::ostringstream os;
  write_matrix(os, m);
  std::istringstream is(os.str());
  Matrix back = read_matrix(is);
  REQUIRE(back.rows() == m.rows());
  REQUIRE(back.cols() == m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) CHECK(back(i, j) == m(i, j));
}

TEST_CASE("malformed tensor input is rejected") {
  std::istringstream trailing("3 2 2 2\n1 2\n3 4\n5 6\n7 8\n9\n");
  CHECK_THROWS_AS(read_tensor(trailing), IoError);
  std::istringstream short_data("3 2 2 2\n1 2\n3 4\n");
  CHECK_THROWS_AS(read_tensor(short_data), IoError);
  std::istringstream bad_header("0\n");
  CHECK_THROWS_AS(read_tensor(bad_header), IoError);
}
