#include <doctest.h>

#include <cstring>
#include <sstream>

#include "helpers.hpp"
#include "memmo/container.hpp"
#include "memmo/kernels.hpp"

using namespace memmo;
using namespace memmo::testing;

namespace {

bool BitwiseEqual(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("serial and parallel kernels agree bit for bit") {
  Rng rng(1);
  for (const auto [n, m, d] : {std::tuple{1, 1, 1}, {7, 3, 5}, {64, 129, 12}, {300, 2, 420}}) {
    const Matrix a = RandomMatrix(n, d, rng), b = RandomMatrix(m, d, rng);
    CHECK(BitwiseEqual(SquaredDistances(a, b, Exec::kSerial), SquaredDistances(a, b, Exec::kParallel)));
    CHECK(BitwiseEqual(RbfGram(a, b, 0.7, 1.3, Exec::kSerial), RbfGram(a, b, 0.7, 1.3, Exec::kParallel)));
    const Matrix lower = RandomMatrix(d, d, rng).triangularView<Eigen::Lower>();
    const Vector c = RandomMatrix(d, 1, rng);
    CHECK(BitwiseEqual(QuadraticForms(a, c, lower, Exec::kSerial), QuadraticForms(a, c, lower, Exec::kParallel)));
  }
}

TEST_CASE("kernels match naive evaluation") {
  Rng rng(2);
  const Matrix a = RandomMatrix(9, 4, rng), b = RandomMatrix(6, 4, rng);
  const Matrix d2 = SquaredDistances(a, b, Exec::kSerial);
  const Matrix k = RbfGram(a, b, 0.5, 2.0, Exec::kSerial);
  for (int i = 0; i < 9; ++i) {
    for (int j = 0; j < 6; ++j) {
      const double naive = (a.row(i) - b.row(j)).squaredNorm();
      CHECK(d2(i, j) == doctest::Approx(naive).epsilon(1e-14));
      CHECK(k(i, j) == doctest::Approx(2.0 * std::exp(-naive / 0.5)).epsilon(1e-14));
    }
  }
  const Matrix lower = RandomMatrix(4, 4, rng).triangularView<Eigen::Lower>();
  const Vector c = RandomMatrix(4, 1, rng);
  const Vector q = QuadraticForms(a, c, lower, Exec::kSerial);
  for (int i = 0; i < 9; ++i) {
    const Vector diff = a.row(i).transpose() - c;
    CHECK(q[i] == doctest::Approx(diff.dot(lower.transpose() * lower * diff)).epsilon(1e-12));
  }
}

TEST_CASE("kernels reject mismatched widths") {
  CHECK_THROWS_AS(SquaredDistances(Matrix::Zero(2, 3), Matrix::Zero(2, 4)), InputError);
  CHECK_THROWS_AS(RbfGram(Matrix::Zero(2, 3), Matrix::Zero(2, 3), 0.0, 1.0), InputError);
}

TEST_CASE("containers round-trip bit-exactly") {
  Rng rng(3);
  Container c;
  c.header["kind"] = "test";
  c.header["value"] = 0.1;
  Matrix m = RandomMatrix(5, 3, rng);
  m(0, 0) = -0.0;
  m(1, 1) = 1e-310;
  c.Add("m", m);
  c.Add("empty", Matrix(0, 4));
  std::stringstream buf;
  WriteContainer(buf, c);
  const Container back = ReadContainer(buf);
  CHECK(back.header["kind"] == "test");
  CHECK(BitwiseEqual(back.Get("m"), m));
  CHECK(back.Get("empty").cols() == 4);
  CHECK_FALSE(back.Has("missing"));
  CHECK_THROWS_AS(back.Get("missing"), InputError);

  TempDir dir("container");
  SaveContainer(dir.path() / "c.bin", c);
  CHECK(BitwiseEqual(LoadContainer(dir.path() / "c.bin").Get("m"), m));
}

TEST_CASE("corrupt containers are rejected") {
  Container c;
  c.Add("m", Matrix::Ones(2, 2));
  std::stringstream buf;
  WriteContainer(buf, c);
  std::string bytes = buf.str();

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  std::stringstream s1(bad_magic);
  CHECK_THROWS_AS(ReadContainer(s1), ConfigError);

  std::stringstream s2(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(ReadContainer(s2), ConfigError);

  std::string bad_version = bytes;
  bad_version[8] = 99;
  std::stringstream s3(bad_version);
  CHECK_THROWS_AS(ReadContainer(s3), ConfigError);
}
