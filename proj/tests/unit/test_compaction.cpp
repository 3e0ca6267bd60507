#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "lfpb/compaction.hpp"
#include "lfpb/error.hpp"

using namespace lfpb;

namespace {

// One-sided (Hestenes) Jacobi: orthogonalize column pairs with plane rotations
// until every pair is orthogonal; the column norms are the singular values.
std::vector<double> jacobi_singular_values(std::vector<std::vector<double>> cols) {
  const std::size_t n = cols.size();
  const std::size_t m = cols.front().size();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double a = 0.0, b = 0.0, c = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          a += cols[p][i] * cols[p][i];
          b += cols[q][i] * cols[q][i];
          c += cols[p][i] * cols[q][i];
        }
        if (std::fabs(c) <= 1e-300) continue;
        off = std::max(off, std::fabs(c) / std::sqrt(a * b));
        const double zeta = (b - a) / (2.0 * c);
        const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double cs = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = cs * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = cols[p][i];
          const double y = cols[q][i];
          cols[p][i] = cs * x - sn * y;
          cols[q][i] = sn * x + cs * y;
        }
      }
    }
    if (off < 1e-15) break;
  }
  std::vector<double> sv;
  for (const auto& c : cols) {
    double s = 0.0;
    for (double v : c) s += v * v;
    sv.push_back(std::sqrt(s));
  }
  std::sort(sv.rbegin(), sv.rend());
  return sv;
}

LFMatrix random_matrix(int m, int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  LFMatrix mat;
  mat.data.resize(m, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < m; ++i) mat.data(i, j) = dist(rng);
  mat.width = 1;
  mat.height = m;
  mat.rows = 1;
  mat.cols = n;
  return mat;
}

}  // namespace

TEST_SUITE("compaction") {
  TEST_CASE("singular values agree with an independent Jacobi routine") {
    std::mt19937 shapes(5);
    for (int trial = 0; trial < 20; ++trial) {
      const int n = 1 + static_cast<int>(shapes() % 8);
      const int m = n + static_cast<int>(shapes() % (13 - n));
      const LFMatrix mat = random_matrix(m, n, 100 + trial);
      std::vector<std::vector<double>> cols(n, std::vector<double>(m));
      for (int j = 0; j < n; ++j)
        for (int i = 0; i < m; ++i) cols[j][i] = mat.data(i, j);
      const std::vector<double> expect = jacobi_singular_values(cols);
      const Decomposition d = decompose(mat);
      REQUIRE(d.singular_values.size() == n);
      for (int j = 0; j < n; ++j) {
        CHECK(std::fabs(d.singular_values(j) - expect[j]) <= 1e-8 * expect[0]);
      }
    }
  }

  TEST_CASE("factorization properties") {
    for (int trial = 0; trial < 10; ++trial) {
      const LFMatrix mat = random_matrix(40 + trial, 9, 300 + trial);
      const Decomposition d = decompose(mat);
      const double scale = mat.data.norm();

      // B C reproduces M.
      CHECK((reconstruct(d).data - mat.data).norm() <= 1e-12 * scale);
      // Singular values nonincreasing and nonnegative.
      for (int j = 0; j + 1 < d.basis_count(); ++j) CHECK(d.singular_values(j) >= d.singular_values(j + 1));
      CHECK(d.singular_values.minCoeff() >= 0.0);
      // C = V^T is orthogonal.
      const Eigen::MatrixXd ctc = d.coefficients * d.coefficients.transpose();
      CHECK((ctc - Eigen::MatrixXd::Identity(9, 9)).norm() < 1e-12);
      // B^T B = S^2.
      const Eigen::MatrixXd btb = d.basis.transpose() * d.basis;
      const Eigen::MatrixXd s2 = d.singular_values.array().square().matrix().asDiagonal();
      CHECK((btb - s2).norm() <= 1e-10 * scale * scale);
      // Total energy and Eckart-Young: the rank-1 error equals the residual.
      CHECK(d.singular_values.squaredNorm() == doctest::Approx(mat.data.squaredNorm()).epsilon(1e-12));
      const Eigen::MatrixXd rank1 = d.basis.col(0) * d.coefficients.row(0);
      CHECK((mat.data - rank1).squaredNorm() == doctest::Approx(residual_energy(d)).epsilon(1e-10));
    }
  }

  TEST_CASE("sign convention: largest-magnitude entry of each basis is positive") {
    const Decomposition d = decompose(random_matrix(30, 6, 9));
    for (int j = 0; j < d.basis_count(); ++j) {
      Eigen::Index arg;
      d.basis.col(j).cwiseAbs().maxCoeff(&arg);
      CHECK(d.basis(arg, j) > 0.0);
    }
    LFMatrix neg = random_matrix(30, 6, 9);
    neg.data = -neg.data;
    const Decomposition dn = decompose(neg);
    for (int j = 0; j < dn.basis_count(); ++j) {
      CHECK((dn.basis.col(j) - d.basis.col(j)).norm() < 1e-10);
      CHECK((dn.coefficients.row(j) + d.coefficients.row(j)).norm() < 1e-10);
    }
  }

  TEST_CASE("scaling the matrix scales the basis and keeps the coefficients") {
    const LFMatrix mat = random_matrix(25, 5, 77);
    LFMatrix scaled = mat;
    scaled.data *= 3.5;
    const Decomposition a = decompose(mat);
    const Decomposition b = decompose(scaled);
    CHECK((b.singular_values - 3.5 * a.singular_values).norm() < 1e-10);
    CHECK((b.basis - 3.5 * a.basis).norm() < 1e-9);
    CHECK((b.coefficients - a.coefficients).norm() < 1e-9);
  }

  TEST_CASE("identical views give a rank-one decomposition") {
    LightField lf(2, 2, 6, 5);
    const Image v = testutil::random_image(6, 5, 4);
    for (auto& view : lf.views) view = v;
    const Decomposition d = decompose(flatten(lf));
    CHECK(residual_energy(d) < 1e-20);
    // The principal coefficients are all equal: the basis is the shared view.
    for (int i = 0; i < 4; ++i) CHECK(std::fabs(d.coefficients(0, i)) == doctest::Approx(0.5));
    CHECK(basis_entropies(d)[1] == 0.0);
  }

  TEST_CASE("rejects degenerate input") {
    CHECK_THROWS_AS(decompose(random_matrix(3, 5, 1)), DataError);
    LFMatrix bad = random_matrix(8, 2, 1);
    bad.data(3, 1) = std::nan("");
    CHECK_THROWS_AS(decompose(bad), DataError);
  }

  TEST_CASE("entropy of simple histograms") {
    CHECK(basis_entropy(Eigen::VectorXd::Constant(50, 2.0)) == 0.0);
    Eigen::VectorXd ramp(256);
    for (int i = 0; i < 256; ++i) ramp(i) = i;
    CHECK(basis_entropy(ramp) == doctest::Approx(8.0));
    Eigen::VectorXd two(10);
    two << 0, 1, 0, 1, 0, 1, 0, 1, 0, 1;
    CHECK(basis_entropy(two) == doctest::Approx(1.0));
    // Affine invariance of the min-max mapping.
    const Eigen::VectorXd r = Eigen::VectorXd::Random(500);
    CHECK(basis_entropy(r) == doctest::Approx(basis_entropy((4.0 * r).array() - 7.0)));
  }

  TEST_CASE("basis export writes one image per basis and a table") {
    testutil::TempDir dir("basis");
    const LightField lf = testutil::random_lightfield(2, 2, 7, 6, 3);
    const Decomposition d = decompose(flatten(lf));
    export_basis_images(d, dir.path());
    for (int j = 0; j < 4; ++j) CHECK(std::filesystem::exists(dir / ("basis_" + std::to_string(j) + ".png")));
    std::ifstream table(dir / "decomposition.txt");
    int index = -1;
    double sv = 0.0;
    double h = 0.0;
    int lines = 0;
    while (table >> index >> sv >> h) {
      CHECK(index == lines);
      CHECK(sv == d.singular_values(lines));
      ++lines;
    }
    CHECK(lines == 4);
    const Image b0 = normalized_basis_image(d, 0);
    CHECK(*std::min_element(b0.data.begin(), b0.data.end()) == 0.0f);
    CHECK(*std::max_element(b0.data.begin(), b0.data.end()) == 1.0f);
  }
}
