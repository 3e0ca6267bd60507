#include "lfpb/compaction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "lfpb/error.hpp"
#include "lfpb/io.hpp"

namespace lfpb {

Image Decomposition::basis_image(int j) const {
  return column_to_image(basis.col(j), width, height);
}

Decomposition decompose(const LFMatrix& aligned) {
  const Eigen::MatrixXd& M = aligned.data;
  const Eigen::Index m = M.rows();
  const Eigen::Index n = M.cols();
  if (n < 1) throw DataError("decompose: empty matrix");
  if (m < n) {
    throw DataError("decompose: need at least as many pixels as views (" + std::to_string(m) +
                    " < " + std::to_string(n) + ")");
  }
  if (!M.allFinite()) throw DataError("decompose: matrix has non-finite entries");

  // Thin SVD through a QR preconditioner: M = Q R, R = U_r S V^T, U = Q U_r.
  Eigen::MatrixXd U;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd V;
  {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(M);
    const Eigen::MatrixXd R =
        qr.matrixQR().topRows(n).triangularView<Eigen::Upper>().toDenseMatrix();
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(R, Eigen::ComputeFullU | Eigen::ComputeFullV);
    sigma = svd.singularValues();
    V = svd.matrixV();
    Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(m, n);
    Q.applyOnTheLeft(qr.householderQ());
    U.noalias() = Q * svd.matrixU();
  }

  // Fixed sign convention: the largest-magnitude entry of each U column is
  // positive (first such entry on ties).
  for (Eigen::Index j = 0; j < n; ++j) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = std::abs(U(i, j));
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (U(arg, j) < 0.0) {
      U.col(j) = -U.col(j);
      V.col(j) = -V.col(j);
    }
  }

  Decomposition d;
  d.width = aligned.width;
  d.height = aligned.height;
  d.rows = aligned.rows;
  d.cols = aligned.cols;
  d.singular_values = sigma;
  d.basis = U * sigma.asDiagonal();
  d.coefficients = V.transpose();
  return d;
}

LFMatrix reconstruct(const Decomposition& d) {
  LFMatrix out;
  out.data.noalias() = d.basis * d.coefficients;
  out.width = d.width;
  out.height = d.height;
  out.rows = d.rows;
  out.cols = d.cols;
  return out;
}

double residual_energy(const Decomposition& d) {
  return d.singular_values.size() > 1 ? d.singular_values.tail(d.singular_values.size() - 1)
                                            .squaredNorm()
                                      : 0.0;
}

double basis_entropy(const Eigen::Ref<const Eigen::VectorXd>& column) {
  if (column.size() == 0) return 0.0;
  if (!column.allFinite()) throw DataError("basis_entropy: non-finite basis");
  const double lo = column.minCoeff();
  const double hi = column.maxCoeff();
  if (!(hi > lo)) return 0.0;
  std::array<std::size_t, 256> hist{};
  const double scale = 255.0 / (hi - lo);
  for (Eigen::Index i = 0; i < column.size(); ++i) {
    const long q = std::lround((column(i) - lo) * scale);
    ++hist[static_cast<std::size_t>(std::clamp(q, 0L, 255L))];
  }
  const double total = static_cast<double>(column.size());
  double h = 0.0;
  for (std::size_t c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / total;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<double> basis_entropies(const Decomposition& d) {
  std::vector<double> out(d.basis_count(), 0.0);
  const double sigma0 = d.singular_values.size() ? d.singular_values(0) : 0.0;
  for (int j = 0; j < d.basis_count(); ++j) {
    // Bases beyond the numerical rank hold rounding noise only.
    if (d.singular_values(j) <= 1e-12 * sigma0) continue;
    out[j] = basis_entropy(d.basis.col(j));
  }
  return out;
}

Image normalized_basis_image(const Decomposition& d, int j) {
  Image img = d.basis_image(j);
  const auto [lo, hi] = std::minmax_element(img.data.begin(), img.data.end());
  const float a = *lo;
  const float range = *hi - *lo;
  for (float& v : img.data) v = range > 0.0f ? (v - a) / range : 0.0f;
  return img;
}

void export_basis_images(const Decomposition& d, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create directory " + dir.string());
  }
  const std::vector<double> entropy = basis_entropies(d);
  std::ofstream table(dir / "decomposition.txt");
  if (!table) throw IoError("cannot write " + (dir / "decomposition.txt").string());
  for (int j = 0; j < d.basis_count(); ++j) {
    write_png(dir / ("basis_" + std::to_string(j) + ".png"), normalized_basis_image(d, j), 8);
    char line[96];
    std::snprintf(line, sizeof line, "%d %.17g %.17g\n", j, d.singular_values(j), entropy[j]);
    table << line;
  }
  if (!table) throw IoError("failed writing " + (dir / "decomposition.txt").string());
}

}  // namespace lfpb
