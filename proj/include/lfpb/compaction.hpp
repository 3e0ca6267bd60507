#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <vector>

#include "lfpb/image.hpp"
#include "lfpb/lightfield.hpp"

namespace lfpb {

/// Thin SVD of a light field matrix M = U S V^T, stored as basis B = U S
/// (m x n) and coefficients C = V^T (n x n), so that M = B C.
struct Decomposition {
  Eigen::MatrixXd basis;
  Eigen::MatrixXd coefficients;
  Eigen::VectorXd singular_values;  // nonincreasing
  int width = 0;
  int height = 0;
  int rows = 0;
  int cols = 0;

  int basis_count() const { return static_cast<int>(basis.cols()); }
  Image basis_image(int j) const;
};

/// Requires m >= n and finite entries. Column signs are fixed so the
/// largest-magnitude entry of each left singular vector is positive.
Decomposition decompose(const LFMatrix& aligned);

LFMatrix reconstruct(const Decomposition& d);

/// Sum of squared singular values past the principal one.
double residual_energy(const Decomposition& d);

/// Shannon entropy (bits) of a basis after min-max mapping to 0..255 and
/// rounding. A constant basis has zero entropy.
double basis_entropy(const Eigen::Ref<const Eigen::VectorXd>& column);
std::vector<double> basis_entropies(const Decomposition& d);

/// Writes basis_<j>.png (min-max normalized, 8-bit) for every basis plus
/// decomposition.txt with one "index singular_value entropy" line per basis.
void export_basis_images(const Decomposition& d, const std::filesystem::path& dir);

/// Min-max normalization of a basis column to an image in [0, 1].
Image normalized_basis_image(const Decomposition& d, int j);

}  // namespace lfpb
