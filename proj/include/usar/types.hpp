#pragma once

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>

namespace usar {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;
using Vec3 = Eigen::Vector3d;

// Sparsity penalty selecting the proximal activation.
enum class Penalty { L1, L0 };

inline const char* penalty_name(Penalty p) { return p == Penalty::L1 ? "l1" : "l0"; }

struct GridShape {
  int rows = 0;
  int cols = 0;

  int pixel_count() const { return rows * cols; }
  bool operator==(const GridShape&) const = default;
};

class UsarError : public std::runtime_error {
 public:
  explicit UsarError(const std::string& what) : std::runtime_error(what) {}
};

class DimensionError : public UsarError {
 public:
  explicit DimensionError(const std::string& what) : UsarError(what) {}
};

// Numerical failure during training or reconstruction (maps to CLI exit 2).
class NumericalError : public UsarError {
 public:
  explicit NumericalError(const std::string& what) : UsarError(what) {}
};

}  // namespace usar
