#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace mctdhf {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;
using CSparse = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;
using RSparse = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Cartesian point; components beyond the problem dimension are zero.
using Point = std::array<double, 3>;

inline constexpr cplx kI{0.0, 1.0};
inline constexpr double kPi = 3.14159265358979323846;

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define MCTDHF_DEFINE_ERROR(Name)              \
  class Name : public Error {                  \
   public:                                     \
    using Error::Error;                        \
  }

MCTDHF_DEFINE_ERROR(NonDivisibleExtent);
MCTDHF_DEFINE_ERROR(BudgetExceeded);
MCTDHF_DEFINE_ERROR(EcsMisaligned);
MCTDHF_DEFINE_ERROR(SingularPotential);
MCTDHF_DEFINE_ERROR(NoConvergence);
MCTDHF_DEFINE_ERROR(Overflow);
MCTDHF_DEFINE_ERROR(SingularDensity);
MCTDHF_DEFINE_ERROR(NonFinite);
MCTDHF_DEFINE_ERROR(TooFewSamples);
MCTDHF_DEFINE_ERROR(ConfigError);
MCTDHF_DEFINE_ERROR(CheckpointError);

#undef MCTDHF_DEFINE_ERROR

}  // namespace mctdhf
