#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace dhr {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Absolute tolerance for rank, membership and residual decisions.
inline constexpr double kTol = 1e-9;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Mat identity(Eigen::Index n);
Mat kron(const Mat& a, const Mat& b);
// A (x) 1_n in block layout: block-diagonal with n copies of a.
Mat amplify(const Mat& a, Eigen::Index n);

Vec vec(const Mat& m);
Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols);

double hs_norm(const Mat& m);
double op_norm(const Mat& m);
double min_hermitian_eigenvalue(const Mat& h);
bool is_projection(const Mat& p, double tol = kTol);
bool is_partial_isometry(const Mat& w, double tol = kTol);

// Orthonormal basis (columns) of the kernel of k; singular values below tol count as zero.
Mat nullspace(const Mat& k, double tol = kTol);

// Kernel of a tall system supplied in row blocks. Blocks are folded into an
// upper-triangular factor by Householder QR, so the singular values of the
// stacked matrix are preserved without forming K*K.
class StackedKernel {
 public:
  explicit StackedKernel(Eigen::Index cols);
  void add(const Mat& rows);
  Mat kernel(double tol = kTol) const;
  Eigen::Index cols() const { return cols_; }

 private:
  Eigen::Index cols_;
  Mat r_;
};

// Orthonormal basis of range(m): left singular vectors above tol.
Mat range_basis(const Mat& m, double tol = kTol);
Mat range_projection(const Mat& m, double tol = kTol);

// Partial isometry of the polar decomposition m = w |m|.
Mat polar_part(const Mat& m, double tol = kTol);

struct ScalarFit {
  cplx value;
  double residual;
};
// Best c with m ~ c * unit in Hilbert-Schmidt norm.
ScalarFit scalar_fit(const Mat& m, const Mat& unit);

// Subspace of a matrix space with an orthonormal (Hilbert-Schmidt) basis,
// grown by Gram-Schmidt with one reorthogonalisation pass.
class MatrixSpan {
 public:
  MatrixSpan(Eigen::Index rows, Eigen::Index cols);
  bool try_add(const Mat& m, double tol = kTol);
  double defect(const Mat& m) const;
  Vec coords(const Mat& m) const;
  Mat project(const Mat& m) const;
  Eigen::Index size() const { return static_cast<Eigen::Index>(basis_.size()); }
  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  const std::vector<Mat>& basis() const { return basis_; }
  const Mat& columns() const { return q_; }

 private:
  Eigen::Index rows_, cols_;
  Mat q_;
  std::vector<Mat> basis_;
};

// Deterministic generator so that sweeps and generic elements are reproducible
// independently of the standard library's distribution implementations.
class DetRng {
 public:
  explicit DetRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  double uniform();  // [0, 1)
  double symmetric();  // [-1, 1)
  cplx complex_symmetric();

 private:
  std::uint64_t state_;
};

Mat random_unitary(Eigen::Index n, DetRng& rng);
Mat random_hermitian(Eigen::Index n, DetRng& rng);

std::string describe_shape(const Mat& m);

}  // namespace dhr
