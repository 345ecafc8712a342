#include "dhr/linalg.hpp"

#include <unsupported/Eigen/KroneckerProduct>

#include <algorithm>
#include <cmath>

namespace dhr {

Mat identity(Eigen::Index n) { return Mat::Identity(n, n); }

Mat kron(const Mat& a, const Mat& b) { return Eigen::kroneckerProduct(a, b).eval(); }

Mat amplify(const Mat& a, Eigen::Index n) {
  Mat out = Mat::Zero(a.rows() * n, a.cols() * n);
  for (Eigen::Index i = 0; i < n; ++i) out.block(i * a.rows(), i * a.cols(), a.rows(), a.cols()) = a;
  return out;
}

Vec vec(const Mat& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Mat unvec(const Vec& v, Eigen::Index rows, Eigen::Index cols) {
  if (v.size() != rows * cols) throw Error("unvec: size mismatch");
  return Eigen::Map<const Mat>(v.data(), rows, cols);
}

double hs_norm(const Mat& m) { return m.norm(); }

double op_norm(const Mat& m) {
  if (m.size() == 0) return 0.0;
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues()(0);
}

double min_hermitian_eigenvalue(const Mat& h) {
  if (h.size() == 0) return 0.0;
  Mat sym = 0.5 * (h + h.adjoint());
  Eigen::SelfAdjointEigenSolver<Mat> es(sym, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

bool is_projection(const Mat& p, double tol) {
  if (p.rows() != p.cols()) return false;
  return (p * p - p).norm() < tol && (p - p.adjoint()).norm() < tol;
}

bool is_partial_isometry(const Mat& w, double tol) {
  Mat ww = w.adjoint() * w;
  return (ww * ww - ww).norm() < tol;
}

Mat nullspace(const Mat& k, double tol) {
  const Eigen::Index n = k.cols();
  if (k.rows() == 0) return identity(n);
  Eigen::BDCSVD<Mat> svd(k, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

StackedKernel::StackedKernel(Eigen::Index cols) : cols_(cols), r_(0, cols) {}

void StackedKernel::add(const Mat& rows) {
  if (rows.cols() != cols_) throw Error("StackedKernel: column mismatch");
  Mat s(r_.rows() + rows.rows(), cols_);
  s << r_, rows;
  if (s.rows() <= cols_) {
    r_ = std::move(s);
    return;
  }
  Eigen::HouseholderQR<Mat> qr(s);
  r_ = qr.matrixQR().topRows(cols_).triangularView<Eigen::Upper>();
}

Mat StackedKernel::kernel(double tol) const { return nullspace(r_, tol); }

Mat range_basis(const Mat& m, double tol) {
  if (m.size() == 0) return Mat(m.rows(), 0);
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  return svd.matrixU().leftCols(rank);
}

Mat range_projection(const Mat& m, double tol) {
  Mat u = range_basis(m, tol);
  return u * u.adjoint();
}

Mat polar_part(const Mat& m, double tol) {
  if (m.size() == 0) return m;
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  Eigen::Index rank = 0;
  while (rank < s.size() && s(rank) > tol) ++rank;
  return svd.matrixU().leftCols(rank) * svd.matrixV().leftCols(rank).adjoint();
}

ScalarFit scalar_fit(const Mat& m, const Mat& unit) {
  const double uu = unit.squaredNorm();
  if (uu == 0.0) return {cplx(0.0), m.norm()};
  cplx c = (unit.array().conjugate() * m.array()).sum() / uu;
  return {c, (m - c * unit).norm()};
}

MatrixSpan::MatrixSpan(Eigen::Index rows, Eigen::Index cols) : rows_(rows), cols_(cols), q_(rows * cols, 0) {}

bool MatrixSpan::try_add(const Mat& m, double tol) {
  if (m.rows() != rows_ || m.cols() != cols_) throw Error("MatrixSpan: shape mismatch");
  const double nrm = m.norm();
  if (nrm <= tol) return false;
  Vec v = vec(m) / nrm;
  for (int pass = 0; pass < 2; ++pass) {
    if (q_.cols() > 0) v -= q_ * (q_.adjoint() * v);
  }
  const double r = v.norm();
  if (r <= tol) return false;
  v /= r;
  q_.conservativeResize(Eigen::NoChange, q_.cols() + 1);
  q_.col(q_.cols() - 1) = v;
  basis_.push_back(unvec(v, rows_, cols_));
  return true;
}

double MatrixSpan::defect(const Mat& m) const {
  Vec v = vec(m);
  if (q_.cols() == 0) return v.norm();
  return (v - q_ * (q_.adjoint() * v)).norm();
}

Vec MatrixSpan::coords(const Mat& m) const { return q_.adjoint() * vec(m); }

Mat MatrixSpan::project(const Mat& m) const {
  if (q_.cols() == 0) return Mat::Zero(rows_, cols_);
  return unvec(q_ * coords(m), rows_, cols_);
}

std::uint64_t DetRng::next() {
  // splitmix64
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double DetRng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double DetRng::symmetric() { return 2.0 * uniform() - 1.0; }

cplx DetRng::complex_symmetric() {
  double re = symmetric();
  double im = symmetric();
  return {re, im};
}

Mat random_hermitian(Eigen::Index n, DetRng& rng) {
  Mat g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.complex_symmetric();
  return 0.5 * (g + g.adjoint());
}

Mat random_unitary(Eigen::Index n, DetRng& rng) {
  Mat g(n, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) g(i, j) = rng.complex_symmetric();
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ() * identity(n);
  return q;
}

std::string describe_shape(const Mat& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace dhr
