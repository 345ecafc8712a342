#pragma once

#include "dhr/causal_site.hpp"
#include "dhr/kernels.hpp"
#include "dhr/linalg.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dhr {

// Unital *-subalgebra of M_d given by a linear basis. Coordinates are taken
// with respect to basis() exactly as stored, so images of amplimorphisms can be
// tabulated against it.
class ConcreteAlgebra {
 public:
  ConcreteAlgebra() = default;

  // Keeps the linearly independent part of `basis` in order; no closure.
  static ConcreteAlgebra from_basis(Eigen::Index dim, const std::vector<Mat>& basis, double tol = kTol);
  // *-algebra with unit generated by `gens`; the basis is Hilbert-Schmidt orthonormal.
  static ConcreteAlgebra generated_by(Eigen::Index dim, const std::vector<Mat>& gens, double tol = kTol);
  static ConcreteAlgebra full(Eigen::Index dim);
  static ConcreteAlgebra scalars(Eigen::Index dim);

  Eigen::Index ambient_dim() const { return d_; }
  Eigen::Index dim() const { return static_cast<Eigen::Index>(basis_.size()); }
  std::size_t declared_size() const { return declared_; }
  const std::vector<Mat>& basis() const { return basis_; }
  // Self-adjoint elements generating the algebra (with the unit).
  const std::vector<Mat>& generators() const { return gens_; }
  bool is_full() const { return dim() == d_ * d_; }
  // Same span with a caller-supplied self-adjoint generating set.
  ConcreteAlgebra with_generators(std::vector<Mat> gens) const;

  Vec coords(const Mat& x) const;
  Mat element(const Vec& c) const;
  double defect(const Mat& x) const;
  bool contains(const Mat& x, double tol = kTol) const { return defect(x) < tol; }
  // Every element of `other` lies in this algebra; returns the largest defect.
  double containment_defect(const ConcreteAlgebra& other) const;

  ValidationReport check_invariants(double tol = kTol) const;

 private:
  void finish(const MatrixSpan& span);
  Eigen::Index d_ = 0;
  std::size_t declared_ = 0;
  std::vector<Mat> basis_;
  std::vector<Mat> gens_;
  Mat q_;  // orthonormal columns, vec(basis_) = q_ * r_
  Mat r_;
};

// Self-adjoint parts (x + x*)/2 and (x - x*)/2i, dropping zeros.
std::vector<Mat> hermitian_parts(const std::vector<Mat>& xs, double tol = kTol);

// Basis of {X : [X, h] = 0 for all h}; the h must be self-adjoint. The unknowns
// are reduced to the block-diagonal commutant of one generic element first.
std::vector<Mat> commutant_basis(Eigen::Index dim, const std::vector<Mat>& hermitian_ops, double tol = kTol,
                                 kernels::Exec e = kernels::default_exec());
// Reference solver: all d^2 matrix units as unknowns, one commutator block per basis element.
std::vector<Mat> commutant_basis_reference(Eigen::Index dim, const std::vector<Mat>& ops, double tol = kTol);

ConcreteAlgebra commutant(const ConcreteAlgebra& alg, double tol = kTol, kernels::Exec e = kernels::default_exec());
ConcreteAlgebra commutant_reference(const ConcreteAlgebra& alg, double tol = kTol);
bool check_irreducibility(const ConcreteAlgebra& alg, double tol = kTol);
ConcreteAlgebra center(const ConcreteAlgebra& alg, double tol = kTol);

// Smallest central projection dominating p.
Mat central_support(const Mat& p, const ConcreteAlgebra& alg, double tol = kTol);

// Same algebra generated by the self-adjoint parts of one generic element when
// they suffice (checked by closing under products); otherwise unchanged.
ConcreteAlgebra with_compact_generators(const ConcreteAlgebra& alg, std::uint64_t seed, double tol = kTol);

// Algebra of A (x) M_n acting on C^d (x) C^n in block layout.
ConcreteAlgebra amplified_algebra(const ConcreteAlgebra& alg, Eigen::Index n);

struct DualityReport {
  Region region = 0;
  Eigen::Index dim_local = 0;
  Eigen::Index dim_complement = 0;
  Eigen::Index dim_dual = 0;
  double defect_local_in_dual = 0.0;
  double defect_dual_in_local = 0.0;
  bool holds = false;
};

struct NetCheckReport {
  ValidationReport site;
  std::vector<Violation> isotony;
  std::vector<Violation> locality;
  std::vector<std::pair<Region, bool>> complement_connected;
  std::vector<DualityReport> duality;
  Eigen::Index global_dim = 0;
  Eigen::Index global_commutant_dim = 0;
  bool irreducible = false;
  double max_duality_defect = 0.0;
  bool ok() const;
};

class NetModel {
 public:
  // When `global_basis` is given it fixes the coordinates used by
  // amplimorphism tables; it must span the algebra generated by the locals.
  static std::shared_ptr<const NetModel> build(CausalSite site, std::vector<ConcreteAlgebra> local,
                                               const std::optional<std::vector<Mat>>& global_basis = std::nullopt,
                                               double tol = kTol);

  const CausalSite& site() const { return site_; }
  Eigen::Index ambient_dim() const { return d_; }
  double tol() const { return tol_; }
  const ConcreteAlgebra& local(Region a) const { return local_.at(a); }
  const ConcreteAlgebra& global() const { return global_; }
  // A(a)', computed once.
  const ConcreteAlgebra& local_commutant(Region a) const { return commutants_.at(a); }
  // Self-adjoint elements generating the global algebra together with 1.
  const std::vector<Mat>& global_generators() const { return global_gens_; }
  // Local basis elements of every region spacelike to all listed regions.
  std::vector<Mat> complement_generators(const std::vector<Region>& regions) const;

 private:
  NetModel() = default;
  CausalSite site_;
  Eigen::Index d_ = 0;
  double tol_ = kTol;
  std::vector<ConcreteAlgebra> local_;
  std::vector<ConcreteAlgebra> commutants_;
  ConcreteAlgebra global_;
  std::vector<Mat> global_gens_;
};

using NetPtr = std::shared_ptr<const NetModel>;

ConcreteAlgebra generated_algebra(const NetModel& net, const std::vector<Region>& regions, double tol = kTol);
DualityReport check_haag_duality(const NetModel& net, Region a, double tol = kTol);
NetCheckReport check_net(const NetModel& net, double tol = kTol);

}  // namespace dhr
