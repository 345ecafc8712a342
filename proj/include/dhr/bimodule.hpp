#pragma once

// Objects and arrows of the category of localized amplimorphisms.
//
// Layout: an operator on H (x) C^n is a (d n) x (d n) matrix whose (i, j) block
// of size d is the entry T_ij, i.e. T = sum_ij e_ij (x) T_ij. For a tensor
// product rho sigma the row index is i = i1 + n_rho * i2, with i1 running over
// rho and i2 over sigma, so rho sigma(A) is rho applied entrywise to sigma(A).

#include "dhr/net_model.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dhr {

class Amplimorphism {
 public:
  Amplimorphism() = default;
  // images[k] is the value on net->global().basis()[k].
  Amplimorphism(NetPtr net, Eigen::Index multiplicity, std::vector<Mat> images, std::optional<Region> support = {},
                std::string label = {});
  // Tabulates f on the global basis.
  static Amplimorphism from_map(NetPtr net, Eigen::Index multiplicity, const std::function<Mat(const Mat&)>& f,
                                std::optional<Region> support = {}, std::string label = {});
  static Amplimorphism identity(NetPtr net);
  // A -> w (A (x) 1_k) w*, where w maps H (x) C^k into H (x) C^n.
  static Amplimorphism conjugation(NetPtr net, const Mat& w, Eigen::Index k, std::optional<Region> support = {},
                                   std::string label = {});

  bool valid() const { return static_cast<bool>(data_); }
  const NetModel& net() const { return *data_->net; }
  const NetPtr& net_ptr() const { return data_->net; }
  Eigen::Index multiplicity() const { return data_->n; }
  Eigen::Index ambient_dim() const { return data_->net->ambient_dim(); }
  Eigen::Index size() const { return multiplicity() * ambient_dim(); }
  const std::vector<Mat>& images() const { return data_->images; }
  const std::optional<Region>& support() const { return data_->support; }
  const std::string& label() const { return data_->label; }
  Amplimorphism with_label(std::string label) const;
  Amplimorphism with_support(std::optional<Region> support) const;

  // Value on an element of the global algebra (via its coordinates).
  Mat operator()(const Mat& a) const;
  const Mat& unit() const { return data_->unit; }
  // Entrywise application to a (p d) x (q d) block matrix with entries in A.
  Mat lift(const Mat& x) const;
  bool same_as(const Amplimorphism& other) const { return data_ == other.data_; }
  // True only for the object built by identity(); used to keep unit laws exact.
  bool is_identity() const { return data_->identity; }
  const void* key() const { return data_.get(); }

 private:
  struct Data {
    NetPtr net;
    Eigen::Index n = 1;
    std::vector<Mat> images;
    Mat unit;
    std::optional<Region> support;
    std::string label;
    bool identity = false;
  };
  std::shared_ptr<const Data> data_;
};

struct Intertwiner {
  Amplimorphism source;
  Amplimorphism target;
  Mat block;  // target.size() x source.size()
};

struct AmplimorphismReport {
  double multiplicativity = 0.0;
  double star = 0.0;
  double unit_projection = 0.0;
  double corner = 0.0;
  double localization = 0.0;  // only when a support is claimed
  double local_membership = 0.0;
  bool ok(double tol = kTol) const;
};

// Checks homomorphism identities on basis pairs, the unit, and the claimed support.
AmplimorphismReport check_amplimorphism(const Amplimorphism& rho, double tol = kTol);
double localization_defect(const Amplimorphism& rho, Region o);
bool check_localized(const Amplimorphism& rho, Region o, double tol = kTol);
// Largest distance of rho(A(a)) from A(a) (x) M_n over regions a containing o.
double local_image_defect(const Amplimorphism& rho, Region o);

Intertwiner unit_arrow(const Amplimorphism& rho);
Intertwiner compose(const Intertwiner& s, const Intertwiner& t);  // s after t
Intertwiner adjoint(const Intertwiner& t);
Intertwiner scale(const Intertwiner& t, cplx c);
Intertwiner add(const Intertwiner& a, const Intertwiner& b);

struct IntertwinerReport {
  double source_unit = 0.0;
  double target_unit = 0.0;
  double intertwining = 0.0;
  double entries = 0.0;
  bool ok(double tol = kTol) const;
};
IntertwinerReport check_intertwiner(const Intertwiner& t, double tol = kTol);
bool is_unitary_arrow(const Intertwiner& t, double tol = kTol);
bool is_isometric_arrow(const Intertwiner& t, double tol = kTol);
// Largest distance of the d x d entries of m from the algebra.
double entry_defect(const Mat& m, const ConcreteAlgebra& alg);

Amplimorphism tensor_objects(const Amplimorphism& rho, const Amplimorphism& sigma);
Amplimorphism tensor_power(const Amplimorphism& rho, int n);
// T in (rho1, rho2), S in (sigma1, sigma2) -> T x S in (rho1 sigma1, rho2 sigma2).
Intertwiner tensor_arrows(const Intertwiner& t, const Intertwiner& s);
// Same arrow with the target object replaced (for results computed in a
// different but equal realization of the target).
Intertwiner retarget(const Intertwiner& t, const Amplimorphism& source, const Amplimorphism& target);

struct DirectSum {
  Amplimorphism alpha;
  Intertwiner w1, w2;  // w_i in (rho_i, alpha)
};
DirectSum direct_sum(const Amplimorphism& rho1, const Amplimorphism& rho2);

struct Subobject {
  Amplimorphism beta;
  Intertwiner v;  // v in (beta, rho), v v+ = E
};
struct SubobjectResult {
  std::optional<Subobject> value;
  std::string diagnostic;
};
// Isometry with entries in `alg` onto the range of E (E in alg (x) M_n). The
// search is a deterministic sweep over E * (alg (x) M) followed by polar decomposition.
std::optional<Mat> find_isometry_onto(const Mat& e, const ConcreteAlgebra& alg, Eigen::Index multiplicity,
                                      std::string* diagnostic = nullptr, double tol = kTol);
SubobjectResult subobject(const Amplimorphism& rho, const Mat& e, double tol = kTol);

// [T]_ij: block of size n_rho d of an arrow in (rho sigma, rho tau).
Mat block(const Mat& t, Eigen::Index n_rho, Eigen::Index d, Eigen::Index i, Eigen::Index j);
Mat assemble_blocks(const std::vector<std::vector<Mat>>& blocks);

// Hilbert-Schmidt orthonormal basis of (rho, sigma).
std::vector<Intertwiner> intertwiner_space(const Amplimorphism& rho, const Amplimorphism& sigma, double tol = kTol);
// Reference solver: unknowns e_ij (x) b_k over the global basis.
std::vector<Intertwiner> intertwiner_space_reference(const Amplimorphism& rho, const Amplimorphism& sigma,
                                                     double tol = kTol);

struct UnitarySearch {
  std::optional<Intertwiner> unitary;
  Eigen::Index space_dim = 0;
  std::size_t candidates_tried = 0;
};
UnitarySearch find_unitary_equivalence(const Amplimorphism& rho, const Amplimorphism& sigma, double tol = kTol);

}  // namespace dhr
