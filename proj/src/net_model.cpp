#include "dhr/net_model.hpp"

#include <algorithm>
#include <cmath>

namespace dhr {

namespace {

Mat matrix_unit(Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  Mat e = Mat::Zero(d, d);
  e(i, j) = 1.0;
  return e;
}

// Two generic self-adjoint combinations of the given self-adjoint elements.
std::vector<Mat> generic_pair(const std::vector<Mat>& herm, std::uint64_t seed) {
  DetRng rng(seed);
  std::vector<Mat> out(2, Mat::Zero(herm.front().rows(), herm.front().cols()));
  for (auto& h : out)
    for (const auto& g : herm) h += (0.5 + rng.uniform()) * g;
  return out;
}

// Span closed under right multiplication by the generators, starting at 1.
MatrixSpan closure(Eigen::Index d, const std::vector<Mat>& gens, double tol) {
  MatrixSpan span(d, d);
  span.try_add(identity(d), tol);
  for (const auto& g : gens) span.try_add(g, tol);
  for (Eigen::Index i = 0; i < span.size(); ++i) {
    const Mat b = span.basis()[static_cast<std::size_t>(i)];
    for (const auto& g : gens) span.try_add(b * g, tol);
  }
  return span;
}

}  // namespace

std::vector<Mat> hermitian_parts(const std::vector<Mat>& xs, double tol) {
  std::vector<Mat> out;
  const cplx two_i(0.0, 2.0);
  for (const auto& x : xs) {
    Mat re = 0.5 * (x + x.adjoint());
    Mat im = (x - x.adjoint()) / two_i;
    for (Mat* h : {&re, &im}) {
      const double n = h->norm();
      if (n > tol) out.push_back(*h / n);
    }
  }
  return out;
}

void ConcreteAlgebra::finish(const MatrixSpan& span) {
  q_ = span.columns();
  Mat b(d_ * d_, dim());
  for (Eigen::Index k = 0; k < dim(); ++k) b.col(k) = vec(basis_[static_cast<std::size_t>(k)]);
  r_ = q_.adjoint() * b;
}

ConcreteAlgebra ConcreteAlgebra::from_basis(Eigen::Index dim, const std::vector<Mat>& basis, double tol) {
  ConcreteAlgebra a;
  a.d_ = dim;
  a.declared_ = basis.size();
  MatrixSpan span(dim, dim);
  for (const auto& b : basis) {
    if (b.rows() != dim || b.cols() != dim) throw Error("basis element has shape " + describe_shape(b));
    if (span.try_add(b, tol)) a.basis_.push_back(b);
  }
  a.finish(span);
  a.gens_ = hermitian_parts(a.basis_, tol);
  return a;
}

ConcreteAlgebra ConcreteAlgebra::generated_by(Eigen::Index dim, const std::vector<Mat>& gens, double tol) {
  std::vector<Mat> herm = hermitian_parts(gens, tol);
  std::vector<Mat> use = herm.size() > 2 ? generic_pair(herm, 0x6a09e667f3bcc909ULL) : herm;
  MatrixSpan span = closure(dim, use, tol);
  // A generic pair usually generates everything; add whatever it missed.
  for (;;) {
    std::vector<Mat> missing;
    for (const auto& h : herm)
      if (span.defect(h) >= tol) missing.push_back(h);
    if (missing.empty()) break;
    use.insert(use.end(), missing.begin(), missing.end());
    span = closure(dim, use, tol);
  }
  ConcreteAlgebra a;
  a.d_ = dim;
  a.basis_ = span.basis();
  a.declared_ = a.basis_.size();
  a.finish(span);
  a.gens_ = use;
  return a;
}

ConcreteAlgebra ConcreteAlgebra::full(Eigen::Index dim) {
  ConcreteAlgebra a;
  a.d_ = dim;
  MatrixSpan span(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j)
    for (Eigen::Index i = 0; i < dim; ++i) {
      Mat e = matrix_unit(dim, i, j);
      span.try_add(e);
      a.basis_.push_back(e);
    }
  a.declared_ = a.basis_.size();
  a.finish(span);
  Mat diag = Mat::Zero(dim, dim);
  Mat shift = Mat::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    diag(i, i) = static_cast<double>(i);
    shift((i + 1) % dim, i) = 1.0;
  }
  a.gens_ = hermitian_parts({diag, shift});
  return a;
}

ConcreteAlgebra ConcreteAlgebra::scalars(Eigen::Index dim) { return from_basis(dim, {identity(dim)}); }

Vec ConcreteAlgebra::coords(const Mat& x) const {
  if (dim() == 0) return Vec(0);
  Vec qx = q_.adjoint() * vec(x);
  return r_.triangularView<Eigen::Upper>().solve(qx);
}

Mat ConcreteAlgebra::element(const Vec& c) const {
  if (c.size() != dim()) throw Error("element: coordinate length mismatch");
  Mat out = Mat::Zero(d_, d_);
  for (Eigen::Index k = 0; k < dim(); ++k) out += c(k) * basis_[static_cast<std::size_t>(k)];
  return out;
}

double ConcreteAlgebra::defect(const Mat& x) const {
  Vec v = vec(x);
  if (dim() == 0) return v.norm();
  return (v - q_ * (q_.adjoint() * v)).norm();
}

double ConcreteAlgebra::containment_defect(const ConcreteAlgebra& other) const {
  double worst = 0.0;
  for (const auto& b : other.basis()) worst = std::max(worst, defect(b / b.norm()));
  return worst;
}

ValidationReport ConcreteAlgebra::check_invariants(double tol) const {
  ValidationReport rep;
  if (declared_ != basis_.size())
    rep.violations.push_back({"independence", std::to_string(declared_) + " supplied, rank " +
                                                  std::to_string(basis_.size())});
  if (!contains(identity(d_), tol)) rep.violations.push_back({"unit", "identity not in span"});
  for (std::size_t i = 0; i < basis_.size(); ++i) {
    const Mat bi = basis_[i] / basis_[i].norm();
    if (!contains(bi.adjoint(), tol)) rep.violations.push_back({"adjoint", "basis " + std::to_string(i)});
    for (std::size_t j = 0; j < basis_.size(); ++j) {
      const Mat bj = basis_[j] / basis_[j].norm();
      if (!contains(bi * bj, tol))
        rep.violations.push_back({"product", "basis " + std::to_string(i) + "*" + std::to_string(j)});
    }
  }
  return rep;
}

std::vector<Mat> commutant_basis(Eigen::Index d, const std::vector<Mat>& ops, double tol, kernels::Exec e) {
  if (ops.empty()) return ConcreteAlgebra::full(d).basis();
  // Every commutant element commutes with h = sum c_k op_k, hence is block
  // diagonal in an eigenbasis of h.
  DetRng rng(0xbb67ae8584caa73bULL);
  Mat h = Mat::Zero(d, d);
  for (const auto& op : ops) h += (0.5 + rng.uniform()) * op / std::max(op.norm(), tol);
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
  const Mat u = es.eigenvectors();
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double gap = 1e-8 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<std::pair<Eigen::Index, Eigen::Index>> clusters;  // (start, size)
  for (Eigen::Index i = 0; i < d; ++i) {
    if (i > 0 && ev(i) - ev(i - 1) <= gap)
      ++clusters.back().second;
    else
      clusters.emplace_back(i, 1);
  }
  struct Unknown {
    Eigen::Index row, col;
  };
  std::vector<Unknown> unknowns;
  for (const auto& [start, size] : clusters)
    for (Eigen::Index q = 0; q < size; ++q)
      for (Eigen::Index p = 0; p < size; ++p) unknowns.push_back({start + p, start + q});
  const auto nu = static_cast<Eigen::Index>(unknowns.size());

  std::vector<Mat> rotated;
  rotated.reserve(ops.size());
  for (const auto& op : ops) rotated.push_back(u.adjoint() * op * u);
  std::vector<std::function<Vec(Eigen::Index)>> constraints;
  for (const auto& g : rotated) {
    constraints.emplace_back([&g, &unknowns, d](Eigen::Index k) {
      // [E_ab, g] = E_ab g - g E_ab
      const auto [a, b] = unknowns[static_cast<std::size_t>(k)];
      Mat c = Mat::Zero(d, d);
      c.row(a) += g.row(b);
      c.col(b) -= g.col(a);
      return vec(c);
    });
  }
  const Mat ker = kernels::constraint_kernel(nu, constraints, d * d, tol, e);
  MatrixSpan span(d, d);
  for (Eigen::Index j = 0; j < ker.cols(); ++j) {
    Mat xt = Mat::Zero(d, d);
    for (Eigen::Index k = 0; k < nu; ++k) xt(unknowns[k].row, unknowns[k].col) = ker(k, j);
    span.try_add(u * xt * u.adjoint(), tol);
  }
  return span.basis();
}

std::vector<Mat> commutant_basis_reference(Eigen::Index d, const std::vector<Mat>& ops, double tol) {
  StackedKernel acc(d * d);
  for (const auto& g : ops) {
    Mat block(d * d, d * d);
    for (Eigen::Index j = 0; j < d; ++j)
      for (Eigen::Index i = 0; i < d; ++i) {
        const Mat e = matrix_unit(d, i, j);
        block.col(j * d + i) = vec(e * g - g * e);
      }
    acc.add(block);
  }
  const Mat ker = acc.kernel(tol);
  MatrixSpan span(d, d);
  for (Eigen::Index j = 0; j < ker.cols(); ++j) span.try_add(unvec(ker.col(j), d, d), tol);
  return span.basis();
}

ConcreteAlgebra commutant(const ConcreteAlgebra& alg, double tol, kernels::Exec e) {
  return ConcreteAlgebra::from_basis(alg.ambient_dim(), commutant_basis(alg.ambient_dim(), alg.generators(), tol, e),
                                     tol);
}

ConcreteAlgebra commutant_reference(const ConcreteAlgebra& alg, double tol) {
  return ConcreteAlgebra::from_basis(alg.ambient_dim(), commutant_basis_reference(alg.ambient_dim(), alg.basis(), tol),
                                     tol);
}

bool check_irreducibility(const ConcreteAlgebra& alg, double tol) { return commutant(alg, tol).dim() == 1; }

ConcreteAlgebra center(const ConcreteAlgebra& alg, double tol) {
  const Eigen::Index d = alg.ambient_dim();
  StackedKernel acc(alg.dim());
  for (const auto& g : alg.generators()) {
    Mat block(d * d, alg.dim());
    for (Eigen::Index k = 0; k < alg.dim(); ++k) {
      const Mat& b = alg.basis()[static_cast<std::size_t>(k)];
      block.col(k) = vec(b * g - g * b);
    }
    acc.add(block);
  }
  const Mat ker = acc.kernel(tol);
  std::vector<Mat> elems;
  for (Eigen::Index j = 0; j < ker.cols(); ++j) elems.push_back(alg.element(ker.col(j)));
  return ConcreteAlgebra::from_basis(d, elems, tol);
}

Mat central_support(const Mat& p, const ConcreteAlgebra& alg, double tol) {
  const Eigen::Index d = alg.ambient_dim();
  if (p.rows() != d || p.cols() != d) throw Error("central_support: shape " + describe_shape(p));
  if (!is_projection(p, tol)) throw Error("central_support: not a projection");
  if (!alg.contains(p, tol)) throw Error("central_support: projection not in algebra");
  // range of [b_1 p, b_2 p, ...] is the closed span of alg * p * H
  Mat m(d, d * alg.dim());
  for (Eigen::Index k = 0; k < alg.dim(); ++k) m.middleCols(k * d, d) = alg.basis()[static_cast<std::size_t>(k)] * p;
  return range_projection(m, tol);
}

ConcreteAlgebra amplified_algebra(const ConcreteAlgebra& alg, Eigen::Index n) {
  const Eigen::Index d = alg.ambient_dim();
  std::vector<Mat> basis;
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      for (const auto& b : alg.basis()) basis.push_back(kron(matrix_unit(n, i, j), b));
  // generators: diagonal copies of the algebra's generators plus the scalar matrix units
  std::vector<Mat> gens;
  for (Eigen::Index i = 0; i < n; ++i)
    for (const auto& g : alg.generators()) gens.push_back(kron(matrix_unit(n, i, i), g));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) gens.push_back(kron(matrix_unit(n, i, j), identity(d)));
  for (Eigen::Index i = 0; i < n; ++i) gens.push_back(kron(matrix_unit(n, i, i), identity(d)));
  return ConcreteAlgebra::from_basis(d * n, basis).with_generators(hermitian_parts(gens));
}

ConcreteAlgebra with_compact_generators(const ConcreteAlgebra& alg, std::uint64_t seed, double tol) {
  const Eigen::Index d = alg.ambient_dim();
  if (alg.dim() <= 2) return alg;
  DetRng rng(seed);
  Mat x = Mat::Zero(d, d);
  for (const auto& b : alg.basis()) x += rng.complex_symmetric() * b;
  const std::vector<Mat> gens = hermitian_parts({x}, tol);
  MatrixSpan span(d, d);
  span.try_add(identity(d), tol);
  std::vector<Mat> words{identity(d)};
  for (std::size_t i = 0; i < words.size() && span.size() < alg.dim(); ++i)
    for (const auto& g : gens) {
      Mat w = words[i] * g;
      if (span.try_add(w, tol)) words.push_back(std::move(w));
    }
  if (span.size() < alg.dim()) return alg;
  return alg.with_generators(gens);
}

ConcreteAlgebra ConcreteAlgebra::with_generators(std::vector<Mat> gens) const {
  ConcreteAlgebra out = *this;
  out.gens_ = std::move(gens);
  return out;
}

bool NetCheckReport::ok() const {
  bool good = site.ok() && isotony.empty() && locality.empty() && irreducible;
  for (const auto& [r, c] : complement_connected) good = good && c;
  for (const auto& d : duality) good = good && d.holds;
  return good;
}

std::shared_ptr<const NetModel> NetModel::build(CausalSite site, std::vector<ConcreteAlgebra> local,
                                                const std::optional<std::vector<Mat>>& global_basis, double tol) {
  if (local.size() != site.size()) throw Error("net: one local algebra per region required");
  if (local.empty()) throw Error("net: empty site");
  std::shared_ptr<NetModel> net(new NetModel());
  net->d_ = local.front().ambient_dim();
  for (const auto& a : local)
    if (a.ambient_dim() != net->d_) throw Error("net: local algebras act on different spaces");
  net->site_ = std::move(site);
  net->tol_ = tol;
  net->local_ = std::move(local);

  std::vector<Mat> all;
  for (const auto& a : net->local_) all.insert(all.end(), a.basis().begin(), a.basis().end());
  ConcreteAlgebra generated = ConcreteAlgebra::generated_by(net->d_, all, tol);
  if (global_basis) {
    ConcreteAlgebra given = ConcreteAlgebra::from_basis(net->d_, *global_basis, tol);
    if (given.dim() != static_cast<Eigen::Index>(global_basis->size()))
      throw Error("net: global basis is linearly dependent");
    if (given.dim() != generated.dim() || given.containment_defect(generated) >= tol)
      throw Error("net: global basis does not span the algebra generated by the local algebras");
    net->global_ = given.with_generators(generated.generators());
  } else {
    net->global_ = generated;
  }
  net->global_gens_ = net->global_.generators();
  net->commutants_ = kernels::map_indices<ConcreteAlgebra>(
      net->local_.size(), [&](std::size_t r) {
        return with_compact_generators(commutant(net->local_[r], tol), 0x6a09e667f3bcc909ULL + r, tol);
      });
  return net;
}

std::vector<Mat> NetModel::complement_generators(const std::vector<Region>& regions) const {
  std::vector<Mat> out;
  for (Region c : site_.common_complement(regions))
    out.insert(out.end(), local_[c].basis().begin(), local_[c].basis().end());
  return out;
}

ConcreteAlgebra generated_algebra(const NetModel& net, const std::vector<Region>& regions, double tol) {
  if (regions.empty()) throw Error("generated_algebra: no regions");
  std::vector<Mat> all;
  for (Region r : regions) all.insert(all.end(), net.local(r).basis().begin(), net.local(r).basis().end());
  return ConcreteAlgebra::generated_by(net.ambient_dim(), all, tol);
}

DualityReport check_haag_duality(const NetModel& net, Region a, double tol) {
  const auto comp = net.site().spacelike_complement(a);
  if (comp.empty()) throw Error("duality: region " + net.site().id(a) + " has empty spacelike complement");
  const ConcreteAlgebra outside = generated_algebra(net, comp, tol);
  const ConcreteAlgebra dual = commutant(outside, tol);
  DualityReport rep;
  rep.region = a;
  rep.dim_local = net.local(a).dim();
  rep.dim_complement = outside.dim();
  rep.dim_dual = dual.dim();
  rep.defect_local_in_dual = dual.containment_defect(net.local(a));
  rep.defect_dual_in_local = net.local(a).containment_defect(dual);
  rep.holds = rep.defect_local_in_dual < tol && rep.defect_dual_in_local < tol;
  return rep;
}

NetCheckReport check_net(const NetModel& net, double tol) {
  NetCheckReport rep;
  const CausalSite& s = net.site();
  rep.site = validate_site(s);
  for (Region a = 0; a < s.size(); ++a)
    for (Region b = 0; b < s.size(); ++b) {
      if (a == b) continue;
      if (s.leq(a, b)) {
        const double defect = net.local(b).containment_defect(net.local(a));
        if (defect >= tol) rep.isotony.push_back({"isotony", s.id(a) + " <= " + s.id(b)});
      }
      if (a < b && s.disjoint(a, b)) {
        double worst = 0.0;
        for (const auto& x : net.local(a).basis())
          for (const auto& y : net.local(b).basis()) worst = std::max(worst, (x * y - y * x).norm());
        if (worst >= tol) rep.locality.push_back({"locality", s.id(a) + " _|_ " + s.id(b)});
      }
    }
  for (Region a = 0; a < s.size(); ++a) rep.complement_connected.emplace_back(a, s.complement_connected(a));
  std::vector<Region> with_complement;
  for (Region a = 0; a < s.size(); ++a)
    if (!s.spacelike_complement(a).empty()) with_complement.push_back(a);
  rep.duality = kernels::map_indices<DualityReport>(
      with_complement.size(), [&](std::size_t i) { return check_haag_duality(net, with_complement[i], tol); });
  for (const auto& d : rep.duality)
    rep.max_duality_defect = std::max({rep.max_duality_defect, d.defect_local_in_dual, d.defect_dual_in_local});
  rep.global_dim = net.global().dim();
  rep.global_commutant_dim = commutant(net.global(), tol).dim();
  rep.irreducible = rep.global_commutant_dim == 1;
  return rep;
}

}  // namespace dhr
