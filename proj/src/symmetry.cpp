#include "dhr/symmetry.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dhr {

Mat flip(Eigen::Index n, Eigen::Index m) {
  if (n < 1 || m < 1) throw Error("flip: sizes must be positive");
  Mat t = Mat::Zero(n * m, n * m);
  for (Eigen::Index j1 = 0; j1 < n; ++j1)
    for (Eigen::Index j2 = 0; j2 < m; ++j2) t(j2 + m * j1, j1 + n * j2) = 1.0;
  return t;
}

double flip_relation_defect(Eigen::Index n, Eigen::Index m, Eigen::Index n1, Eigen::Index m1) {
  // A: C^n -> C^m, B: C^n1 -> C^m1; A (x) B in the layout with the first factor fastest is kron(B, A).
  double worst = 0.0;
  for (Eigen::Index a = 0; a < m * n; ++a)
    for (Eigen::Index b = 0; b < m1 * n1; ++b) {
      Mat ea = Mat::Zero(m, n), eb = Mat::Zero(m1, n1);
      ea(a % m, a / m) = 1.0;
      eb(b % m1, b / m1) = 1.0;
      worst = std::max(worst, (flip(m, m1) * kron(eb, ea) - kron(ea, eb) * flip(n, n1)).norm());
    }
  return worst;
}

Intertwiner flip_arrow(const Amplimorphism& rho, const Amplimorphism& sigma) {
  const Amplimorphism rs = tensor_objects(rho, sigma);
  const Amplimorphism sr = tensor_objects(sigma, rho);
  Mat t = kron(flip(rho.multiplicity(), sigma.multiplicity()), identity(rho.ambient_dim())) * rs.unit();
  return {rs, sr, std::move(t)};
}

std::vector<TransportPair> spacelike_pairs(const CausalSite& site) {
  std::vector<TransportPair> out;
  for (Region a = 0; a < site.size(); ++a)
    for (Region b = 0; b < site.size(); ++b)
      if (site.disjoint(a, b)) out.push_back({a, b});
  return out;
}

Intertwiner symmetry_at(const TransporterFamily& f, const TransporterFamily& g, TransportPair p) {
  const Intertwiner u = f.arrow(p.rho_region);
  const Intertwiner v = g.arrow(p.sigma_region);
  const Intertwiner uv = tensor_arrows(u, v);
  const Intertwiner theta = flip_arrow(u.target, v.target);
  const Intertwiner back = tensor_arrows(adjoint(v), adjoint(u));
  return compose(compose(back, theta), uv);
}

SymmetryResult symmetry(const TransporterFamily& f, const TransporterFamily& g, double tol) {
  const auto pairs = spacelike_pairs(f.base.net().site());
  if (pairs.empty()) throw Error("symmetry: the site has no pair of spacelike regions");
  SymmetryResult out;
  out.primary = pairs.front();
  out.secondary = pairs.back();
  out.eps = symmetry_at(f, g, out.primary);
  const Intertwiner check = symmetry_at(f, g, out.secondary);
  out.discrepancy = (out.eps.block - check.block).norm();
  if (out.discrepancy > tol)
    throw Error("symmetry depends on the transport configuration: discrepancy " + std::to_string(out.discrepancy));
  return out;
}

std::vector<Intertwiner> perm_generators(const Amplimorphism& rho, const Intertwiner& eps, int n) {
  std::vector<Intertwiner> gens;
  for (int k = 1; k < n; ++k) {
    const Intertwiner left = unit_arrow(tensor_power(rho, k - 1));
    const Intertwiner right = unit_arrow(tensor_power(rho, n - k - 1));
    gens.push_back(tensor_arrows(tensor_arrows(left, eps), right));
  }
  return gens;
}

double PermRelationReport::worst() const { return std::max({involution, braid, distant}); }

PermRelationReport check_perm_relations(const std::vector<Intertwiner>& gens) {
  PermRelationReport rep;
  for (std::size_t i = 0; i < gens.size(); ++i) {
    const Mat& u = gens[i].block;
    rep.involution = std::max(rep.involution, (u * u - gens[i].source.unit()).norm());
    if (i + 1 < gens.size()) {
      const Mat& w = gens[i + 1].block;
      rep.braid = std::max(rep.braid, (u * w * u - w * u * w).norm());
    }
    for (std::size_t j = i + 2; j < gens.size(); ++j) {
      const Mat& w = gens[j].block;
      rep.distant = std::max(rep.distant, (u * w - w * u).norm());
    }
  }
  return rep;
}

Intertwiner symmetrizer(const Amplimorphism& rho, const Intertwiner& eps, int d, SymKind kind, kernels::Exec e) {
  if (d < 1) throw Error("symmetrizer: d must be positive");
  if (d == 1) return unit_arrow(rho);
  const auto gens = perm_generators(rho, eps, d);
  std::vector<std::vector<int>> perms;
  std::vector<int> p(static_cast<std::size_t>(d));
  std::iota(p.begin(), p.end(), 0);
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  const Mat unit = gens.front().source.unit();
  // each permutation via its bubble-sort word: p = s_{w_r} ... s_{w_1}
  auto terms = kernels::map_indices<Mat>(
      perms.size(),
      [&](std::size_t idx) {
        std::vector<int> a = perms[idx];
        std::vector<int> word;
        for (bool swapped = true; swapped;) {
          swapped = false;
          for (int k = 1; k < d; ++k)
            if (a[k - 1] > a[k]) {
              std::swap(a[k - 1], a[k]);
              word.push_back(k);
              swapped = true;
            }
        }
        Mat m = unit;
        for (auto it = word.rbegin(); it != word.rend(); ++it) m = m * gens[static_cast<std::size_t>(*it - 1)].block;
        const double sign = (kind == SymKind::antisymmetric && word.size() % 2 == 1) ? -1.0 : 1.0;
        return Mat(sign * m);
      },
      e);
  double fact = 1.0;
  for (int k = 2; k <= d; ++k) fact *= k;
  Mat sum = kernels::tree_sum(std::move(terms), e) / fact;
  return {gens.front().source, gens.front().source, std::move(sum)};
}

Mat LeftInverse::generator(const Mat& b) const {
  const Eigen::Index d = base.ambient_dim();
  if (b.rows() != base.size() || b.cols() != base.size())
    throw Error("left inverse: argument has shape " + describe_shape(b));
  return unvec(action * vec(b), d, d);
}

Mat LeftInverse::apply(const Mat& x) const {
  const Eigen::Index s = base.size(), d = base.ambient_dim();
  if (x.rows() % s != 0 || x.cols() % s != 0) throw Error("left inverse: shape " + describe_shape(x));
  const Eigen::Index p = x.rows() / s, q = x.cols() / s;
  Mat out(p * d, q * d);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < p; ++i) out.block(i * d, j * d, d, d) = generator(x.block(i * s, j * s, s, s));
  return out;
}

LeftInverse tabulate_left_inverse(const Amplimorphism& rho, const std::function<Mat(const Mat&)>& phi,
                                  kernels::Exec e) {
  const Eigen::Index s = rho.size(), d = rho.ambient_dim();
  Mat action = kernels::assemble_columns(
      d * d, s * s,
      [&](Eigen::Index c) {
        Mat unit = Mat::Zero(s, s);
        unit(c % s, c / s) = 1.0;
        const Mat img = phi(unit);
        if (img.rows() != d || img.cols() != d) throw Error("left inverse: generator returned " + describe_shape(img));
        return vec(img);
      },
      e);
  return {rho, std::move(action)};
}

namespace {

Mat checked_inverse(const Mat& m, const std::string& what) {
  Eigen::BDCSVD<Mat> svd(m);
  if (svd.singularValues().size() == 0 || svd.singularValues().minCoeff() < kTol) throw Error(what + " is not invertible");
  return m.inverse();
}

}  // namespace

LeftInverse left_inverse_from_conjugate(const Amplimorphism& rho, const Amplimorphism& rho_bar, const Mat& r) {
  const Mat rr = r.adjoint() * r;
  if (rr.norm() < kTol) throw Error("R+R = 0");
  const Mat inv = checked_inverse(rr, "R+R");
  return tabulate_left_inverse(rho, [&](const Mat& b) -> Mat { return inv * r.adjoint() * rho_bar.lift(b) * r; });
}

LeftInverseResult left_inverse_simple(const Amplimorphism& gamma, double tol) {
  const NetModel& net = gamma.net();
  const Eigen::Index d = gamma.ambient_dim();
  const Eigen::Index rank = range_basis(gamma.unit(), tol).cols();
  if (rank != d)
    return {std::nullopt, "gamma(1) has rank " + std::to_string(rank) + ", an isometry from H needs rank " +
                              std::to_string(d)};
  std::string diag;
  auto w = find_isometry_onto(gamma.unit(), net.global(), 1, &diag, tol);
  if (!w) return {std::nullopt, "no isometry with entries in A onto gamma(1): " + diag};
  const Mat wm = *w;
  const auto& g = net.global();
  Mat coords(g.dim(), g.dim());
  for (Eigen::Index k = 0; k < g.dim(); ++k)
    coords.col(k) = g.coords(wm.adjoint() * gamma.images()[static_cast<std::size_t>(k)] * wm);
  Eigen::BDCSVD<Mat> svd(coords);
  if (svd.singularValues().minCoeff() < tol) return {std::nullopt, "gamma is not injective on A"};
  const Mat inv = coords.inverse();
  LeftInverse phi = tabulate_left_inverse(gamma, [&](const Mat& b) -> Mat {
    return g.element(inv * g.coords(wm.adjoint() * b * wm));
  });
  return {std::move(phi), ""};
}

LeftInverse left_inverse_from_witness(const Amplimorphism& rho, int d, const Intertwiner& v, const LeftInverse& phi) {
  const Amplimorphism lead = tensor_power(rho, d - 1);
  const Mat vb = v.block;
  return tabulate_left_inverse(rho, [&](const Mat& b) -> Mat {
    return phi.generator(vb.adjoint() * lead.lift(b) * vb);
  });
}

LeftInverse transport_left_inverse(const LeftInverse& phi, const Intertwiner& u) {
  const Mat ub = u.block;
  return tabulate_left_inverse(u.target, [&](const Mat& b) -> Mat { return phi.generator(ub.adjoint() * b * ub); });
}

LeftInverse li_compose(const LeftInverse& phi, const LeftInverse& psi) {
  const Amplimorphism rs = tensor_objects(phi.base, psi.base);
  return tabulate_left_inverse(rs, [&](const Mat& b) -> Mat { return psi.generator(phi.apply(b)); });
}

LeftInverse li_convex(const DirectSum& sum, const LeftInverse& phi1, const LeftInverse& phi2, double s) {
  if (s < 0.0 || s > 1.0) throw Error("convex parameter must lie in [0, 1]");
  const Mat w1 = sum.w1.block, w2 = sum.w2.block;
  return tabulate_left_inverse(sum.alpha, [&](const Mat& b) -> Mat {
    return s * phi1.generator(w1.adjoint() * b * w1) + (1.0 - s) * phi2.generator(w2.adjoint() * b * w2);
  });
}

CompressResult li_compress(const LeftInverse& phi, const Intertwiner& v, double tol) {
  CompressResult out;
  const Mat vb = v.block;
  out.gate = phi.generator(vb * vb.adjoint());
  Eigen::BDCSVD<Mat> svd(out.gate);
  if (svd.singularValues().minCoeff() < tol) {
    out.diagnostic = "subobject left inverse undefined: Phi(E) is not invertible";
    return out;
  }
  const Mat inv = out.gate.inverse();
  out.value = tabulate_left_inverse(v.source, [&](const Mat& c) -> Mat { return inv * phi.generator(vb * c * vb.adjoint()); });
  return out;
}

std::vector<Mat> reduced_algebra_basis(const ConcreteAlgebra& alg, Eigen::Index n, const Mat& p, double tol) {
  const Eigen::Index d = alg.ambient_dim();
  MatrixSpan span(n * d, n * d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      Mat e = Mat::Zero(n, n);
      e(i, j) = 1.0;
      for (const auto& b : alg.basis()) span.try_add(p * kron(e, b) * p, tol);
    }
  return span.basis();
}

bool LeftInverseReport::ok(double tol) const {
  return normalization < tol && inversion < tol && module < tol && star < tol && positivity < tol;
}

LeftInverseReport check_left_inverse(const LeftInverse& phi, double tol) {
  LeftInverseReport rep;
  const Amplimorphism& rho = phi.base;
  const auto& g = rho.net().global();
  const Eigen::Index d = rho.ambient_dim(), s = rho.size();
  rep.normalization = (phi.generator(rho.unit()) - identity(d)).norm();
  for (std::size_t k = 0; k < g.basis().size(); ++k)
    rep.inversion = std::max(rep.inversion, (phi.generator(rho.images()[k]) - g.basis()[k]).norm());
  const auto reduced = reduced_algebra_basis(g, rho.multiplicity(), rho.unit(), tol);
  const auto& gens = rho.net().global_generators();
  std::vector<Mat> gen_images;
  for (const auto& h : gens) gen_images.push_back(rho(h));
  const auto worst = kernels::map_indices<std::pair<double, double>>(reduced.size(), [&](std::size_t k) {
    const Mat& b = reduced[k];
    const Mat pb = phi.generator(b);
    double module = 0.0;
    for (std::size_t i = 0; i < gens.size(); ++i) {
      module = std::max(module, (phi.generator(b * gen_images[i]) - pb * gens[i]).norm());
      module = std::max(module, (phi.generator(gen_images[i] * b) - gens[i] * pb).norm());
    }
    return std::make_pair(module, (phi.generator(b.adjoint()) - pb.adjoint()).norm());
  });
  for (const auto& [m, st] : worst) {
    rep.module = std::max(rep.module, m);
    rep.star = std::max(rep.star, st);
  }
  // 2-positivity on deterministic samples from M_2((A (x) M_n)_{rho(1)})
  DetRng rng(0x510e527fade682d1ULL);
  for (int t = 0; t < 8; ++t) {
    Mat x = Mat::Zero(2 * s, 2 * s);
    for (Eigen::Index bi = 0; bi < 2; ++bi)
      for (Eigen::Index bj = 0; bj < 2; ++bj)
        for (const auto& b : reduced) x.block(bi * s, bj * s, s, s) += rng.complex_symmetric() * b;
    x /= std::max(1.0, x.norm());
    const Mat img = phi.apply(x.adjoint() * x);
    rep.positivity = std::max(rep.positivity, -min_hermitian_eigenvalue(0.5 * (img + img.adjoint())));
  }
  return rep;
}

double faithfulness_margin(const LeftInverse& phi, double tol) {
  const Amplimorphism& rho = phi.base;
  const Eigen::Index d = rho.ambient_dim(), s = rho.size();
  // tr phi(X) = tr(Omega^T X) with Omega = unvec(sum of the diagonal rows of the action)
  Vec w = Vec::Zero(s * s);
  for (Eigen::Index i = 0; i < d; ++i) w += phi.action.row(i + d * i).transpose();
  const Mat omega_t = unvec(w, s, s).transpose();
  const auto reduced = reduced_algebra_basis(rho.net().global(), rho.multiplicity(), rho.unit(), tol);
  const auto m = static_cast<Eigen::Index>(reduced.size());
  Mat q(s * s, m), q2(s * s, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    q.col(k) = vec(reduced[static_cast<std::size_t>(k)]);
    q2.col(k) = vec(reduced[static_cast<std::size_t>(k)] * omega_t);
  }
  const Mat gram = q.adjoint() * q2;
  return min_hermitian_eigenvalue(0.5 * (gram + gram.adjoint()));
}

double family_axiom_i_defect(const LeftInverse& phi, const Intertwiner& x, const Intertwiner& t, const Intertwiner& s) {
  const Intertwiner rho1 = unit_arrow(phi.base);
  const Mat lt = tensor_arrows(rho1, t).block;
  const Mat ls = tensor_arrows(rho1, s).block;
  const Mat lhs = phi.apply(lt * x.block * ls.adjoint());
  const Mat rhs = t.block * phi.apply(x.block) * s.block.adjoint();
  return (lhs - rhs).norm();
}

double family_axiom_ii_defect(const LeftInverse& phi, const Intertwiner& x, const Amplimorphism& sigma,
                              const Amplimorphism& pi) {
  const Mat lhs = phi.apply(tensor_arrows(x, unit_arrow(pi)).block);
  const Mat inner = phi.apply(x.block);
  const Mat rhs = amplify(inner, pi.multiplicity()) * sigma.lift(pi.unit());
  return (lhs - rhs).norm();
}

double adjoint_property_defect(const LeftInverse& phi, const Mat& r) {
  return (phi.apply(r).adjoint() - phi.apply(r.adjoint())).norm();
}

double schwarz_min_eigenvalue(const LeftInverse& phi, const Mat& r) {
  const Mat m = phi.apply(r.adjoint() * r) - phi.apply(r.adjoint()) * phi.apply(r);
  return min_hermitian_eigenvalue(0.5 * (m + m.adjoint()));
}

double SymmetryAxiomReport::worst() const {
  return std::max({naturality, adjoint, cocycle, inverse, normalization.value_or(0.0), discrepancy});
}

SymmetryAxiomReport check_symmetry_axioms(const TransporterFamily& f, const TransporterFamily& g,
                                          const TransporterFamily& h, double tol) {
  SymmetryAxiomReport rep;
  const SymmetryResult fg = symmetry(f, g, tol);
  const Intertwiner& eps = fg.eps;
  rep.discrepancy = fg.discrepancy;
  const Intertwiner gf = symmetry(g, f, tol).eps;
  rep.adjoint = (eps.block.adjoint() - gf.block).norm();
  rep.inverse = (gf.block * eps.block - eps.source.unit()).norm();

  const std::size_t n = f.transports.size();
  const auto nat = kernels::map_indices<double>(n, [&](std::size_t a) {
    const Region b = (a + 1) % n;
    const Intertwiner moved = symmetry(rebase(f, a), rebase(g, b), tol).eps;
    const Mat lhs = moved.block * tensor_arrows(f.arrow(a), g.arrow(b)).block;
    const Mat rhs = tensor_arrows(g.arrow(b), f.arrow(a)).block * eps.block;
    return (lhs - rhs).norm();
  });
  rep.naturality = *std::max_element(nat.begin(), nat.end());

  const TransporterFamily hg = tensor_families(h, g);
  const Mat lhs = symmetry(f, hg, tol).eps.block;
  const Mat rhs = tensor_arrows(unit_arrow(h.base), eps).block *
                  tensor_arrows(symmetry(f, h, tol).eps, unit_arrow(g.base)).block;
  rep.cocycle = (lhs - rhs).norm();

  if (f.base.net().site().disjoint(f.support, g.support))
    rep.normalization = (eps.block - flip_arrow(f.base, g.base).block).norm();
  return rep;
}

double multiplicativity_defect(const LeftInverse& phi, const TransporterFamily& f, const LeftInverse& psi,
                               const TransporterFamily& g) {
  const TransporterFamily fg = tensor_families(f, g);
  const LeftInverse both = li_compose(phi, psi);
  const Mat lhs = both.apply(symmetry(fg, fg).eps.block);
  const Intertwiner a{f.base, f.base, phi.apply(symmetry(f, f).eps.block)};
  const Intertwiner b{g.base, g.base, psi.apply(symmetry(g, g).eps.block)};
  return (lhs - tensor_arrows(a, b).block).norm();
}

StatisticsParameter statistics_parameter(const LeftInverse& phi, const Intertwiner& eps) {
  const ScalarFit fit = scalar_fit(phi.apply(eps.block), phi.base.unit());
  return {fit.value, fit.residual};
}

LeftInverse composed_power(const LeftInverse& phi, int d) {
  if (d < 1) throw Error("composed_power: d must be positive");
  if (d == 1) return phi;
  return li_compose(phi, composed_power(phi, d - 1));
}

double dhr_rhs(double lambda, int d) {
  double v = 1.0;
  for (int k = 1; k < d; ++k) v *= (1.0 - k * lambda) / (k + 1);
  return v;
}

FormulaCheck dhr_formula_check(const LeftInverse& phi, const Intertwiner& eps, int d) {
  FormulaCheck out;
  out.d = d;
  const StatisticsParameter lam = statistics_parameter(phi, eps);
  const Intertwiner a = symmetrizer(phi.base, eps, d, SymKind::antisymmetric);
  const LeftInverse psi = composed_power(phi, d);
  const Mat val = psi.generator(a.block);
  const ScalarFit fit = scalar_fit(val, identity(phi.base.ambient_dim()));
  out.lhs = fit.value;
  out.lhs_residual = fit.residual;
  out.rhs = dhr_rhs(lam.lambda.real(), d);
  out.residual = std::abs(out.lhs - cplx(out.rhs)) + std::abs(lam.lambda.imag());
  return out;
}

SimpleReport check_simple(const Amplimorphism& gamma, const Intertwiner& eps, const std::optional<LeftInverse>& phi,
                          double tol) {
  SimpleReport rep;
  auto is_sign = [&](cplx v) { return std::abs(std::abs(v.real()) - 1.0) < tol && std::abs(v.imag()) < tol; };
  const Amplimorphism sq = tensor_objects(gamma, gamma);
  rep.eps_fit = scalar_fit(eps.block, sq.unit());
  rep.eps_says = rep.eps_fit.residual < tol && is_sign(rep.eps_fit.value);
  rep.square_endomorphisms = static_cast<Eigen::Index>(intertwiner_space(sq, sq, tol).size());
  rep.square_says = rep.square_endomorphisms == 1;
  bool consistent = rep.eps_says == rep.square_says;
  if (phi) {
    rep.phi_test = statistics_parameter(*phi, eps);
    rep.phi_says = rep.phi_test->residual < tol && is_sign(rep.phi_test->lambda);
    consistent = consistent && rep.phi_says == rep.eps_says;
  }
  rep.consistent = consistent;
  rep.simple = rep.eps_says;
  if (rep.simple) rep.sign = rep.eps_fit.value.real() > 0 ? 1 : -1;
  if (!consistent && check_irreducibility(gamma.net().global(), tol))
    throw Error("simplicity tests disagree on an irreducible net");
  return rep;
}

std::vector<Mat> minimal_projections(const Amplimorphism& rho, double tol) {
  const auto basis = intertwiner_space(rho, rho, tol);
  if (basis.size() <= 1) return {rho.unit()};
  DetRng rng(0x9b05688c2b3e6c1fULL);
  Mat h = Mat::Zero(rho.size(), rho.size());
  for (const auto& t : basis) {
    const cplx c = rng.complex_symmetric();
    h += c * t.block + std::conj(c) * t.block.adjoint();
  }
  const Mat q = range_basis(rho.unit(), tol);
  const Mat hr = q.adjoint() * h * q;
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (hr + hr.adjoint()));
  const auto& ev = es.eigenvalues();
  const double gap = 1e-7 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<Mat> out;
  Eigen::Index start = 0;
  for (Eigen::Index i = 1; i <= ev.size(); ++i) {
    if (i == ev.size() || ev(i) - ev(i - 1) > gap) {
      const Mat v = q * es.eigenvectors().middleCols(start, i - start);
      out.push_back(v * v.adjoint());
      start = i;
    }
  }
  return out;
}

namespace {

bool injective(const Amplimorphism& gamma, double tol) {
  const auto& imgs = gamma.images();
  Mat m(gamma.size() * gamma.size(), static_cast<Eigen::Index>(imgs.size()));
  for (std::size_t k = 0; k < imgs.size(); ++k) m.col(static_cast<Eigen::Index>(k)) = vec(imgs[k]);
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues().minCoeff() > tol;
}

void classify_irreducible(SummaryStatistics& s, int d_max, double tol) {
  const TransporterFamily& f = *s.family;
  const Amplimorphism& beta = s.beta;
  const Intertwiner eps1 = symmetry(f, f, tol).eps;
  TransporterFamily fd = f;
  for (int d = 1; d <= d_max && !s.witness; ++d) {
    if (d > 1) fd = tensor_families(f, fd);
    const Intertwiner epsd = d == 1 ? eps1 : symmetry(fd, fd, tol).eps;
    for (SymKind kind : {SymKind::antisymmetric, SymKind::symmetric}) {
      const Intertwiner p = symmetrizer(beta, eps1, d, kind);
      if (p.block.norm() < tol) continue;
      const auto sub = subobject(p.source, p.block, tol);
      if (!sub.value) {
        s.notes.push_back("d=" + std::to_string(d) + ": " + sub.diagnostic);
        continue;
      }
      const Intertwiner& v = sub.value->v;
      const Amplimorphism& gamma = sub.value->beta;
      const Mat eg = tensor_arrows(adjoint(v), adjoint(v)).block * epsd.block * tensor_arrows(v, v).block;
      const ScalarFit fit = scalar_fit(eg, tensor_objects(gamma, gamma).unit());
      if (fit.residual > tol || std::abs(std::abs(fit.value) - 1.0) > tol) continue;
      if (!injective(gamma, tol)) {
        s.notes.push_back("d=" + std::to_string(d) + ": simple subobject is not faithful");
        continue;
      }
      Witness w{d, kind, gamma, v, fit.value.real() > 0 ? 1 : -1, std::nullopt};
      if (d == 1) {
        w.gamma_family = f;
      } else {
        auto sf = subobject_family(fd, v, tol);
        if (sf.family) {
          w.gamma = sf.family->base;
          w.v = *sf.embedding;
          w.gamma_family = std::move(sf.family);
        } else {
          s.notes.push_back("d=" + std::to_string(d) + ": witness not localizable: " + sf.diagnostic);
        }
      }
      s.witness = std::move(w);
      break;
    }
  }
  if (!s.witness) {
    s.notes.push_back("unclassified for d <= " + std::to_string(d_max));
    return;
  }
  const auto li = left_inverse_simple(s.witness->gamma, tol);
  if (!li.value) {
    s.notes.push_back("no left inverse for the witness: " + li.diagnostic);
    return;
  }
  s.left_inverse = left_inverse_from_witness(beta, s.witness->d, s.witness->v, *li.value);
  s.lambda = statistics_parameter(*s.left_inverse, eps1);
}

}  // namespace

StatisticsReport classify_finite_statistics(const TransporterFamily& fam, int d_max, double tol) {
  StatisticsReport rep;
  rep.d_max = d_max;
  const Amplimorphism& rho = fam.base;
  rep.endomorphism_dim = static_cast<Eigen::Index>(intertwiner_space(rho, rho, tol).size());
  // An object whose self-symmetry is already +-1 is simple; on reducible nets
  // (rho, rho) also contains the central projections, which need not be
  // transportable, so the decomposition is skipped.
  const ScalarFit self = scalar_fit(symmetry(fam, fam, tol).eps.block, tensor_objects(rho, rho).unit());
  const bool simple = self.residual < tol && std::abs(std::abs(self.value) - 1.0) < tol;
  const auto projections = simple ? std::vector<Mat>{rho.unit()} : minimal_projections(rho, tol);
  rep.decomposed = true;
  for (const auto& e : projections) {
    SummaryStatistics s;
    if (projections.size() == 1) {
      s.beta = rho;
      s.embedding = unit_arrow(rho);
      s.family = fam;
    } else {
      const auto sub = subobject(rho, e, tol);
      if (!sub.value) {
        s.notes.push_back("summand not realized: " + sub.diagnostic);
        rep.decomposed = false;
        rep.summands.push_back(std::move(s));
        continue;
      }
      s.beta = sub.value->beta;
      s.embedding = sub.value->v;
      auto sf = subobject_family(fam, s.embedding, tol);
      if (sf.family) {
        s.beta = sf.family->base;
        s.embedding = *sf.embedding;
        s.family = std::move(sf.family);
      } else {
        s.notes.push_back("no transporter family for the summand: " + sf.diagnostic);
      }
    }
    if (s.family) classify_irreducible(s, d_max, tol);
    rep.summands.push_back(std::move(s));
  }
  rep.classified = rep.decomposed && std::all_of(rep.summands.begin(), rep.summands.end(),
                                                 [](const SummaryStatistics& s) { return s.witness.has_value(); });
  return rep;
}

}  // namespace dhr
