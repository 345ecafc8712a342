#include "dhr/presheaf.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <map>

namespace dhr {

namespace {

Mat pseudo_inverse(const Mat& m) { return m.completeOrthogonalDecomposition().pseudoInverse(); }

Eigen::Index numeric_rank(const Mat& m, double tol) {
  if (m.size() == 0) return 0;
  Eigen::BDCSVD<Mat> svd(m);
  Eigen::Index r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > tol) ++r;
  return r;
}

Mat vec_columns(const std::vector<Mat>& ms, Eigen::Index rows) {
  Mat out(rows, static_cast<Eigen::Index>(ms.size()));
  for (std::size_t k = 0; k < ms.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = vec(ms[k]);
  return out;
}

// Action matrix d^2 x s^2 of a map on s x s matrices, from its values on matrix units.
Mat tabulate_action(Eigen::Index s, Eigen::Index d, const std::function<Mat(const Mat&)>& f) {
  return kernels::assemble_columns(d * d, s * s, [&](Eigen::Index c) {
    Mat unit = Mat::Zero(s, s);
    unit(c % s, c / s) = 1.0;
    return vec(f(unit));
  });
}

Mat blockwise(const Mat& x, Eigen::Index in, Eigen::Index out, const std::function<Mat(const Mat&)>& f) {
  if (x.rows() % in != 0 || x.cols() % in != 0) throw Error("blockwise application: shape " + describe_shape(x));
  const Eigen::Index p = x.rows() / in, q = x.cols() / in;
  Mat r(p * out, q * out);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < p; ++i) r.block(i * out, j * out, out, out) = f(x.block(i * in, j * in, in, in));
  return r;
}

Mat random_element(const std::vector<Mat>& basis, DetRng& rng, Eigen::Index size) {
  Mat x = Mat::Zero(size, size);
  for (const auto& b : basis) x += rng.complex_symmetric() * b;
  return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// cocycles

Cocycle cocycle_from_transporters(const TransporterFamily& fam, double tol) {
  const std::size_t n = fam.transports.size();
  for (std::size_t a = 0; a < n; ++a) {
    const Intertwiner v = fam.arrow(a);
    const double u = std::max((v.block.adjoint() * v.block - v.source.unit()).norm(),
                              (v.block * v.block.adjoint() - v.target.unit()).norm());
    if (u > tol)
      throw Error("transporter at " + fam.base.net().site().id(a) + " is not unitary (defect " + std::to_string(u) + ")");
  }
  Cocycle z;
  z.z.assign(n, std::vector<Mat>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) z.z[a][b] = fam.at(a).unitary * fam.at(b).unitary.adjoint();
  return z;
}

bool CocycleReport::ok(double tol) const {
  return identity < tol && diagonal < tol && locality < tol && reproduces < tol;
}

CocycleReport check_cocycle(const Cocycle& z, const TransporterFamily& fam, double tol) {
  (void)tol;
  CocycleReport rep;
  const NetModel& net = fam.base.net();
  const CausalSite& site = net.site();
  const std::size_t n = z.z.size();
  for (std::size_t a = 0; a < n; ++a) {
    rep.diagonal = std::max(rep.diagonal, (z.at(a, a) - fam.at(a).target.unit()).norm());
    for (std::size_t b = 0; b < n; ++b) {
      for (std::size_t c = 0; c < n; ++c)
        rep.identity = std::max(rep.identity, (z.at(a, b) * z.at(b, c) - z.at(a, c)).norm());
      const auto ub = site.upper_bounds({a, b});
      if (ub.empty()) {
        ++rep.pairs_without_bound;
      } else {
        rep.locality = std::max(rep.locality, entry_defect(z.at(a, b), net.local(ub.front())));
      }
    }
    const Region o = fam.support;
    for (Region b : site.spacelike_complement(a))
      for (const auto& x : net.local(b).basis()) {
        const Mat lhs = z.at(o, a) * amplify(x, fam.at(a).target.multiplicity()) * z.at(a, o);
        rep.reproduces = std::max(rep.reproduces, (lhs - fam.base(x)).norm());
      }
  }
  return rep;
}

double cohomology_defect(const TransporterFamily& f, const TransporterFamily& g) {
  const Cocycle z = cocycle_from_transporters(f);
  const Cocycle w = cocycle_from_transporters(g);
  const std::size_t n = z.z.size();
  std::vector<Mat> u(n);
  for (std::size_t a = 0; a < n; ++a) u[a] = g.at(a).unitary * f.at(a).unitary.adjoint();
  double worst = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      worst = std::max(worst, (w.at(a, b) - u[a] * z.at(a, b) * u[b].adjoint()).norm());
  return worst;
}

// ---------------------------------------------------------------------------
// presheaf morphisms

Mat PresheafMorphism::component(Region a, const Mat& x) const {
  const ConcreteAlgebra& comm = net->local_commutant(a);
  const Vec c = comm.coords(x);
  const auto& imgs = components.at(a);
  Mat out = Mat::Zero(size(), size());
  for (Eigen::Index k = 0; k < c.size(); ++k)
    if (c(k) != cplx(0.0)) out += c(k) * imgs[static_cast<std::size_t>(k)];
  return out;
}

Mat PresheafMorphism::lift(Region a, const Mat& x) const {
  return blockwise(x, net->ambient_dim(), size(), [&](const Mat& b) { return component(a, b); });
}

PresheafMorphism extend(const TransporterFamily& fam, kernels::Exec e) {
  const Amplimorphism& rho = fam.base;
  const NetModel& net = rho.net();
  PresheafMorphism out;
  out.net = rho.net_ptr();
  out.multiplicity = rho.multiplicity();
  out.support = fam.support;
  out.unit = rho.unit();
  out.label = rho.label();
  out.components = kernels::map_indices<std::vector<Mat>>(
      fam.transports.size(),
      [&](std::size_t a) {
        const Mat& v = fam.at(a).unitary;
        const Eigen::Index na = fam.at(a).target.multiplicity();
        std::vector<Mat> imgs;
        for (const auto& c : net.local_commutant(a).basis()) imgs.push_back(v.adjoint() * amplify(c, na) * v);
        return imgs;
      },
      e);
  return out;
}

double presheaf_distance(const PresheafMorphism& x, const PresheafMorphism& y) {
  if (x.size() != y.size() || x.components.size() != y.components.size())
    return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t a = 0; a < x.components.size(); ++a)
    for (std::size_t k = 0; k < x.components[a].size(); ++k)
      worst = std::max(worst, (x.components[a][k] - y.components[a][k]).norm());
  return worst;
}

bool PresheafReport::ok(double tol) const {
  return unit < tol && compatibility < tol && localization < tol && homomorphism < tol && codomain < tol &&
         agreement < tol;
}

PresheafReport check_presheaf_morphism(const PresheafMorphism& r, const Amplimorphism& rho, double tol) {
  (void)tol;
  PresheafReport rep;
  const NetModel& net = *r.net;
  const CausalSite& site = net.site();
  const Eigen::Index d = net.ambient_dim();
  const std::size_t n = r.components.size();
  struct Slot {
    double unit = 0, compat = 0, loc = 0, hom = 0, codomain = 0, agree = 0;
  };
  const auto slots = kernels::map_indices<Slot>(n, [&](std::size_t a) {
    Slot s;
    const ConcreteAlgebra& comm = net.local_commutant(a);
    s.unit = (r.component(a, identity(d)) - r.unit).norm();
    for (Region b = 0; b < n; ++b)
      if (b != a && site.leq(a, b))
        for (const auto& x : net.local_commutant(b).basis())
          s.compat = std::max(s.compat, (r.component(a, x) - r.component(b, x)).norm());
    if (a == r.support)
      for (const auto& x : comm.basis())
        s.loc = std::max(s.loc, (r.component(a, x) - amplify(x, r.multiplicity) * r.unit).norm());
    const auto& gens = comm.generators();
    for (std::size_t k = 0; k < comm.basis().size(); ++k) {
      const Mat& x = comm.basis()[k];
      const Mat& rx = r.components[a][k];
      for (const auto& g : gens) s.hom = std::max(s.hom, (r.component(a, x * g) - rx * r.component(a, g)).norm());
      s.hom = std::max(s.hom, (r.component(a, x.adjoint()) - rx.adjoint()).norm());
    }
    if (site.disjoint(a, r.support))
      for (const auto& img : r.components[a]) s.codomain = std::max(s.codomain, entry_defect(img, comm));
    for (Region b : site.spacelike_complement(a))
      for (const auto& x : net.local(b).basis()) s.agree = std::max(s.agree, (r.component(a, x) - rho(x)).norm());
    return s;
  });
  for (const auto& s : slots) {
    rep.unit = std::max(rep.unit, s.unit);
    rep.compatibility = std::max(rep.compatibility, s.compat);
    rep.localization = std::max(rep.localization, s.loc);
    rep.homomorphism = std::max(rep.homomorphism, s.hom);
    rep.codomain = std::max(rep.codomain, s.codomain);
    rep.agreement = std::max(rep.agreement, s.agree);
  }
  return rep;
}

double presheaf_intertwiner_defect(const Mat& t, const PresheafMorphism& r, const PresheafMorphism& s) {
  double worst = 0.0;
  for (std::size_t a = 0; a < r.components.size(); ++a)
    for (std::size_t k = 0; k < r.components[a].size(); ++k)
      worst = std::max(worst, (t * r.components[a][k] - s.components[a][k] * t).norm());
  return worst;
}

std::optional<Amplimorphism> extend_homomorphism(const NetPtr& net, Eigen::Index multiplicity,
                                                 const std::vector<std::pair<Mat, Mat>>& values,
                                                 std::optional<Region> support, std::string label,
                                                 std::string* diagnostic, double tol) {
  const Eigen::Index d = net->ambient_dim();
  const auto& global = net->global();
  MatrixSpan span(d, d);
  std::vector<Mat> xs, ys;
  auto push = [&](const Mat& x, const Mat& y) {
    if (span.size() < global.dim() && span.try_add(x, tol)) {
      xs.push_back(x);
      ys.push_back(y);
    }
  };
  for (const auto& [x, y] : values) push(x, y);
  for (std::size_t i = 0; i < xs.size() && span.size() < global.dim(); ++i)
    for (const auto& [g, h] : values) {
      if (span.size() >= global.dim()) break;
      push(xs[i] * g, ys[i] * h);
    }
  if (span.size() < global.dim()) {
    if (diagnostic)
      *diagnostic = "products of the given values span " + std::to_string(span.size()) + " of " +
                    std::to_string(global.dim()) + " dimensions";
    return std::nullopt;
  }
  const Mat xm = vec_columns(xs, d * d);
  const Mat bm = vec_columns(global.basis(), d * d);
  const Mat coeffs = xm.completeOrthogonalDecomposition().solve(bm);
  const Eigen::Index s = multiplicity * d;
  std::vector<Mat> images;
  for (Eigen::Index k = 0; k < global.dim(); ++k) {
    Mat img = Mat::Zero(s, s);
    for (std::size_t i = 0; i < ys.size(); ++i) img += coeffs(static_cast<Eigen::Index>(i), k) * ys[i];
    images.push_back(std::move(img));
  }
  return Amplimorphism(net, multiplicity, std::move(images), support, std::move(label));
}

double amplimorphism_distance(const Amplimorphism& a, const Amplimorphism& b) {
  if (a.size() != b.size() || a.images().size() != b.images().size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (std::size_t k = 0; k < a.images().size(); ++k) worst = std::max(worst, (a.images()[k] - b.images()[k]).norm());
  return worst;
}

RestrictResult restrict_presheaf(const PresheafMorphism& r, double tol) {
  RestrictResult out;
  const NetModel& net = *r.net;
  const CausalSite& site = net.site();
  const Eigen::Index d = net.ambient_dim();
  std::vector<std::pair<Mat, Mat>> values;
  for (Region a = 0; a < site.size(); ++a) {
    const auto comp = site.spacelike_complement(a);
    if (comp.empty()) {
      out.diagnostic = "no region spacelike to " + site.id(a);
      return out;
    }
    const Region b = comp.front(), alt = comp.back();
    if (a == 0) values.emplace_back(identity(d), r.component(b, identity(d)));
    for (const auto& x : net.local(a).basis())
      out.choice_discrepancy = std::max(out.choice_discrepancy, (r.component(b, x) - r.component(alt, x)).norm());
    for (const auto& g : net.local(a).generators()) values.emplace_back(g, r.component(b, g));
  }
  std::string diag;
  out.rho = extend_homomorphism(r.net, r.multiplicity, values, r.support, r.label, &diag, tol);
  if (!out.rho) out.diagnostic = diag;
  return out;
}

bool RoundTrip::ok(double tol) const {
  return restrict_extend < tol && extend_restrict < tol && choice_discrepancy < tol;
}

RoundTrip functor_round_trip(const TransporterFamily& fam, double tol) {
  RoundTrip rt;
  const PresheafMorphism ext = extend(fam);
  const RestrictResult rr = restrict_presheaf(ext, tol);
  if (!rr.rho) throw Error("restriction failed: " + rr.diagnostic);
  rt.choice_discrepancy = rr.choice_discrepancy;
  rt.restrict_extend = amplimorphism_distance(*rr.rho, fam.base);
  TransporterFamily again = fam;
  again.base = *rr.rho;
  again.transports[fam.support] = {*rr.rho, rr.rho->unit()};
  rt.extend_restrict = presheaf_distance(extend(again), ext);
  return rt;
}

PresheafMorphism presheaf_tensor(const TransporterFamily& f, const TransporterFamily& g) {
  return extend(tensor_families(f, g));
}

double tensor_identity_defect(const TransporterFamily& f, const TransporterFamily& g) {
  const PresheafMorphism ef = extend(f), eg = extend(g), efg = presheaf_tensor(f, g);
  const NetModel& net = f.base.net();
  double worst = 0.0;
  for (Region c : net.site().common_complement({f.support, g.support}))
    for (const auto& x : net.local_commutant(c).basis())
      worst = std::max(worst, (efg.component(c, x) - ef.lift(c, eg.component(c, x))).norm());
  return worst;
}

// ---------------------------------------------------------------------------
// faithfulness

FaithfulnessReport check_faithfulness(const TransporterFamily& fam, double tol) {
  FaithfulnessReport rep;
  const Amplimorphism& rho = fam.base;
  const NetModel& net = rho.net();
  const CausalSite& site = net.site();
  const Eigen::Index d = net.ambient_dim();
  rep.faithful_kernel = numeric_rank(vec_columns(rho.images(), rho.size() * rho.size()), tol) == net.global().dim();
  const PresheafMorphism ext = extend(fam);
  for (Region a = 0; a < site.size(); ++a) {
    const auto& imgs = ext.components[a];
    if (numeric_rank(vec_columns(imgs, rho.size() * rho.size()), tol) != static_cast<Eigen::Index>(imgs.size()))
      rep.kernel_failures.push_back(a);
  }
  rep.doubly_kernel = rep.kernel_failures.empty();
  // central supports of tau_o(1): in A(o) (x) M_n for double faithfulness, in
  // A(b)' (x) M_n for b spacelike to o for faithfulness
  std::map<std::pair<Region, Eigen::Index>, ConcreteAlgebra> amplified_commutants;
  rep.faithful_central = true;
  for (Region o = 0; o < site.size(); ++o) {
    const Amplimorphism& tau = fam.at(o).target;
    const Eigen::Index n = tau.multiplicity();
    const Mat cs = central_support(tau.unit(), amplified_algebra(net.local(o), n), tol);
    if ((cs - identity(n * d)).norm() > tol) rep.central_failures.push_back(o);
    for (Region b : site.spacelike_complement(o)) {
      auto key = std::make_pair(b, n);
      auto it = amplified_commutants.find(key);
      if (it == amplified_commutants.end())
        it = amplified_commutants.emplace(key, amplified_algebra(net.local_commutant(b), n)).first;
      const Mat cb = central_support(tau.unit(), it->second, tol);
      if ((cb - identity(n * d)).norm() > tol) rep.faithful_central = false;
    }
  }
  rep.doubly_central = rep.central_failures.empty();
  return rep;
}

// ---------------------------------------------------------------------------
// presheaf-left inverses

std::vector<Region> PresheafLeftInverse::regions() const {
  std::vector<Region> out;
  for (Region a = 0; a < actions.size(); ++a)
    if (actions[a]) out.push_back(a);
  return out;
}

Mat PresheafLeftInverse::component(Region a, const Mat& b) const {
  if (!defined_at(a)) throw Error("presheaf-left inverse has no component at region " + std::to_string(a));
  const Eigen::Index d = base.ambient_dim();
  if (b.rows() != base.size() || b.cols() != base.size())
    throw Error("presheaf-left inverse: argument has shape " + describe_shape(b));
  return unvec(*actions[a] * vec(b), d, d);
}

Mat PresheafLeftInverse::apply(Region a, const Mat& x) const {
  return blockwise(x, base.size(), base.ambient_dim(), [&](const Mat& b) { return component(a, b); });
}

PresheafLeftInverseResult presheaf_left_inverse_simple(const TransporterFamily& gamma_fam, double tol) {
  PresheafLeftInverseResult out;
  const Amplimorphism& gamma = gamma_fam.base;
  const NetModel& net = gamma.net();
  const CausalSite& site = net.site();
  const Eigen::Index d = net.ambient_dim(), s = gamma.size();
  const PresheafMorphism ext = extend(gamma_fam);
  PresheafLeftInverse phi{gamma, gamma_fam.support, std::vector<std::optional<Mat>>(site.size())};
  struct Slot {
    std::optional<Mat> action;
    double image_defect = 0.0;
  };
  const auto regions = site.spacelike_complement(gamma_fam.support);
  const auto slots = kernels::map_indices<Slot>(regions.size(), [&](std::size_t i) {
    const Region a = regions[i];
    const ConcreteAlgebra& comm = net.local_commutant(a);
    const Mat y = vec_columns(ext.components[a], s * s);
    if (numeric_rank(y, tol) != comm.dim()) return Slot{};
    const Mat pinv = pseudo_inverse(y);
    Slot slot;
    slot.action = vec_columns(comm.basis(), d * d) * pinv;
    for (const auto& r : reduced_algebra_basis(comm, gamma.multiplicity(), gamma.unit(), tol))
      slot.image_defect = std::max(slot.image_defect, (vec(r) - y * (pinv * vec(r))).norm());
    return slot;
  });
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (!slots[i].action) {
      out.failing_regions.push_back(regions[i]);
      if (!out.diagnostic.empty()) out.diagnostic += "; ";
      out.diagnostic += "extension not injective on A(" + site.id(regions[i]) + ")'";
      continue;
    }
    phi.actions[regions[i]] = slots[i].action;
    out.image_defect = std::max(out.image_defect, slots[i].image_defect);
  }
  if (out.failing_regions.empty()) out.value = std::move(phi);
  return out;
}

PresheafLeftInverseResult presheaf_left_inverse_finite_stats(const TransporterFamily& rho_fam, int d,
                                                             const TransporterFamily& gamma_fam, const Intertwiner& v,
                                                             double tol) {
  if (d < 1) throw Error("presheaf_left_inverse_finite_stats: d must be positive");
  PresheafLeftInverseResult out;
  if (rho_fam.support != gamma_fam.support) {
    out.diagnostic = "rho and gamma are localized in different regions";
    return out;
  }
  auto inv = presheaf_left_inverse_simple(gamma_fam, tol);
  if (!inv.value) return inv;
  std::optional<PresheafMorphism> lead;
  if (d > 1) {
    TransporterFamily power = rho_fam;
    for (int k = 2; k < d; ++k) power = tensor_families(rho_fam, power);
    lead = extend(power);
  }
  const Amplimorphism& rho = rho_fam.base;
  const Eigen::Index s = rho.size(), dim = rho.ambient_dim();
  const Mat vb = v.block;
  PresheafLeftInverse phi{rho, rho_fam.support, std::vector<std::optional<Mat>>(inv.value->actions.size())};
  for (Region a : inv.value->regions()) {
    phi.actions[a] = tabulate_action(s, dim, [&](const Mat& b) -> Mat {
      const Mat lifted = lead ? lead->lift(a, b) : b;
      return inv.value->component(a, vb.adjoint() * lifted * vb);
    });
  }
  out.value = std::move(phi);
  out.image_defect = inv.image_defect;
  return out;
}

bool PresheafLeftInverseReport::ok(double tol) const {
  return normalization < tol && restriction < tol && module < tol && positivity < tol;
}

PresheafLeftInverseReport check_presheaf_left_inverse(const PresheafLeftInverse& phi, const PresheafMorphism& rho,
                                                      double tol) {
  PresheafLeftInverseReport rep;
  const NetModel& net = *rho.net;
  const CausalSite& site = net.site();
  const Eigen::Index d = net.ambient_dim(), s = phi.base.size();
  const Mat& unit = phi.base.unit();
  const auto regions = phi.regions();
  struct Slot {
    double norm = 0, restriction = 0, module = 0, positivity = 0;
  };
  const auto slots = kernels::map_indices<Slot>(regions.size(), [&](std::size_t i) {
    Slot slot;
    const Region a = regions[i];
    const ConcreteAlgebra& comm = net.local_commutant(a);
    slot.norm = (phi.component(a, unit) - identity(d)).norm();
    for (Region b : regions)
      if (b != a && site.leq(a, b))
        for (const auto& x : reduced_algebra_basis(net.local_commutant(b), phi.base.multiplicity(), unit, tol))
          slot.restriction = std::max(slot.restriction, (phi.component(a, x) - phi.component(b, x)).norm());
    const auto reduced = reduced_algebra_basis(comm, phi.base.multiplicity(), unit, tol);
    std::vector<Mat> gens_img;
    for (const auto& g : comm.generators()) gens_img.push_back(rho.component(a, g));
    for (const auto& x : reduced) {
      const Mat px = phi.component(a, x);
      for (std::size_t k = 0; k < gens_img.size(); ++k) {
        const Mat& g = comm.generators()[k];
        slot.module = std::max(slot.module, (phi.component(a, x * gens_img[k]) - px * g).norm());
        slot.module = std::max(slot.module, (phi.component(a, gens_img[k] * x) - g * px).norm());
      }
    }
    DetRng rng(0x1f83d9abfb41bd6bULL + a);
    for (int t = 0; t < 4; ++t) {
      Mat x(2 * s, 2 * s);
      for (Eigen::Index bi = 0; bi < 2; ++bi)
        for (Eigen::Index bj = 0; bj < 2; ++bj) x.block(bi * s, bj * s, s, s) = random_element(reduced, rng, s);
      x /= std::max(1.0, x.norm());
      const Mat img = phi.apply(a, x.adjoint() * x);
      slot.positivity = std::max(slot.positivity, -min_hermitian_eigenvalue(0.5 * (img + img.adjoint())));
    }
    return slot;
  });
  for (const auto& s2 : slots) {
    rep.normalization = std::max(rep.normalization, s2.norm);
    rep.restriction = std::max(rep.restriction, s2.restriction);
    rep.module = std::max(rep.module, s2.module);
    rep.positivity = std::max(rep.positivity, s2.positivity);
  }
  return rep;
}

AssociatedLeftInverse associated_left_inverse(const PresheafLeftInverse& phi, double tol) {
  AssociatedLeftInverse out;
  const Amplimorphism& rho = phi.base;
  const NetModel& net = rho.net();
  const CausalSite& site = net.site();
  const Eigen::Index d = net.ambient_dim(), s = rho.size(), n = rho.multiplicity();
  const auto defined = phi.regions();
  const Eigen::Index target = static_cast<Eigen::Index>(reduced_algebra_basis(net.global(), n, rho.unit(), tol).size());

  // local data: regions c with a spacelike b where phi is defined
  struct Local {
    Region c, b;
    std::vector<Mat> xs, values;
  };
  std::vector<Local> locals;
  for (Region c = 0; c < site.size(); ++c) {
    std::vector<Region> bs;
    for (Region b : defined)
      if (site.disjoint(b, c)) bs.push_back(b);
    if (bs.empty()) continue;
    Local l{c, bs.front(), reduced_algebra_basis(net.local(c), n, rho.unit(), tol), {}};
    for (const auto& x : l.xs) {
      l.values.push_back(phi.component(l.b, x));
      for (std::size_t k = 1; k < bs.size(); ++k)
        out.consistency = std::max(out.consistency, (phi.component(bs[k], x) - l.values.back()).norm());
    }
    locals.push_back(std::move(l));
  }
  if (locals.empty()) {
    out.diagnostic = "no region admits a spacelike region where the presheaf-left inverse is defined";
    return out;
  }

  MatrixSpan span(s, s);
  std::vector<Mat> spanning, values;
  auto push = [&](const Mat& x, const Mat& v) {
    if (span.size() < target && span.try_add(x, tol)) {
      spanning.push_back(x);
      values.push_back(v);
    }
  };
  const auto& gb = net.global().basis();
  std::vector<Mat> rho_gb;
  for (const auto& g : gb) rho_gb.push_back(rho(g));
  for (const auto& l : locals)
    for (std::size_t i = 0; i < l.xs.size(); ++i) push(l.xs[i], l.values[i]);
  for (const auto& l : locals)
    for (std::size_t i = 0; i < l.xs.size() && span.size() < target; ++i)
      for (std::size_t k = 0; k < gb.size() && span.size() < target; ++k) {
        push(l.xs[i] * rho_gb[k], l.values[i] * gb[k]);
        push(rho_gb[k] * l.xs[i], gb[k] * l.values[i]);
      }
  if (span.size() < target) {
    out.diagnostic = "local components and the module property fix phi on " + std::to_string(span.size()) + " of " +
                     std::to_string(target) + " dimensions";
    return out;
  }
  const Mat pinv = pseudo_inverse(vec_columns(spanning, s * s));
  const Mat action = vec_columns(values, d * d) * pinv;
  // the remaining data must agree with the fitted map
  auto predict = [&](const Mat& x) { return unvec(action * vec(x), d, d); };
  const auto& gg = net.global_generators();
  for (const auto& l : locals)
    for (std::size_t i = 0; i < l.xs.size(); ++i) {
      out.consistency = std::max(out.consistency, (predict(l.xs[i]) - l.values[i]).norm());
      for (const auto& g : gg) {
        const Mat rg = rho(g);
        out.consistency = std::max(out.consistency, (predict(l.xs[i] * rg) - l.values[i] * g).norm());
        out.consistency = std::max(out.consistency, (predict(rg * l.xs[i]) - g * l.values[i]).norm());
      }
    }
  if (out.consistency > tol) {
    out.diagnostic = "inconsistent components (residual " + std::to_string(out.consistency) + ")";
    return out;
  }
  out.value = LeftInverse{rho, action};
  return out;
}

PresheafLeftInverse pli_compose(const PresheafLeftInverse& phi, const PresheafLeftInverse& psi) {
  const Amplimorphism base = tensor_objects(phi.base, psi.base);
  PresheafLeftInverse out{base, base.support().value_or(phi.support),
                          std::vector<std::optional<Mat>>(std::max(phi.actions.size(), psi.actions.size()))};
  for (Region a : phi.regions())
    if (psi.defined_at(a))
      out.actions[a] = tabulate_action(base.size(), base.ambient_dim(),
                                       [&](const Mat& b) -> Mat { return psi.component(a, phi.apply(a, b)); });
  return out;
}

PresheafLeftInverse pli_convex(const DirectSum& sum, const PresheafLeftInverse& phi1, const PresheafLeftInverse& phi2,
                               double s) {
  if (s < 0.0 || s > 1.0) throw Error("convex parameter must lie in [0, 1]");
  const Mat w1 = sum.w1.block, w2 = sum.w2.block;
  PresheafLeftInverse out{sum.alpha, sum.alpha.support().value_or(phi1.support),
                          std::vector<std::optional<Mat>>(phi1.actions.size())};
  for (Region a : phi1.regions())
    if (phi2.defined_at(a))
      out.actions[a] = tabulate_action(sum.alpha.size(), sum.alpha.ambient_dim(), [&](const Mat& b) -> Mat {
        return s * phi1.component(a, w1.adjoint() * b * w1) + (1.0 - s) * phi2.component(a, w2.adjoint() * b * w2);
      });
  return out;
}

PresheafCompressResult pli_compress(const PresheafLeftInverse& phi, const Intertwiner& v, double tol) {
  PresheafCompressResult out;
  const Mat vb = v.block;
  const Mat e = vb * vb.adjoint();
  PresheafLeftInverse res{v.source, phi.support, std::vector<std::optional<Mat>>(phi.actions.size())};
  for (Region a : phi.regions()) {
    const Mat gate = phi.component(a, e);
    Eigen::BDCSVD<Mat> svd(gate);
    if (svd.singularValues().minCoeff() < tol) {
      out.closed_gates.push_back(a);
      continue;
    }
    const Mat inv = gate.inverse();
    res.actions[a] = tabulate_action(v.source.size(), v.source.ambient_dim(),
                                     [&](const Mat& c) -> Mat { return inv * phi.component(a, vb * c * vb.adjoint()); });
  }
  if (!out.closed_gates.empty()) {
    out.diagnostic = "subobject left inverse undefined: the component of Phi(E) is not invertible at " +
                     std::to_string(out.closed_gates.size()) + " regions";
    return out;
  }
  out.value = std::move(res);
  return out;
}

double left_inverse_distance(const LeftInverse& a, const LeftInverse& b, double tol) {
  if (a.base.size() != b.base.size()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (const auto& x : reduced_algebra_basis(a.base.net().global(), a.base.multiplicity(), a.base.unit(), tol))
    worst = std::max(worst, (a.generator(x) - b.generator(x)).norm());
  return worst;
}

// ---------------------------------------------------------------------------
// homogeneity and membership

std::vector<Region> HomogeneityReport::failing() const {
  std::vector<Region> out;
  for (const auto& r : regions)
    if (!r.ok) out.push_back(r.region);
  return out;
}

namespace {

bool self_symmetry_is_sign(const TransporterFamily& fam, double tol) {
  const ScalarFit fit = scalar_fit(symmetry(fam, fam, tol).eps.block, tensor_objects(fam.base, fam.base).unit());
  return fit.residual < tol && std::abs(std::abs(fit.value) - 1.0) < tol;
}

// Presheaf-left inverse of the family rebased at a, through the simple or the
// finite-statistics route.
PresheafLeftInverseResult region_left_inverse(const TransporterFamily& fam, const TransporterFamily& fa, Region a,
                                              bool simple, const std::optional<Witness>& witness, std::string& route,
                                              double tol) {
  PresheafLeftInverseResult res;
  if (simple) {
    route = "simple";
    return presheaf_left_inverse_simple(fa, tol);
  }
  if (!witness) {
    route = "none";
    res.diagnostic = "no finite-statistics witness";
    return res;
  }
  route = "finite-statistics";
  const int d = witness->d;
  TransporterFamily power = fa;
  Intertwiner w = fam.arrow(a);
  for (int k = 1; k < d; ++k) {
    power = tensor_families(fa, power);
    w = tensor_arrows(fam.arrow(a), w);
  }
  const Intertwiner moved{witness->gamma, power.base, w.block * witness->v.block};
  auto sf = subobject_family(power, moved, tol);
  if (!sf.family) {
    res.diagnostic = "witness not localizable at " + fam.base.net().site().id(a) + ": " + sf.diagnostic;
    return res;
  }
  return presheaf_left_inverse_finite_stats(fa, d, *sf.family, *sf.embedding, tol);
}

struct SummandRoute {
  TransporterFamily family;
  Intertwiner embedding;  // in (summand base, rho)
  bool simple = false;
  std::optional<Witness> witness;
};

// Equal-weight combination of the summands' presheaf-left inverses, each
// transported to a together with its embedding.
PresheafLeftInverseResult direct_sum_left_inverse(const TransporterFamily& fam, const TransporterFamily& fa, Region a,
                                                  const std::vector<SummandRoute>& summands, double tol) {
  PresheafLeftInverseResult res;
  std::vector<PresheafLeftInverse> parts;
  std::vector<Mat> embeddings;
  for (std::size_t k = 0; k < summands.size(); ++k) {
    const SummandRoute& s = summands[k];
    std::string route;
    auto part = region_left_inverse(s.family, rebase(s.family, a), a, s.simple, s.witness, route, tol);
    if (!part.value) {
      res.diagnostic = "summand " + std::to_string(k) + " (" + route + "): " + part.diagnostic;
      return res;
    }
    parts.push_back(std::move(*part.value));
    embeddings.push_back(fam.arrow(a).block * s.embedding.block * s.family.arrow(a).block.adjoint());
  }
  const double weight = 1.0 / static_cast<double>(parts.size());
  PresheafLeftInverse out{fa.base, a, std::vector<std::optional<Mat>>(parts.front().actions.size())};
  for (Region c : parts.front().regions()) {
    if (!std::all_of(parts.begin(), parts.end(), [&](const PresheafLeftInverse& p) { return p.defined_at(c); }))
      continue;
    out.actions[c] = tabulate_action(fa.base.size(), fa.base.ambient_dim(), [&](const Mat& b) -> Mat {
      Mat sum = Mat::Zero(fa.base.ambient_dim(), fa.base.ambient_dim());
      for (std::size_t k = 0; k < parts.size(); ++k)
        sum += weight * parts[k].component(c, embeddings[k].adjoint() * b * embeddings[k]);
      return sum;
    });
  }
  res.value = std::move(out);
  return res;
}

HomogeneityReport homogeneity_with(const TransporterFamily& fam, bool simple, const std::optional<Witness>& witness,
                                   double tol, const std::vector<SummandRoute>* summands = nullptr) {
  HomogeneityReport rep;
  const CausalSite& site = fam.base.net().site();
  for (Region a = 0; a < site.size(); ++a) {
    HomogeneityRegion r;
    r.region = a;
    try {
      const TransporterFamily fa = rebase(fam, a);
      PresheafLeftInverseResult res;
      if (summands) {
        r.route = "direct-sum";
        res = direct_sum_left_inverse(fam, fa, a, *summands, tol);
      } else {
        res = region_left_inverse(fam, fa, a, simple, witness, r.route, tol);
      }
      if (res.value) {
        const auto check = check_presheaf_left_inverse(*res.value, extend(fa), tol);
        r.ok = check.ok(tol);
        if (!r.ok) r.diagnostic = "presheaf-left inverse axioms fail";
      } else {
        r.diagnostic = res.diagnostic;
      }
    } catch (const Error& e) {
      r.diagnostic = e.what();
    }
    rep.regions.push_back(std::move(r));
  }
  rep.homogeneous = rep.failing().empty();
  return rep;
}

}  // namespace

HomogeneityReport check_homogeneous(const TransporterFamily& fam, int d_max, double tol) {
  if (self_symmetry_is_sign(fam, tol)) return homogeneity_with(fam, true, std::nullopt, tol);
  const StatisticsReport stats = classify_finite_statistics(fam, d_max, tol);
  if (stats.decomposed && stats.summands.size() > 1 &&
      std::all_of(stats.summands.begin(), stats.summands.end(),
                  [](const SummaryStatistics& s) { return s.family && s.witness; })) {
    std::vector<SummandRoute> routes;
    for (const auto& s : stats.summands)
      routes.push_back({*s.family, s.embedding, s.witness->d == 1, s.witness});
    return homogeneity_with(fam, false, std::nullopt, tol, &routes);
  }
  std::optional<Witness> w;
  if (stats.summands.size() == 1 && stats.summands.front().witness) w = stats.summands.front().witness;
  return homogeneity_with(fam, false, w, tol);
}

MembershipReport check_relevant_membership(const TransporterFamily& fam, int d_max, double tol) {
  MembershipReport rep;
  rep.statistics = classify_finite_statistics(fam, d_max, tol);
  for (const auto& s : rep.statistics.summands) {
    MembershipSummand m;
    m.witness = s.witness;
    if (!s.witness) m.evidence.push_back("no finite-statistics witness with d <= " + std::to_string(d_max));
    if (s.witness && s.witness->gamma_family) {
      m.gamma_faithfulness = check_faithfulness(*s.witness->gamma_family, tol);
      if (!m.gamma_faithfulness->doubly_faithful()) m.evidence.push_back("gamma not doubly faithful");
      if (!m.gamma_faithfulness->consistent())
        m.evidence.push_back("kernel and central-support faithfulness tests disagree");
    } else if (s.witness) {
      m.evidence.push_back("gamma has no local transporters");
    }
    if (s.family && !s.witness) {
      const FaithfulnessReport own = check_faithfulness(*s.family, tol);
      if (!own.doubly_faithful()) m.evidence.push_back("summand not doubly faithful");
    }
    if (s.family) {
      const bool simple = s.witness && s.witness->d == 1;
      m.homogeneity = homogeneity_with(*s.family, simple, s.witness, tol);
      if (!m.homogeneity->homogeneous) m.evidence.push_back("not homogeneous");
    }
    m.member = s.witness && m.gamma_faithfulness && m.gamma_faithfulness->doubly_faithful();
    if (m.member) m.evidence.push_back("d=" + std::to_string(s.witness->d) + " witness with doubly faithful gamma");
    const bool hom_fs = s.witness.has_value() && m.homogeneity && m.homogeneity->homogeneous;
    m.equivalence_consistent = hom_fs == m.member;
    rep.summands.push_back(std::move(m));
  }
  rep.member = rep.statistics.decomposed && !rep.summands.empty() &&
               std::all_of(rep.summands.begin(), rep.summands.end(), [](const MembershipSummand& m) { return m.member; });
  return rep;
}

}  // namespace dhr
