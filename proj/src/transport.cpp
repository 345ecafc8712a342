#include "dhr/transport.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

namespace dhr {

const Transport& TransporterFamily::at(Region a) const {
  if (a >= transports.size()) throw Error("transporter family has no entry for region " + std::to_string(a));
  return transports[a];
}

Intertwiner TransporterFamily::arrow(Region a) const { return {base, at(a).target, at(a).unitary}; }

bool FamilyReport::ok(double tol) const { return complete && worst() < tol; }

double FamilyReport::worst() const {
  double w = std::max(base_localization, unit_at_support);
  for (const auto& r : regions) w = std::max({w, r.unitarity, r.intertwining, r.localization});
  return w;
}

FamilyReport validate_family(const TransporterFamily& fam, double tol) {
  FamilyReport rep;
  const auto& site = fam.base.net().site();
  rep.complete = fam.transports.size() == site.size();
  rep.base_localization = localization_defect(fam.base, fam.support);
  if (fam.support < fam.transports.size()) {
    const auto& t = fam.transports[fam.support];
    rep.unit_at_support = t.unitary.rows() == fam.base.size() && t.unitary.cols() == fam.base.size()
                              ? (t.unitary - fam.base.unit()).norm()
                              : 1.0;
  }
  rep.regions = kernels::map_indices<FamilyRegionReport>(fam.transports.size(), [&](std::size_t i) {
    FamilyRegionReport r;
    r.region = i;
    const Intertwiner v = fam.arrow(i);
    if (v.block.rows() != v.target.size() || v.block.cols() != v.source.size()) {
      r.unitarity = r.intertwining = 1.0;
      return r;
    }
    r.unitarity = std::max((v.block.adjoint() * v.block - v.source.unit()).norm(),
                           (v.block * v.block.adjoint() - v.target.unit()).norm());
    const auto ir = check_intertwiner(v, tol);
    r.intertwining = std::max({ir.source_unit, ir.target_unit, ir.intertwining, ir.entries});
    r.localization = localization_defect(v.target, i);
    return r;
  });
  return rep;
}

TransporterFamily trivial_family(const Amplimorphism& rho, Region support) {
  TransporterFamily fam{rho, support, {}};
  for (Region a = 0; a < rho.net().site().size(); ++a)
    fam.transports.push_back({a == support ? rho : rho.with_support(a), rho.unit()});
  return fam;
}

TransporterFamily rebase(const TransporterFamily& fam, Region a) {
  const Transport& pivot = fam.at(a);
  TransporterFamily out{pivot.target, a, {}};
  out.transports.reserve(fam.transports.size());
  for (const auto& t : fam.transports) out.transports.push_back({t.target, t.unitary * pivot.unitary.adjoint()});
  out.transports[a] = {pivot.target, pivot.target.unit()};
  return out;
}

TransporterFamily transfer(const TransporterFamily& fam, const Intertwiner& u, Region support) {
  TransporterFamily out{u.target, support, {}};
  out.transports.reserve(fam.transports.size());
  for (const auto& t : fam.transports) out.transports.push_back({t.target, t.unitary * u.block.adjoint()});
  out.transports[support] = {u.target, u.target.unit()};
  return out;
}

namespace {

Region common_support(const TransporterFamily& f, const TransporterFamily& g) {
  if (f.support == g.support) return f.support;
  const auto ub = f.base.net().site().upper_bounds({f.support, g.support});
  if (ub.empty())
    throw Error("no region contains both supports " + f.base.net().site().id(f.support) + " and " +
                f.base.net().site().id(g.support) + "; rebase one family first");
  return ub.front();
}

}  // namespace

TransporterFamily tensor_families(const TransporterFamily& f, const TransporterFamily& g) {
  const Region c = common_support(f, g);
  const Amplimorphism base = tensor_objects(f.base, g.base).with_support(c);
  TransporterFamily out{base, c, {}};
  const std::size_t n = f.transports.size();
  out.transports = kernels::map_indices<Transport>(n, [&](std::size_t a) {
    const Intertwiner t = tensor_arrows(f.arrow(a), g.arrow(a));
    return Transport{t.target.with_support(a), t.block};
  });
  out.transports[c] = {base, base.unit()};
  return out;
}

TransporterFamily direct_sum_families(const TransporterFamily& f, const TransporterFamily& g) {
  const Region c = common_support(f, g);
  const Amplimorphism base = direct_sum(f.base, g.base).alpha.with_support(c);
  TransporterFamily out{base, c, {}};
  out.transports = kernels::map_indices<Transport>(f.transports.size(), [&](std::size_t a) {
    const Transport& x = f.at(a);
    const Transport& y = g.at(a);
    Mat u = Mat::Zero(x.unitary.rows() + y.unitary.rows(), x.unitary.cols() + y.unitary.cols());
    u.topLeftCorner(x.unitary.rows(), x.unitary.cols()) = x.unitary;
    u.bottomRightCorner(y.unitary.rows(), y.unitary.cols()) = y.unitary;
    return Transport{direct_sum(x.target, y.target).alpha.with_support(a), u};
  });
  out.transports[c] = {base, base.unit()};
  return out;
}

TransporterFamily twist_family(const TransporterFamily& fam, std::uint64_t seed) {
  const NetModel& net = fam.base.net();
  TransporterFamily out{fam.base, fam.support, {}};
  for (Region a = 0; a < fam.transports.size(); ++a) {
    const Transport& t = fam.transports[a];
    if (a == fam.support) {
      out.transports.push_back(t);
      continue;
    }
    DetRng rng(seed ^ (0x9e3779b97f4a7c15ULL * (a + 1)));
    Mat h = Mat::Zero(net.ambient_dim(), net.ambient_dim());
    for (const auto& b : net.local(a).basis()) h += rng.complex_symmetric() * b;
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (h + h.adjoint()));
    const Vec phases = (cplx(0.0, 1.0) * es.eigenvalues().cast<cplx>()).array().exp();
    const Mat u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    const Mat w = amplify(u, t.target.multiplicity());
    Amplimorphism target = Amplimorphism::from_map(
        fam.base.net_ptr(), t.target.multiplicity(), [&](const Mat& x) -> Mat { return w * t.target(x) * w.adjoint(); },
        a, t.target.label() + "~");
    out.transports.push_back({std::move(target), w * t.unitary});
  }
  return out;
}

SubobjectFamilyResult subobject_family(const TransporterFamily& fam, const Intertwiner& v, double tol) {
  const Amplimorphism& beta = v.source;
  const NetModel& net = beta.net();
  const Eigen::Index d = net.ambient_dim();
  struct Slot {
    std::optional<Amplimorphism> target;
    Mat w;  // isometry with entries in A(a) onto V_a v v+ V_a+
    std::string diag;
  };
  auto slots = kernels::map_indices<Slot>(fam.transports.size(), [&](std::size_t a) -> Slot {
    const Transport& tr = fam.at(a);
    const Mat e = tr.unitary * v.block * v.block.adjoint() * tr.unitary.adjoint();
    const Eigen::Index rank = range_basis(e, tol).cols();
    std::string diag;
    for (Eigen::Index m = std::max<Eigen::Index>(1, (rank + d - 1) / d); m <= tr.target.multiplicity(); ++m) {
      auto w = find_isometry_onto(e, net.local(a), m, &diag, tol);
      if (!w) continue;
      const Mat wa = *w;
      Amplimorphism beta_a = Amplimorphism::from_map(
          beta.net_ptr(), m, [&](const Mat& x) -> Mat { return wa.adjoint() * tr.target(x) * wa; }, a,
          beta.label() + "@" + net.site().id(a));
      return {std::move(beta_a), wa, ""};
    }
    return {std::nullopt, Mat(), net.site().id(a) + ": " + diag};
  });
  SubobjectFamilyResult out;
  for (std::size_t a = 0; a < slots.size(); ++a) {
    if (slots[a].target) continue;
    out.failing_regions.push_back(a);
    if (!out.diagnostic.empty()) out.diagnostic += "; ";
    out.diagnostic += slots[a].diag;
  }
  if (!out.failing_regions.empty()) return out;
  const Slot& home = slots[fam.support];
  const Amplimorphism& base = *home.target;
  TransporterFamily f{base, fam.support, {}};
  for (std::size_t a = 0; a < slots.size(); ++a)
    f.transports.push_back({*slots[a].target, slots[a].w.adjoint() * fam.at(a).unitary * home.w});
  f.transports[fam.support] = {base, base.unit()};
  out.embedding = Intertwiner{base, fam.base, home.w};
  out.family = std::move(f);
  return out;
}

}  // namespace dhr
