#include "dhr/conjugation.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace dhr {

namespace {

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

Intertwiner iota_arrow(const Amplimorphism& rho_any, const Amplimorphism& target, Mat block) {
  return {Amplimorphism::identity(rho_any.net_ptr()), target, std::move(block)};
}

struct EquationTerms {
  std::vector<Mat> first;   // M_j with sum conj(x_j) M_j = 1_rho
  std::vector<Mat> second;  // N_j with sum x_j N_j = 1_rhobar
};

EquationTerms equation_terms(const Amplimorphism& rho, const Amplimorphism& rho_bar, const Intertwiner& r,
                             const std::vector<Intertwiner>& r_bar_basis) {
  const Intertwiner u = unit_arrow(rho), ub = unit_arrow(rho_bar);
  const Mat right1 = tensor_arrows(u, r).block;
  const Mat left2 = tensor_arrows(adjoint(r), ub).block;
  EquationTerms t;
  for (const auto& b : r_bar_basis) {
    t.first.push_back(tensor_arrows(adjoint(b), u).block * right1);
    t.second.push_back(left2 * tensor_arrows(ub, b).block);
  }
  return t;
}

Mat stack_vecs(const std::vector<Mat>& ms) {
  Mat out(ms.front().size(), static_cast<Eigen::Index>(ms.size()));
  for (std::size_t j = 0; j < ms.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = vec(ms[j]);
  return out;
}

Mat combine(const std::vector<Intertwiner>& basis, const Vec& c) {
  Mat out = Mat::Zero(basis.front().block.rows(), basis.front().block.cols());
  for (std::size_t j = 0; j < basis.size(); ++j) out += c(static_cast<Eigen::Index>(j)) * basis[j].block;
  return out;
}

ConjugateSolution make_solution(const Amplimorphism& rho, const Amplimorphism& rho_bar, const Mat& r,
                                const Mat& r_bar) {
  ConjugateSolution s;
  s.rho = rho;
  s.rho_bar = rho_bar;
  s.r = iota_arrow(rho, tensor_objects(rho_bar, rho), r);
  s.r_bar = iota_arrow(rho, tensor_objects(rho, rho_bar), r_bar);
  const auto res = conjugate_residuals(rho, rho_bar, r, r_bar);
  s.residual = res.first;
  s.residual_bar = res.second;
  return s;
}

// f(M) = M^p on the support of a positive matrix; zero elsewhere.
Mat hermitian_power(const Mat& m, double p, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(0.5 * (m + m.adjoint())));
  Eigen::VectorXd ev = es.eigenvalues();
  const double cut = tol * std::max(1.0, ev.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) ev(i) = ev(i) > cut ? std::pow(ev(i), p) : 0.0;
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

ConjugateResiduals conjugate_residuals(const Amplimorphism& rho, const Amplimorphism& rho_bar, const Mat& r,
                                       const Mat& r_bar) {
  const Intertwiner ri = iota_arrow(rho, tensor_objects(rho_bar, rho), r);
  const Intertwiner rbi = iota_arrow(rho, tensor_objects(rho, rho_bar), r_bar);
  const Intertwiner u = unit_arrow(rho), ub = unit_arrow(rho_bar);
  ConjugateResiduals out;
  out.first = (tensor_arrows(adjoint(rbi), u).block * tensor_arrows(u, ri).block - rho.unit()).norm();
  out.second = (tensor_arrows(adjoint(ri), ub).block * tensor_arrows(ub, rbi).block - rho_bar.unit()).norm();
  return out;
}

ConjugateSearch solve_conjugate(const Amplimorphism& rho, const Amplimorphism& rho_bar, double tol, kernels::Exec e) {
  ConjugateSearch out;
  const Amplimorphism iota = Amplimorphism::identity(rho.net_ptr());
  const auto r_basis = intertwiner_space(iota, tensor_objects(rho_bar, rho), tol);
  const auto rb_basis = intertwiner_space(iota, tensor_objects(rho, rho_bar), tol);
  out.r_space_dim = static_cast<Eigen::Index>(r_basis.size());
  out.r_bar_space_dim = static_cast<Eigen::Index>(rb_basis.size());
  if (r_basis.empty() || rb_basis.empty()) {
    out.exhaustive = true;
    out.diagnostic = "(iota, rhobar rho) has dimension " + std::to_string(r_basis.size()) +
                     " and (iota, rho rhobar) has dimension " + std::to_string(rb_basis.size());
    return out;
  }
  const Vec one = vec(rho.unit());
  const Vec one_bar = vec(rho_bar.unit());

  if (r_basis.size() == 1) {
    // R = R_0 up to scale; both equations are real-linear in Rbar's coordinates
    out.exhaustive = true;
    out.candidates = 1;
    const EquationTerms t = equation_terms(rho, rho_bar, r_basis.front(), rb_basis);
    const Mat m = stack_vecs(t.first), nn = stack_vecs(t.second);
    const Eigen::Index k = m.cols(), p = m.rows(), q = nn.rows();
    Eigen::MatrixXd a(2 * p + 2 * q, 2 * k);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(2 * p + 2 * q);
    a.block(0, 0, p, k) = m.real();
    a.block(p, 0, p, k) = m.imag();
    a.block(0, k, p, k) = m.imag();
    a.block(p, k, p, k) = -m.real();
    a.block(2 * p, 0, q, k) = nn.real();
    a.block(2 * p + q, 0, q, k) = nn.imag();
    a.block(2 * p, k, q, k) = -nn.imag();
    a.block(2 * p + q, k, q, k) = nn.real();
    b.segment(0, p) = one.real();
    b.segment(2 * p, q) = one_bar.real();
    const Eigen::VectorXd uv = a.completeOrthogonalDecomposition().solve(b);
    const double residual = (a * uv - b).norm();
    if (residual > tol) {
      out.diagnostic = "no solution: the joint linear system has residual " + num(residual);
      return out;
    }
    Vec x(k);
    for (Eigen::Index j = 0; j < k; ++j) x(j) = cplx(uv(j), uv(k + j));
    out.solution = make_solution(rho, rho_bar, r_basis.front().block, combine(rb_basis, x));
    return out;
  }

  const std::size_t dim = r_basis.size();
  std::size_t total = 1;
  for (std::size_t i = 0; i < dim && total < kConjugateSweepCap; ++i) total *= 10;
  total = std::min(total, kConjugateSweepCap);
  auto candidate = [&](std::size_t idx) {
    Vec c(static_cast<Eigen::Index>(dim));
    std::size_t rest = idx;
    for (std::size_t j = 0; j < dim; ++j) {
      c(static_cast<Eigen::Index>(j)) = -1.0 + 2.0 * static_cast<double>(rest % 10) / 9.0;
      rest /= 10;
    }
    return Vec(c / c.norm());
  };
  struct Trial {
    bool ok = false;
    Mat r, r_bar;
  };
  constexpr std::size_t chunk = 256;
  for (std::size_t start = 0; start < total; start += chunk) {
    const std::size_t len = std::min(chunk, total - start);
    const auto trials = kernels::map_indices<Trial>(
        len,
        [&](std::size_t i) {
          Trial tr;
          const Mat r = combine(r_basis, candidate(start + i));
          const Intertwiner ri{r_basis.front().source, r_basis.front().target, r};
          const EquationTerms t = equation_terms(rho, rho_bar, ri, rb_basis);
          const Mat m = stack_vecs(t.first);
          const Vec y = m.completeOrthogonalDecomposition().solve(one);
          if ((m * y - one).norm() > tol) return tr;
          const Vec x = y.conjugate();
          if ((stack_vecs(t.second) * x - one_bar).norm() > tol) return tr;
          tr.ok = true;
          tr.r = r;
          tr.r_bar = combine(rb_basis, x);
          return tr;
        },
        e);
    for (std::size_t i = 0; i < len; ++i) {
      if (!trials[i].ok) continue;
      out.candidates = start + i + 1;
      out.solution = make_solution(rho, rho_bar, trials[i].r, trials[i].r_bar);
      return out;
    }
  }
  out.candidates = total;
  out.diagnostic = "no solution found among " + std::to_string(total) + " lattice points (not a proof of absence)";
  return out;
}

ConjugateSolution standardize(const ConjugateSolution& sol, double tol) {
  // (1_rhobar x T) R and (T^{-1}+ x 1_rhobar) Rbar solve again for invertible T in
  // (rho, rho); T is chosen so that R+ (1 x X) R = Rbar+ (X x 1) Rbar on (rho, rho).
  const Amplimorphism& rho = sol.rho;
  const auto basis = intertwiner_space(rho, rho, tol);
  if (basis.empty()) throw Error("standardize: (rho, rho) is zero");
  const Intertwiner ub = unit_arrow(sol.rho_bar);
  const Mat one = identity(rho.ambient_dim());
  const auto k = static_cast<Eigen::Index>(basis.size());
  Vec w(k), wb(k);
  Mat gram(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const Intertwiner& x = basis[static_cast<std::size_t>(i)];
    w(i) = scalar_fit(sol.r.block.adjoint() * tensor_arrows(ub, x).block * sol.r.block, one).value;
    wb(i) = scalar_fit(sol.r_bar.block.adjoint() * tensor_arrows(x, ub).block * sol.r_bar.block, one).value;
    for (Eigen::Index j = 0; j < k; ++j) gram(i, j) = (basis[static_cast<std::size_t>(j)].block * x.block).trace();
  }
  // densities with Tr(A X) = R+ (1 x X) R and Tr(B X) = Rbar+ (X x 1) Rbar
  const auto solver = gram.completeOrthogonalDecomposition();
  const Mat a = combine(basis, solver.solve(w));
  const Mat b = combine(basis, solver.solve(wb));
  const Mat ah = Mat(0.5 * (a + a.adjoint())), bh = Mat(0.5 * (b + b.adjoint()));
  if (min_hermitian_eigenvalue(ah) < -tol || min_hermitian_eigenvalue(bh) < -tol)
    throw Error("standardize: the solution does not induce positive functionals on (rho, rho)");
  const Mat a_half = hermitian_power(ah, 0.5, tol), a_inv_half = hermitian_power(ah, -0.5, tol);
  const Mat s_mat = a_inv_half * hermitian_power(Mat(a_half * bh * a_half), 0.5, tol) * a_inv_half;
  const Mat t = hermitian_power(s_mat, 0.5, tol), t_inv = hermitian_power(s_mat, -0.5, tol);
  if ((t * t_inv - rho.unit()).norm() > std::sqrt(tol))
    throw Error("standardize: the functionals induced by R and Rbar are not faithful on (rho, rho)");
  const Intertwiner ti{rho, rho, t}, tinv{rho, rho, t_inv};
  return make_solution(rho, sol.rho_bar, tensor_arrows(ub, ti).block * sol.r.block,
                       tensor_arrows(tinv, ub).block * sol.r_bar.block);
}

ScalarFit standardness(const ConjugateSolution& sol, const Intertwiner& eps) {
  const LeftInverse phi = left_inverse_from_conjugate(sol.rho, sol.rho_bar, sol.r.block);
  const Mat m = phi.apply(eps.block);
  return scalar_fit(m * m, sol.rho.unit());
}

ConjugateSolution swap_solution(const ConjugateSolution& sol) {
  return make_solution(sol.rho_bar, sol.rho, sol.r_bar.block, sol.r.block);
}

ConjugateSolution tensor_solutions(const ConjugateSolution& a, const ConjugateSolution& b) {
  const Intertwiner r = compose(
      tensor_arrows(tensor_arrows(unit_arrow(b.rho_bar), a.r), unit_arrow(b.rho)), b.r);
  const Intertwiner r_bar = compose(
      tensor_arrows(tensor_arrows(unit_arrow(a.rho), b.r_bar), unit_arrow(a.rho_bar)), a.r_bar);
  return make_solution(tensor_objects(a.rho, b.rho), tensor_objects(b.rho_bar, a.rho_bar), r.block, r_bar.block);
}

ConjugateSolution direct_sum_solutions(const ConjugateSolution& a, const ConjugateSolution& b) {
  const DirectSum s = direct_sum(a.rho, b.rho);
  const DirectSum sb = direct_sum(a.rho_bar, b.rho_bar);
  const Mat r = tensor_arrows(sb.w1, s.w1).block * a.r.block + tensor_arrows(sb.w2, s.w2).block * b.r.block;
  const Mat r_bar =
      tensor_arrows(s.w1, sb.w1).block * a.r_bar.block + tensor_arrows(s.w2, sb.w2).block * b.r_bar.block;
  return make_solution(s.alpha, sb.alpha, r, r_bar);
}

SimpleConjugate conjugate_for_simple(const Amplimorphism& gamma, double tol) {
  SimpleConjugate out;
  const NetModel& net = gamma.net();
  const Eigen::Index d = net.ambient_dim();
  if (gamma.is_identity()) {
    out.gamma_bar = gamma;
    out.solution = make_solution(gamma, gamma, identity(d), identity(d));
    return out;
  }
  Mat v;
  if (gamma.multiplicity() == 1 && (gamma.unit() - identity(d)).norm() < tol) {
    v = identity(d);
  } else {
    if (!gamma.support()) {
      out.diagnostic = "gamma has no claimed support";
      return out;
    }
    const Region o = *gamma.support();
    const Eigen::Index rank = range_basis(gamma.unit(), tol).cols();
    if (rank != d) {
      out.diagnostic = "requires properly infinite local algebra: gamma(1) has rank " + std::to_string(rank) +
                       ", an isometry from H onto it needs rank " + std::to_string(d);
      return out;
    }
    std::string diag;
    auto w = find_isometry_onto(gamma.unit(), net.local(o), 1, &diag, tol);
    if (!w) {
      out.diagnostic = "requires properly infinite local algebra: no isometry with entries in A(" + net.site().id(o) +
                       ") onto gamma(1): " + diag;
      return out;
    }
    v = *w;
  }
  const auto& g = net.global();
  Mat coords(g.dim(), g.dim());
  for (Eigen::Index k = 0; k < g.dim(); ++k)
    coords.col(k) = g.coords(v.adjoint() * gamma.images()[static_cast<std::size_t>(k)] * v);
  Eigen::BDCSVD<Mat> svd(coords);
  if (svd.singularValues().minCoeff() < tol) {
    out.diagnostic = "V+ gamma V is not an automorphism (gamma not injective)";
    return out;
  }
  const Mat inv = coords.inverse();
  std::vector<Mat> images;
  for (Eigen::Index k = 0; k < g.dim(); ++k) images.push_back(g.element(inv.col(k)));
  Amplimorphism gamma_bar(gamma.net_ptr(), 1, std::move(images), gamma.support(), gamma.label() + "_bar");
  out.solution = make_solution(gamma, gamma_bar, gamma_bar.lift(v), v);
  out.gamma_bar = std::move(gamma_bar);
  return out;
}

ConjugateFamily conjugate_family(const TransporterFamily& gamma_fam, const Amplimorphism& gamma_bar, double tol) {
  ConjugateFamily out;
  struct Slot {
    std::optional<Transport> t;
    std::string diag;
  };
  const auto slots = kernels::map_indices<Slot>(gamma_fam.transports.size(), [&](std::size_t a) -> Slot {
    if (a == gamma_fam.support) return {Transport{gamma_bar, gamma_bar.unit()}, ""};
    const SimpleConjugate c = conjugate_for_simple(gamma_fam.at(a).target.with_support(a), tol);
    if (!c.gamma_bar) return {std::nullopt, c.diagnostic};
    const UnitarySearch u = find_unitary_equivalence(gamma_bar, *c.gamma_bar, tol);
    if (!u.unitary) return {std::nullopt, "conjugates not equivalent"};
    return {Transport{*c.gamma_bar, u.unitary->block}, ""};
  });
  TransporterFamily f{gamma_bar, gamma_fam.support, {}};
  for (std::size_t a = 0; a < slots.size(); ++a) {
    if (!slots[a].t) {
      out.diagnostic = gamma_bar.net().site().id(a) + ": " + slots[a].diag;
      return out;
    }
    f.transports.push_back(*slots[a].t);
  }
  out.family = std::move(f);
  return out;
}

FiniteStatsConjugate conjugate_for_finite_stats(const TransporterFamily& rho_fam, const Witness& w,
                                                const TransporterFamily& gamma_bar_fam, const Intertwiner& t,
                                                const Intertwiner& t_bar, double tol) {
  FiniteStatsConjugate out;
  const Amplimorphism& gamma_bar = gamma_bar_fam.base;
  const auto gres = conjugate_residuals(w.gamma, gamma_bar, t.block, t_bar.block);
  if (std::max(gres.first, gres.second) > tol) {
    out.diagnostic = "(T, Tbar) do not solve the conjugate equations for gamma: residuals " + num(gres.first) + ", " +
                     num(gres.second);
    return out;
  }
  TransporterFamily bar_fam = gamma_bar_fam;
  if (w.d > 1) {
    TransporterFamily power = rho_fam;
    for (int k = 2; k < w.d; ++k) power = tensor_families(rho_fam, power);
    bar_fam = tensor_families(gamma_bar_fam, power);
  }
  const Amplimorphism& rho = rho_fam.base;
  const Amplimorphism& rho_bar = bar_fam.base;
  const Mat r = tensor_arrows(unit_arrow(gamma_bar), w.v).block * t.block;
  const Intertwiner eps = symmetry(bar_fam, rho_fam, tol).eps;
  const Mat r_bar = eps.block * r;
  ConjugateSolution sol = make_solution(rho, rho_bar, r, r_bar);
  if (std::max(sol.residual, sol.residual_bar) > tol) {
    out.diagnostic = "construction residuals " + num(sol.residual) + ", " + num(sol.residual_bar);
    return out;
  }
  out.solution = std::move(sol);
  out.rho_bar_family = std::move(bar_fam);
  return out;
}

PresheafLeftInverse presheaf_left_inverse_from_conjugate(const ConjugateSolution& sol,
                                                         const TransporterFamily& rho_fam,
                                                         const TransporterFamily& rho_bar_fam) {
  const PresheafMorphism bar = extend(rho_bar_fam);
  const Mat r = sol.r.block;
  const Mat rr = r.adjoint() * r;
  Eigen::BDCSVD<Mat> svd(rr);
  if (svd.singularValues().minCoeff() < kTol) throw Error("R+R is not invertible");
  const Mat inv = rr.inverse();
  const Amplimorphism& rho = rho_fam.base;
  const CausalSite& site = rho.net().site();
  PresheafLeftInverse out{rho, rho_fam.support, std::vector<std::optional<Mat>>(site.size())};
  const Eigen::Index s = rho.size(), d = rho.ambient_dim();
  for (Region a : site.spacelike_complement(rho_fam.support)) {
    out.actions[a] = kernels::assemble_columns(d * d, s * s, [&](Eigen::Index c) {
      Mat unit = Mat::Zero(s, s);
      unit(c % s, c / s) = 1.0;
      return vec(Mat(inv * r.adjoint() * bar.lift(a, unit) * r));
    });
  }
  return out;
}

bool ConjugationTheoremReport::standard_ok(double tol) const {
  return standard && standard->residual < tol && standard->value.real() > tol && std::abs(standard->value.imag()) < tol;
}

ConjugationTheoremReport verify_conjugation_theorems(const TransporterFamily& rho_fam, const ConjugateSolution& sol,
                                                     const TransporterFamily& rho_bar_fam, int d_max, double tol) {
  ConjugationTheoremReport rep;
  auto stage = [&](const std::string& name, bool ok, std::string detail) {
    rep.stages.push_back({name, ok, std::move(detail)});
    if (!ok && !rep.aborted_at) rep.aborted_at = name;
    return ok;
  };
  const auto res = conjugate_residuals(sol.rho, sol.rho_bar, sol.r.block, sol.r_bar.block);
  if (!stage("equations", std::max(res.first, res.second) < tol,
             "residuals " + num(res.first) + ", " + num(res.second)))
    return rep;

  std::optional<LeftInverse> phi;
  try {
    phi = left_inverse_from_conjugate(sol.rho, sol.rho_bar, sol.r.block);
  } catch (const Error& e) {
    stage("left-inverse", false, e.what());
    return rep;
  }
  const LeftInverseReport lr = check_left_inverse(*phi, tol);
  if (!stage("left-inverse", lr.ok(tol),
             "normalization " + num(lr.normalization) + ", module " + num(lr.module) + ", positivity " +
                 num(lr.positivity)))
    return rep;

  const Intertwiner eps = symmetry(rho_fam, rho_fam, tol).eps;
  rep.lambda = statistics_parameter(*phi, eps);
  rep.standard = standardness(sol, eps);
  if (rep.lambda->residual < tol) {
    if (!stage("statistics", rep.lambda->finite(tol),
               "lambda " + num(rep.lambda->lambda.real()) + " (residual " + num(rep.lambda->residual) + ")"))
      return rep;
  } else {
    // reducible: finite statistics means every irreducible summand has lambda != 0
    const StatisticsReport st = classify_finite_statistics(rho_fam, d_max, tol);
    bool finite = st.decomposed && !st.summands.empty();
    std::string detail = "reducible, " + std::to_string(st.summands.size()) + " summands, lambdas";
    for (const auto& s : st.summands) {
      finite = finite && s.lambda && s.lambda->residual < tol && s.lambda->finite(tol);
      detail += s.lambda ? " " + num(s.lambda->lambda.real()) : std::string(" undefined");
    }
    if (!stage("statistics", finite, detail)) return rep;
  }

  try {
    const PresheafLeftInverse pl = presheaf_left_inverse_from_conjugate(sol, rho_fam, rho_bar_fam);
    const PresheafLeftInverseReport pr = check_presheaf_left_inverse(pl, extend(rho_fam), tol);
    if (!stage("presheaf-left-inverse", pr.ok(tol),
               "restriction " + num(pr.restriction) + ", module " + num(pr.module)))
      return rep;
  } catch (const Error& e) {
    stage("presheaf-left-inverse", false, e.what());
    return rep;
  }

  const HomogeneityReport hr = check_homogeneous(rho_fam, d_max, tol);
  if (!stage("homogeneity", hr.homogeneous,
             std::to_string(hr.regions.size() - hr.failing().size()) + " of " + std::to_string(hr.regions.size()) +
                 " regions"))
    return rep;

  const MembershipReport mr = check_relevant_membership(rho_fam, d_max, tol);
  rep.member = mr.member;
  std::string detail;
  for (const auto& s : mr.summands)
    for (const auto& ev : s.evidence) detail += (detail.empty() ? "" : "; ") + ev;
  stage("membership", mr.member, detail);
  return rep;
}

}  // namespace dhr
