#include "dhr/bimodule.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace dhr {

namespace {

Mat matrix_unit(Eigen::Index rows, Eigen::Index cols, Eigen::Index i, Eigen::Index j) {
  Mat e = Mat::Zero(rows, cols);
  e(i, j) = 1.0;
  return e;
}

std::optional<Region> joint_support(const Amplimorphism& a, const Amplimorphism& b) {
  if (a.is_identity()) return b.support();
  if (b.is_identity()) return a.support();
  if (!a.support() || !b.support()) return std::nullopt;
  if (*a.support() == *b.support()) return a.support();
  const auto ub = a.net().site().upper_bounds({*a.support(), *b.support()});
  if (ub.empty()) return std::nullopt;
  return ub.front();
}

std::string join_label(const std::string& a, const std::string& b, const char* op) {
  return "(" + a + op + b + ")";
}

// Memo for tensor products; keys hold the factors alive so addresses are never reused.
struct TensorCache {
  std::mutex mu;
  std::map<std::pair<const void*, const void*>, std::pair<std::pair<Amplimorphism, Amplimorphism>, Amplimorphism>>
      entries;
};
TensorCache& tensor_cache() {
  static TensorCache cache;
  return cache;
}

}  // namespace

Amplimorphism::Amplimorphism(NetPtr net, Eigen::Index multiplicity, std::vector<Mat> images,
                             std::optional<Region> support, std::string label) {
  if (!net) throw Error("amplimorphism: null net");
  if (multiplicity < 1) throw Error("amplimorphism: multiplicity must be positive");
  const Eigen::Index size = multiplicity * net->ambient_dim();
  if (static_cast<Eigen::Index>(images.size()) != net->global().dim())
    throw Error("amplimorphism: expected " + std::to_string(net->global().dim()) + " images, got " +
                std::to_string(images.size()));
  for (const auto& m : images)
    if (m.rows() != size || m.cols() != size) throw Error("amplimorphism: image has shape " + describe_shape(m));
  if (support && *support >= net->site().size()) throw Error("amplimorphism: support out of range");
  auto d = std::make_shared<Data>();
  d->net = std::move(net);
  d->n = multiplicity;
  d->images = std::move(images);
  d->support = support;
  d->label = std::move(label);
  data_ = d;
  d->unit = (*this)(dhr::identity(d->net->ambient_dim()));
}

Amplimorphism Amplimorphism::from_map(NetPtr net, Eigen::Index multiplicity, const std::function<Mat(const Mat&)>& f,
                                      std::optional<Region> support, std::string label) {
  std::vector<Mat> images;
  images.reserve(net->global().basis().size());
  for (const auto& b : net->global().basis()) images.push_back(f(b));
  return Amplimorphism(std::move(net), multiplicity, std::move(images), support, std::move(label));
}

Amplimorphism Amplimorphism::identity(NetPtr net) {
  Amplimorphism a(net, 1, net->global().basis(), std::nullopt, "iota");
  auto d = std::make_shared<Data>(*a.data_);
  d->identity = true;
  d->unit = dhr::identity(net->ambient_dim());
  a.data_ = d;
  return a;
}

Amplimorphism Amplimorphism::conjugation(NetPtr net, const Mat& w, Eigen::Index k, std::optional<Region> support,
                                         std::string label) {
  const Eigen::Index d = net->ambient_dim();
  if (w.cols() != d * k || w.rows() % d != 0) throw Error("conjugation: bad shape " + describe_shape(w));
  const Eigen::Index n = w.rows() / d;
  return from_map(
      std::move(net), n, [&](const Mat& a) -> Mat { return w * amplify(a, k) * w.adjoint(); }, support,
      std::move(label));
}

Amplimorphism Amplimorphism::with_label(std::string label) const {
  auto d = std::make_shared<Data>(*data_);
  d->label = std::move(label);
  Amplimorphism out;
  out.data_ = d;
  return out;
}

Amplimorphism Amplimorphism::with_support(std::optional<Region> support) const {
  auto d = std::make_shared<Data>(*data_);
  d->support = support;
  Amplimorphism out;
  out.data_ = d;
  return out;
}

Mat Amplimorphism::operator()(const Mat& a) const {
  const auto& g = data_->net->global();
  if (data_->identity) return a;
  const Vec c = g.coords(a);
  Mat out = Mat::Zero(size(), size());
  for (Eigen::Index k = 0; k < c.size(); ++k)
    if (c(k) != cplx(0.0)) out.noalias() += c(k) * data_->images[static_cast<std::size_t>(k)];
  return out;
}

Mat Amplimorphism::lift(const Mat& x) const {
  const Eigen::Index d = ambient_dim();
  if (x.rows() % d != 0 || x.cols() % d != 0) throw Error("lift: shape " + describe_shape(x));
  if (data_->identity) return x;
  const Eigen::Index p = x.rows() / d, q = x.cols() / d, s = size();
  Mat out = Mat::Zero(p * s, q * s);
  for (Eigen::Index j = 0; j < q; ++j)
    for (Eigen::Index i = 0; i < p; ++i) {
      const Mat e = x.block(i * d, j * d, d, d);
      if (e.isZero(0.0)) continue;
      out.block(i * s, j * s, s, s) = (*this)(e);
    }
  return out;
}

bool AmplimorphismReport::ok(double tol) const {
  return multiplicativity < tol && star < tol && unit_projection < tol && corner < tol && localization < tol &&
         local_membership < tol;
}

AmplimorphismReport check_amplimorphism(const Amplimorphism& rho, double tol) {
  (void)tol;
  AmplimorphismReport rep;
  const auto& g = rho.net().global();
  const Mat& u = rho.unit();
  rep.unit_projection = std::max((u * u - u).norm(), (u - u.adjoint()).norm());
  std::vector<Mat> gen_images;
  for (const auto& h : rho.net().global_generators()) gen_images.push_back(rho(h));
  for (Eigen::Index k = 0; k < g.dim(); ++k) {
    const Mat& b = g.basis()[static_cast<std::size_t>(k)];
    const Mat& rb = rho.images()[static_cast<std::size_t>(k)];
    rep.star = std::max(rep.star, (rho(b.adjoint()) - rb.adjoint()).norm());
    rep.corner = std::max(rep.corner, (u * rb * u - rb).norm());
    // products with a generating set suffice for multiplicativity on the whole algebra
    const auto& gens = rho.net().global_generators();
    for (std::size_t i = 0; i < gens.size(); ++i)
      rep.multiplicativity = std::max(rep.multiplicativity, (rho(b * gens[i]) - rb * gen_images[i]).norm());
  }
  if (rho.support()) {
    rep.localization = localization_defect(rho, *rho.support());
    rep.local_membership = local_image_defect(rho, *rho.support());
  }
  return rep;
}

double localization_defect(const Amplimorphism& rho, Region o) {
  const auto& site = rho.net().site();
  double worst = 0.0;
  for (Region a : site.spacelike_complement(o))
    for (const auto& b : rho.net().local(a).basis())
      worst = std::max(worst, (rho(b) - amplify(b, rho.multiplicity()) * rho.unit()).norm());
  return worst;
}

bool check_localized(const Amplimorphism& rho, Region o, double tol) { return localization_defect(rho, o) < tol; }

double local_image_defect(const Amplimorphism& rho, Region o) {
  const auto& site = rho.net().site();
  double worst = 0.0;
  for (Region a = 0; a < site.size(); ++a) {
    if (!site.leq(o, a)) continue;
    for (const auto& b : rho.net().local(a).basis()) worst = std::max(worst, entry_defect(rho(b), rho.net().local(a)));
  }
  return worst;
}

Intertwiner unit_arrow(const Amplimorphism& rho) { return {rho, rho, rho.unit()}; }

Intertwiner compose(const Intertwiner& s, const Intertwiner& t) {
  if (s.block.cols() != t.block.rows())
    throw Error("compose: shape mismatch " + describe_shape(s.block) + " after " + describe_shape(t.block));
  return {t.source, s.target, s.block * t.block};
}

Intertwiner adjoint(const Intertwiner& t) { return {t.target, t.source, t.block.adjoint()}; }

Intertwiner scale(const Intertwiner& t, cplx c) { return {t.source, t.target, c * t.block}; }

Intertwiner add(const Intertwiner& a, const Intertwiner& b) {
  if (a.block.rows() != b.block.rows() || a.block.cols() != b.block.cols()) throw Error("add: shape mismatch");
  return {a.source, a.target, a.block + b.block};
}

bool IntertwinerReport::ok(double tol) const {
  return source_unit < tol && target_unit < tol && intertwining < tol && entries < tol;
}

double entry_defect(const Mat& m, const ConcreteAlgebra& alg) {
  const Eigen::Index d = alg.ambient_dim();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < m.cols() / d; ++j)
    for (Eigen::Index i = 0; i < m.rows() / d; ++i) worst = std::max(worst, alg.defect(m.block(i * d, j * d, d, d)));
  return worst;
}

IntertwinerReport check_intertwiner(const Intertwiner& t, double tol) {
  (void)tol;
  IntertwinerReport rep;
  const Mat& tb = t.block;
  if (tb.rows() != t.target.size() || tb.cols() != t.source.size()) throw Error("intertwiner: shape mismatch");
  rep.source_unit = (tb * t.source.unit() - tb).norm();
  rep.target_unit = (t.target.unit() * tb - tb).norm();
  for (const auto& g : t.source.net().global_generators())
    rep.intertwining = std::max(rep.intertwining, (tb * t.source(g) - t.target(g) * tb).norm());
  rep.entries = entry_defect(tb, t.source.net().global());
  return rep;
}

bool is_isometric_arrow(const Intertwiner& t, double tol) {
  return (t.block.adjoint() * t.block - t.source.unit()).norm() < tol;
}

bool is_unitary_arrow(const Intertwiner& t, double tol) {
  return is_isometric_arrow(t, tol) && (t.block * t.block.adjoint() - t.target.unit()).norm() < tol;
}

Amplimorphism tensor_objects(const Amplimorphism& rho, const Amplimorphism& sigma) {
  if (rho.net_ptr() != sigma.net_ptr()) throw Error("tensor_objects: objects live on different nets");
  if (rho.is_identity()) return sigma;
  if (sigma.is_identity()) return rho;
  auto& cache = tensor_cache();
  const auto key = std::make_pair(rho.key(), sigma.key());
  {
    std::lock_guard<std::mutex> lock(cache.mu);
    auto it = cache.entries.find(key);
    if (it != cache.entries.end()) return it->second.second;
  }
  std::vector<Mat> images;
  images.reserve(sigma.images().size());
  for (const auto& s : sigma.images()) images.push_back(rho.lift(s));
  Amplimorphism out(rho.net_ptr(), rho.multiplicity() * sigma.multiplicity(), std::move(images),
                    joint_support(rho, sigma), join_label(rho.label(), sigma.label(), "*"));
  std::lock_guard<std::mutex> lock(cache.mu);
  auto [it, inserted] = cache.entries.emplace(key, std::make_pair(std::make_pair(rho, sigma), out));
  return it->second.second;
}

Amplimorphism tensor_power(const Amplimorphism& rho, int n) {
  if (n < 0) throw Error("tensor_power: negative exponent");
  if (n == 0) return Amplimorphism::identity(rho.net_ptr());
  Amplimorphism out = rho;
  for (int k = 1; k < n; ++k) out = tensor_objects(rho, out);
  return out;
}

Intertwiner tensor_arrows(const Intertwiner& t, const Intertwiner& s) {
  const Amplimorphism& rho1 = t.source;
  const Eigen::Index m2 = s.target.multiplicity();
  Mat b = amplify(t.block, m2) * rho1.lift(s.block);
  return {tensor_objects(t.source, s.source), tensor_objects(t.target, s.target), std::move(b)};
}

Intertwiner retarget(const Intertwiner& t, const Amplimorphism& source, const Amplimorphism& target) {
  if (t.block.rows() != target.size() || t.block.cols() != source.size()) throw Error("retarget: shape mismatch");
  return {source, target, t.block};
}

DirectSum direct_sum(const Amplimorphism& rho1, const Amplimorphism& rho2) {
  if (rho1.net_ptr() != rho2.net_ptr()) throw Error("direct_sum: objects live on different nets");
  const Eigen::Index s1 = rho1.size(), s2 = rho2.size();
  std::vector<Mat> images;
  images.reserve(rho1.images().size());
  for (std::size_t k = 0; k < rho1.images().size(); ++k) {
    Mat m = Mat::Zero(s1 + s2, s1 + s2);
    m.topLeftCorner(s1, s1) = rho1.images()[k];
    m.bottomRightCorner(s2, s2) = rho2.images()[k];
    images.push_back(std::move(m));
  }
  std::optional<Region> support;
  if (rho1.support() && rho2.support()) {
    const auto ub = rho1.net().site().upper_bounds({*rho1.support(), *rho2.support()});
    if (!ub.empty()) support = ub.front();
  } else if (rho1.is_identity()) {
    support = rho2.support();
  } else if (rho2.is_identity()) {
    support = rho1.support();
  }
  Amplimorphism alpha(rho1.net_ptr(), rho1.multiplicity() + rho2.multiplicity(), std::move(images), support,
                      join_label(rho1.label(), rho2.label(), "+"));
  Mat w1 = Mat::Zero(s1 + s2, s1);
  w1.topRows(s1) = rho1.unit();
  Mat w2 = Mat::Zero(s1 + s2, s2);
  w2.bottomRows(s2) = rho2.unit();
  return {alpha, {rho1, alpha, w1}, {rho2, alpha, w2}};
}

std::optional<Mat> find_isometry_onto(const Mat& e, const ConcreteAlgebra& alg, Eigen::Index m,
                                      std::string* diagnostic, double tol) {
  const Eigen::Index d = alg.ambient_dim();
  const Eigen::Index n = e.rows() / d;
  const Mat range = range_basis(e, tol);
  const Eigen::Index r = range.cols();
  auto accept = [&](const Mat& w) {
    return (w * w.adjoint() - e).norm() < tol && entry_defect(w, alg) < tol && is_partial_isometry(w, tol);
  };
  if (r > m * d) {
    if (diagnostic) *diagnostic = "rank " + std::to_string(r) + " exceeds " + std::to_string(m * d);
    return std::nullopt;
  }
  if (alg.is_full()) {
    Mat w = Mat::Zero(n * d, m * d);
    w.leftCols(r) = range;
    if (accept(w)) return w;
  }
  // sweep over E * (alg (x) M_{n x m})
  std::vector<Mat> dirs;
  for (Eigen::Index j = 0; j < m; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      for (const auto& b : alg.basis()) dirs.push_back(e * kron(matrix_unit(n, m, i, j), b));
  constexpr int kSweep = 24;
  DetRng rng(0x3c6ef372fe94f82bULL);
  Eigen::Index best_rank = 0;
  for (int t = 0; t < kSweep; ++t) {
    Mat x = Mat::Zero(n * d, m * d);
    for (const auto& dir : dirs) x += rng.complex_symmetric() * dir;
    const Mat w = polar_part(x, tol);
    best_rank = std::max(best_rank, range_basis(x, tol).cols());
    if (accept(w)) return w;
  }
  if (diagnostic)
    *diagnostic = "no algebra-valued isometry found after " + std::to_string(kSweep) + " candidates (best rank " +
                  std::to_string(best_rank) + " of " + std::to_string(r) + ")";
  return std::nullopt;
}

SubobjectResult subobject(const Amplimorphism& rho, const Mat& e, double tol) {
  if (e.rows() != rho.size() || e.cols() != rho.size()) throw Error("subobject: E has shape " + describe_shape(e));
  if (!is_projection(e, tol)) throw Error("subobject: E is not a projection");
  const auto rep = check_intertwiner({rho, rho, e}, tol);
  if (!rep.ok(tol)) throw Error("subobject: E is not in (rho, rho)");
  if ((e - rho.unit()).norm() < tol) return {Subobject{rho, unit_arrow(rho)}, ""};
  const Eigen::Index d = rho.ambient_dim();
  const Eigen::Index r = range_basis(e, tol).cols();
  if (r == 0) return {std::nullopt, "E = 0"};
  std::string diag;
  for (Eigen::Index m = (r + d - 1) / d; m <= rho.multiplicity(); ++m) {
    auto w = find_isometry_onto(e, rho.net().global(), m, &diag, tol);
    if (!w) continue;
    const Mat v = *w;
    Amplimorphism beta = Amplimorphism::from_map(
        rho.net_ptr(), m, [&](const Mat& a) -> Mat { return v.adjoint() * rho(a) * v; }, rho.support(),
        "sub" + rho.label());
    return {Subobject{beta, {beta, rho, v}}, ""};
  }
  return {std::nullopt, diag};
}

Mat block(const Mat& t, Eigen::Index n_rho, Eigen::Index d, Eigen::Index i, Eigen::Index j) {
  const Eigen::Index s = n_rho * d;
  if (t.rows() % s != 0 || t.cols() % s != 0) throw Error("block: arrow shape incompatible with n_rho");
  if (i < 0 || j < 0 || i >= t.rows() / s || j >= t.cols() / s) throw Error("block: index out of range");
  return t.block(i * s, j * s, s, s);
}

Mat assemble_blocks(const std::vector<std::vector<Mat>>& blocks) {
  if (blocks.empty() || blocks.front().empty()) throw Error("assemble_blocks: empty");
  const Eigen::Index s = blocks.front().front().rows();
  const auto p = static_cast<Eigen::Index>(blocks.size());
  const auto q = static_cast<Eigen::Index>(blocks.front().size());
  Mat out(p * s, q * blocks.front().front().cols());
  const Eigen::Index c = blocks.front().front().cols();
  for (Eigen::Index i = 0; i < p; ++i)
    for (Eigen::Index j = 0; j < q; ++j) out.block(i * s, j * c, s, c) = blocks[i][j];
  return out;
}

namespace {

// Restricts a family of arrows to the combinations whose entries lie in A.
std::vector<Mat> restrict_entries(const std::vector<Mat>& ts, const ConcreteAlgebra& alg, double tol) {
  if (alg.is_full() || ts.empty()) return ts;
  const Eigen::Index d = alg.ambient_dim();
  const Eigen::Index rows = ts.front().rows(), cols = ts.front().cols();
  StackedKernel acc(static_cast<Eigen::Index>(ts.size()));
  Mat sys(rows * cols, static_cast<Eigen::Index>(ts.size()));
  for (std::size_t k = 0; k < ts.size(); ++k) {
    Mat off = ts[k];
    for (Eigen::Index j = 0; j < cols / d; ++j)
      for (Eigen::Index i = 0; i < rows / d; ++i) {
        const Mat e = ts[k].block(i * d, j * d, d, d);
        off.block(i * d, j * d, d, d) = e - alg.element(alg.coords(e));
      }
    sys.col(static_cast<Eigen::Index>(k)) = vec(off);
  }
  acc.add(sys);
  const Mat ker = acc.kernel(tol);
  std::vector<Mat> out;
  for (Eigen::Index j = 0; j < ker.cols(); ++j) {
    Mat t = Mat::Zero(rows, cols);
    for (std::size_t k = 0; k < ts.size(); ++k) t += ker(static_cast<Eigen::Index>(k), j) * ts[k];
    out.push_back(t);
  }
  return out;
}

std::vector<Intertwiner> to_arrows(const Amplimorphism& rho, const Amplimorphism& sigma, const std::vector<Mat>& ts,
                                   double tol) {
  MatrixSpan span(sigma.size(), rho.size());
  for (const auto& t : ts) span.try_add(t, tol);
  std::vector<Intertwiner> out;
  for (const auto& b : span.basis()) out.push_back({rho, sigma, b});
  return out;
}

}  // namespace

std::vector<Intertwiner> intertwiner_space(const Amplimorphism& rho, const Amplimorphism& sigma, double tol) {
  if (rho.net_ptr() != sigma.net_ptr()) throw Error("intertwiner_space: objects live on different nets");
  const Eigen::Index sr = rho.size(), ss = sigma.size(), dim = sr + ss;
  // Off-diagonal corner of the commutant of (rho + sigma)(A).
  std::vector<Mat> ops;
  auto diag = [&](const Mat& a, const Mat& b) {
    Mat m = Mat::Zero(dim, dim);
    m.topLeftCorner(sr, sr) = a;
    m.bottomRightCorner(ss, ss) = b;
    return m;
  };
  ops.push_back(diag(rho.unit(), sigma.unit()));
  for (const auto& g : rho.net().global_generators()) ops.push_back(diag(rho(g), sigma(g)));
  const auto comm = commutant_basis(dim, hermitian_parts(ops, tol), tol);
  std::vector<Mat> ts;
  for (const auto& x : comm) {
    Mat t = sigma.unit() * x.block(sr, 0, ss, sr) * rho.unit();
    if (t.norm() > tol) ts.push_back(t);
  }
  MatrixSpan span(ss, sr);
  for (const auto& t : ts) span.try_add(t, tol);
  return to_arrows(rho, sigma, restrict_entries(span.basis(), rho.net().global(), tol), tol);
}

std::vector<Intertwiner> intertwiner_space_reference(const Amplimorphism& rho, const Amplimorphism& sigma,
                                                     double tol) {
  const auto& g = rho.net().global();
  const Eigen::Index d = rho.ambient_dim();
  const Eigen::Index nr = rho.multiplicity(), ns = sigma.multiplicity();
  std::vector<Mat> params;
  for (Eigen::Index j = 0; j < nr; ++j)
    for (Eigen::Index i = 0; i < ns; ++i)
      for (const auto& b : g.basis()) params.push_back(kron(matrix_unit(ns, nr, i, j), b));
  const auto np = static_cast<Eigen::Index>(params.size());
  const Eigen::Index rows = ns * d * nr * d;
  StackedKernel acc(np);
  auto add_block = [&](const std::function<Mat(const Mat&)>& f) {
    Mat blk(rows, np);
    for (Eigen::Index k = 0; k < np; ++k) blk.col(k) = vec(f(params[static_cast<std::size_t>(k)]));
    acc.add(blk);
  };
  add_block([&](const Mat& t) { return Mat(t * rho.unit() - t); });
  add_block([&](const Mat& t) { return Mat(sigma.unit() * t - t); });
  for (std::size_t k = 0; k < g.basis().size(); ++k) {
    const Mat& ra = rho.images()[k];
    const Mat& sa = sigma.images()[k];
    add_block([&](const Mat& t) { return Mat(t * ra - sa * t); });
  }
  const Mat ker = acc.kernel(tol);
  std::vector<Mat> ts;
  for (Eigen::Index c = 0; c < ker.cols(); ++c) {
    Mat t = Mat::Zero(ns * d, nr * d);
    for (Eigen::Index k = 0; k < np; ++k) t += ker(k, c) * params[static_cast<std::size_t>(k)];
    ts.push_back(t);
  }
  return to_arrows(rho, sigma, ts, tol);
}

UnitarySearch find_unitary_equivalence(const Amplimorphism& rho, const Amplimorphism& sigma, double tol) {
  UnitarySearch out;
  if (rho.same_as(sigma)) {
    out.unitary = unit_arrow(rho);
    out.space_dim = -1;
    return out;
  }
  const auto basis = intertwiner_space(rho, sigma, tol);
  out.space_dim = static_cast<Eigen::Index>(basis.size());
  if (basis.empty()) return out;
  std::vector<Mat> candidates;
  for (const auto& t : basis) candidates.push_back(t.block);
  DetRng rng(0xa54ff53a5f1d36f1ULL);
  constexpr int kRandom = 32;
  for (int k = 0; k < kRandom; ++k) {
    Mat c = Mat::Zero(basis.front().block.rows(), basis.front().block.cols());
    for (const auto& t : basis) c += rng.complex_symmetric() * t.block;
    candidates.push_back(c);
  }
  for (const auto& c : candidates) {
    ++out.candidates_tried;
    Intertwiner w{rho, sigma, polar_part(c, tol)};
    if (is_unitary_arrow(w, tol) && check_intertwiner(w, tol).ok(tol)) {
      out.unitary = w;
      return out;
    }
  }
  return out;
}

}  // namespace dhr
