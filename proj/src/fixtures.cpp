#include "dhr/fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace dhr::fixtures {

namespace {

struct Box {
  int r0, r1, c0, c1;
  int area() const { return (r1 - r0 + 1) * (c1 - c0 + 1); }
  bool contains(const Box& o) const { return r0 <= o.r0 && o.r1 <= r1 && c0 <= o.c0 && o.c1 <= c1; }
  bool meets(const Box& o) const { return !(r1 < o.r0 || o.r1 < r0 || c1 < o.c0 || o.c1 < c0); }
};

std::vector<Box> grid_boxes(int rows, int cols) {
  std::vector<Box> boxes;
  for (int r0 = 0; r0 < rows; ++r0)
    for (int r1 = r0; r1 < rows; ++r1)
      for (int c0 = 0; c0 < cols; ++c0)
        for (int c1 = c0; c1 < cols; ++c1)
          if (!(r0 == 0 && c0 == 0 && r1 == rows - 1 && c1 == cols - 1)) boxes.push_back({r0, r1, c0, c1});
  std::sort(boxes.begin(), boxes.end(), [](const Box& a, const Box& b) {
    return std::make_tuple(a.area(), a.r0, a.c0, a.r1, a.c1) < std::make_tuple(b.area(), b.r0, b.c0, b.r1, b.c1);
  });
  return boxes;
}

Box parse_box(const std::string& id) {
  // r{r0}{r1}c{c0}{c1}
  return {id[1] - '0', id[2] - '0', id[4] - '0', id[5] - '0'};
}

Mat ipow(const Mat& m, int p) {
  Mat out = identity(m.rows());
  for (int i = 0; i < p; ++i) out = out * m;
  return out;
}

// Operators on the field space (C^D)^{(x) N}; site 0 is the leftmost factor.
struct Field {
  int sites;
  int dim;
  Mat clock, shift;

  Field(int n, int d) : sites(n), dim(d), clock(Mat::Zero(d, d)), shift(Mat::Zero(d, d)) {
    for (int j = 0; j < d; ++j) {
      clock(j, j) = std::polar(1.0, 2.0 * std::numbers::pi * j / d);
      shift((j + 1) % d, j) = 1.0;
    }
  }
  Eigen::Index total() const { return static_cast<Eigen::Index>(std::pow(dim, sites)); }
  Mat at(int s, const Mat& op) const {
    const auto left = static_cast<Eigen::Index>(std::pow(dim, s));
    const auto right = static_cast<Eigen::Index>(std::pow(dim, sites - s - 1));
    return kron(kron(identity(left), op), identity(right));
  }
  // Jordan-Wigner Majoranas: gamma_{2s} = S_s X_s, gamma_{2s+1} = S_s Y_s with S_s = Z_0 ... Z_{s-1}.
  Mat majorana(int j) const {
    const int s = j / 2;
    Mat y(2, 2);
    y << 0.0, cplx(0, -1), cplx(0, 1), 0.0;
    Mat out = at(s, j % 2 == 0 ? shift : y);
    for (int t = 0; t < s; ++t) out = at(t, clock) * out;
    return out;
  }
};

std::vector<int> box_sites(const Box& b, int cols) {
  std::vector<int> out;
  for (int r = b.r0; r <= b.r1; ++r)
    for (int c = b.c0; c <= b.c1; ++c) out.push_back(r * cols + c);
  return out;
}

std::vector<Mat> field_observables(const Field& f, const std::vector<int>& sites, const GaugeFixtureSpec& spec) {
  std::vector<Mat> out;
  if (spec.fermionic) {
    std::vector<Mat> gammas;
    for (int s : sites) {
      gammas.push_back(f.majorana(2 * s));
      gammas.push_back(f.majorana(2 * s + 1));
    }
    const std::size_t m = gammas.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      if (__builtin_popcountll(mask) % 2 != 0) continue;
      Mat p = identity(f.total());
      for (std::size_t i = 0; i < m; ++i)
        if (mask & (std::size_t{1} << i)) p = p * gammas[i];
      out.push_back(p);
    }
    return out;
  }
  const int d = f.dim;
  const std::size_t m = sites.size();
  std::vector<int> exps(2 * m, 0);
  for (;;) {
    int charge = 0;
    for (std::size_t i = 0; i < m; ++i) charge += exps[2 * i + 1];
    if (charge % spec.order == 0) {
      Mat p = identity(f.total());
      for (std::size_t i = 0; i < m; ++i)
        p = p * f.at(sites[i], ipow(f.clock, exps[2 * i]) * ipow(f.shift, exps[2 * i + 1]));
      out.push_back(p);
    }
    std::size_t k = 0;
    while (k < exps.size() && ++exps[k] == d) exps[k++] = 0;
    if (k == exps.size()) break;
  }
  return out;
}

Mat vacuum_embedding(const Field& f, const GaugeFixtureSpec& spec) {
  const Eigen::Index n = f.total();
  if (!spec.vacuum || spec.order == 1) return identity(n);
  std::vector<Eigen::Index> keep;
  for (Eigen::Index x = 0; x < n; ++x) {
    Eigen::Index y = x;
    int charge = 0;
    for (int s = 0; s < f.sites; ++s) {
      charge += static_cast<int>(y % f.dim);
      y /= f.dim;
    }
    if (charge % spec.order == 0) keep.push_back(x);
  }
  Mat p = Mat::Zero(n, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) p(keep[j], static_cast<Eigen::Index>(j)) = 1.0;
  return p;
}

Mat diag_unit(int i) {
  Mat e = Mat::Zero(2, 2);
  e(i, i) = 1.0;
  return e;
}

Mat charged_field_unitary(const Field& f, const GaugeFixtureSpec& spec, int site, int charge) {
  if (spec.vacuum && spec.order > 1) return f.at(site, ipow(f.clock, charge));
  if (spec.fermionic) return ipow(f.majorana(2 * site), charge);
  return f.at(site, ipow(f.shift, charge));
}

Mat compress(const Fixture& fx, const Mat& field_op) {
  const Mat& p = fx.embedding;
  const Mat c = p.adjoint() * field_op * p;
  return fx.spec.doubled ? kron(c, identity(2)) : c;
}

std::string charged_id(int charge, const std::string& cell) {
  return charge == 1 ? "rho_" + cell : "rho" + std::to_string(charge) + "_" + cell;
}

}  // namespace

std::string box_id(int r0, int r1, int c0, int c1) {
  return "r" + std::to_string(r0) + std::to_string(r1) + "c" + std::to_string(c0) + std::to_string(c1);
}

CausalSite grid_site(int rows, int cols) {
  if (rows < 1 || cols < 1 || rows > 9 || cols > 9) throw Error("grid must be between 1x1 and 9x9");
  const auto boxes = grid_boxes(rows, cols);
  std::vector<std::string> ids;
  for (const auto& b : boxes) ids.push_back(box_id(b.r0, b.r1, b.c0, b.c1));
  std::vector<std::pair<std::string, std::string>> leq, disjoint;
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = 0; j < boxes.size(); ++j) {
      if (boxes[j].contains(boxes[i])) leq.emplace_back(ids[i], ids[j]);
      if (!boxes[i].meets(boxes[j])) disjoint.emplace_back(ids[i], ids[j]);
    }
  return CausalSite(ids, leq, disjoint);
}

const FixtureObject& Fixture::object(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return o;
  throw Error("fixture " + spec.name + " has no object " + id);
}

Region Fixture::cell_region(int r, int c) const { return net->site().index(box_id(r, r, c, c)); }

Mat Fixture::charged_unitary(int r, int c, int charge) const {
  if (r < 0 || c < 0 || r >= spec.rows || c >= spec.cols) throw Error("cell outside the grid");
  if (charge < 0 || charge >= spec.site_dim) throw Error("charge label out of range");
  const Field f(spec.rows * spec.cols, spec.site_dim);
  return compress(*this, charged_field_unitary(f, spec, r * spec.cols + c, charge));
}

FixtureObject build_charged_morphism(const Fixture& fx, int r, int c, int charge) {
  const NetPtr& net = fx.net;
  const auto& site = net->site();
  const Region home = fx.cell_region(r, c);
  const Mat us = fx.charged_unitary(r, c, charge);
  const std::string cell = site.id(home);
  Amplimorphism rho = Amplimorphism::conjugation(net, us, 1, home, charged_id(charge, cell));
  // one target object per top-left cell, re-tagged with the region's support
  std::vector<std::optional<Amplimorphism>> by_cell(static_cast<std::size_t>(fx.spec.rows * fx.spec.cols));
  TransporterFamily fam{rho, home, {}};
  for (Region a = 0; a < site.size(); ++a) {
    const Box b = parse_box(site.id(a));
    if (a == home) {
      fam.transports.push_back({rho, rho.unit()});
      continue;
    }
    const Mat ut = fx.charged_unitary(b.r0, b.c0, charge);
    auto& slot = by_cell[static_cast<std::size_t>(b.r0 * fx.spec.cols + b.c0)];
    if (!slot) {
      slot = (b.r0 == r && b.c0 == c) ? rho
                                      : Amplimorphism::conjugation(net, ut, 1, std::nullopt,
                                                                   charged_id(charge, box_id(b.r0, b.r0, b.c0, b.c0)));
    }
    fam.transports.push_back({slot->with_support(a), ut * us.adjoint()});
  }
  return {rho.label(), rho, fam};
}

Fixture build_gauge_fixture(const GaugeFixtureSpec& spec) {
  if (spec.rows < 2 || spec.cols < 2) throw Error("gauge fixtures need at least a 2x2 grid");
  if (spec.order < 1) throw Error("group order must be positive");
  if (spec.order > 1 && spec.site_dim != spec.order) throw Error("site dimension must equal the group order");
  if (spec.fermionic && (spec.order != 2 || spec.site_dim != 2)) throw Error("fermionic fixtures require Z_2");
  const int n = spec.rows * spec.cols;
  const Field f(n, spec.site_dim);
  Fixture fx;
  fx.spec = spec;
  fx.manifest.name = spec.name;
  CausalSite site = grid_site(spec.rows, spec.cols);
  const Mat p = vacuum_embedding(f, spec);
  fx.embedding = p;
  const Eigen::Index ref_dim = spec.doubled ? 2 * p.cols() : p.cols();
  const auto boxes = grid_boxes(spec.rows, spec.cols);
  std::vector<ConcreteAlgebra> local = kernels::map_indices<ConcreteAlgebra>(boxes.size(), [&](std::size_t i) {
    std::vector<Mat> basis;
    for (const auto& m : field_observables(f, box_sites(boxes[i], spec.cols), spec)) {
      const Mat b = p.adjoint() * m * p;
      if (spec.doubled) {
        basis.push_back(kron(b, diag_unit(0)));
        basis.push_back(kron(b, diag_unit(1)));
      } else {
        basis.push_back(b);
      }
    }
    return ConcreteAlgebra::from_basis(ref_dim, basis);
  });
  fx.net = NetModel::build(site, std::move(local));
  fx.manifest.site = validate_site(fx.net->site());
  fx.manifest.net = check_net(*fx.net);

  auto& notes = fx.manifest.notes;
  notes.push_back("reference space dimension " + std::to_string(ref_dim));
  notes.push_back(std::string("global algebra ") + (fx.manifest.net.irreducible ? "irreducible" : "reducible") +
                  ", dimension " + std::to_string(fx.manifest.net.global_dim));
  std::string failing;
  for (const auto& d : fx.manifest.net.duality)
    if (!d.holds) failing += (failing.empty() ? "" : ",") + fx.net->site().id(d.region);
  notes.push_back(failing.empty() ? "duality holds at every region" : "duality fails at " + failing);

  Amplimorphism iota = Amplimorphism::identity(fx.net);
  fx.objects.push_back({"iota", iota, trivial_family(iota, 0)});
  for (int q = 1; q < spec.site_dim; ++q)
    for (int r = 0; r < spec.rows; ++r)
      for (int c = 0; c < spec.cols; ++c) fx.objects.push_back(build_charged_morphism(fx, r, c, q));
  if (spec.doubled) {
    // X -> X (1 (x) e_11): localized everywhere, kills the second summand of the center.
    const Mat cut = kron(identity(ref_dim / 2), diag_unit(0));
    Amplimorphism sigma = Amplimorphism::from_map(
        fx.net, 1, [&](const Mat& x) -> Mat { return x * cut; }, Region{0}, "sigma_nf");
    fx.objects.push_back({"sigma_nf", sigma, trivial_family(sigma, 0)});
  }
  return fx;
}

std::vector<std::string> fixture_names() {
  return {"z2_2x2", "z2_2x2_doubled", "z2f_2x2_full", "z3_2x2", "trivial_2x2"};
}

GaugeFixtureSpec named_spec(const std::string& name) {
  GaugeFixtureSpec s;
  s.name = name;
  if (name == "z2_2x2") return s;
  if (name == "z2_2x2_doubled") {
    s.doubled = true;
    return s;
  }
  if (name == "z2f_2x2_full") {
    s.fermionic = true;
    s.vacuum = false;
    return s;
  }
  if (name == "z3_2x2") {
    s.order = 3;
    s.site_dim = 3;
    return s;
  }
  if (name == "trivial_2x2") {
    s.order = 1;
    s.site_dim = 2;
    s.vacuum = false;
    return s;
  }
  throw Error("unknown fixture: " + name);
}

Fixture named_fixture(const std::string& name) { return build_gauge_fixture(named_spec(name)); }

}  // namespace dhr::fixtures
