#include "dhr/cli.hpp"

#include "dhr/conjugation.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <ostream>

namespace dhr::cli {

namespace {

using io::Json;

class UsageError : public io::ParseError {
 public:
  using io::ParseError::ParseError;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Json complex_json(cplx z) { return Json::array({z.real(), z.imag()}); }

struct Loaded {
  io::NetSpecDocument doc;
  Json input;
  double tol = kTol;
  int d_max = 4;
};

Loaded load(const Options& opt) {
  if (!opt.input.empty() && !opt.fixture.empty()) throw UsageError("give either a path or --fixture, not both");
  Loaded l;
  const double load_tol = opt.tol.value_or(kTol);
  if (!opt.fixture.empty()) {
    const auto names = fixtures::fixture_names();
    if (std::find(names.begin(), names.end(), opt.fixture) == names.end())
      throw UsageError("unknown fixture '" + opt.fixture + "'");
    l.doc = io::document_from_fixture(fixtures::named_fixture(opt.fixture));
    l.input = {{"fixture", opt.fixture}};
  } else if (!opt.input.empty()) {
    l.doc = io::load_document(opt.input, load_tol);
    l.input = {{"path", opt.input}};
  } else {
    throw UsageError("no input: give a net-spec path or --fixture");
  }
  l.tol = opt.tol ? *opt.tol : l.doc.options.tol.value_or(kTol);
  l.d_max = opt.d_max ? *opt.d_max : l.doc.options.d_max.value_or(4);
  if (l.tol <= 0.0) throw UsageError("--tol must be positive");
  if (l.d_max < 1) throw UsageError("--dmax must be at least 1");
  return l;
}

Json header(const std::string& command, const Loaded& l) {
  Json j;
  j["format"] = io::kReportFormat;
  j["command"] = command;
  j["input"] = l.input;
  j["document"] = l.doc.name;
  j["tolerances"] = {{"tol", l.tol}, {"dmax", l.d_max}};
  return j;
}

template <class F>
Outcome guarded(const std::string& command, F&& body) {
  try {
    return body();
  } catch (const io::ParseError& e) {
    Outcome o;
    o.exit_code = 2;
    o.report = {{"format", io::kReportFormat}, {"command", command}, {"error", e.what()}};
    o.summary = command + ": " + e.what();
    return o;
  } catch (const Error& e) {
    Outcome o;
    o.exit_code = 1;
    o.report = {{"format", io::kReportFormat}, {"command", command}, {"failure", e.what()}};
    o.summary = command + ": failed: " + e.what();
    return o;
  }
}

std::string region_name(const Amplimorphism& rho, const std::optional<Region>& r) {
  return r ? rho.net().site().id(*r) : std::string("none");
}

Json faithfulness_json(const FaithfulnessReport& f, const CausalSite& site) {
  auto ids = [&](const std::vector<Region>& rs) {
    Json out = Json::array();
    for (Region r : rs) out.push_back(site.id(r));
    return out;
  };
  return {{"faithful_kernel", f.faithful_kernel},     {"faithful_central", f.faithful_central},
          {"doubly_kernel", f.doubly_kernel},         {"doubly_central", f.doubly_central},
          {"kernel_failures", ids(f.kernel_failures)}, {"central_failures", ids(f.central_failures)},
          {"consistent", f.consistent()}};
}

Json homogeneity_json(const HomogeneityReport& h, const CausalSite& site) {
  Json regions = Json::array();
  for (const auto& r : h.regions)
    regions.push_back(
        {{"region", site.id(r.region)}, {"ok", r.ok}, {"route", r.route}, {"diagnostic", r.diagnostic}});
  return {{"homogeneous", h.homogeneous}, {"regions", std::move(regions)}};
}

Json stages_json(const ConjugationTheoremReport& t) {
  Json stages = Json::array();
  for (const auto& s : t.stages) stages.push_back({{"stage", s.name}, {"ok", s.ok}, {"detail", s.detail}});
  Json j;
  j["stages"] = std::move(stages);
  j["aborted_at"] = t.aborted_at ? Json(*t.aborted_at) : Json(nullptr);
  j["lambda"] = t.lambda ? complex_json(t.lambda->lambda) : Json(nullptr);
  j["standard_constant"] = t.standard ? complex_json(t.standard->value) : Json(nullptr);
  j["standard"] = t.standard_ok();
  j["member"] = t.member;
  j["ok"] = t.ok();
  return j;
}

Json solution_json(const ConjugateSolution& s, double tol) {
  const Mat one = identity(s.rho.ambient_dim());
  const ScalarFit a = scalar_fit(s.r.block.adjoint() * s.r.block, one);
  const ScalarFit b = scalar_fit(s.r_bar.block.adjoint() * s.r_bar.block, one);
  Json j;
  j["rho"] = s.rho.label();
  j["rho_bar"] = s.rho_bar.label();
  j["R"] = io::matrix_to_json(s.r.block);
  j["R_bar"] = io::matrix_to_json(s.r_bar.block);
  j["residuals"] = Json::array({s.residual, s.residual_bar});
  j["RR"] = {{"value", complex_json(a.value)}, {"scalar", a.residual < tol}};
  j["RbarRbar"] = {{"value", complex_json(b.value)}, {"scalar", b.residual < tol}};
  return j;
}

}  // namespace

Outcome check_net(const Options& opt) {
  return guarded("check-net", [&] {
    const Loaded l = load(opt);
    const NetCheckReport r = dhr::check_net(*l.doc.net, l.tol);
    Outcome o;
    o.report = header("check-net", l);
    o.report["report"] = io::net_check_json(r, l.doc.net->site());
    o.exit_code = r.ok() ? 0 : 1;
    std::size_t failing = 0;
    for (const auto& d : r.duality) failing += d.holds ? 0 : 1;
    o.summary = "check-net " + l.doc.name + ": " + (r.ok() ? "PASS" : "FAIL") + " (site " +
                (r.site.ok() ? "ok" : "violations") + ", isotony " + std::to_string(r.isotony.size()) +
                " violations, locality " + std::to_string(r.locality.size()) + " violations, duality fails at " +
                std::to_string(failing) + " of " + std::to_string(r.duality.size()) + " regions, max defect " +
                num(r.max_duality_defect) + ", " + (r.irreducible ? "irreducible" : "reducible") + ")";
    return o;
  });
}

Outcome analyze(const Options& opt, const std::string& object_id) {
  return guarded("analyze", [&] {
    const Loaded l = load(opt);
    const io::SpecObject& obj = l.doc.object(object_id);
    const Amplimorphism& rho = obj.rho;
    const CausalSite& site = l.doc.net->site();
    const double tol = l.tol;
    Outcome o;
    o.report = header("analyze", l);
    Json& r = o.report;
    r["object"] = {{"id", obj.id},
                   {"label", rho.label()},
                   {"multiplicity", rho.multiplicity()},
                   {"support", region_name(rho, rho.support())}};
    const AmplimorphismReport ar = check_amplimorphism(rho, tol);
    r["amplimorphism"] = {{"multiplicativity", ar.multiplicativity}, {"star", ar.star},
                          {"unit_projection", ar.unit_projection}, {"corner", ar.corner},
                          {"localization", ar.localization},       {"local_membership", ar.local_membership},
                          {"ok", ar.ok(tol)}};
    r["localized"] = rho.support() ? Json(check_localized(rho, *rho.support(), tol)) : Json(nullptr);
    const auto endo = intertwiner_space(rho, rho, tol);
    r["endomorphism_dim"] = endo.size();
    bool good = ar.ok(tol);
    std::string summary = "analyze " + obj.id + ": n=" + std::to_string(rho.multiplicity()) + ", (rho,rho) dim " +
                          std::to_string(endo.size());
    if (!obj.family) {
      r["transportable"] = nullptr;
      r["note"] = "no transporter family; statistics not evaluated";
      o.exit_code = good ? 0 : 1;
      o.summary = summary + ", no transporter family";
      return o;
    }
    const TransporterFamily& fam = *obj.family;
    const FamilyReport fr = validate_family(fam, tol);
    r["transportable"] = {{"ok", fr.ok(tol)}, {"worst", fr.worst()}};
    good = good && fr.ok(tol);

    const FaithfulnessReport faith = check_faithfulness(fam, tol);
    r["faithfulness"] = faithfulness_json(faith, site);

    const SymmetryResult sym = symmetry(fam, fam, tol);
    const ScalarFit eps_fit = scalar_fit(sym.eps.block, sym.eps.source.unit());
    r["self_statistics"] = {{"transport_discrepancy", sym.discrepancy},
                            {"scalar", eps_fit.residual < tol},
                            {"value", complex_json(eps_fit.value)},
                            {"scalar_residual", eps_fit.residual}};

    const MembershipReport mr = check_relevant_membership(fam, l.d_max, tol);
    const StatisticsReport& st = mr.statistics;
    Json summands = Json::array();
    for (std::size_t k = 0; k < st.summands.size(); ++k) {
      const SummaryStatistics& s = st.summands[k];
      Json sj;
      sj["multiplicity"] = s.beta.multiplicity();
      sj["lambda"] = s.lambda ? complex_json(s.lambda->lambda) : Json(nullptr);
      sj["lambda_residual"] = s.lambda ? Json(s.lambda->residual) : Json(nullptr);
      if (s.witness)
        sj["witness"] = {{"d", s.witness->d},
                         {"kind", s.witness->kind == SymKind::symmetric ? "symmetric" : "antisymmetric"},
                         {"sign", s.witness->sign}};
      else
        sj["witness"] = nullptr;
      sj["notes"] = s.notes;
      if (k < mr.summands.size()) {
        const MembershipSummand& m = mr.summands[k];
        sj["member"] = m.member;
        sj["equivalence_consistent"] = m.equivalence_consistent;
        sj["witness_faithfulness"] =
            m.gamma_faithfulness ? faithfulness_json(*m.gamma_faithfulness, site) : Json(nullptr);
        sj["homogeneous"] = m.homogeneity ? Json(m.homogeneity->homogeneous) : Json(nullptr);
        sj["evidence"] = m.evidence;
      }
      summands.push_back(std::move(sj));
    }
    r["statistics"] = {{"endomorphism_dim", st.endomorphism_dim},
                       {"decomposed", st.decomposed},
                       {"classified", st.classified},
                       {"dmax", st.d_max},
                       {"summands", std::move(summands)}};

    std::optional<LeftInverse> phi;
    if (st.summands.size() == 1 && !st.decomposed) phi = st.summands.front().left_inverse;
    try {
      const SimpleReport sr = check_simple(rho, sym.eps, phi, tol);
      r["simple"] = {{"phi_says", sr.phi_test ? Json(sr.phi_says) : Json(nullptr)},
                     {"eps_says", sr.eps_says},
                     {"square_says", sr.square_says},
                     {"square_endomorphisms", sr.square_endomorphisms},
                     {"consistent", sr.consistent},
                     {"simple", sr.simple},
                     {"sign", sr.sign ? Json(*sr.sign) : Json(nullptr)}};
    } catch (const Error& e) {
      r["simple"] = {{"error", e.what()}};
      good = false;
    }

    const HomogeneityReport hr = check_homogeneous(fam, l.d_max, tol);
    r["homogeneity"] = homogeneity_json(hr, site);
    r["member"] = mr.member;
    o.exit_code = good ? 0 : 1;

    summary += ", " + std::to_string(st.summands.size()) + " summand" + (st.summands.size() == 1 ? "" : "s");
    for (const auto& s : st.summands)
      if (s.lambda) summary += ", lambda=" + num(s.lambda->lambda.real());
    summary += std::string(", ") + (r["simple"].value("simple", false) ? "simple" : "not simple");
    summary += std::string(", ") + (faith.doubly_faithful() ? "doubly faithful" : "not doubly faithful");
    summary += std::string(", ") + (hr.homogeneous ? "homogeneous" : "not homogeneous");
    summary += std::string(", ") + (mr.member ? "member" : "not a member");
    o.summary = summary;
    return o;
  });
}

Outcome conjugate(const Options& opt, const std::string& object_id, const std::string& candidate_id) {
  return guarded("conjugate", [&] {
    const Loaded l = load(opt);
    const io::SpecObject& obj = l.doc.object(object_id);
    const io::SpecObject& cand = candidate_id.empty() ? obj : l.doc.object(candidate_id);
    const double tol = l.tol;
    Outcome o;
    o.report = header("conjugate", l);
    Json& r = o.report;
    r["object"] = obj.id;
    r["candidate"] = cand.id;
    const ConjugateSearch search = solve_conjugate(obj.rho, cand.rho, tol);
    r["search"] = {{"r_space_dim", search.r_space_dim},
                   {"r_bar_space_dim", search.r_bar_space_dim},
                   {"candidates", search.candidates},
                   {"sweep_cap", kConjugateSweepCap},
                   {"exhaustive", search.exhaustive},
                   {"found", search.solution.has_value()},
                   {"diagnostic", search.diagnostic}};
    if (!search.solution) {
      r["solution"] = nullptr;
      o.exit_code = 1;
      o.summary = "conjugate " + obj.id + " / " + cand.id + ": no solution (" +
                  (search.exhaustive ? "decided exactly" : "sweep of " + std::to_string(search.candidates) +
                                                                " points, cap " +
                                                                std::to_string(kConjugateSweepCap)) +
                  ")";
      return o;
    }
    ConjugateSolution sol = *search.solution;
    r["solution"] = solution_json(sol, tol);
    bool ok = std::max(sol.residual, sol.residual_bar) < tol;
    try {
      sol = standardize(sol, tol);
      r["standardized"] = solution_json(sol, tol);
    } catch (const Error& e) {
      r["standardized"] = {{"error", e.what()}};
    }
    std::string chain = "not run (no transporter families)";
    if (obj.family && cand.family) {
      const ConjugationTheoremReport t = verify_conjugation_theorems(*obj.family, sol, *cand.family, l.d_max, tol);
      r["theorems"] = stages_json(t);
      ok = ok && t.ok();
      chain = t.ok() ? "member" : "aborted at " + t.aborted_at.value_or("membership");
    } else {
      r["theorems"] = nullptr;
    }
    o.exit_code = ok ? 0 : 1;
    o.summary = "conjugate " + obj.id + " / " + cand.id + ": residuals " + num(sol.residual) + ", " +
                num(sol.residual_bar) + "; theorem chain " + chain;
    return o;
  });
}

Outcome cocycle(const Options& opt, const std::string& object_id) {
  return guarded("cocycle", [&] {
    const Loaded l = load(opt);
    const io::SpecObject& obj = l.doc.object(object_id);
    if (!obj.family) throw io::ParseError("object '" + obj.id + "' has no transporter family");
    const TransporterFamily& fam = *obj.family;
    const CausalSite& site = l.doc.net->site();
    const double tol = l.tol;
    Outcome o;
    o.report = header("cocycle", l);
    Json& r = o.report;
    r["object"] = obj.id;
    const Cocycle z = cocycle_from_transporters(fam, tol);
    const CocycleReport cr = check_cocycle(z, fam, tol);
    const std::size_t n = site.size();
    const auto& gens = l.doc.net->global_generators();
    Json table = Json::array();
    for (Region a = 0; a < n; ++a)
      for (Region b = 0; b < n; ++b) {
        double ident = 0.0;
        for (Region c = 0; c < n; ++c) ident = std::max(ident, (z.at(a, b) * z.at(b, c) - z.at(a, c)).norm());
        double inter = 0.0;
        const Amplimorphism& ta = fam.at(a).target;
        const Amplimorphism& tb = fam.at(b).target;
        for (const auto& g : gens) inter = std::max(inter, (z.at(a, b) * tb(g) - ta(g) * z.at(a, b)).norm());
        table.push_back({{"a", site.id(a)}, {"b", site.id(b)}, {"identity", ident}, {"intertwining", inter}});
      }
    r["cocycle"] = {{"identity", cr.identity},
                    {"diagonal", cr.diagonal},
                    {"locality", cr.locality},
                    {"reproduces", cr.reproduces},
                    {"pairs_without_bound", cr.pairs_without_bound},
                    {"ok", cr.ok(tol)},
                    {"pairs", std::move(table)}};
    const RoundTrip rt = functor_round_trip(fam, tol);
    r["round_trip"] = {{"restrict_extend", rt.restrict_extend},
                       {"extend_restrict", rt.extend_restrict},
                       {"choice_discrepancy", rt.choice_discrepancy},
                       {"ok", rt.ok(tol)}};
    o.exit_code = cr.ok(tol) && rt.ok(tol) ? 0 : 1;
    o.summary = "cocycle " + obj.id + ": identity " + num(cr.identity) + ", locality " + num(cr.locality) +
                ", reproduces " + num(cr.reproduces) + "; round trip " + num(rt.restrict_extend) + " / " +
                num(rt.extend_restrict) + (o.exit_code == 0 ? " PASS" : " FAIL");
    return o;
  });
}

Outcome fixtures_emit(const Options& opt, const std::string& name) {
  return guarded("fixtures emit", [&] {
    Options o2 = opt;
    o2.input.clear();
    o2.fixture = name;
    Loaded l = load(o2);
    if (opt.tol) l.doc.options.tol = opt.tol;
    if (opt.d_max) l.doc.options.d_max = opt.d_max;
    Outcome o;
    o.report = io::to_json(l.doc);
    const bool net_ok = l.doc.manifest.contains("net") && l.doc.manifest["net"].value("ok", false);
    o.summary = "fixture " + name + ": " + std::to_string(l.doc.objects.size()) + " objects, net checks " +
                (net_ok ? "pass" : "recorded with failures (see manifest)");
    return o;
  });
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Superselection sectors on finite nets"};
  app.require_subcommand(1);
  Options opt;
  std::string object, candidate, emit_name;
  double tol = 0.0;
  int dmax = 0;
  auto add_common = [&](CLI::App* sub, bool with_path) {
    if (with_path) sub->add_option("path", opt.input, "net-spec document");
    sub->add_option("--fixture", opt.fixture, "generate the named fixture instead of reading a file");
    sub->add_option("--out", opt.out, "write the JSON report here");
    sub->add_option("--tol", tol, "numerical tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--dmax", dmax, "largest d tried by the statistics classifier")->check(CLI::PositiveNumber);
  };
  auto* c_net = app.add_subcommand("check-net", "net axioms, duality and irreducibility");
  add_common(c_net, true);
  auto* c_an = app.add_subcommand("analyze", "localization, statistics, homogeneity and membership of an object");
  add_common(c_an, true);
  c_an->add_option("--object", object, "object id")->required();
  auto* c_conj = app.add_subcommand("conjugate", "solve the conjugate equations and verify the conjugation chain");
  add_common(c_conj, true);
  c_conj->add_option("--object", object, "object id")->required();
  c_conj->add_option("--candidate", candidate, "candidate conjugate id (default: the object itself)");
  auto* c_coc = app.add_subcommand("cocycle", "cocycle identities and the presheaf round trip");
  add_common(c_coc, true);
  c_coc->add_option("--object", object, "object id")->required();
  auto* c_fix = app.add_subcommand("fixtures", "fixture generation");
  c_fix->require_subcommand(1);
  auto* c_emit = c_fix->add_subcommand("emit", "write a fixture as a net-spec document");
  c_emit->add_option("name", emit_name, "fixture name")->required();
  c_emit->add_option("--out", opt.out, "output path (default: standard output)");
  c_emit->add_option("--tol", tol, "tolerance recorded in the document")->check(CLI::PositiveNumber);
  c_emit->add_option("--dmax", dmax, "dmax recorded in the document")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (tol > 0.0) opt.tol = tol;
  if (dmax > 0) opt.d_max = dmax;

  Outcome o;
  bool emit = false;
  if (c_net->parsed())
    o = check_net(opt);
  else if (c_an->parsed())
    o = analyze(opt, object);
  else if (c_conj->parsed())
    o = conjugate(opt, object, candidate);
  else if (c_coc->parsed())
    o = cocycle(opt, object);
  else {
    o = fixtures_emit(opt, emit_name);
    emit = o.exit_code == 0;
  }

  if (o.exit_code == 2) {
    err << o.summary << '\n';
    return 2;
  }
  if (emit && opt.out.empty()) {
    out << o.report.dump() << '\n';
    return 0;
  }
  out << o.summary << '\n';
  if (!opt.out.empty()) {
    try {
      io::write_json(o.report, opt.out, emit ? -1 : 1);
    } catch (const Error& e) {
      err << e.what() << '\n';
      return 2;
    }
  }
  return o.exit_code;
}

}  // namespace dhr::cli
