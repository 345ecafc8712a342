#include "dhr/json_io.hpp"

#include <fstream>
#include <sstream>

namespace dhr::io {

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return j.at(key);
}

std::string string_field(const Json& j, const char* key, const std::string& where) {
  const Json& v = field(j, key, where);
  if (!v.is_string()) throw ParseError(where + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

Region region_ref(const CausalSite& site, const Json& j, const std::string& where) {
  if (!j.is_string()) throw ParseError(where + ": region reference must be a string");
  const auto id = j.get<std::string>();
  if (!site.contains_id(id)) throw ParseError(where + ": unknown region '" + id + "'");
  return site.index(id);
}

std::vector<Mat> matrices(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of matrices");
  std::vector<Mat> out;
  out.reserve(j.size());
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

Json matrices_json(const std::vector<Mat>& ms) {
  Json out = Json::array();
  for (const auto& m : ms) out.push_back(matrix_to_json(m));
  return out;
}

std::vector<std::pair<std::string, std::string>> pairs(const Json& j, const std::string& where) {
  if (!j.is_array()) throw ParseError(where + ": expected an array of pairs");
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : j) {
    if (!p.is_array() || p.size() != 2 || !p[0].is_string() || !p[1].is_string())
      throw ParseError(where + ": each entry must be a pair of region ids");
    out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  }
  return out;
}

Json pairs_json(const std::vector<std::pair<std::string, std::string>>& ps) {
  Json out = Json::array();
  for (const auto& [a, b] : ps) out.push_back(Json::array({a, b}));
  return out;
}

Json amplimorphism_json(const Amplimorphism& rho) {
  Json j;
  if (rho.is_identity()) {
    j["identity"] = true;
    return j;
  }
  j["label"] = rho.label();
  j["multiplicity"] = rho.multiplicity();
  j["support"] = rho.support() ? Json(rho.net().site().id(*rho.support())) : Json(nullptr);
  j["images"] = matrices_json(rho.images());
  return j;
}

Amplimorphism amplimorphism_from_json(const NetPtr& net, const Json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where + ": object must be a JSON object");
  if (j.contains("identity")) {
    if (!j.at("identity").is_boolean() || !j.at("identity").get<bool>())
      throw ParseError(where + ": 'identity' must be true when present");
    return Amplimorphism::identity(net);
  }
  const Json& n = field(j, "multiplicity", where);
  if (!n.is_number_integer() || n.get<long long>() < 1) throw ParseError(where + ": multiplicity must be >= 1");
  std::optional<Region> support;
  if (j.contains("support") && !j.at("support").is_null())
    support = region_ref(net->site(), j.at("support"), where + ".support");
  std::string label = j.contains("label") && j.at("label").is_string() ? j.at("label").get<std::string>() : "";
  std::vector<Mat> images = matrices(field(j, "images", where), where + ".images");
  const Eigen::Index size = n.get<Eigen::Index>() * net->ambient_dim();
  if (static_cast<Eigen::Index>(images.size()) != net->global().dim())
    throw ParseError(where + ": " + std::to_string(images.size()) + " images for a global basis of " +
                     std::to_string(net->global().dim()));
  for (const auto& m : images)
    if (m.rows() != size || m.cols() != size) throw ParseError(where + ": image of shape " + describe_shape(m));
  try {
    return Amplimorphism(net, n.get<Eigen::Index>(), std::move(images), support, std::move(label));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(where + ": " + e.what());
  }
}

Json family_json(const TransporterFamily& fam) {
  const CausalSite& site = fam.base.net().site();
  Json j;
  j["support"] = site.id(fam.support);
  Json ts = Json::array();
  for (Region a = 0; a < fam.transports.size(); ++a) {
    Json t;
    t["region"] = site.id(a);
    if (fam.transports[a].target.same_as(fam.base))
      t["target"] = "base";
    else
      t["target"] = amplimorphism_json(fam.transports[a].target);
    t["unitary"] = matrix_to_json(fam.transports[a].unitary);
    ts.push_back(std::move(t));
  }
  j["transports"] = std::move(ts);
  return j;
}

TransporterFamily family_from_json(const Amplimorphism& base, const Json& j, const std::string& where) {
  const CausalSite& site = base.net().site();
  TransporterFamily fam{base, region_ref(site, field(j, "support", where), where + ".support"), {}};
  const Json& ts = field(j, "transports", where);
  if (!ts.is_array() || ts.size() != site.size())
    throw ParseError(where + ": one transport per region required");
  std::vector<std::optional<Transport>> slots(site.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    const std::string w = where + ".transports[" + std::to_string(k) + "]";
    const Region a = region_ref(site, field(ts[k], "region", w), w + ".region");
    if (slots[a]) throw ParseError(w + ": duplicate region '" + site.id(a) + "'");
    const Json& target = field(ts[k], "target", w);
    Amplimorphism tau = target.is_string() && target.get<std::string>() == "base"
                            ? base
                            : amplimorphism_from_json(base.net_ptr(), target, w + ".target");
    Mat u = matrix_from_json(field(ts[k], "unitary", w));
    if (u.rows() != tau.size() || u.cols() != base.size())
      throw ParseError(w + ": transporter of shape " + describe_shape(u));
    slots[a] = Transport{std::move(tau), std::move(u)};
  }
  for (auto& s : slots) fam.transports.push_back(std::move(*s));
  return fam;
}

}  // namespace

Json matrix_to_json(const Mat& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(Json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

Mat matrix_from_json(const Json& j) {
  if (!j.is_array() || j.empty() || !j[0].is_array()) throw ParseError("matrix: expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) throw ParseError("matrix: ragged rows");
    for (Eigen::Index k = 0; k < cols; ++k) {
      const Json& e = row[static_cast<std::size_t>(k)];
      if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
        throw ParseError("matrix: entries must be [re, im] pairs");
      m(i, k) = cplx(e[0].get<double>(), e[1].get<double>());
    }
  }
  return m;
}

const SpecObject& NetSpecDocument::object(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return o;
  throw ParseError("unknown object '" + id + "'");
}

Json to_json(const NetSpecDocument& doc) {
  const CausalSite& site = doc.net->site();
  Json j;
  j["format"] = kNetSpecFormat;
  j["name"] = doc.name;
  j["site"] = {{"regions", site.ids()}, {"leq", pairs_json(site.leq_pairs())},
               {"disjoint", pairs_json(site.disjoint_pairs())}};
  Json local = Json::object();
  for (Region a = 0; a < site.size(); ++a) local[site.id(a)] = matrices_json(doc.net->local(a).basis());
  j["net"] = {{"dim", doc.net->ambient_dim()}, {"local", std::move(local)},
              {"global_basis", matrices_json(doc.net->global().basis())}};
  Json objs = Json::array();
  for (const auto& o : doc.objects) {
    Json oj;
    oj["id"] = o.id;
    oj["object"] = amplimorphism_json(o.rho);
    oj["family"] = o.family ? family_json(*o.family) : Json(nullptr);
    objs.push_back(std::move(oj));
  }
  j["objects"] = std::move(objs);
  Json opts = Json::object();
  if (doc.options.tol) opts["tol"] = *doc.options.tol;
  if (doc.options.d_max) opts["dmax"] = *doc.options.d_max;
  j["options"] = std::move(opts);
  j["manifest"] = doc.manifest;
  return j;
}

NetSpecDocument document_from_json(const Json& j, double tol) {
  if (!j.is_object()) throw ParseError("document must be a JSON object");
  const std::string format = string_field(j, "format", "document");
  if (format != kNetSpecFormat) throw ParseError("unsupported format '" + format + "'");
  NetSpecDocument doc;
  doc.name = j.contains("name") && j.at("name").is_string() ? j.at("name").get<std::string>() : "";

  const Json& site_j = field(j, "site", "document");
  const Json& ids_j = field(site_j, "regions", "site");
  if (!ids_j.is_array() || ids_j.empty()) throw ParseError("site.regions must be a non-empty array");
  std::vector<std::string> ids;
  for (const auto& id : ids_j) {
    if (!id.is_string()) throw ParseError("site.regions: ids must be strings");
    ids.push_back(id.get<std::string>());
  }
  CausalSite site;
  try {
    site = CausalSite(ids, pairs(field(site_j, "leq", "site"), "site.leq"),
                      pairs(field(site_j, "disjoint", "site"), "site.disjoint"));
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(std::string("site: ") + e.what());
  }

  const Json& net_j = field(j, "net", "document");
  const Json& dim_j = field(net_j, "dim", "net");
  if (!dim_j.is_number_integer() || dim_j.get<long long>() < 1) throw ParseError("net.dim must be a positive integer");
  const auto d = dim_j.get<Eigen::Index>();
  const Json& local_j = field(net_j, "local", "net");
  if (!local_j.is_object()) throw ParseError("net.local must map region ids to bases");
  for (const auto& [key, value] : local_j.items())
    if (!site.contains_id(key)) throw ParseError("net.local: unknown region '" + key + "'");
  std::vector<ConcreteAlgebra> local;
  for (const auto& id : site.ids()) {
    const std::string w = "net.local." + id;
    std::vector<Mat> basis = matrices(field(local_j, id.c_str(), "net.local"), w);
    for (const auto& m : basis)
      if (m.rows() != d || m.cols() != d) throw ParseError(w + ": element of shape " + describe_shape(m));
    local.push_back(ConcreteAlgebra::from_basis(d, basis, tol));
  }
  std::optional<std::vector<Mat>> global;
  if (net_j.contains("global_basis")) global = matrices(net_j.at("global_basis"), "net.global_basis");
  try {
    doc.net = NetModel::build(std::move(site), std::move(local), global, tol);
  } catch (const Error& e) {
    throw ParseError(std::string("net: ") + e.what());
  }

  if (j.contains("objects")) {
    const Json& objs = j.at("objects");
    if (!objs.is_array()) throw ParseError("objects must be an array");
    for (std::size_t k = 0; k < objs.size(); ++k) {
      const std::string w = "objects[" + std::to_string(k) + "]";
      SpecObject o;
      o.id = string_field(objs[k], "id", w);
      for (const auto& prev : doc.objects)
        if (prev.id == o.id) throw ParseError(w + ": duplicate id '" + o.id + "'");
      o.rho = amplimorphism_from_json(doc.net, field(objs[k], "object", w), w + ".object");
      if (objs[k].contains("family") && !objs[k].at("family").is_null())
        o.family = family_from_json(o.rho, objs[k].at("family"), w + ".family");
      doc.objects.push_back(std::move(o));
    }
  }
  if (j.contains("options")) {
    const Json& opts = j.at("options");
    if (!opts.is_object()) throw ParseError("options must be an object");
    if (opts.contains("tol")) {
      if (!opts.at("tol").is_number() || opts.at("tol").get<double>() <= 0.0)
        throw ParseError("options.tol must be a positive number");
      doc.options.tol = opts.at("tol").get<double>();
    }
    if (opts.contains("dmax")) {
      if (!opts.at("dmax").is_number_integer() || opts.at("dmax").get<int>() < 1)
        throw ParseError("options.dmax must be a positive integer");
      doc.options.d_max = opts.at("dmax").get<int>();
    }
  }
  if (j.contains("manifest")) doc.manifest = j.at("manifest");
  return doc;
}

NetSpecDocument load_document(const std::string& path, double tol) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read '" + path + "'");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  try {
    return document_from_json(j, tol);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("schema: ") + e.what());
  }
}

NetSpecDocument document_from_fixture(const fixtures::Fixture& fx) {
  NetSpecDocument doc;
  doc.name = fx.spec.name;
  doc.net = fx.net;
  for (const auto& o : fx.objects) doc.objects.push_back({o.id, o.rho, o.family});
  for (const auto& o : fx.objects) {
    if (o.rho.is_identity() || !o.family || o.id.rfind("rho_", 0) != 0) continue;
    TransporterFamily fam = direct_sum_families(*o.family, *o.family);
    doc.objects.push_back({"sum_" + o.id, fam.base, fam});
    break;
  }
  doc.manifest = manifest_json(fx.manifest, fx.net->site());
  return doc;
}

Json net_check_json(const NetCheckReport& r, const CausalSite& site) {
  auto violations = [](const std::vector<Violation>& vs) {
    Json out = Json::array();
    for (const auto& v : vs) out.push_back({{"rule", v.rule}, {"detail", v.detail}});
    return out;
  };
  Json j;
  j["site"] = {{"ok", r.site.ok()}, {"violations", violations(r.site.violations)}};
  j["isotony"] = violations(r.isotony);
  j["locality"] = violations(r.locality);
  Json cc = Json::array();
  for (const auto& [reg, ok] : r.complement_connected) cc.push_back({{"region", site.id(reg)}, {"connected", ok}});
  j["complement_connected"] = std::move(cc);
  Json dual = Json::array();
  for (const auto& d : r.duality)
    dual.push_back({{"region", site.id(d.region)},
                    {"dim_local", d.dim_local},
                    {"dim_complement", d.dim_complement},
                    {"dim_dual", d.dim_dual},
                    {"defect_local_in_dual", d.defect_local_in_dual},
                    {"defect_dual_in_local", d.defect_dual_in_local},
                    {"holds", d.holds}});
  j["duality"] = std::move(dual);
  j["global_dim"] = r.global_dim;
  j["global_commutant_dim"] = r.global_commutant_dim;
  j["irreducible"] = r.irreducible;
  j["max_duality_defect"] = r.max_duality_defect;
  j["ok"] = r.ok();
  return j;
}

Json manifest_json(const fixtures::FixtureManifest& m, const CausalSite& site) {
  Json j;
  j["name"] = m.name;
  j["net"] = net_check_json(m.net, site);
  j["notes"] = m.notes;
  return j;
}

void write_json(const Json& j, const std::string& path, int indent) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write '" + path + "'");
  out << j.dump(indent) << '\n';
  if (!out) throw Error("write failed for '" + path + "'");
}

}  // namespace dhr::io
