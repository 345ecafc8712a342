#pragma once

// Net-spec documents ("dhr-netspec/1"): site, local algebras, global basis and
// objects with their transporter families. Matrices are row-major arrays of
// rows, each entry a [re, im] pair.

#include "dhr/fixtures.hpp"
#include "dhr/transport.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dhr::io {

using Json = nlohmann::ordered_json;

inline constexpr const char* kNetSpecFormat = "dhr-netspec/1";
inline constexpr const char* kReportFormat = "dhr-report/1";

// Malformed JSON, schema violations and unresolved references.
class ParseError : public Error {
 public:
  using Error::Error;
};

Json matrix_to_json(const Mat& m);
Mat matrix_from_json(const Json& j);

struct SpecObject {
  std::string id;
  Amplimorphism rho;
  std::optional<TransporterFamily> family;
};

struct SpecOptions {
  std::optional<double> tol;
  std::optional<int> d_max;
};

struct NetSpecDocument {
  std::string name;
  NetPtr net;
  std::vector<SpecObject> objects;
  SpecOptions options;
  Json manifest = Json::object();

  // Throws ParseError for an unknown id.
  const SpecObject& object(const std::string& id) const;
};

Json to_json(const NetSpecDocument& doc);
NetSpecDocument document_from_json(const Json& j, double tol = kTol);
NetSpecDocument load_document(const std::string& path, double tol = kTol);

// The fixture's objects plus the direct sum of its first charged object with itself.
NetSpecDocument document_from_fixture(const fixtures::Fixture& fx);
Json manifest_json(const fixtures::FixtureManifest& m, const CausalSite& site);
Json net_check_json(const NetCheckReport& r, const CausalSite& site);

void write_json(const Json& j, const std::string& path, int indent = 1);

}  // namespace dhr::io
