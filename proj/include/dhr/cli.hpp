#pragma once

// Batch commands over net-spec documents. Each command returns an exit code
// (0 pass, 1 check failure, 2 usage or parse error), a JSON report and a
// short human summary.

#include "dhr/json_io.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace dhr::cli {

struct Options {
  std::string input;    // path to a net-spec document
  std::string fixture;  // or a named fixture, generated in place of the file
  std::string out;      // report path; empty for none
  std::optional<double> tol;
  std::optional<int> d_max;
};

struct Outcome {
  int exit_code = 0;
  io::Json report;
  std::string summary;
};

Outcome check_net(const Options& opt);
Outcome analyze(const Options& opt, const std::string& object_id);
// Self-conjugate candidate when candidate_id is empty.
Outcome conjugate(const Options& opt, const std::string& object_id, const std::string& candidate_id = {});
Outcome cocycle(const Options& opt, const std::string& object_id);
Outcome fixtures_emit(const Options& opt, const std::string& name);

// Parses argv, runs the command, prints the summary and writes --out.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace dhr::cli
