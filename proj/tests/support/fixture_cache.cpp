#include "fixture_cache.hpp"

#include <limits>
#include <map>
#include <memory>
#include <mutex>

namespace dhr::testing {

const fixtures::Fixture& fixture(const std::string& name) {
  static std::mutex m;
  static std::map<std::string, std::unique_ptr<fixtures::Fixture>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[name];
  if (!slot) slot = std::make_unique<fixtures::Fixture>(fixtures::named_fixture(name));
  return *slot;
}

const TransporterFamily& family(const std::string& fixture_name, const std::string& object_id) {
  const auto& o = fixture(fixture_name).object(object_id);
  if (!o.family) throw Error("object without family: " + object_id);
  return *o.family;
}

Box parse_box(const std::string& id) {
  if (id.size() != 6 || id[0] != 'r' || id[3] != 'c') throw Error("not a box id: " + id);
  return {id[1] - '0', id[2] - '0', id[4] - '0', id[5] - '0'};
}

bool boxes_disjoint(const Box& a, const Box& b) {
  return a.r1 < b.r0 || b.r1 < a.r0 || a.c1 < b.c0 || b.c1 < a.c0;
}

bool box_within(const Box& a, const Box& b) {
  return b.r0 <= a.r0 && a.r1 <= b.r1 && b.c0 <= a.c0 && a.c1 <= b.c1;
}

double distance(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return std::numeric_limits<double>::infinity();
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace dhr::testing
