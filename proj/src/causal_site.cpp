#include "dhr/causal_site.hpp"

#include "dhr/linalg.hpp"

#include <algorithm>
#include <numeric>

namespace dhr {

bool ValidationReport::has(const std::string& rule) const {
  return std::any_of(violations.begin(), violations.end(), [&](const Violation& v) { return v.rule == rule; });
}

CausalSite::CausalSite(std::vector<std::string> ids, const std::vector<std::pair<std::string, std::string>>& leq,
                       const std::vector<std::pair<std::string, std::string>>& disjoint)
    : ids_(std::move(ids)), leq_(ids_.size() * ids_.size(), false), disjoint_(ids_.size() * ids_.size(), false) {
  for (std::size_t i = 0; i < ids_.size(); ++i)
    for (std::size_t j = i + 1; j < ids_.size(); ++j)
      if (ids_[i] == ids_[j]) throw Error("duplicate region id: " + ids_[i]);
  for (const auto& [a, b] : leq) leq_[index(a) * ids_.size() + index(b)] = true;
  for (const auto& [a, b] : disjoint) disjoint_[index(a) * ids_.size() + index(b)] = true;
}

const std::string& CausalSite::id(Region r) const {
  check_region(r);
  return ids_[r];
}

Region CausalSite::index(const std::string& id) const {
  auto it = std::find(ids_.begin(), ids_.end(), id);
  if (it == ids_.end()) throw Error("unknown region id: " + id);
  return static_cast<Region>(it - ids_.begin());
}

bool CausalSite::contains_id(const std::string& id) const {
  return std::find(ids_.begin(), ids_.end(), id) != ids_.end();
}

void CausalSite::check_region(Region r) const {
  if (r >= ids_.size()) throw Error("region index out of range: " + std::to_string(r));
}

std::vector<Region> CausalSite::spacelike_complement(Region a) const {
  check_region(a);
  std::vector<Region> out;
  for (Region b = 0; b < size(); ++b)
    if (disjoint(b, a)) out.push_back(b);
  return out;
}

bool CausalSite::complement_connected(Region a) const {
  const auto comp = spacelike_complement(a);
  if (comp.size() <= 1) return true;
  // union-find over the containment graph of the complement
  std::vector<std::size_t> parent(comp.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < comp.size(); ++i)
    for (std::size_t j = i + 1; j < comp.size(); ++j)
      if (leq(comp[i], comp[j]) || leq(comp[j], comp[i])) parent[find(i)] = find(j);
  const std::size_t root = find(0);
  for (std::size_t i = 1; i < comp.size(); ++i)
    if (find(i) != root) return false;
  return true;
}

std::vector<Region> CausalSite::common_complement(const std::vector<Region>& regions) const {
  std::vector<Region> out;
  for (Region c = 0; c < size(); ++c) {
    bool ok = true;
    for (Region r : regions) ok = ok && disjoint(c, r);
    if (ok) out.push_back(c);
  }
  return out;
}

std::vector<Region> CausalSite::upper_bounds(const std::vector<Region>& regions) const {
  std::vector<Region> out;
  for (Region c = 0; c < size(); ++c) {
    bool ok = true;
    for (Region r : regions) ok = ok && leq(r, c);
    if (ok) out.push_back(c);
  }
  // minimal elements first, each group in site order
  std::vector<Region> minimal, rest;
  for (Region x : out) {
    bool is_min = true;
    for (Region y : out)
      if (y != x && leq(y, x)) is_min = false;
    (is_min ? minimal : rest).push_back(x);
  }
  minimal.insert(minimal.end(), rest.begin(), rest.end());
  return minimal;
}

std::vector<std::pair<std::string, std::string>> CausalSite::leq_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (Region a = 0; a < size(); ++a)
    for (Region b = 0; b < size(); ++b)
      if (leq(a, b)) out.emplace_back(ids_[a], ids_[b]);
  return out;
}

std::vector<std::pair<std::string, std::string>> CausalSite::disjoint_pairs() const {
  std::vector<std::pair<std::string, std::string>> out;
  for (Region a = 0; a < size(); ++a)
    for (Region b = 0; b < size(); ++b)
      if (disjoint(a, b)) out.emplace_back(ids_[a], ids_[b]);
  return out;
}

ValidationReport validate_site(const CausalSite& s) {
  ValidationReport rep;
  const std::size_t n = s.size();
  auto name = [&](Region r) { return s.id(r); };
  for (Region a = 0; a < n; ++a) {
    if (!s.leq(a, a)) rep.violations.push_back({"reflexivity", name(a)});
    if (s.disjoint(a, a)) rep.violations.push_back({"irreflexivity", name(a)});
    if (s.spacelike_complement(a).empty()) rep.violations.push_back({"nonempty-complement", name(a)});
  }
  for (Region a = 0; a < n; ++a)
    for (Region b = 0; b < n; ++b) {
      if (a != b && s.leq(a, b) && s.leq(b, a)) rep.violations.push_back({"antisymmetry", name(a) + "," + name(b)});
      if (s.disjoint(a, b) && !s.disjoint(b, a)) rep.violations.push_back({"symmetry", name(a) + "," + name(b)});
      for (Region c = 0; c < n; ++c) {
        if (s.leq(a, b) && s.leq(b, c) && !s.leq(a, c))
          rep.violations.push_back({"transitivity", name(a) + "," + name(b) + "," + name(c)});
        if (s.leq(a, b) && s.disjoint(c, b) && !s.disjoint(c, a))
          rep.violations.push_back({"monotonicity", name(a) + "," + name(b) + "," + name(c)});
      }
    }
  return rep;
}

}  // namespace dhr
