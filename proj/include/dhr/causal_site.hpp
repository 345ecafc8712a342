#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace dhr {

using Region = std::size_t;

struct Violation {
  std::string rule;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
  bool has(const std::string& rule) const;
};

// Finite poset of opaque regions with containment (leq) and spacelike
// disjointness. Relations are stored exactly as given; validate_site reports
// anything that is not a partial order or not monotone.
class CausalSite {
 public:
  CausalSite() = default;
  CausalSite(std::vector<std::string> ids, const std::vector<std::pair<std::string, std::string>>& leq,
             const std::vector<std::pair<std::string, std::string>>& disjoint);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::string>& ids() const { return ids_; }
  const std::string& id(Region r) const;
  Region index(const std::string& id) const;
  bool contains_id(const std::string& id) const;

  bool leq(Region a, Region b) const { return leq_[a * ids_.size() + b]; }
  bool disjoint(Region a, Region b) const { return disjoint_[a * ids_.size() + b]; }

  std::vector<Region> spacelike_complement(Region a) const;
  bool complement_connected(Region a) const;
  // Regions c spacelike to every region in the list.
  std::vector<Region> common_complement(const std::vector<Region>& regions) const;
  // Smallest region containing every listed region; ties broken by order.
  std::vector<Region> upper_bounds(const std::vector<Region>& regions) const;

  std::vector<std::pair<std::string, std::string>> leq_pairs() const;
  std::vector<std::pair<std::string, std::string>> disjoint_pairs() const;

 private:
  void check_region(Region r) const;
  std::vector<std::string> ids_;
  std::vector<bool> leq_;
  std::vector<bool> disjoint_;
};

ValidationReport validate_site(const CausalSite& site);

}  // namespace dhr
