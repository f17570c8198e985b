#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gffperc/common.hpp"
#include "gffperc/rng.hpp"

namespace gffperc {

/// Configuration over K as a bit mask: bit i set iff site i of K is open.
using Mask = std::uint64_t;
using MaskPredicate = std::function<bool(Mask)>;

/// Event on {0,1}^K stored as a truth table, |K| <= 20.
class BooleanEvent {
 public:
  BooleanEvent(int sites, std::vector<std::uint8_t> table, std::string name = {});

  static BooleanEvent from_predicate(int sites, const MaskPredicate& pred, std::string name = {});
  static BooleanEvent dictator(int sites, int i);
  static BooleanEvent at_least(int sites, int k);
  static BooleanEvent majority(int sites) { return at_least(sites, sites / 2 + 1); }
  static BooleanEvent all_open(int sites) { return at_least(sites, sites); }
  static BooleanEvent certain(int sites);
  static BooleanEvent impossible(int sites);

  int sites() const { return sites_; }
  const std::string& name() const { return name_; }
  bool operator()(Mask m) const { return table_[static_cast<std::size_t>(m)] != 0; }
  const std::vector<std::uint8_t>& table() const { return table_; }

  bool is_increasing() const;
  bool depends_on(int i) const;
  bool is_constant() const;

  BooleanEvent operator|(const BooleanEvent& other) const;
  BooleanEvent operator&(const BooleanEvent& other) const;
  bool operator==(const BooleanEvent& other) const { return sites_ == other.sites_ && table_ == other.table_; }

 private:
  int sites_;
  std::vector<std::uint8_t> table_;
  std::string name_;
};

/// Every increasing Boolean function on n <= 4 variables, constants
/// included (6 for n = 2, 20 for n = 3, 168 for n = 4).
std::vector<BooleanEvent> monotone_functions(int n);

/// Union of `generators` random principal up-sets; always increasing.
BooleanEvent random_increasing(int sites, Rng& rng, int generators = 2);

}  // namespace gffperc
