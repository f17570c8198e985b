#include "gffperc/events.hpp"

#include <bit>
#include <utility>

#include "gffperc/common.hpp"

namespace gffperc {

BooleanEvent::BooleanEvent(int sites, std::vector<std::uint8_t> table, std::string name)
    : sites_(sites), table_(std::move(table)), name_(std::move(name)) {
  require(sites >= 0 && sites <= 20, "events are limited to 20 sites");
  require(table_.size() == (std::size_t{1} << sites), "truth table must have 2^sites entries");
}

BooleanEvent BooleanEvent::from_predicate(int sites, const MaskPredicate& pred, std::string name) {
  require(sites >= 0 && sites <= 20, "events are limited to 20 sites");
  std::vector<std::uint8_t> t(std::size_t{1} << sites);
  for (std::size_t m = 0; m < t.size(); ++m) t[m] = pred(m);
  return BooleanEvent(sites, std::move(t), std::move(name));
}

BooleanEvent BooleanEvent::dictator(int sites, int i) {
  require(i >= 0 && i < sites, "dictator site out of range");
  return from_predicate(sites, [i](Mask m) { return ((m >> i) & 1U) != 0; }, "dictator(" + std::to_string(i) + ")");
}

BooleanEvent BooleanEvent::at_least(int sites, int k) {
  return from_predicate(sites, [k](Mask m) { return std::popcount(m) >= k; }, "at_least(" + std::to_string(k) + ")");
}

BooleanEvent BooleanEvent::certain(int sites) {
  return from_predicate(sites, [](Mask) { return true; }, "certain");
}

BooleanEvent BooleanEvent::impossible(int sites) {
  return from_predicate(sites, [](Mask) { return false; }, "impossible");
}

bool BooleanEvent::is_increasing() const {
  for (std::size_t m = 0; m < table_.size(); ++m) {
    if (!table_[m]) continue;
    for (int i = 0; i < sites_; ++i)
      if (!table_[m | (std::size_t{1} << i)]) return false;
  }
  return true;
}

bool BooleanEvent::depends_on(int i) const {
  const std::size_t bit = std::size_t{1} << i;
  for (std::size_t m = 0; m < table_.size(); ++m)
    if (!(m & bit) && table_[m] != table_[m | bit]) return true;
  return false;
}

bool BooleanEvent::is_constant() const {
  for (auto v : table_)
    if (v != table_[0]) return false;
  return true;
}

BooleanEvent BooleanEvent::operator|(const BooleanEvent& o) const {
  require(sites_ == o.sites_, "events over different site sets");
  std::vector<std::uint8_t> t(table_.size());
  for (std::size_t m = 0; m < t.size(); ++m) t[m] = table_[m] | o.table_[m];
  return BooleanEvent(sites_, std::move(t), "(" + name_ + " or " + o.name_ + ")");
}

BooleanEvent BooleanEvent::operator&(const BooleanEvent& o) const {
  require(sites_ == o.sites_, "events over different site sets");
  std::vector<std::uint8_t> t(table_.size());
  for (std::size_t m = 0; m < t.size(); ++m) t[m] = table_[m] & o.table_[m];
  return BooleanEvent(sites_, std::move(t), "(" + name_ + " and " + o.name_ + ")");
}

std::vector<BooleanEvent> monotone_functions(int n) {
  require(n >= 0 && n <= 4, "exhaustive monotone enumeration is limited to 4 sites");
  const std::size_t cells = std::size_t{1} << n;
  std::vector<BooleanEvent> out;
  // 2^(2^n) candidate tables: at most 65536 for n = 4.
  for (std::uint32_t code = 0; code < (std::uint32_t{1} << cells); ++code) {
    std::vector<std::uint8_t> t(cells);
    for (std::size_t m = 0; m < cells; ++m) t[m] = (code >> m) & 1U;
    BooleanEvent e(n, std::move(t), "monotone#" + std::to_string(code));
    if (e.is_increasing()) out.push_back(std::move(e));
  }
  return out;
}

BooleanEvent random_increasing(int sites, Rng& rng, int generators) {
  require(generators >= 1, "need at least one generator");
  std::uniform_int_distribution<Mask> pick(1, (Mask{1} << sites) - 1);
  std::vector<Mask> gens;
  for (int g = 0; g < generators; ++g) gens.push_back(pick(rng));
  return BooleanEvent::from_predicate(
      sites,
      [&gens](Mask m) {
        for (Mask g : gens)
          if ((m & g) == g) return true;
        return false;
      },
      "random_up_set");
}

}  // namespace gffperc
