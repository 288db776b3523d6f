#include "assortment_auction/auction.hpp"

#include "assortment_auction/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace aauction {

// ------------------------------------------------------------- families

namespace {

void check_buyer_count(int buyers) {
  if (buyers < 0 || buyers > kMaxBuyers) {
    throw std::invalid_argument("buyer count must be between 0 and " + std::to_string(kMaxBuyers));
  }
}

BuyerSet bit(int i) { return BuyerSet{1} << i; }

bool lex_less(BuyerSet a, BuyerSet b) {
  // Sorted member lists compared lexicographically.
  const auto ma = set_members(a);
  const auto mb = set_members(b);
  return std::lexicographical_compare(ma.begin(), ma.end(), mb.begin(), mb.end());
}

}  // namespace

std::vector<int> set_members(BuyerSet set) {
  std::vector<int> out;
  for (int i = 0; set != 0; ++i, set >>= 1) {
    if (set & 1U) out.push_back(i);
  }
  return out;
}

FeasibleFamily FeasibleFamily::single_winner(int buyers) { return cardinality(buyers, 1); }

FeasibleFamily FeasibleFamily::cardinality(int buyers, int bound) {
  check_buyer_count(buyers);
  if (bound < 1) throw std::invalid_argument("cardinality bound must be positive");
  FeasibleFamily f;
  f.kind_ = bound == 1 ? Kind::SingleWinner : Kind::Cardinality;
  f.buyers_ = buyers;
  f.bound_ = bound;
  return f;
}

FeasibleFamily FeasibleFamily::explicit_sets(int buyers, const std::vector<std::vector<int>>& sets) {
  check_buyer_count(buyers);
  FeasibleFamily f;
  f.kind_ = Kind::Explicit;
  f.buyers_ = buyers;
  f.sets_.push_back(0);
  for (const auto& members : sets) {
    BuyerSet mask = 0;
    for (int i : members) {
      if (i < 0 || i >= buyers) throw std::invalid_argument("winner set names an unknown buyer");
      if (mask & bit(i)) throw std::invalid_argument("winner set repeats a buyer");
      mask |= bit(i);
    }
    f.sets_.push_back(mask);
  }
  std::sort(f.sets_.begin(), f.sets_.end());
  f.sets_.erase(std::unique(f.sets_.begin(), f.sets_.end()), f.sets_.end());
  for (BuyerSet s : f.sets_) {
    for (int i : set_members(s)) {
      if (!std::binary_search(f.sets_.begin(), f.sets_.end(), s & ~bit(i))) {
        throw std::invalid_argument("explicit family is not downward-closed");
      }
    }
  }
  f.bound_ = 0;
  for (BuyerSet s : f.sets_) f.bound_ = std::max(f.bound_, std::popcount(s));
  return f;
}

bool FeasibleFamily::contains(BuyerSet set) const {
  if (buyers_ < 32 && (set >> buyers_) != 0) return false;
  if (kind_ == Kind::Explicit) return std::binary_search(sets_.begin(), sets_.end(), set);
  return std::popcount(set) <= bound_;
}

std::vector<BuyerSet> FeasibleFamily::members() const {
  if (kind_ == Kind::Explicit) return sets_;
  std::vector<BuyerSet> out;
  const BuyerSet limit = BuyerSet{1} << buyers_;
  for (BuyerSet s = 0; s < limit; ++s) {
    if (std::popcount(s) <= bound_) out.push_back(s);
  }
  return out;
}

FeasibleFamily FeasibleFamily::extended(int extra) const {
  if (extra == 0) return *this;
  if (kind_ == Kind::Explicit) throw std::invalid_argument("explicit families cannot take extra competitors");
  return cardinality(buyers_ + extra, bound_);
}

std::string FeasibleFamily::describe() const {
  switch (kind_) {
    case Kind::SingleWinner:
      return "single_winner";
    case Kind::Cardinality:
      return "cardinality(" + std::to_string(bound_) + ")";
    case Kind::Explicit: {
      std::string out = "explicit{";
      bool first = true;
      for (BuyerSet s : sets_) {
        if (!first) out += ",";
        first = false;
        out += "{";
        bool inner = true;
        for (int i : set_members(s)) {
          if (!inner) out += ",";
          inner = false;
          out += std::to_string(i + 1);
        }
        out += "}";
      }
      return out + "}";
    }
  }
  return "";
}

// --------------------------------------------------------- winner choice

namespace {

BuyerSet positive_buyers(const std::vector<ExtRational>& values) {
  BuyerSet out = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i].is_positive()) out |= bit(static_cast<int>(i));
  }
  return out;
}

Rational sum_of(const std::vector<ExtRational>& values, BuyerSet set) {
  Rational total = 0;
  for (int i : set_members(set)) total += values[i].value();
  return total;
}

/// Best feasible set using only buyers in `allowed`.
WinnerChoice best_within(const std::vector<ExtRational>& values, const FeasibleFamily& family, BuyerSet allowed) {
  WinnerChoice best{0, Rational(0)};
  if (family.kind() != FeasibleFamily::Kind::Explicit) {
    std::vector<int> order = set_members(allowed);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values[a] > values[b]; });
    if (static_cast<int>(order.size()) > family.bound()) order.resize(family.bound());
    for (int i : order) best.winners |= bit(i);
    best.surplus = sum_of(values, best.winners);
    return best;
  }
  for (BuyerSet s : family.members()) {
    if ((s & ~allowed) != 0) continue;
    const Rational total = sum_of(values, s);
    if (total > best.surplus || (total == best.surplus && lex_less(s, best.winners))) best = {s, total};
  }
  return best;
}

void check_values(const std::vector<ExtRational>& values, const FeasibleFamily& family) {
  if (static_cast<int>(values.size()) != family.buyers()) {
    throw std::invalid_argument("value count does not match the family's buyer count");
  }
  for (const auto& v : values) {
    if (v.is_pos_inf()) throw std::invalid_argument("virtual valuations cannot be +inf");
  }
}

}  // namespace

WinnerChoice virtual_surplus_winners(const std::vector<ExtRational>& values, const FeasibleFamily& family) {
  check_values(values, family);
  return best_within(values, family, positive_buyers(values));
}

WinnerChoice virtual_surplus_winners_brute(const std::vector<ExtRational>& values, const FeasibleFamily& family) {
  check_values(values, family);
  const BuyerSet positive = positive_buyers(values);
  WinnerChoice best{0, Rational(0)};
  for (BuyerSet s : family.members()) {
    if ((s & ~positive) != 0) continue;
    const Rational total = sum_of(values, s);
    if (total > best.surplus || (total == best.surplus && lex_less(s, best.winners))) best = {s, total};
  }
  return best;
}

WinThreshold win_threshold(int buyer, const std::vector<ExtRational>& values, const FeasibleFamily& family) {
  check_values(values, family);
  if (buyer < 0 || buyer >= family.buyers()) throw std::out_of_range("no such buyer");
  if (!family.contains(bit(buyer))) return {ExtRational::pos_inf(), false};

  std::vector<ExtRational> others = values;
  others[buyer] = ExtRational::neg_inf();
  const BuyerSet positive = positive_buyers(others);
  const Rational without = best_within(others, family, positive).surplus;

  // Best the others can add alongside the buyer.
  Rational alongside = 0;
  if (family.kind() == FeasibleFamily::Kind::Explicit) {
    for (BuyerSet s : family.members()) {
      if (!(s & bit(buyer)) || (s & ~positive & ~bit(buyer)) != 0) continue;
      alongside = std::max(alongside, sum_of(others, s & ~bit(buyer)));
    }
  } else if (family.bound() > 1) {
    alongside = best_within(others, FeasibleFamily::cardinality(family.buyers(), family.bound() - 1), positive).surplus;
  }

  const Rational gap = without - alongside;
  if (sgn(gap) <= 0) return {ExtRational(Rational(0)), false};
  std::vector<ExtRational> probe = values;
  probe[buyer] = ExtRational(gap);
  const bool wins = (virtual_surplus_winners(probe, family).winners & bit(buyer)) != 0;
  return {ExtRational(gap), wins};
}

// ---------------------------------------------------------------- buyers

Buyer Buyer::from_chain(MarkovChainModel chain, const ProductCatalog& catalog, int support_cap) {
  Buyer b;
  b.sequence = run_procedure(chain, catalog);
  b.vvm = vvm_from_sequence(*b.sequence);
  if (chain.num_products() <= support_cap) b.distribution = enumerate_support(chain, support_cap);
  b.chain = std::move(chain);
  return b;
}

Buyer Buyer::from_explicit(ExplicitListDistribution dist, VirtualValuationMapping vvm) {
  Buyer b;
  b.distribution = std::move(dist);
  b.vvm = std::move(vvm);
  return b;
}

void AuctionInstance::validate() const {
  if (family.buyers() != num_buyers()) throw std::invalid_argument("family and buyer list disagree on the buyer count");
  for (const auto& b : buyers) {
    if (b.distribution && b.distribution->num_products() != catalog.size()) {
      throw std::invalid_argument("a buyer's distribution does not match the catalog");
    }
    if (b.chain && b.chain->num_products() != catalog.size()) {
      throw std::invalid_argument("a buyer's chain does not match the catalog");
    }
    if (!b.distribution && !b.chain) throw std::invalid_argument("a buyer has neither a chain nor a distribution");
  }
}

TaxationMechanism::Context context_of(int buyer, const std::vector<RankedList>& profile) {
  TaxationMechanism::Context ctx;
  for (std::size_t i = 0; i < profile.size(); ++i) {
    if (static_cast<int>(i) != buyer) ctx.push_back(profile[i]);
  }
  return ctx;
}

Assortment TaxationMechanism::offer(int buyer, const std::vector<RankedList>& profile) const {
  const auto& table = tables.at(buyer);
  auto it = table.find(context_of(buyer, profile));
  if (it == table.end()) throw std::out_of_range("taxation table has no entry for this context");
  return it->second;
}

// ------------------------------------------------------------ allocation

Rational AllocationOutcome::revenue() const {
  Rational total = 0;
  for (const auto& b : buyers) total += b.payment;
  return total;
}

namespace {

void check_profile(const AuctionInstance& instance, const std::vector<RankedList>& profile) {
  if (static_cast<int>(profile.size()) != instance.num_buyers()) {
    throw std::invalid_argument("profile has " + std::to_string(profile.size()) + " lists for " +
                                std::to_string(instance.num_buyers()) + " buyers");
  }
  for (const auto& l : profile) {
    for (ProductId j : l.items()) {
      if (j > instance.catalog.size()) throw std::invalid_argument("profile names an unknown product");
    }
  }
}

void settle(const AuctionInstance& instance, const std::vector<RankedList>& profile, const FeasibleFamily& family,
            AllocationOutcome& out) {
  for (int i = 0; i < instance.num_buyers(); ++i) {
    auto& b = out.buyers[i];
    b.product = choose(profile[i], b.offered);
    b.payment = instance.catalog.price(b.product);
    if (b.product != kNoPurchase) out.purchasers |= bit(i);
  }
  out.feasible = family.contains(out.purchasers);
  if (!out.feasible) out.diagnostics.push_back("winner set is not in the feasible family");
}

}  // namespace

AllocationOutcome allocate(const AuctionInstance& instance, const std::vector<RankedList>& profile,
                           const std::vector<ExtRational>& competitors) {
  check_profile(instance, profile);
  const int m = instance.num_buyers();
  const FeasibleFamily family = instance.family.extended(static_cast<int>(competitors.size()));

  std::vector<ExtRational> values;
  for (int i = 0; i < m; ++i) values.push_back(instance.buyers[i].vvm.value(profile[i]));
  values.insert(values.end(), competitors.begin(), competitors.end());

  AllocationOutcome out;
  out.surplus_winners = virtual_surplus_winners(values, family).winners & ((BuyerSet{1} << m) - 1);
  out.buyers.resize(m);
  for (int i = 0; i < m; ++i) {
    auto& b = out.buyers[i];
    b.value = values[i];
    b.threshold = win_threshold(i, values, family);
    if (!b.threshold.value.is_pos_inf()) {
      b.offered = instance.buyers[i].vvm.threshold_assortment(b.threshold.value, b.threshold.equality_wins);
    }
  }
  settle(instance, profile, family, out);

  for (int i = 0; i < m; ++i) {
    const bool winner = (out.surplus_winners & bit(i)) != 0;
    const bool bought = (out.purchasers & bit(i)) != 0;
    if (winner && !bought) {
      out.implementability_failures.push_back(i);
      out.diagnostics.push_back("buyer " + std::to_string(i + 1) + " wins with value " + to_string(values[i]) +
                                " but buys nothing from " + instance.catalog.format(out.buyers[i].offered));
    } else if (!winner && bought) {
      out.diagnostics.push_back("buyer " + std::to_string(i + 1) + " buys without winning");
    }
  }
  return out;
}

AllocationOutcome allocate_tables(const AuctionInstance& instance, const TaxationMechanism& mech,
                                  const std::vector<RankedList>& profile) {
  check_profile(instance, profile);
  const int m = instance.num_buyers();
  if (static_cast<int>(mech.tables.size()) != m) throw std::invalid_argument("one taxation table per buyer is required");
  AllocationOutcome out;
  out.buyers.resize(m);
  for (int i = 0; i < m; ++i) {
    out.buyers[i].value = instance.buyers[i].vvm.value(profile[i]);
    out.buyers[i].offered = mech.offer(i, profile);
  }
  settle(instance, profile, instance.family, out);
  return out;
}

// ------------------------------------------------------------ evaluation

void for_each_profile(const AuctionInstance& instance, std::uint64_t cap,
                      const std::function<void(const std::vector<RankedList>&, const Rational&)>& visit) {
  const int m = instance.num_buyers();
  std::uint64_t total = 1;
  for (const auto& b : instance.buyers) {
    if (!b.distribution) throw CapExceeded("a buyer's list support was not enumerated (chain too large); use simulation instead");
    const std::uint64_t size = b.distribution->support().size();
    if (size != 0 && total > cap / size) {
      throw CapExceeded("more than " + std::to_string(cap) + " profiles; use simulation instead");
    }
    total *= size;
  }
  if (total > cap) throw CapExceeded("more than " + std::to_string(cap) + " profiles; use simulation instead");

  std::vector<std::size_t> digit(m, 0);
  std::vector<RankedList> profile(m);
  for (std::uint64_t count = 0; count < total; ++count) {
    Rational p = 1;
    for (int i = 0; i < m; ++i) {
      const auto& atom = instance.buyers[i].distribution->support()[digit[i]];
      profile[i] = atom.list;
      p *= atom.probability;
    }
    visit(profile, p);
    for (int i = m - 1; i >= 0; --i) {
      if (++digit[i] < instance.buyers[i].distribution->support().size()) break;
      digit[i] = 0;
    }
  }
}

Rational expected_virtual_surplus(const AuctionInstance& instance, std::uint64_t cap) {
  instance.validate();
  Rational total = 0;
  for_each_profile(instance, cap, [&](const std::vector<RankedList>& profile, const Rational& p) {
    std::vector<ExtRational> values;
    for (int i = 0; i < instance.num_buyers(); ++i) values.push_back(instance.buyers[i].vvm.value(profile[i]));
    total += p * virtual_surplus_winners(values, instance.family).surplus;
  });
  return total;
}

Rational expected_revenue_exact(const AuctionInstance& instance, const std::optional<TaxationMechanism>& tables,
                                std::uint64_t cap) {
  instance.validate();
  Rational total = 0;
  for_each_profile(instance, cap, [&](const std::vector<RankedList>& profile, const Rational& p) {
    const auto outcome = tables ? allocate_tables(instance, *tables, profile) : allocate(instance, profile);
    total += p * outcome.revenue();
  });
  return total;
}

RankedList sample_buyer(const Buyer& buyer, std::mt19937_64& rng) {
  if (buyer.chain) return sample_list(*buyer.chain, rng);
  if (!buyer.distribution) throw std::invalid_argument("buyer has nothing to sample from");
  const auto& support = buyer.distribution->support();
  std::vector<double> weights;
  for (const auto& atom : support) weights.push_back(atom.probability.get_d());
  std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
  return support[pick(rng)].list;
}

SimulationResult simulate(const AuctionInstance& instance, const std::optional<TaxationMechanism>& tables,
                          std::uint64_t samples, std::uint64_t seed) {
  instance.validate();
  if (samples == 0) throw std::invalid_argument("at least one sample is required");
  std::mt19937_64 rng(seed);
  std::vector<RankedList> profile(instance.num_buyers());
  double mean = 0;
  double m2 = 0;
  for (std::uint64_t s = 1; s <= samples; ++s) {
    for (int i = 0; i < instance.num_buyers(); ++i) profile[i] = sample_buyer(instance.buyers[i], rng);
    const auto outcome = tables ? allocate_tables(instance, *tables, profile) : allocate(instance, profile);
    const double x = outcome.revenue().get_d();
    const double delta = x - mean;
    mean += delta / static_cast<double>(s);
    m2 += delta * (x - mean);
  }
  SimulationResult r;
  r.samples = samples;
  r.mean = mean;
  r.standard_error = samples > 1 ? std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples)) : 0.0;
  return r;
}

}  // namespace aauction
