#pragma once

#include "assortment_auction/frontier_vvm.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace aauction {

/// Buyers are indexed 0..m-1 internally; winner sets are bitmasks over them.
using BuyerSet = std::uint32_t;
inline constexpr int kMaxBuyers = 24;

/// Downward-closed family of permissible winner sets.
class FeasibleFamily {
public:
  enum class Kind { SingleWinner, Cardinality, Explicit };

  static FeasibleFamily single_winner(int buyers);
  static FeasibleFamily cardinality(int buyers, int bound);
  /// Sets list buyer indices (0-based). Missing subsets make the input invalid;
  /// the empty set is added implicitly.
  static FeasibleFamily explicit_sets(int buyers, const std::vector<std::vector<int>>& sets);

  Kind kind() const { return kind_; }
  int buyers() const { return buyers_; }
  int bound() const { return bound_; }
  bool contains(BuyerSet set) const;

  /// Every member, ascending by mask.
  std::vector<BuyerSet> members() const;

  /// Same rule over `extra` additional buyers appended at the end. Explicit
  /// families cannot be extended.
  FeasibleFamily extended(int extra) const;

  std::string describe() const;

private:
  Kind kind_ = Kind::SingleWinner;
  int buyers_ = 0;
  int bound_ = 1;
  std::vector<BuyerSet> sets_;  // sorted, explicit only
};

std::vector<int> set_members(BuyerSet set);

struct WinnerChoice {
  BuyerSet winners = 0;
  Rational surplus;  // never negative
};

/// Maximizes the sum of values over feasible sets of positive-valued buyers.
/// Ties go to the lexicographically smallest sorted winner list.
WinnerChoice virtual_surplus_winners(const std::vector<ExtRational>& values, const FeasibleFamily& family);

/// Plain enumeration over family.members(); used to cross-check the above.
WinnerChoice virtual_surplus_winners_brute(const std::vector<ExtRational>& values, const FeasibleFamily& family);

/// Buyer i wins iff V_i > value, or V_i == value and equality_wins.
struct WinThreshold {
  ExtRational value;
  bool equality_wins = false;

  bool admits(const ExtRational& v) const { return v > value || (equality_wins && v == value); }
};

/// `values[buyer]` is ignored.
WinThreshold win_threshold(int buyer, const std::vector<ExtRational>& values, const FeasibleFamily& family);

// ------------------------------------------------------------------ buyers

struct Buyer {
  std::string label;
  /// Absent for chains too large to enumerate; exact evaluation needs it.
  std::optional<ExplicitListDistribution> distribution;
  std::optional<MarkovChainModel> chain;
  std::optional<EfficiencySequence> sequence;
  VirtualValuationMapping vvm;

  /// Runs the procedure; the support is enumerated when n <= support_cap.
  static Buyer from_chain(MarkovChainModel chain, const ProductCatalog& catalog, int support_cap = kDefaultSupportCap);
  static Buyer from_explicit(ExplicitListDistribution dist, VirtualValuationMapping vvm);
};

struct AuctionInstance {
  ProductCatalog catalog;
  std::vector<Buyer> buyers;
  FeasibleFamily family;

  int num_buyers() const { return static_cast<int>(buyers.size()); }
  /// Throws std::invalid_argument on a family/buyer count mismatch.
  void validate() const;
};

/// Per-buyer tables T_i keyed by the other buyers' lists in buyer order.
struct TaxationMechanism {
  using Context = std::vector<RankedList>;
  std::vector<std::map<Context, Assortment>> tables;

  /// Throws std::out_of_range for a context the table does not cover.
  Assortment offer(int buyer, const std::vector<RankedList>& profile) const;
};

TaxationMechanism::Context context_of(int buyer, const std::vector<RankedList>& profile);

// -------------------------------------------------------------- allocation

struct BuyerOutcome {
  ExtRational value;
  WinThreshold threshold;
  Assortment offered;  // T_i
  ProductId product = kNoPurchase;
  Rational payment;
};

struct AllocationOutcome {
  std::vector<BuyerOutcome> buyers;
  BuyerSet surplus_winners = 0;  // virtual-surplus maximizers among real buyers
  BuyerSet purchasers = 0;       // buyers receiving a product
  bool feasible = true;
  /// Surplus winners that chose nothing from their threshold assortment.
  std::vector<int> implementability_failures;
  std::vector<std::string> diagnostics;

  Rational revenue() const;
};

/// Myersonian allocation. `competitors` are fixed values for stub buyers
/// appended after the real ones; they never purchase.
AllocationOutcome allocate(const AuctionInstance& instance, const std::vector<RankedList>& profile,
                           const std::vector<ExtRational>& competitors = {});

/// Product each buyer receives under the tables, with the outcome checks.
AllocationOutcome allocate_tables(const AuctionInstance& instance, const TaxationMechanism& mech,
                                  const std::vector<RankedList>& profile);

// -------------------------------------------------------------- evaluation

inline constexpr std::uint64_t kDefaultProfileCap = 10'000'000;

/// Calls `visit(profile, probability)` for every profile in the product of the
/// buyers' supports. Throws CapExceeded beyond `cap` profiles and
/// std::invalid_argument when a buyer has no enumerated support.
void for_each_profile(const AuctionInstance& instance, std::uint64_t cap,
                      const std::function<void(const std::vector<RankedList>&, const Rational&)>& visit);

Rational expected_virtual_surplus(const AuctionInstance& instance, std::uint64_t cap = kDefaultProfileCap);

/// Myersonian when `tables` is empty.
Rational expected_revenue_exact(const AuctionInstance& instance, const std::optional<TaxationMechanism>& tables = {},
                                std::uint64_t cap = kDefaultProfileCap);

struct SimulationResult {
  std::uint64_t samples = 0;
  double mean = 0;
  double standard_error = 0;
};

/// IID profile draws from one mt19937_64 seeded with `seed`, buyers in order.
SimulationResult simulate(const AuctionInstance& instance, const std::optional<TaxationMechanism>& tables,
                          std::uint64_t samples, std::uint64_t seed);

/// One list from a buyer: walks the chain when present, else samples the
/// explicit support.
RankedList sample_buyer(const Buyer& buyer, std::mt19937_64& rng);

}  // namespace aauction
