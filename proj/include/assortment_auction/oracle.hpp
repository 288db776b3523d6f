#pragma once

#include "assortment_auction/auction.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace aauction {

// Hard limits for exhaustive mechanism search.
inline constexpr int kOracleMaxBuyers = 3;
inline constexpr int kOracleMaxSupport = 6;
inline constexpr int kOracleMaxProducts = 6;

struct OracleResult {
  TaxationMechanism mechanism;
  Rational revenue;
  /// Optimal tables found for the first buyer (each with its best-responding
  /// remainder). Equals the number of optimal assortment classes when m = 1.
  std::uint64_t optimal_count = 0;
  std::uint64_t nodes = 0;  // search nodes visited
};

/// Exact revenue optimum over deterministic truthful feasible mechanisms, via
/// taxation tables over each buyer's support. Throws CapExceeded past the
/// limits above and std::invalid_argument when a buyer has no support.
OracleResult enumerate_optimal(const AuctionInstance& instance);

struct VerificationReport {
  bool feasible = true;
  Rational revenue;
  std::vector<std::vector<RankedList>> infeasible_profiles;
  /// Purchaser set per profile, in enumeration order.
  std::vector<BuyerSet> purchasers;
};

/// Evaluates the tables on every profile. A missing context throws
/// std::out_of_range.
VerificationReport verify_mechanism(const AuctionInstance& instance, const TaxationMechanism& mech,
                                    std::uint64_t cap = kDefaultProfileCap);

/// Classical (ironed) virtual valuations of a discrete valuation on prices
/// r_0 = 0 < r_1 < ... < r_n. Entry j is empty when P[v >= r_j] = 0;
/// entry 0 is 0 by convention.
struct IronedValuation {
  std::vector<Rational> prices;                // r_0..r_n
  std::vector<std::optional<Rational>> phi;    // phi(r_0)..phi(r_n)
  std::vector<Rational> mass;                  // P[v = r_j]

  ExtRational value(int j) const { return phi.at(j) ? ExtRational(*phi[j]) : ExtRational::neg_inf(); }
};

IronedValuation ironed_virtual_valuations(const std::vector<Rational>& pmf, const ProductCatalog& catalog);

struct ClassicalOutcome {
  BuyerSet winners = 0;
  std::vector<Rational> payments;  // 0 for losers
};

/// Highest-phi feasible winners (same tie-break as the assortment auction);
/// each winner pays the lowest valuation with positive mass whose phi would
/// still win.
ClassicalOutcome classical_myerson(const std::vector<IronedValuation>& buyers, const FeasibleFamily& family,
                                   const std::vector<int>& valuation_index);

}  // namespace aauction
