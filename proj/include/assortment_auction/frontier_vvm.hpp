#pragma once

#include "assortment_auction/choice_model.hpp"

#include <map>
#include <optional>
#include <vector>

namespace aauction {

// ------------------------------------------------------------------------
// Greedy efficiency sequence for Markov-chain buyers.
// ------------------------------------------------------------------------

/// How one product looked at the start of an iteration.
struct CandidateEvaluation {
  ProductId product = 0;
  Rational adjusted_price;     // r^(k-1)_j
  Rational reach_no_purchase;  // P_j[0 before S^(k-1)]
  std::optional<Rational> efficiency;  // empty when reach_no_purchase is 0
};

struct ProcedureStep {
  int k = 0;
  ProductId product = 0;      // s^(k)
  Assortment assortment;      // S^(k)
  Rational value;             // V^(k), the winning efficiency
  Rational reach_no_purchase; // P_{s^(k)}[0 before S^(k-1)]
  std::vector<CandidateEvaluation> candidates;
  /// r^(k)_j indexed by product 0..n; meaningful only for j outside S^(k).
  std::vector<Rational> adjusted_prices;
};

struct DeadProduct {
  ProductId product = 0;
  Rational final_price;   // r^(K)_j
  int death_iteration = 0;  // k with P_j[0 before S^(k)] = 0 < P_j[0 before S^(k-1)]
};

struct EfficiencySequence {
  std::vector<Rational> initial_prices;  // indexed 0..n
  std::vector<ProcedureStep> steps;
  std::vector<DeadProduct> dead_products;
  /// Evaluation that triggered the stop (every candidate ineligible).
  std::vector<CandidateEvaluation> final_candidates;

  int size() const { return static_cast<int>(steps.size()); }
  /// S^(k); S^(0) is empty.
  Assortment assortment(int k) const;
  /// r^(k)_j for a product still outside S^(k).
  const Rational& adjusted_price(int k, ProductId j) const;
};

/// Repeatedly adds the product with the highest ratio of externality-adjusted
/// price to P_j[0 before S], among products whose ratio denominator is
/// nonzero; ties go to the smallest product id.
EfficiencySequence run_procedure(const MarkovChainModel& model, const ProductCatalog& catalog);

// ------------------------------------------------------------------------
// Virtual valuation mappings.
// ------------------------------------------------------------------------

/// Threshold assortment: lists scoring at least `value` are exactly the lists
/// that buy from `assortment`.
struct MenuEntry {
  Rational value;
  Assortment assortment;
};

class VirtualValuationMapping {
public:
  VirtualValuationMapping() = default;

  /// V(l) = V^(k) for the first k with s^(k) on l; -inf otherwise.
  static VirtualValuationMapping from_sequence(const EfficiencySequence& seq);

  /// Table-driven mapping. Unlisted lists and the empty list score -inf.
  static VirtualValuationMapping from_table(std::map<RankedList, ExtRational> values, std::vector<MenuEntry> menu);

  ExtRational value(const RankedList& list) const;

  /// Entries ordered from the highest value down.
  const std::vector<MenuEntry>& menu() const { return menu_; }

  /// The assortment of the last menu entry whose value clears the threshold
  /// (>= when inclusive, > otherwise); empty when no entry clears it.
  Assortment threshold_assortment(const ExtRational& threshold, bool inclusive) const;

private:
  std::vector<std::pair<ProductId, Rational>> sequence_;
  std::map<RankedList, ExtRational> table_;
  std::vector<MenuEntry> menu_;
};

inline VirtualValuationMapping vvm_from_sequence(const EfficiencySequence& seq) {
  return VirtualValuationMapping::from_sequence(seq);
}

// ------------------------------------------------------------------------
// Brute-force revenue frontier and the two VVM conditions.
// ------------------------------------------------------------------------

inline constexpr int kDefaultAssortmentCap = 16;

struct FrontierVertex {
  Rational sale_probability;  // Q
  Rational revenue;           // R
  std::vector<Assortment> attaining;  // every assortment landing on this point
  /// Representative: extends the previous vertex's representative when
  /// possible, otherwise fewest products, then lowest ids.
  Assortment canonical;
  std::optional<Rational> left_slope;  // absent at the origin
};

struct RevenueFrontier {
  std::vector<FrontierVertex> vertices;  // first vertex is (0,0)
};

/// Upper concave envelope of (Q(S), R(S)) over all 2^n assortments.
RevenueFrontier brute_force_frontier(const ExplicitListDistribution& dist, const ProductCatalog& catalog,
                                     int cap = kDefaultAssortmentCap);

/// Scores each list by the left slope at the first frontier vertex whose
/// representative it buys from; the menu is the vertex sequence.
VirtualValuationMapping vvm_from_frontier(const RevenueFrontier& frontier, const ExplicitListDistribution& dist);

/// Sum over support lists buying from S of V(l) P(l); -inf if any has V = -inf.
ExtRational integrated_value(const VirtualValuationMapping& vvm, const ExplicitListDistribution& dist,
                             const Assortment& s);

struct ThresholdCheck {
  enum class Failure { None, NoMatchingAssortment, InequalityFails };

  ExtRational threshold;  // +inf for the sentinel above every value
  std::vector<RankedList> target;  // support lists scoring >= threshold
  std::optional<Assortment> witness;
  ExtRational integrated;  // left side at the witness (or at the best match on failure)
  Rational revenue;        // R at the witness
  Failure failure = Failure::None;
};

struct ImplementabilityReport {
  bool implementable = true;
  std::vector<ThresholdCheck> thresholds;  // sentinel first, then values high to low
};

/// For each distinct finite value on the support (plus a sentinel above the
/// maximum), searches all assortments for one whose buyers are exactly the
/// lists at or above the threshold and whose revenue covers their integrated
/// value.
ImplementabilityReport check_implementability(const VirtualValuationMapping& vvm, const ExplicitListDistribution& dist,
                                              const ProductCatalog& catalog, int cap = kDefaultAssortmentCap);

struct InsurmountabilityViolation {
  Assortment assortment;
  ExtRational integrated;
  Rational revenue;
};

struct InsurmountabilityReport {
  bool insurmountable = true;
  std::vector<InsurmountabilityViolation> violations;
};

/// Checks integrated value >= revenue on every one of the 2^n assortments.
InsurmountabilityReport check_insurmountability(const VirtualValuationMapping& vvm, const ExplicitListDistribution& dist,
                                                const ProductCatalog& catalog, int cap = kDefaultAssortmentCap);

/// Table VVM for explicit buyers; the menu comes from implementability
/// witnesses, falling back to an assortment that matches the target set when
/// no witness satisfies the inequality.
VirtualValuationMapping vvm_from_values(std::map<RankedList, ExtRational> values, const ExplicitListDistribution& dist,
                                        const ProductCatalog& catalog, int cap = kDefaultAssortmentCap);

}  // namespace aauction
