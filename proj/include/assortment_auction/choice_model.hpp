#pragma once

#include "assortment_auction/errors.hpp"
#include "assortment_auction/rational.hpp"

#include <bit>
#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace aauction {

/// Product 0 is the no-purchase option; real products are 1..n.
using ProductId = int;
inline constexpr ProductId kNoPurchase = 0;
inline constexpr int kMaxProducts = 63;

/// Set of chain nodes {0..63}. As an assortment bit 0 is never set; the
/// extended set S_+ is `with_no_purchase()`.
class NodeSet {
public:
  constexpr NodeSet() = default;
  constexpr explicit NodeSet(std::uint64_t bits) : bits_(bits) {}
  NodeSet(std::initializer_list<int> nodes);

  static NodeSet from_items(const std::vector<int>& nodes);
  /// {1..n}
  static NodeSet products(int n);

  constexpr std::uint64_t bits() const { return bits_; }
  constexpr bool contains(int node) const { return (bits_ >> node) & 1U; }
  constexpr bool empty() const { return bits_ == 0; }
  int size() const { return std::popcount(bits_); }
  std::vector<int> members() const;

  constexpr NodeSet with(int node) const { return NodeSet(bits_ | (std::uint64_t{1} << node)); }
  constexpr NodeSet without(int node) const { return NodeSet(bits_ & ~(std::uint64_t{1} << node)); }
  constexpr NodeSet with_no_purchase() const { return with(kNoPurchase); }
  constexpr NodeSet operator|(NodeSet o) const { return NodeSet(bits_ | o.bits_); }
  constexpr NodeSet operator&(NodeSet o) const { return NodeSet(bits_ & o.bits_); }
  constexpr NodeSet minus(NodeSet o) const { return NodeSet(bits_ & ~o.bits_); }
  constexpr bool subset_of(NodeSet o) const { return (bits_ & ~o.bits_) == 0; }

  friend constexpr bool operator==(NodeSet, NodeSet) = default;
  friend constexpr auto operator<=>(NodeSet a, NodeSet b) { return a.bits_ <=> b.bits_; }

private:
  std::uint64_t bits_ = 0;
};

using Assortment = NodeSet;

/// Products 1..n with fixed non-negative prices and display names.
class ProductCatalog {
public:
  ProductCatalog() = default;
  /// prices[k] belongs to product k+1. Names default to "1".."n".
  explicit ProductCatalog(std::vector<Rational> prices, std::vector<std::string> names = {});

  int size() const { return static_cast<int>(prices_.size()); }
  /// price(0) is 0.
  const Rational& price(ProductId j) const;
  const std::string& name(ProductId j) const;
  std::optional<ProductId> find(std::string_view name) const;
  NodeSet all_products() const { return NodeSet::products(size()); }

  std::string format(const Assortment& s) const;

private:
  std::vector<Rational> prices_;
  std::vector<std::string> names_;
  Rational zero_;
  std::string no_purchase_name_ = "0";
};

/// Strict preference list over a subset of products, best first. Products
/// not on the list rank below the no-purchase option.
class RankedList {
public:
  static constexpr std::size_t kUnranked = static_cast<std::size_t>(-1);

  RankedList() = default;
  explicit RankedList(std::vector<ProductId> ordering);

  const std::vector<ProductId>& items() const { return items_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  bool contains(ProductId j) const { return members_.contains(j); }
  NodeSet members() const { return members_; }

  /// 1-based rank; |l|+1 for product 0; kUnranked for absent products.
  std::size_t rank(ProductId j) const;

  std::string format(const ProductCatalog& catalog) const;

  friend bool operator==(const RankedList& a, const RankedList& b) { return a.items_ == b.items_; }
  friend auto operator<=>(const RankedList& a, const RankedList& b) { return a.items_ <=> b.items_; }

private:
  std::vector<ProductId> items_;
  NodeSet members_;
};

/// Most-preferred option in S_+.
ProductId choose(const RankedList& list, const Assortment& assortment);

/// Every ordered subset of {1..n}, including the empty list.
std::vector<RankedList> all_lists(int n);

class ExplicitListDistribution {
public:
  struct Atom {
    RankedList list;
    Rational probability;
  };

  ExplicitListDistribution() = default;
  /// Merges repeated lists by summing their mass, drops nothing else. Throws
  /// std::invalid_argument on non-positive mass, products outside 1..n, or a
  /// total other than exactly 1.
  ExplicitListDistribution(int num_products, std::vector<Atom> atoms);

  int num_products() const { return num_products_; }
  const std::vector<Atom>& support() const { return atoms_; }
  Rational probability(const RankedList& list) const;

private:
  int num_products_ = 0;
  std::vector<Atom> atoms_;  // sorted by list
};

struct ChoiceStats {
  /// Indexed by product 0..n; entry 0 is the no-purchase mass.
  std::vector<Rational> choice_probability;
  Rational sale_probability;
  Rational revenue;
};

ChoiceStats choice_stats(const ExplicitListDistribution& dist, const ProductCatalog& catalog,
                         const Assortment& assortment);

/// Terminating random walk over nodes 0..n whose first visits form the list.
class MarkovChainModel {
public:
  MarkovChainModel() = default;
  /// `arrival` has n+1 entries (node 0 first). `transitions` has n+1 rows; row
  /// 0 must be empty (node 0 is terminal) and rows 1..n have n+1 entries.
  MarkovChainModel(std::vector<Rational> arrival, std::vector<std::vector<Rational>> transitions);

  int num_products() const { return static_cast<int>(arrival_.size()) - 1; }
  const Rational& arrival(int node) const { return arrival_.at(node); }
  const Rational& transition(int from, int to) const { return transitions_.at(from).at(to); }

private:
  std::vector<Rational> arrival_;
  std::vector<std::vector<Rational>> transitions_;
};

/// Where the walk starts: the arrival distribution or a fixed node.
struct Start {
  std::optional<int> node;

  static Start initial() { return {}; }
  static Start at(int n) { return Start{n}; }
};

/// h(x) = P_x[target before any node of avoid] for every node x in 0..n.
/// The walk dies at node 0, so h(0) = 0 unless 0 is the target.
std::vector<Rational> hit_vector(const MarkovChainModel& model, int target, NodeSet avoid);

/// P[target < avoid] from `start`. Rejects target in avoid, and a fixed start
/// node inside avoid or equal to the target.
Rational hit_probability(const MarkovChainModel& model, Start start, int target, NodeSet avoid);

/// P[first < then < avoid] = P[first < then ∪ avoid] * P_first[then < avoid].
Rational ordered_hit_probability(const MarkovChainModel& model, Start start, int first, int then,
                                 NodeSet avoid);

Rational list_probability(const MarkovChainModel& model, const RankedList& list);

inline constexpr int kDefaultSupportCap = 10;

/// Exact list distribution generated by the chain. Throws CapExceeded when
/// n > cap.
ExplicitListDistribution enumerate_support(const MarkovChainModel& model, int cap = kDefaultSupportCap);

/// Chain whose induced choice probabilities are w_j / (w_0 + sum_{k in S} w_k).
/// weights[0] is the no-purchase weight.
MarkovChainModel from_mnl(const std::vector<Rational>& weights);

/// Chain generating the buy-down lists (1..j) with probability pmf[j], where
/// pmf[j] is the chance that the valuation equals price j (pmf[0] for r_0 = 0).
/// Requires strictly increasing prices.
MarkovChainModel from_buydown(const std::vector<Rational>& pmf, const ProductCatalog& catalog);

/// One list drawn by walking the chain.
RankedList sample_list(const MarkovChainModel& model, std::mt19937_64& rng);

}  // namespace aauction
