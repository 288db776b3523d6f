#pragma once

// Small hand-checkable instances shared by the unit and acceptance suites.
// Product ids: A=1, B=2, C=3, D=4.

#include "assortment_auction/choice_model.hpp"

#include <vector>

namespace aauction::testing {

inline constexpr ProductId A = 1;
inline constexpr ProductId B = 2;
inline constexpr ProductId C = 3;
inline constexpr ProductId D = 4;

inline Rational q(const char* text) { return parse_rational(text); }

inline RankedList L(std::initializer_list<ProductId> items) { return RankedList(std::vector<ProductId>(items)); }

inline ExplicitListDistribution uniform(int n, std::initializer_list<RankedList> lists) {
  std::vector<ExplicitListDistribution::Atom> atoms;
  Rational p = Rational(1) / Rational(static_cast<long>(lists.size()));
  for (const auto& l : lists) atoms.push_back({l, p});
  return ExplicitListDistribution(n, std::move(atoms));
}

/// Prices 12, 7.5, 4.5, 4; lists (CBA),(CB),(CD),(C) uniformly.
struct Showcase {
  ProductCatalog catalog{{q("12"), q("15/2"), q("9/2"), q("4")}, {"A", "B", "C", "D"}};
  ExplicitListDistribution dist = uniform(4, {L({C, B, A}), L({C, B}), L({C, D}), L({C})});

  /// lambda_C = 1; C->B 1/2, C->D 1/4, C->0 1/4; B->A 1/2, B->0 1/2; A,D->0.
  static MarkovChainModel chain() {
    std::vector<Rational> arrival{0, 0, 0, 1, 0};
    std::vector<std::vector<Rational>> rows(5);
    rows[A] = {1, 0, 0, 0, 0};
    rows[B] = {q("1/2"), q("1/2"), 0, 0, 0};
    rows[C] = {q("1/4"), 0, q("1/2"), 0, q("1/4")};
    rows[D] = {1, 0, 0, 0, 0};
    return MarkovChainModel(arrival, rows);
  }
};

/// Prices 4, 2, 1, 1; lists (BA),(CBD),(B),(C) uniformly. The frontier VVM is
/// implementable but surmountable at {A,C}.
struct NonMyersonian {
  ProductCatalog catalog{{q("4"), q("2"), q("1"), q("1")}, {"A", "B", "C", "D"}};
  ExplicitListDistribution dist = uniform(4, {L({B, A}), L({C, B, D}), L({B}), L({C})});
};

/// Prices 25, 15, 12; lists (BA),(CB),(B),(B),(C) uniformly.
struct NonImplementable {
  ProductCatalog catalog{{q("25"), q("15"), q("12")}, {"A", "B", "C"}};
  ExplicitListDistribution dist = uniform(3, {L({B, A}), L({C, B}), L({B}), L({B}), L({C})});
};

/// Prices 6, 3, 2; lists (BA),(CB),(B) uniformly. Efficient assortments are
/// not nested.
struct NonNested {
  ProductCatalog catalog{{q("6"), q("3"), q("2")}, {"A", "B", "C"}};
  ExplicitListDistribution dist = uniform(3, {L({B, A}), L({C, B}), L({B})});
};

/// Prices 6, 5, 4, 3; chain lambda_C = 3/4, lambda_D = 1/4; C->B 2/3, C->D
/// 1/3; B->A 1/2, B->0 1/2; A,D->0. Generates (CBA),(CB),(CD),(D) uniformly.
struct ProcedureWalkthrough {
  ProductCatalog catalog{{q("6"), q("5"), q("4"), q("3")}, {"A", "B", "C", "D"}};

  static MarkovChainModel chain() {
    std::vector<Rational> arrival{0, 0, 0, q("3/4"), q("1/4")};
    std::vector<std::vector<Rational>> rows(5);
    rows[A] = {1, 0, 0, 0, 0};
    rows[B] = {q("1/2"), q("1/2"), 0, 0, 0};
    rows[C] = {0, 0, q("2/3"), 0, q("1/3")};
    rows[D] = {1, 0, 0, 0, 0};
    return MarkovChainModel(arrival, rows);
  }
};

}  // namespace aauction::testing
