#include "doctest.h"

#include "assortment_auction/errors.hpp"
#include "assortment_auction/oracle.hpp"
#include "random_instances.hpp"
#include "reference_instances.hpp"

using namespace aauction;
using namespace aauction::testing;

namespace {

ExtRational ev(const char* text) { return ExtRational(q(text)); }

AuctionInstance non_myersonian_auction() {
  NonMyersonian inst;
  AuctionInstance a;
  a.catalog = inst.catalog;
  const auto vvm = vvm_from_values({{L({B, A}), ev("4")}, {L({C, B, D}), ev("1")}, {L({B}), ev("1")}, {L({C}), ev("0")}},
                                   inst.dist, inst.catalog);
  a.buyers = {Buyer::from_explicit(inst.dist, vvm), Buyer::from_explicit(inst.dist, vvm)};
  a.family = FeasibleFamily::single_winner(2);
  return a;
}

TaxationMechanism constant_tables(const AuctionInstance& a, Assortment t) {
  TaxationMechanism mech;
  mech.tables.resize(a.num_buyers());
  for (int i = 0; i < a.num_buyers(); ++i) {
    std::vector<RankedList> profile(a.num_buyers());
    for_each_profile(a, kDefaultProfileCap, [&](const std::vector<RankedList>& p, const Rational&) {
      mech.tables[i][context_of(i, p)] = t;
    });
  }
  return mech;
}

/// Oracle of last resort: every table pair over the class representatives.
Rational exhaustive_two_buyer(const AuctionInstance& a) {
  std::vector<std::vector<Assortment>> reps(2);
  for (int i = 0; i < 2; ++i) {
    std::map<std::vector<ProductId>, Assortment> seen;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << a.catalog.size()); ++mask) {
      const Assortment s(mask << 1);
      std::vector<ProductId> key;
      for (const auto& atom : a.buyers[i].distribution->support()) key.push_back(choose(atom.list, s));
      seen.emplace(key, s);
    }
    for (const auto& [k, s] : seen) reps[i].push_back(s);
  }
  const auto& s0 = a.buyers[0].distribution->support();
  const auto& s1 = a.buyers[1].distribution->support();
  Rational best = -1;
  std::vector<std::size_t> t0(s1.size(), 0);
  // Buyer 0's table enumerated in full; buyer 1's evaluated by full enumeration too.
  std::function<void(std::size_t)> rec0;
  std::vector<std::size_t> t1(s0.size(), 0);
  std::function<void(std::size_t)> rec1 = [&](std::size_t k) {
    if (k == s0.size()) {
      TaxationMechanism mech;
      mech.tables.resize(2);
      for (std::size_t b = 0; b < s1.size(); ++b) mech.tables[0][{s1[b].list}] = reps[0][t0[b]];
      for (std::size_t b = 0; b < s0.size(); ++b) mech.tables[1][{s0[b].list}] = reps[1][t1[b]];
      Rational total = 0;
      bool feasible = true;
      for_each_profile(a, kDefaultProfileCap, [&](const std::vector<RankedList>& p, const Rational& pr) {
        const auto out = allocate_tables(a, mech, p);
        feasible = feasible && out.feasible;
        total += pr * out.revenue();
      });
      if (feasible && total > best) best = total;
      return;
    }
    for (std::size_t c = 0; c < reps[1].size(); ++c) {
      t1[k] = c;
      rec1(k + 1);
    }
  };
  rec0 = [&](std::size_t k) {
    if (k == s1.size()) {
      rec1(0);
      return;
    }
    for (std::size_t c = 0; c < reps[0].size(); ++c) {
      t0[k] = c;
      rec0(k + 1);
    }
  };
  rec0(0);
  return best;
}

}  // namespace

TEST_CASE("non-Myersonian example: oracle beats the Myersonian auction") {
  const auto a = non_myersonian_auction();
  const auto r = enumerate_optimal(a);
  CHECK(r.revenue == q("37/16"));
  CHECK(expected_revenue_exact(a) == q("36/16"));
  CHECK(r.optimal_count >= 1);

  const auto v = verify_mechanism(a, r.mechanism);
  CHECK(v.feasible);
  CHECK(v.revenue == q("37/16"));
}

TEST_CASE("published tables verify at 37/16") {
  const auto a = non_myersonian_auction();
  TaxationMechanism mech;
  mech.tables.resize(2);
  mech.tables[0] = {{{L({B, A})}, Assortment{A}},
                    {{L({C, B, D})}, Assortment{A}},
                    {{L({B})}, Assortment{A, C}},
                    {{L({C})}, Assortment{A, B}}};
  mech.tables[1] = {{{L({B, A})}, Assortment{}},
                    {{L({C, B, D})}, Assortment{A, D}},
                    {{L({B})}, Assortment{A, B}},
                    {{L({C})}, Assortment{A, C}}};
  const auto v = verify_mechanism(a, mech);
  CHECK(v.feasible);
  CHECK(v.revenue == q("37/16"));
}

TEST_CASE("constant tables") {
  const auto a = non_myersonian_auction();
  const auto both_a = verify_mechanism(a, constant_tables(a, Assortment{A}));
  CHECK_FALSE(both_a.feasible);
  bool found = false;
  for (const auto& p : both_a.infeasible_profiles) found = found || (p[0] == L({B, A}) && p[1] == L({B, A}));
  CHECK(found);

  const auto none = verify_mechanism(a, constant_tables(a, Assortment{}));
  CHECK(none.feasible);
  CHECK(none.revenue == 0);
}

TEST_CASE("single-buyer oracle is assortment optimization") {
  Showcase inst;
  AuctionInstance a;
  a.catalog = inst.catalog;
  a.buyers = {Buyer::from_chain(Showcase::chain(), inst.catalog)};
  a.family = FeasibleFamily::single_winner(1);
  const auto r = enumerate_optimal(a);
  CHECK(r.revenue == q("19/4"));
  CHECK(r.mechanism.tables[0].at({}) == Assortment{A, B, D});

  AuctionInstance one;
  one.catalog = ProductCatalog({q("5/2")});
  one.buyers = {Buyer::from_explicit(uniform(1, {L({1})}), {})};
  one.family = FeasibleFamily::single_winner(1);
  const auto r1 = enumerate_optimal(one);
  CHECK(r1.revenue == q("5/2"));
  CHECK(r1.mechanism.tables[0].at({}) == Assortment{1});
}

TEST_CASE("oracle caps") {
  AuctionInstance a = non_myersonian_auction();
  a.buyers.push_back(a.buyers[0]);
  a.buyers.push_back(a.buyers[0]);
  a.family = FeasibleFamily::single_winner(4);
  CHECK_THROWS_AS(enumerate_optimal(a), CapExceeded);

  AuctionInstance big;
  big.catalog = ProductCatalog(std::vector<Rational>(7, Rational(1)));
  big.buyers = {Buyer::from_explicit(uniform(7, {L({1})}), {})};
  big.family = FeasibleFamily::single_winner(1);
  CHECK_THROWS_AS(enumerate_optimal(big), CapExceeded);
}

TEST_CASE("two-buyer search matches exhaustive enumeration on tiny instances") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 12; ++trial) {
    const int n = 2;
    const auto catalog = random_catalog(rng, n);
    const auto lists = all_lists(n);
    AuctionInstance a;
    a.catalog = catalog;
    for (int i = 0; i < 2; ++i) {
      std::vector<ExplicitListDistribution::Atom> atoms;
      const int k = uniform_int(rng, 1, 3);
      std::vector<long> w;
      for (int t = 0; t < k; ++t) w.push_back(uniform_int(rng, 1, 3));
      const auto p = normalise(w);
      for (int t = 0; t < k; ++t) atoms.push_back({lists[uniform_int(rng, 0, static_cast<int>(lists.size()) - 1)], p[t]});
      a.buyers.push_back(Buyer::from_explicit(ExplicitListDistribution(n, atoms), {}));
    }
    a.family = trial % 3 == 0 ? FeasibleFamily::cardinality(2, 2) : FeasibleFamily::single_winner(2);
    CAPTURE(trial);
    const auto r = enumerate_optimal(a);
    CHECK(r.revenue == exhaustive_two_buyer(a));
    const auto v = verify_mechanism(a, r.mechanism);
    CHECK(v.feasible);
    CHECK(v.revenue == r.revenue);
  }
}

TEST_CASE("three buyers on a tiny instance") {
  ProductCatalog catalog({q("2"), q("3")});
  AuctionInstance a;
  a.catalog = catalog;
  const auto dist = uniform(2, {L({1, 2}), L({2})});
  for (int i = 0; i < 3; ++i) a.buyers.push_back(Buyer::from_explicit(dist, {}));
  a.family = FeasibleFamily::single_winner(3);
  const auto r = enumerate_optimal(a);
  const auto v = verify_mechanism(a, r.mechanism);
  CHECK(v.feasible);
  CHECK(v.revenue == r.revenue);

  // Any single fixed assortment for buyer 0 alone is a lower bound.
  CHECK(r.revenue >= q("2"));
  // No mechanism beats selling the top product to some buyer every time.
  CHECK(r.revenue <= q("3"));

  // With room for everyone the buyers decouple.
  a.family = FeasibleFamily::cardinality(3, 3);
  const auto loose = enumerate_optimal(a);
  AuctionInstance solo;
  solo.catalog = catalog;
  solo.buyers = {a.buyers[0]};
  solo.family = FeasibleFamily::single_winner(1);
  CHECK(loose.revenue == 3 * enumerate_optimal(solo).revenue);
}

TEST_CASE("ironed virtual valuations") {
  ProductCatalog two({q("1"), q("2")});
  auto phi = ironed_virtual_valuations({0, q("1/2"), q("1/2")}, two);
  CHECK(*phi.phi[2] == 2);
  CHECK(*phi.phi[1] == 0);

  phi = ironed_virtual_valuations({0, q("1/4"), q("3/4")}, two);
  CHECK(*phi.phi[2] == 2);
  CHECK(*phi.phi[1] == -2);

  ProductCatalog three({q("1"), q("2"), q("7")});
  phi = ironed_virtual_valuations({0, 0, 0, 1}, three);
  CHECK(*phi.phi[3] == 7);

  // Only r_0 carries mass.
  phi = ironed_virtual_valuations({1, 0, 0}, two);
  CHECK(*phi.phi[0] == 0);
  CHECK_FALSE(phi.phi[1].has_value());
  CHECK_FALSE(phi.phi[2].has_value());

  // A non-regular case that needs ironing: phi stays monotone.
  phi = ironed_virtual_valuations({q("1/10"), q("1/2"), q("1/10"), q("3/10")}, three);
  CHECK(*phi.phi[1] <= *phi.phi[2]);
  CHECK(*phi.phi[2] <= *phi.phi[3]);
}

TEST_CASE("classical Myerson auction") {
  ProductCatalog two({q("1"), q("2")});
  const auto phi = ironed_virtual_valuations({0, q("1/4"), q("3/4")}, two);
  const auto out = classical_myerson({phi, phi}, FeasibleFamily::single_winner(2), {2, 2});
  CHECK(out.winners == 0b01);
  CHECK(out.payments[0] == 2);
  const auto low = classical_myerson({phi, phi}, FeasibleFamily::single_winner(2), {1, 1});
  CHECK(low.winners == 0);
}

TEST_CASE("classical payments skip valuations without mass") {
  ProductCatalog three({q("1"), q("2"), q("3")});
  const auto phi = ironed_virtual_valuations({0, q("1/2"), 0, q("1/2")}, three);
  // r_2 has no mass but shares q with r_3, so its phi also wins.
  CHECK(*phi.phi[2] == 3);
  CHECK(*phi.phi[3] == 3);
  const auto out = classical_myerson({phi}, FeasibleFamily::single_winner(1), {3});
  CHECK(out.winners == 0b1);
  CHECK(out.payments[0] == 3);
}
