#include "assortment_auction/oracle.hpp"

#include "assortment_auction/errors.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace aauction {

namespace {

/// Assortments that induce the same choice on every support list.
struct AssortmentClass {
  Assortment rep;         // largest member using only listed products
  std::uint64_t buy = 0;  // bit t: support list t purchases
  Rational revenue;       // sum over the support of P(l) * price of the choice
};

std::vector<AssortmentClass> assortment_classes(const ExplicitListDistribution& dist, const ProductCatalog& catalog) {
  const auto& support = dist.support();
  std::map<std::vector<ProductId>, std::size_t> seen;
  std::vector<AssortmentClass> out;
  NodeSet listed;
  for (const auto& atom : support) listed = listed | atom.list.members();
  const std::uint64_t count = std::uint64_t{1} << catalog.size();
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    const Assortment s(mask << 1);
    if (!s.subset_of(listed)) continue;
    std::vector<ProductId> choice;
    for (const auto& atom : support) choice.push_back(choose(atom.list, s));
    // A class is closed under union; accumulate its largest member.
    if (auto it = seen.find(choice); it != seen.end()) {
      out[it->second].rep = out[it->second].rep | s;
      continue;
    }
    seen.emplace(choice, out.size());
    AssortmentClass c{s, 0, Rational(0)};
    for (std::size_t t = 0; t < support.size(); ++t) {
      if (choice[t] == kNoPurchase) continue;
      c.buy |= std::uint64_t{1} << t;
      c.revenue += support[t].probability * catalog.price(choice[t]);
    }
    out.push_back(std::move(c));
  }
  return out;
}

BuyerSet bit(int i) { return BuyerSet{1} << i; }

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) return std::numeric_limits<std::uint64_t>::max();
  return a * b;
}

std::uint64_t saturating_add(std::uint64_t a, std::uint64_t b) {
  return a > std::numeric_limits<std::uint64_t>::max() - b ? std::numeric_limits<std::uint64_t>::max() : a + b;
}

bool lex_less(const std::vector<Assortment>& a, const std::vector<Assortment>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

/// Two buyers X and Y: X's table is indexed by Y's support, Y's by X's. Other
/// buyers' purchases are fixed per profile by `external`. X's table is found by
/// branch and bound; Y best-responds context by context.
class TwoBuyerSolver {
public:
  struct Solution {
    Rational value;
    std::vector<int> table_x;  // class index per Y support list
    std::vector<int> table_y;  // class index per X support list
    std::uint64_t count = 0;
    std::uint64_t nodes = 0;
  };

  TwoBuyerSolver(int x, int y, const std::vector<Rational>& px, const std::vector<Rational>& py,
                 const std::vector<AssortmentClass>& cx, const std::vector<AssortmentClass>& cy,
                 const FeasibleFamily& family, std::function<BuyerSet(int, int)> external)
      : x_(x), y_(y), px_(px), py_(py), cx_(cx), cy_(cy), family_(family), external_(std::move(external)) {}

  Solution solve() {
    const int sx = static_cast<int>(px_.size());
    const int sy = static_cast<int>(py_.size());

    // X's options per Y context, merged when they differ only in which products
    // are chosen but not in revenue or buyers served.
    groups_.assign(sy, {});
    for (int iy = 0; iy < sy; ++iy) {
      std::map<std::pair<Rational, std::uint64_t>, std::size_t> index;
      for (std::size_t c = 0; c < cx_.size(); ++c) {
        bool ok = true;
        for (int ix = 0; ix < sx && ok; ++ix) {
          if ((cx_[c].buy >> ix) & 1U) ok = family_.contains(external_(ix, iy) | bit(x_));
        }
        if (!ok) continue;
        auto key = std::make_pair(cx_[c].revenue, cx_[c].buy);
        auto it = index.find(key);
        if (it == index.end()) {
          index.emplace(key, groups_[iy].size());
          groups_[iy].push_back(Group{static_cast<int>(c), cx_[c].revenue, cx_[c].buy, 1});
        } else {
          auto& g = groups_[iy][it->second];
          ++g.multiplicity;
          if (cx_[c].rep < cx_[g.cls].rep) g.cls = static_cast<int>(c);
        }
      }
      std::sort(groups_[iy].begin(), groups_[iy].end(), [&](const Group& a, const Group& b) {
        if (a.revenue != b.revenue) return a.revenue > b.revenue;
        if (std::popcount(a.buy) != std::popcount(b.buy)) return std::popcount(a.buy) < std::popcount(b.buy);
        return cx_[a.cls].rep < cx_[b.cls].rep;
      });
    }

    optimistic_.assign(sy + 1, Rational(0));
    for (int iy = sy - 1; iy >= 0; --iy) {
      Rational best = 0;
      for (const auto& g : groups_[iy]) best = std::max(best, g.revenue);
      optimistic_[iy] = optimistic_[iy + 1] + py_[iy] * best;
    }

    // Y's best response for every X context and every set of Y contexts in
    // which X purchases.
    const std::uint64_t masks = std::uint64_t{1} << sy;
    response_.assign(sx, std::vector<std::pair<Rational, int>>(masks, {Rational(0), -1}));
    for (int ix = 0; ix < sx; ++ix) {
      for (std::uint64_t m = 0; m < masks; ++m) {
        auto& best = response_[ix][m];
        for (std::size_t c = 0; c < cy_.size(); ++c) {
          bool ok = true;
          for (int iy = 0; iy < sy && ok; ++iy) {
            if (!((cy_[c].buy >> iy) & 1U)) continue;
            const BuyerSet winners = external_(ix, iy) | bit(y_) | (((m >> iy) & 1U) ? bit(x_) : 0);
            ok = family_.contains(winners);
          }
          if (!ok) continue;
          if (best.second < 0 || cy_[c].revenue > best.first ||
              (cy_[c].revenue == best.first && cy_[c].rep < cy_[best.second].rep)) {
            best = {cy_[c].revenue, static_cast<int>(c)};
          }
        }
      }
    }

    solution_ = Solution{};
    have_best_ = false;
    current_.assign(sy, -1);
    std::vector<std::uint64_t> served(sx, 0);
    search(0, Rational(0), served, 1);
    solution_.nodes = nodes_;
    return solution_;
  }

private:
  struct Group {
    int cls;
    Rational revenue;
    std::uint64_t buy;
    std::uint64_t multiplicity;
  };

  Rational responses(const std::vector<std::uint64_t>& served) const {
    Rational total = 0;
    for (std::size_t ix = 0; ix < px_.size(); ++ix) total += px_[ix] * response_[ix][served[ix]].first;
    return total;
  }

  void search(int depth, const Rational& partial, std::vector<std::uint64_t>& served, std::uint64_t ways) {
    ++nodes_;
    const int sy = static_cast<int>(py_.size());
    const Rational rest = responses(served);
    if (have_best_ && partial + optimistic_[depth] + rest < solution_.value) return;
    if (depth == sy) {
      const Rational value = partial + rest;
      std::vector<Assortment> table;
      for (int c : current_) table.push_back(cx_[c].rep);
      if (!have_best_ || value > solution_.value) {
        have_best_ = true;
        solution_.value = value;
        solution_.count = ways;
        set_best(served);
      } else if (value == solution_.value) {
        solution_.count = saturating_add(solution_.count, ways);
        std::vector<Assortment> incumbent;
        for (int c : solution_.table_x) incumbent.push_back(cx_[c].rep);
        if (lex_less(table, incumbent)) set_best(served);
      }
      return;
    }
    for (const auto& g : groups_[depth]) {
      current_[depth] = g.cls;
      std::vector<std::uint64_t> saved = served;
      for (std::size_t ix = 0; ix < px_.size(); ++ix) {
        if ((g.buy >> ix) & 1U) served[ix] |= std::uint64_t{1} << depth;
      }
      search(depth + 1, partial + py_[depth] * g.revenue, served, saturating_mul(ways, g.multiplicity));
      served = std::move(saved);
    }
    current_[depth] = -1;
  }

  void set_best(const std::vector<std::uint64_t>& served) {
    solution_.table_x = current_;
    solution_.table_y.clear();
    for (std::size_t ix = 0; ix < px_.size(); ++ix) solution_.table_y.push_back(response_[ix][served[ix]].second);
  }

  int x_;
  int y_;
  const std::vector<Rational>& px_;
  const std::vector<Rational>& py_;
  const std::vector<AssortmentClass>& cx_;
  const std::vector<AssortmentClass>& cy_;
  const FeasibleFamily& family_;
  std::function<BuyerSet(int, int)> external_;

  std::vector<std::vector<Group>> groups_;
  std::vector<Rational> optimistic_;
  std::vector<std::vector<std::pair<Rational, int>>> response_;
  std::vector<int> current_;
  Solution solution_;
  bool have_best_ = false;
  std::uint64_t nodes_ = 0;
};

struct BuyerData {
  std::vector<RankedList> lists;
  std::vector<Rational> probs;
  std::vector<AssortmentClass> classes;
};

OracleResult solve_one(const AuctionInstance& instance, const BuyerData& b) {
  OracleResult r;
  r.mechanism.tables.resize(1);
  const bool may_serve = instance.family.contains(bit(0));
  int best = -1;
  for (std::size_t c = 0; c < b.classes.size(); ++c) {
    const auto& cls = b.classes[c];
    ++r.nodes;
    if (cls.buy != 0 && !may_serve) continue;
    if (best < 0 || cls.revenue > b.classes[best].revenue) {
      best = static_cast<int>(c);
      r.optimal_count = 1;
    } else if (cls.revenue == b.classes[best].revenue) {
      ++r.optimal_count;
      if (cls.rep < b.classes[best].rep) best = static_cast<int>(c);
    }
  }
  r.revenue = b.classes[best].revenue;
  r.mechanism.tables[0][{}] = b.classes[best].rep;
  return r;
}

OracleResult solve_two(const AuctionInstance& instance, const std::vector<BuyerData>& data) {
  TwoBuyerSolver solver(0, 1, data[0].probs, data[1].probs, data[0].classes, data[1].classes, instance.family,
                        [](int, int) { return BuyerSet{0}; });
  const auto s = solver.solve();
  OracleResult r;
  r.revenue = s.value;
  r.optimal_count = s.count;
  r.nodes = s.nodes;
  r.mechanism.tables.resize(2);
  for (std::size_t i1 = 0; i1 < data[1].lists.size(); ++i1) {
    r.mechanism.tables[0][{data[1].lists[i1]}] = data[0].classes[s.table_x[i1]].rep;
  }
  for (std::size_t i0 = 0; i0 < data[0].lists.size(); ++i0) {
    r.mechanism.tables[1][{data[0].lists[i0]}] = data[1].classes[s.table_y[i0]].rep;
  }
  return r;
}

/// Buyer 0's table over (l1, l2) by depth-first search; every leaf splits into
/// independent two-buyer problems, one per l0.
class ThreeBuyerSearch {
public:
  ThreeBuyerSearch(const AuctionInstance& instance, const std::vector<BuyerData>& data)
      : instance_(instance), d_(data) {}

  OracleResult run() {
    const int s1 = static_cast<int>(d_[1].lists.size());
    const int s2 = static_cast<int>(d_[2].lists.size());
    contexts_ = s1 * s2;
    if (contexts_ > 64) throw CapExceeded("too many first-buyer contexts");
    const bool may_serve = instance_.family.contains(bit(0));
    for (std::size_t c = 0; c < d_[0].classes.size(); ++c) {
      if (d_[0].classes[c].buy == 0 || may_serve) options_.push_back(static_cast<int>(c));
    }
    std::stable_sort(options_.begin(), options_.end(),
                     [&](int a, int b) { return d_[0].classes[a].revenue > d_[0].classes[b].revenue; });
    best_own_ = d_[0].classes[options_.front()].revenue;

    // Buyers 1 and 2 with nobody else served bound every leaf from above.
    const auto free = sub_problem(0).value;
    free_bound_ = free;

    table_.assign(contexts_, -1);
    search(0, Rational(0));

    OracleResult r;
    r.revenue = best_value_;
    r.optimal_count = count_;
    r.nodes = nodes_;
    r.mechanism.tables.resize(3);
    for (int i1 = 0; i1 < s1; ++i1) {
      for (int i2 = 0; i2 < s2; ++i2) {
        r.mechanism.tables[0][{d_[1].lists[i1], d_[2].lists[i2]}] = d_[0].classes[best_table_[i1 * s2 + i2]].rep;
      }
    }
    for (std::size_t i0 = 0; i0 < d_[0].lists.size(); ++i0) {
      const auto& sub = memo_.at(key_for(best_table_, static_cast<int>(i0)));
      for (int i2 = 0; i2 < s2; ++i2) {
        r.mechanism.tables[1][{d_[0].lists[i0], d_[2].lists[i2]}] = d_[1].classes[sub.table_x[i2]].rep;
      }
      for (int i1 = 0; i1 < s1; ++i1) {
        r.mechanism.tables[2][{d_[0].lists[i0], d_[1].lists[i1]}] = d_[2].classes[sub.table_y[i1]].rep;
      }
    }
    return r;
  }

private:
  /// Bit c set when buyer 0 with list i0 purchases in context c.
  std::uint64_t key_for(const std::vector<int>& table, int i0) const {
    std::uint64_t key = 0;
    for (int c = 0; c < contexts_; ++c) {
      if ((d_[0].classes[table[c]].buy >> i0) & 1U) key |= std::uint64_t{1} << c;
    }
    return key;
  }

  const TwoBuyerSolver::Solution& sub_problem(std::uint64_t key) {
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    const int s2 = static_cast<int>(d_[2].lists.size());
    // X = buyer 1 (table over l2), Y = buyer 2 (table over l1).
    TwoBuyerSolver solver(1, 2, d_[1].probs, d_[2].probs, d_[1].classes, d_[2].classes, instance_.family,
                          [key, s2](int i1, int i2) {
                            return ((key >> (i1 * s2 + i2)) & 1U) ? BuyerSet{1} : BuyerSet{0};
                          });
    auto solution = solver.solve();
    nodes_ += solution.nodes;
    return memo_.emplace(key, std::move(solution)).first->second;
  }

  Rational context_prob(int c) const {
    const int s2 = static_cast<int>(d_[2].lists.size());
    return d_[1].probs[c / s2] * d_[2].probs[c % s2];
  }

  void search(int depth, const Rational& partial) {
    ++nodes_;
    Rational optimistic = 0;
    for (int c = depth; c < contexts_; ++c) optimistic += context_prob(c) * best_own_;
    if (have_best_ && partial + optimistic + free_bound_ < best_value_) return;
    if (depth == contexts_) {
      Rational value = partial;
      for (std::size_t i0 = 0; i0 < d_[0].lists.size(); ++i0) {
        value += d_[0].probs[i0] * sub_problem(key_for(table_, static_cast<int>(i0))).value;
      }
      std::vector<Assortment> reps;
      for (int c : table_) reps.push_back(d_[0].classes[c].rep);
      if (!have_best_ || value > best_value_) {
        have_best_ = true;
        best_value_ = value;
        best_table_ = table_;
        count_ = 1;
      } else if (value == best_value_) {
        count_ = saturating_add(count_, 1);
        std::vector<Assortment> incumbent;
        for (int c : best_table_) incumbent.push_back(d_[0].classes[c].rep);
        if (lex_less(reps, incumbent)) best_table_ = table_;
      }
      return;
    }
    for (int c : options_) {
      table_[depth] = c;
      search(depth + 1, partial + context_prob(depth) * d_[0].classes[c].revenue);
    }
    table_[depth] = -1;
  }

  const AuctionInstance& instance_;
  const std::vector<BuyerData>& d_;
  int contexts_ = 0;
  std::vector<int> options_;
  Rational best_own_;
  Rational free_bound_;
  std::vector<int> table_;
  std::vector<int> best_table_;
  Rational best_value_;
  bool have_best_ = false;
  std::uint64_t count_ = 0;
  std::uint64_t nodes_ = 0;
  std::unordered_map<std::uint64_t, TwoBuyerSolver::Solution> memo_;
};

}  // namespace

OracleResult enumerate_optimal(const AuctionInstance& instance) {
  instance.validate();
  const int m = instance.num_buyers();
  if (m > kOracleMaxBuyers) throw CapExceeded("oracle handles at most " + std::to_string(kOracleMaxBuyers) + " buyers");
  if (instance.catalog.size() > kOracleMaxProducts) {
    throw CapExceeded("oracle handles at most " + std::to_string(kOracleMaxProducts) + " products");
  }
  std::vector<BuyerData> data;
  for (const auto& b : instance.buyers) {
    if (!b.distribution) throw std::invalid_argument("oracle needs every buyer's list support");
    const auto& support = b.distribution->support();
    if (static_cast<int>(support.size()) > kOracleMaxSupport) {
      throw CapExceeded("oracle handles supports of at most " + std::to_string(kOracleMaxSupport) + " lists");
    }
    BuyerData d;
    for (const auto& atom : support) {
      d.lists.push_back(atom.list);
      d.probs.push_back(atom.probability);
    }
    d.classes = assortment_classes(*b.distribution, instance.catalog);
    data.push_back(std::move(d));
  }

  switch (m) {
    case 0: {
      OracleResult r;
      r.revenue = 0;
      r.optimal_count = 1;
      return r;
    }
    case 1:
      return solve_one(instance, data[0]);
    case 2:
      return solve_two(instance, data);
    default:
      return ThreeBuyerSearch(instance, data).run();
  }
}

VerificationReport verify_mechanism(const AuctionInstance& instance, const TaxationMechanism& mech, std::uint64_t cap) {
  instance.validate();
  VerificationReport report;
  report.revenue = 0;
  for_each_profile(instance, cap, [&](const std::vector<RankedList>& profile, const Rational& p) {
    const auto out = allocate_tables(instance, mech, profile);
    report.revenue += p * out.revenue();
    report.purchasers.push_back(out.purchasers);
    if (!out.feasible) {
      report.feasible = false;
      report.infeasible_profiles.push_back(profile);
    }
  });
  return report;
}

IronedValuation ironed_virtual_valuations(const std::vector<Rational>& pmf, const ProductCatalog& catalog) {
  const int n = catalog.size();
  if (static_cast<int>(pmf.size()) != n + 1) throw std::invalid_argument("pmf needs one entry per price r_0..r_n");
  Rational total = 0;
  for (const auto& p : pmf) {
    if (sgn(p) < 0) throw std::invalid_argument("valuation probabilities must be non-negative");
    total += p;
  }
  if (total != 1) throw std::invalid_argument("valuation pmf must sum to 1");
  for (int j = 1; j <= n; ++j) {
    if (catalog.price(j) <= catalog.price(j - 1)) throw std::invalid_argument("prices must be distinct and increasing");
  }

  IronedValuation out;
  for (int j = 0; j <= n; ++j) out.prices.push_back(catalog.price(j));
  out.mass = pmf;
  std::vector<Rational> tail(static_cast<std::size_t>(n) + 2, Rational(0));
  for (int j = n; j >= 0; --j) tail[j] = tail[j + 1] + pmf[j];

  // Revenue-vs-quantile points, best revenue per quantile.
  std::map<Rational, Rational> points{{Rational(0), Rational(0)}};
  for (int j = 0; j <= n; ++j) {
    const Rational rev = out.prices[j] * tail[j];
    auto [it, inserted] = points.emplace(tail[j], rev);
    if (!inserted && rev > it->second) it->second = rev;
  }
  std::vector<std::pair<Rational, Rational>> hull;
  for (const auto& p : points) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const Rational cross = (b.first - a.first) * (p.second - a.second) - (b.second - a.second) * (p.first - a.first);
      if (sgn(cross) >= 0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(p);
  }

  out.phi.assign(static_cast<std::size_t>(n) + 1, std::nullopt);
  out.phi[0] = Rational(0);
  for (int j = 1; j <= n; ++j) {
    const Rational& qj = tail[j];
    if (sgn(qj) == 0) continue;
    // Left slope: the hull edge ending at or spanning q_j.
    for (std::size_t v = 1; v < hull.size(); ++v) {
      if (hull[v].first >= qj) {
        out.phi[j] = (hull[v].second - hull[v - 1].second) / (hull[v].first - hull[v - 1].first);
        break;
      }
    }
  }
  return out;
}

ClassicalOutcome classical_myerson(const std::vector<IronedValuation>& buyers, const FeasibleFamily& family,
                                   const std::vector<int>& valuation_index) {
  if (buyers.size() != valuation_index.size()) throw std::invalid_argument("one valuation per buyer is required");
  std::vector<ExtRational> values;
  for (std::size_t i = 0; i < buyers.size(); ++i) values.push_back(buyers[i].value(valuation_index[i]));
  ClassicalOutcome out;
  out.winners = virtual_surplus_winners(values, family).winners;
  out.payments.assign(buyers.size(), Rational(0));
  for (int i : set_members(out.winners)) {
    const auto threshold = win_threshold(i, values, family);
    for (std::size_t j = 0; j < buyers[i].prices.size(); ++j) {
      if (j < buyers[i].mass.size() && sgn(buyers[i].mass[j]) == 0) continue;
      if (threshold.admits(buyers[i].value(static_cast<int>(j)))) {
        out.payments[i] = buyers[i].prices[j];
        break;
      }
    }
  }
  return out;
}

}  // namespace aauction
