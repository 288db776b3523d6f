#include "assortment_auction/frontier_vvm.hpp"

#include "assortment_auction/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace aauction {

// ------------------------------------------------------------ procedure

Assortment EfficiencySequence::assortment(int k) const {
  if (k < 0 || k > size()) throw std::out_of_range("no such iteration");
  return k == 0 ? Assortment{} : steps[k - 1].assortment;
}

const Rational& EfficiencySequence::adjusted_price(int k, ProductId j) const {
  if (k < 0 || k > size()) throw std::out_of_range("no such iteration");
  if (assortment(k).contains(j)) throw std::invalid_argument("adjusted price is only tracked outside S^(k)");
  return k == 0 ? initial_prices.at(j) : steps[k - 1].adjusted_prices.at(j);
}

EfficiencySequence run_procedure(const MarkovChainModel& model, const ProductCatalog& catalog) {
  const int n = model.num_products();
  if (catalog.size() != n) throw std::invalid_argument("catalog and chain disagree on the number of products");

  EfficiencySequence seq;
  std::vector<Rational> prices(static_cast<std::size_t>(n) + 1);
  for (int j = 0; j <= n; ++j) prices[j] = catalog.price(j);
  seq.initial_prices = prices;

  const NodeSet products = NodeSet::products(n);
  Assortment selected;
  std::vector<int> death(static_cast<std::size_t>(n) + 1, 0);

  for (int k = 1;; ++k) {
    const auto reach = hit_vector(model, kNoPurchase, selected);

    std::vector<CandidateEvaluation> candidates;
    std::optional<std::size_t> best;
    for (int j : products.minus(selected).members()) {
      CandidateEvaluation c{j, prices[j], reach[j], std::nullopt};
      if (sgn(reach[j]) != 0) {
        c.efficiency = prices[j] / reach[j];
        if (!best || *c.efficiency > *candidates[*best].efficiency) best = candidates.size();
      } else if (death[j] == 0) {
        death[j] = k - 1;
      }
      candidates.push_back(std::move(c));
    }
    if (!best) {
      seq.final_candidates = std::move(candidates);
      break;
    }

    const ProductId chosen = candidates[*best].product;
    const Rational value = *candidates[*best].efficiency;
    const Rational reach_chosen = candidates[*best].reach_no_purchase;

    // r_j -= r_s * P_j[s before S_+]
    const auto cannibal = hit_vector(model, chosen, selected.with_no_purchase());
    const Rational chosen_price = prices[chosen];
    for (int j : products.minus(selected).without(chosen).members()) prices[j] -= chosen_price * cannibal[j];
    selected = selected.with(chosen);

    seq.steps.push_back(ProcedureStep{k, chosen, selected, value, reach_chosen, std::move(candidates), prices});
  }

  for (int j : products.minus(selected).members()) {
    seq.dead_products.push_back(DeadProduct{j, prices[j], death[j]});
  }
  return seq;
}

// ------------------------------------------------------------------ VVM

VirtualValuationMapping VirtualValuationMapping::from_sequence(const EfficiencySequence& seq) {
  VirtualValuationMapping vvm;
  for (const auto& step : seq.steps) {
    vvm.sequence_.emplace_back(step.product, step.value);
    vvm.menu_.push_back(MenuEntry{step.value, step.assortment});
  }
  return vvm;
}

VirtualValuationMapping VirtualValuationMapping::from_table(std::map<RankedList, ExtRational> values,
                                                            std::vector<MenuEntry> menu) {
  VirtualValuationMapping vvm;
  vvm.table_ = std::move(values);
  vvm.menu_ = std::move(menu);
  for (std::size_t k = 1; k < vvm.menu_.size(); ++k) {
    if (vvm.menu_[k].value > vvm.menu_[k - 1].value) {
      throw std::invalid_argument("menu entries must be ordered from the highest value down");
    }
  }
  return vvm;
}

ExtRational VirtualValuationMapping::value(const RankedList& list) const {
  if (list.empty()) return ExtRational::neg_inf();
  if (!sequence_.empty()) {
    for (const auto& [product, v] : sequence_) {
      if (list.contains(product)) return v;
    }
    return ExtRational::neg_inf();
  }
  auto it = table_.find(list);
  return it == table_.end() ? ExtRational::neg_inf() : it->second;
}

Assortment VirtualValuationMapping::threshold_assortment(const ExtRational& threshold, bool inclusive) const {
  Assortment out;
  for (const auto& entry : menu_) {
    const ExtRational v(entry.value);
    if (inclusive ? v >= threshold : v > threshold) out = entry.assortment;
  }
  return out;
}

// ------------------------------------------------------------- frontier

namespace {

void check_cap(const ExplicitListDistribution& dist, const ProductCatalog& catalog, int cap) {
  if (dist.num_products() != catalog.size()) {
    throw std::invalid_argument("distribution and catalog disagree on the number of products");
  }
  if (catalog.size() > cap) {
    throw CapExceeded("assortment enumeration limited to " + std::to_string(cap) + " products, instance has " +
                      std::to_string(catalog.size()));
  }
}

/// Per-assortment data over the support: who buys, and the revenue.
struct AssortmentScan {
  using Bits = std::vector<std::uint64_t>;
  std::vector<Bits> buyers;  // bit t set when support list t purchases
  std::vector<Rational> revenue;
  std::vector<Rational> sales;
};

AssortmentScan scan_assortments(const ExplicitListDistribution& dist, const ProductCatalog& catalog) {
  const int n = catalog.size();
  const auto& support = dist.support();
  const std::size_t count = std::size_t{1} << n;
  AssortmentScan scan;
  scan.buyers.assign(count, AssortmentScan::Bits((support.size() + 63) / 64, 0));
  scan.revenue.assign(count, Rational(0));
  scan.sales.assign(count, Rational(0));
  for (std::size_t mask = 0; mask < count; ++mask) {
    const Assortment s(static_cast<std::uint64_t>(mask) << 1);
    for (std::size_t t = 0; t < support.size(); ++t) {
      const ProductId j = choose(support[t].list, s);
      if (j == kNoPurchase) continue;
      scan.buyers[mask][t / 64] |= std::uint64_t{1} << (t % 64);
      scan.revenue[mask] += catalog.price(j) * support[t].probability;
      scan.sales[mask] += support[t].probability;
    }
  }
  return scan;
}

Assortment from_mask(std::size_t mask) { return Assortment(static_cast<std::uint64_t>(mask) << 1); }

/// Preference among equivalent assortments: extend `previous` when possible,
/// then fewest products, then lowest ids.
bool preferred(const Assortment& a, const Assortment& b, const std::optional<Assortment>& previous) {
  if (previous) {
    const bool ea = previous->subset_of(a);
    const bool eb = previous->subset_of(b);
    if (ea != eb) return ea;
  }
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

}  // namespace

RevenueFrontier brute_force_frontier(const ExplicitListDistribution& dist, const ProductCatalog& catalog, int cap) {
  check_cap(dist, catalog, cap);
  const auto scan = scan_assortments(dist, catalog);
  const std::size_t count = scan.revenue.size();

  // Best revenue per distinct sale probability.
  std::map<Rational, Rational> best;
  for (std::size_t mask = 0; mask < count; ++mask) {
    auto [it, inserted] = best.emplace(scan.sales[mask], scan.revenue[mask]);
    if (!inserted && scan.revenue[mask] > it->second) it->second = scan.revenue[mask];
  }

  // Monotone-chain upper hull; collinear points are dropped.
  std::vector<std::pair<Rational, Rational>> hull;
  for (const auto& point : best) {
    while (hull.size() >= 2) {
      const auto& a = hull[hull.size() - 2];
      const auto& b = hull.back();
      const Rational cross = (b.first - a.first) * (point.second - a.second) -
                             (b.second - a.second) * (point.first - a.first);
      if (sgn(cross) >= 0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(point);
  }

  RevenueFrontier frontier;
  std::optional<Assortment> previous;
  for (std::size_t v = 0; v < hull.size(); ++v) {
    FrontierVertex vertex;
    vertex.sale_probability = hull[v].first;
    vertex.revenue = hull[v].second;
    for (std::size_t mask = 0; mask < count; ++mask) {
      if (scan.sales[mask] == vertex.sale_probability && scan.revenue[mask] == vertex.revenue) {
        vertex.attaining.push_back(from_mask(mask));
      }
    }
    vertex.canonical = vertex.attaining.front();
    for (const auto& s : vertex.attaining) {
      if (preferred(s, vertex.canonical, previous)) vertex.canonical = s;
    }
    if (v > 0) {
      vertex.left_slope = (hull[v].second - hull[v - 1].second) / (hull[v].first - hull[v - 1].first);
    }
    previous = vertex.canonical;
    frontier.vertices.push_back(std::move(vertex));
  }
  return frontier;
}

VirtualValuationMapping vvm_from_frontier(const RevenueFrontier& frontier, const ExplicitListDistribution& dist) {
  std::map<RankedList, ExtRational> values;
  std::vector<MenuEntry> menu;
  for (std::size_t v = 1; v < frontier.vertices.size(); ++v) {
    menu.push_back(MenuEntry{*frontier.vertices[v].left_slope, frontier.vertices[v].canonical});
  }
  for (const auto& atom : dist.support()) {
    if (atom.list.empty()) continue;
    for (const auto& entry : menu) {
      if (choose(atom.list, entry.assortment) != kNoPurchase) {
        values.emplace(atom.list, ExtRational(entry.value));
        break;
      }
    }
  }
  return VirtualValuationMapping::from_table(std::move(values), std::move(menu));
}

ExtRational integrated_value(const VirtualValuationMapping& vvm, const ExplicitListDistribution& dist,
                             const Assortment& s) {
  Rational total = 0;
  for (const auto& atom : dist.support()) {
    if (choose(atom.list, s) == kNoPurchase) continue;
    const ExtRational v = vvm.value(atom.list);
    if (!v.is_finite()) return v;
    total += v.value() * atom.probability;
  }
  return ExtRational(total);
}

ImplementabilityReport check_implementability(const VirtualValuationMapping& vvm, const ExplicitListDistribution& dist,
                                              const ProductCatalog& catalog, int cap) {
  check_cap(dist, catalog, cap);
  const auto scan = scan_assortments(dist, catalog);
  const auto& support = dist.support();

  std::vector<ExtRational> values;
  std::vector<Rational> thresholds;
  for (const auto& atom : support) {
    values.push_back(vvm.value(atom.list));
    if (values.back().is_finite()) thresholds.push_back(values.back().value());
  }
  std::sort(thresholds.begin(), thresholds.end(), [](const Rational& a, const Rational& b) { return a > b; });
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());

  ImplementabilityReport report;
  ThresholdCheck sentinel;
  sentinel.threshold = ExtRational::pos_inf();
  sentinel.witness = Assortment{};
  sentinel.integrated = ExtRational(Rational(0));
  sentinel.revenue = 0;
  report.thresholds.push_back(sentinel);

  std::optional<Assortment> previous = Assortment{};
  for (const auto& w : thresholds) {
    ThresholdCheck check;
    check.threshold = ExtRational(w);
    AssortmentScan::Bits target((support.size() + 63) / 64, 0);
    Rational integrated = 0;
    for (std::size_t t = 0; t < support.size(); ++t) {
      if (values[t] >= check.threshold) {
        target[t / 64] |= std::uint64_t{1} << (t % 64);
        check.target.push_back(support[t].list);
        integrated += values[t].value() * support[t].probability;
      }
    }
    check.integrated = ExtRational(integrated);

    std::optional<Assortment> valid;
    std::optional<Assortment> matching;
    for (std::size_t mask = 0; mask < scan.buyers.size(); ++mask) {
      if (scan.buyers[mask] != target) continue;
      const Assortment s = from_mask(mask);
      if (!matching || preferred(s, *matching, previous)) matching = s;
      if (integrated <= scan.revenue[mask] && (!valid || preferred(s, *valid, previous))) valid = s;
    }

    if (valid) {
      check.witness = valid;
    } else if (matching) {
      check.witness = matching;
      check.failure = ThresholdCheck::Failure::InequalityFails;
    } else {
      check.failure = ThresholdCheck::Failure::NoMatchingAssortment;
    }
    if (check.witness) {
      check.revenue = scan.revenue[check.witness->bits() >> 1];
      previous = check.witness;
    }
    if (check.failure != ThresholdCheck::Failure::None) report.implementable = false;
    report.thresholds.push_back(std::move(check));
  }
  return report;
}

InsurmountabilityReport check_insurmountability(const VirtualValuationMapping& vvm, const ExplicitListDistribution& dist,
                                                const ProductCatalog& catalog, int cap) {
  check_cap(dist, catalog, cap);
  InsurmountabilityReport report;
  const std::size_t count = std::size_t{1} << catalog.size();
  for (std::size_t mask = 0; mask < count; ++mask) {
    const Assortment s = from_mask(mask);
    const ExtRational lhs = integrated_value(vvm, dist, s);
    const Rational revenue = choice_stats(dist, catalog, s).revenue;
    if (lhs < ExtRational(revenue)) {
      report.insurmountable = false;
      report.violations.push_back({s, lhs, revenue});
    }
  }
  return report;
}

VirtualValuationMapping vvm_from_values(std::map<RankedList, ExtRational> values, const ExplicitListDistribution& dist,
                                        const ProductCatalog& catalog, int cap) {
  auto bare = VirtualValuationMapping::from_table(values, {});
  const auto report = check_implementability(bare, dist, catalog, cap);
  std::vector<MenuEntry> menu;
  for (const auto& check : report.thresholds) {
    if (!check.threshold.is_finite() || !check.witness) continue;
    menu.push_back(MenuEntry{check.threshold.value(), *check.witness});
  }
  return VirtualValuationMapping::from_table(std::move(values), std::move(menu));
}

}  // namespace aauction
