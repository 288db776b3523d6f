#include "assortment_auction/choice_model.hpp"

#include "assortment_auction/linear_solve.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <stdexcept>

namespace aauction {

// ---------------------------------------------------------------- NodeSet

NodeSet::NodeSet(std::initializer_list<int> nodes) {
  for (int node : nodes) *this = with(node);
}

NodeSet NodeSet::from_items(const std::vector<int>& nodes) {
  NodeSet s;
  for (int node : nodes) s = s.with(node);
  return s;
}

NodeSet NodeSet::products(int n) {
  if (n < 0 || n > kMaxProducts) throw std::invalid_argument("product count out of range");
  std::uint64_t bits = n == kMaxProducts ? ~std::uint64_t{0} : ((std::uint64_t{1} << (n + 1)) - 1);
  return NodeSet(bits & ~std::uint64_t{1});
}

std::vector<int> NodeSet::members() const {
  std::vector<int> out;
  for (std::uint64_t b = bits_; b != 0; b &= b - 1) out.push_back(std::countr_zero(b));
  return out;
}

// --------------------------------------------------------- ProductCatalog

ProductCatalog::ProductCatalog(std::vector<Rational> prices, std::vector<std::string> names)
    : prices_(std::move(prices)), names_(std::move(names)) {
  if (static_cast<int>(prices_.size()) > kMaxProducts) throw std::invalid_argument("too many products");
  for (const auto& p : prices_) {
    if (sgn(p) < 0) throw std::invalid_argument("product prices must be non-negative");
  }
  if (names_.empty()) {
    for (std::size_t k = 1; k <= prices_.size(); ++k) names_.push_back(std::to_string(k));
  }
  if (names_.size() != prices_.size()) throw std::invalid_argument("one name per product required");
  for (std::size_t a = 0; a < names_.size(); ++a) {
    if (names_[a].empty() || names_[a] == no_purchase_name_) {
      throw std::invalid_argument("product name '" + names_[a] + "' is reserved or empty");
    }
    for (std::size_t b = 0; b < a; ++b) {
      if (names_[a] == names_[b]) throw std::invalid_argument("duplicate product name '" + names_[a] + "'");
    }
  }
}

const Rational& ProductCatalog::price(ProductId j) const {
  if (j == kNoPurchase) return zero_;
  return prices_.at(static_cast<std::size_t>(j - 1));
}

const std::string& ProductCatalog::name(ProductId j) const {
  if (j == kNoPurchase) return no_purchase_name_;
  return names_.at(static_cast<std::size_t>(j - 1));
}

std::optional<ProductId> ProductCatalog::find(std::string_view name) const {
  if (name == no_purchase_name_) return kNoPurchase;
  for (std::size_t k = 0; k < names_.size(); ++k) {
    if (names_[k] == name) return static_cast<ProductId>(k + 1);
  }
  return std::nullopt;
}

std::string ProductCatalog::format(const Assortment& s) const {
  std::string out = "{";
  bool first = true;
  for (int j : s.members()) {
    if (!first) out += ",";
    out += name(j);
    first = false;
  }
  return out + "}";
}

// ------------------------------------------------------------- RankedList

RankedList::RankedList(std::vector<ProductId> ordering) : items_(std::move(ordering)) {
  for (ProductId j : items_) {
    if (j <= 0 || j > kMaxProducts) throw std::invalid_argument("ranked list holds an invalid product id");
    if (members_.contains(j)) throw std::invalid_argument("ranked list repeats a product");
    members_ = members_.with(j);
  }
}

std::size_t RankedList::rank(ProductId j) const {
  if (j == kNoPurchase) return items_.size() + 1;
  auto it = std::find(items_.begin(), items_.end(), j);
  return it == items_.end() ? kUnranked : static_cast<std::size_t>(it - items_.begin()) + 1;
}

std::string RankedList::format(const ProductCatalog& catalog) const {
  std::string out = "(";
  for (std::size_t k = 0; k < items_.size(); ++k) {
    if (k > 0) out += ",";
    out += catalog.name(items_[k]);
  }
  return out + ")";
}

ProductId choose(const RankedList& list, const Assortment& assortment) {
  for (ProductId j : list.items()) {
    if (j != kNoPurchase && assortment.contains(j)) return j;
  }
  return kNoPurchase;
}

std::vector<RankedList> all_lists(int n) {
  std::vector<RankedList> out;
  std::vector<ProductId> prefix;
  std::function<void(NodeSet)> extend = [&](NodeSet used) {
    out.emplace_back(prefix);
    for (int j = 1; j <= n; ++j) {
      if (used.contains(j)) continue;
      prefix.push_back(j);
      extend(used.with(j));
      prefix.pop_back();
    }
  };
  extend(NodeSet{});
  return out;
}

// ------------------------------------------------ ExplicitListDistribution

ExplicitListDistribution::ExplicitListDistribution(int num_products, std::vector<Atom> atoms)
    : num_products_(num_products) {
  if (num_products < 0 || num_products > kMaxProducts) throw std::invalid_argument("product count out of range");
  std::map<RankedList, Rational> merged;
  Rational total = 0;
  for (auto& atom : atoms) {
    if (sgn(atom.probability) <= 0) throw std::invalid_argument("list probabilities must be positive");
    for (ProductId j : atom.list.items()) {
      if (j > num_products) throw std::invalid_argument("list mentions a product outside the catalog");
    }
    total += atom.probability;
    merged[atom.list] += atom.probability;
  }
  if (total != 1) throw std::invalid_argument("list probabilities sum to " + to_string(total) + ", not 1");
  for (auto& [list, p] : merged) atoms_.push_back({list, p});
}

Rational ExplicitListDistribution::probability(const RankedList& list) const {
  auto it = std::lower_bound(atoms_.begin(), atoms_.end(), list,
                             [](const Atom& a, const RankedList& l) { return a.list < l; });
  if (it != atoms_.end() && it->list == list) return it->probability;
  return 0;
}

ChoiceStats choice_stats(const ExplicitListDistribution& dist, const ProductCatalog& catalog,
                         const Assortment& assortment) {
  if (assortment.contains(kNoPurchase) || !assortment.subset_of(catalog.all_products())) {
    throw std::invalid_argument("assortment must be a subset of products 1..n");
  }
  ChoiceStats stats;
  stats.choice_probability.assign(static_cast<std::size_t>(catalog.size()) + 1, Rational(0));
  for (const auto& atom : dist.support()) {
    ProductId j = choose(atom.list, assortment);
    stats.choice_probability[j] += atom.probability;
    if (j != kNoPurchase) {
      stats.sale_probability += atom.probability;
      stats.revenue += catalog.price(j) * atom.probability;
    }
  }
  return stats;
}

// -------------------------------------------------------- MarkovChainModel

MarkovChainModel::MarkovChainModel(std::vector<Rational> arrival, std::vector<std::vector<Rational>> transitions)
    : arrival_(std::move(arrival)), transitions_(std::move(transitions)) {
  if (arrival_.empty()) throw std::invalid_argument("arrival vector must include node 0");
  const int n = num_products();
  if (n > kMaxProducts) throw std::invalid_argument("too many products");
  if (static_cast<int>(transitions_.size()) != n + 1) throw std::invalid_argument("need one transition row per node");
  if (!transitions_[0].empty()) throw std::invalid_argument("node 0 is terminal and has no outgoing row");

  Rational total = 0;
  for (const auto& p : arrival_) {
    if (sgn(p) < 0) throw std::invalid_argument("arrival probabilities must be non-negative");
    total += p;
  }
  if (total != 1) throw std::invalid_argument("arrival probabilities sum to " + to_string(total) + ", not 1");

  for (int j = 1; j <= n; ++j) {
    const auto& row = transitions_[j];
    if (static_cast<int>(row.size()) != n + 1) throw std::invalid_argument("transition row has the wrong length");
    Rational row_total = 0;
    for (const auto& p : row) {
      if (sgn(p) < 0) throw std::invalid_argument("transition probabilities must be non-negative");
      row_total += p;
    }
    if (row_total != 1) {
      throw std::invalid_argument("transition row " + std::to_string(j) + " sums to " + to_string(row_total));
    }
  }

  // Every product must reach node 0 along positive transitions.
  NodeSet reaches_zero{kNoPurchase};
  for (bool grew = true; grew;) {
    grew = false;
    for (int j = 1; j <= n; ++j) {
      if (reaches_zero.contains(j)) continue;
      for (int k = 0; k <= n; ++k) {
        if (sgn(transitions_[j][k]) > 0 && reaches_zero.contains(k)) {
          reaches_zero = reaches_zero.with(j);
          grew = true;
          break;
        }
      }
    }
  }
  for (int j = 1; j <= n; ++j) {
    if (!reaches_zero.contains(j)) {
      throw std::invalid_argument("node " + std::to_string(j) + " cannot reach the terminal node");
    }
  }
}

std::vector<Rational> hit_vector(const MarkovChainModel& model, int target, NodeSet avoid) {
  const int n = model.num_products();
  if (target < 0 || target > n) throw std::invalid_argument("hit target out of range");
  if (avoid.contains(target)) throw std::invalid_argument("hit target may not be in the avoided set");
  if (!avoid.subset_of(NodeSet::products(n).with_no_purchase())) throw std::invalid_argument("avoided set out of range");

  std::vector<Rational> h(static_cast<std::size_t>(n) + 1, Rational(0));
  h[target] = 1;

  std::vector<int> unknowns;
  std::vector<int> slot(static_cast<std::size_t>(n) + 1, -1);
  for (int x = 1; x <= n; ++x) {
    if (x == target || avoid.contains(x)) continue;
    slot[x] = static_cast<int>(unknowns.size());
    unknowns.push_back(x);
  }
  if (unknowns.empty()) return h;

  const std::size_t dim = unknowns.size();
  ExactSystem system;
  system.matrix.assign(dim, std::vector<Rational>(dim, Rational(0)));
  system.rhs.assign(dim, Rational(0));
  for (std::size_t r = 0; r < dim; ++r) {
    const int x = unknowns[r];
    system.matrix[r][r] = 1;
    for (std::size_t c = 0; c < dim; ++c) system.matrix[r][c] -= model.transition(x, unknowns[c]);
    system.rhs[r] = model.transition(x, target);
  }

  std::vector<Rational> solution;
  try {
    solution = solve_exact(std::move(system));
  } catch (const std::domain_error&) {
    throw std::logic_error("hitting-probability system is singular; chain does not terminate");
  }
  for (std::size_t r = 0; r < dim; ++r) h[unknowns[r]] = solution[r];
  return h;
}

Rational hit_probability(const MarkovChainModel& model, Start start, int target, NodeSet avoid) {
  if (start.node) {
    const int s = *start.node;
    if (s < 0 || s > model.num_products()) throw std::invalid_argument("start node out of range");
    if (s == target || avoid.contains(s)) throw std::invalid_argument("start node must lie outside target and avoided set");
  }
  const auto h = hit_vector(model, target, avoid);
  if (start.node) return h[*start.node];

  Rational total = 0;
  for (int x = 0; x <= model.num_products(); ++x) {
    if (avoid.contains(x)) continue;
    total += model.arrival(x) * h[x];
  }
  return total;
}

Rational ordered_hit_probability(const MarkovChainModel& model, Start start, int first, int then, NodeSet avoid) {
  if (first == kNoPurchase) throw std::invalid_argument("the first node of an ordered hit must be a product");
  if (first == then || avoid.contains(first) || avoid.contains(then)) {
    throw std::invalid_argument("ordered hit nodes must be pairwise disjoint");
  }
  Rational reach_first = hit_probability(model, start, first, avoid.with(then));
  if (sgn(reach_first) == 0) return reach_first;
  return reach_first * hit_probability(model, Start::at(first), then, avoid);
}

Rational list_probability(const MarkovChainModel& model, const RankedList& list) {
  const int n = model.num_products();
  if (list.empty()) return model.arrival(kNoPurchase);
  for (ProductId j : list.items()) {
    if (j > n) return 0;
  }

  const NodeSet all = NodeSet::products(n).with_no_purchase();
  Rational p = model.arrival(list.items().front());
  NodeSet visited{list.items().front()};
  for (std::size_t t = 1; t < list.size() && sgn(p) != 0; ++t) {
    const int next = list.items()[t];
    NodeSet others = all.minus(visited).without(next);
    p *= hit_probability(model, Start::at(list.items()[t - 1]), next, others);
    visited = visited.with(next);
  }
  if (sgn(p) == 0) return p;
  NodeSet unvisited = all.minus(visited).without(kNoPurchase);
  return p * hit_probability(model, Start::at(list.items().back()), kNoPurchase, unvisited);
}

ExplicitListDistribution enumerate_support(const MarkovChainModel& model, int cap) {
  const int n = model.num_products();
  if (n > cap) {
    throw CapExceeded("support enumeration limited to " + std::to_string(cap) + " products, chain has " +
                      std::to_string(n));
  }
  const NodeSet products = NodeSet::products(n);
  std::vector<ExplicitListDistribution::Atom> atoms;
  if (sgn(model.arrival(kNoPurchase)) > 0) atoms.push_back({RankedList{}, model.arrival(kNoPurchase)});

  std::vector<ProductId> prefix;
  std::function<void(const Rational&, NodeSet)> grow = [&](const Rational& mass, NodeSet visited) {
    const int last = prefix.back();
    const NodeSet unvisited = products.minus(visited);
    Rational stop = hit_probability(model, Start::at(last), kNoPurchase, unvisited);
    if (sgn(stop) > 0) atoms.push_back({RankedList(prefix), mass * stop});
    for (int j : unvisited.members()) {
      Rational step = hit_probability(model, Start::at(last), j, unvisited.without(j).with_no_purchase());
      if (sgn(step) == 0) continue;
      prefix.push_back(j);
      grow(mass * step, visited.with(j));
      prefix.pop_back();
    }
  };
  for (int j = 1; j <= n; ++j) {
    if (sgn(model.arrival(j)) == 0) continue;
    prefix.push_back(j);
    grow(model.arrival(j), NodeSet{j});
    prefix.pop_back();
  }
  return ExplicitListDistribution(n, std::move(atoms));
}

MarkovChainModel from_mnl(const std::vector<Rational>& weights) {
  if (weights.empty()) throw std::invalid_argument("MNL needs at least the no-purchase weight");
  Rational total = 0;
  for (const auto& w : weights) {
    if (sgn(w) <= 0) throw std::invalid_argument("MNL weights must be positive");
    total += w;
  }
  const int n = static_cast<int>(weights.size()) - 1;
  std::vector<Rational> arrival;
  for (const auto& w : weights) arrival.push_back(w / total);
  std::vector<std::vector<Rational>> rows(static_cast<std::size_t>(n) + 1);
  for (int j = 1; j <= n; ++j) {
    const Rational rest = total - weights[j];
    rows[j].assign(static_cast<std::size_t>(n) + 1, Rational(0));
    for (int k = 0; k <= n; ++k) {
      if (k != j) rows[j][k] = weights[k] / rest;
    }
  }
  return MarkovChainModel(std::move(arrival), std::move(rows));
}

MarkovChainModel from_buydown(const std::vector<Rational>& pmf, const ProductCatalog& catalog) {
  const int n = catalog.size();
  if (static_cast<int>(pmf.size()) != n + 1) throw std::invalid_argument("buy-down pmf needs one entry per price r_0..r_n");
  for (int j = 1; j <= n; ++j) {
    if (catalog.price(j) <= catalog.price(j - 1)) {
      throw std::invalid_argument("buy-down preferences need strictly increasing prices above r_0 = 0");
    }
  }
  Rational total = 0;
  for (const auto& p : pmf) {
    if (sgn(p) < 0) throw std::invalid_argument("valuation probabilities must be non-negative");
    total += p;
  }
  if (total != 1) throw std::invalid_argument("valuation pmf sums to " + to_string(total) + ", not 1");

  // tail[j] = P[v >= r_j]
  std::vector<Rational> tail(static_cast<std::size_t>(n) + 2, Rational(0));
  for (int j = n; j >= 0; --j) tail[j] = tail[j + 1] + pmf[j];

  std::vector<Rational> arrival(static_cast<std::size_t>(n) + 1, Rational(0));
  arrival[0] = pmf[0];
  if (n >= 1) arrival[1] = tail[1];

  std::vector<std::vector<Rational>> rows(static_cast<std::size_t>(n) + 1);
  for (int j = 1; j <= n; ++j) {
    rows[j].assign(static_cast<std::size_t>(n) + 1, Rational(0));
    if (sgn(tail[j]) == 0) {
      rows[j][0] = 1;  // unreachable node; end the walk here
      continue;
    }
    rows[j][0] = pmf[j] / tail[j];
    if (j < n) rows[j][j + 1] = tail[j + 1] / tail[j];
  }
  return MarkovChainModel(std::move(arrival), std::move(rows));
}

namespace {

int draw(const std::vector<double>& weights, std::mt19937_64& rng) {
  std::discrete_distribution<int> pick(weights.begin(), weights.end());
  return pick(rng);
}

}  // namespace

RankedList sample_list(const MarkovChainModel& model, std::mt19937_64& rng) {
  const int n = model.num_products();
  std::vector<double> weights(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) weights[k] = model.arrival(k).get_d();
  int node = draw(weights, rng);

  std::vector<ProductId> items;
  NodeSet seen;
  while (node != kNoPurchase) {
    if (!seen.contains(node)) {
      items.push_back(node);
      seen = seen.with(node);
    }
    for (int k = 0; k <= n; ++k) weights[k] = model.transition(node, k).get_d();
    node = draw(weights, rng);
  }
  return RankedList(std::move(items));
}

}  // namespace aauction
