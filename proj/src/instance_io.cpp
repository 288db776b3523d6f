#include "assortment_auction/instance_io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace aauction {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw InputError(where + ": " + what); }

Rational number(const json& v, const std::string& where) {
  if (v.is_string()) {
    try {
      return parse_rational(v.get<std::string>());
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    }
  }
  if (v.is_number_integer()) return Rational(v.get<long>());
  fail(where, "expected an exact number written as a string (\"7/2\", \"7.5\") or an integer");
}

ExtRational ext_number(const json& v, const std::string& where) {
  if (v.is_string() && v.get<std::string>() == "-inf") return ExtRational::neg_inf();
  return ExtRational(number(v, where));
}

ProductId node_ref(const std::string& key, const ProductCatalog& catalog, const std::string& where) {
  if (key == "0") return kNoPurchase;
  if (auto id = catalog.find(key)) return *id;
  fail(where, "unknown product '" + key + "'");
}

ProductId node_ref(const json& v, const ProductCatalog& catalog, const std::string& where) {
  if (v.is_number_integer()) {
    const long id = v.get<long>();
    if (id < 0 || id > catalog.size()) fail(where, "product id out of range");
    return static_cast<ProductId>(id);
  }
  if (v.is_string()) return node_ref(v.get<std::string>(), catalog, where);
  fail(where, "expected a product name or id");
}

const json& require(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) fail(where, std::string("missing \"") + key + "\"");
  return obj.at(key);
}

ProductCatalog read_catalog(const json& doc) {
  // "catalog" is accepted as another name for the block.
  const char* key = doc.is_object() && !doc.contains("products") && doc.contains("catalog") ? "catalog" : "products";
  const auto& products = require(doc, key, "instance");
  if (!products.is_array()) fail("products", "expected an array");
  std::vector<Rational> prices;
  std::vector<std::string> names;
  bool any_name = false;
  for (std::size_t k = 0; k < products.size(); ++k) {
    const std::string where = "products[" + std::to_string(k) + "]";
    const auto& p = products[k];
    prices.push_back(number(require(p, "price", where), where + ".price"));
    if (p.contains("name")) {
      any_name = true;
      names.push_back(p.at("name").get<std::string>());
    } else {
      names.push_back(std::to_string(k + 1));
    }
  }
  if (!any_name) names.clear();
  try {
    return ProductCatalog(prices, names);
  } catch (const std::invalid_argument& e) {
    fail("products", e.what());
  }
}

RankedList list_value(const json& v, const ProductCatalog& catalog, const std::string& where) {
  if (v.is_string()) return parse_list(v.get<std::string>(), catalog);
  if (!v.is_array()) fail(where, "expected a list of products");
  std::vector<ProductId> items;
  for (const auto& item : v) {
    const ProductId j = node_ref(item, catalog, where);
    if (j == kNoPurchase) fail(where, "lists hold products only");
    items.push_back(j);
  }
  try {
    return RankedList(items);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

/// Node-indexed vector from {"name": prob}; absent entries are 0.
std::vector<Rational> node_vector(const json& obj, const ProductCatalog& catalog, const std::string& where) {
  if (!obj.is_object()) fail(where, "expected an object keyed by product name");
  std::vector<Rational> out(static_cast<std::size_t>(catalog.size()) + 1, Rational(0));
  for (const auto& [key, value] : obj.items()) {
    out[node_ref(key, catalog, where)] = number(value, where + "." + key);
  }
  return out;
}

MarkovChainModel read_markov(const json& b, const ProductCatalog& catalog, const std::string& where) {
  const int n = catalog.size();
  auto arrival = node_vector(require(b, "arrival", where), catalog, where + ".arrival");
  std::vector<std::vector<Rational>> rows(static_cast<std::size_t>(n) + 1);
  const auto& transitions = require(b, "transitions", where);
  if (!transitions.is_object()) fail(where + ".transitions", "expected an object of rows");
  for (int j = 1; j <= n; ++j) {
    rows[j].assign(static_cast<std::size_t>(n) + 1, Rational(0));
    rows[j][0] = 1;  // rows left out end the walk
  }
  for (const auto& [key, row] : transitions.items()) {
    const ProductId from = node_ref(key, catalog, where + ".transitions");
    if (from == kNoPurchase) fail(where + ".transitions", "node 0 is terminal and has no row");
    rows[from] = node_vector(row, catalog, where + ".transitions." + key);
  }
  try {
    return MarkovChainModel(arrival, rows);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

ExplicitListDistribution read_explicit(const json& b, const ProductCatalog& catalog, const std::string& where) {
  const auto& lists = require(b, "lists", where);
  if (!lists.is_array()) fail(where + ".lists", "expected an array");
  std::vector<ExplicitListDistribution::Atom> atoms;
  for (std::size_t k = 0; k < lists.size(); ++k) {
    const std::string w = where + ".lists[" + std::to_string(k) + "]";
    const auto& entry = lists[k];
    const json& p = entry.contains("p") ? entry.at("p") : require(entry, "probability", w);
    atoms.push_back({list_value(require(entry, "list", w), catalog, w), number(p, w + ".p")});
  }
  try {
    return ExplicitListDistribution(catalog.size(), atoms);
  } catch (const std::invalid_argument& e) {
    fail(where, e.what());
  }
}

FeasibleFamily read_family(const json& doc, int buyers) {
  if (!doc.contains("family")) return FeasibleFamily::single_winner(buyers);
  const auto& f = doc.at("family");
  try {
    if (f.is_string()) {
      if (f.get<std::string>() == "single_winner") return FeasibleFamily::single_winner(buyers);
      fail("family", "unknown family '" + f.get<std::string>() + "'");
    }
    if (f.is_object() && f.contains("single_winner")) return FeasibleFamily::single_winner(buyers);
    if (f.is_object() && f.contains("cardinality")) {
      const auto& b = f.at("cardinality");
      if (!b.is_number_integer()) fail("family", "cardinality bound must be an integer");
      return FeasibleFamily::cardinality(buyers, b.get<int>());
    }
    if (f.is_object() && f.contains("explicit")) {
      std::vector<std::vector<int>> sets;
      for (const auto& s : f.at("explicit")) {
        std::vector<int> members;
        for (const auto& id : s) members.push_back(id.get<int>() - 1);
        sets.push_back(members);
      }
      return FeasibleFamily::explicit_sets(buyers, sets);
    }
  } catch (const InputError&) {
    throw;
  } catch (const std::exception& e) {
    fail("family", e.what());
  }
  fail("family", "expected \"single_winner\", {\"cardinality\": b} or {\"explicit\": [[ids]]}");
}

void attach_chain(LoadedBuyer& out, MarkovChainModel chain, const ProductCatalog& catalog, int support_cap) {
  out.vvm = vvm_from_sequence(run_procedure(chain, catalog));
  out.vvm_source = "procedure";
  if (chain.num_products() <= support_cap) out.distribution = enumerate_support(chain, support_cap);
  out.chain = std::move(chain);
}

LoadedBuyer read_buyer(const json& b, const ProductCatalog& catalog, int support_cap, const std::string& where) {
  LoadedBuyer out;
  out.type = require(b, "type", where).get<std::string>();
  out.vvm_source = "none";
  if (out.type == "markov") {
    attach_chain(out, read_markov(b, catalog, where), catalog, support_cap);
  } else if (out.type == "mnl") {
    auto weights = node_vector(require(b, "weights", where), catalog, where + ".weights");
    try {
      attach_chain(out, from_mnl(weights), catalog, support_cap);
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    }
  } else if (out.type == "buydown") {
    auto pmf = node_vector(require(b, "pmf", where), catalog, where + ".pmf");
    try {
      attach_chain(out, from_buydown(pmf, catalog), catalog, support_cap);
    } catch (const std::invalid_argument& e) {
      fail(where, e.what());
    }
    out.valuation_pmf = pmf;
  } else if (out.type == "explicit") {
    out.distribution = read_explicit(b, catalog, where);
    if (b.contains("vvm")) {
      const auto& v = b.at("vvm");
      if (v.is_string() && v.get<std::string>() == "frontier") {
        out.vvm = vvm_from_frontier(brute_force_frontier(*out.distribution, catalog), *out.distribution);
        out.vvm_source = "frontier";
      } else if (v.is_object() && v.contains("values")) {
        std::map<RankedList, ExtRational> values;
        for (const auto& [key, value] : v.at("values").items()) {
          values[parse_list(key, catalog)] = ext_number(value, where + ".vvm." + key);
        }
        out.vvm = vvm_from_values(values, *out.distribution, catalog);
        out.vvm_source = "values";
      } else {
        fail(where + ".vvm", "expected \"frontier\" or {\"values\": {\"(B,A)\": \"4\", ...}}");
      }
    }
  } else {
    fail(where, "unknown buyer type '" + out.type + "'");
  }
  return out;
}

}  // namespace

AuctionInstance LoadedInstance::auction() const {
  AuctionInstance a;
  a.catalog = catalog;
  a.family = family;
  for (std::size_t i = 0; i < buyers.size(); ++i) {
    const auto& lb = buyers[i];
    if (!lb.vvm) {
      throw InputError("buyer " + std::to_string(i + 1) + " is explicit and has no \"vvm\" block");
    }
    Buyer b;
    b.label = std::to_string(i + 1);
    b.chain = lb.chain;
    b.distribution = lb.distribution;
    b.vvm = *lb.vvm;
    a.buyers.push_back(std::move(b));
  }
  a.validate();
  return a;
}

LoadedInstance parse_instance(const std::string& json_text, int support_cap) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  LoadedInstance inst;
  inst.catalog = read_catalog(doc);
  if (doc.contains("buyers")) {
    const auto& buyers = doc.at("buyers");
    if (!buyers.is_array()) fail("buyers", "expected an array");
    for (std::size_t k = 0; k < buyers.size(); ++k) {
      const std::string where = "buyers[" + std::to_string(k) + "]";
      const LoadedBuyer b = read_buyer(buyers[k], inst.catalog, support_cap, where);
      int copies = 1;
      if (buyers[k].contains("copies")) {
        copies = buyers[k].at("copies").get<int>();
        if (copies < 1) fail(where, "copies must be positive");
      }
      for (int c = 0; c < copies; ++c) inst.buyers.push_back(b);
    }
  }
  inst.family = read_family(doc, static_cast<int>(inst.buyers.size()));
  return inst;
}

LoadedInstance load_instance(const std::string& path, int support_cap) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_instance(buf.str(), support_cap);
}

RankedList parse_list(const std::string& text, const ProductCatalog& catalog) {
  std::string body = text;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  body = trim(body);
  if (!body.empty() && body.front() == '(') {
    if (body.back() != ')') throw InputError("unbalanced parentheses in list '" + text + "'");
    body = body.substr(1, body.size() - 2);
  }
  std::vector<ProductId> items;
  std::stringstream ss(body);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) throw InputError("empty entry in list '" + text + "'");
    const ProductId j = node_ref(token, catalog, "list '" + text + "'");
    if (j == kNoPurchase) throw InputError("list '" + text + "' names the no-purchase option");
    items.push_back(j);
  }
  try {
    return RankedList(items);
  } catch (const std::invalid_argument& e) {
    throw InputError("list '" + text + "': " + e.what());
  }
}

std::vector<RankedList> parse_profile(const std::string& text, const ProductCatalog& catalog) {
  std::vector<RankedList> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ';')) out.push_back(parse_list(part, catalog));
  return out;
}

std::string format_list(const RankedList& list, const ProductCatalog& catalog) { return list.format(catalog); }

std::string format_context(const std::vector<RankedList>& context, const ProductCatalog& catalog) {
  std::string out;
  for (std::size_t k = 0; k < context.size(); ++k) {
    if (k) out += ";";
    out += context[k].format(catalog);
  }
  return out;
}

std::string tables_to_json(const TaxationMechanism& mech, const ProductCatalog& catalog) {
  json tables = json::array();
  for (const auto& table : mech.tables) {
    json t = json::object();
    for (const auto& [ctx, s] : table) {
      json names = json::array();
      for (int j : s.members()) names.push_back(catalog.name(j));
      t[format_context(ctx, catalog)] = names;
    }
    tables.push_back(t);
  }
  return json{{"tables", tables}}.dump(2) + "\n";
}

TaxationMechanism tables_from_json(const std::string& json_text, const ProductCatalog& catalog, int buyers) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  const auto& tables = require(doc, "tables", "tables file");
  if (!tables.is_array() || static_cast<int>(tables.size()) != buyers) {
    fail("tables file", "expected one table per buyer (" + std::to_string(buyers) + ")");
  }
  TaxationMechanism mech;
  for (const auto& t : tables) {
    std::map<TaxationMechanism::Context, Assortment> table;
    for (const auto& [key, names] : t.items()) {
      TaxationMechanism::Context ctx = key.empty() ? TaxationMechanism::Context{} : parse_profile(key, catalog);
      if (static_cast<int>(ctx.size()) != buyers - 1) fail("tables file", "context '" + key + "' has the wrong length");
      Assortment s;
      for (const auto& name : names) {
        const ProductId j = node_ref(name, catalog, "tables file");
        if (j == kNoPurchase) fail("tables file", "assortments hold products only");
        s = s.with(j);
      }
      table[ctx] = s;
    }
    mech.tables.push_back(std::move(table));
  }
  return mech;
}

}  // namespace aauction
