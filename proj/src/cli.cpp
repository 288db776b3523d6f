#include "assortment_auction/cli.hpp"

#include "assortment_auction/errors.hpp"
#include "assortment_auction/instance_io.hpp"
#include "assortment_auction/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace aauction {

namespace {

using nlohmann::json;

std::string fmt(const Rational& r) { return to_string(r); }
std::string fmt(const ExtRational& r) { return to_string(r); }

const LoadedBuyer& pick_buyer(const LoadedInstance& inst, int index) {
  if (index < 1 || index > static_cast<int>(inst.buyers.size())) {
    throw InputError("buyer " + std::to_string(index) + " does not exist (instance has " +
                     std::to_string(inst.buyers.size()) + ")");
  }
  return inst.buyers[index - 1];
}

const ExplicitListDistribution& support_of(const LoadedBuyer& b) {
  if (!b.distribution) {
    throw CapExceeded("list support of a chain over more than " + std::to_string(kDefaultSupportCap) +
                      " products is not enumerated");
  }
  return *b.distribution;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw InputError("cannot write " + path);
  f << text;
}

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

// ---------------------------------------------------------------- procedure

int cmd_procedure(const LoadedInstance& inst, int buyer, const std::string& json_path, std::ostream& out) {
  const auto& b = pick_buyer(inst, buyer);
  if (!b.chain) throw InputError("procedure needs a Markov-chain buyer; buyer " + std::to_string(buyer) + " is " + b.type);
  const auto& cat = inst.catalog;
  const auto seq = run_procedure(*b.chain, cat);

  out << "procedure for buyer " << buyer << " (" << b.type << ", " << cat.size() << " products)\n";
  json trace = json::array();
  auto candidate_rows = [&](const std::vector<CandidateEvaluation>& cands) {
    out << "  " << std::left << std::setw(9) << "product" << std::setw(16) << "adjusted_price" << std::setw(20)
        << "P[0 before S]" << "efficiency\n";
    json rows = json::array();
    for (const auto& c : cands) {
      const std::string eff = c.efficiency ? fmt(*c.efficiency) : "ineligible";
      out << "  " << std::setw(9) << cat.name(c.product) << std::setw(16) << fmt(c.adjusted_price) << std::setw(20)
          << fmt(c.reach_no_purchase) << eff << "\n";
      rows.push_back({{"product", cat.name(c.product)},
                      {"adjusted_price", fmt(c.adjusted_price)},
                      {"reach_no_purchase", fmt(c.reach_no_purchase)},
                      {"efficiency", c.efficiency ? json(fmt(*c.efficiency)) : json(nullptr)}});
    }
    return rows;
  };

  for (const auto& step : seq.steps) {
    out << "k=" << step.k << "  S^(" << step.k - 1 << ") = " << cat.format(seq.assortment(step.k - 1)) << "\n";
    json rows = candidate_rows(step.candidates);
    out << "  selected " << cat.name(step.product) << ", V^(" << step.k << ") = " << fmt(step.value) << ", S^("
        << step.k << ") = " << cat.format(step.assortment) << "\n";
    std::string updated;
    json prices = json::object();
    for (int j : cat.all_products().minus(step.assortment).members()) {
      updated += " " + cat.name(j) + "=" + fmt(step.adjusted_prices[j]);
      prices[cat.name(j)] = fmt(step.adjusted_prices[j]);
    }
    out << "  updated prices:" << (updated.empty() ? " (none)" : updated) << "\n";
    trace.push_back({{"k", step.k},
                     {"candidates", rows},
                     {"selected", cat.name(step.product)},
                     {"value", fmt(step.value)},
                     {"assortment", cat.format(step.assortment)},
                     {"adjusted_prices", prices}});
  }
  out << "stop after K=" << seq.size();
  if (!seq.final_candidates.empty()) {
    out << ": no remaining product reaches 0 before " << cat.format(seq.assortment(seq.size())) << "\n";
    candidate_rows(seq.final_candidates);
  } else {
    out << ": every product selected\n";
  }
  json dead = json::array();
  for (const auto& d : seq.dead_products) {
    out << "dead: " << cat.name(d.product) << " (final adjusted price " << fmt(d.final_price) << ", dead from k="
        << d.death_iteration << ")\n";
    dead.push_back({{"product", cat.name(d.product)}, {"final_price", fmt(d.final_price)}, {"iteration", d.death_iteration}});
  }
  out << "values:";
  json values = json::array();
  for (std::size_t k = 0; k < seq.steps.size(); ++k) {
    out << (k ? ", " : " ") << fmt(seq.steps[k].value);
    values.push_back(fmt(seq.steps[k].value));
  }
  out << "\n";
  if (!json_path.empty()) {
    write_file(json_path, json{{"steps", trace}, {"dead", dead}, {"values", values}}.dump(2) + "\n");
  }
  return kExitOk;
}

// ----------------------------------------------------------------- frontier

int cmd_frontier(const LoadedInstance& inst, int buyer, const std::string& csv_path, std::ostream& out) {
  const auto& b = pick_buyer(inst, buyer);
  const auto& dist = support_of(b);
  const auto frontier = brute_force_frontier(dist, inst.catalog);
  std::string csv = "Q,R,assortment,left_slope\n";
  out << std::left << std::setw(10) << "Q" << std::setw(10) << "R" << std::setw(16) << "assortment" << "left_slope\n";
  for (const auto& v : frontier.vertices) {
    const std::string slope = v.left_slope ? fmt(*v.left_slope) : "";
    const std::string name = inst.catalog.format(v.canonical);
    out << std::setw(10) << fmt(v.sale_probability) << std::setw(10) << fmt(v.revenue) << std::setw(16) << name
        << (slope.empty() ? "-" : slope);
    if (v.attaining.size() > 1) {
      out << "   (also:";
      for (const auto& s : v.attaining) {
        if (s != v.canonical) out << " " << inst.catalog.format(s);
      }
      out << ")";
    }
    out << "\n";
    csv += fmt(v.sale_probability) + "," + fmt(v.revenue) + "," + csv_field(name) + "," + slope + "\n";
  }
  if (!csv_path.empty()) {
    if (csv_path == "-") {
      out << csv;
    } else {
      write_file(csv_path, csv);
    }
  }
  return kExitOk;
}

// -------------------------------------------------------------------- check

int cmd_check(const LoadedInstance& inst, int buyer, const std::string& what, std::ostream& out) {
  const auto& b = pick_buyer(inst, buyer);
  if (!b.vvm) throw InputError("buyer " + std::to_string(buyer) + " is explicit and has no \"vvm\" block");
  const auto& dist = support_of(b);
  const auto& cat = inst.catalog;
  bool ok = true;
  out << "buyer " << buyer << " vvm from " << b.vvm_source << "\n";
  for (const auto& atom : dist.support()) {
    out << "  V" << atom.list.format(cat) << " = " << fmt(b.vvm->value(atom.list)) << "  (P = " << fmt(atom.probability)
        << ")\n";
  }
  if (what == "impl" || what == "both") {
    const auto r = check_implementability(*b.vvm, dist, cat);
    out << "implementability: " << (r.implementable ? "PASS" : "FAIL") << "\n";
    for (const auto& t : r.thresholds) {
      out << "  w=" << fmt(t.threshold) << "  ";
      switch (t.failure) {
        case ThresholdCheck::Failure::None:
          out << "witness " << cat.format(*t.witness) << ": " << fmt(t.integrated) << " <= " << fmt(t.revenue) << "\n";
          break;
        case ThresholdCheck::Failure::InequalityFails:
          out << "VIOLATION at " << cat.format(*t.witness) << ": " << fmt(t.integrated) << " > " << fmt(t.revenue)
              << " for every matching assortment\n";
          break;
        case ThresholdCheck::Failure::NoMatchingAssortment:
          out << "VIOLATION: no assortment is bought from by exactly the lists scoring >= w\n";
          break;
      }
    }
    ok = ok && r.implementable;
  }
  if (what == "insurm" || what == "both") {
    const auto r = check_insurmountability(*b.vvm, dist, cat);
    out << "insurmountability: " << (r.insurmountable ? "PASS" : "FAIL") << "\n";
    for (const auto& v : r.violations) {
      out << "  VIOLATION at " << cat.format(v.assortment) << ": " << fmt(v.integrated) << " < " << fmt(v.revenue) << "\n";
    }
    ok = ok && r.insurmountable;
  }
  return ok ? kExitOk : kExitCheckFailed;
}

// ------------------------------------------------------------------ auction

void print_allocation(const AuctionInstance& a, const std::vector<RankedList>& profile, const AllocationOutcome& o,
                      bool myersonian, std::ostream& out) {
  for (int i = 0; i < a.num_buyers(); ++i) {
    const auto& b = o.buyers[i];
    out << "buyer " << i + 1 << ": list " << profile[i].format(a.catalog);
    if (myersonian) {
      out << "  V=" << fmt(b.value) << "  tau=" << fmt(b.threshold.value)
          << (b.threshold.equality_wins ? " (ties win)" : " (must exceed)");
    }
    out << "  T=" << a.catalog.format(b.offered) << "  gets " << a.catalog.name(b.product) << "  pays "
        << fmt(b.payment) << "\n";
  }
  out << "revenue: " << fmt(o.revenue()) << "\n";
  out << "feasible: " << (o.feasible ? "yes" : "no") << "\n";
  for (const auto& d : o.diagnostics) out << "diagnostic: " << d << "\n";
}

int cmd_auction(const LoadedInstance& inst, const std::string& mode, std::uint64_t samples, std::uint64_t seed,
                const std::string& profile_text, const std::vector<std::string>& thresholds,
                const std::string& tables_path, std::ostream& out) {
  const AuctionInstance a = inst.auction();
  std::optional<TaxationMechanism> tables;
  if (!tables_path.empty()) tables = tables_from_json(read_file(tables_path), inst.catalog, a.num_buyers());
  std::vector<ExtRational> competitors;
  for (const auto& t : thresholds) {
    try {
      competitors.emplace_back(parse_rational(t));
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("--threshold: ") + e.what());
    }
  }
  if (!competitors.empty() && (tables || profile_text.empty())) {
    throw InputError("--threshold applies to a single Myersonian --profile allocation");
  }

  if (!profile_text.empty()) {
    const auto profile = parse_profile(profile_text, inst.catalog);
    const auto o = tables ? allocate_tables(a, *tables, profile) : allocate(a, profile, competitors);
    for (std::size_t k = 0; k < competitors.size(); ++k) {
      out << "competitor " << a.num_buyers() + static_cast<int>(k) + 1 << ": fixed value " << fmt(competitors[k]) << "\n";
    }
    print_allocation(a, profile, o, !tables, out);
    return kExitOk;
  }

  out << "mechanism: " << (tables ? "taxation tables" : "myersonian") << "\n";
  if (mode == "simulate") {
    const auto r = simulate(a, tables, samples, seed);
    out << std::setprecision(10) << "samples: " << r.samples << "\nseed: " << seed << "\nmean revenue: " << r.mean
        << "\nstandard error: " << r.standard_error << "\n";
    return kExitOk;
  }
  if (tables) {
    const auto v = verify_mechanism(a, *tables);
    out << "expected revenue: " << fmt(v.revenue) << "\n";
    out << "feasible: " << (v.feasible ? "yes" : "no") << "\n";
    for (const auto& p : v.infeasible_profiles) out << "infeasible profile: " << format_context(p, inst.catalog) << "\n";
    return kExitOk;
  }
  const Rational revenue = expected_revenue_exact(a);
  const Rational surplus = expected_virtual_surplus(a);
  out << "expected revenue: " << fmt(revenue) << "\n";
  out << "expected virtual surplus: " << fmt(surplus) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------------- oracle

int cmd_oracle(const LoadedInstance& inst, const std::string& export_path, std::ostream& out) {
  AuctionInstance a;
  a.catalog = inst.catalog;
  a.family = inst.family;
  bool have_vvms = true;
  for (const auto& lb : inst.buyers) {
    Buyer b;
    b.distribution = lb.distribution;
    b.chain = lb.chain;
    if (lb.vvm) b.vvm = *lb.vvm;
    have_vvms = have_vvms && lb.vvm.has_value();
    a.buyers.push_back(std::move(b));
  }
  const auto r = enumerate_optimal(a);
  out << "optimal revenue: " << fmt(r.revenue) << "\n";
  if (have_vvms) {
    const Rational myerson = expected_revenue_exact(a);
    out << "myersonian revenue: " << fmt(myerson) << "\n";
    out << "gap: " << fmt(r.revenue - myerson) << "\n";
  } else {
    out << "myersonian revenue: n/a (an explicit buyer has no vvm)\n";
  }
  out << "optimal first-buyer tables: " << r.optimal_count << "\n";
  out << "search nodes: " << r.nodes << "\n";
  for (std::size_t i = 0; i < r.mechanism.tables.size(); ++i) {
    out << "buyer " << i + 1 << " table:\n";
    for (const auto& [ctx, s] : r.mechanism.tables[i]) {
      const std::string key = ctx.empty() ? "(any)" : format_context(ctx, inst.catalog);
      out << "  " << std::left << std::setw(24) << key << inst.catalog.format(s) << "\n";
    }
  }
  if (!export_path.empty()) write_file(export_path, tables_to_json(r.mechanism, inst.catalog));
  return kExitOk;
}

// ----------------------------------------------------------------- describe

int cmd_describe(const LoadedInstance& inst, std::ostream& out) {
  const auto& cat = inst.catalog;
  out << "products: " << cat.size() << "\n";
  for (int j = 1; j <= cat.size(); ++j) out << "  " << cat.name(j) << "  price " << fmt(cat.price(j)) << "\n";
  out << "buyers: " << inst.buyers.size() << "\n";
  for (std::size_t i = 0; i < inst.buyers.size(); ++i) {
    const auto& b = inst.buyers[i];
    out << "  buyer " << i + 1 << ": " << b.type << ", vvm " << b.vvm_source;
    if (b.distribution) {
      out << ", support " << b.distribution->support().size() << " lists\n";
      for (const auto& atom : b.distribution->support()) {
        out << "    " << std::left << std::setw(14) << atom.list.format(cat) << " P=" << fmt(atom.probability);
        if (b.vvm) out << "  V=" << fmt(b.vvm->value(atom.list));
        out << "\n";
      }
    } else {
      out << ", support not enumerated\n";
    }
  }
  out << "family: " << inst.family.describe() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact revenue-optimal assortment auctions"};
  app.require_subcommand(1);

  std::string path;
  int buyer = 1;
  std::string json_path, csv_path, what = "both", mode = "exact", profile, tables_path, export_path;
  std::uint64_t samples = 100000, seed = 1;
  std::vector<std::string> thresholds;

  auto* procedure = app.add_subcommand("procedure", "Greedy efficiency procedure trace for a Markov-chain buyer");
  procedure->add_option("instance", path, "Instance JSON")->required();
  procedure->add_option("--buyer", buyer, "Buyer index (1-based)");
  procedure->add_option("--json", json_path, "Also write the trace as JSON");

  auto* frontier = app.add_subcommand("frontier", "Revenue frontier of one buyer's list distribution");
  frontier->add_option("instance", path, "Instance JSON")->required();
  frontier->add_option("--buyer", buyer, "Buyer index (1-based)");
  frontier->add_option("--csv", csv_path, "Write CSV here ('-' for stdout)");

  auto* check = app.add_subcommand("check", "Implementability / insurmountability of a buyer's VVM");
  check->add_option("instance", path, "Instance JSON")->required();
  check->add_option("--buyer", buyer, "Buyer index (1-based)");
  check->add_option("--what", what, "impl, insurm or both")->check(CLI::IsMember({"impl", "insurm", "both"}));

  auto* auction = app.add_subcommand("auction", "Expected revenue, simulation or a single allocation");
  auction->add_option("instance", path, "Instance JSON")->required();
  auction->add_option("--mode", mode, "exact or simulate")->check(CLI::IsMember({"exact", "simulate"}));
  auction->add_option("--samples", samples, "Simulation samples")->check(CLI::PositiveNumber);
  auction->add_option("--seed", seed, "Simulation seed");
  auction->add_option("--profile", profile, "Reported lists, e.g. \"(C,B,A);(B)\"");
  auction->add_option("--threshold", thresholds, "Fixed competitor value(s) appended after the buyers");
  auction->add_option("--tables", tables_path, "Taxation tables JSON instead of the Myersonian rule");

  auto* oracle = app.add_subcommand("oracle", "Brute-force optimal mechanism");
  oracle->add_option("instance", path, "Instance JSON")->required();
  oracle->add_option("--export", export_path, "Write the optimal taxation tables as JSON");

  auto* describe = app.add_subcommand("describe", "Summarize an instance file");
  describe->add_option("instance", path, "Instance JSON")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    const LoadedInstance inst = load_instance(path);
    if (procedure->parsed()) return cmd_procedure(inst, buyer, json_path, out);
    if (frontier->parsed()) return cmd_frontier(inst, buyer, csv_path, out);
    if (check->parsed()) return cmd_check(inst, buyer, what, out);
    if (auction->parsed()) return cmd_auction(inst, mode, samples, seed, profile, thresholds, tables_path, out);
    if (oracle->parsed()) return cmd_oracle(inst, export_path, out);
    return cmd_describe(inst, out);
  } catch (const CapExceeded& e) {
    err << "error: " << e.what() << "\n";
    if (auction->parsed()) err << "hint: use --mode simulate\n";
    return kExitCap;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

}  // namespace aauction
