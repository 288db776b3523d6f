#pragma once

#include "assortment_auction/auction.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace aauction {

/// Raised for malformed instance or table files.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

struct LoadedBuyer {
  std::string type;  // markov | explicit | mnl | buydown
  std::optional<MarkovChainModel> chain;
  std::optional<ExplicitListDistribution> distribution;
  std::optional<VirtualValuationMapping> vvm;
  std::string vvm_source;  // procedure | frontier | values | none
  std::optional<std::vector<Rational>> valuation_pmf;  // buydown only
};

struct LoadedInstance {
  ProductCatalog catalog;
  std::vector<LoadedBuyer> buyers;  // copies expanded
  FeasibleFamily family;

  /// Throws InputError when an explicit buyer lacks a VVM.
  AuctionInstance auction() const;
};

/// Reads the JSON instance format documented in the README.
LoadedInstance load_instance(const std::string& path, int support_cap = kDefaultSupportCap);
LoadedInstance parse_instance(const std::string& json_text, int support_cap = kDefaultSupportCap);

/// "(C,B,A)", "C,B,A" or "()" with product names or ids.
RankedList parse_list(const std::string& text, const ProductCatalog& catalog);
/// Lists separated by ';'.
std::vector<RankedList> parse_profile(const std::string& text, const ProductCatalog& catalog);

std::string format_list(const RankedList& list, const ProductCatalog& catalog);
/// Context key: the other buyers' lists in buyer order joined by ';'.
std::string format_context(const std::vector<RankedList>& context, const ProductCatalog& catalog);

std::string tables_to_json(const TaxationMechanism& mech, const ProductCatalog& catalog);
TaxationMechanism tables_from_json(const std::string& json_text, const ProductCatalog& catalog, int buyers);

}  // namespace aauction
