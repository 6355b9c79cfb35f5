#pragma once

#include <map>
#include <span>
#include <vector>

#include "hsindy/common.hpp"
#include "hsindy/dynamics.hpp"
#include "hsindy/model_selection.hpp"
#include "hsindy/sparse_regression.hpp"

namespace hsindy {

struct Contribution {
  Index anchor;
  Matrix coefficients;
  double aicc;
};

struct CatalogEntry {
  SupportSignature signature;
  std::vector<Contribution> contributions;  // one per anchor, ascending anchor

  Index frequency() const { return static_cast<Index>(contributions.size()); }
  double mean_aicc() const;
  // Per-position median over contributing clusters.
  Matrix representative() const;
};

// Registry of supported model structures across clusters.
class ModelCatalog {
 public:
  // Adds the supported models of one cluster. A signature is counted once
  // per anchor; the first (lowest AICc) occurrence supplies its record.
  void register_models(Index anchor, std::span<const ScoredModel> supported);

  // Union of two catalogs. Associative and commutative; an anchor already
  // present for a signature keeps its existing record.
  void merge(const ModelCatalog& other);

  // Descending frequency, ties by lower mean AICc, then by signature.
  // top == 0 returns every entry.
  std::vector<const CatalogEntry*> rank_by_frequency(std::size_t top = 0) const;

  const std::map<SupportSignature, CatalogEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t contribution_count() const;
  const CatalogEntry* find(const SupportSignature& signature) const;

 private:
  std::map<SupportSignature, CatalogEntry> entries_;
};

struct RegimeMapRow {
  Index anchor = 0;
  double time = 0.0;
  Index trajectory = 0;
  RowVector coordinates;
  int true_label = 0;
  bool resolved = false;
  SupportSignature signature;
  Matrix coefficients;
  double aicc = 0.0;
  Index frequency_rank = 0;  // 1-based rank of the signature; 0 if unresolved
};

// Lowest-AICc supported model per anchor, in anchor order. Anchors without
// a supported model are kept and marked unresolved.
std::vector<RegimeMapRow> regime_map(const ModelCatalog& catalog,
                                     std::span<const ClusterOutcome> outcomes,
                                     const TrajectorySet& training, const Matrix& coordinates);

}  // namespace hsindy
