#include "hsindy/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hsindy {

double CatalogEntry::mean_aicc() const {
  if (contributions.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& c : contributions) sum += c.aicc;
  return sum / static_cast<double>(contributions.size());
}

Matrix CatalogEntry::representative() const {
  if (contributions.empty()) return {};
  const Matrix& first = contributions.front().coefficients;
  Matrix out = Matrix::Zero(first.rows(), first.cols());
  std::vector<double> values(contributions.size());
  for (Index j = 0; j < first.cols(); ++j) {
    for (Index l = 0; l < first.rows(); ++l) {
      if (!signature.contains(static_cast<int>(l), static_cast<int>(j))) continue;
      for (std::size_t c = 0; c < contributions.size(); ++c) {
        values[c] = contributions[c].coefficients(l, j);
      }
      std::sort(values.begin(), values.end());
      const std::size_t mid = values.size() / 2;
      out(l, j) = values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
    }
  }
  return out;
}

namespace {

void insert_contribution(CatalogEntry& entry, Contribution contribution) {
  auto it = std::lower_bound(entry.contributions.begin(), entry.contributions.end(),
                             contribution.anchor,
                             [](const Contribution& c, Index a) { return c.anchor < a; });
  if (it != entry.contributions.end() && it->anchor == contribution.anchor) return;
  entry.contributions.insert(it, std::move(contribution));
}

}  // namespace

void ModelCatalog::register_models(Index anchor, std::span<const ScoredModel> supported) {
  for (const auto& scored : supported) {
    SupportSignature signature = scored.model.signature();
    auto [it, inserted] = entries_.try_emplace(signature);
    if (inserted) it->second.signature = std::move(signature);
    insert_contribution(it->second, {anchor, scored.model.coefficients, scored.aicc});
  }
}

void ModelCatalog::merge(const ModelCatalog& other) {
  for (const auto& [signature, entry] : other.entries_) {
    auto [it, inserted] = entries_.try_emplace(signature);
    if (inserted) it->second.signature = signature;
    for (const auto& c : entry.contributions) insert_contribution(it->second, c);
  }
}

std::vector<const CatalogEntry*> ModelCatalog::rank_by_frequency(std::size_t top) const {
  std::vector<const CatalogEntry*> ranked;
  ranked.reserve(entries_.size());
  for (const auto& [signature, entry] : entries_) ranked.push_back(&entry);
  // entries_ is ordered by signature, so a stable sort leaves that as the
  // final tie-break.
  std::stable_sort(ranked.begin(), ranked.end(), [](const CatalogEntry* a, const CatalogEntry* b) {
    if (a->frequency() != b->frequency()) return a->frequency() > b->frequency();
    return a->mean_aicc() < b->mean_aicc();
  });
  if (top > 0 && ranked.size() > top) ranked.resize(top);
  return ranked;
}

std::size_t ModelCatalog::contribution_count() const {
  std::size_t total = 0;
  for (const auto& [signature, entry] : entries_) total += entry.contributions.size();
  return total;
}

const CatalogEntry* ModelCatalog::find(const SupportSignature& signature) const {
  auto it = entries_.find(signature);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<RegimeMapRow> regime_map(const ModelCatalog& catalog,
                                     std::span<const ClusterOutcome> outcomes,
                                     const TrajectorySet& training, const Matrix& coordinates) {
  std::map<SupportSignature, Index> rank_of;
  Index rank = 1;
  for (const CatalogEntry* entry : catalog.rank_by_frequency()) rank_of[entry->signature] = rank++;

  std::vector<RegimeMapRow> rows;
  rows.reserve(outcomes.size());
  for (const auto& outcome : outcomes) {
    RegimeMapRow row;
    row.anchor = outcome.cluster.anchor;
    row.time = training.times.at(static_cast<std::size_t>(row.anchor));
    row.trajectory = training.trajectory_of(row.anchor);
    row.coordinates = coordinates.row(row.anchor);
    row.true_label = training.regime_labels.at(static_cast<std::size_t>(row.anchor));
    if (!outcome.retained.empty()) {
      const ScoredModel& best = outcome.retained.front();
      row.resolved = true;
      row.signature = best.model.signature();
      row.coefficients = best.model.coefficients;
      row.aicc = best.aicc;
      auto it = rank_of.find(row.signature);
      row.frequency_rank = it == rank_of.end() ? 0 : it->second;
    } else {
      row.aicc = std::numeric_limits<double>::infinity();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace hsindy
