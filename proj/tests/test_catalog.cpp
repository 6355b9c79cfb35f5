#include <doctest.h>

#include <algorithm>
#include <random>

#include "hsindy/catalog.hpp"

using namespace hsindy;

namespace {

ScoredModel scored(std::initializer_list<std::pair<int, double>> entries, double aicc,
                   Index terms = 4) {
  Matrix xi = Matrix::Zero(terms, 1);
  for (const auto& [term, value] : entries) xi(term, 0) = value;
  ScoredModel s;
  s.model = make_model(xi);
  s.aicc = aicc;
  return s;
}

bool same_contents(const ModelCatalog& a, const ModelCatalog& b) {
  if (a.size() != b.size()) return false;
  for (const auto& [signature, entry] : a.entries()) {
    const CatalogEntry* other = b.find(signature);
    if (other == nullptr || other->contributions.size() != entry.contributions.size()) return false;
    for (std::size_t c = 0; c < entry.contributions.size(); ++c) {
      const auto& x = entry.contributions[c];
      const auto& y = other->contributions[c];
      if (x.anchor != y.anchor || x.aicc != y.aicc || x.coefficients != y.coefficients) return false;
    }
  }
  return true;
}

std::vector<std::vector<ScoredModel>> random_clusters(std::mt19937_64& rng, int count) {
  std::uniform_int_distribution<int> term(0, 3);
  std::uniform_int_distribution<int> size(0, 3);
  std::uniform_real_distribution<double> value(-2, 2);
  std::vector<std::vector<ScoredModel>> clusters(static_cast<std::size_t>(count));
  for (auto& c : clusters) {
    const int n = size(rng);
    for (int i = 0; i < n; ++i) c.push_back(scored({{term(rng), value(rng)}, {term(rng), value(rng)}}, value(rng)));
  }
  return clusters;
}

}  // namespace

TEST_SUITE("catalog") {

TEST_CASE("registration basics") {
  ModelCatalog catalog;
  catalog.register_models(0, {});
  CHECK(catalog.empty());

  for (Index anchor : {3, 7, 9}) {
    const std::vector<ScoredModel> models{scored({{1, 1.0}}, -5.0)};
    catalog.register_models(anchor, models);
  }
  REQUIRE(catalog.size() == 1);
  const CatalogEntry* entry = catalog.rank_by_frequency().front();
  CHECK(entry->frequency() == 3);
  CHECK(entry->contributions[0].anchor == 3);

  // A signature repeated within one cluster counts once; the first record wins.
  const std::vector<ScoredModel> twice{scored({{1, 2.0}}, -9.0), scored({{1, 4.0}}, -1.0)};
  catalog.register_models(11, twice);
  CHECK(entry->frequency() == 4);
  CHECK(entry->contributions.back().aicc == -9.0);
}

TEST_CASE("contributions add up to the retained counts") {
  std::mt19937_64 rng(1);
  const auto clusters = random_clusters(rng, 40);
  ModelCatalog catalog;
  std::size_t expected = 0;
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    catalog.register_models(static_cast<Index>(a), clusters[a]);
    std::vector<SupportSignature> distinct;
    for (const auto& s : clusters[a]) distinct.push_back(s.model.signature());
    std::sort(distinct.begin(), distinct.end());
    expected += static_cast<std::size_t>(std::unique(distinct.begin(), distinct.end()) - distinct.begin());
  }
  CHECK(catalog.contribution_count() == expected);
}

TEST_CASE("ranking ties fall back to mean AICc") {
  ModelCatalog catalog;
  for (Index a = 0; a < 40; ++a) {
    const std::vector<ScoredModel> m{scored({{0, 1.0}}, 7.0)};
    catalog.register_models(a, m);
  }
  for (Index a = 0; a < 10; ++a) {
    const std::vector<ScoredModel> m{scored({{1, 1.0}}, 0.5), scored({{2, 1.0}}, 0.1)};
    catalog.register_models(a, m);
  }
  const auto ranked = catalog.rank_by_frequency();
  REQUIRE(ranked.size() == 3);
  CHECK(ranked[0]->frequency() == 40);
  CHECK(ranked[1]->mean_aicc() == doctest::Approx(0.1));
  CHECK(ranked[2]->mean_aicc() == doctest::Approx(0.5));
  CHECK(catalog.rank_by_frequency(1).size() == 1);
  CHECK(catalog.rank_by_frequency(1).front() == ranked[0]);
}

TEST_CASE("representative is the per-position median") {
  ModelCatalog catalog;
  const double values[] = {3.0, -1.0, 10.0, 2.0};
  for (Index a = 0; a < 4; ++a) {
    const std::vector<ScoredModel> m{scored({{0, values[a]}, {2, 1.0 + a}}, 0.0)};
    catalog.register_models(a, m);
  }
  const Matrix rep = catalog.rank_by_frequency().front()->representative();
  CHECK(rep(0, 0) == doctest::Approx(2.5));
  CHECK(rep(2, 0) == doctest::Approx(2.5));
  CHECK(rep(1, 0) == 0.0);

  const std::vector<ScoredModel> m{scored({{0, 100.0}, {2, 0.5}}, 0.0)};
  catalog.register_models(9, m);
  CHECK(catalog.rank_by_frequency().front()->representative()(0, 0) == doctest::Approx(3.0));
}

TEST_CASE("merge is associative and commutative") {
  std::mt19937_64 rng(2);
  const auto clusters = random_clusters(rng, 30);
  ModelCatalog parts[3];
  for (std::size_t a = 0; a < clusters.size(); ++a) {
    parts[a % 3].register_models(static_cast<Index>(a), clusters[a]);
  }
  ModelCatalog left = parts[0];
  left.merge(parts[1]);
  left.merge(parts[2]);
  ModelCatalog inner = parts[1];
  inner.merge(parts[2]);
  ModelCatalog right = parts[0];
  right.merge(inner);
  ModelCatalog swapped = parts[2];
  swapped.merge(parts[0]);
  swapped.merge(parts[1]);
  CHECK(same_contents(left, right));
  CHECK(same_contents(left, swapped));

  ModelCatalog serial;
  for (std::size_t a = 0; a < clusters.size(); ++a) serial.register_models(static_cast<Index>(a), clusters[a]);
  CHECK(same_contents(left, serial));
}

TEST_CASE("processing order does not change the catalog") {
  std::mt19937_64 rng(3);
  const auto clusters = random_clusters(rng, 50);
  ModelCatalog forward;
  for (std::size_t a = 0; a < clusters.size(); ++a) forward.register_models(static_cast<Index>(a), clusters[a]);
  std::vector<std::size_t> order(clusters.size());
  for (std::size_t a = 0; a < order.size(); ++a) order[a] = a;
  for (int trial = 0; trial < 5; ++trial) {
    std::shuffle(order.begin(), order.end(), rng);
    ModelCatalog shuffled;
    for (std::size_t a : order) shuffled.register_models(static_cast<Index>(a), clusters[a]);
    CHECK(same_contents(forward, shuffled));
    const auto r1 = forward.rank_by_frequency();
    const auto r2 = shuffled.rank_by_frequency();
    REQUIRE(r1.size() == r2.size());
    for (std::size_t i = 0; i < r1.size(); ++i) CHECK(r1[i]->signature == r2[i]->signature);
  }
}

TEST_CASE("regime map keeps every anchor") {
  TrajectorySet training;
  training.states = Matrix::Zero(5, 1);
  training.derivatives = Matrix::Zero(5, 1);
  training.times = {0, 1, 2, 3, 4};
  training.trajectory_starts = {0, 3};
  training.regime_labels = {0, 0, 1, 1, 1};

  ModelCatalog catalog;
  std::vector<ClusterOutcome> outcomes(5);
  for (Index a = 0; a < 5; ++a) {
    outcomes[static_cast<std::size_t>(a)].cluster.anchor = a;
    if (a == 2) continue;
    outcomes[static_cast<std::size_t>(a)].retained = {scored({{a % 2 == 0 ? 0 : 1, 1.0}}, -1.0 * a)};
    catalog.register_models(a, outcomes[static_cast<std::size_t>(a)].retained);
  }
  const auto rows = regime_map(catalog, outcomes, training, training.states);
  REQUIRE(rows.size() == 5);
  CHECK_FALSE(rows[2].resolved);
  CHECK(rows[2].frequency_rank == 0);
  CHECK(rows[3].trajectory == 1);
  CHECK(rows[3].true_label == 1);
  CHECK(rows[4].time == 4.0);
  CHECK(rows[0].frequency_rank >= 1);
  CHECK(rows[1].frequency_rank != rows[0].frequency_rank);
}

}  // TEST_SUITE
