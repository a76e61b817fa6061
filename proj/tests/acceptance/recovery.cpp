#include "acceptance/criteria.hpp"

#include "repositioner/fixtures/kg.hpp"
#include "repositioner/fixtures/planted.hpp"
#include "repositioner/kge/rotate.hpp"
#include "repositioner/mtl/kg_mtl.hpp"
#include "repositioner/predict/cvae.hpp"
#include "repositioner/predict/pu.hpp"

#include <cmath>
#include <complex>
#include <set>
#include <tuple>

namespace repositioner::acceptance {

namespace {

double complex_distance(const kge::RotateModel& m, std::size_t h, std::size_t r, std::size_t t) {
  double d = 0;
  for (Index c = 0; c < m.dim(); ++c) {
    const auto i = static_cast<Index>(h), j = static_cast<Index>(t), k = static_cast<Index>(r);
    const std::complex<double> hc(m.re(i, c), m.im(i, c)), tc(m.re(j, c), m.im(j, c));
    d += std::abs(hc * std::polar(1.0, m.phase(k, c)) - tc);
  }
  return d;
}

// Filtered rank of the true entity in both slots; ties count against it.
double filtered_hits(const kge::RotateModel& m, const std::vector<data::IndexedTriple>& test,
                     const std::vector<data::IndexedTriple>& known, int k) {
  std::set<std::tuple<std::size_t, std::size_t, std::size_t>> seen;
  for (const auto& t : known) seen.insert({t.head, t.relation, t.tail});
  const std::size_t n = m.entity_ids.size();
  int hits = 0;
  for (const auto& t : test) {
    const double truth = complex_distance(m, t.head, t.relation, t.tail);
    int tail_rank = 1, head_rank = 1;
    for (std::size_t e = 0; e < n; ++e) {
      if (e != t.tail && !seen.count({t.head, t.relation, e}) && complex_distance(m, t.head, t.relation, e) <= truth)
        ++tail_rank;
      if (e != t.head && !seen.count({e, t.relation, t.tail}) && complex_distance(m, e, t.relation, t.tail) <= truth)
        ++head_rank;
    }
    hits += (tail_rank <= k) + (head_rank <= k);
  }
  return static_cast<double>(hits) / static_cast<double>(2 * test.size());
}

double matrix_auroc(const Matrix& scores, const Matrix& labels) {
  std::vector<double> s;
  std::vector<int> y;
  for (Index i = 0; i < scores.size(); ++i) {
    s.push_back(scores(i));
    y.push_back(labels(i) != 0.0);
  }
  return pair_count_auroc(s, y);
}

}  // namespace

Outcome rotate_recovery() {
  const auto f = fixtures::compositional_kg(4);
  kge::RotateConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 4;
  std::size_t steps = 0, non_finite = 0;
  double float_eval = 0.0;
  // Relation coordinates are stored as phases, so |r_i| = |e^{i theta}| = 1
  // holds exactly whenever theta is finite. The double evaluation of
  // |cos theta + i sin theta| is reported alongside; it is off by at most an ulp.
  const auto result = kge::train_rotate(f.kg, cfg, nullptr, [&](const Matrix& phase) {
    ++steps;
    for (Index i = 0; i < phase.size(); ++i) {
      if (!std::isfinite(phase(i))) {
        ++non_finite;
        continue;
      }
      float_eval = std::max(float_eval, std::abs(std::hypot(std::cos(phase(i)), std::sin(phase(i))) - 1.0));
    }
  });
  const std::size_t entities = f.kg.entity_count(), relations = f.kg.relation_count();
  const double hits = filtered_hits(result.model, f.test, f.all_triples(), 3);
  const double library = kge::filtered_hits_at_k(result.model, f.test, f.all_triples(), 3).hits;
  const double deviation = non_finite == 0 ? 0.0 : std::numeric_limits<double>::infinity();
  const bool ok = entities == 50 && relations == 4 && steps > 0 && hits >= 0.8 && deviation == 0.0 && hits == library;
  return {ok, format("%zu entities, %zu relations, %zu test triples; filtered Hits@3 %.3f >= 0.8 (library %.3f); "
                     "unit-modulus deviation %g over %zu steps (double evaluation within %.2g)",
                     entities, relations, f.test.size(), hits, library, deviation, steps, float_eval)};
}

Outcome pu_recovery() {
  const auto planted = fixtures::planted_rank2(100, 80, 0.4, 0.3, 11);
  predict::PuConfig cfg;
  cfg.rank = 2;
  cfg.epsilon = 0.1;
  cfg.lambda = 1e-2;
  cfg.epochs = 300;
  cfg.seed = 3;
  const auto result = predict::pu_complete(planted.observed, Matrix::Identity(100, 100), Matrix::Identity(80, 80), cfg);
  const Matrix s = result.model.scores();
  std::vector<double> scores;
  std::vector<int> labels;
  for (auto [i, j] : planted.held_out_positives) {
    scores.push_back(s(i, j));
    labels.push_back(1);
  }
  for (auto [i, j] : planted.sampled_negatives) {
    scores.push_back(s(i, j));
    labels.push_back(0);
  }
  const double observed = planted.observed.sum() / planted.truth.sum();
  const double auroc = pair_count_auroc(scores, labels);
  return {auroc >= 0.95, format("100x80 rank-2 truth, %.0f%% of positives observed, %zu held-out positives; "
                                "held-out AUROC %.4f >= 0.95",
                                100.0 * observed, planted.held_out_positives.size(), auroc)};
}

Outcome cvae_overfit() {
  const auto toy = fixtures::planted_blocks(10, 8, 2, 1.0, 5);
  predict::CvaeConfig cfg;
  cfg.latent = 4;
  cfg.hidden = 32;
  cfg.epochs = 500;
  cfg.learning_rate = 0.05;
  cfg.seed = 1;
  const auto result = predict::train_cvae(toy.x, toy.y, cfg);
  const double auroc = matrix_auroc(result.model.scores(), toy.y);
  return {auroc == 1.0, format("10x8 planted matrix, %d epochs; training AUROC %.6f == 1", cfg.epochs, auroc)};
}

Outcome kg_mtl_fixture() {
  const auto f = fixtures::mtl_fixture(1);
  mtl::KgMtlConfig cfg;
  cfg.epochs = 40;
  const auto coupled = mtl::train_kg_mtl(f.kg, f.dti, f.cpi, f.molecules, f.proteins, cfg);
  std::vector<double> dti, cpi;
  std::vector<int> dti_labels, cpi_labels;
  for (const auto& p : f.dti) {
    dti.push_back(coupled.model.predict_dti(p.first, p.second));
    dti_labels.push_back(p.label);
  }
  for (const auto& p : f.cpi) {
    cpi.push_back(coupled.model.predict_cpi(p.first, p.second));
    cpi_labels.push_back(p.label);
  }
  const double dti_auroc = pair_count_auroc(dti, dti_labels), cpi_auroc = pair_count_auroc(cpi, cpi_labels);

  cfg.shared_unit = false;
  const auto decoupled = mtl::train_kg_mtl(f.kg, f.dti, f.cpi, f.molecules, f.proteins, cfg);
  cfg.tasks = mtl::Tasks::dti_only;
  const auto dti_base = mtl::train_kg_mtl(f.kg, f.dti, f.cpi, f.molecules, f.proteins, cfg);
  cfg.tasks = mtl::Tasks::cpi_only;
  const auto cpi_base = mtl::train_kg_mtl(f.kg, f.dti, f.cpi, f.molecules, f.proteins, cfg);

  double gap = 0.0;
  bool shapes = decoupled.dti_history.size() == dti_base.dti_history.size() &&
                decoupled.cpi_history.size() == cpi_base.cpi_history.size();
  if (shapes) {
    for (std::size_t i = 0; i < dti_base.dti_history.size(); ++i)
      gap = std::max(gap, std::abs(decoupled.dti_history[i] - dti_base.dti_history[i]));
    for (std::size_t i = 0; i < cpi_base.cpi_history.size(); ++i)
      gap = std::max(gap, std::abs(decoupled.cpi_history[i] - cpi_base.cpi_history[i]));
  }
  for (const auto& p : f.dti)
    gap = std::max(gap, std::abs(decoupled.model.predict_dti(p.first, p.second) - dti_base.model.predict_dti(p.first, p.second)));
  for (const auto& p : f.cpi)
    gap = std::max(gap, std::abs(decoupled.model.predict_cpi(p.first, p.second) - cpi_base.model.predict_cpi(p.first, p.second)));

  const bool ok = dti_auroc >= 0.95 && cpi_auroc >= 0.95 && shapes && gap <= 1e-6;
  return {ok, format("training AUROC DTI %.4f, CPI %.4f (>= 0.95); decoupled vs independent baselines max gap %.3g "
                     "<= 1e-6 over losses and predictions%s",
                     dti_auroc, cpi_auroc, gap, shapes ? "" : "; history lengths differ")};
}

}  // namespace repositioner::acceptance
