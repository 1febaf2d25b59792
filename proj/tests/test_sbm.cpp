#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "fsc/sbm.hpp"

using namespace fsc;
using Catch::Approx;

TEST_CASE("sbm rejects degenerate shapes") {
  SbmSpec spec;
  spec.n = 1;
  REQUIRE_THROWS_AS(generate(spec), std::invalid_argument);
  spec.n = 10;
  spec.k = 0;
  REQUIRE_THROWS_AS(generate(spec), std::invalid_argument);
  spec.k = 2;
  spec.h = 0;
  REQUIRE_THROWS_AS(generate(spec), std::invalid_argument);
  spec.h = 2;
  spec.a = -1.0;
  REQUIRE_THROWS_AS(generate(spec), std::invalid_argument);
  spec.a = 8.0;

  SbmSpec tight = spec;
  tight.n = 5;
  tight.k = 3;
  tight.h = 2;
  REQUIRE_THROWS_AS(generate(tight), std::invalid_argument);

  SbmSpec adv = spec;
  adv.n = 12;
  adv.k = 2;
  adv.h = 3;
  adv.mode = GroupMode::adversarial;
  REQUIRE_THROWS_AS(generate(adv), std::invalid_argument);
}

TEST_CASE("cluster blocks and group layout are deterministic") {
  SbmSpec spec;
  spec.n = 10;
  spec.k = 3;
  spec.h = 2;
  spec.seed = 4;
  const SbmInstance prop = generate(spec);
  REQUIRE(prop.truth.k == 3);
  REQUIRE(prop.truth.labels == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 2, 2, 2});
  REQUIRE(prop.groups.groups() == std::vector<int>{0, 1, 0, 1, 0, 1, 0, 0, 1, 0});

  SbmSpec adv = spec;
  adv.mode = GroupMode::adversarial;
  const SbmInstance bad = generate(adv);
  REQUIRE(bad.groups.groups() == std::vector<int>{0, 0, 0, 0, 1, 1, 1, 0, 0, 0});
}

TEST_CASE("edge probabilities follow the sparsity scaling") {
  SbmSpec spec;
  spec.n = 130;
  const double q = std::pow(std::log(130.0) / 130.0, 2.0 / 3.0);
  const SbmInstance inst = generate(spec);
  REQUIRE(inst.p_in == Approx(8.0 * q).margin(1e-15));
  REQUIRE(inst.p_out == Approx(q).margin(1e-15));

  SbmSpec dense_spec = spec;
  dense_spec.a = 1e6;
  REQUIRE(generate(dense_spec).p_in == 1.0);
}

TEST_CASE("realized edge densities track the probabilities") {
  SbmSpec spec;
  spec.n = 300;
  spec.k = 2;
  spec.seed = 12;
  spec.connectivity_fix = false;
  const SbmInstance inst = generate(spec);

  double within = 0.0, across = 0.0;
  for (const EdgeTriple& e : inst.graph.edge_list()) {
    if (inst.truth.labels[e.u] == inst.truth.labels[e.v])
      within += 1.0;
    else
      across += 1.0;
  }
  const double within_pairs = 2.0 * (150.0 * 149.0 / 2.0);
  const double across_pairs = 150.0 * 150.0;
  REQUIRE(within / within_pairs == Approx(inst.p_in).epsilon(0.15));
  REQUIRE(across / across_pairs == Approx(inst.p_out).epsilon(0.15));
}

TEST_CASE("generation is reproducible and seed-sensitive") {
  SbmSpec spec;
  spec.n = 120;
  spec.seed = 9;
  const auto e1 = generate(spec).graph.edge_list();
  const auto e2 = generate(spec).graph.edge_list();
  REQUIRE(e1.size() == e2.size());
  for (std::size_t i = 0; i < e1.size(); ++i) {
    REQUIRE(e1[i].u == e2[i].u);
    REQUIRE(e1[i].v == e2[i].v);
  }
  spec.seed = 10;
  const auto e3 = generate(spec).graph.edge_list();
  const bool differs = e3.size() != e1.size() ||
                       [&] {
                         for (std::size_t i = 0; i < e1.size(); ++i)
                           if (e1[i].u != e3[i].u || e1[i].v != e3[i].v) return true;
                         return false;
                       }();
  REQUIRE(differs);
}

TEST_CASE("connectivity fix stitches an empty graph into one component") {
  SbmSpec spec;
  spec.n = 40;
  spec.a = 0.0;
  spec.b = 0.0;
  spec.seed = 2;
  REQUIRE(component_count(generate(spec).graph) == 1);

  spec.connectivity_fix = false;
  REQUIRE(component_count(generate(spec).graph) == 40);
}

TEST_CASE("proportional groups split every cluster evenly when sizes divide") {
  SbmSpec spec;
  spec.n = 12;
  spec.k = 2;
  spec.h = 3;
  spec.seed = 6;
  const SbmInstance inst = generate(spec);
  REQUIRE(inst.groups.group_count() == 3);
  for (int s = 0; s < 3; ++s) REQUIRE(inst.groups.group_sizes()[s] == 4);
}

TEST_CASE("adversarial balance gap report is populated and reproducible") {
  const BalanceGapReport rep = adversarial_balance_gap(120, 2, 2, 3);
  for (double x : {rep.standard_balance, rep.fair_smw_sym, rep.fair_smw_rw, rep.fair_smw_aff,
                   rep.s_fair_sc_balance, rep.fair_sc_unnormalized_balance,
                   rep.fair_sc_normalized_balance}) {
    REQUIRE(x >= 0.0);
    REQUIRE(x <= 1.0);
  }
  const BalanceGapReport again = adversarial_balance_gap(120, 2, 2, 3);
  REQUIRE(rep.standard_balance == again.standard_balance);
  REQUIRE(rep.fair_smw_sym == again.fair_smw_sym);
  REQUIRE(rep.s_fair_sc_balance == again.s_fair_sc_balance);
}
