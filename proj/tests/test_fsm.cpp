#include "doctest.h"

#include <random>

#include "sea/adapter_space.hpp"
#include "sea/error.hpp"
#include "sea/fsm_stabilizer.hpp"

using namespace sea;

namespace {

GateVector one(bool v) { return GateVector{v}; }

// Attention-only LoRA PA units of sizes 4, 8, 16 on each of two layers.
AuditSpace small_space() {
  BackboneDesc b;
  b.num_layers = 2;
  b.hidden_dims = {64, 64};
  b.param_count = 1'000'000;
  AuditSchema schema;
  for (int size : {4, 8, 16}) schema.templates.push_back({Family::kLoRA, Topology::kPA, size, Slot::kAttention});
  return build_audit_space(b, schema);
}

}  // namespace

TEST_CASE("two consistent votes commit at tau 2") {
  FsmState s(1, {2, 2});
  GateVector g = one(false);
  auto r = filter_proposals(s, g, one(true));
  CHECK_FALSE(r.changed);
  CHECK(s.votes(0).act_counter == 1);
  REQUIRE(s.votes(0).pending_gate);
  CHECK(*s.votes(0).pending_gate);
  r = filter_proposals(s, r.gates, one(true));
  CHECK(r.changed);
  CHECK(r.gates == one(true));
  CHECK(r.commits == std::vector<std::size_t>{0});
  CHECK(s.committed_changes() == 1);
  CHECK(s.votes(0).act_counter == 0);
}

TEST_CASE("an interrupted vote resets") {
  FsmState s(1, {2, 2});
  GateVector g = one(false);
  for (bool p : {true, false, true}) g = filter_proposals(s, g, one(p)).gates;
  CHECK(g == one(false));
  CHECK(s.committed_changes() == 0);
  CHECK(s.votes(0).act_counter == 1);
}

TEST_CASE("tau 1 passes every proposal through") {
  Rng rng = make_rng(3, 0);
  FsmState s(6, {1, 1});
  GateVector g(6, false);
  for (int t = 0; t < 200; ++t) {
    GateVector p(6);
    for (std::size_t i = 0; i < 6; ++i) p[i] = rng() % 2;
    g = filter_proposals(s, g, p).gates;
    CHECK(g == p);
  }
}

TEST_CASE("budget guard keeps the densest activations") {
  FsmState s(3, {1, 1});
  const std::vector<double> scores{1.0, 3.0, 2.0};
  const std::vector<double> costs{1.0, 1.0, 1.0};
  const BudgetGuard guard{scores, costs, 2.0};
  const auto r = filter_proposals(s, GateVector(3, false), GateVector(3, true), &guard);
  CHECK(r.gates == GateVector{false, true, true});
  CHECK(r.rejected == std::vector<std::size_t>{0});
  CHECK(s.votes(0).act_counter == 0);
}

TEST_CASE("length mismatch") {
  FsmState s(2, {});
  CHECK_THROWS_AS(filter_proposals(s, GateVector(2), GateVector(3)), Error);
}

TEST_CASE("rank change commits after two consistent votes") {
  const AuditSpace space = small_space();
  // Unit 0 is size 4 on layer 0; unit 1 is its size-8 sibling.
  REQUIRE(space[0].kind.size == 4);
  REQUIRE(space[1].kind.size == 8);
  FsmState s(space.size(), {2, 2});
  GateVector g(space.size(), false);
  g[0] = true;
  std::vector<std::optional<int>> sizes(space.size());
  sizes[0] = 8;
  auto r = filter_rank_proposals(s, space, g, sizes);
  CHECK_FALSE(r.changed);
  r = filter_rank_proposals(s, space, r.gates, sizes);
  CHECK(r.changed);
  CHECK_FALSE(r.gates[0]);
  CHECK(r.gates[1]);
  CHECK(s.committed_changes() == 1);
}

TEST_CASE("alternating rank targets never commit") {
  const AuditSpace space = small_space();
  FsmState s(space.size(), {2, 2});
  GateVector g(space.size(), false);
  g[0] = true;
  for (int target : {8, 16, 8}) {
    std::vector<std::optional<int>> sizes(space.size());
    sizes[0] = target;
    g = filter_rank_proposals(s, space, g, sizes).gates;
  }
  CHECK(g[0]);
  CHECK(s.committed_changes() == 0);
}

TEST_CASE("rank change over budget is rejected and its counter reset") {
  const AuditSpace space = small_space();
  const std::vector<double> scores(space.size(), 1.0);
  const BudgetGuard guard{scores, space.costs(), space[0].cost * 1.5};
  FsmState s(space.size(), {2, 2});
  GateVector g(space.size(), false);
  g[0] = true;
  std::vector<std::optional<int>> sizes(space.size());
  sizes[0] = 16;
  g = filter_rank_proposals(s, space, g, sizes, &guard).gates;
  const auto r = filter_rank_proposals(s, space, g, sizes, &guard);
  CHECK_FALSE(r.changed);
  CHECK(r.gates[0]);
  CHECK(r.rejected == std::vector<std::size_t>{0});
  CHECK(s.votes(0).rank_counter == 0);
}

TEST_CASE("rank proposal errors") {
  const AuditSpace space = small_space();
  FsmState s(space.size(), {2, 2});
  GateVector g(space.size(), false);
  g[0] = true;
  std::vector<std::optional<int>> sizes(space.size());
  sizes[0] = 32;
  CHECK_THROWS_AS(filter_rank_proposals(s, space, g, sizes), Error);
  sizes[0].reset();
  sizes[1] = 4;  // unit 1 is inactive
  CHECK_THROWS_AS(filter_rank_proposals(s, space, g, sizes), Error);
}

TEST_CASE("filter_cycle routes sibling swaps as rank votes") {
  const AuditSpace space = small_space();
  FsmState s(space.size(), {2, 2});
  GateVector g(space.size(), false);
  g[0] = true;
  GateVector proposed = g;
  proposed[0] = false;
  proposed[2] = true;  // size 16 sibling of unit 0
  auto r = filter_cycle(s, space, g, proposed);
  CHECK_FALSE(r.changed);
  CHECK(s.votes(0).rank_counter == 1);
  CHECK(s.votes(0).act_counter == 0);
  REQUIRE(s.votes(0).pending_size);
  CHECK(*s.votes(0).pending_size == 16);
  r = filter_cycle(s, space, r.gates, proposed);
  CHECK(r.gates == proposed);
  CHECK(s.cycles() == 2);
}

TEST_CASE("property: exhaustive chatter bound for a single unit") {
  for (int tau = 1; tau <= 3; ++tau) {
    for (int cycles = 1; cycles <= 12; ++cycles) {
      int worst = 0;
      for (std::uint32_t seq = 0; seq < (1u << cycles); ++seq) {
        FsmState s(1, {tau, tau});
        GateVector g = one(false);
        int changed_cycles = 0;
        for (int t = 0; t < cycles; ++t) {
          const auto r = filter_proposals(s, g, one((seq >> t) & 1u));
          changed_cycles += r.changed ? 1 : 0;
          CHECK(s.votes(0).act_counter < tau);
          g = r.gates;
        }
        CHECK(s.committed_changes() == changed_cycles);
        CHECK(s.flips(0) <= cycles / tau);
        worst = std::max(worst, s.committed_changes());
      }
      CHECK(worst == cycles / tau);
    }
  }
}

TEST_CASE("property: consistent pressure commits on the tau-th vote") {
  for (int tau = 1; tau <= 5; ++tau) {
    FsmState s(1, {tau, tau});
    GateVector g = one(false);
    for (int t = 1; t <= tau; ++t) {
      const auto r = filter_proposals(s, g, one(true));
      CHECK(r.changed == (t == tau));
      g = r.gates;
    }
    CHECK(g == one(true));
  }
}

TEST_CASE("property: global chatter bound under mixed activity and rank votes") {
  const AuditSpace space = small_space();
  for (int tau = 1; tau <= 4; ++tau) {
    for (int run = 0; run < 20; ++run) {
      Rng rng = make_rng(run, static_cast<std::uint64_t>(tau));
      FsmState s(space.size(), {tau, tau});
      GateVector g(space.size(), false);
      GateVector p(space.size(), false);
      const int cycles = 2000;
      int changed_cycles = 0;
      for (int t = 0; t < cycles; ++t) {
        if (rng() % 3 == 0) {
          for (std::size_t i = 0; i < p.size(); ++i) p[i] = rng() % 2;
        }
        const auto r = filter_cycle(s, space, g, p);
        changed_cycles += r.changed ? 1 : 0;
        g = r.gates;
      }
      CHECK(s.committed_changes() == changed_cycles);
      CHECK(s.committed_changes() <= cycles / tau);
      for (std::size_t i = 0; i < space.size(); ++i) CHECK(s.flips(i) <= cycles / tau);
    }
  }
}
