#include "doctest.h"

#include <algorithm>
#include <set>

#include "sea/audit_sampler.hpp"
#include "sea/error.hpp"

using namespace sea;

TEST_CASE("stratified split takes 3 active and 7 inactive out of 10") {
  GateVector gates(40, false);
  for (std::size_t i = 0; i < 40; i += 4) gates[i] = true;  // 10 active, 30 inactive
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng rng = make_rng(s, 0);
    const auto ids = draw_stratified(gates, std::vector<bool>(40, false), 10, 0.3, rng);
    REQUIRE(ids.size() == 10);
    const auto active = std::count_if(ids.begin(), ids.end(), [&](std::size_t i) { return gates[i]; });
    CHECK(active == 3);
  }
}

TEST_CASE("batch covers a space no larger than M") {
  GateVector gates{true, false, true, false, false};
  Rng rng = make_rng(1, 0);
  const std::vector<int> probes(5, 0);
  const AuditBatch b = sample_audit_batch(gates, probes, SamplerParams{5, 0.3, 0.3}, rng);
  CHECK(b.ids == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("empty active stratum spills into the inactive one") {
  const GateVector gates(20, false);
  Rng rng = make_rng(3, 0);
  const auto ids = draw_stratified(gates, std::vector<bool>(20, false), 4, 0.3, rng);
  CHECK(ids.size() == 4);
  const std::vector<int> probes(20, 0);
  Rng rng2 = make_rng(3, 1);
  CHECK(sample_audit_batch(gates, probes, SamplerParams{4, 0.3, 0.3}, rng2).ids.size() == 4);
}

TEST_CASE("coverage lower bound") {
  CHECK(coverage_lower_bound(60, 6, 0.3) == doctest::Approx(0.03));
  CHECK(coverage_lower_bound(7, 7, 1.0) == 1.0);
  CHECK(coverage_lower_bound(10, 3, 0.5) == doctest::Approx(0.15));
  CHECK_THROWS_AS(coverage_lower_bound(3, 4, 0.3), Error);
  CHECK_THROWS_AS(coverage_lower_bound(10, 0, 0.3), Error);
  CHECK_THROWS_AS(coverage_lower_bound(10, 3, 0.0), Error);
}

TEST_CASE("sampler parameter validation") {
  CHECK_THROWS_AS((SamplerParams{4, 0.3, 0.0}.validate()), Error);
  CHECK_THROWS_AS((SamplerParams{4, 1.3, 0.3}.validate()), Error);
  CHECK_THROWS_AS((SamplerParams{0, 0.3, 0.3}.validate()), Error);
  CHECK_NOTHROW((SamplerParams{4, 0.0, 1.0}.validate()));
}

TEST_CASE("exploration with epsilon = 1 draws only from the least-probed quarter") {
  const GateVector gates(40, false);
  std::vector<int> probes(40, 10);
  for (std::size_t i = 0; i < 10; ++i) probes[i * 4] = 0;
  for (std::uint64_t s = 0; s < 30; ++s) {
    Rng rng = make_rng(s, 2);
    const AuditBatch b = sample_audit_batch(gates, probes, SamplerParams{6, 0.3, 1.0}, rng);
    CHECK(b.exploration_ids == b.ids);
    for (std::size_t id : b.ids) CHECK(probes[id] == 0);
  }
}

TEST_CASE("property: size, uniqueness, ordering and determinism") {
  Rng meta = make_rng(77, 0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + meta() % 50;
    const std::size_t m = 1 + meta() % 20;
    GateVector gates(n);
    std::vector<int> probes(n);
    for (std::size_t i = 0; i < n; ++i) {
      gates[i] = meta() % 3 == 0;
      probes[i] = static_cast<int>(meta() % 5);
    }
    const SamplerParams p{m, (meta() % 11) / 10.0, 0.05 + (meta() % 20) / 20.0};
    Rng a = make_rng(trial, 9);
    Rng b = make_rng(trial, 9);
    const AuditBatch x = sample_audit_batch(gates, probes, p, a);
    const AuditBatch y = sample_audit_batch(gates, probes, p, b);
    CHECK(x.ids == y.ids);
    CHECK(x.exploration_ids == y.exploration_ids);
    CHECK(x.ids.size() == std::min(m, n));
    CHECK(std::is_sorted(x.ids.begin(), x.ids.end()));
    CHECK(std::set<std::size_t>(x.ids.begin(), x.ids.end()).size() == x.ids.size());
    CHECK(std::includes(x.ids.begin(), x.ids.end(), x.exploration_ids.begin(), x.exploration_ids.end()));
  }
}

TEST_CASE("property: frozen gates give every unit its coverage floor") {
  const std::size_t n = 30, m = 5;
  const double eps = 0.3;
  const int cycles = 1500;
  const double rho = coverage_lower_bound(n, m, eps);
  GateVector gates(n, false);
  for (std::size_t i = 0; i < n; i += 3) gates[i] = true;
  std::vector<int> probes(n, 0);
  for (int t = 0; t < cycles; ++t) {
    Rng rng = make_rng(21, static_cast<std::uint64_t>(t));
    for (std::size_t id : sample_audit_batch(gates, probes, SamplerParams{m, 0.3, eps}, rng).ids) ++probes[id];
  }
  const double floor = rho * cycles - 4.0 * std::sqrt(rho * (1 - rho) * cycles);
  for (int c : probes) CHECK(c >= floor);
}
