#include "doctest.h"

#include <random>

#include "sea/adapter_space.hpp"
#include "sea/error.hpp"

using namespace sea;

namespace {

BackboneDesc two_layer() {
  BackboneDesc b;
  b.num_layers = 2;
  b.hidden_dims = {384, 768};
  b.param_count = 62'000'000;
  return b;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected sea::Error");
  return ErrorCode::kInvalidParams;
}

}  // namespace

TEST_CASE("default schema on two layers yields 74 units") {
  const AuditSpace space = build_audit_space(two_layer(), default_schema());
  CHECK(space.size() == 74);
  int lora = 0, adaptformer = 0, norm = 0;
  for (const auto& u : space.units()) {
    if (u.kind.family == Family::kLoRA) ++lora;
    if (u.kind.family == Family::kAdaptFormer) ++adaptformer;
    if (u.kind.family == Family::kAffineLN) ++norm;
  }
  CHECK(lora == 48);
  CHECK(adaptformer == 24);
  CHECK(norm == 2);
}

TEST_CASE("single norm template on one layer gives one unit") {
  BackboneDesc b;
  b.num_layers = 1;
  b.hidden_dims = {48};
  b.param_count = 1'000'000;
  AuditSchema schema;
  schema.templates = {{Family::kAffineLN, Topology::kNone, 0, Slot::kNorm}};
  const AuditSpace space = build_audit_space(b, schema);
  REQUIRE(space.size() == 1);
  CHECK(space[0].raw_params == 96);
}

TEST_CASE("incompatible templates are rejected") {
  AuditSchema schema;
  schema.templates = {{Family::kLoRA, Topology::kSA, 8, Slot::kNorm}};
  CHECK(code_of([&] { build_audit_space(two_layer(), schema); }) == ErrorCode::kIncompatibleTemplate);
  schema.templates = {{Family::kAffineLN, Topology::kNone, 0, Slot::kAttention}};
  CHECK(code_of([&] { build_audit_space(two_layer(), schema); }) == ErrorCode::kIncompatibleTemplate);
  CHECK(code_of([&] { build_audit_space(two_layer(), AuditSchema{}); }) == ErrorCode::kEmptySpace);
}

TEST_CASE("raw parameter counts") {
  CHECK(raw_param_count({Family::kLoRA, Topology::kSA, 8}, 768) == 12288);
  CHECK(raw_param_count({Family::kAdaptFormer, Topology::kSAPA, 4}, 768) == 12288);
  CHECK(raw_param_count({Family::kAdaptFormer, Topology::kSAPA, 4}, 768, true) == 6144);
  CHECK(raw_param_count({Family::kAffineLN, Topology::kNone, 0}, 48) == 96);

  SUBCASE("monotone in size and width") {
    for (Topology t : {Topology::kSA, Topology::kPA, Topology::kSAPA}) {
      for (int d : {16, 64, 384}) {
        CHECK(raw_param_count({Family::kLoRA, t, 2}, d) < raw_param_count({Family::kLoRA, t, 4}, d));
        CHECK(raw_param_count({Family::kLoRA, t, 4}, d) < raw_param_count({Family::kLoRA, t, 4}, 2 * d));
      }
    }
  }
}

TEST_CASE("ids follow layer, slot, family, topology, size order") {
  const AuditSpace space = build_audit_space(two_layer(), default_schema());
  auto key = [](const AdapterUnit& u) {
    return std::tuple(u.site.layer, static_cast<int>(u.site.slot), static_cast<int>(u.kind.family),
                      static_cast<int>(u.kind.topology), u.kind.size);
  };
  for (std::size_t i = 0; i < space.size(); ++i) {
    CHECK(space[i].id == i);
    if (i > 0) CHECK(key(space[i - 1]) < key(space[i]));
  }
}

TEST_CASE("costs are positive fractions and the full space exceeds small budgets") {
  const AuditSpace space = build_audit_space(two_layer(), default_schema());
  double sum = 0.0;
  for (const auto& u : space.units()) {
    CHECK(u.cost > 0.0);
    CHECK(u.cost < 1.0);
    CHECK(u.cost == doctest::Approx(static_cast<double>(u.raw_params) / 62e6));
    sum += u.cost;
  }
  CHECK(sum > 0.01);
}

TEST_CASE("initial gates follow the policy") {
  const AuditSpace off = build_audit_space(two_layer(), default_schema());
  const AuditSpace on = build_audit_space(two_layer(), default_schema(), InitialActive::kAll);
  for (std::size_t i = 0; i < off.size(); ++i) {
    CHECK_FALSE(off.initial_gates()[i]);
    CHECK(on.initial_gates()[i]);
  }
}

TEST_CASE("siblings share site, family and topology") {
  const AuditSpace space = build_audit_space(two_layer(), default_schema());
  const auto sib = space.siblings(0);
  CHECK(sib.size() == 4);
  for (std::size_t j : sib) {
    if (j == 0) continue;
    CHECK(space[j].site == space[0].site);
    CHECK(space[j].kind.family == space[0].kind.family);
    CHECK(space[j].kind.topology == space[0].kind.topology);
    CHECK(space[j].kind.size != space[0].kind.size);
  }
  REQUIRE(space.sibling_with_size(0, 16));
  CHECK(space[*space.sibling_with_size(0, 16)].kind.size == 16);
  CHECK_FALSE(space.sibling_with_size(0, 3));
  const std::size_t norm = 36;
  REQUIRE(space[norm].kind.family == Family::kAffineLN);
  CHECK_FALSE(space.resizable(norm));
  CHECK(space.resizable(0));
}

TEST_CASE("schema JSON round trip") {
  const auto doc = schema_to_json(two_layer(), default_schema());
  const auto [backbone, schema] = parse_schema_json(doc);
  CHECK(backbone.hidden_dims == two_layer().hidden_dims);
  CHECK(schema.templates.size() == default_schema().templates.size());
  const AuditSpace a = build_audit_space(two_layer(), default_schema());
  const AuditSpace b = build_audit_space(backbone, schema);
  CHECK(a.to_json() == b.to_json());

  nlohmann::json short_form = {{"backbone", {{"layers", 2}, {"hidden_dims", {384, 768}}, {"param_count", 62000000}}},
                               {"templates", "default"}};
  CHECK(parse_schema_json(short_form).second.templates.size() == 37);
  short_form["templates"] = "bogus";
  CHECK(code_of([&] { parse_schema_json(short_form); }) == ErrorCode::kInvalidConfig);
}

// ---------------------------------------------------------------------------

namespace {

BranchWeights unit_weights() { return {Matrix(2, 1, {1, 1}), Matrix(1, 2, {1, 1})}; }

}  // namespace

TEST_CASE("forward pass on hand-computed inputs") {
  const AdapterWeights w = AdapterWeights::shared(unit_weights());
  const std::vector<double> x{1, 0}, fx{2, 0};
  CHECK(adapter_forward(Topology::kSA, x, fx, w) == std::vector<double>{2, 2});
  CHECK(adapter_forward(Topology::kPA, x, fx, w) == std::vector<double>{1, 1});
  CHECK(adapter_forward(Topology::kSAPA, x, fx, w) == std::vector<double>{3, 3});

  const std::vector<double> x2{1, -1}, fx2{2, -2};
  for (Topology t : {Topology::kSA, Topology::kPA, Topology::kSAPA}) {
    CHECK(adapter_forward(t, x2, fx2, w) == std::vector<double>{0, 0});
  }
}

TEST_CASE("forward pass rejects inconsistent shapes") {
  const AdapterWeights w = AdapterWeights::shared(unit_weights());
  const std::vector<double> x{1, 0, 0}, fx{2, 0};
  CHECK(code_of([&] { adapter_forward(Topology::kPA, x, fx, w); }) == ErrorCode::kShapeMismatch);
  CHECK(code_of([&] { Matrix(2, 2, {1, 2, 3}); }) == ErrorCode::kShapeMismatch);
}

TEST_CASE("property: composite equals the sum of branches and is positively homogeneous") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> g(0.0, 1.0);
  auto random_matrix = [&](std::size_t r, std::size_t c) {
    std::vector<double> v(r * c);
    for (double& e : v) e = g(rng);
    return Matrix(r, c, v);
  };
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t d_model = 1 + trial % 7, d = 1 + trial % 3;
    const AdapterWeights w{{random_matrix(d_model, d), random_matrix(d, d_model)},
                           {random_matrix(d_model, d), random_matrix(d, d_model)}};
    std::vector<double> x(d_model), fx(d_model);
    for (auto& e : x) e = g(rng);
    for (auto& e : fx) e = g(rng);
    const auto sa = adapter_forward(Topology::kSA, x, fx, w);
    const auto pa = adapter_forward(Topology::kPA, x, fx, w);
    const auto sapa = adapter_forward(Topology::kSAPA, x, fx, w);
    const double t = 0.1 + 3.0 * std::uniform_real_distribution<double>(0, 1)(rng);
    std::vector<double> tx(x), tfx(fx);
    for (auto& e : tx) e *= t;
    for (auto& e : tfx) e *= t;
    for (Topology top : {Topology::kSA, Topology::kPA, Topology::kSAPA}) {
      const auto base = adapter_forward(top, x, fx, w);
      const auto scaled = adapter_forward(top, tx, tfx, w);
      for (std::size_t k = 0; k < d_model; ++k) CHECK(scaled[k] == doctest::Approx(t * base[k]).epsilon(1e-9));
    }
    for (std::size_t k = 0; k < d_model; ++k) CHECK(sapa[k] == doctest::Approx(sa[k] + pa[k]).epsilon(1e-12));
  }
}
