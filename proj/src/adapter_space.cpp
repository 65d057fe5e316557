#include "sea/adapter_space.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <tuple>

#include "sea/error.hpp"

namespace sea {

std::string_view to_string(Family f) {
  switch (f) {
    case Family::kLoRA: return "LoRA";
    case Family::kAdaptFormer: return "AdaptFormer";
    case Family::kAffineLN: return "AffineLN";
  }
  return "?";
}

std::string_view to_string(Topology t) {
  switch (t) {
    case Topology::kSA: return "SA";
    case Topology::kPA: return "PA";
    case Topology::kSAPA: return "SAPA";
    case Topology::kNone: return "None";
  }
  return "?";
}

std::string_view to_string(Slot s) {
  switch (s) {
    case Slot::kAttention: return "Attention";
    case Slot::kFeedForward: return "FeedForward";
    case Slot::kNorm: return "Norm";
  }
  return "?";
}

Family parse_family(std::string_view s) {
  if (s == "LoRA") return Family::kLoRA;
  if (s == "AdaptFormer") return Family::kAdaptFormer;
  if (s == "AffineLN") return Family::kAffineLN;
  throw Error(ErrorCode::kInvalidConfig, "unknown adapter family '" + std::string(s) + "'");
}

Topology parse_topology(std::string_view s) {
  if (s == "SA") return Topology::kSA;
  if (s == "PA") return Topology::kPA;
  if (s == "SAPA") return Topology::kSAPA;
  if (s == "None") return Topology::kNone;
  throw Error(ErrorCode::kInvalidConfig, "unknown topology '" + std::string(s) + "'");
}

Slot parse_slot(std::string_view s) {
  if (s == "Attention") return Slot::kAttention;
  if (s == "FeedForward") return Slot::kFeedForward;
  if (s == "Norm") return Slot::kNorm;
  throw Error(ErrorCode::kInvalidConfig, "unknown slot '" + std::string(s) + "'");
}

void BackboneDesc::validate() const {
  if (num_layers <= 0) throw Error(ErrorCode::kInvalidParams, "backbone needs at least one layer");
  if (hidden_dims.size() != static_cast<std::size_t>(num_layers)) {
    throw Error(ErrorCode::kInvalidParams, "hidden_dims length must equal num_layers");
  }
  for (int d : hidden_dims) {
    if (d <= 0) throw Error(ErrorCode::kInvalidParams, "hidden dims must be positive");
  }
  if (param_count <= 0) throw Error(ErrorCode::kInvalidParams, "param_count must be positive");
  if (norm_params_per_layer < 0) {
    throw Error(ErrorCode::kInvalidParams, "norm_params_per_layer must be non-negative");
  }
}

AuditSchema default_schema() {
  AuditSchema schema;
  constexpr Topology kTopologies[] = {Topology::kSA, Topology::kPA, Topology::kSAPA};
  for (Topology t : kTopologies) {
    for (int r : {2, 4, 8, 16}) schema.templates.push_back({Family::kLoRA, t, r, Slot::kAttention});
  }
  for (Topology t : kTopologies) {
    for (int r : {2, 4, 8, 16}) schema.templates.push_back({Family::kLoRA, t, r, Slot::kFeedForward});
    for (int d : {4, 8, 16, 32}) {
      schema.templates.push_back({Family::kAdaptFormer, t, d, Slot::kFeedForward});
    }
  }
  schema.templates.push_back({Family::kAffineLN, Topology::kNone, 0, Slot::kNorm});
  return schema;
}

bool slot_accepts(Family family, Slot slot) {
  switch (family) {
    case Family::kLoRA:
    case Family::kAdaptFormer:
      return slot != Slot::kNorm;
    case Family::kAffineLN:
      return slot == Slot::kNorm;
  }
  return false;
}

std::int64_t raw_param_count(const AdapterKind& kind, int hidden_dim, bool shared_sapa_weights) {
  const std::int64_t d = hidden_dim;
  if (kind.family == Family::kAffineLN) return 2 * d;
  const std::int64_t pair = 2 * d * kind.size;
  if (kind.topology == Topology::kSAPA && !shared_sapa_weights) return 2 * pair;
  return pair;
}

namespace {

void check_template(const AdapterTemplate& t) {
  auto fail = [&](const std::string& why) {
    throw Error(ErrorCode::kIncompatibleTemplate,
                std::string(to_string(t.family)) + "/" + std::string(to_string(t.topology)) + "/" +
                    std::to_string(t.size) + " on " + std::string(to_string(t.slot)) + ": " + why);
  };
  if (!slot_accepts(t.family, t.slot)) fail("slot does not accept this family");
  if (t.family == Family::kAffineLN) {
    if (t.topology != Topology::kNone || t.size != 0) fail("AffineLN has no topology and size 0");
  } else {
    if (t.topology == Topology::kNone) fail("adapter family needs SA, PA or SAPA");
    if (t.size <= 0) fail("size must be positive");
  }
}

auto order_key(const AdapterUnit& u) {
  return std::make_tuple(u.site.layer, static_cast<int>(u.site.slot),
                         static_cast<int>(u.kind.family), static_cast<int>(u.kind.topology),
                         u.kind.size);
}

}  // namespace

AuditSpace::AuditSpace(BackboneDesc backbone, std::vector<AdapterUnit> units,
                       bool shared_sapa_weights)
    : backbone_(std::move(backbone)), units_(std::move(units)),
      shared_sapa_weights_(shared_sapa_weights) {
  costs_.reserve(units_.size());
  for (const auto& u : units_) costs_.push_back(u.cost);
}

GateVector AuditSpace::initial_gates() const {
  GateVector g(units_.size(), false);
  for (const auto& u : units_) g[u.id] = u.gate;
  return g;
}

std::vector<std::size_t> AuditSpace::siblings(std::size_t id) const {
  const AdapterUnit& ref = units_.at(id);
  std::vector<std::size_t> out;
  for (const auto& u : units_) {
    if (u.site == ref.site && u.kind.family == ref.kind.family &&
        u.kind.topology == ref.kind.topology) {
      out.push_back(u.id);
    }
  }
  return out;
}

std::optional<std::size_t> AuditSpace::sibling_with_size(std::size_t id, int size) const {
  for (std::size_t s : siblings(id)) {
    if (units_[s].kind.size == size) return s;
  }
  return std::nullopt;
}

bool AuditSpace::resizable(std::size_t id) const {
  return units_.at(id).kind.family != Family::kAffineLN && siblings(id).size() > 1;
}

nlohmann::json AuditSpace::to_json() const {
  nlohmann::json units = nlohmann::json::array();
  for (const auto& u : units_) {
    units.push_back({{"id", u.id},
                     {"family", to_string(u.kind.family)},
                     {"topology", to_string(u.kind.topology)},
                     {"size", u.kind.size},
                     {"layer", u.site.layer},
                     {"slot", to_string(u.site.slot)},
                     {"hidden_dim", u.hidden_dim},
                     {"raw_params", u.raw_params},
                     {"cost", u.cost},
                     {"gate", u.gate}});
  }
  return {{"backbone",
           {{"layers", backbone_.num_layers},
            {"hidden_dims", backbone_.hidden_dims},
            {"param_count", backbone_.param_count}}},
          {"shared_sapa_weights", shared_sapa_weights_},
          {"units", units}};
}

AuditSpace build_audit_space(const BackboneDesc& backbone, const AuditSchema& schema,
                             InitialActive initial) {
  backbone.validate();
  if (schema.templates.empty()) throw Error(ErrorCode::kEmptySpace, "schema has no templates");
  for (const auto& t : schema.templates) check_template(t);

  std::vector<AdapterUnit> units;
  for (int layer = 0; layer < backbone.num_layers; ++layer) {
    const int dim = backbone.hidden_dims[static_cast<std::size_t>(layer)];
    for (const auto& t : schema.templates) {
      AdapterUnit u;
      u.kind = {t.family, t.topology, t.size};
      u.site = {layer, t.slot};
      u.hidden_dim = dim;
      u.raw_params = raw_param_count(u.kind, dim, schema.shared_sapa_weights);
      if (t.family == Family::kAffineLN && backbone.norm_params_per_layer > 0 &&
          u.raw_params > backbone.norm_params_per_layer) {
        throw Error(ErrorCode::kInvalidParams, "Affine-LN exceeds the layer's norm parameters");
      }
      if (u.raw_params >= backbone.param_count) {
        throw Error(ErrorCode::kInvalidParams, "adapter cost must be below the backbone size");
      }
      u.cost = static_cast<double>(u.raw_params) / static_cast<double>(backbone.param_count);
      u.gate = initial == InitialActive::kAll;
      units.push_back(u);
    }
  }
  if (units.empty()) throw Error(ErrorCode::kEmptySpace, "audit space has no units");

  std::stable_sort(units.begin(), units.end(),
                   [](const AdapterUnit& a, const AdapterUnit& b) { return order_key(a) < order_key(b); });
  for (std::size_t i = 1; i < units.size(); ++i) {
    if (order_key(units[i]) == order_key(units[i - 1])) {
      throw Error(ErrorCode::kInvalidParams, "schema contains duplicate templates");
    }
  }
  for (std::size_t i = 0; i < units.size(); ++i) units[i].id = i;
  return AuditSpace(backbone, std::move(units), schema.shared_sapa_weights);
}

std::pair<BackboneDesc, AuditSchema> parse_schema_json(const nlohmann::json& doc) {
  try {
    BackboneDesc backbone;
    const auto& b = doc.at("backbone");
    backbone.num_layers = b.at("layers").get<int>();
    backbone.hidden_dims = b.at("hidden_dims").get<std::vector<int>>();
    backbone.param_count = b.at("param_count").get<std::int64_t>();
    backbone.norm_params_per_layer = b.value("norm_params_per_layer", std::int64_t{0});

    AuditSchema schema;
    const auto& t = doc.at("templates");
    if (t.is_string()) {
      if (t.get<std::string>() != "default") {
        throw Error(ErrorCode::kInvalidConfig, "templates must be an array or \"default\"");
      }
      schema = default_schema();
    } else {
      for (const auto& item : t) {
        schema.templates.push_back({parse_family(item.at("family").get<std::string>()),
                                    parse_topology(item.at("topology").get<std::string>()),
                                    item.at("size").get<int>(),
                                    parse_slot(item.at("slot").get<std::string>())});
      }
    }
    schema.shared_sapa_weights = doc.value("shared_sapa_weights", false);
    return {backbone, schema};
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("audit-space schema: ") + e.what());
  }
}

nlohmann::json schema_to_json(const BackboneDesc& backbone, const AuditSchema& schema) {
  nlohmann::json templates = nlohmann::json::array();
  for (const auto& t : schema.templates) {
    templates.push_back({{"family", to_string(t.family)},
                         {"topology", to_string(t.topology)},
                         {"size", t.size},
                         {"slot", to_string(t.slot)}});
  }
  nlohmann::json b = {{"layers", backbone.num_layers},
                      {"hidden_dims", backbone.hidden_dims},
                      {"param_count", backbone.param_count}};
  if (backbone.norm_params_per_layer > 0) b["norm_params_per_layer"] = backbone.norm_params_per_layer;
  return {{"backbone", b}, {"templates", templates},
          {"shared_sapa_weights", schema.shared_sapa_weights}};
}

// ---------------------------------------------------------------------------

Matrix::Matrix(std::size_t r, std::size_t c, std::vector<double> values)
    : rows(r), cols(c), data(std::move(values)) {
  if (data.size() != rows * cols) {
    throw Error(ErrorCode::kShapeMismatch, "matrix data does not match its shape");
  }
}

std::vector<double> branch_forward(std::span<const double> in, const BranchWeights& w) {
  const std::size_t dim = in.size();
  if (w.down.rows != dim || w.up.cols != dim || w.down.cols != w.up.rows) {
    throw Error(ErrorCode::kShapeMismatch, "branch weights are not D x d and d x D");
  }
  const std::size_t bottleneck = w.down.cols;
  std::vector<double> hidden(bottleneck, 0.0);
  for (std::size_t j = 0; j < bottleneck; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < dim; ++i) acc += in[i] * w.down(i, j);
    hidden[j] = acc > 0.0 ? acc : 0.0;
  }
  std::vector<double> out(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < bottleneck; ++j) acc += hidden[j] * w.up(j, k);
    out[k] = acc;
  }
  return out;
}

std::vector<double> adapter_forward(Topology topology, std::span<const double> x,
                                    std::span<const double> fx, const AdapterWeights& w) {
  if (x.size() != fx.size()) throw Error(ErrorCode::kShapeMismatch, "x and F(x) differ in length");
  switch (topology) {
    case Topology::kSA:
      return branch_forward(fx, w.serial);
    case Topology::kPA:
      return branch_forward(x, w.parallel);
    case Topology::kSAPA: {
      auto y = branch_forward(fx, w.serial);
      const auto p = branch_forward(x, w.parallel);
      for (std::size_t i = 0; i < y.size(); ++i) y[i] += p[i];
      return y;
    }
    case Topology::kNone:
      break;
  }
  throw Error(ErrorCode::kInvalidParams, "adapter_forward needs SA, PA or SAPA");
}

}  // namespace sea
