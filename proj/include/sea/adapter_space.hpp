#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sea/common.hpp"

namespace sea {

enum class Family { kLoRA, kAdaptFormer, kAffineLN };
enum class Topology { kSA, kPA, kSAPA, kNone };
enum class Slot { kAttention, kFeedForward, kNorm };

std::string_view to_string(Family f);
std::string_view to_string(Topology t);
std::string_view to_string(Slot s);
Family parse_family(std::string_view s);
Topology parse_topology(std::string_view s);
Slot parse_slot(std::string_view s);

struct AdapterKind {
  Family family = Family::kLoRA;
  Topology topology = Topology::kSA;
  int size = 0;  // LoRA rank or AdaptFormer bottleneck; 0 for AffineLN

  bool operator==(const AdapterKind&) const = default;
};

struct Site {
  int layer = 0;
  Slot slot = Slot::kAttention;

  bool operator==(const Site&) const = default;
};

struct AdapterUnit {
  std::size_t id = 0;
  AdapterKind kind;
  Site site;
  int hidden_dim = 0;
  std::int64_t raw_params = 0;
  double cost = 0.0;  // raw_params / backbone_param_count
  bool gate = false;  // initial gate
};

struct BackboneDesc {
  int num_layers = 0;
  std::vector<int> hidden_dims;
  std::int64_t param_count = 0;
  std::int64_t norm_params_per_layer = 0;  // 0 = derive as 2*D

  void validate() const;
};

struct AdapterTemplate {
  Family family = Family::kLoRA;
  Topology topology = Topology::kSA;
  int size = 0;
  Slot slot = Slot::kAttention;
};

struct AuditSchema {
  std::vector<AdapterTemplate> templates;
  // When set, SAPA reuses one down/up pair across both branches.
  bool shared_sapa_weights = false;
};

enum class InitialActive { kNone, kAll };

// Attention: LoRA {2,4,8,16} x {SA,PA,SAPA}; feed-forward: the same LoRA set
// plus AdaptFormer {4,8,16,32} x {SA,PA,SAPA}; norm: Affine-LN.
AuditSchema default_schema();

bool slot_accepts(Family family, Slot slot);

std::int64_t raw_param_count(const AdapterKind& kind, int hidden_dim,
                             bool shared_sapa_weights = false);

// The enumerated audit space. Immutable once built.
class AuditSpace {
 public:
  AuditSpace(BackboneDesc backbone, std::vector<AdapterUnit> units, bool shared_sapa_weights);

  std::size_t size() const { return units_.size(); }
  const AdapterUnit& operator[](std::size_t id) const { return units_[id]; }
  const std::vector<AdapterUnit>& units() const { return units_; }
  const BackboneDesc& backbone() const { return backbone_; }
  bool shared_sapa_weights() const { return shared_sapa_weights_; }

  std::span<const double> costs() const { return costs_; }
  GateVector initial_gates() const;

  // Units sharing site, family and topology (the unit itself included).
  std::vector<std::size_t> siblings(std::size_t id) const;
  std::optional<std::size_t> sibling_with_size(std::size_t id, int size) const;
  bool resizable(std::size_t id) const;

  nlohmann::json to_json() const;

 private:
  BackboneDesc backbone_;
  std::vector<AdapterUnit> units_;
  std::vector<double> costs_;
  bool shared_sapa_weights_ = false;
};

AuditSpace build_audit_space(const BackboneDesc& backbone, const AuditSchema& schema,
                             InitialActive initial = InitialActive::kNone);

// {backbone: {layers, hidden_dims, param_count[, norm_params_per_layer]},
//  templates: [{family, topology, size, slot}, ...] | "default",
//  shared_sapa_weights?}
std::pair<BackboneDesc, AuditSchema> parse_schema_json(const nlohmann::json& doc);
nlohmann::json schema_to_json(const BackboneDesc& backbone, const AuditSchema& schema);

// ---------------------------------------------------------------------------
// Reference forward pass for the three adapter topologies.

// Row-major dense matrix.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, std::vector<double> values);
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct BranchWeights {
  Matrix down;  // D x d
  Matrix up;    // d x D
};

// SA reads `serial`, PA reads `parallel`, SAPA sums both branches.
struct AdapterWeights {
  BranchWeights serial;
  BranchWeights parallel;

  static AdapterWeights shared(const BranchWeights& w) { return {w, w}; }
};

// y = ReLU(in * W_down) * W_up
std::vector<double> branch_forward(std::span<const double> in, const BranchWeights& w);

std::vector<double> adapter_forward(Topology topology, std::span<const double> x,
                                    std::span<const double> fx, const AdapterWeights& w);

}  // namespace sea
