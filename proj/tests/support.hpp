#pragma once

#include "sea/loop_driver.hpp"

namespace sea::testing {

// Two layers of width 64 with 9 units each (18 total), small enough for the
// exhaustive optimum.
inline RunConfig small_config(int shots = 1, std::uint64_t seed = 1) {
  RunConfig c = default_run_config(shots, seed);
  c.backbone.num_layers = 2;
  c.backbone.hidden_dims = {64, 64};
  c.backbone.param_count = 200'000;
  c.schema.templates.clear();
  for (int r : {2, 4, 8}) c.schema.templates.push_back({Family::kLoRA, Topology::kPA, r, Slot::kAttention});
  for (int r : {2, 4}) c.schema.templates.push_back({Family::kLoRA, Topology::kSAPA, r, Slot::kAttention});
  for (int d : {4, 8, 16}) {
    c.schema.templates.push_back({Family::kAdaptFormer, Topology::kSA, d, Slot::kFeedForward});
  }
  c.schema.templates.push_back({Family::kAffineLN, Topology::kNone, 0, Slot::kNorm});
  c.allocator.p_max = 0.012;
  c.sampler.audit_batch = 6;
  c.oracle.synthetic.utility_scale = 0.05;
  return c;
}

}  // namespace sea::testing
