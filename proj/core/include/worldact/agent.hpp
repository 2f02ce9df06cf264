#pragma once

#include <map>
#include <string>
#include <vector>

#include "worldact/assets.hpp"
#include "worldact/image.hpp"
#include "worldact/restorer.hpp"
#include "worldact/scene.hpp"
#include "worldact/segmenter.hpp"

namespace worldact {

class VlmClient;
class SegmenterClient;
class InpaintClient;
class DepthClient;
struct Backends;

enum class EntryState { Discovered, Masked, Scored, Generated };
const char* entry_state_name(EntryState s);

struct InventoryEntry {
  std::string name;
  std::string category = "portable";  // portable | fixed
  int count = 1;
  std::string recognizability = "precise";  // precise | subtle | unrecognizable
  EntryState state = EntryState::Discovered;

  /// States only move forward through discovered -> masked -> scored -> generated.
  void advance(EntryState next);
};

struct AgentConfig {
  int keyframe_divisor = 12;     // sample every max(1, T/12) frames
  double dedup_iou = 0.8;
  int inpaint_dilation = 3;
  int keyframe_stride = 10;
  RenderOptions render;
};

struct AgentRecord {
  std::string prompt;
  int best_view = -1;
  MaskStack masks;
  std::vector<ViewScore> scores;
};

struct AgentOutput {
  std::vector<InventoryEntry> inventory;
  std::vector<AgentRecord> records;  // one per surviving portable entry
  std::vector<std::string> skipped;  // prompts with no mask in any frame
  InpaintResult inpainted;
  CompleteMaskSet complete_masks;
};

/// Parses the discovery payload (strict JSON protocol); free-text or
/// schema-violating responses raise ProtocolError with the payload attached.
std::vector<InventoryEntry> parse_inventory(const std::string& payload);

std::vector<InventoryEntry> discover_objects(const std::vector<ImageU8>& keyframes,
                                             VlmClient& vlm);

/// Per-frame masks for one entry; frames with empty masks are omitted.
MaskStack acquire_masks(const InventoryEntry& entry, const std::map<int, ImageU8>& frames,
                        const Trajectory& cams, SegmenterClient& segmenter);

/// Greedy duplicate removal: stacks whose per-frame mean IoU reaches the
/// threshold collapse to the one with the larger total area.
std::vector<MaskStack> dedup_masks(const std::vector<MaskStack>& stacks, double iou_threshold);

/// Fixed generic prompt list used by the discovery-free baseline.
std::vector<std::string> generic_prompt_list();

/// Full discovery workflow: discover, mask, score, pick best views, dedup,
/// inpaint. Deterministic under mock backends. With `prompt_override`
/// nonempty, discovery is skipped and the given prompts are used (baseline).
AgentOutput run_agent(const GaussianScene& scene, const Trajectory& cams,
                      const Backends& backends, const AgentConfig& cfg,
                      const std::vector<std::string>& prompt_override = {});

}  // namespace worldact
