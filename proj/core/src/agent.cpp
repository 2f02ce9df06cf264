#include "worldact/agent.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "worldact/backends.hpp"
#include "worldact/errors.hpp"
#include "worldact/renderer.hpp"

namespace worldact {

const char* entry_state_name(EntryState s) {
  switch (s) {
    case EntryState::Discovered: return "discovered";
    case EntryState::Masked: return "masked";
    case EntryState::Scored: return "scored";
    default: return "generated";
  }
}

void InventoryEntry::advance(EntryState next) {
  if (static_cast<int>(next) < static_cast<int>(state))
    throw ArgumentError(std::string("inventory entry '") + name + "': state cannot move from " +
                        entry_state_name(state) + " back to " + entry_state_name(next));
  state = next;
}

std::vector<InventoryEntry> parse_inventory(const std::string& payload) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(payload);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("discovery response is not JSON: ") + e.what(), payload);
  }
  if (!j.is_object() || !j.contains("objects") || !j["objects"].is_array())
    throw ProtocolError("discovery response lacks an 'objects' array", payload);

  std::vector<InventoryEntry> out;
  for (const auto& jo : j["objects"]) {
    if (!jo.is_object() || !jo.contains("name") || !jo["name"].is_string())
      throw ProtocolError("discovery entry lacks a string 'name'", payload);
    InventoryEntry e;
    e.name = jo["name"];
    e.category = jo.value("category", std::string("portable"));
    if (e.category != "portable" && e.category != "fixed")
      throw ProtocolError("discovery entry category must be portable|fixed", payload);
    e.count = jo.value("count", 1);
    if (e.count < 1) throw ProtocolError("discovery entry count must be positive", payload);
    e.recognizability = jo.value("recognizability", std::string("precise"));
    // Duplicate names across keyframes collapse, counts aggregate.
    auto it = std::find_if(out.begin(), out.end(),
                           [&](const InventoryEntry& x) { return x.name == e.name; });
    if (it != out.end())
      it->count += e.count;
    else
      out.push_back(std::move(e));
  }
  return out;
}

std::vector<InventoryEntry> discover_objects(const std::vector<ImageU8>& keyframes,
                                             VlmClient& vlm) {
  if (keyframes.empty()) throw ArgumentError("discover_objects: no keyframes");
  return parse_inventory(vlm.discover(keyframes));
}

MaskStack acquire_masks(const InventoryEntry& entry, const std::map<int, ImageU8>& frames,
                        const Trajectory& cams, SegmenterClient& segmenter) {
  if (entry.category != "portable")
    throw ArgumentError("acquire_masks: entry '" + entry.name + "' is not portable");
  MaskStack stack;
  for (const auto& [t, frame] : frames) {
    const CameraFrame* cam = cams.find(t);
    if (!cam) throw ArgumentError("acquire_masks: frame " + std::to_string(t) +
                                  " missing from trajectory");
    Mask m = segmenter.segment(frame, *cam, entry.name);
    if (m.height() != cam->height || m.width() != cam->width)
      throw DataError("acquire_masks: mask dims mismatch at frame " + std::to_string(t));
    if (mask_area(m) > 0) stack.masks[t] = std::move(m);
  }
  return stack;
}

namespace {

double stack_mean_iou(const MaskStack& a, const MaskStack& b) {
  // Mean per-frame IoU over the union of the two view sets; a frame missing
  // from one stack counts as an empty mask there.
  std::vector<int> frames;
  for (const auto& [t, _] : a.masks) frames.push_back(t);
  for (const auto& [t, _] : b.masks)
    if (!a.masks.count(t)) frames.push_back(t);
  if (frames.empty()) return 0;
  double sum = 0;
  for (int t : frames) {
    auto ia = a.masks.find(t), ib = b.masks.find(t);
    if (ia == a.masks.end() || ib == b.masks.end()) continue;  // IoU 0
    sum += mask_iou(ia->second, ib->second);
  }
  return sum / static_cast<double>(frames.size());
}

size_t stack_total_area(const MaskStack& s) {
  size_t n = 0;
  for (const auto& [_, m] : s.masks) n += mask_area(m);
  return n;
}

}  // namespace

namespace {

std::vector<size_t> dedup_survivors(const std::vector<MaskStack>& stacks,
                                    double iou_threshold) {
  if (iou_threshold <= 0 || iou_threshold > 1)
    throw ArgumentError("dedup_masks: threshold must be in (0, 1]");
  std::vector<bool> alive(stacks.size(), true);
  for (size_t i = 0; i < stacks.size(); ++i) {
    if (!alive[i]) continue;
    for (size_t j = i + 1; j < stacks.size(); ++j) {
      if (!alive[j]) continue;
      if (stack_mean_iou(stacks[i], stacks[j]) >= iou_threshold) {
        if (stack_total_area(stacks[j]) > stack_total_area(stacks[i])) {
          alive[i] = false;
          break;
        }
        alive[j] = false;
      }
    }
  }
  std::vector<size_t> out;
  for (size_t i = 0; i < stacks.size(); ++i)
    if (alive[i]) out.push_back(i);
  return out;
}

}  // namespace

std::vector<MaskStack> dedup_masks(const std::vector<MaskStack>& stacks, double iou_threshold) {
  std::vector<MaskStack> out;
  for (size_t i : dedup_survivors(stacks, iou_threshold)) out.push_back(stacks[i]);
  return out;
}

std::vector<std::string> generic_prompt_list() {
  return {"chair", "sofa",  "table",  "lamp",   "book",   "cup",    "bottle",
          "plant", "clock", "vase",   "laptop", "pillow", "shoe",   "basket",
          "mirror", "phone", "remote", "towel",  "mug",    "candle"};
}

AgentOutput run_agent(const GaussianScene& scene, const Trajectory& cams,
                      const Backends& backends, const AgentConfig& cfg,
                      const std::vector<std::string>& prompt_override) {
  if (!backends.vlm || !backends.segmenter || !backends.inpainter || !backends.depth)
    throw ArgumentError("run_agent: missing backend clients");
  if (cams.frames.empty()) throw ArgumentError("run_agent: empty trajectory");

  AgentOutput out;

  // Step 1: render the exploration video.
  std::map<int, ImageU8> frames;
  for (const auto& cam : cams.frames)
    frames[cam.frame_index] = quantize_to_u8(render(scene, cam, cfg.render).color);

  // Step 2: keyframe sampling + discovery.
  int total = static_cast<int>(cams.frames.size());
  int stride = std::max(1, total / std::max(1, cfg.keyframe_divisor));
  std::vector<ImageU8> keyframes;
  for (int i = 0; i < total; i += stride)
    keyframes.push_back(frames.at(cams.frames[static_cast<size_t>(i)].frame_index));

  if (prompt_override.empty()) {
    try {
      out.inventory = discover_objects(keyframes, *backends.vlm);
    } catch (const TransportError& e) {
      throw TransportError(std::string("agent discovery: ") + e.what());
    }
  } else {
    for (const auto& name : prompt_override) {
      InventoryEntry e;
      e.name = name;
      out.inventory.push_back(std::move(e));
    }
  }

  // Steps 3-7: per-portable mask acquisition, scoring, best-view selection.
  std::vector<AgentRecord> records;
  for (auto& entry : out.inventory) {
    if (entry.category != "portable") continue;
    MaskStack stack;
    try {
      stack = acquire_masks(entry, frames, cams, *backends.segmenter);
    } catch (const TransportError& e) {
      throw TransportError("agent masks for '" + entry.name + "': " + e.what());
    }
    if (stack.masks.empty()) {
      out.skipped.push_back(entry.name);
      continue;
    }
    entry.advance(EntryState::Masked);

    AgentRecord rec;
    rec.prompt = entry.name;
    rec.masks = std::move(stack);
    rec.scores = score_views(0, rec.masks, frames, *backends.vlm);
    entry.advance(EntryState::Scored);
    rec.best_view = select_best_view(rec.scores);
    records.push_back(std::move(rec));
  }

  // Step 8: duplicate filtering, larger stack wins.
  std::vector<MaskStack> stacks;
  for (const auto& r : records) stacks.push_back(r.masks);
  for (size_t i : dedup_survivors(stacks, cfg.dedup_iou)) out.records.push_back(records[i]);

  // Step 9: fused removal masks + inpainting over the surviving objects.
  if (!out.records.empty()) {
    out.complete_masks.dilation_radius = cfg.inpaint_dilation;
    for (const auto& cam : cams.frames) {
      Mask fused(cam.height, cam.width, 1);
      for (const auto& r : out.records) {
        auto it = r.masks.masks.find(cam.frame_index);
        if (it == r.masks.masks.end()) continue;
        for (size_t i = 0; i < fused.size(); ++i)
          fused.data()[i] = fused.data()[i] || it->second.data()[i];
      }
      out.complete_masks.masks[cam.frame_index] = dilate(fused, cfg.inpaint_dilation);
    }
    RestoreConfig rcfg;
    rcfg.dilation_radius = cfg.inpaint_dilation;
    rcfg.keyframe_stride = cfg.keyframe_stride;
    rcfg.render = cfg.render;
    out.inpainted = inpaint_background(frames, out.complete_masks, cams,
                                       *backends.inpainter, *backends.depth, rcfg);
  }
  return out;
}

}  // namespace worldact
