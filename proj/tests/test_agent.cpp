#include <algorithm>
#include <memory>

#include "doctest.h"
#include "helpers.hpp"
#include "worldact/agent.hpp"
#include "worldact/backends.hpp"
#include "worldact/errors.hpp"
#include "worldact/renderer.hpp"
#include "worldact/synth.hpp"

using namespace worldact;

TEST_SUITE_BEGIN("agent");

TEST_CASE("parse_inventory accepts the strict schema and collapses duplicates") {
  std::string payload = R"({"objects": [
    {"name": "chair", "category": "portable", "count": 1, "recognizability": "precise"},
    {"name": "lamp", "category": "fixed", "count": 1, "recognizability": "subtle"},
    {"name": "chair", "category": "portable", "count": 2, "recognizability": "precise"}
  ]})";
  std::vector<InventoryEntry> inv = parse_inventory(payload);
  REQUIRE(inv.size() == 2);
  auto chair = std::find_if(inv.begin(), inv.end(),
                            [](const InventoryEntry& e) { return e.name == "chair"; });
  REQUIRE(chair != inv.end());
  CHECK(chair->count == 3);
  CHECK(chair->category == "portable");
  CHECK(chair->state == EntryState::Discovered);
}

TEST_CASE("parse_inventory rejects free text and schema violations with the payload attached") {
  auto expect_protocol = [](const std::string& payload) {
    try {
      parse_inventory(payload);
      FAIL("expected ProtocolError for: ", payload);
    } catch (const ProtocolError& e) {
      CHECK(e.raw_payload == payload);
    }
  };
  expect_protocol("Sure! Here are the objects I can see: a chair and a lamp.");
  expect_protocol(R"({"items": []})");
  expect_protocol(R"({"objects": [{"name": "x", "category": "huge", "count": 1,)"
                  R"( "recognizability": "precise"}]})");
  expect_protocol(R"({"objects": [{"name": "x", "category": "portable", "count": 0,)"
                  R"( "recognizability": "precise"}]})");
  expect_protocol(R"({"objects": [{"category": "portable", "count": 1,)"
                  R"( "recognizability": "precise"}]})");
}

TEST_CASE("entry state only advances forward") {
  InventoryEntry e;
  e.advance(EntryState::Masked);
  CHECK(e.state == EntryState::Masked);
  e.advance(EntryState::Scored);
  e.advance(EntryState::Generated);
  CHECK(e.state == EntryState::Generated);
  CHECK_THROWS_AS(e.advance(EntryState::Discovered), ArgumentError);
}

TEST_CASE("acquire_masks omits views with empty masks") {
  auto truth = std::make_shared<SynthResult>(generate(default_room_spec()));
  Backends be = make_mock_backends(truth);
  std::map<int, ImageU8> frames;
  for (const auto& cam : truth->trajectory.frames)
    frames[cam.frame_index] = quantize_to_u8(render(truth->scene, cam).color);

  InventoryEntry ghost;
  ghost.name = "nonexistent-thing";
  MaskStack empty = acquire_masks(ghost, frames, truth->trajectory, *be.segmenter);
  CHECK(empty.masks.empty());

  InventoryEntry real;
  real.name = truth->objects.front().spec.name;
  MaskStack ms = acquire_masks(real, frames, truth->trajectory, *be.segmenter);
  CHECK(!ms.masks.empty());
  for (const auto& [t, m] : ms.masks) CHECK(mask_area(m) > 0);
}

TEST_CASE("dedup keeps the larger of two overlapping stacks") {
  Mask small(16, 16, 1), big(16, 16, 1);
  for (int r = 4; r < 10; ++r)
    for (int c = 4; c < 10; ++c) big.at(r, c) = 1;
  for (int r = 4; r < 9; ++r)
    for (int c = 4; c < 10; ++c) small.at(r, c) = 1;

  MaskStack a, b, c;
  a.object_id = 1;
  a.masks[0] = big;
  b.object_id = 2;
  b.masks[0] = small;  // IoU vs big = 5/6 > 0.8 -> duplicate
  c.object_id = 3;
  Mask far(16, 16, 1);
  far.at(14, 14) = 1;
  c.masks[0] = far;

  std::vector<MaskStack> out = dedup_masks({a, b, c}, 0.8);
  REQUIRE(out.size() == 2);
  CHECK(out[0].object_id == 1);  // larger area survives
  CHECK(out[1].object_id == 3);
}

TEST_CASE("generic prompt list is fixed and misses the room's odd objects") {
  std::vector<std::string> prompts = generic_prompt_list();
  CHECK(prompts.size() >= 10);
  CHECK(std::find(prompts.begin(), prompts.end(), "jar") == prompts.end());
  CHECK(std::find(prompts.begin(), prompts.end(), "ball") == prompts.end());
  CHECK(prompts == generic_prompt_list());  // stable across calls
}

TEST_CASE("run_agent discovers, masks, scores and inpaints every portable object") {
  auto truth = std::make_shared<SynthResult>(generate(default_room_spec()));
  Backends be = make_mock_backends(truth);
  AgentConfig cfg;
  AgentOutput out = run_agent(truth->scene, truth->trajectory, be, cfg);

  size_t portable = 0;
  for (const auto& o : truth->objects) portable += o.spec.portable && o.spec.discoverable;
  CHECK(out.records.size() == portable);
  for (const auto& rec : out.records) {
    CHECK(truth->find_object(rec.prompt) != nullptr);
    CHECK(!rec.masks.masks.empty());
    CHECK(!rec.scores.empty());
    CHECK(rec.best_view >= 0);
    // the chosen view is one of the mask stack's views
    CHECK(rec.masks.masks.count(rec.best_view) == 1);
  }
  CHECK(!out.inpainted.frames.empty());
  CHECK(!out.complete_masks.masks.empty());
  // the inventory reflects the mock discovery payload
  CHECK(out.inventory.size() >= out.records.size());
}

TEST_CASE("prompt_override skips discovery and uses the given prompts") {
  auto truth = std::make_shared<SynthResult>(generate(default_room_spec()));
  Backends be = make_mock_backends(truth);
  AgentConfig cfg;
  AgentOutput out = run_agent(truth->scene, truth->trajectory, be, cfg,
                              {"jar", "no-such-prompt"});
  REQUIRE(out.records.size() == 1);
  CHECK(out.records[0].prompt == "jar");
  REQUIRE(out.skipped.size() == 1);
  CHECK(out.skipped[0] == "no-such-prompt");
}

TEST_SUITE_END();
