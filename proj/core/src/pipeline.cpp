#include "worldact/pipeline.hpp"

#include <chrono>
#include <fstream>
#include <functional>

#include <nlohmann/json.hpp>

#include "worldact/errors.hpp"
#include "worldact/renderer.hpp"

namespace worldact {

namespace fs = std::filesystem;
using nlohmann::json;

void PipelineConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("config: output directory must be set");
  for (const auto& [name, choice] : backends) {
    if (choice.kind != "mock" && choice.kind != "http")
      throw ConfigError("config: backend '" + name + "' must be mock or http");
    if (choice.kind == "http" && choice.url.empty())
      throw ConfigError("config: backend '" + name + "' needs a url");
  }
  seg.validate();
  if (simplify_target < 4) throw ConfigError("config: simplify_target below minimal mesh");
}

namespace {

BackendChoice parse_choice(const json& v) {
  BackendChoice c;
  std::string s = v.get<std::string>();
  if (s == "mock") {
    c.kind = "mock";
  } else {
    c.kind = "http";
    c.url = s;
  }
  return c;
}

const char* kBackendNames[] = {"vlm", "segmenter", "inpaint", "depth", "asset", "embed"};

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("config: bad JSON in " + path.string() + ": " + e.what());
  }

  PipelineConfig cfg;
  if (j.contains("scene")) cfg.scene_path = j["scene"].get<std::string>();
  if (j.contains("trajectory")) cfg.trajectory_path = j["trajectory"].get<std::string>();
  if (j.contains("synth_spec")) cfg.synth_spec_path = j["synth_spec"].get<std::string>();
  if (j.contains("out")) cfg.out_dir = j["out"].get<std::string>();
  cfg.seed = j.value("seed", cfg.seed);

  if (j.contains("backends"))
    for (const auto& [k, v] : j["backends"].items()) cfg.backends[k] = parse_choice(v);

  if (j.contains("http")) {
    const auto& h = j["http"];
    cfg.http.timeout_s = h.value("timeout_s", cfg.http.timeout_s);
    cfg.http.retries = h.value("retries", cfg.http.retries);
    cfg.http.api_key_env = h.value("api_key_env", cfg.http.api_key_env);
  }
  if (j.contains("agent")) {
    const auto& a = j["agent"];
    cfg.agent.keyframe_divisor = a.value("keyframe_divisor", cfg.agent.keyframe_divisor);
    cfg.agent.dedup_iou = a.value("dedup_iou", cfg.agent.dedup_iou);
    cfg.agent.inpaint_dilation = a.value("inpaint_dilation", cfg.agent.inpaint_dilation);
    cfg.agent.keyframe_stride = a.value("keyframe_stride", cfg.agent.keyframe_stride);
  }
  if (j.contains("segmentation")) {
    const auto& s = j["segmentation"];
    cfg.seg.lambda = s.value("lambda", cfg.seg.lambda);
    cfg.seg.tau = s.value("tau", cfg.seg.tau);
    cfg.seg.step_size = s.value("step_size", cfg.seg.step_size);
    cfg.seg.max_iters = s.value("max_iters", cfg.seg.max_iters);
    cfg.seg.ray_sample_count = s.value("ray_sample_count", cfg.seg.ray_sample_count);
  }
  if (j.contains("restore")) {
    const auto& r = j["restore"];
    cfg.restore.dilation_radius = r.value("dilation_radius", cfg.restore.dilation_radius);
    cfg.restore.keyframe_stride = r.value("keyframe_stride", cfg.restore.keyframe_stride);
    cfg.restore.refine_iters = r.value("refine_iters", cfg.restore.refine_iters);
  }
  if (j.contains("collision")) {
    const auto& c = j["collision"];
    cfg.sample_count = c.value("sample_count", cfg.sample_count);
    cfg.surface.grid_resolution = c.value("grid_resolution", cfg.surface.grid_resolution);
    cfg.surface.padding_voxels = c.value("padding_voxels", cfg.surface.padding_voxels);
    cfg.surface.smoothing_passes = c.value("smoothing_passes", cfg.surface.smoothing_passes);
    cfg.ransac.distance_threshold = c.value("ransac_threshold", cfg.ransac.distance_threshold);
    cfg.ransac.iterations_per_plane =
        c.value("ransac_iterations", cfg.ransac.iterations_per_plane);
    cfg.ransac.min_inlier_fraction =
        c.value("min_inlier_fraction", cfg.ransac.min_inlier_fraction);
    cfg.ransac.max_planes = c.value("max_planes", cfg.ransac.max_planes);
    cfg.planarize.snap_distance = c.value("snap_distance", cfg.planarize.snap_distance);
    cfg.simplify_target = c.value("simplify_target", cfg.simplify_target);
  }
  if (j.contains("align")) {
    const auto& a = j["align"];
    cfg.align.w_c = a.value("w_c", cfg.align.w_c);
    cfg.align.w_p = a.value("w_p", cfg.align.w_p);
    cfg.align.candidate_yaws = a.value("candidate_yaws", cfg.align.candidate_yaws);
    cfg.align.icp_max_iters = a.value("icp_max_iters", cfg.align.icp_max_iters);
    cfg.align.refine_max_iters = a.value("refine_max_iters", cfg.align.refine_max_iters);
    cfg.align.contact_percentile = a.value("contact_percentile", cfg.align.contact_percentile);
    cfg.align.penetration_samples =
        a.value("penetration_samples", cfg.align.penetration_samples);
    cfg.align.scale_min = a.value("scale_min", cfg.align.scale_min);
    cfg.align.scale_max = a.value("scale_max", cfg.align.scale_max);
  }
  if (j.contains("asset")) {
    cfg.asset.hull_thickness_frac =
        j["asset"].value("hull_thickness_frac", cfg.asset.hull_thickness_frac);
  }
  cfg.validate();
  return cfg;
}

std::string pipeline_config_json(const PipelineConfig& cfg) {
  json backends = json::object();
  for (const char* name : kBackendNames) {
    auto it = cfg.backends.find(name);
    if (it == cfg.backends.end() || it->second.kind == "mock")
      backends[name] = "mock";
    else
      backends[name] = it->second.url;
  }
  json j = {
      {"scene", cfg.scene_path.string()},
      {"trajectory", cfg.trajectory_path.string()},
      {"synth_spec", cfg.synth_spec_path.string()},
      {"out", cfg.out_dir.string()},
      {"seed", cfg.seed},
      {"backends", backends},
      {"http",
       {{"timeout_s", cfg.http.timeout_s},
        {"retries", cfg.http.retries},
        {"api_key_env", cfg.http.api_key_env}}},
      {"agent",
       {{"keyframe_divisor", cfg.agent.keyframe_divisor},
        {"dedup_iou", cfg.agent.dedup_iou},
        {"inpaint_dilation", cfg.agent.inpaint_dilation},
        {"keyframe_stride", cfg.agent.keyframe_stride}}},
      {"segmentation",
       {{"lambda", cfg.seg.lambda},
        {"tau", cfg.seg.tau},
        {"step_size", cfg.seg.step_size},
        {"max_iters", cfg.seg.max_iters},
        {"ray_sample_count", cfg.seg.ray_sample_count}}},
      {"restore",
       {{"dilation_radius", cfg.restore.dilation_radius},
        {"keyframe_stride", cfg.restore.keyframe_stride},
        {"refine_iters", cfg.restore.refine_iters}}},
      {"collision",
       {{"sample_count", cfg.sample_count},
        {"grid_resolution", cfg.surface.grid_resolution},
        {"padding_voxels", cfg.surface.padding_voxels},
        {"smoothing_passes", cfg.surface.smoothing_passes},
        {"ransac_threshold", cfg.ransac.distance_threshold},
        {"ransac_iterations", cfg.ransac.iterations_per_plane},
        {"min_inlier_fraction", cfg.ransac.min_inlier_fraction},
        {"max_planes", cfg.ransac.max_planes},
        {"snap_distance", cfg.planarize.snap_distance},
        {"simplify_target", cfg.simplify_target}}},
      {"align",
       {{"w_c", cfg.align.w_c},
        {"w_p", cfg.align.w_p},
        {"candidate_yaws", cfg.align.candidate_yaws},
        {"icp_max_iters", cfg.align.icp_max_iters},
        {"refine_max_iters", cfg.align.refine_max_iters},
        {"contact_percentile", cfg.align.contact_percentile},
        {"penetration_samples", cfg.align.penetration_samples},
        {"scale_min", cfg.align.scale_min},
        {"scale_max", cfg.align.scale_max}}},
      {"asset", {{"hull_thickness_frac", cfg.asset.hull_thickness_frac}}}};
  return j.dump(2);
}

Backends resolve_backends(const PipelineConfig& cfg) {
  auto log = std::make_shared<BackendLog>(cfg.out_dir / "agent.log.jsonl");

  bool any_mock = false;
  auto choice = [&](const char* name) -> BackendChoice {
    auto it = cfg.backends.find(name);
    BackendChoice c = it == cfg.backends.end() ? BackendChoice{} : it->second;
    if (c.kind == "mock") any_mock = true;
    return c;
  };
  BackendChoice c_vlm = choice("vlm"), c_seg = choice("segmenter"), c_inp = choice("inpaint"),
                c_dep = choice("depth"), c_ast = choice("asset"), c_emb = choice("embed");

  std::shared_ptr<const SynthResult> truth;
  if (any_mock) {
    SynthSpec spec = cfg.synth_spec_path.empty() ? default_room_spec()
                                                 : load_synth_spec(cfg.synth_spec_path);
    truth = std::make_shared<const SynthResult>(generate(spec));
  }
  Backends mocks;
  if (truth) mocks = make_mock_backends(truth, log);

  Backends b;
  b.log = log;
  b.vlm = c_vlm.kind == "mock" ? mocks.vlm : make_http_vlm(c_vlm.url, cfg.http, log);
  b.segmenter =
      c_seg.kind == "mock" ? mocks.segmenter : make_http_segmenter(c_seg.url, cfg.http, log);
  b.inpainter =
      c_inp.kind == "mock" ? mocks.inpainter : make_http_inpainter(c_inp.url, cfg.http, log);
  b.depth = c_dep.kind == "mock" ? mocks.depth : make_http_depth(c_dep.url, cfg.http, log);
  b.asset = c_ast.kind == "mock" ? mocks.asset : make_http_asset(c_ast.url, cfg.http, log);
  b.embedder =
      c_emb.kind == "mock" ? mocks.embedder : make_http_embedder(c_emb.url, cfg.http, log);
  return b;
}

namespace {

void write_json_file(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open " + path.string());
  out << j.dump(2) << "\n";
}

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw FormatError("bad JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

struct SceneInputs {
  GaussianScene scene;
  Trajectory trajectory;
  fs::path scene_path, trajectory_path;
};

// Explicit config paths win; otherwise fall back to the synth stage output.
SceneInputs load_inputs(const PipelineConfig& cfg) {
  SceneInputs in;
  in.scene_path = cfg.scene_path;
  in.trajectory_path = cfg.trajectory_path;
  if (in.scene_path.empty()) in.scene_path = cfg.out_dir / "synth" / "scene.ply";
  if (in.trajectory_path.empty())
    in.trajectory_path = cfg.out_dir / "synth" / "trajectory.json";
  if (!fs::exists(in.scene_path))
    throw ConfigError("scene not found: " + in.scene_path.string());
  if (!fs::exists(in.trajectory_path))
    throw ConfigError("trajectory not found: " + in.trajectory_path.string());
  in.scene = load_scene(in.scene_path);
  in.trajectory = load_trajectory(in.trajectory_path);
  return in;
}

// Inputs under the run directory are recorded relative to it, so runs into
// different directories stay byte-identical.
std::string portable_path(const fs::path& p, const fs::path& base) {
  std::error_code ec;
  fs::path rel = fs::relative(p, base, ec);
  if (!ec && !rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

std::string frame_name(int t) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%05d.png", t);
  return buf;
}

std::string obj_name(int m) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "obj_%03d", m);
  return buf;
}

}  // namespace

void run_synth_stage(const PipelineConfig& cfg) {
  SynthSpec spec = cfg.synth_spec_path.empty() ? default_room_spec()
                                               : load_synth_spec(cfg.synth_spec_path);
  SynthResult truth = generate(spec);
  fs::path dir = cfg.out_dir / "synth";
  export_synth(truth, dir);
  write_json_file(cfg.out_dir / "synth.manifest.json",
                  {{"scene", "synth/scene.ply"},
                   {"trajectory", "synth/trajectory.json"},
                   {"spec", "synth/spec.json"},
                   {"truth", "synth/truth.json"},
                   {"object_count", truth.objects.size()},
                   {"gaussian_count", truth.scene.size()}});
}

void run_render_stage(const PipelineConfig& cfg) {
  SceneInputs in = load_inputs(cfg);
  fs::path dir = cfg.out_dir / "render";
  fs::create_directories(dir);
  json frames = json::array();
  for (const auto& cam : in.trajectory.frames) {
    RenderedFrame rf = render(in.scene, cam);
    std::string name = frame_name(cam.frame_index);
    write_png(dir / name, quantize_to_u8(rf.color));
    frames.push_back("render/" + name);
  }
  write_json_file(cfg.out_dir / "render.manifest.json",
                  {{"scene", portable_path(in.scene_path, cfg.out_dir)},
                   {"trajectory", portable_path(in.trajectory_path, cfg.out_dir)},
                   {"frames", frames}});
}

void run_decompose_stage(const PipelineConfig& cfg, const Backends& backends) {
  SceneInputs in = load_inputs(cfg);
  fs::path dir = cfg.out_dir / "decompose";
  fs::create_directories(dir);

  AgentConfig acfg = cfg.agent;
  AgentOutput ag = run_agent(in.scene, in.trajectory, backends, acfg);

  // Mask inverse rendering per surviving object; one shared weight cache.
  std::vector<int> all_views;
  for (const auto& cam : in.trajectory.frames) all_views.push_back(cam.frame_index);
  WeightCache cache = WeightCache::build(in.scene, in.trajectory, all_views);

  SegmentationConfig scfg = cfg.seg;
  scfg.seed = cfg.seed;
  std::vector<AssignmentField> fields;
  for (size_t i = 0; i < ag.records.size(); ++i) {
    MaskStack masks = ag.records[i].masks;
    masks.object_id = static_cast<int>(i) + 1;
    AssignmentField f = optimize_assignment(in.scene, masks, in.trajectory, scfg, &cache);
    f.object_id = masks.object_id;
    fields.push_back(std::move(f));
  }
  GaussianScene labeled = assign_objects(in.scene, fields, scfg);

  write_json_file(dir / "labels.json", json{{"labels", labeled.labels}});
  ScenePartition parts = split_by_labels(labeled);
  save_scene(parts.background, dir / "background.ply");
  json objects = json::array();
  for (size_t i = 0; i < parts.objects.size(); ++i) {
    int m = parts.object_ids[i];
    save_scene(parts.objects[i], dir / (obj_name(m) + std::string(".ply")));
    const AgentRecord& rec = ag.records[static_cast<size_t>(m - 1)];
    fs::path mdir = dir / "masks" / obj_name(m);
    fs::create_directories(mdir);
    json views = json::array();
    for (const auto& [t, mask] : rec.masks.masks) {
      write_mask_png(mdir / frame_name(t), mask);
      views.push_back(t);
    }
    objects.push_back({{"id", m},
                       {"prompt", rec.prompt},
                       {"best_view", rec.best_view},
                       {"views", views},
                       {"gaussians", obj_name(m) + std::string(".ply")},
                       {"masks", "masks/" + obj_name(m)},
                       {"count", parts.objects[i].size()}});
  }
  json inventory = json::array();
  for (const auto& e : ag.inventory)
    inventory.push_back({{"name", e.name},
                         {"category", e.category},
                         {"count", e.count},
                         {"recognizability", e.recognizability},
                         {"state", entry_state_name(e.state)}});
  write_json_file(cfg.out_dir / "decompose.manifest.json",
                  {{"scene", portable_path(in.scene_path, cfg.out_dir)},
                   {"trajectory", portable_path(in.trajectory_path, cfg.out_dir)},
                   {"labels", "decompose/labels.json"},
                   {"background", "decompose/background.ply"},
                   {"objects", objects},
                   {"inventory", inventory},
                   {"skipped", ag.skipped},
                   {"nonempty_mask_views_only", true},
                   {"segmentation",
                    {{"lambda", scfg.lambda}, {"tau", scfg.tau}, {"seed", scfg.seed}}}});
}

void run_restore_stage(const PipelineConfig& cfg, const Backends& backends) {
  json dec = read_json_file(cfg.out_dir / "decompose.manifest.json");
  SceneInputs in = load_inputs(cfg);
  fs::path dir = cfg.out_dir / "restore";
  fs::create_directories(dir);

  GaussianScene labeled = in.scene;
  json jl = read_json_file(cfg.out_dir / dec.at("labels").get<std::string>());
  labeled.labels = jl.at("labels").get<std::vector<int>>();
  if (labeled.labels.size() != labeled.size())
    throw DataError("restore: label count does not match the scene");

  CompleteMaskSet cmasks = fuse_masks(labeled, in.trajectory, cfg.restore.dilation_radius);

  std::map<int, ImageU8> frames;
  for (const auto& cam : in.trajectory.frames)
    frames[cam.frame_index] = quantize_to_u8(render(in.scene, cam, cfg.restore.render).color);

  InpaintResult inp = inpaint_background(frames, cmasks, in.trajectory, *backends.inpainter,
                                         *backends.depth, cfg.restore);

  GaussianScene background = subset_by_label(labeled, 0);
  GaussianScene bg_comp = reinit_gaussians(inp, cmasks, in.trajectory, background, cfg.restore);
  save_scene(bg_comp, dir / "background_comp.ply");

  SampleConfig sample = cfg.sample;
  sample.seed = cfg.seed;
  PointCloud pts = sample_points(bg_comp, cfg.sample_count, sample);
  CollisionMesh mesh = reconstruct_surface(pts, cfg.surface);
  RansacConfig ransac = cfg.ransac;
  ransac.seed = cfg.seed;
  std::vector<PlaneHypothesis> planes = detect_planes(pts, ransac);
  PlanarizeStats pstats;
  mesh = planarize(mesh, planes, cfg.planarize, &pstats);
  mesh = simplify(mesh, cfg.simplify_target, cfg.simplify);
  save_mesh_obj(mesh, dir / "collision.obj");

  fs::path fdir = dir / "inpainted";
  fs::create_directories(fdir);
  json jframes = json::array();
  for (const auto& [t, img] : inp.frames) {
    write_png(fdir / frame_name(t), img);
    jframes.push_back(t);
  }
  for (const auto& [t, d] : inp.keyframe_depths)
    write_pfm(fdir / ("depth_" + std::to_string(t) + ".pfm"), d);

  write_json_file(cfg.out_dir / "restore.manifest.json",
                  {{"background_comp", "restore/background_comp.ply"},
                   {"collision", "restore/collision.obj"},
                   {"inpainted", "restore/inpainted"},
                   {"frames", jframes},
                   {"keyframes", inp.keyframes},
                   {"keyframe_stride", cfg.restore.keyframe_stride},
                   {"dilation_radius", cfg.restore.dilation_radius},
                   {"plane_count", planes.size()},
                   {"snapped_vertices", pstats.snapped_vertices},
                   {"faces", mesh.face_count()}});
}

void run_assemble_stage(const PipelineConfig& cfg, const Backends& backends) {
  json dec = read_json_file(cfg.out_dir / "decompose.manifest.json");
  json res = read_json_file(cfg.out_dir / "restore.manifest.json");
  SceneInputs in = load_inputs(cfg);
  fs::path dir = cfg.out_dir / "assemble";

  AssembledScene assembly;
  assembly.background = load_scene(cfg.out_dir / res.at("background_comp").get<std::string>());
  assembly.collision = load_mesh_obj(cfg.out_dir / res.at("collision").get<std::string>());

  MeshSdf sdf(assembly.collision);
  std::optional<PlaneParam> floor;
  for (const auto& pl : assembly.collision.planes)
    if (pl.cls == FaceClass::Floor) {
      floor = pl;
      break;
    }

  AlignConfig align = cfg.align;
  align.seed = cfg.seed;
  for (const auto& jo : dec.at("objects")) {
    int m = jo.at("id");
    GaussianScene subset =
        load_scene(cfg.out_dir / "decompose" / jo.at("gaussians").get<std::string>());
    int best_view = jo.at("best_view");
    const CameraFrame* cam = in.trajectory.find(best_view);
    if (!cam) throw DataError("assemble: best view missing from trajectory");

    MaskStack masks;
    masks.object_id = m;
    for (int t : jo.at("views").get<std::vector<int>>())
      masks.masks[t] = read_mask_png(cfg.out_dir / "decompose" /
                                     jo.at("masks").get<std::string>() / frame_name(t));

    RenderedFrame rf = render(in.scene, *cam);
    ImageU8 rgb = quantize_to_u8(rf.color);
    const Mask& vmask = masks.masks.at(best_view);

    ObjectAsset asset = generate_asset(rgb, vmask, rf.depth, *cam, *backends.asset);
    asset.object_id = m;

    std::vector<Vec3> anchor, asset_pts;
    for (const auto& g : subset.primitives) anchor.push_back(g.center());
    for (const auto& g : asset.gaussians.primitives) asset_pts.push_back(g.center());
    std::vector<IcpCandidate> cands = icp_candidates(asset_pts, anchor, align);

    ImageU8 ref = rgb;
    for (int r = 0; r < ref.height(); ++r)
      for (int c = 0; c < ref.width(); ++c)
        if (!vmask.at(r, c))
          for (int ch = 0; ch < ref.channels(); ++ch) ref.at(r, c, ch) = 0;
    PlacementPose pose = select_pose(cands, asset, *cam, ref, *backends.embedder);

    AlignComponents comp;
    pose = refine_pose(pose, asset, sdf, floor, masks, in.trajectory, align, &comp);

    PlacedObject placed;
    placed.object_id = m;
    placed.asset = std::move(asset);
    placed.pose = pose;
    assembly.objects.push_back(std::move(placed));
  }

  json settings = {{"seed", cfg.seed},
                   {"w_c", align.w_c},
                   {"w_p", align.w_p},
                   {"lambda", cfg.seg.lambda},
                   {"tau", cfg.seg.tau},
                   {"candidate_yaws", align.candidate_yaws},
                   {"contact_percentile", align.contact_percentile}};
  save_assembly(assembly, dir, settings.dump());
  write_json_file(cfg.out_dir / "assemble.manifest.json",
                  {{"assembly", "assemble"},
                   {"manifest", "assemble/scene.manifest.json"},
                   {"objects", assembly.objects.size()}});
}

void run_pipeline(const PipelineConfig& cfg, bool resume) {
  cfg.validate();
  fs::create_directories(cfg.out_dir);

  struct Stage {
    const char* name;
    std::function<void()> fn;
  };
  Backends backends;  // resolved lazily so synth-only runs skip it
  bool have_backends = false;
  auto ensure_backends = [&]() {
    if (!have_backends) {
      backends = resolve_backends(cfg);
      have_backends = true;
    }
  };

  bool need_synth = cfg.scene_path.empty();
  std::vector<Stage> stages;
  if (need_synth) stages.push_back({"synth", [&] { run_synth_stage(cfg); }});
  stages.push_back({"decompose", [&] {
                      ensure_backends();
                      run_decompose_stage(cfg, backends);
                    }});
  stages.push_back({"restore", [&] {
                      ensure_backends();
                      run_restore_stage(cfg, backends);
                    }});
  stages.push_back({"assemble", [&] {
                      ensure_backends();
                      run_assemble_stage(cfg, backends);
                    }});

  json timings = json::array();
  for (const auto& stage : stages) {
    fs::path manifest = cfg.out_dir / (std::string(stage.name) + ".manifest.json");
    if (resume && fs::exists(manifest)) {
      timings.push_back({{"stage", stage.name}, {"skipped", true}});
      continue;
    }
    auto t0 = std::chrono::steady_clock::now();
    // Prefix failures with the stage name, preserving the error type for the
    // CLI's exit-code mapping.
    try {
      stage.fn();
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(stage.name) + ": " + e.what());
    } catch (const TransportError& e) {
      throw TransportError(std::string(stage.name) + ": " + e.what());
    } catch (const ProtocolError& e) {
      throw ProtocolError(std::string(stage.name) + ": " + e.what(), e.raw_payload);
    } catch (const std::exception& e) {
      throw DataError(std::string(stage.name) + ": " + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    timings.push_back({{"stage", stage.name}, {"seconds", secs}});
  }

  write_json_file(cfg.out_dir / "run.json",
                  {{"config", json::parse(pipeline_config_json(cfg))},
                   {"seed", cfg.seed},
                   {"version", "0.1.0"},
                   {"stages", timings}});
}

}  // namespace worldact
