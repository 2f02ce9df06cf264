#include "worldact/backends.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include <httplib.h>

#include "worldact/errors.hpp"
#include "worldact/renderer.hpp"

namespace worldact {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string base64_encode(const std::string& in) {
  static const char* tbl = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((in.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 2 < in.size()) {
    uint32_t v = (uint8_t(in[i]) << 16) | (uint8_t(in[i + 1]) << 8) | uint8_t(in[i + 2]);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += tbl[v & 63];
    i += 3;
  }
  if (i + 1 == in.size()) {
    uint32_t v = uint8_t(in[i]) << 16;
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == in.size()) {
    uint32_t v = (uint8_t(in[i]) << 16) | (uint8_t(in[i + 1]) << 8);
    out += tbl[(v >> 18) & 63];
    out += tbl[(v >> 12) & 63];
    out += tbl[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string base64_decode(const std::string& in) {
  auto val = [](char c) -> int {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
  };
  std::string out;
  int buf = 0, bits = 0;
  for (char c : in) {
    int v = val(c);
    if (v < 0) continue;
    buf = (buf << 6) | v;
    bits += 6;
    if (bits >= 8) {
      bits -= 8;
      out += static_cast<char>((buf >> bits) & 0xff);
    }
  }
  return out;
}

}  // namespace

std::string digest_bytes(const void* data, size_t len) {
  // FNV-1a 64
  const auto* p = static_cast<const uint8_t*>(data);
  uint64_t h = 14695981039346656037ull;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string digest_string(const std::string& s) { return digest_bytes(s.data(), s.size()); }

BackendLog::BackendLog(const std::filesystem::path& path) : path_(path) {
  if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
}

void BackendLog::record(const std::string& stage, const std::string& request_digest,
                        const std::string& response_digest, double latency_ms) {
  std::lock_guard<std::mutex> lock(mu_);
  std::ofstream out(path_, std::ios::app);
  nlohmann::json j = {{"stage", stage},
                      {"request", request_digest},
                      {"response", response_digest},
                      {"latency_ms", latency_ms}};
  out << j.dump() << "\n";
}

Eigen::VectorXd patch_embedding(const ImageU8& image) {
  constexpr int kN = 16;
  Eigen::VectorXd v(kN * kN);
  for (int i = 0; i < kN; ++i) {
    int r0 = i * image.height() / kN, r1 = std::max(r0 + 1, (i + 1) * image.height() / kN);
    for (int j = 0; j < kN; ++j) {
      int c0 = j * image.width() / kN, c1 = std::max(c0 + 1, (j + 1) * image.width() / kN);
      double sum = 0;
      int count = 0;
      for (int r = r0; r < r1; ++r)
        for (int c = c0; c < c1; ++c) {
          double g = 0;
          for (int ch = 0; ch < image.channels(); ++ch) g += image.at(r, c, ch);
          sum += g / image.channels();
          ++count;
        }
      v[i * kN + j] = count ? sum / count / 255.0 : 0.0;
    }
  }
  double n = v.norm();
  if (n > 0) v /= n;
  return v;
}

ImageU8 diffusion_fill(const ImageU8& frame, const Mask& mask, int iterations) {
  if (frame.height() != mask.height() || frame.width() != mask.width())
    throw ArgumentError("diffusion_fill: frame/mask shape mismatch");
  int h = frame.height(), w = frame.width(), nc = frame.channels();
  std::vector<double> cur(frame.size());
  for (size_t i = 0; i < frame.size(); ++i) cur[i] = frame.data()[i];

  // Seed masked pixels with the mean of hole-adjacent known pixels; for a
  // constant surround this is already the fixed point.
  {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(nc);
    long count = 0;
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c) {
        if (mask.at(r, c)) continue;
        bool adj = false;
        const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4 && !adj; ++k) {
          int rr = r + dr[k], cc = c + dc[k];
          adj = rr >= 0 && rr < h && cc >= 0 && cc < w && mask.at(rr, cc);
        }
        if (!adj) continue;
        for (int ch = 0; ch < nc; ++ch) mean[ch] += frame.at(r, c, ch);
        ++count;
      }
    if (count > 0) mean /= static_cast<double>(count);
    for (int r = 0; r < h; ++r)
      for (int c = 0; c < w; ++c)
        if (mask.at(r, c))
          for (int ch = 0; ch < nc; ++ch)
            cur[(static_cast<size_t>(r) * w + c) * nc + ch] = mean[ch];
  }

  std::vector<double> next = cur;
  for (int it = 0; it < iterations; ++it) {
    for (int r = 0; r < h; ++r) {
      for (int c = 0; c < w; ++c) {
        if (!mask.at(r, c)) continue;
        const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
        for (int ch = 0; ch < nc; ++ch) {
          double sum = 0;
          int count = 0;
          for (int k = 0; k < 4; ++k) {
            int rr = r + dr[k], cc = c + dc[k];
            if (rr < 0 || rr >= h || cc < 0 || cc >= w) continue;
            sum += cur[(static_cast<size_t>(rr) * w + cc) * nc + ch];
            ++count;
          }
          if (count) next[(static_cast<size_t>(r) * w + c) * nc + ch] = sum / count;
        }
      }
    }
    std::swap(cur, next);
  }

  ImageU8 out = frame;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c)
      if (mask.at(r, c))
        for (int ch = 0; ch < nc; ++ch)
          out.at(r, c, ch) = static_cast<uint8_t>(std::lround(
              std::clamp(cur[(static_cast<size_t>(r) * w + c) * nc + ch], 0.0, 255.0)));
  return out;
}

// ---------------------------------------------------------------------------
// Mock backends

namespace {

struct MockVlm final : VlmClient {
  std::shared_ptr<const SynthResult> truth;
  std::shared_ptr<BackendLog> log;

  std::string name() const override { return "mock"; }

  std::string discover(const std::vector<ImageU8>& keyframes) override {
    auto t0 = Clock::now();
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& o : truth->objects) {
      if (!o.spec.discoverable) continue;
      objects.push_back({{"name", o.spec.name},
                         {"category", o.spec.portable ? "portable" : "fixed"},
                         {"count", 1},
                         {"recognizability", o.spec.recognizability}});
    }
    std::string payload = nlohmann::json{{"objects", objects}}.dump();
    if (log)
      log->record("vlm.discover", digest_string(std::to_string(keyframes.size())),
                  digest_string(payload), ms_since(t0));
    return payload;
  }

  int score_view(const ImageU8& frame, const Mask& mask) override {
    auto t0 = Clock::now();
    size_t area = mask_area(mask);
    double area_frac =
        static_cast<double>(area) / (static_cast<double>(mask.height()) * mask.width());
    // Boundary pixels of the mask; those on the image border count as clipped.
    size_t boundary = 0, clipped = 0;
    for (int r = 0; r < mask.height(); ++r) {
      for (int c = 0; c < mask.width(); ++c) {
        if (!mask.at(r, c)) continue;
        bool edge = r == 0 || r == mask.height() - 1 || c == 0 || c == mask.width() - 1;
        bool bnd = edge;
        const int dr[] = {-1, 1, 0, 0}, dc[] = {0, 0, -1, 1};
        for (int k = 0; k < 4 && !bnd; ++k)
          bnd = !mask.at(r + dr[k], c + dc[k]);
        if (bnd) ++boundary;
        if (edge) ++clipped;
      }
    }
    double unclipped = boundary == 0 ? 1.0 : 1.0 - static_cast<double>(clipped) / boundary;
    int score = static_cast<int>(std::lround(100.0 * area_frac * unclipped));
    score = std::clamp(score, 0, 100);
    if (log)
      log->record("vlm.score_view", digest_bytes(frame.data(), frame.size()),
                  digest_string(std::to_string(score)), ms_since(t0));
    return score;
  }
};

struct MockSegmenter final : SegmenterClient {
  std::shared_ptr<const SynthResult> truth;
  std::shared_ptr<BackendLog> log;

  std::string name() const override { return "mock"; }

  Mask segment(const ImageU8& frame, const CameraFrame& cam,
               const std::string& prompt) override {
    auto t0 = Clock::now();
    Mask m(cam.height, cam.width, 1);
    if (const SynthObjectTruth* obj = truth->find_object(prompt)) {
      auto it = truth->masks.find(obj->label);
      if (it != truth->masks.end()) {
        auto mit = it->second.masks.find(cam.frame_index);
        if (mit != it->second.masks.end()) m = mit->second;
      }
    }
    if (log)
      log->record("segmenter.segment", digest_string(prompt),
                  digest_bytes(m.data(), m.size()), ms_since(t0));
    return m;
  }
};

struct MockInpainter final : InpaintClient {
  std::shared_ptr<BackendLog> log;

  std::string name() const override { return "mock"; }

  ImageU8 inpaint(const ImageU8& frame, const Mask& mask) override {
    auto t0 = Clock::now();
    ImageU8 out = diffusion_fill(frame, mask, 200);
    if (log)
      log->record("inpaint", digest_bytes(frame.data(), frame.size()),
                  digest_bytes(out.data(), out.size()), ms_since(t0));
    return out;
  }
};

struct MockDepth final : DepthClient {
  std::shared_ptr<const SynthResult> truth;
  std::shared_ptr<BackendLog> log;
  GaussianScene background;

  explicit MockDepth(std::shared_ptr<const SynthResult> t) : truth(std::move(t)) {
    background = subset_by_label(truth->scene, 0);
  }

  std::string name() const override { return "mock"; }

  ImageF estimate(const ImageU8& frame, const CameraFrame& cam) override {
    auto t0 = Clock::now();
    RenderedFrame rf = render(background, cam);
    if (log)
      log->record("depth", digest_bytes(frame.data(), frame.size()),
                  digest_bytes(rf.depth.data(), rf.depth.size() * sizeof(double)),
                  ms_since(t0));
    return rf.depth;
  }
};

struct MockAsset final : AssetClient {
  std::shared_ptr<BackendLog> log;
  AssetConfig cfg;

  std::string name() const override { return "mock"; }

  ObjectAsset generate(const ImageU8& rgb, const Mask& mask, const ImageF& depth,
                       const CameraFrame& cam) override {
    auto t0 = Clock::now();
    ObjectAsset asset = visual_hull_asset(rgb, mask, depth, cam, cfg);
    asset.provenance = "mock";
    if (log)
      log->record("asset.generate", digest_bytes(mask.data(), mask.size()),
                  digest_string(std::to_string(asset.mesh.face_count())), ms_since(t0));
    return asset;
  }
};

struct MockEmbed final : EmbedClient {
  std::shared_ptr<BackendLog> log;

  std::string name() const override { return "mock"; }

  Eigen::VectorXd embed(const ImageU8& image) override {
    auto t0 = Clock::now();
    Eigen::VectorXd v = patch_embedding(image);
    if (log)
      log->record("embed", digest_bytes(image.data(), image.size()),
                  digest_bytes(v.data(), v.size() * sizeof(double)), ms_since(t0));
    return v;
  }
};

}  // namespace

Backends make_mock_backends(std::shared_ptr<const SynthResult> truth,
                            std::shared_ptr<BackendLog> log) {
  if (!truth) throw ArgumentError("make_mock_backends: null ground truth");
  Backends b;
  auto vlm = std::make_shared<MockVlm>();
  vlm->truth = truth;
  vlm->log = log;
  b.vlm = vlm;
  auto seg = std::make_shared<MockSegmenter>();
  seg->truth = truth;
  seg->log = log;
  b.segmenter = seg;
  auto inp = std::make_shared<MockInpainter>();
  inp->log = log;
  b.inpainter = inp;
  auto dep = std::make_shared<MockDepth>(truth);
  dep->log = log;
  b.depth = dep;
  auto ast = std::make_shared<MockAsset>();
  ast->log = log;
  b.asset = ast;
  auto emb = std::make_shared<MockEmbed>();
  emb->log = log;
  b.embedder = emb;
  b.log = log;
  return b;
}

// ---------------------------------------------------------------------------
// HTTP backends

namespace {

struct HttpBase {
  std::string base_url;
  HttpOptions opts;
  std::shared_ptr<BackendLog> log;

  httplib::Result post(const std::string& path, const std::string& body,
                       const std::string& content_type) const {
    httplib::Client cli(base_url);
    cli.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(opts.timeout_s * 1000)));
    cli.set_read_timeout(std::chrono::milliseconds(static_cast<int>(opts.timeout_s * 1000)));
    if (const char* key = std::getenv(opts.api_key_env.c_str()))
      cli.set_default_headers({{"Authorization", std::string("Bearer ") + key}});
    httplib::Result res;
    for (int attempt = 0; attempt <= opts.retries; ++attempt) {
      res = cli.Post(path, body, content_type);
      if (res && res->status / 100 == 2) return res;
    }
    if (!res)
      throw TransportError("backend " + base_url + path + ": " + httplib::to_string(res.error()));
    throw TransportError("backend " + base_url + path + ": HTTP " +
                         std::to_string(res->status));
  }

  httplib::Result post_multipart(const std::string& path,
                                 const httplib::MultipartFormDataItems& items) const {
    httplib::Client cli(base_url);
    cli.set_connection_timeout(std::chrono::milliseconds(
        static_cast<int>(opts.timeout_s * 1000)));
    cli.set_read_timeout(std::chrono::milliseconds(static_cast<int>(opts.timeout_s * 1000)));
    if (const char* key = std::getenv(opts.api_key_env.c_str()))
      cli.set_default_headers({{"Authorization", std::string("Bearer ") + key}});
    httplib::Result res;
    for (int attempt = 0; attempt <= opts.retries; ++attempt) {
      res = cli.Post(path, items);
      if (res && res->status / 100 == 2) return res;
    }
    if (!res)
      throw TransportError("backend " + base_url + path + ": " + httplib::to_string(res.error()));
    throw TransportError("backend " + base_url + path + ": HTTP " +
                         std::to_string(res->status));
  }
};

// Parse a PFM depth map from an in-memory buffer (single channel).
ImageF parse_pfm_buffer(const std::string& bytes) {
  std::istringstream in(bytes);
  std::string magic;
  int width = 0, height = 0;
  double scale = 0;
  in >> magic >> width >> height >> scale;
  if (magic != "Pf" || width <= 0 || height <= 0)
    throw FormatError("depth backend: bad PFM payload");
  in.get();
  ImageF img(height, width, 1);
  std::vector<float> row(width);
  for (int r = height - 1; r >= 0; --r) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    if (!in) throw FormatError("depth backend: truncated PFM payload");
    for (int c = 0; c < width; ++c) img.at(r, c) = row[c];
  }
  return img;
}

struct HttpVlm final : VlmClient, HttpBase {
  std::string name() const override { return "http:" + base_url; }

  std::string chat(const std::string& prompt, const std::vector<std::string>& pngs,
                   const std::string& stage) {
    auto t0 = Clock::now();
    nlohmann::json content = nlohmann::json::array();
    content.push_back({{"type", "text"}, {"text", prompt}});
    for (const auto& png : pngs)
      content.push_back({{"type", "image_url"},
                         {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
    nlohmann::json body = {
        {"model", "default"},
        {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};
    std::string req = body.dump();
    auto res = post("/v1/chat/completions", req, "application/json");
    std::string out;
    try {
      nlohmann::json j = nlohmann::json::parse(res->body);
      out = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("vlm backend: malformed completion: ") + e.what(),
                          res->body);
    }
    if (log) log->record(stage, digest_string(req), digest_string(out), ms_since(t0));
    return out;
  }

  std::string discover(const std::vector<ImageU8>& keyframes) override {
    std::vector<std::string> pngs;
    for (const auto& f : keyframes) pngs.push_back(encode_png(f));
    return chat(
        "List every movable or fixed object visible in these room views. "
        "Respond with JSON only: {\"objects\": [{\"name\": str, \"category\": "
        "\"portable\"|\"fixed\", \"count\": int, \"recognizability\": "
        "\"precise\"|\"subtle\"|\"unrecognizable\"}]}",
        pngs, "vlm.discover");
  }

  int score_view(const ImageU8& frame, const Mask& mask) override {
    ImageU8 m8(mask.height(), mask.width(), 1);
    for (size_t i = 0; i < mask.size(); ++i) m8.data()[i] = mask.data()[i] ? 255 : 0;
    std::string out = chat(
        "Rate how suitable the masked object view is for 3D reconstruction: "
        "completeness, clarity, centeredness. Respond with a single integer 0-100.",
        {encode_png(frame), encode_png(m8)}, "vlm.score_view");
    try {
      size_t pos = 0;
      int score = std::stoi(out, &pos);
      if (score < 0 || score > 100) throw std::out_of_range("range");
      return score;
    } catch (const std::exception&) {
      throw ProtocolError("vlm backend: non-integer view score", out);
    }
  }
};

struct HttpSegmenter final : SegmenterClient, HttpBase {
  std::string name() const override { return "http:" + base_url; }

  Mask segment(const ImageU8& frame, const CameraFrame& cam,
               const std::string& prompt) override {
    auto t0 = Clock::now();
    std::string png = encode_png(frame);
    auto res = post_multipart("/segment", {{"frame", png, "frame.png", "image/png"},
                                           {"prompt", prompt, "", "text/plain"}});
    ImageU8 img;
    try {
      img = decode_png(res->body);
    } catch (const std::exception& e) {
      throw ProtocolError(std::string("segmenter backend: bad PNG: ") + e.what(), res->body);
    }
    if (img.height() != cam.height || img.width() != cam.width)
      throw ProtocolError("segmenter backend: mask dims mismatch", res->body);
    Mask m(img.height(), img.width(), 1);
    for (int r = 0; r < img.height(); ++r)
      for (int c = 0; c < img.width(); ++c) m.at(r, c) = img.at(r, c, 0) >= 128 ? 1 : 0;
    if (log)
      log->record("segmenter.segment", digest_string(prompt),
                  digest_bytes(m.data(), m.size()), ms_since(t0));
    return m;
  }
};

struct HttpInpainter final : InpaintClient, HttpBase {
  std::string name() const override { return "http:" + base_url; }

  ImageU8 inpaint(const ImageU8& frame, const Mask& mask) override {
    auto t0 = Clock::now();
    ImageU8 m8(mask.height(), mask.width(), 1);
    for (size_t i = 0; i < mask.size(); ++i) m8.data()[i] = mask.data()[i] ? 255 : 0;
    auto res = post_multipart("/inpaint",
                              {{"frame", encode_png(frame), "frame.png", "image/png"},
                               {"mask", encode_png(m8), "mask.png", "image/png"}});
    ImageU8 out;
    try {
      out = decode_png(res->body);
    } catch (const std::exception& e) {
      throw ProtocolError(std::string("inpaint backend: bad PNG: ") + e.what(), res->body);
    }
    if (log)
      log->record("inpaint", digest_bytes(frame.data(), frame.size()),
                  digest_bytes(out.data(), out.size()), ms_since(t0));
    return out;
  }
};

struct HttpDepth final : DepthClient, HttpBase {
  std::string name() const override { return "http:" + base_url; }

  ImageF estimate(const ImageU8& frame, const CameraFrame&) override {
    auto t0 = Clock::now();
    auto res = post("/depth", encode_png(frame), "image/png");
    ImageF depth = parse_pfm_buffer(res->body);
    if (log)
      log->record("depth", digest_bytes(frame.data(), frame.size()),
                  digest_bytes(depth.data(), depth.size() * sizeof(double)), ms_since(t0));
    return depth;
  }
};

struct HttpAsset final : AssetClient, HttpBase {
  std::string name() const override { return "http:" + base_url; }

  ObjectAsset generate(const ImageU8& rgb, const Mask& mask, const ImageF&,
                       const CameraFrame&) override {
    auto t0 = Clock::now();
    ImageU8 m8(mask.height(), mask.width(), 1);
    for (size_t i = 0; i < mask.size(); ++i) m8.data()[i] = mask.data()[i] ? 255 : 0;
    auto res = post_multipart("/generate",
                              {{"image", encode_png(rgb), "image.png", "image/png"},
                               {"mask", encode_png(m8), "mask.png", "image/png"}});
    // Response: JSON archive of base64 PLY gaussians and OBJ mesh (+ sidecar).
    namespace fs = std::filesystem;
    fs::path tmp = fs::temp_directory_path() /
                   ("worldact_asset_" + digest_string(res->body));
    try {
      nlohmann::json j = nlohmann::json::parse(res->body);
      fs::create_directories(tmp);
      auto dump = [&](const char* key, const char* file) {
        std::ofstream out(tmp / file, std::ios::binary);
        std::string bytes = base64_decode(j.at(key).get<std::string>());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      };
      dump("gaussians_ply", "gaussians.ply");
      dump("mesh_obj", "mesh.obj");
      if (j.contains("mesh_meta")) dump("mesh_meta", "mesh.meta.json");
      ObjectAsset asset;
      asset.gaussians = load_scene(tmp / "gaussians.ply");
      asset.mesh = load_mesh_obj(tmp / "mesh.obj");
      asset.provenance = name();
      fs::remove_all(tmp);
      if (log)
        log->record("asset.generate", digest_bytes(mask.data(), mask.size()),
                    digest_string(res->body), ms_since(t0));
      return asset;
    } catch (const nlohmann::json::exception& e) {
      std::error_code ec;
      fs::remove_all(tmp, ec);
      throw ProtocolError(std::string("asset backend: malformed archive: ") + e.what(),
                          res->body);
    }
  }
};

struct HttpEmbed final : EmbedClient, HttpBase {
  std::string name() const override { return "http:" + base_url; }

  Eigen::VectorXd embed(const ImageU8& image) override {
    auto t0 = Clock::now();
    auto res = post("/embed", encode_png(image), "image/png");
    Eigen::VectorXd v;
    try {
      nlohmann::json j = nlohmann::json::parse(res->body);
      const auto& arr = j.at("embedding");
      v.resize(static_cast<Eigen::Index>(arr.size()));
      for (size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i];
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(std::string("embed backend: malformed response: ") + e.what(),
                          res->body);
    }
    if (log)
      log->record("embed", digest_bytes(image.data(), image.size()),
                  digest_bytes(v.data(), v.size() * sizeof(double)), ms_since(t0));
    return v;
  }
};

template <typename T>
std::shared_ptr<T> make_http(const std::string& base_url, const HttpOptions& opts,
                             std::shared_ptr<BackendLog> log) {
  auto c = std::make_shared<T>();
  c->base_url = base_url;
  c->opts = opts;
  c->log = std::move(log);
  return c;
}

}  // namespace

std::shared_ptr<VlmClient> make_http_vlm(const std::string& base_url, const HttpOptions& opts,
                                         std::shared_ptr<BackendLog> log) {
  return make_http<HttpVlm>(base_url, opts, std::move(log));
}
std::shared_ptr<SegmenterClient> make_http_segmenter(const std::string& base_url,
                                                     const HttpOptions& opts,
                                                     std::shared_ptr<BackendLog> log) {
  return make_http<HttpSegmenter>(base_url, opts, std::move(log));
}
std::shared_ptr<InpaintClient> make_http_inpainter(const std::string& base_url,
                                                   const HttpOptions& opts,
                                                   std::shared_ptr<BackendLog> log) {
  return make_http<HttpInpainter>(base_url, opts, std::move(log));
}
std::shared_ptr<DepthClient> make_http_depth(const std::string& base_url,
                                             const HttpOptions& opts,
                                             std::shared_ptr<BackendLog> log) {
  return make_http<HttpDepth>(base_url, opts, std::move(log));
}
std::shared_ptr<AssetClient> make_http_asset(const std::string& base_url,
                                             const HttpOptions& opts,
                                             std::shared_ptr<BackendLog> log) {
  return make_http<HttpAsset>(base_url, opts, std::move(log));
}
std::shared_ptr<EmbedClient> make_http_embedder(const std::string& base_url,
                                                const HttpOptions& opts,
                                                std::shared_ptr<BackendLog> log) {
  return make_http<HttpEmbed>(base_url, opts, std::move(log));
}

}  // namespace worldact
