#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "worldact/assets.hpp"
#include "worldact/image.hpp"
#include "worldact/scene.hpp"
#include "worldact/synth.hpp"

namespace worldact {

/// Append-only JSONL log of every backend call: stage, request digest,
/// response digest, latency. Thread-safe.
class BackendLog {
 public:
  explicit BackendLog(const std::filesystem::path& path);
  void record(const std::string& stage, const std::string& request_digest,
              const std::string& response_digest, double latency_ms);

 private:
  std::filesystem::path path_;
  std::mutex mu_;
};

std::string digest_bytes(const void* data, size_t len);
std::string digest_string(const std::string& s);

/// Vision-language service: inventory discovery (raw payload, parsed by the
/// caller) and integer view scoring.
class VlmClient {
 public:
  virtual ~VlmClient() = default;
  virtual std::string name() const = 0;
  virtual std::string discover(const std::vector<ImageU8>& keyframes) = 0;
  virtual int score_view(const ImageU8& frame, const Mask& mask) = 0;
};

class SegmenterClient {
 public:
  virtual ~SegmenterClient() = default;
  virtual std::string name() const = 0;
  virtual Mask segment(const ImageU8& frame, const CameraFrame& cam,
                       const std::string& prompt) = 0;
};

class InpaintClient {
 public:
  virtual ~InpaintClient() = default;
  virtual std::string name() const = 0;
  virtual ImageU8 inpaint(const ImageU8& frame, const Mask& mask) = 0;
};

class DepthClient {
 public:
  virtual ~DepthClient() = default;
  virtual std::string name() const = 0;
  virtual ImageF estimate(const ImageU8& frame, const CameraFrame& cam) = 0;
};

class AssetClient {
 public:
  virtual ~AssetClient() = default;
  virtual std::string name() const = 0;
  virtual ObjectAsset generate(const ImageU8& rgb, const Mask& mask, const ImageF& depth,
                               const CameraFrame& cam) = 0;
};

class EmbedClient {
 public:
  virtual ~EmbedClient() = default;
  virtual std::string name() const = 0;
  virtual Eigen::VectorXd embed(const ImageU8& image) = 0;
};

struct Backends {
  std::shared_ptr<VlmClient> vlm;
  std::shared_ptr<SegmenterClient> segmenter;
  std::shared_ptr<InpaintClient> inpainter;
  std::shared_ptr<DepthClient> depth;
  std::shared_ptr<AssetClient> asset;
  std::shared_ptr<EmbedClient> embedder;
  std::shared_ptr<BackendLog> log;
};

/// Deterministic mocks wired to the synthetic generator's ground truth.
Backends make_mock_backends(std::shared_ptr<const SynthResult> truth,
                            std::shared_ptr<BackendLog> log = nullptr);

struct HttpOptions {
  double timeout_s = 30;
  int retries = 2;
  std::string api_key_env = "WORLDACT_API_KEY";
};

std::shared_ptr<VlmClient> make_http_vlm(const std::string& base_url, const HttpOptions& opts,
                                         std::shared_ptr<BackendLog> log = nullptr);
std::shared_ptr<SegmenterClient> make_http_segmenter(const std::string& base_url,
                                                     const HttpOptions& opts,
                                                     std::shared_ptr<BackendLog> log = nullptr);
std::shared_ptr<InpaintClient> make_http_inpainter(const std::string& base_url,
                                                   const HttpOptions& opts,
                                                   std::shared_ptr<BackendLog> log = nullptr);
std::shared_ptr<DepthClient> make_http_depth(const std::string& base_url,
                                             const HttpOptions& opts,
                                             std::shared_ptr<BackendLog> log = nullptr);
std::shared_ptr<AssetClient> make_http_asset(const std::string& base_url,
                                             const HttpOptions& opts,
                                             std::shared_ptr<BackendLog> log = nullptr);
std::shared_ptr<EmbedClient> make_http_embedder(const std::string& base_url,
                                                const HttpOptions& opts,
                                                std::shared_ptr<BackendLog> log = nullptr);

/// 16x16 grayscale patch embedding, L2-normalized. Shared by the mock
/// embedder and its tests.
Eigen::VectorXd patch_embedding(const ImageU8& image);

/// Boundary color diffusion fill: repeated neighbor averaging from the mask
/// boundary inward. Shared by the mock inpainter and its tests.
ImageU8 diffusion_fill(const ImageU8& frame, const Mask& mask, int iterations = 200);

}  // namespace worldact
