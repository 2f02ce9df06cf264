#include <atomic>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "httplib.h"
#include "nlohmann/json.hpp"
#include "worldact/backends.hpp"
#include "worldact/errors.hpp"

using namespace worldact;

namespace {

// Local server owning one httplib::Server on a random port.
struct LocalServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  void start() {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~LocalServer() {
    if (thread.joinable()) {
      server.stop();
      thread.join();
    }
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port); }
};

HttpOptions fast_opts() {
  HttpOptions opts;
  opts.timeout_s = 5;
  opts.retries = 2;
  return opts;
}

}  // namespace

TEST_SUITE_BEGIN("http");

TEST_CASE("http clients round trip against a local server") {
  LocalServer be;
  be.server.Post("/v1/chat/completions", [](const httplib::Request& req,
                                            httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body);
    std::string prompt =
        body.at("messages").at(0).at("content").at(0).at("text").get<std::string>();
    std::string text = prompt.find("integer") != std::string::npos
                           ? "87"
                           : R"({"objects": [{"name": "chair", "category": "portable",)"
                             R"( "count": 2, "recognizability": "precise"}]})";
    nlohmann::json out = {
        {"choices", {{{"message", {{"role", "assistant"}, {"content", text}}}}}}};
    res.set_content(out.dump(), "application/json");
  });
  be.server.Post("/segment", [](const httplib::Request& req, httplib::Response& res) {
    ImageU8 img = decode_png(req.get_file_value("frame").content);
    ImageU8 mask(img.height(), img.width(), 1);
    for (int r = img.height() / 4; r < img.height() / 2; ++r)
      for (int c = 0; c < img.width(); ++c) mask.at(r, c) = 255;
    res.set_content(encode_png(mask), "image/png");
  });
  be.server.Post("/inpaint", [](const httplib::Request& req, httplib::Response& res) {
    res.set_content(req.get_file_value("frame").content, "image/png");
  });
  be.server.Post("/depth", [](const httplib::Request& req, httplib::Response& res) {
    ImageU8 img = decode_png(req.body);
    std::ostringstream out;
    out << "Pf\n" << img.width() << " " << img.height() << "\n-1.0\n";
    std::vector<float> row(img.width(), 2.5f);
    for (int r = 0; r < img.height(); ++r)
      out.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
    res.set_content(out.str(), "application/octet-stream");
  });
  be.server.Post("/embed", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"embedding", {0.6, 0.8}}}.dump(), "application/json");
  });
  be.start();

  CameraFrame cam = testutil::simple_camera(32, 32);
  ImageU8 frame(32, 32, 3);
  for (size_t i = 0; i < frame.size(); ++i) frame.data()[i] = static_cast<uint8_t>(i % 200);

  SUBCASE("vlm discover and score") {
    auto vlm = make_http_vlm(be.url(), fast_opts());
    nlohmann::json j = nlohmann::json::parse(vlm->discover({frame}));
    CHECK(j.at("objects").at(0).at("name") == "chair");
    CHECK(vlm->score_view(frame, Mask(32, 32, 1)) == 87);
  }
  SUBCASE("segmenter decodes and binarizes the mask") {
    auto seg = make_http_segmenter(be.url(), fast_opts());
    Mask m = seg->segment(frame, cam, "chair");
    CHECK(m.height() == 32);
    CHECK(mask_area(m) == 8 * 32);
    CHECK(m.at(10, 5) == 1);
  }
  SUBCASE("inpainter returns the server image") {
    auto inp = make_http_inpainter(be.url(), fast_opts());
    ImageU8 out = inp->inpaint(frame, Mask(32, 32, 1));
    REQUIRE(out.same_shape(frame));
    for (size_t i = 0; i < out.size(); ++i) CHECK(out.data()[i] == frame.data()[i]);
  }
  SUBCASE("depth parses the pfm payload") {
    auto dep = make_http_depth(be.url(), fast_opts());
    ImageF d = dep->estimate(frame, cam);
    REQUIRE(d.height() == 32);
    CHECK(d.at(7, 9) == doctest::Approx(2.5));
  }
  SUBCASE("embedder parses the vector") {
    auto emb = make_http_embedder(be.url(), fast_opts());
    Eigen::VectorXd v = emb->embed(frame);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == doctest::Approx(0.6));
    CHECK(v[1] == doctest::Approx(0.8));
  }
}

TEST_CASE("schema violations raise protocol errors carrying the raw payload") {
  LocalServer be;
  be.server.Post("/embed", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not json at all", "application/json");
  });
  be.server.Post("/segment", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("not a png", "image/png");
  });
  be.server.Post("/v1/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.set_content(nlohmann::json{{"unexpected", "shape"}}.dump(), "application/json");
  });
  be.start();

  ImageU8 frame(16, 16, 3);
  auto emb = make_http_embedder(be.url(), fast_opts());
  try {
    emb->embed(frame);
    FAIL("expected ProtocolError");
  } catch (const ProtocolError& e) {
    CHECK(e.raw_payload == "not json at all");
  }

  auto seg = make_http_segmenter(be.url(), fast_opts());
  CHECK_THROWS_AS(seg->segment(frame, testutil::simple_camera(16, 16), "x"), ProtocolError);

  auto vlm = make_http_vlm(be.url(), fast_opts());
  CHECK_THROWS_AS(vlm->discover({frame}), ProtocolError);
}

TEST_CASE("server errors exhaust the retry budget then raise transport errors") {
  LocalServer be;
  std::atomic<int> hits{0};
  be.server.Post("/embed", [&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 500;
  });
  be.start();

  HttpOptions opts = fast_opts();
  opts.retries = 2;
  auto emb = make_http_embedder(be.url(), opts);
  ImageU8 frame(8, 8, 3);
  CHECK_THROWS_AS(emb->embed(frame), TransportError);
  CHECK(hits == opts.retries + 1);
}

TEST_CASE("unreachable hosts raise transport errors") {
  HttpOptions opts = fast_opts();
  opts.retries = 0;
  auto emb = make_http_embedder("http://127.0.0.1:1", opts);
  ImageU8 frame(8, 8, 3);
  CHECK_THROWS_AS(emb->embed(frame), TransportError);
}

TEST_SUITE_END();
