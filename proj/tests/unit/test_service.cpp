#include <doctest.h>

#include <httplib.h>

#include <chrono>
#include <thread>

#include "fixtures.hpp"
#include "proid/io.hpp"
#include "proid/service.hpp"

using namespace proid;

namespace {

ScanSequence blank_sequence(int w, int h) {
  ScanSequence s;
  s.frames.assign(4, Image(w, h));
  return s;
}

/// A data root with one phantom scan, served on a free loopback port.
struct Harness {
  fixture::TempDir dir;
  std::unique_ptr<Service> service;
  std::thread thread;
  int port = 0;
  UipFrame uips;

  explicit Harness(int frames = 8, bool with_blank = false) {
    PhantomSpec spec = fixture::ef60(5.0);
    spec.frames = frames;
    spec.period_frames = frames;
    const auto ph = generate_phantom(spec);
    save_sequence(dir / "phantom", ph.sequence);
    if (with_blank) save_sequence(dir / "blank", blank_sequence(spec.width, spec.height));
    uips = ph.truth.frames[0].uips;
    service = std::make_unique<Service>(dir.path());
    port = service->bind("127.0.0.1", 0);
    thread = std::thread([this] { service->listen(); });
  }
  ~Harness() {
    service->stop();
    thread.join();
  }

  httplib::Client client() const {
    httplib::Client c("127.0.0.1", port);
    c.set_read_timeout(60, 0);
    return c;
  }
};

std::string uip_body(const UipFrame& u) { return uips_to_json(u).dump(); }

std::string job_body(int window = 64) {
  return Json{{"sequence", "phantom"}, {"params", {{"tracking", {{"window", window}}}}}}.dump();
}

Json wait_for(httplib::Client& c, const std::string& job) {
  for (int i = 0; i < 600; ++i) {
    auto res = c.Get("/jobs/" + job);
    REQUIRE(res);
    const auto body = Json::parse(res->body);
    if (body["status"] == "done" || body["status"] == "failed") return body;
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
  }
  FAIL("job did not finish");
  return {};
}

}  // namespace

TEST_CASE("sequences and frames") {
  Harness h;
  auto c = h.client();
  auto list = c.Get("/sequences");
  REQUIRE(list);
  CHECK(list->status == 200);
  const auto seqs = Json::parse(list->body);
  REQUIRE(seqs.size() == 1);
  CHECK(seqs[0]["id"] == "phantom");
  CHECK(seqs[0]["frames"] == 8);

  auto frame = c.Get("/sequences/phantom/frames/3");
  REQUIRE(frame);
  CHECK(frame->status == 200);
  CHECK(frame->get_header_value("Content-Type") == "image/png");
  CHECK(frame->body.substr(1, 3) == "PNG");
  CHECK(c.Get("/sequences/phantom/frames/99")->status == 404);
  CHECK(c.Get("/sequences/other/frames/0")->status == 404);
}

TEST_CASE("UIP validation") {
  Harness h;
  auto c = h.client();
  const UipFrame collinear{{10, 10}, {20, 20}, {30, 30}};
  CHECK(c.Post("/sequences/phantom/uips", uip_body(collinear), "application/json")->status == 400);
  CHECK(c.Post("/sequences/phantom/uips", "{not json", "application/json")->status == 400);
  const UipFrame outside{{-5, 10}, {20, 200}, {100, 200}};
  CHECK(c.Post("/sequences/phantom/uips", uip_body(outside), "application/json")->status == 400);
  CHECK(c.Post("/jobs", job_body(), "application/json")->status == 400);
  CHECK(c.Post("/sequences/phantom/uips", uip_body(h.uips), "application/json")->status == 200);
}

TEST_CASE("unknown ids") {
  Harness h;
  auto c = h.client();
  CHECK(c.Get("/jobs/job-404")->status == 404);
  CHECK(c.Get("/jobs/job-404/result")->status == 404);
  CHECK(c.Post("/jobs", R"({"sequence": "nope"})", "application/json")->status == 404);
}

TEST_CASE("a job runs to a result and repeated submissions conflict") {
  Harness h;
  auto c = h.client();
  REQUIRE(c.Post("/sequences/phantom/uips", uip_body(h.uips), "application/json")->status == 200);

  auto first = c.Post("/jobs", job_body(), "application/json");
  REQUIRE(first);
  CHECK(first->status == 202);
  const std::string job = Json::parse(first->body)["job"];

  auto second = c.Post("/jobs", job_body(), "application/json");
  REQUIRE(second);
  CHECK(second->status == 409);
  auto early = c.Get("/jobs/" + job + "/result");
  CHECK((early->status == 409 || early->status == 200));

  const auto status = wait_for(c, job);
  CHECK(status["status"] == "done");
  auto result = c.Get("/jobs/" + job + "/result");
  REQUIRE(result);
  CHECK(result->status == 200);
  const auto body = Json::parse(result->body);
  CHECK(body["boundaries"].size() == 8);
  CHECK(body["boundaries"][0]["x_px"].size() == body["boundaries"][0]["r_px"].size());
  CHECK(body["volume_curve"]["volume_ml"].size() == 8);
  CHECK(body["metrics"]["beats"].size() == 1);

  auto again = c.Post("/jobs", job_body(), "application/json");
  CHECK(again->status == 202);
  h.service->drain();
}

TEST_CASE("failed jobs report their error") {
  Harness h(8, true);
  auto c = h.client();
  REQUIRE(c.Post("/sequences/phantom/uips", uip_body(h.uips), "application/json")->status == 200);
  CHECK(c.Post("/jobs", R"({"sequence": "phantom", "params": {"bogus": 1}})", "application/json")->status == 400);
  CHECK(c.Post("/jobs", job_body(2), "application/json")->status == 400);
  REQUIRE(c.Post("/sequences/blank/uips", uip_body(h.uips), "application/json")->status == 200);
  auto res = c.Post("/jobs", R"({"sequence": "blank"})", "application/json");
  REQUIRE(res);
  REQUIRE(res->status == 202);
  const std::string job = Json::parse(res->body)["job"];
  const auto status = wait_for(c, job);
  CHECK(status["status"] == "failed");
  CHECK_FALSE(status["error"].get<std::string>().empty());
  CHECK(c.Get("/jobs/" + job + "/result")->status == 422);
}

TEST_CASE("input scans are never modified") {
  Harness h(4);
  std::map<std::string, std::string> before;
  for (const auto& e : std::filesystem::directory_iterator(h.dir / "phantom")) {
    before[e.path().filename().string()] = read_text(e.path());
  }
  auto c = h.client();
  REQUIRE(c.Post("/sequences/phantom/uips", uip_body(h.uips), "application/json")->status == 200);
  const std::string job = Json::parse(c.Post("/jobs", job_body(), "application/json")->body)["job"];
  wait_for(c, job);
  c.Get("/sequences/phantom/frames/0");
  std::map<std::string, std::string> after;
  for (const auto& e : std::filesystem::directory_iterator(h.dir / "phantom")) {
    after[e.path().filename().string()] = read_text(e.path());
  }
  CHECK(before == after);
}

TEST_CASE("default port") {
  ::unsetenv("PROID_PORT");
  CHECK(default_port() == 8080);
  ::setenv("PROID_PORT", "9123", 1);
  CHECK(default_port() == 9123);
  ::setenv("PROID_PORT", "nonsense", 1);
  CHECK(default_port() == 8080);
  ::unsetenv("PROID_PORT");
}
