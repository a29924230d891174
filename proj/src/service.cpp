#include "proid/service.hpp"

#include <httplib.h>

#include <condition_variable>
#include <cstdlib>
#include <deque>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <thread>

#include "proid/error.hpp"
#include "proid/io.hpp"

namespace proid {

namespace {

enum class JobStatus { Queued, Running, Done, Failed };

const char* status_name(JobStatus s) {
  switch (s) {
    case JobStatus::Queued: return "queued";
    case JobStatus::Running: return "running";
    case JobStatus::Done: return "done";
    case JobStatus::Failed: return "failed";
  }
  return "unknown";
}

struct LoadedSequence {
  ScanSequence scan;
  std::optional<UipFrame> uips;
};

struct Job {
  std::string id;
  std::string sequence;
  JobStatus status = JobStatus::Queued;
  std::string error;
  UipFrame uips;
  PipelineParams params;
  std::string result;  // serialized once, served verbatim
};

void reply(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void fail(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, Json{{"error", message}});
}

}  // namespace

struct Service::State {
  fs::path root;
  std::map<std::string, LoadedSequence> sequences;
  std::map<std::string, Job> jobs;
  std::deque<std::string> queue;
  int next_job = 1;
  bool busy = false;
  bool stopping = false;
  std::mutex mutex;
  std::condition_variable wake;
  std::condition_variable idle;
  std::thread worker;
  httplib::Server server;

  void run_worker() {
    std::unique_lock lock(mutex);
    for (;;) {
      wake.wait(lock, [&] { return stopping || !queue.empty(); });
      if (stopping) return;
      Job& job = jobs.at(queue.front());
      queue.pop_front();
      job.status = JobStatus::Running;
      busy = true;
      const ScanSequence& scan = sequences.at(job.sequence).scan;
      const UipFrame uips = job.uips;
      const PipelineParams params = job.params;
      lock.unlock();

      std::string result;
      std::string error;
      try {
        const auto seg = segment_sequence(scan, uips, params);
        result = result_to_json(seg, scan.pixel_spacing_mm).dump();
      } catch (const Error& e) {
        error = std::string(to_string(e.code())) + ": " + e.what();
      } catch (const std::exception& e) {
        error = e.what();
      }

      lock.lock();
      job.status = error.empty() ? JobStatus::Done : JobStatus::Failed;
      job.result = std::move(result);
      job.error = std::move(error);
      busy = false;
      idle.notify_all();
    }
  }

  void routes() {
    server.Get("/sequences", [this](const httplib::Request&, httplib::Response& res) {
      std::lock_guard lock(mutex);
      Json list = Json::array();
      for (const auto& [id, s] : sequences) {
        list.push_back({{"id", id},
                        {"frames", s.scan.size()},
                        {"width", s.scan.width()},
                        {"height", s.scan.height()},
                        {"pixel_spacing_mm", s.scan.pixel_spacing_mm},
                        {"frame_interval_s", s.scan.frame_interval_s},
                        {"uips", s.uips ? uips_to_json(*s.uips) : Json(nullptr)}});
      }
      reply(res, 200, list);
    });

    server.Get(R"(/sequences/([^/]+)/frames/(\d+))",
               [this](const httplib::Request& req, httplib::Response& res) {
                 std::lock_guard lock(mutex);
                 const auto it = sequences.find(req.matches[1]);
                 if (it == sequences.end()) return fail(res, 404, "unknown sequence");
                 const std::size_t k = std::stoul(req.matches[2]);
                 if (k >= it->second.scan.size()) return fail(res, 404, "frame out of range");
                 res.status = 200;
                 res.set_content(encode_png(it->second.scan.frames[k]), "image/png");
               });

    server.Post(R"(/sequences/([^/]+)/uips)",
                [this](const httplib::Request& req, httplib::Response& res) {
                  std::lock_guard lock(mutex);
                  const auto it = sequences.find(req.matches[1]);
                  if (it == sequences.end()) return fail(res, 404, "unknown sequence");
                  UipFrame uips;
                  try {
                    uips = uips_from_json(Json::parse(req.body));
                  } catch (const Json::exception& e) {
                    return fail(res, 400, std::string("malformed JSON: ") + e.what());
                  } catch (const Error& e) {
                    return fail(res, 400, e.what());
                  }
                  const Image& frame = it->second.scan.frames.front();
                  for (Point p : {uips.apex, uips.mv_left, uips.mv_right}) {
                    if (!frame.contains(p.x, p.y)) return fail(res, 400, "UIP outside the frame");
                  }
                  it->second.uips = uips;
                  reply(res, 200, Json{{"sequence", it->first}, {"uips", uips_to_json(uips)}});
                });

    server.Post("/jobs", [this](const httplib::Request& req, httplib::Response& res) {
      Json body;
      try {
        body = Json::parse(req.body);
      } catch (const Json::exception& e) {
        return fail(res, 400, std::string("malformed JSON: ") + e.what());
      }
      if (!body.is_object() || !body.contains("sequence") || !body["sequence"].is_string()) {
        return fail(res, 400, "body needs a \"sequence\" id");
      }
      PipelineParams params;
      try {
        params = params_from_json(body.value("params", Json(nullptr)));
      } catch (const Error& e) {
        return fail(res, 400, e.what());
      }

      std::lock_guard lock(mutex);
      const std::string seq_id = body["sequence"];
      const auto it = sequences.find(seq_id);
      if (it == sequences.end()) return fail(res, 404, "unknown sequence");
      if (!it->second.uips) return fail(res, 400, "no UIPs stored for this sequence");
      for (const auto& [id, job] : jobs) {
        if (job.sequence == seq_id &&
            (job.status == JobStatus::Queued || job.status == JobStatus::Running)) {
          return reply(res, 409, Json{{"error", "a job is already running for this sequence"},
                                      {"job", id}});
        }
      }
      Job job;
      job.id = "job-" + std::to_string(next_job++);
      job.sequence = seq_id;
      job.uips = *it->second.uips;
      job.params = params;
      const std::string id = job.id;
      jobs.emplace(id, std::move(job));
      queue.push_back(id);
      wake.notify_all();
      reply(res, 202, Json{{"job", id}, {"status", "queued"}});
    });

    server.Get(R"(/jobs/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::lock_guard lock(mutex);
      const auto it = jobs.find(req.matches[1]);
      if (it == jobs.end()) return fail(res, 404, "unknown job");
      const Job& job = it->second;
      Json body{{"job", job.id}, {"sequence", job.sequence}, {"status", status_name(job.status)}};
      if (job.status == JobStatus::Failed) body["error"] = job.error;
      reply(res, 200, body);
    });

    server.Get(R"(/jobs/([^/]+)/result)", [this](const httplib::Request& req,
                                                 httplib::Response& res) {
      std::lock_guard lock(mutex);
      const auto it = jobs.find(req.matches[1]);
      if (it == jobs.end()) return fail(res, 404, "unknown job");
      const Job& job = it->second;
      if (job.status == JobStatus::Failed) return fail(res, 422, job.error);
      if (job.status != JobStatus::Done) {
        return reply(res, 409, Json{{"error", "job not finished"}, {"status", status_name(job.status)}});
      }
      res.status = 200;
      res.set_content(job.result, "application/json");
    });
  }
};

Service::Service(const fs::path& data_root) : state_(std::make_unique<State>()) {
  state_->root = data_root;
  if (!fs::is_directory(data_root)) {
    throw Error(ErrorCode::Io, "data directory not found: " + data_root.string());
  }
  for (const auto& entry : fs::directory_iterator(data_root)) {
    if (!entry.is_directory()) continue;
    try {
      state_->sequences[entry.path().filename().string()] = {load_sequence(entry.path()), {}};
    } catch (const Error& e) {
      std::cerr << "skipping " << entry.path() << ": " << e.what() << "\n";
    }
  }
  state_->routes();
  state_->worker = std::thread([s = state_.get()] { s->run_worker(); });
}

Service::~Service() {
  stop();
  {
    std::lock_guard lock(state_->mutex);
    state_->stopping = true;
  }
  state_->wake.notify_all();
  if (state_->worker.joinable()) state_->worker.join();
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = state_->server.bind_to_any_port(host);
    if (bound < 0) throw Error(ErrorCode::Io, "cannot bind " + host);
    return bound;
  }
  if (!state_->server.bind_to_port(host, port)) {
    throw Error(ErrorCode::Io, "cannot bind " + host + ":" + std::to_string(port));
  }
  return port;
}

void Service::listen() { state_->server.listen_after_bind(); }

void Service::stop() { state_->server.stop(); }

void Service::drain() {
  std::unique_lock lock(state_->mutex);
  state_->idle.wait(lock, [&] { return state_->queue.empty() && !state_->busy; });
}

int default_port() {
  if (const char* env = std::getenv("PROID_PORT")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0 && v < 65536) return static_cast<int>(v);
  }
  return 8080;
}

}  // namespace proid
