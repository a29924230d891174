#pragma once

#include <filesystem>
#include <memory>
#include <string>

namespace proid {

/// Local HTTP front end for the reader workflow. Sequences are the
/// subdirectories of the data root (each in the load_sequence layout); the
/// directory name is the sequence id. Input files are never modified.
///
///   GET  /sequences                    list of loaded scans
///   GET  /sequences/{id}/frames/{k}    frame k as PNG
///   POST /sequences/{id}/uips          {"apex": [x, y], "mv_left": ..., "mv_right": ...}
///   POST /jobs                         {"sequence": id, "params": {...}} -> 202
///   GET  /jobs/{id}                    status
///   GET  /jobs/{id}/result             boundaries, volume curve and metrics
class Service {
 public:
  explicit Service(const std::filesystem::path& data_root);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds to host:port (port 0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port);
  /// Serves until stop(); call after bind().
  void listen();
  void stop();
  /// Blocks until every submitted job has finished.
  void drain();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

/// PROID_PORT when set and valid, otherwise 8080.
int default_port();

}  // namespace proid
