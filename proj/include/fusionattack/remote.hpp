#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <thread>

#include "fusionattack/oracle.hpp"

namespace fusion {

// Wire protocol:
//   POST /score        body: PNG bytes (image/png)
//                      200 -> {"fake_probability": <number in [0,1]>}
//   POST /batch_score  multipart/form-data, one "images" part per PNG
//                      200 -> [<number>, ...] in part order
// 429 and transport failures are retried; any other non-200 status is a
// protocol error.
struct RemoteEndpoint {
  std::string url;  // "http://host:port[/prefix]"
  int retries = 3;  // extra attempts after the first one
  std::chrono::milliseconds timeout{10000};
  std::chrono::milliseconds backoff{0};
  std::string bearer_token;
};

class RemoteOracle : public Oracle {
 public:
  explicit RemoteOracle(RemoteEndpoint endpoint);
  ~RemoteOracle() override;

  double fake_probability(const Image& img) override;
  std::vector<double> fake_probabilities(std::span<const Image> imgs) override;
  std::string id() const override { return "remote:" + endpoint_.url; }

  // Attempts made so far, including retries.
  std::size_t attempts() const { return attempts_; }

 private:
  struct Impl;
  RemoteEndpoint endpoint_;
  std::unique_ptr<Impl> impl_;
  std::size_t attempts_ = 0;
};

DetectorScore remote_score(RemoteOracle& oracle, const Image& img, QueryLedger& ledger);

// Parses {"fake_probability": x}; throws ProtocolError on anything else.
// Range is not checked here.
double parse_score_response(const std::string& body);

// In-process HTTP server speaking the wire protocol, for tests and local
// experiments.
class StubScoringServer {
 public:
  struct Response {
    int status = 200;
    std::string body;
    std::chrono::milliseconds delay{0};
  };
  // Called once per decoded /score image; request_index counts every /score
  // request received, starting at 0.
  using Handler = std::function<Response(std::size_t request_index, const Image& img)>;

  struct Options {
    std::string bearer_token;                   // empty: no auth
    std::size_t max_request_bytes = 1u << 24;
  };

  explicit StubScoringServer(Handler handler, Options options);
  explicit StubScoringServer(Handler handler) : StubScoringServer(std::move(handler), Options{}) {}
  ~StubScoringServer();
  StubScoringServer(const StubScoringServer&) = delete;
  StubScoringServer& operator=(const StubScoringServer&) = delete;

  // Wraps a model callable the way a production adapter would: clamps the
  // output into [0,1] and turns exceptions into an opaque 500.
  static Handler from_model(std::function<double(const Image&)> model);

  // Binds to 127.0.0.1 on an ephemeral port (or the given one) and serves in
  // a background thread. Returns the port.
  int start(int port = 0);
  void stop();

  std::string url() const;
  std::size_t requests() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace fusion
