#include "fusionattack/remote.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <string_view>

#include <httplib.h>
#include <json.hpp>

#include "fusionattack/codec.hpp"
#include "fusionattack/errors.hpp"

namespace fusion {

using nlohmann::json;

namespace {

struct ParsedUrl {
  std::string host;
  int port = 80;
  std::string prefix;
};

ParsedUrl parse_url(std::string_view url) {
  constexpr std::string_view scheme = "http://";
  if (url.substr(0, scheme.size()) != scheme) {
    throw InvalidArgument("remote oracle URL must start with http://, got " + std::string(url));
  }
  url.remove_prefix(scheme.size());
  ParsedUrl out;
  const auto slash = url.find('/');
  std::string_view authority = url.substr(0, slash);
  if (slash != std::string_view::npos) {
    out.prefix = std::string(url.substr(slash));
    while (!out.prefix.empty() && out.prefix.back() == '/') out.prefix.pop_back();
  }
  const auto colon = authority.rfind(':');
  if (colon != std::string_view::npos) {
    out.host = std::string(authority.substr(0, colon));
    try {
      out.port = std::stoi(std::string(authority.substr(colon + 1)));
    } catch (const std::exception&) {
      throw InvalidArgument("bad port in remote oracle URL");
    }
  } else {
    out.host = std::string(authority);
  }
  if (out.host.empty()) throw InvalidArgument("remote oracle URL has no host");
  return out;
}

}  // namespace

double parse_score_response(const std::string& body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed score response: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("fake_probability") ||
      !doc["fake_probability"].is_number()) {
    throw ProtocolError("score response lacks a numeric fake_probability");
  }
  return doc["fake_probability"].get<double>();
}

struct RemoteOracle::Impl {
  ParsedUrl url;
  httplib::Client client;

  explicit Impl(ParsedUrl u) : url(std::move(u)), client(url.host, url.port) {}
};

RemoteOracle::RemoteOracle(RemoteEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.retries < 0) throw InvalidArgument("retry count must be non-negative");
  impl_ = std::make_unique<Impl>(parse_url(endpoint_.url));
  auto& c = impl_->client;
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(endpoint_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(endpoint_.timeout - secs);
  c.set_connection_timeout(secs.count(), usecs.count());
  c.set_read_timeout(secs.count(), usecs.count());
  c.set_write_timeout(secs.count(), usecs.count());
  c.set_keep_alive(false);
  if (!endpoint_.bearer_token.empty()) c.set_bearer_token_auth(endpoint_.bearer_token);
}

RemoteOracle::~RemoteOracle() = default;

namespace {

template <typename Send, typename Parse>
auto with_retries(const RemoteEndpoint& ep, std::size_t& attempts, Send send, Parse parse) {
  std::string last_error;
  for (int attempt = 0; attempt <= ep.retries; ++attempt) {
    if (attempt > 0 && ep.backoff.count() > 0) std::this_thread::sleep_for(ep.backoff);
    ++attempts;
    httplib::Result res = send();
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status == 429) {
      last_error = "HTTP 429";
      continue;
    }
    if (res->status != 200) {
      throw ProtocolError("remote oracle answered HTTP " + std::to_string(res->status));
    }
    return parse(res->body);
  }
  throw TransportError("remote oracle " + ep.url + " unreachable after " +
                       std::to_string(ep.retries + 1) + " attempts: " + last_error);
}

}  // namespace

double RemoteOracle::fake_probability(const Image& img) {
  const auto png = encode_png(img);
  const std::string body(png.begin(), png.end());
  const std::string path = impl_->url.prefix + "/score";
  return with_retries(
      endpoint_, attempts_, [&] { return impl_->client.Post(path, body, "image/png"); },
      [](const std::string& b) { return parse_score_response(b); });
}

std::vector<double> RemoteOracle::fake_probabilities(std::span<const Image> imgs) {
  httplib::MultipartFormDataItems items;
  items.reserve(imgs.size());
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const auto png = encode_png(imgs[i]);
    items.push_back({"images", std::string(png.begin(), png.end()),
                     "image_" + std::to_string(i) + ".png", "image/png"});
  }
  const std::string path = impl_->url.prefix + "/batch_score";
  return with_retries(
      endpoint_, attempts_, [&] { return impl_->client.Post(path, items); },
      [](const std::string& b) {
        json doc;
        try {
          doc = json::parse(b);
        } catch (const json::exception& e) {
          throw ProtocolError(std::string("malformed batch response: ") + e.what());
        }
        if (!doc.is_array()) throw ProtocolError("batch response is not an array");
        std::vector<double> out;
        for (const auto& v : doc) {
          if (!v.is_number()) throw ProtocolError("batch response holds a non-number");
          out.push_back(v.get<double>());
        }
        return out;
      });
}

DetectorScore remote_score(RemoteOracle& oracle, const Image& img, QueryLedger& ledger) {
  return score(oracle, img, ledger);
}

// ---------------------------------------------------------------------------

struct StubScoringServer::Impl {
  Handler handler;
  Options options;
  httplib::Server server;
  std::thread thread;
  std::atomic<std::size_t> counter{0};
  int port = 0;

  StubScoringServer::Response handle(const std::string& bytes) {
    Image img;
    try {
      img = decode_png(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    } catch (const Error&) {
      return {400, R"({"error":"undecodable image"})", {}};
    }
    auto r = handler(counter.fetch_add(1), img);
    if (r.delay.count() > 0) std::this_thread::sleep_for(r.delay);
    return r;
  }

  bool authorized(const httplib::Request& req) const {
    if (options.bearer_token.empty()) return true;
    return req.get_header_value("Authorization") == "Bearer " + options.bearer_token;
  }
};

StubScoringServer::StubScoringServer(Handler handler, Options options)
    : impl_(std::make_unique<Impl>()) {
  impl_->handler = std::move(handler);
  impl_->options = std::move(options);
  auto* impl = impl_.get();
  impl->server.set_payload_max_length(impl->options.max_request_bytes);

  impl->server.Post("/score", [impl](const httplib::Request& req, httplib::Response& res) {
    if (!impl->authorized(req)) {
      res.status = 401;
      res.set_content(R"({"error":"unauthorized"})", "application/json");
      return;
    }
    const auto r = impl->handle(req.body);
    res.status = r.status;
    res.set_content(r.body, "application/json");
  });

  impl->server.Post("/batch_score", [impl](const httplib::Request& req, httplib::Response& res) {
    if (!impl->authorized(req)) {
      res.status = 401;
      res.set_content(R"({"error":"unauthorized"})", "application/json");
      return;
    }
    json out = json::array();
    for (const auto& part : req.get_file_values("images")) {
      const auto r = impl->handle(part.content);
      if (r.status != 200) {
        res.status = r.status;
        res.set_content(r.body, "application/json");
        return;
      }
      try {
        out.push_back(parse_score_response(r.body));
      } catch (const ProtocolError&) {
        res.status = 500;
        res.set_content(R"({"error":"internal error"})", "application/json");
        return;
      }
    }
    res.set_content(out.dump(), "application/json");
  });
}

StubScoringServer::~StubScoringServer() { stop(); }

StubScoringServer::Handler StubScoringServer::from_model(std::function<double(const Image&)> model) {
  return [model = std::move(model)](std::size_t, const Image& img) -> Response {
    double p = 0.0;
    try {
      p = model(img);
    } catch (...) {
      return {500, R"({"error":"internal error"})", {}};
    }
    if (std::isnan(p)) return {500, R"({"error":"internal error"})", {}};
    p = std::clamp(p, 0.0, 1.0);
    return {200, json{{"fake_probability", p}}.dump(), {}};
  };
}

int StubScoringServer::start(int port) {
  if (impl_->thread.joinable()) return impl_->port;
  if (port == 0) {
    impl_->port = impl_->server.bind_to_any_port("127.0.0.1");
  } else {
    impl_->port = impl_->server.bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (impl_->port <= 0) throw TransportError("stub server could not bind");
  impl_->thread = std::thread([impl = impl_.get()] { impl->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return impl_->port;
}

void StubScoringServer::stop() {
  if (!impl_ || !impl_->thread.joinable()) return;
  impl_->server.stop();
  impl_->thread.join();
}

std::string StubScoringServer::url() const {
  return "http://127.0.0.1:" + std::to_string(impl_->port);
}

std::size_t StubScoringServer::requests() const { return impl_->counter.load(); }

}  // namespace fusion
