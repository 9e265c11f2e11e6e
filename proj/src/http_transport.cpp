#include <regex>

#include "httplib.h"
#include "lingobf/eval_runner.hpp"

namespace lingobf {

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  static const std::regex pattern(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(url, m, pattern)) throw TransportFailure("malformed endpoint url " + url);
  return {m[1].str(), m[2].matched ? m[2].str() : "/"};
}

}  // namespace

Transport http_transport() {
  return [](const HttpRequest& request) {
    const auto url = split_url(request.url);
    httplib::Client client(url.origin);
    const auto seconds = static_cast<time_t>(request.timeout_s);
    const auto micros = static_cast<time_t>((request.timeout_s - static_cast<double>(seconds)) * 1e6);
    client.set_connection_timeout(seconds, micros);
    client.set_read_timeout(seconds, micros);
    client.set_write_timeout(seconds, micros);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) headers.emplace(k, v);
    auto result = client.Post(url.path, headers, request.body, "application/json");
    if (!result) throw TransportFailure("request failed: " + httplib::to_string(result.error()));
    return HttpResponse{result->status, result->body};
  };
}

}  // namespace lingobf
