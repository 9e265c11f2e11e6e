#pragma once

// Running prompts against chat-completion style endpoints.
//
// A run directory holds
//   manifest.json   endpoint name and URL, prompt count and digest
//   records.jsonl   one ResponseRecord per line, appended in completion order
//
// Runs are resumable: prompts that already have a record are skipped, and a
// truncated final line left by a crash is discarded on the next start.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lingobf/error.hpp"
#include "lingobf/prompt.hpp"

namespace lingobf {

// Endpoint config file (JSON):
//   name, url                 required
//   headers                   {"Authorization": "Bearer ${API_KEY}"}; ${VAR} is
//                             read from the environment at run time
//   credential_env            variables that must be set before a run starts
//   body                      request template; string values "{system}" and
//                             "{user}" are replaced by the prompt
//   response_path             JSON pointer to the reply text
//                             (default /choices/0/message/content)
//   supports_temperature      when true (default) the body gets temperature 0
//   max_output_tokens, max_tokens_field
//   timeout_s (120), max_retries (3), backoff_ms (500)
struct EndpointConfig {
  std::string name;
  std::string url;
  std::string request_shape = "chat-completion";
  std::map<std::string, std::string> headers;
  std::vector<std::string> credential_env;
  nlohmann::json body_template;
  std::string response_path = "/choices/0/message/content";
  bool supports_temperature = true;
  std::optional<std::size_t> max_output_tokens;
  std::string max_tokens_field = "max_tokens";
  double timeout_s = 120.0;
  std::size_t max_retries = 3;
  std::size_t backoff_ms = 500;
};

EndpointConfig endpoint_from_json(const nlohmann::json& doc);
EndpointConfig load_endpoint(const std::filesystem::path& path);

nlohmann::json build_request_body(const EndpointConfig& endpoint, const PromptInstance& prompt);

// Throws Error("credentials") when a listed or referenced variable is unset.
std::map<std::string, std::string> resolve_headers(const EndpointConfig& endpoint);

struct HttpRequest {
  std::string url;
  std::map<std::string, std::string> headers;
  std::string body;
  double timeout_s = 120.0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

class TransportFailure : public Error {
 public:
  explicit TransportFailure(const std::string& message) : Error("transport_error", message) {}
};

// Throws TransportFailure when no HTTP response was received.
using Transport = std::function<HttpResponse(const HttpRequest&)>;

Transport http_transport();

enum class ResponseStatus { Ok, Empty, BadParsing, TransportError };

std::string_view to_string(ResponseStatus status);
ResponseStatus status_from_string(std::string_view name);

using AnswerMap = std::map<std::string, std::string>;

struct ResponseRecord {
  std::string prompt_id;
  std::string raw_text;
  std::optional<AnswerMap> parsed;
  ResponseStatus status = ResponseStatus::BadParsing;
  std::size_t attempts = 0;
  std::int64_t latency_ms = 0;
  std::string timestamp;
  std::string error;
};

nlohmann::json to_json(const ResponseRecord& record);
ResponseRecord record_from_json(const nlohmann::json& doc);

// Recovery ladder, first success wins:
//   1 the whole text is a JSON object
//   2 the first ``` fenced block is a JSON object
//   3 the first balanced {...} substring that parses as an object
//   4 per-key "<key>": "<value>" matches for the expected keys
struct ParseOptions {
  int first_step = 1;  // steps before this one are skipped
};

struct ParseOutcome {
  std::optional<AnswerMap> parsed;
  ResponseStatus status = ResponseStatus::BadParsing;
  int step = 0;  // ladder step that succeeded, 0 if none
};

ParseOutcome parse_response(std::string_view raw, std::span<const std::string> expected_keys,
                            ParseOptions options = {});

// Text of the first balanced {...} at or after `from`, skipping braces inside
// JSON strings. Empty when none closes.
std::string extract_balanced_object(std::string_view text, std::size_t from = 0);

struct RunOptions {
  std::size_t parallelism = 1;
  // When set, workers stop taking prompts and drop results still in flight,
  // the same state a killed process leaves behind.
  const std::atomic<bool>* cancel = nullptr;
  std::function<void(std::chrono::milliseconds)> sleep;  // default: this_thread::sleep_for
};

struct RunSummary {
  std::size_t total = 0;
  std::size_t already_final = 0;
  std::size_t completed = 0;
  bool cancelled = false;
};

RunSummary run(std::span<const PromptInstance> prompts, const EndpointConfig& endpoint,
               const std::filesystem::path& run_dir, const Transport& transport,
               const RunOptions& options = {});

std::vector<ResponseRecord> load_records(const std::filesystem::path& run_dir);

struct ErrorSummary {
  std::string endpoint;
  std::size_t total = 0;
  std::size_t empty = 0;
  std::size_t bad_parsing = 0;
  std::size_t transport_error = 0;
};

ErrorSummary summarize_errors(const std::filesystem::path& run_dir);
ErrorSummary summarize_errors(std::string endpoint, std::span<const ResponseRecord> records);

std::string error_summary_csv(std::span<const ErrorSummary> rows);
std::string error_summary_markdown(std::span<const ErrorSummary> rows);

}  // namespace lingobf
