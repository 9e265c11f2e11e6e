#include "lingobf/eval_runner.hpp"

#include <cstdlib>
#include <ctime>
#include <fstream>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "lingobf/corpus.hpp"
#include "lingobf/digest.hpp"

namespace lingobf {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRunSchema = 1;

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof(buffer), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

std::optional<std::string> env(const std::string& name) {
  const char* value = std::getenv(name.c_str());
  if (value == nullptr) return std::nullopt;
  return std::string(value);
}

json substitute(const json& node, const PromptInstance& prompt) {
  if (node.is_string()) {
    const auto& s = node.get_ref<const std::string&>();
    if (s == "{system}") return prompt.system_message;
    if (s == "{user}") return prompt.user_message;
    return node;
  }
  if (node.is_array() || node.is_object()) {
    json out = node;
    for (auto& [key, value] : out.items()) value = substitute(value, prompt);
    return out;
  }
  return node;
}

bool retryable(int status) { return status == 408 || status == 429 || status >= 500; }

}  // namespace

std::string_view to_string(ResponseStatus status) {
  switch (status) {
    case ResponseStatus::Ok:
      return "ok";
    case ResponseStatus::Empty:
      return "empty";
    case ResponseStatus::BadParsing:
      return "bad_parsing";
    case ResponseStatus::TransportError:
      return "transport_error";
  }
  return "?";
}

ResponseStatus status_from_string(std::string_view name) {
  for (const auto s : {ResponseStatus::Ok, ResponseStatus::Empty, ResponseStatus::BadParsing,
                       ResponseStatus::TransportError}) {
    if (to_string(s) == name) return s;
  }
  throw ValidationError("unknown response status `" + std::string(name) + "`");
}

EndpointConfig endpoint_from_json(const json& doc) {
  EndpointConfig cfg;
  try {
    cfg.name = doc.at("name").get<std::string>();
    cfg.url = doc.at("url").get<std::string>();
    cfg.request_shape = doc.value("request_shape", cfg.request_shape);
    if (doc.contains("headers")) cfg.headers = doc["headers"].get<std::map<std::string, std::string>>();
    if (doc.contains("credential_env")) {
      cfg.credential_env = doc["credential_env"].get<std::vector<std::string>>();
    }
    cfg.body_template = doc.value("body", json{{"messages",
                                                {{{"role", "system"}, {"content", "{system}"}},
                                                 {{"role", "user"}, {"content", "{user}"}}}}});
    cfg.response_path = doc.value("response_path", cfg.response_path);
    cfg.supports_temperature = doc.value("supports_temperature", true);
    if (doc.contains("max_output_tokens") && !doc["max_output_tokens"].is_null()) {
      cfg.max_output_tokens = doc["max_output_tokens"].get<std::size_t>();
    }
    cfg.max_tokens_field = doc.value("max_tokens_field", cfg.max_tokens_field);
    cfg.timeout_s = doc.value("timeout_s", cfg.timeout_s);
    cfg.max_retries = doc.value("max_retries", cfg.max_retries);
    cfg.backoff_ms = doc.value("backoff_ms", cfg.backoff_ms);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("endpoint config: ") + e.what());
  }
  if (cfg.request_shape != "chat-completion") {
    throw ValidationError("endpoint config: unsupported request_shape " + cfg.request_shape);
  }
  if (doc.contains("temperature") && doc["temperature"] != 0) {
    throw ValidationError("endpoint config: temperature is fixed at 0");
  }
  return cfg;
}

EndpointConfig load_endpoint(const fs::path& path) {
  const auto text = read_text_file(path);
  const auto doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw ValidationError(path.string() + ": not valid JSON");
  return endpoint_from_json(doc);
}

json build_request_body(const EndpointConfig& endpoint, const PromptInstance& prompt) {
  json body = substitute(endpoint.body_template, prompt);
  if (endpoint.supports_temperature) body["temperature"] = 0;
  if (endpoint.max_output_tokens) body[endpoint.max_tokens_field] = *endpoint.max_output_tokens;
  return body;
}

std::map<std::string, std::string> resolve_headers(const EndpointConfig& endpoint) {
  std::vector<std::string> missing;
  for (const auto& name : endpoint.credential_env) {
    if (!env(name)) missing.push_back(name);
  }
  static const std::regex var(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
  std::map<std::string, std::string> out;
  for (const auto& [key, value] : endpoint.headers) {
    std::string resolved;
    auto begin = std::sregex_iterator(value.begin(), value.end(), var);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      resolved += value.substr(last, static_cast<std::size_t>(it->position()) - last);
      const auto name = (*it)[1].str();
      if (auto v = env(name)) {
        resolved += *v;
      } else {
        missing.push_back(name);
      }
      last = static_cast<std::size_t>(it->position() + it->length());
    }
    resolved += value.substr(last);
    out[key] = resolved;
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : std::set<std::string>(missing.begin(), missing.end())) list += " " + m;
    throw Error("credentials", "unset credential environment variable(s):" + list);
  }
  return out;
}

json to_json(const ResponseRecord& record) {
  json out;
  out["prompt_id"] = record.prompt_id;
  out["raw_text"] = record.raw_text;
  out["parsed"] = record.parsed ? json(*record.parsed) : json(nullptr);
  out["status"] = to_string(record.status);
  out["attempts"] = record.attempts;
  out["latency_ms"] = record.latency_ms;
  out["timestamp"] = record.timestamp;
  if (!record.error.empty()) out["error"] = record.error;
  return out;
}

ResponseRecord record_from_json(const json& doc) {
  ResponseRecord r;
  r.prompt_id = doc.at("prompt_id").get<std::string>();
  r.raw_text = doc.value("raw_text", std::string());
  if (doc.contains("parsed") && !doc["parsed"].is_null()) r.parsed = doc["parsed"].get<AnswerMap>();
  r.status = status_from_string(doc.at("status").get<std::string>());
  r.attempts = doc.value("attempts", std::size_t{0});
  r.latency_ms = doc.value("latency_ms", std::int64_t{0});
  r.timestamp = doc.value("timestamp", std::string());
  r.error = doc.value("error", std::string());
  return r;
}

namespace {

// Reads records.jsonl, dropping a torn final line. Returns the records and
// whether the file needs rewriting.
std::pair<std::vector<ResponseRecord>, bool> read_records(const fs::path& path) {
  std::vector<ResponseRecord> out;
  if (!fs::exists(path)) return {out, false};
  const auto text = read_text_file(path);
  bool torn = false;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto end = text.find('\n', pos);
    if (end == std::string::npos) {
      torn = true;
      break;
    }
    const auto line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    if (line.empty()) continue;
    const auto doc = json::parse(line, nullptr, false);
    if (doc.is_discarded()) {
      torn = true;
      continue;
    }
    out.push_back(record_from_json(doc));
  }
  return {out, torn};
}

}  // namespace

std::vector<ResponseRecord> load_records(const fs::path& run_dir) {
  return read_records(run_dir / "records.jsonl").first;
}

RunSummary run(std::span<const PromptInstance> prompts, const EndpointConfig& endpoint,
               const fs::path& run_dir, const Transport& transport, const RunOptions& options) {
  if (prompts.empty()) throw ValidationError("no prompts to run");
  const auto headers = resolve_headers(endpoint);
  fs::create_directories(run_dir);

  std::string prompt_stream;
  for (const auto& p : prompts) prompt_stream += to_json(p).dump() + "\n";
  json manifest = {{"schema_version", kRunSchema},
                   {"toolkit_version", kToolkitVersion},
                   {"endpoint", endpoint.name},
                   {"url", endpoint.url},
                   {"prompt_count", prompts.size()},
                   {"prompts_digest", sha256_hex(prompt_stream)}};
  const auto manifest_path = run_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    const auto existing = json::parse(read_text_file(manifest_path), nullptr, false);
    if (existing.is_discarded() || existing.value("endpoint", std::string()) != endpoint.name ||
        existing.value("prompts_digest", std::string()) != manifest["prompts_digest"]) {
      throw ValidationError("run directory " + run_dir.string() +
                            " belongs to a different endpoint or prompt set");
    }
  } else {
    write_text_file(manifest_path, manifest.dump(2) + "\n");
  }

  const auto records_path = run_dir / "records.jsonl";
  auto [existing, torn] = read_records(records_path);
  if (torn) {
    std::string clean;
    for (const auto& r : existing) clean += to_json(r).dump() + "\n";
    write_text_file(records_path, clean);
  }

  RunSummary summary;
  summary.total = prompts.size();
  std::set<std::string> final_ids;
  for (const auto& r : existing) final_ids.insert(r.prompt_id);

  std::vector<const PromptInstance*> pending;
  std::set<std::string> queued;
  for (const auto& p : prompts) {
    if (final_ids.contains(p.prompt_id)) {
      ++summary.already_final;
    } else if (queued.insert(p.prompt_id).second) {
      pending.push_back(&p);
    }
  }

  std::ofstream out(records_path, std::ios::binary | std::ios::app);
  if (!out) throw IoError("cannot append to " + records_path.string());
  std::mutex out_mutex;
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> completed{0};
  const auto sleep = options.sleep ? options.sleep : [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };
  auto cancelled = [&] { return options.cancel != nullptr && options.cancel->load(); };

  auto execute = [&](const PromptInstance& prompt) -> std::optional<ResponseRecord> {
    ResponseRecord record;
    record.prompt_id = prompt.prompt_id;
    const HttpRequest request{endpoint.url, headers, build_request_body(endpoint, prompt).dump(),
                              endpoint.timeout_s};
    const auto started = std::chrono::steady_clock::now();
    std::optional<std::string> reply;
    std::string error;
    for (std::size_t attempt = 0; attempt <= endpoint.max_retries; ++attempt) {
      if (cancelled()) return std::nullopt;
      if (attempt > 0) sleep(std::chrono::milliseconds(endpoint.backoff_ms << (attempt - 1)));
      record.attempts = attempt + 1;
      bool retry = false;
      try {
        const auto response = transport(request);
        if (response.status >= 200 && response.status < 300) {
          const auto body = json::parse(response.body, nullptr, false);
          if (body.is_discarded()) {
            error = "response body is not JSON";
            break;
          }
          const json::json_pointer pointer(endpoint.response_path);
          if (!body.contains(pointer) || body.at(pointer).is_null()) {
            reply = std::string();
          } else if (body.at(pointer).is_string()) {
            reply = body.at(pointer).get<std::string>();
          } else {
            reply = body.at(pointer).dump();
          }
          break;
        }
        error = "HTTP " + std::to_string(response.status);
        retry = retryable(response.status);
      } catch (const TransportFailure& e) {
        error = e.what();
        retry = true;
      }
      if (!retry) break;
    }
    if (cancelled()) return std::nullopt;
    record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
    record.timestamp = utc_timestamp();
    if (reply) {
      record.raw_text = *reply;
      const auto outcome = parse_response(record.raw_text, prompt.expected_keys);
      record.parsed = outcome.parsed;
      record.status = outcome.status;
    } else {
      record.status = ResponseStatus::TransportError;
      record.error = error;
    }
    return record;
  };

  auto worker = [&] {
    for (;;) {
      if (cancelled()) return;
      const auto index = next.fetch_add(1);
      if (index >= pending.size()) return;
      auto record = execute(*pending[index]);
      if (!record) return;
      const auto line = to_json(*record).dump() + "\n";
      std::lock_guard lock(out_mutex);
      out << line;
      out.flush();
      ++completed;
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.parallelism, pending.size()));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  summary.completed = completed.load();
  summary.cancelled = cancelled();
  return summary;
}

ErrorSummary summarize_errors(std::string endpoint, std::span<const ResponseRecord> records) {
  ErrorSummary s;
  s.endpoint = std::move(endpoint);
  s.total = records.size();
  for (const auto& r : records) {
    if (r.status == ResponseStatus::Empty) ++s.empty;
    if (r.status == ResponseStatus::BadParsing) ++s.bad_parsing;
    if (r.status == ResponseStatus::TransportError) ++s.transport_error;
  }
  return s;
}

ErrorSummary summarize_errors(const fs::path& run_dir) {
  std::string name = run_dir.filename().string();
  const auto manifest_path = run_dir / "manifest.json";
  if (fs::exists(manifest_path)) {
    const auto manifest = json::parse(read_text_file(manifest_path), nullptr, false);
    if (!manifest.is_discarded()) name = manifest.value("endpoint", name);
  }
  const auto records = load_records(run_dir);
  return summarize_errors(name, records);
}

std::string error_summary_csv(std::span<const ErrorSummary> rows) {
  std::ostringstream out;
  out << "model,total,empty_response,bad_parsing,transport_error\n";
  for (const auto& r : rows) {
    out << r.endpoint << ',' << r.total << ',' << r.empty << ',' << r.bad_parsing << ','
        << r.transport_error << '\n';
  }
  return out.str();
}

std::string error_summary_markdown(std::span<const ErrorSummary> rows) {
  std::ostringstream out;
  out << "| Model | Total | Empty Response | Bad Parsing |\n|---|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out << "| " << r.endpoint << " | " << r.total << " | " << r.empty << " | " << r.bad_parsing
        << " |\n";
  }
  return out.str();
}

}  // namespace lingobf
