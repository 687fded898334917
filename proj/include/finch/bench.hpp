#pragma once

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "finch/corpus.hpp"
#include "finch/decompose.hpp"
#include "finch/execution.hpp"
#include "finch/jsonl.hpp"
#include "httplib.h"
#include "json.hpp"

namespace finch {

// The fixed one-shot prompt. Every run renders the identical template; only
// the question and schema slots vary.
inline constexpr const char* kPromptTemplate =
    "You are an expert SQL assistant. Your task is to understand Question, have a look at the "
    "database Schema and then help the user to find a syntactically correct and optimized SQL "
    "query.\n"
    "\n"
    "### Task:\n"
    "Generate an SQL query based on the user question and the schema.\n"
    "\n"
    "### Natural Language Question:\n"
    "{QUESTION}\n"
    "\n"
    "### Database Schema:\n"
    "{DATABASE}\n"
    "\n"
    "### Constraints:\n"
    "- Use standard SQL syntax.\n"
    "- Only use the tables and columns specified in the Database schema.\n"
    "- Avoid any assumptions or joins not evident in the schema.\n"
    "- If aggregation or filtering is needed, ensure logical correctness.\n"
    "\n"
    "### Expected Output:\n"
    "```sql\n";

struct BenchError : std::runtime_error {
  explicit BenchError(const std::string& msg) : std::runtime_error(msg) {}
};

// Full CREATE TABLE DDL (including foreign keys) straight from the schema
// catalog; this is what fills the prompt's schema slot.
inline std::string render_schema(const Database& db) {
  auto rows = db.catalog_query(
      "SELECT sql FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%' "
      "AND sql IS NOT NULL ORDER BY name");
  std::string out;
  for (const auto& row : rows) {
    if (!out.empty()) out += "\n\n";
    out += row.at(0).s + ";";
  }
  return out;
}

inline std::string build_prompt(const std::string& question, const std::string& schema_text) {
  if (trim_view(question).empty()) throw BenchError("empty question");
  if (trim_view(schema_text).empty()) throw BenchError("empty schema text");
  std::string prompt = kPromptTemplate;
  auto fill = [&](const std::string& slot, const std::string& value) {
    size_t pos = prompt.find(slot);
    prompt.replace(pos, slot.size(), value);
  };
  fill("{QUESTION}", question);
  fill("{DATABASE}", schema_text);
  return prompt;
}

struct Extraction {
  bool ok = false;
  std::string sql;
  std::string diagnostic;
};

namespace detail {

// Cuts the candidate down to "first SELECT/WITH keyword up to the first
// statement-terminating semicolon", honoring string quotes.
inline std::vector<std::string> keyword_anchored(const std::string& text) {
  std::string low = to_lower(text);
  std::vector<size_t> starts;
  for (const char* kw : {"select", "with"}) {
    size_t n = std::strlen(kw);
    for (size_t pos = low.find(kw); pos != std::string::npos; pos = low.find(kw, pos + 1)) {
      bool left_ok = pos == 0 || !(isalnum(static_cast<unsigned char>(low[pos - 1])) ||
                                   low[pos - 1] == '_');
      size_t end = pos + n;
      bool right_ok = end >= low.size() || !(isalnum(static_cast<unsigned char>(low[end])) ||
                                             low[end] == '_');
      if (left_ok && right_ok) {
        starts.push_back(pos);
        break;  // first occurrence of this keyword is enough
      }
    }
  }
  std::sort(starts.begin(), starts.end());
  std::vector<std::string> out;
  for (size_t start : starts) {
    char quote = 0;
    size_t stop = text.size();
    for (size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (quote) {
        if (c == quote) quote = 0;
      } else if (c == '\'' || c == '"') {
        quote = c;
      } else if (c == ';') {
        stop = i;
        break;
      }
    }
    std::string candidate = trim(text.substr(start, stop - start));
    if (!candidate.empty()) out.push_back(std::move(candidate));
  }
  return out;
}

}  // namespace detail

// Code-fence stripping plus keyword anchoring; the winner must survive the
// clause decomposer, otherwise the prediction is an extraction failure.
inline Extraction postprocess(const std::string& raw_output) {
  std::vector<std::string> candidates;
  size_t fence = raw_output.find("```");
  if (fence != std::string::npos) {
    size_t body = raw_output.find('\n', fence);
    if (body != std::string::npos) {
      ++body;
      size_t close = raw_output.find("```", body);
      candidates.push_back(raw_output.substr(
          body, close == std::string::npos ? std::string::npos : close - body));
    }
    // a model continuing the prompt's own ```sql opener puts the SQL before
    // the first fence it emits
    candidates.push_back(raw_output.substr(0, fence));
  }
  candidates.push_back(raw_output);
  for (const auto& c : candidates) {
    for (const auto& anchored : detail::keyword_anchored(c)) {
      if (decompose(anchored).ok) return {true, anchored, ""};
    }
  }
  return {false, "", "no parseable SQL found in model output"};
}

struct ModelEndpoint {
  std::string base_url;
  std::string model_name;
  std::string api_key_env = "FINCH_API_KEY";
  double temperature = 0.0;
  int max_tokens = 1024;
  int timeout_ms = 120000;
  int max_attempts = 3;
  int backoff_ms = 500;
  std::vector<std::string> stop = {"```"};
};

struct Prediction {
  std::string pair_id;
  std::string raw_output;
  std::optional<std::string> sql;
  double latency_ms = 0.0;
  int attempts = 0;
};

inline nlohmann::json prediction_to_json(const Prediction& p) {
  nlohmann::json j = {{"pair_id", p.pair_id},
                      {"raw_output", p.raw_output},
                      {"latency_ms", p.latency_ms},
                      {"attempts", p.attempts}};
  if (p.sql) j["sql"] = *p.sql;
  else j["sql"] = nullptr;
  return j;
}

inline Prediction prediction_from_json(const nlohmann::json& j) {
  Prediction p;
  p.pair_id = j.at("pair_id").get<std::string>();
  p.raw_output = j.value("raw_output", "");
  if (j.contains("sql") && !j.at("sql").is_null()) p.sql = j.at("sql").get<std::string>();
  p.latency_ms = j.value("latency_ms", 0.0);
  p.attempts = j.value("attempts", 0);
  return p;
}

inline std::vector<Prediction> read_predictions(const std::string& path) {
  std::vector<Prediction> out;
  for_each_jsonl_line(path, [&](size_t, const nlohmann::json& j) {
    out.push_back(prediction_from_json(j));
  });
  return out;
}

// Resume scan: tolerate a torn trailing line from an interrupted run.
inline std::set<std::string> completed_pair_ids(const std::string& path) {
  std::set<std::string> done;
  std::ifstream in(path);
  if (!in) return done;
  std::string line;
  while (std::getline(in, line)) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("pair_id")) continue;
    done.insert(j.at("pair_id").get<std::string>());
  }
  return done;
}

namespace detail {

struct HttpReply {
  bool transport_ok = false;
  int status = 0;
  std::string body;
  std::string error;
};

inline HttpReply post_chat(const ModelEndpoint& ep, const std::string& url_origin,
                           const std::string& url_path, const std::string& body) {
  httplib::Client cli(url_origin);
  cli.set_connection_timeout(ep.timeout_ms / 1000, (ep.timeout_ms % 1000) * 1000);
  cli.set_read_timeout(ep.timeout_ms / 1000, (ep.timeout_ms % 1000) * 1000);
  cli.set_write_timeout(ep.timeout_ms / 1000, (ep.timeout_ms % 1000) * 1000);
  httplib::Headers headers;
  if (const char* key = std::getenv(ep.api_key_env.c_str()); key && *key)
    headers.emplace("Authorization", std::string("Bearer ") + key);
  auto res = cli.Post(url_path, headers, body, "application/json");
  HttpReply reply;
  if (!res) {
    reply.error = "transport error: " + httplib::to_string(res.error());
    return reply;
  }
  reply.transport_ok = true;
  reply.status = res->status;
  reply.body = res->body;
  return reply;
}

inline void split_endpoint_url(const std::string& base_url, std::string& origin,
                               std::string& path) {
  std::string url = base_url;
  while (!url.empty() && url.back() == '/') url.pop_back();
  size_t scheme = url.find("://");
  size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  size_t slash = url.find('/', host_start);
  if (slash == std::string::npos) {
    origin = url;
    path = "/v1/chat/completions";
    return;
  }
  origin = url.substr(0, slash);
  path = url.substr(slash);
  if (path.size() >= 17 && path.substr(path.size() - 17) == "/chat/completions") return;
  if (path.size() >= 3 && path.substr(path.size() - 3) == "/v1") path += "/chat/completions";
  else path += "/v1/chat/completions";
}

}  // namespace detail

struct BenchResult {
  size_t requested = 0;  // pairs sent to the endpoint this run
  size_t skipped = 0;    // already present in the output file
  size_t failed = 0;     // extraction or HTTP failures recorded
};

// One prediction per pair, written incrementally and resumable by pair_id.
// HTTP failures (after retries) are recorded and the run continues; a dead
// transport aborts the run with the partial output intact.
inline BenchResult run_benchmark(const Corpus& corpus, const std::string& db_root,
                                 const ModelEndpoint& endpoint, const std::string& out_path,
                                 int concurrency = 4, std::ostream* log = nullptr) {
  std::string origin, path;
  detail::split_endpoint_url(endpoint.base_url, origin, path);

  std::set<std::string> done = completed_pair_ids(out_path);
  std::vector<const NlSqlPair*> todo;
  for (const auto& p : corpus.pairs)
    if (!done.count(p.id)) todo.push_back(&p);

  BenchResult result;
  result.skipped = corpus.pairs.size() - todo.size();
  if (todo.empty()) return result;

  bool existing = std::filesystem::exists(out_path);
  JsonlWriter writer(out_path, existing);

  std::map<std::string, std::string> schema_cache;
  std::mutex schema_mu, count_mu;

  auto schema_for = [&](const std::string& db_id) {
    std::lock_guard<std::mutex> lk(schema_mu);
    auto it = schema_cache.find(db_id);
    if (it != schema_cache.end()) return it->second;
    Database db = Database::open(db_root, db_id);
    return schema_cache.emplace(db_id, render_schema(db)).first->second;
  };

  parallel_for(todo.size(), static_cast<size_t>(std::max(1, concurrency)), [&](size_t i) {
    const NlSqlPair& pair = *todo[i];
    std::string prompt = build_prompt(pair.question, schema_for(pair.db_id));
    nlohmann::json req = {{"model", endpoint.model_name},
                          {"messages", {{{"role", "user"}, {"content", prompt}}}},
                          {"temperature", endpoint.temperature},
                          {"max_tokens", endpoint.max_tokens},
                          {"stop", endpoint.stop},
                          {"stream", false}};
    std::string body = req.dump();

    auto started = std::chrono::steady_clock::now();
    detail::HttpReply reply;
    int attempts = 0;
    for (; attempts < endpoint.max_attempts; ) {
      ++attempts;
      reply = detail::post_chat(endpoint, origin, path, body);
      bool retryable = !reply.transport_ok || reply.status == 429 || reply.status >= 500;
      if (reply.transport_ok && reply.status == 200) break;
      if (!retryable || attempts >= endpoint.max_attempts) break;
      std::this_thread::sleep_for(
          std::chrono::milliseconds(endpoint.backoff_ms * (1 << (attempts - 1))));
    }
    double latency =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started)
            .count();

    if (!reply.transport_ok)
      throw BenchError("endpoint unreachable after " + std::to_string(attempts) +
                       " attempts: " + reply.error);

    Prediction pred;
    pred.pair_id = pair.id;
    pred.latency_ms = latency;
    pred.attempts = attempts;
    if (reply.status != 200) {
      pred.raw_output = "HTTP " + std::to_string(reply.status) + ": " + reply.body;
      std::lock_guard<std::mutex> lk(count_mu);
      ++result.failed;
    } else {
      nlohmann::json res = nlohmann::json::parse(reply.body, nullptr, false);
      std::string content;
      if (!res.is_discarded() && res.contains("choices") && !res.at("choices").empty())
        content = res.at("choices").at(0).value(
            "message", nlohmann::json::object()).value("content", "");
      pred.raw_output = content;
      Extraction ex = postprocess(content);
      if (ex.ok) {
        pred.sql = ex.sql;
      } else {
        std::lock_guard<std::mutex> lk(count_mu);
        ++result.failed;
      }
    }
    writer.write(prediction_to_json(pred));
    {
      std::lock_guard<std::mutex> lk(count_mu);
      ++result.requested;
      if (log && result.requested % 25 == 0)
        *log << "bench: " << result.requested << "/" << todo.size() << " pairs done\n";
    }
  });
  return result;
}

}  // namespace finch
