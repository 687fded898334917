#pragma once

#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace finch {

struct JsonlError : std::runtime_error {
  explicit JsonlError(const std::string& msg) : std::runtime_error(msg) {}
};

// Calls fn(line_number, parsed) for every non-blank line. Errors carry
// file:line so a bad record in a large corpus is findable.
inline void for_each_jsonl_line(const std::string& path,
                                const std::function<void(size_t, const nlohmann::json&)>& fn) {
  std::ifstream in(path);
  if (!in) throw JsonlError("cannot open " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    bool blank = true;
    for (char c : line)
      if (!isspace(static_cast<unsigned char>(c))) {
        blank = false;
        break;
      }
    if (blank) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded())
      throw JsonlError(path + ":" + std::to_string(lineno) + ": invalid JSON");
    try {
      fn(lineno, j);
    } catch (const std::exception& e) {
      throw JsonlError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

// Append-mode line writer, safe for concurrent producers. Each record is
// flushed as one line so an interrupted run leaves a valid prefix behind.
class JsonlWriter {
 public:
  explicit JsonlWriter(const std::string& path, bool append = false)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw JsonlError("cannot open " + path + " for writing");
  }

  void write(const nlohmann::json& j) {
    std::lock_guard<std::mutex> lk(mu_);
    out_ << j.dump() << "\n";
    out_.flush();
  }

 private:
  std::ofstream out_;
  std::mutex mu_;
};

}  // namespace finch
