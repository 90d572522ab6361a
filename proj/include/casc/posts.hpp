#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace casc {

enum class PostKind { tweet, retweet, reply, mention };

const char* to_string(PostKind kind);
std::optional<PostKind> post_kind_from_string(const std::string& s);
bool is_reaction(PostKind kind);

struct PostRecord {
  std::int64_t timestamp = 0;
  std::string author;
  PostKind kind = PostKind::tweet;
  std::optional<std::string> target;  // absent iff kind == tweet

  bool operator==(const PostRecord&) const = default;
};

struct ParseReport {
  std::size_t total_lines = 0;
  std::size_t malformed_lines = 0;
  std::vector<std::string> warnings;  // first few offending lines
};

// Reads a newline-delimited log, one JSON object per line with fields
// ts / author / kind / target. Malformed lines are skipped and counted;
// the parse fails once they exceed `malformed_tolerance` of all lines.
// Records come back sorted by timestamp (stable for ties).
std::vector<PostRecord> parse_post_log(const std::string& path,
                                       ParseReport* report = nullptr,
                                       double malformed_tolerance = 0.01);

void write_post_log(const std::string& path,
                    const std::vector<PostRecord>& posts);

}  // namespace casc
