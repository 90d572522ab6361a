#include "casc/posts.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "casc/common.hpp"

namespace casc {

namespace {
using nlohmann::json;

std::optional<PostRecord> parse_line(const std::string& line) {
  json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!obj.is_object()) return std::nullopt;
  if (!obj.contains("ts") || !obj["ts"].is_number_integer()) return std::nullopt;
  if (!obj.contains("author") || !obj["author"].is_string()) return std::nullopt;
  if (!obj.contains("kind") || !obj["kind"].is_string()) return std::nullopt;

  PostRecord rec;
  rec.timestamp = obj["ts"].get<std::int64_t>();
  if (rec.timestamp < 0) return std::nullopt;
  rec.author = obj["author"].get<std::string>();
  if (rec.author.empty()) return std::nullopt;
  const auto kind = post_kind_from_string(obj["kind"].get<std::string>());
  if (!kind) return std::nullopt;
  rec.kind = *kind;

  const bool has_target = obj.contains("target") && !obj["target"].is_null();
  if (rec.kind == PostKind::tweet) {
    if (has_target) return std::nullopt;  // tweet <=> no target
  } else {
    if (!has_target || !obj["target"].is_string()) return std::nullopt;
    rec.target = obj["target"].get<std::string>();
    if (rec.target->empty()) return std::nullopt;
  }
  return rec;
}

}  // namespace

const char* to_string(PostKind kind) {
  switch (kind) {
    case PostKind::tweet: return "tweet";
    case PostKind::retweet: return "retweet";
    case PostKind::reply: return "reply";
    case PostKind::mention: return "mention";
  }
  return "?";
}

std::optional<PostKind> post_kind_from_string(const std::string& s) {
  if (s == "tweet") return PostKind::tweet;
  if (s == "retweet") return PostKind::retweet;
  if (s == "reply") return PostKind::reply;
  if (s == "mention") return PostKind::mention;
  return std::nullopt;
}

bool is_reaction(PostKind kind) { return kind != PostKind::tweet; }

std::vector<PostRecord> parse_post_log(const std::string& path,
                                       ParseReport* report,
                                       double malformed_tolerance) {
  std::ifstream is(path);
  require(is.good(), "parse_post_log: cannot open " + path);

  std::vector<PostRecord> posts;
  ParseReport local;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    ++local.total_lines;
    auto rec = parse_line(line);
    if (rec) {
      posts.push_back(std::move(*rec));
    } else {
      ++local.malformed_lines;
      if (local.warnings.size() < 10)
        local.warnings.push_back("malformed line " +
                                 std::to_string(local.total_lines) + ": " +
                                 line.substr(0, 120));
    }
  }

  if (local.total_lines > 0) {
    const double frac = static_cast<double>(local.malformed_lines) /
                        static_cast<double>(local.total_lines);
    require(frac <= malformed_tolerance,
            "parse_post_log: " + std::to_string(local.malformed_lines) +
                " malformed lines exceed tolerance in " + path);
  }

  std::stable_sort(posts.begin(), posts.end(),
                   [](const PostRecord& a, const PostRecord& b) {
                     return a.timestamp < b.timestamp;
                   });
  if (report) *report = std::move(local);
  return posts;
}

void write_post_log(const std::string& path,
                    const std::vector<PostRecord>& posts) {
  std::ofstream os(path);
  require(os.good(), "write_post_log: cannot open " + path);
  for (const auto& p : posts) {
    json obj;
    obj["ts"] = p.timestamp;
    obj["author"] = p.author;
    obj["kind"] = to_string(p.kind);
    if (p.target) obj["target"] = *p.target;
    os << obj.dump() << '\n';
  }
  require(os.good(), "write_post_log: write failed for " + path);
}

}  // namespace casc
