#include "deidforge/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "deidforge/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace deidforge::corpus {

std::string Category::str() const {
  switch (kind) {
    case CategoryKind::PersonName: return "person_name";
    case CategoryKind::Date: return "date";
    case CategoryKind::Number: return "number";
    case CategoryKind::Location: return "location";
    case CategoryKind::Organization: return "organization";
    case CategoryKind::OtherPii: return label;
  }
  return label;
}

namespace {
bool valid_label(const std::string& s) {
  if (s.empty()) return false;
  if (!(s[0] >= 'a' && s[0] <= 'z')) return false;
  for (char c : s) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    if (!ok) return false;
  }
  return true;
}
}  // namespace

Category Category::parse(const std::string& s) {
  if (s == "person_name") return person_name();
  if (s == "date") return date();
  if (s == "number") return number();
  if (s == "location") return location();
  if (s == "organization") return organization();
  if (!valid_label(s)) throw CorpusError("invalid category label: '" + s + "'");
  return other(s);
}

std::string role_str(Role r) { return r == Role::Doctor ? "doctor" : "other"; }

Role parse_role(const std::string& s) {
  if (s == "doctor") return Role::Doctor;
  if (s == "other") return Role::Other;
  throw CorpusError("invalid speaker role: '" + s + "'");
}

audio::TimeInterval Turn::extent() const {
  std::int64_t start = -1, end = -1;
  auto widen = [&](const audio::TimeInterval& iv) {
    if (start < 0 || iv.start_ms < start) start = iv.start_ms;
    if (iv.end_ms > end) end = iv.end_ms;
  };
  for (const auto& t : tokens) widen(t.interval);
  for (const auto& g : tombstones) widen(g.interval);
  if (start < 0) return {0, 0};
  return {start, end};
}

namespace {

struct IssueSink {
  std::vector<ValidationIssue>* out;
  void add(std::string code, const std::string& conv, int turn, const std::string& span, int line,
           std::string message) {
    out->push_back({std::move(code), conv, turn, span, line, std::move(message)});
  }
};

void validate_turn(const Conversation& conv, int turn_idx, int line, IssueSink& sink) {
  const Turn& turn = conv.turns[static_cast<std::size_t>(turn_idx)];
  if (turn.speaker.channel_tag.empty())
    sink.add("bad_speaker", conv.id, turn_idx, {}, line, "speaker channel_tag is empty");

  std::int64_t prev_end = -1;
  for (std::size_t i = 0; i < turn.tokens.size(); ++i) {
    const Token& tok = turn.tokens[i];
    if (tok.text.empty() || tok.text.find_first_of(" \t\n\r") != std::string::npos)
      sink.add("bad_token_text", conv.id, turn_idx, {}, line,
               "token " + std::to_string(i) + " has empty text or internal whitespace");
    if (tok.interval.start_ms < 0 || tok.interval.start_ms >= tok.interval.end_ms) {
      sink.add("overlapping_tokens", conv.id, turn_idx, {}, line,
               "token " + std::to_string(i) + " interval [" +
                   std::to_string(tok.interval.start_ms) + "," +
                   std::to_string(tok.interval.end_ms) + ") is not a valid interval");
    } else if (tok.interval.start_ms < prev_end) {
      sink.add("overlapping_tokens", conv.id, turn_idx, {}, line,
               "token " + std::to_string(i) + " starts at " +
                   std::to_string(tok.interval.start_ms) + " before previous token ends at " +
                   std::to_string(prev_end));
    }
    prev_end = std::max(prev_end, tok.interval.end_ms);
  }

  int n = static_cast<int>(turn.tokens.size());
  std::vector<PiiSpan> spans = turn.pii_spans;
  std::sort(spans.begin(), spans.end(),
            [](const PiiSpan& a, const PiiSpan& b) { return a.first_token < b.first_token; });
  int prev_last = -1;
  std::set<std::string> ids;
  for (const auto& span : spans) {
    if (!ids.insert(span.id).second)
      sink.add("span_out_of_range", conv.id, turn_idx, span.id, line, "duplicate span id");
    if (span.first_token < 0 || span.last_token < span.first_token || span.last_token >= n) {
      sink.add("span_out_of_range", conv.id, turn_idx, span.id, line,
               "token range [" + std::to_string(span.first_token) + "," +
                   std::to_string(span.last_token) + "] out of range for " + std::to_string(n) +
                   " tokens");
      continue;
    }
    if (span.first_token <= prev_last)
      sink.add("span_out_of_range", conv.id, turn_idx, span.id, line,
               "span overlaps previous span");
    prev_last = span.last_token;
    for (int i = span.first_token; i <= span.last_token; ++i) {
      const auto& ref = turn.tokens[static_cast<std::size_t>(i)].pii_span;
      if (!ref || *ref != span.id)
        sink.add("span_out_of_range", conv.id, turn_idx, span.id, line,
                 "token " + std::to_string(i) + " inside span does not reference it");
    }
  }
  for (std::size_t i = 0; i < turn.tokens.size(); ++i) {
    const auto& ref = turn.tokens[i].pii_span;
    if (!ref) continue;
    bool covered = false;
    for (const auto& span : turn.pii_spans)
      if (span.id == *ref && static_cast<int>(i) >= span.first_token &&
          static_cast<int>(i) <= span.last_token)
        covered = true;
    if (!covered)
      sink.add("span_out_of_range", conv.id, turn_idx, *ref, line,
               "token " + std::to_string(i) + " references span '" + *ref +
                   "' which does not cover it");
  }
}

void validate_structure(const std::vector<Conversation>& corpus,
                        const std::vector<int>& lines, std::vector<ValidationIssue>& issues) {
  IssueSink sink{&issues};
  std::set<std::string> ids;
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const Conversation& conv = corpus[c];
    int line = c < lines.size() ? lines[c] : -1;
    if (conv.id.empty())
      sink.add("malformed_record", conv.id, -1, {}, line, "conversation id is empty");
    if (!ids.insert(conv.id).second)
      sink.add("duplicate_id", conv.id, -1, {}, line, "duplicate conversation id");
    if (conv.sample_rate <= 0)
      sink.add("malformed_record", conv.id, -1, {}, line, "sample_rate must be positive");
    for (std::size_t t = 0; t < conv.turns.size(); ++t)
      validate_turn(conv, static_cast<int>(t), line, sink);
  }
}

void check_audio(const std::vector<Conversation>& corpus, const std::vector<int>& lines,
                 std::vector<ValidationIssue>& issues) {
  IssueSink sink{&issues};
  for (std::size_t c = 0; c < corpus.size(); ++c) {
    const Conversation& conv = corpus[c];
    int line = c < lines.size() ? lines[c] : -1;
    bool conv_audio = !conv.audio_ref.empty();
    std::int64_t conv_duration_ms = -1;
    if (conv_audio) {
      if (!fs::exists(conv.audio_ref)) {
        sink.add("missing_audio", conv.id, -1, {}, line, "audio file not found: " + conv.audio_ref);
        continue;
      }
      try {
        auto [samples, rate] = audio::wav_info(conv.audio_ref);
        conv_duration_ms = samples * 1000 / std::max(1, rate);
      } catch (const audio::AudioError& e) {
        sink.add("missing_audio", conv.id, -1, {}, line, e.what());
        continue;
      }
    }
    for (std::size_t t = 0; t < conv.turns.size(); ++t) {
      const Turn& turn = conv.turns[t];
      std::int64_t limit_ms = conv_duration_ms;
      if (turn.audio_ref) {
        if (!fs::exists(*turn.audio_ref)) {
          sink.add("missing_audio", conv.id, static_cast<int>(t), {}, line,
                   "turn audio file not found: " + *turn.audio_ref);
          continue;
        }
        try {
          auto [samples, rate] = audio::wav_info(*turn.audio_ref);
          limit_ms = samples * 1000 / std::max(1, rate);
        } catch (const audio::AudioError& e) {
          sink.add("missing_audio", conv.id, static_cast<int>(t), {}, line, e.what());
          continue;
        }
      } else if (!conv_audio) {
        sink.add("missing_audio", conv.id, static_cast<int>(t), {}, line,
                 "no conversation audio and no per-turn audio");
        continue;
      }
      if (limit_ms < 0) continue;
      for (std::size_t i = 0; i < turn.tokens.size(); ++i) {
        // +1 ms slack: durations round down, sample boundaries round half up.
        if (turn.tokens[i].interval.end_ms > limit_ms + 1) {
          sink.add("interval_outside_audio", conv.id, static_cast<int>(t), {}, line,
                   "token " + std::to_string(i) + " ends at " +
                       std::to_string(turn.tokens[i].interval.end_ms) + " ms but audio is " +
                       std::to_string(limit_ms) + " ms");
          break;
        }
      }
    }
  }
}

std::string resolve_path(const std::string& ref, const fs::path& base) {
  if (ref.empty()) return ref;
  fs::path p(ref);
  if (p.is_absolute()) return p.lexically_normal().string();
  return (base / p).lexically_normal().string();
}

Conversation conversation_from_json(const json& j, const fs::path& base_dir, int line) {
  auto need = [&](const json& obj, const char* key) -> const json& {
    auto it = obj.find(key);
    if (it == obj.end()) throw MalformedRecord(line, std::string("missing field '") + key + "'");
    return *it;
  };
  Conversation conv;
  conv.id = need(j, "id").get<std::string>();
  if (j.contains("audio") && !j["audio"].is_null())
    conv.audio_ref = resolve_path(j["audio"].get<std::string>(), base_dir);
  conv.sample_rate = need(j, "sample_rate").get<int>();
  for (const auto& jt : need(j, "turns")) {
    Turn turn;
    const json& sp = need(jt, "speaker");
    turn.speaker.role = parse_role(need(sp, "role").get<std::string>());
    turn.speaker.channel_tag = need(sp, "tag").get<std::string>();
    for (const auto& jtok : need(jt, "tokens")) {
      Token tok;
      tok.text = need(jtok, "text").get<std::string>();
      tok.interval.start_ms = need(jtok, "start_ms").get<std::int64_t>();
      tok.interval.end_ms = need(jtok, "end_ms").get<std::int64_t>();
      if (jtok.contains("pii") && !jtok["pii"].is_null())
        tok.pii_span = jtok["pii"].get<std::string>();
      turn.tokens.push_back(std::move(tok));
    }
    if (jt.contains("pii_spans")) {
      for (const auto& js : jt["pii_spans"]) {
        PiiSpan span;
        span.id = need(js, "id").get<std::string>();
        span.category = Category::parse(need(js, "category").get<std::string>());
        span.first_token = need(js, "first_token").get<int>();
        span.last_token = need(js, "last_token").get<int>();
        turn.pii_spans.push_back(std::move(span));
      }
    }
    if (jt.contains("tombstones")) {
      for (const auto& jg : jt["tombstones"]) {
        Tombstone g;
        g.id = need(jg, "id").get<std::string>();
        g.category = Category::parse(need(jg, "category").get<std::string>());
        g.interval.start_ms = need(jg, "start_ms").get<std::int64_t>();
        g.interval.end_ms = need(jg, "end_ms").get<std::int64_t>();
        g.token_count = need(jg, "token_count").get<int>();
        turn.tombstones.push_back(std::move(g));
      }
    }
    if (jt.contains("audio") && !jt["audio"].is_null())
      turn.audio_ref = resolve_path(jt["audio"].get<std::string>(), base_dir);
    if (jt.contains("alignment") && !jt["alignment"].is_null())
      turn.alignment = jt["alignment"].get<std::string>();
    conv.turns.push_back(std::move(turn));
  }
  return conv;
}

json conversation_to_json(const Conversation& conv) {
  json j;
  j["id"] = conv.id;
  if (!conv.audio_ref.empty()) j["audio"] = conv.audio_ref;
  j["sample_rate"] = conv.sample_rate;
  json turns = json::array();
  for (const auto& turn : conv.turns) {
    json jt;
    jt["speaker"] = {{"role", role_str(turn.speaker.role)}, {"tag", turn.speaker.channel_tag}};
    json toks = json::array();
    for (const auto& tok : turn.tokens) {
      json jtok;
      jtok["text"] = tok.text;
      jtok["start_ms"] = tok.interval.start_ms;
      jtok["end_ms"] = tok.interval.end_ms;
      if (tok.pii_span) jtok["pii"] = *tok.pii_span;
      toks.push_back(std::move(jtok));
    }
    jt["tokens"] = std::move(toks);
    json spans = json::array();
    for (const auto& span : turn.pii_spans)
      spans.push_back({{"id", span.id},
                       {"category", span.category.str()},
                       {"first_token", span.first_token},
                       {"last_token", span.last_token}});
    jt["pii_spans"] = std::move(spans);
    if (!turn.tombstones.empty()) {
      json gs = json::array();
      for (const auto& g : turn.tombstones)
        gs.push_back({{"id", g.id},
                      {"category", g.category.str()},
                      {"start_ms", g.interval.start_ms},
                      {"end_ms", g.interval.end_ms},
                      {"token_count", g.token_count}});
      jt["tombstones"] = std::move(gs);
    }
    if (turn.audio_ref) jt["audio"] = *turn.audio_ref;
    if (turn.alignment) jt["alignment"] = *turn.alignment;
    turns.push_back(std::move(jt));
  }
  j["turns"] = std::move(turns);
  return j;
}

void parse_file(const std::string& path, std::vector<Conversation>& corpus,
                std::vector<int>& lines, std::vector<ValidationIssue>& issues) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open manifest " + path);
  fs::path base = fs::path(path).parent_path();
  std::string line;
  int line_no = 0;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      corpus.push_back(conversation_from_json(j, base, line_no));
      lines.push_back(line_no);
    } catch (const json::exception& e) {
      issues.push_back({"malformed_record", {}, -1, {}, line_no, e.what()});
    } catch (const CorpusError& e) {
      issues.push_back({"malformed_record", {}, -1, {}, line_no, e.what()});
    }
  }
}

[[noreturn]] void throw_issue(const ValidationIssue& issue) {
  std::string where = issue.conversation;
  if (issue.turn >= 0) where += " turn " + std::to_string(issue.turn);
  if (!issue.span.empty()) where += " span " + issue.span;
  std::string msg = where.empty() ? issue.message : where + ": " + issue.message;
  if (issue.code == "missing_audio") throw MissingAudio(msg);
  if (issue.code == "overlapping_tokens") throw OverlappingTokens(msg);
  if (issue.code == "span_out_of_range") throw SpanOutOfRange(msg);
  if (issue.code == "malformed_record" || issue.code == "bad_token_text" ||
      issue.code == "bad_speaker" || issue.code == "duplicate_id")
    throw MalformedRecord(issue.line, msg);
  throw CorpusError(issue.code + ": " + msg);
}

}  // namespace

std::vector<Conversation> load_manifest(const std::string& path, const LoadOptions& opts) {
  std::vector<Conversation> corpus;
  std::vector<int> lines;
  std::vector<ValidationIssue> issues;
  parse_file(path, corpus, lines, issues);
  if (issues.empty()) {
    validate_structure(corpus, lines, issues);
    if (issues.empty() && opts.require_audio) check_audio(corpus, lines, issues);
  }
  if (!issues.empty()) throw_issue(issues.front());
  return corpus;
}

std::vector<ValidationIssue> validate_manifest_file(const std::string& path,
                                                    const LoadOptions& opts) {
  std::vector<Conversation> corpus;
  std::vector<int> lines;
  std::vector<ValidationIssue> issues;
  parse_file(path, corpus, lines, issues);
  validate_structure(corpus, lines, issues);
  if (opts.require_audio) check_audio(corpus, lines, issues);
  return issues;
}

std::vector<ValidationIssue> validate_corpus(const std::vector<Conversation>& corpus) {
  std::vector<ValidationIssue> issues;
  validate_structure(corpus, {}, issues);
  return issues;
}

void save_manifest(const std::vector<Conversation>& corpus, const std::string& path) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  for (const auto& conv : corpus) f << conversation_to_json(conv).dump() << '\n';
  if (!f) throw IoError("short write to " + path);
}

bool structurally_equal(const std::vector<Conversation>& a, const std::vector<Conversation>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a[i];
    const auto& y = b[i];
    if (x.id != y.id || x.audio_ref != y.audio_ref || x.sample_rate != y.sample_rate ||
        x.turns.size() != y.turns.size())
      return false;
    for (std::size_t t = 0; t < x.turns.size(); ++t) {
      const auto& tx = x.turns[t];
      const auto& ty = y.turns[t];
      if (tx.speaker != ty.speaker || tx.tokens != ty.tokens || tx.pii_spans != ty.pii_spans ||
          tx.audio_ref != ty.audio_ref || tx.alignment != ty.alignment)
        return false;
      if (tx.tombstones.size() != ty.tombstones.size()) return false;
      for (std::size_t g = 0; g < tx.tombstones.size(); ++g) {
        const auto& gx = tx.tombstones[g];
        const auto& gy = ty.tombstones[g];
        if (gx.id != gy.id || gx.category != gy.category || gx.interval != gy.interval ||
            gx.token_count != gy.token_count)
          return false;
      }
    }
  }
  return true;
}

CorpusStats corpus_stats(const std::vector<Conversation>& corpus) {
  CorpusStats stats;
  std::int64_t total_tokens = 0, pii_tokens = 0, doctor_pii = 0;
  std::int64_t total_ms = 0, pii_ms = 0;
  std::map<std::string, std::int64_t> per_category;
  for (const auto& conv : corpus) {
    for (const auto& turn : conv.turns) {
      std::map<std::string, Category> span_category;
      for (const auto& span : turn.pii_spans) span_category[span.id] = span.category;
      for (const auto& tok : turn.tokens) {
        ++total_tokens;
        total_ms += tok.interval.duration_ms();
        if (!tok.pii_span) continue;
        ++pii_tokens;
        pii_ms += tok.interval.duration_ms();
        if (turn.speaker.role == Role::Doctor) ++doctor_pii;
        auto it = span_category.find(*tok.pii_span);
        if (it != span_category.end()) ++per_category[it->second.str()];
      }
    }
  }
  if (total_tokens == 0) throw EmptyCorpus("corpus has no tokens");
  stats.total_tokens = total_tokens;
  stats.pii_tokens = pii_tokens;
  stats.pii_token_fraction = static_cast<double>(pii_tokens) / static_cast<double>(total_tokens);
  stats.pii_audio_fraction =
      total_ms > 0 ? static_cast<double>(pii_ms) / static_cast<double>(total_ms) : 0.0;
  stats.doctor_pii_share =
      pii_tokens > 0 ? static_cast<double>(doctor_pii) / static_cast<double>(pii_tokens) : 0.0;
  for (const auto& [cat, count] : per_category)
    stats.category_shares[cat] = static_cast<double>(count) / static_cast<double>(pii_tokens);
  return stats;
}

std::map<std::string, std::int64_t> token_counts(const std::vector<Conversation>& corpus) {
  std::map<std::string, std::int64_t> counts;
  for (const auto& conv : corpus)
    for (const auto& turn : conv.turns)
      for (const auto& tok : turn.tokens) {
        std::string n = normalize_token(tok.text);
        if (!n.empty()) ++counts[n];
      }
  return counts;
}

std::vector<FrequencyRatio> frequency_ratios(const std::vector<Conversation>& before,
                                             const std::vector<Conversation>& after) {
  auto before_counts = token_counts(before);
  auto after_counts = token_counts(after);
  std::vector<FrequencyRatio> out;
  out.reserve(before_counts.size());
  for (const auto& [token, count] : before_counts) {
    FrequencyRatio fr;
    fr.token = token;
    fr.count_before = count;
    auto it = after_counts.find(token);
    fr.count_after = it == after_counts.end() ? 0 : it->second;
    fr.ratio = static_cast<double>(fr.count_after) / static_cast<double>(fr.count_before);
    out.push_back(std::move(fr));
  }
  return out;
}

std::set<std::string> band_select(const std::vector<FrequencyRatio>& ratios, double lo, double hi) {
  if (!(lo >= 0.0 && lo < hi && hi <= 1.0))
    throw InvalidBand("band bounds must satisfy 0 <= lo < hi <= 1");
  std::set<std::string> out;
  for (const auto& r : ratios)
    if (r.ratio >= lo && r.ratio < hi) out.insert(r.token);
  return out;
}

}  // namespace deidforge::corpus
