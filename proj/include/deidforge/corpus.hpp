#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "deidforge/audio.hpp"
#include "deidforge/surrogate_hint.hpp"

namespace deidforge::corpus {

struct CorpusError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct MissingAudio : CorpusError {
  using CorpusError::CorpusError;
};
struct MalformedRecord : CorpusError {
  MalformedRecord(int line, const std::string& what)
      : CorpusError("line " + std::to_string(line) + ": " + what), line(line) {}
  int line;
};
struct OverlappingTokens : CorpusError {
  using CorpusError::CorpusError;
};
struct SpanOutOfRange : CorpusError {
  using CorpusError::CorpusError;
};
struct EmptyCorpus : CorpusError {
  using CorpusError::CorpusError;
};
struct InvalidBand : CorpusError {
  using CorpusError::CorpusError;
};
struct IoError : CorpusError {
  using CorpusError::CorpusError;
};

enum class CategoryKind { PersonName, Date, Number, Location, Organization, OtherPii };

// PII category with an open label set: the five standard kinds plus
// arbitrary lowercase labels (the annotation scheme has ~30).
struct Category {
  CategoryKind kind = CategoryKind::OtherPii;
  std::string label;  // only for OtherPii

  static Category person_name() { return {CategoryKind::PersonName, {}}; }
  static Category date() { return {CategoryKind::Date, {}}; }
  static Category number() { return {CategoryKind::Number, {}}; }
  static Category location() { return {CategoryKind::Location, {}}; }
  static Category organization() { return {CategoryKind::Organization, {}}; }
  static Category other(std::string label) { return {CategoryKind::OtherPii, std::move(label)}; }

  std::string str() const;
  static Category parse(const std::string& s);  // throws CorpusError on bad label

  bool operator==(const Category&) const = default;
  auto operator<=>(const Category&) const = default;
};

enum class Role { Doctor, Other };

std::string role_str(Role r);
Role parse_role(const std::string& s);

struct SpeakerId {
  Role role = Role::Other;
  std::string channel_tag;

  bool operator==(const SpeakerId&) const = default;
};

struct Token {
  std::string text;
  audio::TimeInterval interval;
  std::optional<std::string> pii_span;

  bool operator==(const Token&) const = default;
};

// Contiguous, non-overlapping token index range within one turn.
struct PiiSpan {
  std::string id;
  Category category;
  int first_token = 0;
  int last_token = 0;  // inclusive

  bool operator==(const PiiSpan&) const = default;
};

// Residue of a redacted span: category and original timing, no text.
// The hint is in-memory only and never serialized.
struct Tombstone {
  std::string id;
  Category category;
  audio::TimeInterval interval;
  int token_count = 0;
  SurrogateHint hint;
};

struct Turn {
  SpeakerId speaker;
  std::vector<Token> tokens;
  std::vector<PiiSpan> pii_spans;
  std::vector<Tombstone> tombstones;        // present on redacted corpora
  std::optional<std::string> audio_ref;     // per-turn audio (training outputs)
  std::optional<std::string> alignment;     // "synthetic" for fallback timings

  bool has_pii() const { return !pii_spans.empty(); }
  // [first element start, last element end] over tokens and tombstones.
  audio::TimeInterval extent() const;
};

struct Conversation {
  std::string id;
  std::string audio_ref;  // empty when every turn carries its own audio
  int sample_rate = 0;
  std::vector<Turn> turns;
};

struct CorpusStats {
  double pii_token_fraction = 0.0;
  double pii_audio_fraction = 0.0;
  std::map<std::string, double> category_shares;  // category string -> share of PII tokens
  double doctor_pii_share = 0.0;
  std::int64_t total_tokens = 0;
  std::int64_t pii_tokens = 0;
};

struct FrequencyRatio {
  std::string token;  // normalized
  std::int64_t count_before = 0;
  std::int64_t count_after = 0;
  double ratio = 0.0;
};

struct ValidationIssue {
  std::string code;
  std::string conversation;
  int turn = -1;
  std::string span;
  int line = -1;
  std::string message;
};

struct LoadOptions {
  // Check that referenced WAV files exist and that every token interval
  // lies within the audio duration. Off for text-only workflows.
  bool require_audio = true;
};

std::vector<Conversation> load_manifest(const std::string& path, const LoadOptions& opts = {});
void save_manifest(const std::vector<Conversation>& corpus, const std::string& path);

// Collects every problem instead of throwing on the first.
std::vector<ValidationIssue> validate_manifest_file(const std::string& path,
                                                    const LoadOptions& opts = {});
std::vector<ValidationIssue> validate_corpus(const std::vector<Conversation>& corpus);

bool structurally_equal(const std::vector<Conversation>& a, const std::vector<Conversation>& b);

CorpusStats corpus_stats(const std::vector<Conversation>& corpus);

std::vector<FrequencyRatio> frequency_ratios(const std::vector<Conversation>& before,
                                             const std::vector<Conversation>& after);

// Tokens whose ratio falls in the half-open band [lo, hi).
std::set<std::string> band_select(const std::vector<FrequencyRatio>& ratios, double lo, double hi);

// Multiset of normalized token counts, skipping empty normalizations.
std::map<std::string, std::int64_t> token_counts(const std::vector<Conversation>& corpus);

}  // namespace deidforge::corpus
