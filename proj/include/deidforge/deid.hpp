#pragma once

#include <stdexcept>
#include <vector>

#include "deidforge/audio.hpp"
#include "deidforge/corpus.hpp"

namespace deidforge::surrogate {
class Lexicon;
}

namespace deidforge::deid {

struct DeidError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntervalOutOfAudio : DeidError {
  using DeidError::DeidError;
};

// Conversation after PII removal: tokens filtered, spans replaced by
// tombstones, PII token intervals silenced in the audio.
struct RedactedConversation {
  corpus::Conversation conversation;
  audio::AudioBuffer audio;
};

// Removes PII tokens from the transcript and silences their intervals.
// Non-PII tokens keep their original timing; audio duration is
// unchanged. The lexicon, when given, is used to parse date spans into
// structural hints on the tombstones (surrogate generation preserves
// the surface form through those hints).
RedactedConversation redact(const corpus::Conversation& conversation,
                            const audio::AudioBuffer& conv_audio,
                            const surrogate::Lexicon* lexicon = nullptr);

// Worst-case baseline corpora (text level; the audio side is produced
// by the pipeline when it writes training pairs).

// Drops every turn that contains at least one PII span.
std::vector<corpus::Conversation> build_baseline_turn(const std::vector<corpus::Conversation>& corpus);

// Removes PII tokens from each turn, keeping the rest of the turn.
// Tombstones record the removed spans.
std::vector<corpus::Conversation> build_baseline_token(
    const std::vector<corpus::Conversation>& corpus,
    const surrogate::Lexicon* lexicon = nullptr);

// Text-level half of redact, shared by baseline-token and the pipeline.
corpus::Turn redact_turn_text(const corpus::Turn& turn, const surrogate::Lexicon* lexicon);

}  // namespace deidforge::deid
