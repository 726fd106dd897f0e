#ifndef KNNICL_PROMPTING_H_
#define KNNICL_PROMPTING_H_

#include <optional>
#include <string>

#include "knnicl/retrieval.h"
#include "knnicl/types.h"

namespace knnicl {

enum class PromptMode { kFewShot, kZeroShot };

// A rendered prompt plus the structured payload it was built from. The shot
// list doubles as a side-channel for deterministic oracle backends, which
// answer from scores and labels instead of parsing the text.
struct PromptBundle {
  std::string rendered_text;
  SupportSet shots;
  std::string target_id;
  std::string target_payload;
  PromptMode mode = PromptMode::kFewShot;
};

enum class DecodeStatus { kClean, kFallback, kError };

struct Prediction {
  std::optional<Outcome> label;
  std::string raw_response;
  DecodeStatus status = DecodeStatus::kError;
};

// One example line: the numeric fields as name=value pairs in schema order,
// then industries (|-joined, "none" when empty), then the description with
// whitespace runs collapsed. Sector memberships stay out of the prompt; they
// feed retrieval only.
std::string record_payload(const StartupRecord& record);

// Assembles the fixed prompt template around the serialized shots and target.
// Shot ids must resolve in `dataset`; the target's outcome is never rendered.
// Rejects a few-shot call with no shots, a zero-shot call with shots, and any
// record whose id still appears verbatim in its description (redaction miss).
PromptBundle render_prompt(const Dataset& dataset, const SupportSet& support,
                           const StartupRecord& target, PromptMode mode);

// Case-insensitive prefix rule after stripping leading whitespace: SUCCESS
// maps to the positive class, FAILURE to the negative, anything else is an
// error status for the caller's retry/fallback policy to handle.
Prediction decode_response(const std::string& raw);

}  // namespace knnicl

#endif  // KNNICL_PROMPTING_H_
