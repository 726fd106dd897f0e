#include "knnicl/prompting.h"

#include <cctype>

#include "knnicl/dataset.h"

namespace knnicl {
namespace {

const char* const kPromptHeader =
    "You are a VC analyst.\n"
    "Your task is to predict whether a startup will succeed or not.\n"
    "SUCCESS if the startup has completed an IPO, received funding, or been "
    "acquired.\n"
    "Otherwise FAILURE.\n"
    "Each example contains the startup's details and its historical "
    "outcome.\n"
    "Respond with exactly one word: SUCCESS or FAILURE.\n";

const char* const kTargetDelimiter = "===== TARGET STARTUP =====\n";

std::string collapse_whitespace(const std::string& text) {
  std::string out;
  out.reserve(text.size());
  bool in_gap = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_gap = !out.empty();
      continue;
    }
    if (in_gap) out.push_back(' ');
    in_gap = false;
    out.push_back(c);
  }
  return out;
}

void check_redacted(const StartupRecord& record) {
  if (!record.id.empty() &&
      record.description.find(record.id) != std::string::npos) {
    throw ValidationError("description of \"" + record.id +
                          "\" still contains its own id; redact first");
  }
}

bool iprefix(const std::string& text, std::size_t offset, const char* word) {
  for (std::size_t i = 0; word[i] != '\0'; ++i) {
    if (offset + i >= text.size()) return false;
    if (std::toupper(static_cast<unsigned char>(text[offset + i])) != word[i]) {
      return false;
    }
  }
  return true;
}

}  // namespace

std::string record_payload(const StartupRecord& record) {
  std::string industries;
  for (const std::string& tag : record.industries) {
    if (!industries.empty()) industries.push_back('|');
    industries += tag;
  }
  if (industries.empty()) industries = "none";
  std::string out;
  out += "age_months=" + format_double(record.age_months);
  out += ", has_email=" + std::to_string(record.has_email);
  out += ", has_linkedin=" + std::to_string(record.has_linkedin);
  out += ", founders_count=" + std::to_string(record.founders_count);
  out += ", founders_country_count=" +
         std::to_string(record.founders_country_count);
  out += ", founders_male_count=" + std::to_string(record.founders_male_count);
  out += ", founders_female_count=" +
         std::to_string(record.founders_female_count);
  out += ", founders_degree_count_total=" +
         std::to_string(record.founders_degree_count_total);
  out += ", industries=" + industries;
  out += ", description=" + collapse_whitespace(record.description);
  return out;
}

PromptBundle render_prompt(const Dataset& dataset, const SupportSet& support,
                           const StartupRecord& target, PromptMode mode) {
  if (mode == PromptMode::kFewShot && support.shots.empty()) {
    throw ValidationError("few-shot prompt needs a non-empty support set");
  }
  if (mode == PromptMode::kZeroShot && !support.shots.empty()) {
    throw ValidationError("zero-shot prompt must not carry shots");
  }
  check_redacted(target);

  PromptBundle bundle;
  bundle.shots = support;
  bundle.target_id = target.id;
  bundle.target_payload = record_payload(target);
  bundle.mode = mode;

  std::string text = kPromptHeader;
  text.push_back('\n');
  if (mode == PromptMode::kFewShot) {
    text += "[EXAMPLES]\n";
    for (const Shot& shot : support.shots) {
      const StartupRecord& record = dataset.at(shot.id);
      check_redacted(record);
      text += "Startup: " + record_payload(record) + "\n";
      text += "Outcome: " + to_string(shot.outcome) + "\n\n";
    }
  }
  text += kTargetDelimiter;
  text += "Startup: " + bundle.target_payload + "\n";
  text += "Outcome:";
  bundle.rendered_text = std::move(text);
  return bundle;
}

Prediction decode_response(const std::string& raw) {
  Prediction prediction;
  prediction.raw_response = raw;
  std::size_t start = 0;
  while (start < raw.size() &&
         std::isspace(static_cast<unsigned char>(raw[start]))) {
    ++start;
  }
  if (iprefix(raw, start, "SUCCESS")) {
    prediction.label = Outcome::kSuccess;
    prediction.status = DecodeStatus::kClean;
  } else if (iprefix(raw, start, "FAILURE")) {
    prediction.label = Outcome::kFailure;
    prediction.status = DecodeStatus::kClean;
  } else {
    prediction.status = DecodeStatus::kError;
  }
  return prediction;
}

}  // namespace knnicl
