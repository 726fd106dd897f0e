#include "knnicl/types.h"

namespace knnicl {

std::string to_string(Outcome outcome) {
  return outcome == Outcome::kSuccess ? "SUCCESS" : "FAILURE";
}

std::optional<Outcome> outcome_from_token(const std::string& token) {
  if (token == "SUCCESS") return Outcome::kSuccess;
  if (token == "FAILURE") return Outcome::kFailure;
  return std::nullopt;
}

bool operator==(const StartupRecord& a, const StartupRecord& b) {
  return a.id == b.id && a.age_months == b.age_months &&
         a.has_email == b.has_email && a.has_linkedin == b.has_linkedin &&
         a.founders_count == b.founders_count &&
         a.founders_country_count == b.founders_country_count &&
         a.founders_male_count == b.founders_male_count &&
         a.founders_female_count == b.founders_female_count &&
         a.founders_degree_count_total == b.founders_degree_count_total &&
         a.sectors == b.sectors && a.industries == b.industries &&
         a.description == b.description && a.outcome == b.outcome;
}

Dataset::Dataset(std::vector<StartupRecord> records)
    : records_(std::move(records)) {
  for (std::size_t i = 0; i < records_.size(); ++i) {
    auto [it, inserted] = index_.emplace(records_[i].id, i);
    if (!inserted) {
      throw ValidationError("duplicate record id \"" + records_[i].id + "\"");
    }
  }
}

const StartupRecord* Dataset::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &records_[it->second];
}

const StartupRecord& Dataset::at(const std::string& id) const {
  const StartupRecord* record = find(id);
  if (record == nullptr) {
    throw ValidationError("unknown record id \"" + id + "\"");
  }
  return *record;
}

bool Dataset::contains(const std::string& id) const {
  return index_.count(id) > 0;
}

std::vector<std::string> Dataset::labeled_ids() const {
  std::vector<std::string> ids;
  for (const auto& record : records_) {
    if (record.labeled()) ids.push_back(record.id);
  }
  return ids;
}

void Dataset::append(StartupRecord record) {
  auto [it, inserted] = index_.emplace(record.id, records_.size());
  if (!inserted) {
    throw ValidationError("duplicate record id \"" + record.id + "\"");
  }
  records_.push_back(std::move(record));
}

}  // namespace knnicl
