#ifndef KNNICL_TYPES_H_
#define KNNICL_TYPES_H_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace knnicl {

// Raised on malformed inputs, bad configuration, or contract violations the
// caller can fix. CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised on failures during execution (I/O, backend exhaustion). Exit code 1.
class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Binary outcome label. The positive class is a successful exit event.
enum class Outcome : int { kFailure = 0, kSuccess = 1 };

std::string to_string(Outcome outcome);
std::optional<Outcome> outcome_from_token(const std::string& token);

// One company: structured features, sector/industry tags, a redacted
// free-text self-description, and an optional outcome label.
struct StartupRecord {
  std::string id;
  double age_months = 0.0;
  int has_email = 0;
  int has_linkedin = 0;
  int founders_count = 0;
  int founders_country_count = 0;
  int founders_male_count = 0;
  int founders_female_count = 0;
  int founders_degree_count_total = 0;
  std::set<std::string> sectors;
  std::set<std::string> industries;
  std::string description;
  std::optional<Outcome> outcome;

  bool labeled() const { return outcome.has_value(); }
};

bool operator==(const StartupRecord& a, const StartupRecord& b);

// An ordered collection of records with unique ids.
class Dataset {
 public:
  Dataset() = default;
  explicit Dataset(std::vector<StartupRecord> records);

  const std::vector<StartupRecord>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  const StartupRecord* find(const std::string& id) const;
  const StartupRecord& at(const std::string& id) const;
  bool contains(const std::string& id) const;

  // Ids of labeled records, in dataset order.
  std::vector<std::string> labeled_ids() const;

  void append(StartupRecord record);

 private:
  std::vector<StartupRecord> records_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace knnicl

#endif  // KNNICL_TYPES_H_
