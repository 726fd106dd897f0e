#ifndef KNNICL_RETRIEVAL_H_
#define KNNICL_RETRIEVAL_H_

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "knnicl/features.h"
#include "knnicl/types.h"

namespace knnicl {

// Cosine scores closer than this are near ties; ordering decisions between
// them fall to a seeded coin flip.
inline constexpr double kTieTolerance = 1e-6;

// Shortfall buffer: each class fetches ceil(1.25 * quota) candidates before
// truncating to its quota, absorbing downstream filtering.
inline constexpr double kCandidateBufferFactor = 1.25;

using LabelMap = std::map<std::string, Outcome>;

struct SimilarityScore {
  std::string candidate_id;
  double score = 0.0;
};

struct Shot {
  std::string id;
  Outcome outcome = Outcome::kFailure;
  double score = 0.0;
};

// Whether the interleaving's starting class occupies the first rendered slot
// (default) or the slot adjacent to the target.
enum class InterleaveOrder { kStartFirst, kStartLast };

struct SupportSet {
  std::string target_id;
  std::vector<Shot> shots;
  int k = 0;
};

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b);

// All pool entries scored against `target` and sorted by descending score.
// Ties are broken by a seeded permutation applied before the stable sort.
// Entries whose id equals `exclude_id` are skipped.
std::vector<SimilarityScore> rank_candidates(const FusedVector& target,
                                             const FusedTable& pool,
                                             std::uint64_t seed,
                                             const std::string& exclude_id = "");

// Top floor(k/2) candidates per class, walking the ranking once per class
// with the shortfall buffer. A class short of quota is padded by seeded
// sampling with replacement from its retrieved members. Returns
// (success_shots, failure_shots), each in descending score order.
std::pair<std::vector<Shot>, std::vector<Shot>> select_balanced(
    const std::vector<SimilarityScore>& ranking, const LabelMap& labels,
    int k, std::uint64_t seed);

// Alternates classes starting from the one whose top shot scores strictly
// higher; near ties flip a seeded coin. Within each class the incoming
// descending order is preserved. kStartLast reverses the final sequence so
// the starting class ends up adjacent to the target.
std::vector<Shot> interleave_shots(const std::vector<Shot>& success_shots,
                                   const std::vector<Shot>& failure_shots,
                                   std::uint64_t seed,
                                   InterleaveOrder order =
                                       InterleaveOrder::kStartFirst);

// rank -> select -> interleave. Odd k hands the extra shot to the starting
// class, so the support set always holds ceil(k/2) of one class and
// floor(k/2) of the other. The target never appears among its own shots.
// The pool must contain the target's own fused vector.
SupportSet retrieve_support_set(const std::string& target_id,
                                const FusedTable& pool, const LabelMap& labels,
                                int k, std::uint64_t seed,
                                InterleaveOrder order =
                                    InterleaveOrder::kStartFirst);

// Same retrieval with the target's vector supplied out-of-band, for callers
// whose pool holds training candidates only.
SupportSet retrieve_support_set(const std::string& target_id,
                                const FusedVector& target,
                                const FusedTable& pool, const LabelMap& labels,
                                int k, std::uint64_t seed,
                                InterleaveOrder order =
                                    InterleaveOrder::kStartFirst);

}  // namespace knnicl

#endif  // KNNICL_RETRIEVAL_H_
