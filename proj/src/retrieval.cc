#include "knnicl/retrieval.h"

#include <algorithm>
#include <cmath>

#include "knnicl/rng.h"

namespace knnicl {
namespace {

// First ranking entry belonging to `outcome`, or nullptr if the class is
// absent. The ranking is descending, so this is the class's best candidate.
const SimilarityScore* best_of_class(const std::vector<SimilarityScore>& ranking,
                                     const LabelMap& labels, Outcome outcome) {
  for (const SimilarityScore& s : ranking) {
    auto it = labels.find(s.candidate_id);
    if (it == labels.end()) {
      throw ValidationError("candidate \"" + s.candidate_id +
                            "\" has no label");
    }
    if (it->second == outcome) return &s;
  }
  return nullptr;
}

// Walks the ranking collecting up to ceil(kCandidateBufferFactor * quota)
// members of `outcome`, truncates to quota, and pads a shortfall by seeded
// sampling with replacement from the members found.
std::vector<Shot> select_top_of_class(const std::vector<SimilarityScore>& ranking,
                                      const LabelMap& labels, Outcome outcome,
                                      std::size_t quota, std::uint64_t seed) {
  if (quota == 0) return {};
  const auto buffer_size = static_cast<std::size_t>(
      std::ceil(kCandidateBufferFactor * static_cast<double>(quota)));
  std::vector<Shot> collected;
  for (const SimilarityScore& s : ranking) {
    auto it = labels.find(s.candidate_id);
    if (it == labels.end()) {
      throw ValidationError("candidate \"" + s.candidate_id +
                            "\" has no label");
    }
    if (it->second != outcome) continue;
    collected.push_back(Shot{s.candidate_id, outcome, s.score});
    if (collected.size() >= buffer_size) break;
  }
  if (collected.empty()) {
    throw ValidationError("class " + to_string(outcome) +
                          " is absent from the candidate pool");
  }
  if (collected.size() > quota) {
    collected.resize(quota);
  } else if (collected.size() < quota) {
    Rng rng(derive_seed(seed, "oversample", static_cast<int>(outcome)));
    const std::size_t members = collected.size();
    while (collected.size() < quota) {
      collected.push_back(collected[rng.next_below(members)]);
    }
    // Replacement copies land at the end; restore descending score order.
    std::stable_sort(collected.begin(), collected.end(),
                     [](const Shot& a, const Shot& b) {
                       return a.score > b.score;
                     });
  }
  return collected;
}

// Starting class for interleaving: strictly higher top score wins, near ties
// fall to a seeded coin flip. Missing classes lose by default.
Outcome interleave_start(const SimilarityScore* best_success,
                         const SimilarityScore* best_failure,
                         std::uint64_t seed) {
  if (best_success == nullptr && best_failure == nullptr) {
    throw ValidationError("cannot interleave: no candidates in either class");
  }
  if (best_success == nullptr) return Outcome::kFailure;
  if (best_failure == nullptr) return Outcome::kSuccess;
  const double delta = best_success->score - best_failure->score;
  if (std::abs(delta) < kTieTolerance) {
    Rng rng(derive_seed(seed, "start"));
    return rng.next_bernoulli(0.5) ? Outcome::kSuccess : Outcome::kFailure;
  }
  return delta > 0 ? Outcome::kSuccess : Outcome::kFailure;
}

std::vector<Shot> alternate(const std::vector<Shot>& first,
                            const std::vector<Shot>& second) {
  std::vector<Shot> out;
  out.reserve(first.size() + second.size());
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < first.size() || j < second.size()) {
    if (i < first.size()) out.push_back(first[i++]);
    if (j < second.size()) out.push_back(second[j++]);
  }
  return out;
}

}  // namespace

double cosine_similarity(const std::vector<double>& a,
                         const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ValidationError("cosine similarity needs equal dimensions, got " +
                          std::to_string(a.size()) + " and " +
                          std::to_string(b.size()));
  }
  double dot = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    norm_a += a[i] * a[i];
    norm_b += b[i] * b[i];
  }
  if (norm_a == 0.0 || norm_b == 0.0) {
    throw ValidationError("cosine similarity is undefined for a zero vector");
  }
  return std::clamp(dot / (std::sqrt(norm_a) * std::sqrt(norm_b)), -1.0, 1.0);
}

std::vector<SimilarityScore> rank_candidates(const FusedVector& target,
                                             const FusedTable& pool,
                                             std::uint64_t seed,
                                             const std::string& exclude_id) {
  std::vector<SimilarityScore> scores;
  scores.reserve(pool.size());
  for (const auto& [id, fused] : pool) {
    if (id == exclude_id) continue;
    scores.push_back(
        SimilarityScore{id, cosine_similarity(target.values, fused.values)});
  }
  if (scores.empty()) {
    throw ValidationError("candidate pool is empty");
  }
  // Seeded permutation first, stable sort second: equal scores keep the
  // permuted order, so ties resolve uniformly at random but reproducibly.
  Rng rng(derive_seed(seed, "rank"));
  rng.shuffle(scores);
  std::stable_sort(scores.begin(), scores.end(),
                   [](const SimilarityScore& a, const SimilarityScore& b) {
                     return a.score > b.score;
                   });
  return scores;
}

std::pair<std::vector<Shot>, std::vector<Shot>> select_balanced(
    const std::vector<SimilarityScore>& ranking, const LabelMap& labels,
    int k, std::uint64_t seed) {
  if (k < 2) {
    throw ValidationError("balanced selection needs k >= 2, got " +
                          std::to_string(k));
  }
  const auto quota = static_cast<std::size_t>(k / 2);
  return {select_top_of_class(ranking, labels, Outcome::kSuccess, quota, seed),
          select_top_of_class(ranking, labels, Outcome::kFailure, quota,
                              seed)};
}

std::vector<Shot> interleave_shots(const std::vector<Shot>& success_shots,
                                   const std::vector<Shot>& failure_shots,
                                   std::uint64_t seed, InterleaveOrder order) {
  SimilarityScore best_success;
  SimilarityScore best_failure;
  if (!success_shots.empty()) {
    best_success = {success_shots.front().id, success_shots.front().score};
  }
  if (!failure_shots.empty()) {
    best_failure = {failure_shots.front().id, failure_shots.front().score};
  }
  Outcome start = interleave_start(
      success_shots.empty() ? nullptr : &best_success,
      failure_shots.empty() ? nullptr : &best_failure, seed);
  std::vector<Shot> out = start == Outcome::kSuccess
                              ? alternate(success_shots, failure_shots)
                              : alternate(failure_shots, success_shots);
  if (order == InterleaveOrder::kStartLast) {
    std::reverse(out.begin(), out.end());
  }
  return out;
}

SupportSet retrieve_support_set(const std::string& target_id,
                                const FusedTable& pool, const LabelMap& labels,
                                int k, std::uint64_t seed,
                                InterleaveOrder order) {
  auto target_it = pool.find(target_id);
  if (target_it == pool.end()) {
    throw ValidationError("target \"" + target_id + "\" has no fused vector");
  }
  return retrieve_support_set(target_id, target_it->second, pool, labels, k,
                              seed, order);
}

SupportSet retrieve_support_set(const std::string& target_id,
                                const FusedVector& target,
                                const FusedTable& pool, const LabelMap& labels,
                                int k, std::uint64_t seed,
                                InterleaveOrder order) {
  if (k < 2) {
    throw ValidationError("support set needs k >= 2, got " +
                          std::to_string(k));
  }
  std::vector<SimilarityScore> ranking =
      rank_candidates(target, pool, seed, target_id);

  const SimilarityScore* best_success =
      best_of_class(ranking, labels, Outcome::kSuccess);
  const SimilarityScore* best_failure =
      best_of_class(ranking, labels, Outcome::kFailure);
  if (best_success == nullptr || best_failure == nullptr) {
    throw ValidationError(
        "class " +
        to_string(best_success == nullptr ? Outcome::kSuccess
                                          : Outcome::kFailure) +
        " is absent from the candidate pool");
  }
  const Outcome start = interleave_start(best_success, best_failure, seed);

  // Odd k: one extra shot for the starting class.
  const auto base_quota = static_cast<std::size_t>(k / 2);
  std::size_t success_quota = base_quota;
  std::size_t failure_quota = base_quota;
  if (k % 2 != 0) {
    (start == Outcome::kSuccess ? success_quota : failure_quota) += 1;
  }
  std::vector<Shot> success = select_top_of_class(
      ranking, labels, Outcome::kSuccess, success_quota, seed);
  std::vector<Shot> failure = select_top_of_class(
      ranking, labels, Outcome::kFailure, failure_quota, seed);

  SupportSet support;
  support.target_id = target_id;
  support.k = k;
  support.shots = interleave_shots(success, failure, seed, order);
  return support;
}

}  // namespace knnicl
