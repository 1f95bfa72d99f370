// Copyright 2026 The hieragent Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Group reward, group-relative advantages and the masked clipped surrogate
// with a per-token KL penalty.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "hieragent/rollout.h"

namespace hieragent {

struct HyperParams {
  double epsilon = 0.2;
  double beta = 0.001;
  double delta = 1.0;
  std::size_t k = 5;
  // Component weights of the total reward; the unweighted sum is the default.
  double answer_weight = 1.0;
  double format_weight = 1.0;
  double refine_weight = 1.0;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

struct RewardBreakdown {
  double r_ans = 0.0;
  int r_format = 0;
  double r_refine = 0.0;
  double total = 0.0;
};

// 6 * max_g F1(answer, g) - 3, with an absent answer scored as "".
// Throws ConfigError for an empty gold set.
double reward_answer(const std::optional<std::string>& final_answer,
                     const std::vector<std::string>& gold);

// Affine map from the best F1 to the answer reward.
double answer_reward_from_f1(double best_f1);

struct FormatIndicators {
  int planner = 0;
  int executor = 0;
};

// Hierarchical groups: planner = every planner turn well-formed; executor =
// every executor trajectory well-formed (vacuously 1 with none). Monolithic
// groups judge the trajectory's Answer and Search usage instead.
FormatIndicators format_indicators(const TrajectoryGroup& group);
int reward_format(const TrajectoryGroup& group);

// In-order, single-space-joined contents of every Refine segment in the
// group's executor trajectories (the monolithic trajectory for baseline
// groups).
std::string combined_refinement(const TrajectoryGroup& group);

double reward_refine(const TrajectoryGroup& group,
                     const std::vector<std::string>& gold, double delta);
// Same rule applied to an already combined refinement string.
double refine_reward_for(const std::string& combined,
                         const std::vector<std::string>& gold, double delta);

RewardBreakdown total_reward(const TrajectoryGroup& group,
                             const std::vector<std::string>& gold,
                             const HyperParams& hp);

inline constexpr double kDegenerateStd = 1e-12;

struct AdvantageAssignment {
  std::vector<double> per_group;
};

// (R_i - mean) / population std; all zero when std < kDegenerateStd.
// Throws PreconditionError for fewer than two rewards.
AdvantageAssignment group_advantages(const std::vector<double>& rewards);

// min(rho * A, clip(rho, 1 - eps, 1 + eps) * A). Throws PreconditionError
// unless rho > 0.
double clip_term(double rho, double advantage, double epsilon);

// Per-token estimator r - ln r - 1 with r = exp(logp_ref - logp_cur).
double kl_term(double logp_current, double logp_reference);

enum class ClipBranch { Unclipped, Clipped };

struct TokenTerm {
  std::size_t group = 0;
  std::size_t trajectory = 0;
  std::size_t position = 0;
  std::string token;
  double rho = 1.0;
  ClipBranch branch = ClipBranch::Unclipped;
  double clip = 0.0;
  double kl = 0.0;
  int mask = 0;
};

struct ObjectiveReport {
  double surrogate_sum = 0.0;
  double kl_sum = 0.0;
  // surrogate_sum - beta * kl_sum
  double objective = 0.0;
  std::size_t masked_token_count = 0;
  std::vector<double> advantages;
  std::vector<TokenTerm> per_token_terms;  // filled only when requested
};

// Sums over every group, trajectory and token of
//   (clip_term(rho_t, A_group, eps) - beta * kl_t) * m_t
// where tokens with m_t = 0 are skipped entirely. Throws IntegrityError when
// a trajectory's arrays disagree in length.
ObjectiveReport surrogate_objective(const RolloutBatch& batch,
                                    const std::vector<double>& rewards,
                                    const HyperParams& hp,
                                    bool detailed = false);

ObjectiveReport surrogate_with_advantages(const RolloutBatch& batch,
                                          const std::vector<double>& advantages,
                                          const HyperParams& hp,
                                          bool detailed = false);

}  // namespace hieragent
