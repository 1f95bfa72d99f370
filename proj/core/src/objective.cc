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

#include "hieragent/objective.h"

#include <algorithm>
#include <cmath>

#include "hieragent/error.h"
#include "hieragent/metrics.h"

namespace hieragent {

void HyperParams::validate() const {
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(delta >= 0.0)) throw ConfigError("delta must be >= 0");
  if (k < 2) throw ConfigError("k must be >= 2");
}

double answer_reward_from_f1(double best_f1) { return 6.0 * best_f1 - 3.0; }

double reward_answer(const std::optional<std::string>& final_answer,
                     const std::vector<std::string>& gold) {
  if (gold.empty()) {
    throw ConfigError("reward_answer needs at least one gold answer");
  }
  return answer_reward_from_f1(max_f1(final_answer.value_or(""), gold));
}

FormatIndicators format_indicators(const TrajectoryGroup& group) {
  FormatIndicators out;
  if (group.trajectories.empty()) return out;
  const Trajectory& root = group.root();
  if (group.mode == Mode::Monolithic) {
    const std::string text = root.text();
    const auto f = monolithic_format_ok(root.segments(), text);
    return {f.answer_ok, f.search_ok};
  }

  const auto turns = root.agent_turns();
  out.planner = turns.empty() ? 0 : 1;
  for (const auto& turn : turns) {
    if (planner_format_ok(parse_transcript(turn, TranscriptRole::Planner),
                          turn) == 0) {
      out.planner = 0;
      break;
    }
  }
  out.executor = 1;
  for (const auto& t : group.trajectories) {
    if (t.role() != Role::Executor) continue;
    const std::string text = t.text();
    if (executor_format_ok(t.segments(), text) == 0) {
      out.executor = 0;
      break;
    }
  }
  return out;
}

int reward_format(const TrajectoryGroup& group) {
  const auto f = format_indicators(group);
  return f.planner + f.executor;
}

std::string combined_refinement(const TrajectoryGroup& group) {
  const Role source =
      group.mode == Mode::Monolithic ? Role::Monolithic : Role::Executor;
  std::string out;
  bool first = true;
  for (const auto& t : group.trajectories) {
    if (t.role() != source) continue;
    for (const auto& s : extract_contents(t.segments(), TagKind::Refine)) {
      if (!first) out += ' ';
      out += s;
      first = false;
    }
  }
  return out;
}

double refine_reward_for(const std::string& combined,
                         const std::vector<std::string>& gold, double delta) {
  if (combined.empty()) return 0.0;
  const std::string haystack = normalize_answer(combined);
  for (const auto& g : gold) {
    const std::string needle = normalize_answer(g);
    if (!needle.empty() && haystack.find(needle) != std::string::npos) {
      return delta;
    }
  }
  return 0.0;
}

double reward_refine(const TrajectoryGroup& group,
                     const std::vector<std::string>& gold, double delta) {
  return refine_reward_for(combined_refinement(group), gold, delta);
}

RewardBreakdown total_reward(const TrajectoryGroup& group,
                             const std::vector<std::string>& gold,
                             const HyperParams& hp) {
  RewardBreakdown r;
  r.r_ans = reward_answer(group.final_answer, gold);
  r.r_format = reward_format(group);
  r.r_refine = reward_refine(group, gold, hp.delta);
  r.total = hp.answer_weight * r.r_ans + hp.format_weight * r.r_format +
            hp.refine_weight * r.r_refine;
  return r;
}

AdvantageAssignment group_advantages(const std::vector<double>& rewards) {
  if (rewards.size() < 2) {
    throw PreconditionError("group advantages need at least two rewards, got " +
                            std::to_string(rewards.size()));
  }
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double sigma = std::sqrt(var / n);

  AdvantageAssignment out;
  out.per_group.assign(rewards.size(), 0.0);
  if (sigma < kDegenerateStd) return out;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out.per_group[i] = (rewards[i] - mean) / sigma;
  }
  return out;
}

double clip_term(double rho, double advantage, double epsilon) {
  if (!(rho > 0.0)) throw PreconditionError("importance ratio must be > 0");
  const double clipped = std::clamp(rho, 1.0 - epsilon, 1.0 + epsilon);
  return std::min(rho * advantage, clipped * advantage);
}

double kl_term(double logp_current, double logp_reference) {
  const double d = logp_reference - logp_current;
  return std::max(0.0, std::expm1(d) - d);
}

ObjectiveReport surrogate_with_advantages(const RolloutBatch& batch,
                                          const std::vector<double>& advantages,
                                          const HyperParams& hp,
                                          bool detailed) {
  if (advantages.size() != batch.groups.size()) {
    throw IntegrityError("advantage count " + std::to_string(advantages.size()) +
                         " does not match group count " +
                         std::to_string(batch.groups.size()));
  }
  ObjectiveReport report;
  report.advantages = advantages;
  for (std::size_t g = 0; g < batch.groups.size(); ++g) {
    const auto& group = batch.groups[g];
    for (std::size_t ti = 0; ti < group.trajectories.size(); ++ti) {
      const Trajectory& t = group.trajectories[ti];
      t.check_integrity("group " + std::to_string(g) + " trajectory " +
                        std::to_string(ti));
      const auto& mask = t.mask();
      for (std::size_t pos = 0; pos < mask.size(); ++pos) {
        if (mask[pos] == 0) {
          if (detailed) {
            report.per_token_terms.push_back(
                {g, ti, pos, t.tokens()[pos], 1.0, ClipBranch::Unclipped, 0.0,
                 0.0, 0});
          }
          continue;
        }
        const double rho =
            std::exp(t.logprobs_current()[pos] - t.logprobs_old()[pos]);
        const double clip = clip_term(rho, advantages[g], hp.epsilon);
        const double kl =
            kl_term(t.logprobs_current()[pos], t.logprobs_reference()[pos]);
        report.surrogate_sum += clip;
        report.kl_sum += kl;
        ++report.masked_token_count;
        if (detailed) {
          report.per_token_terms.push_back(
              {g, ti, pos, t.tokens()[pos], rho,
               clip < rho * advantages[g] ? ClipBranch::Clipped
                                          : ClipBranch::Unclipped,
               clip, kl, 1});
        }
      }
    }
  }
  report.objective = report.surrogate_sum - hp.beta * report.kl_sum;
  return report;
}

ObjectiveReport surrogate_objective(const RolloutBatch& batch,
                                    const std::vector<double>& rewards,
                                    const HyperParams& hp, bool detailed) {
  return surrogate_with_advantages(batch, group_advantages(rewards).per_group,
                                   hp, detailed);
}

}  // namespace hieragent
