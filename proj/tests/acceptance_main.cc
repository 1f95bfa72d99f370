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

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "hieragent/context_store.h"
#include "hieragent/driver.h"
#include "hieragent/metrics.h"
#include "hieragent/objective.h"
#include "hieragent/rollout.h"
#include "hieragent/synthetic.h"
#include "hieragent/tag_protocol.h"
#include "hieragent/trace.h"
#include "test_support.h"

namespace hieragent {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Collects failed checks for one criterion.
class Checks {
 public:
  void expect(bool ok, const std::string& what) {
    ++count_;
    if (!ok && failures_.size() < 5) failures_.push_back(what);
    if (!ok) ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::ostringstream s;
    s << count_ - failed_ << "/" << count_ << " checks";
    for (const auto& f : failures_) s << "; " << f;
    return s.str();
  }
  std::size_t count() const { return count_; }

 private:
  std::size_t count_ = 0;
  std::size_t failed_ = 0;
  std::vector<std::string> failures_;
};

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const std::vector<std::string> kCaseGold = {testing::kCaseGold};

TrajectoryGroup case_group(Mode mode) {
  return run_rollout(mode, PolicySet::single(testing::case_policy()),
                     testing::case_corpus(), testing::kCaseQuestion, kCaseGold,
                     RolloutConfig{}, 0);
}

Trajectory single_chunk(Role role, const std::string& text) {
  return testing::make_trajectory(role, {{text, Origin::Agent}});
}

// 1. Reward algebra.
std::string reward_algebra(Checks& c) {
  const auto t0 = Clock::now();
  c.expect(std::abs(answer_reward_from_f1(1.0) - 3.0) <= 1e-12, "f1=1");
  c.expect(std::abs(answer_reward_from_f1(0.0) + 3.0) <= 1e-12, "f1=0");
  c.expect(std::abs(answer_reward_from_f1(0.8) - 1.8) <= 1e-12, "f1=0.8");
  c.expect(std::abs(reward_answer("the Toronto Terminal", kCaseGold) - 1.8) <=
               1e-12,
           "partial answer");
  c.expect(reward_answer(std::nullopt, kCaseGold) == -3.0, "absent answer");

  const TrajectoryGroup hier = case_group(Mode::Hierarchical);
  for (double delta : {0.0, 0.5, 1.0, 2.5}) {
    HyperParams hp;
    hp.delta = delta;
    const auto r = total_reward(hier, kCaseGold, hp);
    c.expect(r.r_refine == delta, "case refine = delta " + fmt(delta));
    c.expect(r.total == r.r_ans + r.r_format + r.r_refine, "case sum");
  }
  const auto mono = total_reward(case_group(Mode::Monolithic), kCaseGold, {});
  c.expect(mono.total == mono.r_ans + mono.r_format + mono.r_refine,
           "monolithic sum");

  // Gold only appears once the refinements are joined.
  TrajectoryGroup split;
  split.trajectories.push_back(single_chunk(
      Role::Planner, "<task> a </task>"));
  for (const char* part : {"went to Toronto Coach", "Terminal then home"}) {
    split.trajectories.push_back(testing::make_trajectory(
        Role::Executor,
        {{"<search> q </search>", Origin::Agent},
         {"<documents>d</documents>", Origin::Environment},
         {std::string("<refine>") + part + "</refine><result> r </result>",
          Origin::Agent}}));
  }
  HyperParams hp;
  hp.delta = 0.7;
  c.expect(reward_refine(split, kCaseGold, hp.delta) == 0.7, "split refine");
  c.expect(refine_reward_for("went to Toronto Coach", kCaseGold, 0.7) == 0.0,
           "half refine");
  const auto r = total_reward(split, kCaseGold, hp);
  c.expect(r.total == r.r_ans + r.r_format + r.r_refine, "split sum");

  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    HyperParams h;
    h.delta = u(rng) * 3;
    TrajectoryGroup g = i % 2 ? hier : split;
    g.final_answer = i % 3 ? std::optional<std::string>("Toronto") : std::nullopt;
    const auto b = total_reward(g, kCaseGold, h);
    if (b.total != b.r_ans + b.r_format + b.r_refine) {
      c.expect(false, "random sum");
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 1.0, "runtime " + fmt(secs) + "s");
  return "runtime " + fmt(secs) + "s";
}

// 2. Advantage normalization.
std::string advantage_normalization(Checks& c) {
  const auto t0 = Clock::now();
  std::mt19937 rng(202);
  std::uniform_int_distribution<int> k_dist(2, 16);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  double worst_mean = 0.0, worst_std = 0.0;
  int normalized = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int k = k_dist(rng);
    std::normal_distribution<double> n(scale(rng) - 500, scale(rng));
    std::vector<double> r(k);
    for (auto& x : r) x = n(rng);
    double m = 0;
    for (double x : r) m += x;
    m /= k;
    double v = 0;
    for (double x : r) v += (x - m) * (x - m);
    if (std::sqrt(v / k) <= 1e-6) continue;
    const auto a = group_advantages(r).per_group;
    double am = 0;
    for (double x : a) am += x;
    am /= k;
    double av = 0;
    for (double x : a) av += (x - am) * (x - am);
    worst_mean = std::max(worst_mean, std::abs(am));
    worst_std = std::max(worst_std, std::abs(std::sqrt(av / k) - 1.0));
    ++normalized;
  }
  c.expect(worst_mean < 1e-9, "max |mean| " + fmt(worst_mean));
  c.expect(worst_std < 1e-9, "max |std-1| " + fmt(worst_std));
  c.expect(normalized >= 990, "normalized vectors " + std::to_string(normalized));
  for (int k = 2; k <= 16; ++k) {
    for (double v : {0.0, -3.0, 6.0, 1e9}) {
      const auto a = group_advantages(std::vector<double>(k, v)).per_group;
      c.expect(std::all_of(a.begin(), a.end(), [](double x) { return x == 0.0; }),
               "equal rewards k=" + std::to_string(k));
    }
  }
  const double secs = seconds_since(t0);
  c.expect(secs < 5.0, "runtime " + fmt(secs) + "s");
  return "max|mean|=" + fmt(worst_mean) + " max|std-1|=" + fmt(worst_std) +
         " runtime " + fmt(secs) + "s";
}

// 3. Clip and KL algebra.
std::string clip_kl_algebra(Checks& c) {
  std::size_t points = 0;
  std::size_t mismatches = 0;
  for (int i = 0; i < 25; ++i) {
    const double rho = 0.05 + 0.1 * i;  // 0.05 .. 2.45
    for (int j = 0; j < 20; ++j) {
      const double adv = -2.0 + 0.2 * j + (j == 10 ? 0.0 : 0.013);
      for (int e = 0; e < 20; ++e) {
        const double eps = 0.01 + 0.045 * e;
        double clipped = rho;
        if (clipped < 1.0 - eps) clipped = 1.0 - eps;
        if (clipped > 1.0 + eps) clipped = 1.0 + eps;
        const double a = rho * adv;
        const double b = clipped * adv;
        const double oracle = a < b ? a : b;
        ++points;
        if (clip_term(rho, adv, eps) != oracle) ++mismatches;
      }
    }
  }
  c.expect(points == 10000, "grid size " + std::to_string(points));
  c.expect(mismatches == 0, "clip mismatches " + std::to_string(mismatches));

  std::size_t kl_points = 0;
  double min_unequal = INFINITY;
  for (int i = 0; i <= 200; ++i) {
    for (int j = 0; j <= 200; ++j) {
      const double cur = -20.0 + 0.1 * i;
      const double ref = -20.0 + 0.1 * j;
      const double kl = kl_term(cur, ref);
      ++kl_points;
      if (i == j) {
        c.expect(std::abs(kl) <= 1e-12, "kl at equal logprobs");
      } else {
        c.expect(kl > 0.0, "kl positive");
        min_unequal = std::min(min_unequal, kl);
      }
    }
  }
  const double ln_half = std::log(0.5);
  c.expect(std::abs(kl_term(ln_half, std::log(0.25)) -
                    (0.5 - std::log(0.5) - 1.0)) <= 1e-12,
           "kl example");
  return std::to_string(points) + " clip points, " + std::to_string(kl_points) +
         " kl points, min kl off-diagonal " + fmt(min_unequal);
}

void randomize(RolloutBatch& batch, std::mt19937& rng, bool masked_only) {
  std::uniform_real_distribution<double> lp(-12.0, -0.001);
  for (auto& g : batch.groups) {
    for (auto& t : g.trajectories) {
      auto cur = t.logprobs_current();
      auto old = t.logprobs_old();
      auto ref = t.logprobs_reference();
      for (std::size_t i = 0; i < cur.size(); ++i) {
        if (masked_only && t.mask()[i]) continue;
        cur[i] = lp(rng);
        old[i] = lp(rng);
        ref[i] = lp(rng);
      }
      t.set_logprobs(cur, old, ref);
    }
  }
}

// Replays a batch through the trace format, as the objective command does.
RolloutBatch replayed(const std::vector<TrajectoryGroup>& groups) {
  RolloutBatch batch;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    TraceRecord rec;
    rec.question_id = "q";
    rec.rollout = i;
    rec.group = groups[i];
    rec.reward = total_reward(groups[i], groups[i].gold_answers, {});
    batch.groups.push_back(parse_trace_line(trace_line(rec)).group);
  }
  return batch;
}

// 4. Mask annihilation.
std::string mask_annihilation(Checks& c) {
  std::vector<RolloutBatch> batches;
  batches.push_back(replayed({case_group(Mode::Hierarchical),
                              case_group(Mode::Monolithic)}));
  for (std::size_t hops = 1; hops <= 4; ++hops) {
    SyntheticSpec spec;
    spec.hops = hops;
    spec.doc_len = 400;
    spec.variant = hops;
    const auto w = make_synthetic_workload(spec);
    const Corpus corpus = ingest_corpus(w.corpus, spec.chunk_size);
    const auto policies =
        PolicySet::single(std::make_shared<ScriptedPolicy>(w.script));
    std::vector<TrajectoryGroup> groups;
    for (Mode m : {Mode::Hierarchical, Mode::Monolithic}) {
      groups.push_back(run_rollout(m, policies, corpus, w.query, w.gold,
                                   RolloutConfig{}, hops));
    }
    batches.push_back(replayed(groups));
  }
  std::mt19937 rng(404);
  std::size_t trajectories = 0, masked_out = 0;
  for (auto& batch : batches) {
    randomize(batch, rng, false);
    std::vector<double> adv;
    for (std::size_t i = 0; i < batch.groups.size(); ++i) {
      adv.push_back(i % 2 ? -0.8 : 1.3);
    }
    HyperParams hp;
    hp.beta = 0.1;
    const auto before = surrogate_with_advantages(batch, adv, hp);
    for (int trial = 0; trial < 20; ++trial) {
      randomize(batch, rng, true);
      const auto after = surrogate_with_advantages(batch, adv, hp);
      c.expect(after.surrogate_sum - before.surrogate_sum == 0.0,
               "surrogate_sum moved");
      c.expect(after.kl_sum - before.kl_sum == 0.0, "kl_sum moved");
    }
    for (const auto& g : batch.groups) {
      for (const auto& t : g.trajectories) {
        ++trajectories;
        masked_out += t.tokens().size() - t.masked_token_count();
      }
    }
  }
  c.expect(masked_out > 0, "no mask-0 tokens exercised");
  return std::to_string(trajectories) + " trajectories, " +
         std::to_string(masked_out) + " mask-0 tokens perturbed x20";
}

std::string case_trace(Mode mode) {
  RunConfig config;
  config.mode = mode;
  config.k_rollouts = 1;
  config.policy_path = testing::data_path("case_script.json");
  const auto out = execute_rollouts(
      config, testing::case_corpus(), load_policy(config.policy_path),
      read_questions_file(testing::data_path("case_questions.jsonl")), 1);
  return out.trace;
}

// 5. Golden trace replay of the bus-station case.
std::string golden_trace(Checks& c, double delta) {
  HyperParams hp;
  hp.delta = delta;
  const TrajectoryGroup hier = case_group(Mode::Hierarchical);
  const auto& steps = hier.strategic_context->steps();
  c.expect(steps.size() == 3, "three tasks");
  c.expect(hier.executor_count() == 3, "three executors");
  c.expect(hier.final_answer == std::optional<std::string>(testing::kCaseGold),
           "hierarchical answer");
  c.expect(exact_match(hier.final_answer.value_or(""), kCaseGold) == 1, "EM=1");
  const auto r = total_reward(hier, kCaseGold, hp);
  c.expect(r.r_format == 2, "r_format=2");
  c.expect(r.r_refine == delta, "r_refine=delta");
  if (steps.size() == 3) {
    c.expect(steps[0].result_text == std::optional<std::string>("Nelvana"),
             "step 1 result");
    c.expect(steps[1].result_text ==
                 std::optional<std::string>("Toronto, Ontario"),
             "step 2 result");
  }

  const TrajectoryGroup mono = case_group(Mode::Monolithic);
  c.expect(mono.final_answer == std::optional<std::string>("Culver City"),
           "monolithic answer");
  c.expect(exact_match(mono.final_answer.value_or(""), kCaseGold) == 0, "EM=0");

  for (Mode m : {Mode::Hierarchical, Mode::Monolithic}) {
    const std::string first = case_trace(m);
    const std::string second = case_trace(m);
    c.expect(first == second, "byte-stable " + std::string(mode_name(m)));
    const std::string golden_path = testing::data_path(
        "golden/case_" + std::string(mode_name(m)) + ".jsonl");
    std::string golden;
    try {
      golden = testing::read_text(golden_path);
    } catch (const std::exception&) {
      c.expect(false, "missing " + golden_path);
      continue;
    }
    c.expect(first == golden, "golden file " + std::string(mode_name(m)));
  }
  return "hierarchical \"" + hier.final_answer.value_or("") + "\", monolithic \"" +
         mono.final_answer.value_or("") + "\"";
}

std::vector<std::string> words_of(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& w, std::size_t from,
                       std::size_t n) {
  std::string out;
  for (std::size_t i = from; i < from + n && i < w.size(); ++i) {
    if (i > from) out += ' ';
    out += w[i];
  }
  return out;
}

StrategicContext with_result(const StrategicContext& base, std::size_t step,
                             const std::string& result) {
  StrategicContext out(base.query(), base.system_preamble(),
                       base.max_planner_steps());
  for (std::size_t i = 0; i < base.steps().size(); ++i) {
    out.append_plan_step(base.steps()[i].task_text);
    out.close_plan_step(i == step ? result : *base.steps()[i].result_text);
  }
  return out;
}

// 6. Context isolation over a synthetic question suite.
std::string context_isolation(Checks& c) {
  SyntheticSpec base;
  base.doc_len = 400;
  const Corpus corpus = ingest_corpus(synthetic_corpus(base), base.chunk_size);
  const auto heuristic = PolicySet::single(std::make_shared<HeuristicPolicy>());
  std::mt19937 rng(606);

  std::size_t groups = 0, passed = 0, mutants = 0, detected = 0;
  std::size_t scripted = 0, heuristic_runs = 0;
  for (std::size_t q = 0; q < 200; ++q) {
    SyntheticSpec spec = base;
    spec.hops = 1 + q % 6;
    spec.variant = q;
    const auto w = make_synthetic_workload(spec);
    TrajectoryGroup g;
    if (q % 4 == 3) {
      g = run_hierarchical_rollout(heuristic, corpus, w.query, w.gold,
                                   RolloutConfig{}, q);
      ++heuristic_runs;
    } else {
      const auto policies =
          PolicySet::single(std::make_shared<ScriptedPolicy>(w.script));
      g = run_hierarchical_rollout(policies, corpus, w.query, w.gold,
                                   RolloutConfig{}, q);
      ++scripted;
    }
    ++groups;
    const StrategicContext& ctx = *g.strategic_context;
    if (isolation_check(ctx, g.raw_docs).ok() &&
        isolation_check_prompt(render_planner_prompt(ctx), g.raw_docs).ok()) {
      ++passed;
    }
    if (ctx.steps().empty()) {
      c.expect(false, "question " + std::to_string(q) + " has no plan step");
      continue;
    }

    // Searches that found nothing leave no raw docs; inject a corpus record.
    std::vector<std::string> sources = g.raw_docs;
    if (sources.empty()) sources.push_back(w.corpus[q % w.corpus.size()].text);
    const std::size_t step = q % ctx.steps().size();
    const std::string& doc = sources[rng() % sources.size()];
    const auto doc_words = words_of(doc);
    const std::size_t from =
        doc_words.size() > kIsolationWindowTokens
            ? rng() % (doc_words.size() - kIsolationWindowTokens + 1)
            : 0;
    const std::string original = *ctx.steps()[step].result_text;
    const std::vector<std::string> injected = {
        doc,
        join_words(doc_words, from, kIsolationWindowTokens),
        original + " " + join_words(doc_words, from, kIsolationWindowTokens) +
            " and so on",
        "<documents>" + original + "</documents>",
    };
    for (const auto& text : injected) {
      ++mutants;
      const auto mutated = with_result(ctx, step, text);
      if (!isolation_check(mutated, sources).ok()) ++detected;
    }
  }
  c.expect(passed == groups, "isolation passed " + std::to_string(passed) + "/" +
                                 std::to_string(groups));
  c.expect(detected == mutants, "mutants detected " + std::to_string(detected) +
                                    "/" + std::to_string(mutants));
  c.expect(heuristic_runs > 0 && scripted > 0, "suite mix");
  return std::to_string(passed) + "/" + std::to_string(groups) +
         " groups isolated (" + std::to_string(scripted) + " scripted, " +
         std::to_string(heuristic_runs) + " heuristic), " +
         std::to_string(detected) + "/" + std::to_string(mutants) +
         " mutants detected";
}

// 7. Complexity laws.
std::string complexity_laws(Checks& c) {
  const auto t0 = Clock::now();
  const ComplexityGrid grid;  // H 1..6, L_doc 2000, L_res 50, top_k 3..30
  const auto report = complexity_report(grid, RolloutConfig{});
  const double per_step = static_cast<double>(grid.task_len + grid.res_len +
                                              report.per_step_overhead);
  std::map<std::size_t, std::size_t> planner_peak_by_h;
  bool planner_invariant = true;
  for (const auto& row : report.rows) {
    if (row.mode != Mode::Hierarchical) continue;
    auto [it, inserted] =
        planner_peak_by_h.emplace(row.hops, row.budget.peak_planner_tokens);
    if (!inserted && it->second != row.budget.peak_planner_tokens) {
      planner_invariant = false;
    }
  }
  c.expect(planner_invariant, "planner peak varies with top_k");
  std::string detail;
  for (const auto& f : report.fits) {
    const double need = 0.95 * static_cast<double>(f.top_k * grid.chunk_size);
    c.expect(f.monolithic.slope >= need,
             "top_k " + std::to_string(f.top_k) + " monolithic slope " +
                 fmt(f.monolithic.slope) + " < " + fmt(need));
    c.expect(f.planner.slope <= 1.1 * per_step,
             "top_k " + std::to_string(f.top_k) + " planner slope " +
                 fmt(f.planner.slope));
    c.expect(f.executor_min == f.executor_max,
             "top_k " + std::to_string(f.top_k) + " executor peak varies");
    detail += " k" + std::to_string(f.top_k) + ": mono " +
              fmt(f.monolithic.slope) + "/hop, planner " +
              fmt(f.planner.slope) + "/hop";
  }
  c.expect(report.fits.size() == grid.top_ks.size(), "fit count");
  const double secs = seconds_since(t0);
  c.expect(secs < 60.0, "runtime " + fmt(secs) + "s");
  return "runtime " + fmt(secs) + "s;" + detail;
}

// Independent normalization and overlap for the metric oracle.
std::vector<std::string> oracle_tokens(const std::string& s) {
  std::string cleaned;
  for (char ch : s) {
    const unsigned char u = static_cast<unsigned char>(ch);
    const bool punct = (u >= 33 && u <= 47) || (u >= 58 && u <= 64) ||
                       (u >= 91 && u <= 96) || (u >= 123 && u <= 126);
    if (punct) continue;
    cleaned += (u >= 'A' && u <= 'Z') ? static_cast<char>(u + 32) : ch;
  }
  std::vector<std::string> out;
  for (const auto& w : words_of(cleaned)) {
    if (w != "a" && w != "an" && w != "the") out.push_back(w);
  }
  return out;
}

double oracle_f1(const std::string& pred, const std::string& gold) {
  const auto p = oracle_tokens(pred);
  const auto g = oracle_tokens(gold);
  if (p.empty() && g.empty()) return 1.0;
  if (p.empty() || g.empty()) return 0.0;
  std::vector<bool> used(g.size(), false);
  int overlap = 0;
  for (const auto& w : p) {
    for (std::size_t j = 0; j < g.size(); ++j) {
      if (!used[j] && g[j] == w) {
        used[j] = true;
        ++overlap;
        break;
      }
    }
  }
  if (overlap == 0) return 0.0;
  const double precision = static_cast<double>(overlap) / p.size();
  const double recall = static_cast<double>(overlap) / g.size();
  return 2.0 * precision * recall / (precision + recall);
}

// 8. Metric oracles.
std::string metric_oracles(Checks& c) {
  const std::vector<std::string> vocab = {
      "The", "a", "an", "Toronto", "toronto,", "Coach", "TERMINAL", "bus",
      "City", "culver", "x", "the.", "An!", "(coach)", "", "-", "rock'n'roll"};
  std::mt19937 rng(808);
  std::uniform_int_distribution<int> len(0, 6);
  std::uniform_int_distribution<std::size_t> pick(0, vocab.size() - 1);
  auto sample = [&] {
    std::string s;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      s += (rng() % 3 == 0 ? "  " : " ");
      s += vocab[pick(rng)];
    }
    return s;
  };
  std::size_t em_hits = 0, cem_hits = 0, partial = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string p = sample();
    const std::string g = i % 5 == 0 ? p + " extra" : sample();
    const auto pt = oracle_tokens(p);
    const auto gt = oracle_tokens(g);
    const int em = pt == gt ? 1 : 0;
    auto joined = [](const std::vector<std::string>& t) {
      std::string s;
      for (const auto& w : t) s += (s.empty() ? "" : " ") + w;
      return s;
    };
    const int cem = joined(pt).find(joined(gt)) != std::string::npos ? 1 : 0;
    const double f1 = oracle_f1(p, g);
    c.expect(exact_match(p, {g}) == em, "em '" + p + "' '" + g + "'");
    c.expect(cover_exact_match(p, {g}) == cem, "cem '" + p + "' '" + g + "'");
    c.expect(token_f1(p, g) == f1, "f1 '" + p + "' '" + g + "'");
    em_hits += em;
    cem_hits += cem;
    partial += f1 > 0.0 && f1 < 1.0;
  }
  c.expect(em_hits > 0 && cem_hits > em_hits && partial > 0, "coverage");
  return "1000 pairs (em " + std::to_string(em_hits) + ", cem " +
         std::to_string(cem_hits) + ", partial f1 " + std::to_string(partial) +
         ")";
}

// A well-formed hierarchical group as text: planner turns and executor
// transcripts.
struct Transcript {
  std::vector<std::string> planner_turns;
  std::vector<std::string> executors;
};

Transcript transcript_of(const TrajectoryGroup& g) {
  Transcript t;
  t.planner_turns = g.root().agent_turns();
  for (const auto& traj : g.trajectories) {
    if (traj.role() == Role::Executor) t.executors.push_back(traj.text());
  }
  return t;
}

FormatIndicators indicators(const Transcript& t) {
  TrajectoryGroup g;
  g.mode = Mode::Hierarchical;
  std::vector<TextChunk> planner;
  for (const auto& turn : t.planner_turns) {
    planner.push_back({turn, Origin::Agent});
    planner.push_back({"<result> r </result>", Origin::Environment});
  }
  g.trajectories.push_back(testing::make_trajectory(Role::Planner, planner));
  for (const auto& e : t.executors) {
    g.trajectories.push_back(single_chunk(Role::Executor, e));
  }
  return format_indicators(g);
}

// Replaces the first occurrence of `from`; empty result when absent so that
// inapplicable mutations are caught.
std::string replace_first(const std::string& s, const std::string& from,
                          const std::string& to) {
  const auto at = s.find(from);
  if (at == std::string::npos) return {};
  std::string out = s;
  out.replace(at, from.size(), to);
  return out;
}

std::string replace_last(const std::string& s, const std::string& from,
                         const std::string& to) {
  const auto at = s.rfind(from);
  if (at == std::string::npos) return {};
  std::string out = s;
  out.replace(at, from.size(), to);
  return out;
}

// Removes the first <tag>...</tag> segment.
std::string drop_segment(const std::string& s, TagKind kind) {
  const auto open = s.find(open_tag(kind));
  const auto close = s.find(close_tag(kind), open);
  if (open == std::string::npos || close == std::string::npos) return {};
  return s.substr(0, open) + s.substr(close + close_tag(kind).size());
}

std::string empty_segment(const std::string& s, TagKind kind) {
  const auto open = s.find(open_tag(kind));
  const auto close = s.find(close_tag(kind), open);
  if (open == std::string::npos || close == std::string::npos) return {};
  const auto body = open + open_tag(kind).size();
  return s.substr(0, body) + "  " + s.substr(close);
}

struct Mutation {
  std::string name;
  bool planner;  // targets a planner turn, otherwise an executor transcript
  std::function<std::string(const std::string&)> apply;
};

TagKind planner_action(const std::string& turn) {
  return turn.find(open_tag(TagKind::Answer)) != std::string::npos
             ? TagKind::Answer
             : TagKind::Task;
}

std::vector<Mutation> catalogue() {
  std::vector<Mutation> m;
  m.push_back({"planner: action removed", true, [](const std::string& s) {
                 const TagKind k = planner_action(s);
                 const auto out = drop_segment(s, k);
                 return out.empty() ? out : out + "<think> hmm </think>";
               }});
  m.push_back({"planner: empty action", true, [](const std::string& s) {
                 const TagKind k = planner_action(s);
                 return empty_segment(s, k);
               }});
  m.push_back({"planner: second action", true, [](const std::string& s) {
                 return s + "<task> another </task>";
               }});
  m.push_back({"planner: think after action", true, [](const std::string& s) {
                 return s + "<think> late </think>";
               }});
  m.push_back({"planner: search instead of task", true,
               [](const std::string& s) {
                 const TagKind k = planner_action(s);
                 const auto a = replace_first(s, open_tag(k), "<search>");
                 return a.empty() ? a : replace_first(a, close_tag(k), "</search>");
               }});
  m.push_back({"planner: unclosed action", true, [](const std::string& s) {
                 const TagKind k = planner_action(s);
                 return replace_last(s, close_tag(k), "");
               }});
  m.push_back({"planner: stray delimiter", true, [](const std::string& s) {
                 return "</think> " + s;
               }});
  m.push_back({"executor: result removed", false, [](const std::string& s) {
                 return drop_segment(s, TagKind::Result);
               }});
  m.push_back({"executor: answer instead of result", false,
               [](const std::string& s) {
                 const auto a = replace_first(s, "<result>", "<answer>");
                 return a.empty() ? a : replace_first(a, "</result>", "</answer>");
               }});
  m.push_back({"executor: empty search", false, [](const std::string& s) {
                 return empty_segment(s, TagKind::Search);
               }});
  m.push_back({"executor: empty result", false, [](const std::string& s) {
                 return empty_segment(s, TagKind::Result);
               }});
  m.push_back({"executor: two searches in one turn", false,
               [](const std::string& s) {
                 return replace_first(s, "<search>",
                                      "<search> extra </search><search>");
               }});
  m.push_back({"executor: refine before documents", false,
               [](const std::string& s) {
                 return "<refine> premature </refine>" + s;
               }});
  m.push_back({"executor: documents dropped", false, [](const std::string& s) {
                 return drop_segment(s, TagKind::Documents);
               }});
  m.push_back({"executor: text after result", false, [](const std::string& s) {
                 return s + "<think> more </think>";
               }});
  m.push_back({"executor: stray delimiter", false, [](const std::string& s) {
                 return replace_first(s, "<search>", "</refine> <search>");
               }});
  m.push_back({"executor: ends on documents", false, [](const std::string& s) {
                 const auto at = s.rfind("</documents>");
                 return at == std::string::npos
                            ? std::string()
                            : s.substr(0, at + std::string("</documents>").size());
               }});
  return m;
}

// 9. Format-indicator mutation suite.
std::string format_mutations(Checks& c) {
  std::vector<Transcript> originals;
  originals.push_back(transcript_of(case_group(Mode::Hierarchical)));
  SyntheticSpec base;
  base.doc_len = 400;
  const Corpus corpus = ingest_corpus(synthetic_corpus(base), base.chunk_size);
  for (std::size_t v = 0; originals.size() < 20; ++v) {
    SyntheticSpec spec = base;
    spec.hops = 1 + v % 6;
    spec.variant = v;
    const auto w = make_synthetic_workload(spec);
    const auto policies =
        PolicySet::single(std::make_shared<ScriptedPolicy>(w.script));
    originals.push_back(transcript_of(run_hierarchical_rollout(
        policies, corpus, w.query, w.gold, RolloutConfig{}, v)));
  }

  std::size_t clean = 0;
  for (const auto& t : originals) {
    const auto f = indicators(t);
    if (f.planner == 1 && f.executor == 1) ++clean;
  }
  c.expect(clean == originals.size(),
           "originals well-formed " + std::to_string(clean));

  const auto muts = catalogue();
  std::size_t applied = 0, flipped = 0;
  for (const auto& m : muts) {
    std::size_t kind_flips = 0;
    for (std::size_t i = 0; i < originals.size(); ++i) {
      Transcript t = originals[i];
      // Mutate one turn: planner turns cycle, executors cycle.
      std::string& target =
          m.planner ? t.planner_turns[i % t.planner_turns.size()]
                    : t.executors[i % t.executors.size()];
      const std::string mutated = m.apply(target);
      if (mutated.empty() || mutated == target) {
        c.expect(false, m.name + " not applicable to #" + std::to_string(i));
        continue;
      }
      target = mutated;
      ++applied;
      const auto f = indicators(t);
      const bool ok = m.planner ? (f.planner == 0 && f.executor == 1)
                                : (f.executor == 0 && f.planner == 1);
      if (ok) {
        ++flipped;
        ++kind_flips;
      }
    }
    c.expect(kind_flips == originals.size(),
             m.name + " flipped " + std::to_string(kind_flips) + "/" +
                 std::to_string(originals.size()));
  }
  c.expect(muts.size() >= 10, "catalogue size");
  return std::to_string(originals.size()) + " transcripts x " +
         std::to_string(muts.size()) + " mutations, " +
         std::to_string(flipped) + "/" + std::to_string(applied) + " flipped";
}

}  // namespace
}  // namespace hieragent

int main() {
  using namespace hieragent;
  struct Criterion {
    int id;
    const char* name;
    std::function<std::string(Checks&)> run;
  };
  const std::vector<Criterion> criteria = {
      {1, "reward algebra", reward_algebra},
      {2, "advantage normalization", advantage_normalization},
      {3, "clip and KL algebra", clip_kl_algebra},
      {4, "mask annihilation", mask_annihilation},
      {5, "golden trace replay",
       [](Checks& c) { return golden_trace(c, 1.0); }},
      {6, "context isolation", context_isolation},
      {7, "complexity laws", complexity_laws},
      {8, "metric oracles", metric_oracles},
      {9, "format-indicator mutations", format_mutations},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Checks checks;
    std::string detail;
    try {
      detail = cr.run(checks);
    } catch (const std::exception& e) {
      checks.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = checks.ok();
    failed += ok ? 0 : 1;
    std::printf("%s %d %s: %s%s%s\n", ok ? "PASS" : "FAIL", cr.id, cr.name,
                checks.summary().c_str(), detail.empty() ? "" : "; ",
                detail.c_str());
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
