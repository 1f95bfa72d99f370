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

#include "hieragent/driver.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

#include "hieragent/error.h"
#include "hieragent/metrics.h"
#include "hieragent/synthetic.h"

namespace hieragent {

namespace {

using nlohmann::ordered_json;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

struct QuestionResult {
  std::vector<std::string> lines;
  ordered_json metrics;
  double em = 0.0;
  double f1 = 0.0;
  double cem = 0.0;
};

QuestionResult run_question(const RunConfig& config, const RolloutConfig& rc,
                            const HyperParams& hp, const Corpus& corpus,
                            const PolicySet& policies,
                            const QuestionRecord& q) {
  const std::uint64_t base = rollout_seed(config.seed ^ fnv1a(q.id), 0);
  std::vector<TraceRecord> records;
  std::vector<double> totals;
  for (std::size_t r = 0; r < config.k_rollouts; ++r) {
    TraceRecord rec;
    rec.question_id = q.id;
    rec.rollout = r;
    rec.group = run_rollout(config.mode, policies, corpus, q.question,
                            q.answers, rc, rollout_seed(base, r));
    for (std::size_t t = 0; t < rec.group.trajectories.size(); ++t) {
      rec.group.trajectories[t].check_integrity(
          q.id + "/" + std::to_string(r) + "/" + std::to_string(t));
    }
    rec.reward = total_reward(rec.group, q.answers, hp);
    totals.push_back(rec.reward.total);
    records.push_back(std::move(rec));
  }
  if (records.size() > 1) {
    const auto adv = group_advantages(totals).per_group;
    for (std::size_t r = 0; r < records.size(); ++r) {
      records[r].advantage = adv[r];
    }
  }

  // The reported answer is the one from the highest-reward rollout; ties go
  // to the earliest.
  std::size_t best = 0;
  for (std::size_t r = 1; r < totals.size(); ++r) {
    if (totals[r] > totals[best]) best = r;
  }
  const std::string answer = records[best].group.final_answer.value_or("");

  QuestionResult out;
  for (const auto& rec : records) out.lines.push_back(trace_line(rec));
  out.em = exact_match(answer, q.answers);
  out.f1 = max_f1(answer, q.answers);
  out.cem = cover_exact_match(answer, q.answers);
  out.metrics = {{"id", q.id},
                 {"selected_rollout", best},
                 {"final_answer", records[best].group.final_answer
                                      ? ordered_json(answer)
                                      : ordered_json(nullptr)},
                 {"em", out.em},
                 {"f1", out.f1},
                 {"cem", out.cem},
                 {"reward", reward_to_json(records[best].reward)}};
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << data;
}

std::size_t first_differing_line(const std::string& a, const std::string& b) {
  std::istringstream sa(a), sb(b);
  std::string la, lb;
  for (std::size_t n = 1;; ++n) {
    const bool ga = static_cast<bool>(std::getline(sa, la));
    const bool gb = static_cast<bool>(std::getline(sb, lb));
    if (!ga && !gb) return a == b ? 0 : n;
    if (ga != gb || la != lb) return n;
  }
}

}  // namespace

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const IngestError*>(&e)) return kExitIngest;
  if (dynamic_cast<const Error*>(&e)) return kExitRollout;
  return kExitUsage;
}

IngestSummary run_ingest(const std::string& corpus_path,
                         const std::string& out_index_path,
                         std::size_t chunk_size, std::ostream& log) {
  if (chunk_size == 0) throw ConfigError("chunk_size must be >= 1");
  std::ifstream in(corpus_path);
  if (!in) throw IngestError("cannot read corpus: " + corpus_path);
  const auto records = read_corpus_jsonl(in);
  const Corpus corpus = ingest_corpus(records, chunk_size);

  IngestSummary s;
  s.records = records.size();
  s.skipped_empty = corpus.skipped_records();
  s.chunks = corpus.chunks().size();
  s.terms = corpus.index().size();
  if (s.chunks == 0) log << "warning: corpus " << corpus_path << " is empty\n";
  if (s.skipped_empty > 0) {
    log << "warning: skipped " << s.skipped_empty << " empty record(s)\n";
  }

  std::ofstream out(out_index_path, std::ios::binary);
  if (!out) throw IngestError("cannot write index: " + out_index_path);
  corpus.save(out);
  log << "records=" << s.records << " chunks=" << s.chunks
      << " terms=" << s.terms << " skipped=" << s.skipped_empty << '\n';
  return s;
}

std::shared_ptr<const Policy> load_policy(const std::string& policy_path) {
  if (policy_path.empty()) return std::make_shared<HeuristicPolicy>();
  return std::make_shared<ScriptedPolicy>(ScriptedPolicy::from_file(policy_path));
}

RolloutOutputs execute_rollouts(const RunConfig& config, const Corpus& corpus,
                                std::shared_ptr<const Policy> policy,
                                const std::vector<QuestionRecord>& questions,
                                std::size_t jobs) {
  config.validate();
  const RolloutConfig rc = config.rollout_config();
  const HyperParams hp = config.hyper_params();
  const PolicySet policies = PolicySet::single(std::move(policy));

  const std::size_t n = questions.size();
  std::vector<QuestionResult> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        results[i] =
            run_question(config, rc, hp, corpus, policies, questions[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, std::max<std::size_t>(n, 1));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      throw RolloutError(questions[i].id, e.what());
    }
  }

  RolloutOutputs out;
  out.questions = n;
  ordered_json per_question = ordered_json::array();
  double em = 0.0, f1 = 0.0, cem = 0.0;
  for (auto& r : results) {
    for (auto& line : r.lines) {
      out.trace += line;
      out.trace += '\n';
      ++out.groups;
    }
    em += r.em;
    f1 += r.f1;
    cem += r.cem;
    per_question.push_back(std::move(r.metrics));
  }
  const double denom = n == 0 ? 1.0 : static_cast<double>(n);
  ordered_json metrics;
  metrics["mode"] = mode_name(config.mode);
  metrics["k_rollouts"] = config.k_rollouts;
  metrics["questions"] = std::move(per_question);
  metrics["aggregate"] = {{"count", n},
                          {"em", em / denom},
                          {"f1", f1 / denom},
                          {"cem", cem / denom}};
  out.metrics = metrics.dump(2) + "\n";
  return out;
}

RolloutOutputs run_rollout_command(const RunConfig& config, std::size_t jobs,
                                   std::ostream& log) {
  config.validate();
  if (config.corpus_path.empty()) throw ConfigError("corpus_path is required");
  if (config.questions_path.empty()) {
    throw ConfigError("questions_path is required");
  }
  const Corpus corpus = load_corpus_file(config.corpus_path, config.chunk_size);
  const auto questions = read_questions_file(config.questions_path);
  auto policy = load_policy(config.policy_path);

  RolloutOutputs out =
      execute_rollouts(config, corpus, std::move(policy), questions, jobs);

  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw ConfigError("cannot create output_dir " + dir.string() + ": " +
                      ec.message());
  }
  write_file(dir / kTraceFileName, out.trace);
  write_file(dir / kMetricsFileName, out.metrics);
  write_file(dir / kConfigFileName, config.to_json().dump(2) + "\n");
  log << "questions=" << out.questions << " groups=" << out.groups
      << " trace=" << (dir / kTraceFileName).string() << '\n';
  return out;
}

ordered_json objective_report(const std::vector<TraceRecord>& trace,
                              const HyperParams& hp) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const TraceRecord*>> by_question;
  for (const auto& r : trace) {
    auto& v = by_question[r.question_id];
    if (v.empty()) order.push_back(r.question_id);
    v.push_back(&r);
  }

  ordered_json questions = ordered_json::array();
  ordered_json skipped = ordered_json::array();
  for (const auto& id : order) {
    auto records = by_question[id];
    std::stable_sort(records.begin(), records.end(),
                     [](const TraceRecord* a, const TraceRecord* b) {
                       return a->rollout < b->rollout;
                     });
    if (records.size() < 2) {
      skipped.push_back({{"question_id", id}, {"k", records.size()}});
      continue;
    }
    RolloutBatch batch;
    batch.query = records.front()->group.query;
    batch.gold_answers = records.front()->group.gold_answers;
    std::vector<double> totals;
    ordered_json rewards = ordered_json::array();
    for (const auto* r : records) {
      batch.groups.push_back(r->group);
      const RewardBreakdown rb = total_reward(r->group, batch.gold_answers, hp);
      totals.push_back(rb.total);
      rewards.push_back(reward_to_json(rb));
    }
    const auto adv = group_advantages(totals).per_group;
    const ObjectiveReport rep = surrogate_with_advantages(batch, adv, hp);
    questions.push_back({{"question_id", id},
                         {"k", records.size()},
                         {"rewards", rewards},
                         {"advantages", adv},
                         {"surrogate_sum", rep.surrogate_sum},
                         {"kl_sum", rep.kl_sum},
                         {"objective", rep.objective},
                         {"masked_token_count", rep.masked_token_count}});
  }
  ordered_json out;
  out["hyperparams"] = {{"epsilon", hp.epsilon},
                        {"beta", hp.beta},
                        {"delta", hp.delta},
                        {"answer_weight", hp.answer_weight},
                        {"format_weight", hp.format_weight},
                        {"refine_weight", hp.refine_weight}};
  out["questions"] = std::move(questions);
  out["skipped"] = std::move(skipped);
  return out;
}

ordered_json run_objective_command(const std::string& trace_path,
                                   const HyperParams& hp,
                                   const std::string& out_path,
                                   std::ostream& log) {
  if (!(hp.epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  if (!(hp.beta >= 0.0)) throw ConfigError("beta must be >= 0");
  if (!(hp.delta >= 0.0)) throw ConfigError("delta must be >= 0");
  const auto trace = read_trace_file(trace_path);
  ordered_json report = objective_report(trace, hp);
  for (const auto& s : report["skipped"]) {
    log << "skipped question " << s["question_id"].get<std::string>()
        << ": k=" << s["k"].get<std::size_t>() << " < 2\n";
  }
  const std::string text = report.dump(2) + "\n";
  if (out_path.empty()) {
    log << text;
  } else {
    write_file(out_path, text);
    log << "questions=" << report["questions"].size()
        << " skipped=" << report["skipped"].size() << " report=" << out_path
        << '\n';
  }
  return report;
}

LineFit fit_line(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) {
    throw PreconditionError("fit_line needs equally many x and y values");
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (xs.size() < 2 || sxx == 0.0) {
    throw PreconditionError("fit_line needs two distinct x values");
  }
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    f.max_abs_residual = std::max(
        f.max_abs_residual, std::abs(ys[i] - (f.intercept + f.slope * xs[i])));
  }
  return f;
}

ComplexityReport complexity_report(const ComplexityGrid& grid,
                                   const RolloutConfig& base) {
  if (grid.hops.empty() || grid.top_ks.empty()) {
    throw ConfigError("complexity grid needs at least one hop and one top_k");
  }
  ComplexityReport report;
  report.grid = grid;
  report.per_step_overhead =
      token_count(render_plan_step(PlanStep{"", std::string()}));

  SyntheticSpec spec;
  spec.doc_len = grid.doc_len;
  spec.res_len = grid.res_len;
  spec.task_len = grid.task_len;
  spec.chunk_size = grid.chunk_size;
  spec.topics = *std::max_element(grid.hops.begin(), grid.hops.end());
  const Corpus corpus = ingest_corpus(synthetic_corpus(spec), grid.chunk_size);

  for (std::size_t top_k : grid.top_ks) {
    RolloutConfig rc = base;
    rc.top_k = top_k;
    rc.max_planner_steps = std::max(rc.max_planner_steps, spec.topics);
    rc.max_monolithic_searches =
        std::max(rc.max_monolithic_searches, spec.topics);
    ComplexityFit fit;
    fit.top_k = top_k;
    fit.executor_min = static_cast<std::size_t>(-1);
    std::vector<double> xs, planner, mono;
    for (std::size_t h : grid.hops) {
      spec.hops = h;
      const SyntheticWorkload w = make_synthetic_workload(spec);
      const PolicySet policies =
          PolicySet::single(std::make_shared<ScriptedPolicy>(w.script));
      for (Mode mode : {Mode::Hierarchical, Mode::Monolithic}) {
        const TrajectoryGroup g =
            run_rollout(mode, policies, corpus, w.query, w.gold, rc, 0);
        report.rows.push_back({mode, h, top_k, g.budget});
        if (mode == Mode::Hierarchical) {
          planner.push_back(static_cast<double>(g.budget.peak_planner_tokens));
          fit.executor_min =
              std::min(fit.executor_min, g.budget.peak_executor_tokens);
          fit.executor_max =
              std::max(fit.executor_max, g.budget.peak_executor_tokens);
        } else {
          mono.push_back(static_cast<double>(g.budget.peak_monolithic_tokens));
        }
      }
      xs.push_back(static_cast<double>(h));
    }
    if (xs.size() >= 2) {
      fit.planner = fit_line(xs, planner);
      fit.monolithic = fit_line(xs, mono);
    }
    report.fits.push_back(fit);
  }
  return report;
}

std::string format_complexity_table(const ComplexityReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(14) << "mode" << std::right << std::setw(4)
      << "H" << std::setw(7) << "top_k" << std::setw(10) << "planner"
      << std::setw(10) << "executor" << std::setw(12) << "monolithic" << '\n';
  for (const auto& r : report.rows) {
    out << std::left << std::setw(14) << mode_name(r.mode) << std::right
        << std::setw(4) << r.hops << std::setw(7) << r.top_k;
    if (r.mode == Mode::Hierarchical) {
      out << std::setw(10) << r.budget.peak_planner_tokens << std::setw(10)
          << r.budget.peak_executor_tokens << std::setw(12) << "-";
    } else {
      out << std::setw(10) << "-" << std::setw(10) << "-" << std::setw(12)
          << r.budget.peak_monolithic_tokens;
    }
    out << '\n';
  }
  out << "\nslopes per hop (least squares)\n";
  out << std::setw(7) << "top_k" << std::setw(12) << "planner" << std::setw(14)
      << "monolithic" << std::setw(18) << "executor range" << '\n';
  out << std::fixed << std::setprecision(2);
  for (const auto& f : report.fits) {
    out << std::setw(7) << f.top_k << std::setw(12) << f.planner.slope
        << std::setw(14) << f.monolithic.slope << std::setw(12)
        << f.executor_min << ".." << f.executor_max << '\n';
  }
  out << "plan step overhead: " << report.per_step_overhead << " tokens\n";
  return out.str();
}

ordered_json complexity_to_json(const ComplexityReport& report) {
  ordered_json j;
  j["grid"] = {{"hops", report.grid.hops},
               {"top_ks", report.grid.top_ks},
               {"doc_len", report.grid.doc_len},
               {"res_len", report.grid.res_len},
               {"task_len", report.grid.task_len},
               {"chunk_size", report.grid.chunk_size}};
  j["per_step_overhead"] = report.per_step_overhead;
  auto& rows = j["rows"] = ordered_json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"mode", mode_name(r.mode)},
                    {"hops", r.hops},
                    {"top_k", r.top_k},
                    {"budget", budget_to_json(r.budget)}});
  }
  auto& fits = j["fits"] = ordered_json::array();
  for (const auto& f : report.fits) {
    auto line = [](const LineFit& l) {
      return ordered_json{{"slope", l.slope},
                          {"intercept", l.intercept},
                          {"max_abs_residual", l.max_abs_residual}};
    };
    fits.push_back({{"top_k", f.top_k},
                    {"planner", line(f.planner)},
                    {"monolithic", line(f.monolithic)},
                    {"executor_min", f.executor_min},
                    {"executor_max", f.executor_max}});
  }
  return j;
}

ReplayResult run_replay_command(const RunConfig& config,
                                const std::string& trace_path,
                                const std::string& metrics_path,
                                std::size_t jobs, std::ostream& log) {
  config.validate();
  if (config.corpus_path.empty()) throw ConfigError("corpus_path is required");
  if (config.questions_path.empty()) {
    throw ConfigError("questions_path is required");
  }
  const std::string recorded_trace = read_file(trace_path);
  const Corpus corpus = load_corpus_file(config.corpus_path, config.chunk_size);
  const auto questions = read_questions_file(config.questions_path);
  const RolloutOutputs fresh = execute_rollouts(
      config, corpus, load_policy(config.policy_path), questions, jobs);

  ReplayResult r;
  r.trace_matches = fresh.trace == recorded_trace;
  r.first_mismatch_line =
      r.trace_matches ? 0 : first_differing_line(recorded_trace, fresh.trace);
  r.metrics_matches =
      metrics_path.empty() || read_file(metrics_path) == fresh.metrics;
  if (r.ok()) {
    log << "replay matches: " << fresh.groups << " record(s)\n";
  } else {
    if (!r.trace_matches) {
      log << "trace differs at line " << r.first_mismatch_line << '\n';
    }
    if (!r.metrics_matches) log << "metrics differ\n";
  }
  return r;
}

}  // namespace hieragent
