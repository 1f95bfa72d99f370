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

#include "hieragent/context_store.h"

#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hieragent/error.h"

namespace hieragent {
namespace {

std::string words(const std::string& stem, int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += stem + std::to_string(i);
  }
  return out;
}

TEST(StrategicContext, EmptyRendersPreambleAndQuestion) {
  StrategicContext c("Where is X?", "PRE");
  EXPECT_EQ(render_planner_prompt(c), "PRE\nQuestion: Where is X?");
}

TEST(StrategicContext, OneClosedStepRendersItsPair) {
  StrategicContext c("Q", "PRE");
  c.append_plan_step(
      "What is the production company that produced A Cosmic Christmas?");
  c.close_plan_step("Nelvana");
  const std::string p = render_planner_prompt(c);
  EXPECT_NE(p.find("<task> What is the production company that produced A "
                   "Cosmic Christmas? </task>\n<result> Nelvana </result>"),
            std::string::npos);
  EXPECT_EQ(p.find("<task>"), p.rfind("<task>"));
}

TEST(StrategicContext, StepsRenderInInsertionOrder) {
  StrategicContext c("Q", "PRE");
  for (int i = 0; i < 3; ++i) {
    c.append_plan_step("task" + std::to_string(i));
    c.close_plan_step("result" + std::to_string(i));
  }
  const std::string p = render_planner_prompt(c);
  std::size_t last = 0;
  for (int i = 0; i < 3; ++i) {
    const auto t = p.find("<task> task" + std::to_string(i) + " </task>");
    const auto r = p.find("<result> result" + std::to_string(i) + " </result>");
    ASSERT_NE(t, std::string::npos);
    ASSERT_NE(r, std::string::npos);
    EXPECT_LT(last, t);
    EXPECT_LT(t, r);
    last = r;
  }
}

TEST(StrategicContext, OpenStepIsNotRendered) {
  StrategicContext c("Q", "PRE");
  c.append_plan_step("pending");
  EXPECT_EQ(render_planner_prompt(c).find("pending"), std::string::npos);
}

TEST(StrategicContext, CallOrderStateMachine) {
  StrategicContext c("Q", "PRE", 2);
  EXPECT_THROW(c.close_plan_step("x"), ProtocolViolation);
  c.append_plan_step("find X");
  EXPECT_THROW(c.append_plan_step("again"), ProtocolViolation);
  c.close_plan_step("X is 5");
  EXPECT_EQ(c.closed_steps(), 1u);
  EXPECT_THROW(c.close_plan_step("twice"), ProtocolViolation);
  EXPECT_THROW(c.append_plan_step("   "), ProtocolViolation);
  c.append_plan_step("second");
  c.close_plan_step("y");
  EXPECT_THROW(c.append_plan_step("third"), ProtocolViolation);
}

TEST(StrategicContext, PromptLengthIsLinearInSteps) {
  const WhitespaceTokenizer w;
  const std::string pre = "You plan.";
  const std::string q = "a question of six words";
  const std::size_t overhead = token_count(render_plan_step(PlanStep{"", ""}));
  EXPECT_EQ(overhead, 4u);
  StrategicContext c(q, pre, 16);
  for (int h = 0; h <= 12; ++h) {
    const std::size_t expected =
        w.count(pre) + 1 + w.count(q) + h * (7 + 11 + overhead);
    EXPECT_EQ(token_count(render_planner_prompt(c)), expected) << h;
    if (h == 12) break;
    c.append_plan_step(words("t", 7));
    c.close_plan_step(words("r", 11));
  }
}

TEST(ExecutionContext, FreshRendersPreambleAndTask) {
  ExecutionContext c("find X", "EXE");
  EXPECT_EQ(render_executor_prompt(c), "EXE\n<task> find X </task>");
}

TEST(ExecutionContext, EndsWithDocumentsBlockAfterSearch) {
  ExecutionContext c("Where do Greyhound buses leave from Toronto, Ontario?",
                     "EXE");
  c.add_agent_turn(
      "<think> I need to find out where Greyhound buses leave from Toronto, "
      "Ontario. </think>\n<search> Greyhound buses leaving from Toronto, "
      "Ontario </search>");
  const std::string block =
      "<documents>[Doc 1: Greyhound Canada] buses</documents>";
  c.attach_documents(block);
  const std::string p = render_executor_prompt(c);
  EXPECT_NE(p.find("Greyhound buses leaving from Toronto, Ontario"),
            std::string::npos);
  ASSERT_GE(p.size(), block.size());
  EXPECT_EQ(p.substr(p.size() - block.size()), block);
}

TEST(ExecutionContext, AttachWithoutTurnThrows) {
  ExecutionContext c("t", "EXE");
  EXPECT_THROW(c.attach_documents("<documents></documents>"),
               ProtocolViolation);
}

TEST(TokenCount, Whitespace) {
  EXPECT_EQ(token_count(""), 0u);
  EXPECT_EQ(token_count("Toronto Coach Terminal"), 3u);
}

TEST(TokenBudgetReport, MergeTakesMaxima) {
  TokenBudgetReport a{10, 5, 0, {1, 2}};
  const TokenBudgetReport b{3, 9, 7, {1, 2, 3}};
  a.merge(b);
  EXPECT_EQ(a, (TokenBudgetReport{10, 9, 7, {1, 2, 3}}));
}

std::string chunk_of(int n, const std::string& stem) { return words(stem, n); }

TEST(Isolation, TaskResultPairsPass) {
  StrategicContext c("Q", "PRE");
  c.append_plan_step("What is the production company?");
  c.close_plan_step("Nelvana");
  const std::vector<std::string> docs = {
      "A Cosmic Christmas is one of the first productions made by Nelvana " +
      chunk_of(40, "w")};
  EXPECT_TRUE(isolation_check(c, docs).ok());
}

TEST(Isolation, InjectedChunkIsNamed) {
  const std::vector<std::string> docs = {chunk_of(200, "a"),
                                         chunk_of(200, "b")};
  StrategicContext c("Q", "PRE");
  c.append_plan_step("t");
  c.close_plan_step(docs[1]);
  const auto r = isolation_check(c, docs);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, IsolationViolation::Kind::RawExcerpt);
  EXPECT_EQ(r.violations[0].chunk_index, 1u);
  EXPECT_EQ(r.violations[0].chunk_token_offset, 0u);
}

TEST(Isolation, ThresholdBoundary) {
  const std::vector<std::string> docs = {chunk_of(100, "d")};
  auto excerpt = [&](int from, int n) {
    std::string s;
    for (int i = from; i < from + n; ++i) {
      if (i > from) s += ' ';
      s += "d" + std::to_string(i);
    }
    return s;
  };
  StrategicContext short_copy("Q", "PRE");
  short_copy.append_plan_step("t");
  short_copy.close_plan_step(excerpt(10, 29));
  EXPECT_TRUE(isolation_check(short_copy, docs).ok());

  StrategicContext long_copy("Q", "PRE");
  long_copy.append_plan_step("t");
  long_copy.close_plan_step(excerpt(10, 30));
  const auto r = isolation_check(long_copy, docs);
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].chunk_token_offset, 10u);
}

TEST(Isolation, DocumentsTagIsAViolation) {
  const auto r = isolation_check_prompt("PRE\nQuestion: Q\n<documents>x", {});
  ASSERT_EQ(r.violations.size(), 1u);
  EXPECT_EQ(r.violations[0].kind, IsolationViolation::Kind::DocumentsTag);
}

TEST(Isolation, ExcerptGluedToTagsIsFound) {
  const std::vector<std::string> docs = {chunk_of(40, "g")};
  const std::string prompt = "PRE\n<result>" + docs[0] + "</result>";
  EXPECT_FALSE(isolation_check_prompt(prompt, docs).ok());
}

}  // namespace
}  // namespace hieragent
