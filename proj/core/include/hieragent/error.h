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

#include <stdexcept>
#include <string>
#include <utility>

namespace hieragent {

// Base for every error this library raises. Callers that only need to report
// and exit can catch this; the CLI maps subclasses to distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Illegal call order on a context (e.g. closing a plan step that was never
// opened). Always indicates a bug in the caller, never bad model output.
class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

// A scripted policy was asked for a turn it has no entry for.
class ScriptedGapError : public Error {
 public:
  ScriptedGapError(std::string role, std::string digest, int ordinal)
      : Error("scripted policy has no entry for role=" + role +
              " prompt_digest=" + digest +
              " ordinal=" + std::to_string(ordinal)),
        role_(std::move(role)),
        digest_(std::move(digest)),
        ordinal_(ordinal) {}

  const std::string& role() const { return role_; }
  const std::string& digest() const { return digest_; }
  int ordinal() const { return ordinal_; }

 private:
  std::string role_;
  std::string digest_;
  int ordinal_;
};

class IngestError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Token, mask and log-probability arrays of a trajectory disagree in length.
class IntegrityError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

// A rollout for one question failed; wraps the underlying message.
class RolloutError : public Error {
 public:
  RolloutError(std::string question_id, const std::string& what)
      : Error("question " + question_id + ": " + what),
        question_id_(std::move(question_id)) {}

  const std::string& question_id() const { return question_id_; }

 private:
  std::string question_id_;
};

}  // namespace hieragent
