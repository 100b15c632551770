/*
 * Copyright 2026 The playgraph Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace playgraph {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A documented precondition was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Input data failed to parse or validate. Carries the record index (0-based,
/// or npos when not tied to a record) and the offending field name.
class DataError : public Error {
 public:
  static constexpr std::size_t npos = static_cast<std::size_t>(-1);

  DataError(const std::string& message, std::size_t record = npos,
            std::string field = {})
      : Error(format(message, record, field)),
        record_(record),
        field_(std::move(field)) {}

  /// Same record and field, with `prefix` prepended to the message.
  DataError with_prefix(const std::string& prefix) const {
    return DataError(Raw{}, prefix + what(), record_, field_);
  }

  std::size_t record() const noexcept { return record_; }
  const std::string& field() const noexcept { return field_; }

 protected:
  struct Raw {};
  DataError(Raw, const std::string& full, std::size_t record, std::string field)
      : Error(full), record_(record), field_(std::move(field)) {}

 private:

  static std::string format(const std::string& message, std::size_t record,
                            const std::string& field) {
    std::string out;
    if (record != npos) out += "record " + std::to_string(record) + ": ";
    if (!field.empty()) out += "field '" + field + "': ";
    return out + message;
  }

  std::size_t record_;
  std::string field_;
};

/// A well-formed state or edit breaks a per-sport rule (player counts,
/// ball-carrier, hp of dead players, unknown player ids, ...).
class ValidationError : public DataError {
 public:
  using DataError::DataError;

  ValidationError with_prefix(const std::string& prefix) const {
    return ValidationError(Raw{}, prefix + what(), record(), field());
  }

 private:
  ValidationError(Raw r, const std::string& full, std::size_t record, std::string field)
      : DataError(r, full, record, std::move(field)) {}
};

/// Feature schemas or task of a checkpoint disagree with the input.
class SchemaMismatch : public Error {
 public:
  using Error::Error;
};

/// Checkpoint container is malformed, truncated, or of another version.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given input (e.g. AUC on one class).
class UndefinedMetric : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace playgraph
