/*
    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        https://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.
*/

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mmcep {

enum class ErrorCode {
    // ontology
    DuplicateClass,
    UnknownParent,
    CycleDetected,
    UnknownClass,
    UnknownRule,
    DuplicateRelation,
    UnknownRelation,
    // graph
    AttributeDomainViolation,
    UnknownAttribute,
    BadGeometry,
    InvalidConfidence,
    OutOfOrderTimestamp,
    InvalidEdge,
    // spatial
    DegenerateGeometry,
    UnsupportedGeometryPair,
    UndefinedPredicate,
    // temporal
    ImproperInterval,
    UnboundVariable,
    TypeMismatch,
    // rules
    MissingTracks,
    EmptyState,
    // engine
    ValidationError,
    DuplicateQueryId,
    UnknownPublisher,
    // io / bench
    ParseError,
    OrderingViolation,
    InvalidSpec,
    RangeMismatch,
    IoError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::DuplicateClass: return "DuplicateClass";
        case ErrorCode::UnknownParent: return "UnknownParent";
        case ErrorCode::CycleDetected: return "CycleDetected";
        case ErrorCode::UnknownClass: return "UnknownClass";
        case ErrorCode::UnknownRule: return "UnknownRule";
        case ErrorCode::DuplicateRelation: return "DuplicateRelation";
        case ErrorCode::UnknownRelation: return "UnknownRelation";
        case ErrorCode::AttributeDomainViolation: return "AttributeDomainViolation";
        case ErrorCode::UnknownAttribute: return "UnknownAttribute";
        case ErrorCode::BadGeometry: return "BadGeometry";
        case ErrorCode::InvalidConfidence: return "InvalidConfidence";
        case ErrorCode::OutOfOrderTimestamp: return "OutOfOrderTimestamp";
        case ErrorCode::InvalidEdge: return "InvalidEdge";
        case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
        case ErrorCode::UnsupportedGeometryPair: return "UnsupportedGeometryPair";
        case ErrorCode::UndefinedPredicate: return "UndefinedPredicate";
        case ErrorCode::ImproperInterval: return "ImproperInterval";
        case ErrorCode::UnboundVariable: return "UnboundVariable";
        case ErrorCode::TypeMismatch: return "TypeMismatch";
        case ErrorCode::MissingTracks: return "MissingTracks";
        case ErrorCode::EmptyState: return "EmptyState";
        case ErrorCode::ValidationError: return "ValidationError";
        case ErrorCode::DuplicateQueryId: return "DuplicateQueryId";
        case ErrorCode::UnknownPublisher: return "UnknownPublisher";
        case ErrorCode::ParseError: return "ParseError";
        case ErrorCode::OrderingViolation: return "OrderingViolation";
        case ErrorCode::InvalidSpec: return "InvalidSpec";
        case ErrorCode::RangeMismatch: return "RangeMismatch";
        case ErrorCode::IoError: return "IoError";
    }
    return "Unknown";
}

/// Every failure raised by the library carries one of the codes above so
/// callers (and tests) can branch on the kind without parsing messages.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code), message_(what) {}

    ErrorCode code() const noexcept { return code_; }
    /// what() without the leading code.
    const std::string& message() const noexcept { return message_; }

private:
    ErrorCode code_;
    std::string message_;
};

/// Error tied to a position in a text input (config, schema, frame file).
class ParseError : public Error {
public:
    ParseError(ErrorCode code, std::size_t line, std::size_t column, const std::string& what)
        : Error(code, "line " + std::to_string(line) +
                          (column ? ", column " + std::to_string(column) : std::string{}) + ": " +
                          what),
          line_(line),
          column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace mmcep
