#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace celldiag {

/// Base class for all toolkit errors. Subclasses distinguish the failure
/// domain so callers (and the CLI exit-code mapping) can react per kind.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a documented invariant (bad counts, empty dataset, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A KPI could not be derived; carries the offending counter name.
class DerivationError : public Error {
public:
    explicit DerivationError(std::string counter)
        : Error("cannot derive KPI: counter '" + counter + "' is zero"),
          counter_(std::move(counter)) {}

    const std::string& counter() const { return counter_; }

private:
    std::string counter_;
};

/// Malformed text input (ARFF, CSV, rule file, model file).
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column = 0)
        : Error(format(message, line, column)), line_(line), column_(column) {}

    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    static std::string format(const std::string& message, std::size_t line, std::size_t column) {
        std::string out = "line " + std::to_string(line);
        if (column > 0) out += ", column " + std::to_string(column);
        out += ": " + message;
        return out;
    }

    std::size_t line_;
    std::size_t column_;
};

/// A diagnosis class has no cause group (only Unclassified).
class MappingError : public Error {
public:
    using Error::Error;
};

/// Rule evaluation failed; names the rule and the attribute involved.
class RuleError : public Error {
public:
    RuleError(std::string rule_id, std::string attribute)
        : Error("rule '" + rule_id + "': attribute '" + attribute + "' missing or not finite"),
          rule_id_(std::move(rule_id)), attribute_(std::move(attribute)) {}

    const std::string& rule_id() const { return rule_id_; }
    const std::string& attribute() const { return attribute_; }

private:
    std::string rule_id_;
    std::string attribute_;
};

/// Tree prediction could not route the record.
class PredictError : public Error {
public:
    using Error::Error;
};

/// Cluster assignment could not read the record's features.
class AssignError : public Error {
public:
    using Error::Error;
};

/// Wraps a module error with the pipeline stage it occurred in.
class PipelineError : public Error {
public:
    PipelineError(std::string stage, const std::string& cause)
        : Error("stage '" + stage + "': " + cause), stage_(std::move(stage)) {}

    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

} // namespace celldiag
