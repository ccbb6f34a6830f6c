#pragma once

#include <stdexcept>
#include <string>

namespace forge {

// Base of every error raised by the library. Callers that only need to
// report failures can catch this; the subclasses carry a machine-checkable
// kind where the caller is expected to branch on it.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class CatalogError : public Error {
public:
    enum class Kind { Parse, MissingFile, DuplicateId, Empty, InvalidParams, NoMatch };

    CatalogError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

// Raised when rejection sampling or a bounded retry loop gives up.
class ExhaustionError : public Error {
public:
    using Error::Error;
};

class EditError : public Error {
public:
    enum class Kind { MissingTarget, OffPlane, Overlap, SceneFull, UnknownCategory };

    EditError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
    Kind kind() const noexcept { return kind_; }

private:
    Kind kind_;
};

class VisibilityError : public Error {
public:
    using Error::Error;
};

class MetricError : public Error {
public:
    using Error::Error;
};

class SchemaError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace forge
