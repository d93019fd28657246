#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace swcbc {

/// Base of every error raised by the library. `kind()` is a stable machine-readable tag
/// used by the CLI when it prints its error line.
class Error : public std::runtime_error
{
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind))
    {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define SWCBC_DEFINE_ERROR(Name)                                                   \
    class Name : public Error                                                      \
    {                                                                              \
    public:                                                                        \
        explicit Name(const std::string& what) : Error(#Name, what) {}             \
    };

SWCBC_DEFINE_ERROR(InvalidMesh)
SWCBC_DEFINE_ERROR(UnsupportedRule)
SWCBC_DEFINE_ERROR(SingularMatrix)
SWCBC_DEFINE_ERROR(MissingBoundaryValue)
SWCBC_DEFINE_ERROR(OutOfDomain)
SWCBC_DEFINE_ERROR(DryState)
SWCBC_DEFINE_ERROR(NonFinite)
SWCBC_DEFINE_ERROR(ConfigError)
SWCBC_DEFINE_ERROR(UnknownCase)
SWCBC_DEFINE_ERROR(ParseError)
SWCBC_DEFINE_ERROR(IoError)

#undef SWCBC_DEFINE_ERROR

/// Config value rejected by a precondition; `key()` names the offending key.
class ValidationError : public Error
{
public:
    ValidationError(std::string key, const std::string& what)
        : Error("ValidationError", key + ": " + what), key_(std::move(key))
    {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace swcbc
