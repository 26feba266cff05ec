#pragma once

#include <stdexcept>
#include <string>

namespace bprel {

/// Base of every error raised by the protocol library. The CLI maps these
/// to exit code 1.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MalformedCbor : public Error {
public:
    using Error::Error;
};

class MalformedEid : public Error {
public:
    using Error::Error;
};

class MalformedBundle : public Error {
public:
    using Error::Error;
};

class CrcMismatch : public MalformedBundle {
public:
    using MalformedBundle::MalformedBundle;
};

class MalformedBlock : public Error {
public:
    using Error::Error;
};

class PrefixViolation : public Error {
public:
    using Error::Error;
};

class SequenceOverflow : public Error {
public:
    using Error::Error;
};

class MalformedSignal : public Error {
public:
    using Error::Error;
};

class DuplicateCteb : public Error {
public:
    using Error::Error;
};

class StoreFull : public Error {
public:
    using Error::Error;
};

class NoRoute : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

} // namespace bprel
