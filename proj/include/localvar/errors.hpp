#pragma once

#include <stdexcept>
#include <string>

namespace localvar {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class BadDimension : public Error {
public:
    using Error::Error;
};

class IntervalTooShort : public Error {
public:
    using Error::Error;
};

class SingularDesign : public Error {
public:
    using Error::Error;
};

class DegenerateCovariance : public Error {
public:
    using Error::Error;
};

class NonPositiveDefiniteSigma : public Error {
public:
    using Error::Error;
};

class UnstableParams : public Error {
public:
    using Error::Error;
};

class InsufficientHistory : public Error {
public:
    using Error::Error;
};

class MissingTrace : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

class EmptyPairSet : public Error {
public:
    using Error::Error;
};

class ZeroVarianceRow : public Error {
public:
    using Error::Error;
};

class NonConvergence : public Error {
public:
    using Error::Error;
};

class ZeroObservation : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class GapError : public Error {
public:
    using Error::Error;
};

class NonNumeric : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace localvar
