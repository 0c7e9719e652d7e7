#pragma once

#include <stdexcept>
#include <string>

namespace mhqa {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Structural problem in a corpus, template set, or other input artifact.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Bad run configuration (unknown key, out-of-range value, missing file).
class ConfigError : public Error {
public:
    using Error::Error;
};

// Endpoint request failed for good (after retries, or a non-retryable status).
class EndpointError : public Error {
public:
    EndpointError(const std::string& msg, int status = 0) : Error(msg), status_(status) {}
    int status() const { return status_; }

private:
    int status_ = 0;
};

// Retryable endpoint failure: timeout, connection error, HTTP 5xx/429.
class TransientEndpointError : public EndpointError {
public:
    using EndpointError::EndpointError;
};

// Endpoint replied but the payload could not be parsed.
class DecodeError : public Error {
public:
    using Error::Error;
};

// Endpoint does not support a required capability (e.g. forced-continuation scoring).
class CapabilityError : public Error {
public:
    using Error::Error;
};

}  // namespace mhqa
