#pragma once

#include <stdexcept>
#include <string>

namespace holdswitch {

// Base of every exception the library throws.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DataError : public Error {
public:
    using Error::Error;
};

class EnvError : public Error {
public:
    using Error::Error;
};

class AgentError : public Error {
public:
    using Error::Error;
};

class ClassifierError : public Error {
public:
    using Error::Error;
};

class EnsembleError : public Error {
public:
    using Error::Error;
};

class MetricError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace holdswitch
