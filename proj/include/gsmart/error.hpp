#pragma once

#include <stdexcept>
#include <string>

namespace gsmart {

// Exit-code families used by the CLI: 2 config, 3 data, 4 numeric.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Parse failures carry the byte offset or line number in the message.
class ParseError : public DataError {
public:
    explicit ParseError(const std::string& msg) : DataError(msg) {}
};

class DegeneracyError : public std::runtime_error {
public:
    DegeneracyError(const std::string& msg, int affine_rank)
        : std::runtime_error(msg), rank(affine_rank) {}
    int rank;
};

} // namespace gsmart
