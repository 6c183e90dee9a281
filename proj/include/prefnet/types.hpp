#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace prefnet {

using UserId = std::int32_t;
using ItemId = std::int32_t;

/// One observed rating: user `user` gave item `item` the integer value
/// `value` on a 1..S scale.
struct Rating {
    UserId user = 0;
    ItemId item = 0;
    int value = 0;

    friend bool operator==(const Rating&, const Rating&) = default;
};

enum class EdgeKind { ItemItem, UserUser };

/// Thrown on malformed input files; carries the offending line number.
struct ParseError : std::exception {
    std::string message;
    explicit ParseError(std::string msg) : message(std::move(msg)) {}
    const char* what() const noexcept override { return message.c_str(); }
};

/// Thrown when parsed data violates a domain constraint (rating out of
/// scale, unknown occupation name, ...).
struct ValidationError : std::exception {
    std::string message;
    explicit ValidationError(std::string msg) : message(std::move(msg)) {}
    const char* what() const noexcept override { return message.c_str(); }
};

}  // namespace prefnet
