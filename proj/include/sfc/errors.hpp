#pragma once

#include <stdexcept>
#include <string>

namespace sfc {

/// File or stream failure (unreadable file, malformed header, write error).
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The affinity graph carries no usable cut structure (e.g. constant image).
class DegenerateGraphError : public std::runtime_error {
public:
    explicit DegenerateGraphError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace sfc
