#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace availbound {

// Every failure carries a stable machine-readable code ("ExponentTooSmall",
// "InvalidWindow", ...) next to the human-readable detail in what().
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& detail)
        : std::runtime_error(code + ": " + detail), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(std::string code, const std::string& detail) {
    throw Error(std::move(code), detail);
}

} // namespace availbound
