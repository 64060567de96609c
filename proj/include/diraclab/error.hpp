#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace diraclab {

// Library error with a stable machine-parsable code. The CLI prints
// "CODE: message" on one line and exits 2 for precondition failures.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

[[noreturn]] inline void fail(const std::string& code, const std::string& message) {
    throw Error(code, message);
}

inline void require(bool ok, const std::string& code, const std::string& message) {
    if (!ok) fail(code, message);
}

} // namespace diraclab
