#pragma once

#include <stdexcept>
#include <string>

namespace spcvm {

// Error categories map onto the CLI exit codes: config -> 2, data -> 3,
// numeric (including calibration failures) -> 4.
enum class ErrorKind { config, data, numeric };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg)
        : std::runtime_error(msg), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

    int exit_code() const noexcept {
        switch (kind_) {
            case ErrorKind::config: return 2;
            case ErrorKind::data: return 3;
            case ErrorKind::numeric: return 4;
        }
        return 1;
    }

private:
    ErrorKind kind_;
};

} // namespace spcvm
