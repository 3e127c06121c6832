#include "gpae/error.hpp"

#include <utility>

namespace gpae {

std::string_view to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::invalid_input: return "invalid input";
        case ErrorKind::unsupported_rate: return "unsupported sample rate";
        case ErrorKind::invalid_config: return "invalid config";
        case ErrorKind::model_integrity: return "model integrity";
        case ErrorKind::numeric_failure: return "numeric failure";
        case ErrorKind::format: return "format";
        case ErrorKind::io: return "io";
        case ErrorKind::invalid_task: return "invalid task";
        case ErrorKind::configuration: return "configuration";
        case ErrorKind::structural: return "structural";
    }
    return "unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(message), kind_(kind) {}

FormatError::FormatError(std::size_t offset, const std::string& message)
    : Error(ErrorKind::format,
            message + " (at byte offset " + std::to_string(offset) + ")"),
      offset_(offset) {}

IntegrityError::IntegrityError(std::string tensor, const std::string& message)
    : Error(ErrorKind::model_integrity, "tensor '" + tensor + "': " + message),
      tensor_(std::move(tensor)) {}

}  // namespace gpae
