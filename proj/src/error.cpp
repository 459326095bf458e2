#include "wmc/error.hpp"

namespace wmc {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::Singularity: return "Singularity";
    case ErrorKind::NonPositiveMean: return "NonPositiveMean";
    case ErrorKind::InsufficientPoints: return "InsufficientPoints";
    case ErrorKind::SingularDesign: return "SingularDesign";
    case ErrorKind::IllConditioned: return "IllConditioned";
    case ErrorKind::NoStableWindow: return "NoStableWindow";
    case ErrorKind::SignMixture: return "SignMixture";
    case ErrorKind::SingularPotentialOnGrid: return "SingularPotentialOnGrid";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::PolesOnRange: return "PolesOnRange";
    case ErrorKind::DegenerateNodes: return "DegenerateNodes";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

NoConvergenceError::NoConvergenceError(const std::string& message, double estimate, double residual,
                                       int iterations)
    : Error(ErrorKind::NoConvergence, message),
      estimate_(estimate),
      residual_(residual),
      iterations_(iterations) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

}  // namespace wmc
