#pragma once

#include <stdexcept>
#include <string>

namespace latscope {

// All recoverable failures are typed so callers (and the CLI) can map them
// to distinct exit codes instead of parsing message strings.

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Eigenvalue clusters too close to separate at working precision.
struct ConfluentSpectrum : Error {
  explicit ConfluentSpectrum(const std::string& msg) : Error(msg) {}
};

// Requested computation exceeds every available precision tier.
struct IllConditioned : Error {
  explicit IllConditioned(const std::string& msg) : Error(msg) {}
};

// Result would exceed a count cap or the representable range.
struct Overflow : Error {
  explicit Overflow(const std::string& msg) : Error(msg) {}
};

// Search radius does not reach past the shortest nonzero vector.
struct RhoTooSmall : Error {
  explicit RhoTooSmall(const std::string& msg) : Error(msg) {}
};

struct ThetaOutOfRange : Error {
  explicit ThetaOutOfRange(const std::string& msg) : Error(msg) {}
};

struct SearchBudgetExceeded : Error {
  explicit SearchBudgetExceeded(const std::string& msg) : Error(msg) {}
};

// Too few usable profile rows to issue a growth verdict.
struct WindowTooSmall : Error {
  explicit WindowTooSmall(const std::string& msg) : Error(msg) {}
};

struct EmptyBody : Error {
  explicit EmptyBody(const std::string& msg) : Error(msg) {}
};

struct EmptyBox : Error {
  explicit EmptyBox(const std::string& msg) : Error(msg) {}
};

struct NotExpanding : Error {
  explicit NotExpanding(const std::string& msg) : Error(msg) {}
};

struct NoExpansionOnF : Error {
  explicit NoExpansionOnF(const std::string& msg) : Error(msg) {}
};

}  // namespace latscope
