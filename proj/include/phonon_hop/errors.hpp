#pragma once

#include <stdexcept>
#include <string>

namespace phonon_hop {

/// Argument outside the domain of a physical formula (non-positive frequency, negative temperature, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Trap parameters that cannot describe a stable two-ion linear chain.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// 4 ω_r² = ω_s²: the 2:1 rocking/stretch resonance where the Kerr coefficient diverges.
class ResonanceError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Input that violates an operation's stated precondition (e.g. a crystal not at equilibrium).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A negative Hessian eigenvalue.
class InstabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace phonon_hop
