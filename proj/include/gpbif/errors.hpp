#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gpbif/oscillator_basis.hpp"

namespace gpbif {

// Newton iteration cap reached without meeting the residual tolerance.
class NonConvergence : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Condition estimate of the (bordered) Jacobian exceeded the configured limit.
class SingularJacobian : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// The bifurcating eigenvalue is not simple inside the multipole fixed-point space.
class ResonantCase : public std::runtime_error {
  public:
    ResonantCase(std::string const& what, std::vector<BasisIndex> clashes)
        : std::runtime_error(what), clashes_(std::move(clashes)) {}

    std::vector<BasisIndex> const& clashes() const noexcept { return clashes_; }

  private:
    std::vector<BasisIndex> clashes_;
};

class InsufficientRange : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class NotApplicable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class BoundaryMassTooLarge : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InstabilityDetected : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Malformed branch file or config text.
class FormatError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace gpbif
