// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>

namespace insopt {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// E[e^{gamma X}] does not exist, or a weighted tail cannot be certified.
struct DivergentMoment : Error {
    using Error::Error;
};

/// Adaptive quadrature exhausted its refinement budget before tolerance.
struct QuadratureBudgetExceeded : Error {
    using Error::Error;
};

/// m * g'(0+) <= 1, so the deductible level would be nonpositive.
struct DegeneratePremium : Error {
    using Error::Error;
};

/// Root bracketing failed; unreachable for admissible premium functions.
struct BracketFailure : Error {
    using Error::Error;
};

/// An indemnity violated 0 <= I(x) <= x beyond tolerance.
struct InadmissibleIndemnity : Error {
    using Error::Error;
};

/// A scalar equation has no root in the search bracket.
struct NoRoot : Error {
    using Error::Error;
};

/// An exhaustive search exceeded its combination budget.
struct BudgetExceeded : Error {
    using Error::Error;
};

/// A scenario configuration failed to parse or validate.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace insopt
