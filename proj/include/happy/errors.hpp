#pragma once
// Error taxonomy. The CLI maps these to exit codes: validation_error -> 2,
// resource_error -> 3, certification_error -> 4, anything else -> 1.

#include <stdexcept>
#include <string>

namespace happy {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: malformed digit images, out-of-range arguments, unusable
// selectors, unwritable destinations.
struct validation_error : error {
    using error::error;
};

// Digit image validation failures, kept as distinct types so callers can
// report exactly which rule was broken.
struct invalid_length_error : validation_error {
    using validation_error::validation_error;
};
struct violated_anchor_error : validation_error {
    using validation_error::validation_error;
};
struct negative_entry_error : validation_error {
    using validation_error::validation_error;
};

// Index past the end of a type table, or a row the distribution does not hold.
struct out_of_range_error : validation_error {
    using validation_error::validation_error;
};

// Operation asked of the wrong numeric mode (e.g. exact moments of an
// interval-mode distribution).
struct mode_error : validation_error {
    using validation_error::validation_error;
};

// Estimated memory or step budget exceeded.
struct resource_error : error {
    using error::error;
};

// A certificate precondition failed (n not a multiple of 4, bound (B) does not
// hold, a containment check failed). Nothing is emitted in that case.
struct certification_error : error {
    using error::error;
};

// Postcondition or arithmetic invariant broken; indicates a bug, not bad input.
struct internal_error : error {
    using error::error;
};

} // namespace happy
