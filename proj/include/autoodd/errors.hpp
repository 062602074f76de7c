// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace autoodd {

/// Base class for every error raised by the audit engine.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or invalid configuration input (space files, oracle specs, CLI shorthands).
struct ConfigError : Error {
    using Error::Error;
};

/// A precondition or domain-invariant violation at an API boundary.
struct ValidationError : Error {
    using Error::Error;
};

/// Linear-algebra breakdown that survived jitter escalation.
struct NumericalError : Error {
    using Error::Error;
};

/// Model-under-test adapter failure (timeout, malformed response, dead process).
/// Aborts the audit; never silently mapped to a pass/fail outcome.
struct AdapterError : Error {
    using Error::Error;
};

/// Chat-completion transport failure after retries are exhausted.
struct TransportError : Error {
    using Error::Error;
};

/// Corrupt or truncated trace file.
struct TraceError : Error {
    using Error::Error;
};

} // namespace autoodd
