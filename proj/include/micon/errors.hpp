#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace micon {

// Invalid configuration file / flags / unknown keys.  CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Non-finite loss, non-finite gradients, degenerate batches.  CLI exit code 3.
struct TrainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Missing or corrupt input artifact (checkpoint, table, split).  CLI exit code 4.
struct ArtifactError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Evaluation constraints unsatisfiable (e.g. NSS with one source).  CLI exit code 5.
struct EvalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace chem {

// SMILES rejection with byte offset of the offending token.
struct ParseError : std::runtime_error {
    size_t offset;
    ParseError(const std::string& msg, size_t off)
        : std::runtime_error(msg + " (at offset " + std::to_string(off) + ")"), offset(off) {}
};

}  // namespace chem
}  // namespace micon
