#pragma once

#include <stdexcept>
#include <string>

namespace fedmesh {

// Error taxonomy shared by every module. Callers that need to map failures to
// exit codes catch the specific subclasses.

struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct AlreadyMember : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotAMember : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IdCollision : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoRoute : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidSource : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BufferOverflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Broken protocol invariant (exactly-once, node exclusivity, constraint
/// safety). Reaching one of these is a bug, not a user error.
struct ConsistencyError : std::logic_error {
    using std::logic_error::logic_error;
};

struct NotReady : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace fedmesh
