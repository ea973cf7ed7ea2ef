#pragma once

#include <stdexcept>
#include <string>

namespace oblab {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : Error {
    using Error::Error;
};
struct NotDivisible : Error {
    using Error::Error;
};
struct InvalidInput : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};
struct StructureMismatch : Error {
    using Error::Error;
};
struct RadiusOutOfRange : Error {
    using Error::Error;
};
struct BoxTooLarge : Error {
    using Error::Error;
};
struct NonConvergence : Error {
    double final_residual = 0.0;
    NonConvergence(const std::string& what, double res) : Error(what), final_residual(res) {}
};
struct MonotonicityViolation : Error {
    std::size_t worst_node = 0;
    double magnitude = 0.0;
    MonotonicityViolation(const std::string& what, std::size_t node, double mag)
        : Error(what), worst_node(node), magnitude(mag) {}
};
struct NotSingular : Error {
    using Error::Error;
};
struct ConfigInvalid : Error {
    using Error::Error;
};
struct ManifestMissing : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace oblab
