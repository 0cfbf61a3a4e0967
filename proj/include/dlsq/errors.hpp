#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dlsq {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Normal matrix not positive definite even after damping (rank-deficient x-values).
class DegenerateSystem : public Error {
public:
    using Error::Error;
};

class InvalidWeight : public Error {
public:
    using Error::Error;
};

class LengthMismatch : public Error {
public:
    using Error::Error;
};

class InvalidConfig : public Error {
public:
    using Error::Error;
};

/// A point whose homogeneous denominator vanishes under a homography.
class NearInfinityPoint : public Error {
public:
    NearInfinityPoint(std::size_t index, const std::string& what)
        : Error(what), index_(index) {}

    std::size_t index() const noexcept { return index_; }

private:
    std::size_t index_;
};

/// Loss or state became non-finite during iterative optimization.
class DivergedState : public Error {
public:
    using Error::Error;
};

}  // namespace dlsq
