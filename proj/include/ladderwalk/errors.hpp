#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace ladderwalk {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A SiteLaw violating nonnegativity or normalization.
class InvalidLaw : public Error {
public:
    using Error::Error;
};

class NotAdmissible : public Error {
public:
    using Error::Error;
};

class DegenerateSystem : public Error {
public:
    using Error::Error;
};

class NotConverged : public Error {
public:
    NotConverged(const std::string& what, std::array<double, 2> previous,
                 std::array<double, 2> last, long long depth)
        : Error(what), previous(previous), last(last), depth(depth) {}
    std::array<double, 2> previous;  // (f1, f2) at depth / 2
    std::array<double, 2> last;      // (f1, f2) at depth
    long long depth;
};

class DriftNegative : public Error {
public:
    using Error::Error;
};

class SingularSystem : public Error {
public:
    using Error::Error;
};

class DegenerateDenominator : public Error {
public:
    using Error::Error;
};

class Diverging : public Error {
public:
    using Error::Error;
};

class MalformedPath : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace ladderwalk
