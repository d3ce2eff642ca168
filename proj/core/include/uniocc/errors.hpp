#pragma once

#include <stdexcept>
#include <string>

namespace uniocc {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LengthMismatch : Error { using Error::Error; };
struct NegativeOccupancy : Error { using Error::Error; };
struct MissingApc : Error { using Error::Error; };

struct SchemaError : Error { using Error::Error; };
struct ReferentialError : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };

struct NoCoveredCourses : Error { using Error::Error; };
struct TooFewPoints : Error { using Error::Error; };
struct SingularSystem : Error { using Error::Error; };

struct ZeroReference : Error { using Error::Error; };
struct TooFewLines : Error { using Error::Error; };
struct NotCoveredEnough : Error { using Error::Error; };

struct InvalidScenario : Error { using Error::Error; };

} // namespace uniocc
