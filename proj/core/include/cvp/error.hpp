#pragma once

#include <stdexcept>
#include <string>

namespace cvp {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Depth hypothesis at or behind the camera.
struct DegenerateDepth : Error {
  using Error::Error;
};

// Epipole proximity, pure rotation, or vanishing epipolar motion.
struct DegenerateGeometry : Error {
  using Error::Error;
};

// Pyramid level would fall below the minimum usable size.
struct TooSmall : Error {
  using Error::Error;
};

struct InvalidTemperature : Error {
  using Error::Error;
};

struct EmptyMask : Error {
  using Error::Error;
};

struct EmptyCloud : Error {
  using Error::Error;
};

struct NoIntersection : Error {
  using Error::Error;
};

struct ParseError : Error {
  using Error::Error;
};

struct NonFiniteValue : Error {
  using Error::Error;
};

struct NonOrthonormalRotation : Error {
  using Error::Error;
};

struct UnsupportedFormat : Error {
  using Error::Error;
};

}  // namespace cvp
