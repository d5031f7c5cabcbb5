#pragma once

#include <stdexcept>
#include <string>

namespace ic {

/// Marker detection produced the wrong number of blobs.
class DetectionFailure : public std::runtime_error {
 public:
  DetectionFailure(int found, int expected)
      : std::runtime_error("marker detection found " + std::to_string(found) +
                           " blobs, expected " + std::to_string(expected)),
        found_(found),
        expected_(expected) {}
  int found() const { return found_; }
  int expected() const { return expected_; }

 private:
  int found_;
  int expected_;
};

/// Detected blobs could not be sorted into a grid (row bands overlap).
class GridLayoutError : public std::runtime_error {
 public:
  explicit GridLayoutError(const std::string& what) : std::runtime_error(what) {}
};

/// A mask-consuming operation required a non-empty contact region.
class NoContactError : public std::runtime_error {
 public:
  NoContactError() : std::runtime_error("contact mask empty after morphology") {}
};

/// Kabsch input has fewer than three correspondences.
class InsufficientPoints : public std::runtime_error {
 public:
  explicit InsufficientPoints(std::size_t n)
      : std::runtime_error("rotation solve needs >= 3 correspondences, got " + std::to_string(n)) {}
};

/// Kabsch cross-covariance is rank-deficient (collinear geometry).
class DegenerateGeometry : public std::runtime_error {
 public:
  DegenerateGeometry() : std::runtime_error("point sets are collinear or degenerate") {}
};

/// File/format level problems (CLI exit code 3).
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ic
