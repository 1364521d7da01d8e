#pragma once

#include <stdexcept>
#include <string>

namespace makeup {

/// Base of every error raised by the library.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two rasters/fields that must agree in size do not.
class dimension_error : public error {
 public:
  using error::error;
};

/// A parameter outside its documented range.
class range_error : public error {
 public:
  using error::error;
};

class io_error : public error {
 public:
  using error::error;
};

/// A file that exists but cannot be parsed.
class parse_error : public error {
 public:
  using error::error;
};

class landmark_count_error : public error {
 public:
  landmark_count_error(std::size_t found, std::size_t expected)
      : error("expected " + std::to_string(expected) + " landmarks, found " + std::to_string(found)),
        found_(found) {}
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t found_;
};

class landmark_bounds_error : public error {
 public:
  landmark_bounds_error(std::size_t index, double x, double y)
      : error("landmark " + std::to_string(index) + " at (" + std::to_string(x) + ", " +
              std::to_string(y) + ") lies outside the image"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

/// Coincident points or a zero-area triangle.
class degeneracy_error : public error {
 public:
  using error::error;
};

class label_value_error : public error {
 public:
  label_value_error(int value)
      : error("undefined label value " + std::to_string(value)), value_(value) {}
  int value() const noexcept { return value_; }

 private:
  int value_;
};

class convergence_error : public error {
 public:
  convergence_error(int iterations, double residual)
      : error("conjugate gradient did not converge after " + std::to_string(iterations) +
              " iterations (relative residual " + std::to_string(residual) + ")"),
        iterations_(iterations),
        residual_(residual) {}
  int iterations() const noexcept { return iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int iterations_;
  double residual_;
};

class config_error : public error {
 public:
  using error::error;
};

/// Wraps a failure with the pipeline stage that raised it.
class stage_error : public error {
 public:
  stage_error(std::string stage, const std::string& what)
      : error("[" + stage + "] " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace makeup
