#pragma once

#include <stdexcept>
#include <string>

namespace nlkg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

/// Modulation could not place the state inside the tube around the soliton family.
class OutOfTube : public Error {
 public:
  using Error::Error;
};

class IllConditioned : public Error {
 public:
  using Error::Error;
};

class StiffnessError : public Error {
 public:
  using Error::Error;
};

class BracketingError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

/// Raised by the time stepper when the field stops being finite (or exceeds the cap).
class BlowUp : public Error {
 public:
  explicit BlowUp(double last_finite_time)
      : Error("blow-up detected after t = " + std::to_string(last_finite_time)),
        last_finite_time_(last_finite_time) {}

  double last_finite_time() const noexcept { return last_finite_time_; }

 private:
  double last_finite_time_;
};

}  // namespace nlkg
