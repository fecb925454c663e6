#ifndef PROMPTCD_ERRORS_H_
#define PROMPTCD_ERRORS_H_

#include <stdexcept>
#include <string>

namespace promptcd {

// Bad arguments, unreadable or inconsistent input files.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Segmentation backend failed to load or run.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Synthetic scene could not be generated (e.g. packing failed).
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace promptcd

#endif  // PROMPTCD_ERRORS_H_
