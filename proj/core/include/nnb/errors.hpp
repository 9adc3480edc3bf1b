#pragma once

#include <stdexcept>
#include <string>

namespace nnb {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define NNB_DEFINE_ERROR(Name)                                              \
  class Name : public Error {                                               \
   public:                                                                  \
    explicit Name(const std::string& what) : Error(#Name ": " + what) {}    \
  }

/// norm() of an all-zero or negative vector.
NNB_DEFINE_ERROR(DegenerateDistribution);
/// Non-finite values, out-of-range settings, violated preconditions.
NNB_DEFINE_ERROR(InvalidInput);
/// Dimension or length mismatch between collaborating objects.
NNB_DEFINE_ERROR(ShapeError);
NNB_DEFINE_ERROR(EmptyData);
NNB_DEFINE_ERROR(EmptyClass);
NNB_DEFINE_ERROR(UnknownSymbol);
/// A zero probability where a logarithm or ratio of it is required.
NNB_DEFINE_ERROR(StrictPositivityViolation);
/// Sequence shorter than the order of a tabular classifier.
NNB_DEFINE_ERROR(SequenceTooShort);
/// Malformed input file; the message carries the line or record number.
NNB_DEFINE_ERROR(FormatError);

#undef NNB_DEFINE_ERROR

}  // namespace nnb
