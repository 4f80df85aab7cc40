#pragma once

#include <stdexcept>
#include <string>

namespace hiqa {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller passed a parameter outside its declared range.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// Input data (corpus, index files, question bank) is missing or malformed.
class DataError : public Error {
 public:
  using Error::Error;
};

}  // namespace hiqa
