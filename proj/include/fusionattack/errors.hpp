#pragma once

#include <stdexcept>
#include <string>

namespace fusion {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precondition violated by the caller (bad operator argument, bad config).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised when a scoring call would exceed the query budget. The ledger is
// left untouched; callers treat this as a graceful stop signal.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

// Network-level failure talking to a remote oracle (after retries).
class TransportError : public Error {
 public:
  using Error::Error;
};

// The remote oracle answered, but the answer violates the wire protocol.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace fusion
