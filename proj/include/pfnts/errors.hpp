#pragma once

#include <stdexcept>
#include <string>

namespace pfnts {

// Base of every error raised by the library. Each subclass corresponds to one
// failure mode callers may want to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define PFNTS_DEFINE_ERROR(Name)          \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  }

PFNTS_DEFINE_ERROR(ArmIndexError);
PFNTS_DEFINE_ERROR(DistributionError);
PFNTS_DEFINE_ERROR(PrefixError);
PFNTS_DEFINE_ERROR(GridTooShort);
PFNTS_DEFINE_ERROR(ParamError);
PFNTS_DEFINE_ERROR(BridgeProtocolError);
PFNTS_DEFINE_ERROR(BridgeTimeout);
PFNTS_DEFINE_ERROR(SchemaError);
PFNTS_DEFINE_ERROR(HorizonExhausted);
PFNTS_DEFINE_ERROR(DegenerateWeights);
PFNTS_DEFINE_ERROR(EmptyLog);
PFNTS_DEFINE_ERROR(ClusterError);
PFNTS_DEFINE_ERROR(ConfigError);
PFNTS_DEFINE_ERROR(IncompleteResults);

#undef PFNTS_DEFINE_ERROR

// CSV cell that could not be parsed; carries 1-based row (excluding header)
// and the column name.
class ParseError : public Error {
 public:
  ParseError(std::size_t row, std::string column, const std::string& what)
      : Error("row " + std::to_string(row) + ", column '" + column + "': " + what),
        row_(row),
        column_(std::move(column)) {}

  std::size_t row() const noexcept { return row_; }
  const std::string& column() const noexcept { return column_; }

 private:
  std::size_t row_;
  std::string column_;
};

// Error response returned by a bridge server ({"ok": false, "code": ...}).
class BridgeRemoteError : public Error {
 public:
  BridgeRemoteError(std::string code, const std::string& message)
      : Error(code + ": " + message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace pfnts
