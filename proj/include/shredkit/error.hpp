#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace shredkit {

enum class ErrorCode {
  MissingStart,
  UnknownString,
  EmptyTimeline,
  NoPitchedEvents,
  EmptyHistogram,
  BothEmpty,
  DegenerateInput,
  EmptyInput,
  EmptyCorpus,
  InvalidArtistName,
  MeasureOutOfRange,
  NoMeasureTokens,
  TooFewSongs,
  UnknownArtist,
  TooShort,
  SingleClass,
  EmptyAfterFiltering,
  EmptyConfiguration,
  BadModelFile,
};

std::string_view to_string(ErrorCode code);

// Domain failure raised by every shredkit operation. The code identifies
// which documented error condition was hit; what() carries the detail.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace shredkit
