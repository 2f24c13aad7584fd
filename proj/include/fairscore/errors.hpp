#pragma once

#include <stdexcept>
#include <string>

namespace fairscore {

// Typed errors so callers (and the bench harness) can record failure
// categories per cell instead of aborting a run.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define FAIRSCORE_ERROR(Name)                                   \
  struct Name : Error {                                         \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

FAIRSCORE_ERROR(MissingColumn);
FAIRSCORE_ERROR(InvalidTarget);
FAIRSCORE_ERROR(InvalidAge);
FAIRSCORE_ERROR(EmptyFile);
FAIRSCORE_ERROR(DegenerateStratum);
FAIRSCORE_ERROR(TooManyFolds);
FAIRSCORE_ERROR(EmptyGroup);
FAIRSCORE_ERROR(EmptyGroupClass);
FAIRSCORE_ERROR(NoAccepted);
FAIRSCORE_ERROR(OneClassOnly);
FAIRSCORE_ERROR(NonFiniteLoss);
FAIRSCORE_ERROR(DimensionMismatch);
FAIRSCORE_ERROR(EmptyCell);
FAIRSCORE_ERROR(GroupTooSmall);
FAIRSCORE_ERROR(DegenerateFM);
FAIRSCORE_ERROR(EmptyValidation);
FAIRSCORE_ERROR(InfeasibleTarget);
FAIRSCORE_ERROR(UnknownGroup);
FAIRSCORE_ERROR(MissingBaseline);
FAIRSCORE_ERROR(TooFewRecords);
FAIRSCORE_ERROR(ConfigError);
FAIRSCORE_ERROR(IoError);

#undef FAIRSCORE_ERROR

}  // namespace fairscore
