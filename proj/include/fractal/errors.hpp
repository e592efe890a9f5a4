#pragma once

#include <stdexcept>
#include <string>

namespace fractal {

struct Error : std::runtime_error {
  Error(std::string n, const std::string& what) : std::runtime_error(n + ": " + what), name(std::move(n)) {}
  std::string name;
};

#define FRACTAL_ERROR(Name)                                             \
  struct Name : Error {                                                 \
    explicit Name(const std::string& what = "") : Error(#Name, what) {} \
  }

FRACTAL_ERROR(NonIncreasingScales);
FRACTAL_ERROR(ScaleTooSmall);
FRACTAL_ERROR(DigitOutOfRange);
FRACTAL_ERROR(MissingChildren);
FRACTAL_ERROR(DepthExceedsScales);
FRACTAL_ERROR(MixedDepths);
FRACTAL_ERROR(NotDyadic);
FRACTAL_ERROR(BelowMinimumScale);
FRACTAL_ERROR(DegenerateAlpha);
FRACTAL_ERROR(ModulusNotDivisible);
FRACTAL_ERROR(PreconditionViolated);
FRACTAL_ERROR(InfeasibleMarginals);
FRACTAL_ERROR(NotAPartition);
FRACTAL_ERROR(LevelMismatch);
FRACTAL_ERROR(NonLatticeDelta);
FRACTAL_ERROR(EmptyGrid);
FRACTAL_ERROR(LambdaTooLarge);
FRACTAL_ERROR(InvalidS);
FRACTAL_ERROR(DegenerateParameters);
FRACTAL_ERROR(DivisibilityViolated);
FRACTAL_ERROR(SubtreeNotSparse);
FRACTAL_ERROR(ScaleAlignment);
FRACTAL_ERROR(EmptySchedule);
FRACTAL_ERROR(PointOffSupport);
FRACTAL_ERROR(EmptyBohrSet);
FRACTAL_ERROR(MissingTestData);
FRACTAL_ERROR(ParseError);
FRACTAL_ERROR(ValidationError);

#undef FRACTAL_ERROR

}  // namespace fractal
