#pragma once

#include <stdexcept>
#include <string>

namespace sofickit {

// Base for all domain errors. `code()` is the stable machine-readable name
// surfaced in CLI reports; `what()` carries the human-readable detail.
class Error : public std::runtime_error {
public:
  Error(std::string code, const std::string& msg)
      : std::runtime_error(code + ": " + msg), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

private:
  std::string code_;
};

#define SOFICKIT_ERROR(Name)                            \
  class Name : public Error {                           \
  public:                                               \
    explicit Name(const std::string& msg = "")          \
        : Error(#Name, msg) {}                          \
  }

SOFICKIT_ERROR(SizeMismatch);
SOFICKIT_ERROR(IndexOutOfRange);
SOFICKIT_ERROR(JoinConflict);
SOFICKIT_ERROR(NotInjective);
SOFICKIT_ERROR(NotPartition);
SOFICKIT_ERROR(NotInvariant);
SOFICKIT_ERROR(SpaceMismatch);
SOFICKIT_ERROR(RelationMismatch);
SOFICKIT_ERROR(NotPermutation);
SOFICKIT_ERROR(NotClassRespecting);
SOFICKIT_ERROR(NestingViolated);
SOFICKIT_ERROR(NullRestriction);
SOFICKIT_ERROR(Inadmissible);
SOFICKIT_ERROR(MissingImage);
SOFICKIT_ERROR(CarrierMismatch);
SOFICKIT_ERROR(NotRelated);
SOFICKIT_ERROR(NotCovered);
SOFICKIT_ERROR(UnequalSubclasses);
SOFICKIT_ERROR(NotRectangleForm);
SOFICKIT_ERROR(NoSupportWitness);
SOFICKIT_ERROR(BudgetExceeded);
SOFICKIT_ERROR(Overflow);
SOFICKIT_ERROR(ParseError);

#undef SOFICKIT_ERROR

}  // namespace sofickit
