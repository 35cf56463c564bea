#pragma once

#include <stdexcept>
#include <string>

namespace qpkam {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define QPKAM_DEFINE_ERROR(Name)                      \
    struct Name : Error {                             \
        using Error::Error;                           \
    }

QPKAM_DEFINE_ERROR(InvalidAlgebraElement);
QPKAM_DEFINE_ERROR(LogBranchUndefined);
QPKAM_DEFINE_ERROR(BchDivergence);
QPKAM_DEFINE_ERROR(TagMismatch);
QPKAM_DEFINE_ERROR(NotDiophantine);
QPKAM_DEFINE_ERROR(UnverifiedRange);
QPKAM_DEFINE_ERROR(ClaimViolation);
QPKAM_DEFINE_ERROR(IftContractFailure);
QPKAM_DEFINE_ERROR(PreconditionFailed);
QPKAM_DEFINE_ERROR(DegenerateRho);
QPKAM_DEFINE_ERROR(CertificateViolation);
QPKAM_DEFINE_ERROR(DegenerateStrip);
QPKAM_DEFINE_ERROR(TooLarge);
QPKAM_DEFINE_ERROR(WindowMismatch);
QPKAM_DEFINE_ERROR(GridTooCoarse);
QPKAM_DEFINE_ERROR(SignalBelowNoise);
QPKAM_DEFINE_ERROR(HomotopyObstruction);
QPKAM_DEFINE_ERROR(NumericOverflow);
QPKAM_DEFINE_ERROR(ParseError);

#undef QPKAM_DEFINE_ERROR

}  // namespace qpkam
