#pragma once

#include <stdexcept>
#include <string>

namespace sovkit {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}
    const std::string& kind() const { return kind_; }

private:
    std::string kind_;
};

#define SOVKIT_ERROR(Name)                                                   \
    struct Name : Error {                                                    \
        explicit Name(const std::string& w = "") : Error(#Name, w) {}       \
    };

SOVKIT_ERROR(NonIntegerDifference)
SOVKIT_ERROR(OriginSingularity)
SOVKIT_ERROR(PreconditionError)
SOVKIT_ERROR(NotConverged)
SOVKIT_ERROR(NotAChain)
SOVKIT_ERROR(DegenerateChain)
SOVKIT_ERROR(UniquenessViolated)
SOVKIT_ERROR(NoPlaneWave)
SOVKIT_ERROR(IndexSumMismatch)
SOVKIT_ERROR(StuckDiagram)
SOVKIT_ERROR(PoleEncountered)
SOVKIT_ERROR(ConvergenceDomainViolated)
SOVKIT_ERROR(BranchCutHit)
SOVKIT_ERROR(PoleOnContour)
SOVKIT_ERROR(TooShort)
SOVKIT_ERROR(ConfigError)
SOVKIT_ERROR(IoError)

#undef SOVKIT_ERROR

}  // namespace sovkit
