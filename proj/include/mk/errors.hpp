#pragma once

#include <stdexcept>
#include <string>
#include <utility>

// Error taxonomy. Every throwing precondition in the library maps to one of
// these types; the CLI turns them into exit code 2 (bad input) except
// NonconvergentSeries, which signals a failed computation and exits 1.

namespace mk {

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& msg)
        : std::runtime_error(kind + ": " + msg), kind_(std::move(kind)) {}

    [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

#define MK_DEFINE_ERROR(NAME)                                                \
    struct NAME : Error {                                                    \
        explicit NAME(const std::string& msg) : Error(#NAME, msg) {}         \
    }

MK_DEFINE_ERROR(ZeroWeightEntry);     // positive weight required, zero found
MK_DEFINE_ERROR(BadExponent);         // exponent outside its admissible range
MK_DEFINE_ERROR(ExponentOrder);       // a pair of exponents in the wrong order
MK_DEFINE_ERROR(LambdaOutOfRange);    // power-weight exponent outside (-1, p-1)
MK_DEFINE_ERROR(AlphaOutOfRange);     // interpolation/hypothesis alpha outside its interval
MK_DEFINE_ERROR(GammaOutOfRange);     // iteration exponent outside (0, 1]
MK_DEFINE_ERROR(LengthMismatch);      // sequences of different lengths combined
MK_DEFINE_ERROR(TooShort);            // sequence shorter than the operation needs
MK_DEFINE_ERROR(ZeroPrefixSum);       // a prefix sum that must be positive is zero
MK_DEFINE_ERROR(BudgetTooSmall);      // evaluation budget below the minimum
MK_DEFINE_ERROR(UnsupportedOperator); // operator not admissible for this routine
MK_DEFINE_ERROR(NonconvergentSeries); // iteration terms stopped decaying (K too small)
MK_DEFINE_ERROR(BadPhiDescriptor);    // malformed bound-function descriptor
MK_DEFINE_ERROR(BadForm);             // unknown inequality form tag
MK_DEFINE_ERROR(HypothesisViolation); // instance parameters outside the hypothesis set
MK_DEFINE_ERROR(EmptyCorpus);         // verification requires at least one sequence/weight
MK_DEFINE_ERROR(UnsupportedFormat);   // unknown report output format
MK_DEFINE_ERROR(UsageError);          // malformed input: flags, specs, files, values

#undef MK_DEFINE_ERROR

} // namespace mk
