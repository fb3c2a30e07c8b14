#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace infodrift {

enum class ErrorCode {
    InvalidConfig,
    ZeroDiffusionTail,
    HorizonTooLate,
    EmptyMeasure,
    QuadratureDidNotConverge,
    OffLattice,
    DenominatorUnderflow,
    WrongModel,
    InadmissibleControl,
    InadmissiblePoint,
    NoAdmissibleRoot,
    MissingDrift,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace infodrift
