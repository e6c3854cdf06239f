#pragma once

#include <stdexcept>
#include <string>

namespace virakdv {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct TypeShapeError : Error {
    explicit TypeShapeError(const std::string& msg) : Error("TypeShapeError: " + msg) {}
};

struct IncompatibleOperands : Error {
    explicit IncompatibleOperands(const std::string& msg) : Error("IncompatibleOperands: " + msg) {}
};

// Carries the label of the first violated constraint equation, e.g. "FyieldsH:2".
struct ConstraintViolation : Error {
    std::string label;
    explicit ConstraintViolation(const std::string& which)
        : Error("ConstraintViolation: " + which + " violated"), label(which) {}
};

struct SingularMatrix : Error {
    explicit SingularMatrix(const std::string& msg) : Error("SingularMatrix: " + msg) {}
};

struct WindowExhausted : Error {
    explicit WindowExhausted(const std::string& msg) : Error("WindowExhausted: " + msg) {}
};

struct DimensionMismatch : Error {
    explicit DimensionMismatch(const std::string& msg) : Error("DimensionMismatch: " + msg) {}
};

struct BadConstantTerm : Error {
    explicit BadConstantTerm(const std::string& msg) : Error("BadConstantTerm: " + msg) {}
};

struct EvenModeLeak : Error {
    explicit EvenModeLeak(const std::string& msg) : Error("EvenModeLeak: " + msg) {}
};

struct NonInvertibleDerivative : Error {
    explicit NonInvertibleDerivative(const std::string& msg) : Error("NonInvertibleDerivative: " + msg) {}
};

struct NoSolution : Error {
    explicit NoSolution(const std::string& msg) : Error("NoSolution: " + msg) {}
};

struct UnderdeterminedDegree : Error {
    explicit UnderdeterminedDegree(const std::string& msg) : Error("UnderdeterminedDegree: " + msg) {}
};

struct ZeroCoefficient : Error {
    explicit ZeroCoefficient(const std::string& msg) : Error("ZeroCoefficient: " + msg) {}
};

struct NonRationalScale : Error {
    explicit NonRationalScale(const std::string& msg) : Error("NonRationalScale: " + msg) {}
};

struct MissingScale : Error {
    explicit MissingScale(const std::string& msg) : Error("MissingScale: " + msg) {}
};

struct CutoffMismatch : Error {
    explicit CutoffMismatch(const std::string& msg) : Error("CutoffMismatch: " + msg) {}
};

struct BlockLeak : Error {
    explicit BlockLeak(const std::string& msg) : Error("BlockLeak: " + msg) {}
};

struct IrrationalEigenvalue : Error {
    explicit IrrationalEigenvalue(const std::string& msg) : Error("IrrationalEigenvalue: " + msg) {}
};

struct NotSimultaneouslyDiagonalizable : Error {
    explicit NotSimultaneouslyDiagonalizable(const std::string& msg)
        : Error("NotSimultaneouslyDiagonalizable: " + msg) {}
};

struct NonSquareHbar : Error {
    explicit NonSquareHbar(const std::string& msg) : Error("NonSquareHbar: " + msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("ConfigError: " + msg) {}
};

} // namespace virakdv
