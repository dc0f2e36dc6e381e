#pragma once

#include <stdexcept>
#include <string>

namespace sf {

// Base for everything thrown by the library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define SF_DEFINE_ERROR(Name)                                                 \
    struct Name : Error {                                                     \
        explicit Name(const std::string& msg) : Error(msg) {}                 \
    }

// symbolic core
SF_DEFINE_ERROR(ZeroDivisionError);
SF_DEFINE_ERROR(NotAffineError);
SF_DEFINE_ERROR(SingularCoefficientError);
SF_DEFINE_ERROR(RationalOverflowError);

// grid data
SF_DEFINE_ERROR(DuplicateNameError);
SF_DEFINE_ERROR(InvalidShapeError);
SF_DEFINE_ERROR(InvalidOrderError);
SF_DEFINE_ERROR(UnknownSymbolError);

// finite differences
SF_DEFINE_ERROR(InsufficientPointsError);
SF_DEFINE_ERROR(DuplicateOffsetsError);
SF_DEFINE_ERROR(BadDimensionError);
SF_DEFINE_ERROR(MissingTimeDimensionError);

// lowering
SF_DEFINE_ERROR(NonIntegerOffsetError);
SF_DEFINE_ERROR(EmptyIterationSpaceError);
SF_DEFINE_ERROR(UnboundIndexError);
SF_DEFINE_ERROR(ShapeMismatchError);

// optimizer
SF_DEFINE_ERROR(UnresolvedSymbolError);
SF_DEFINE_ERROR(BadBlockSizeError);

// codegen / jit
SF_DEFINE_ERROR(UnloweredConstructError);
SF_DEFINE_ERROR(ToolchainNotFoundError);
SF_DEFINE_ERROR(CompileFailedError);
SF_DEFINE_ERROR(SymbolNotFoundError);
SF_DEFINE_ERROR(SignatureMismatchError);
SF_DEFINE_ERROR(KernelFailedError);

// sparse points / apps
SF_DEFINE_ERROR(OutOfDomainError);
SF_DEFINE_ERROR(CflViolationError);
SF_DEFINE_ERROR(IoError);

#undef SF_DEFINE_ERROR

} // namespace sf
