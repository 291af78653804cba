"""Exception types shared across the package."""


class SemilassoError(Exception):
    """Base class for all semilasso errors."""


class DegenerateBandwidth(SemilassoError):
    """Every kernel weight in some row vanished (bandwidth too small)."""


class AllDegenerate(SemilassoError):
    """Every bandwidth in a cross-validation grid was degenerate."""


class CGStall(SemilassoError):
    """Conjugate gradient hit its iteration cap before the inexactness bound."""


class LineSearchFail(SemilassoError):
    """Armijo backtracking exceeded the trial cap (numerical breakdown)."""


class InfeasibleV(SemilassoError):
    """Dual box variable violates its radii beyond tolerance."""


class SingularGram(SemilassoError):
    """Gram matrix of the design is numerically singular."""


class ZeroCorrelation(SemilassoError):
    """Design-response correlation vector is identically zero."""


class NoConvergedFit(SemilassoError):
    """No point on the regularization path produced a converged solve."""


class FactorizationFail(SemilassoError):
    """Cholesky factorization broke down."""


class ZeroTruth(SemilassoError):
    """Relative error is undefined for an all-zero truth vector."""


class ParseError(SemilassoError):
    """Malformed record in an input file; carries the offending line number."""

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class SchemaError(SemilassoError):
    """Input file does not match the declared schema."""


class UsageError(SemilassoError):
    """Invalid command-line or config-file usage (exit code 2)."""
