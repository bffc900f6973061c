"""Exception hierarchy. Each top-level class maps to one CLI exit code."""


class NhpdError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 1


class ConfigError(NhpdError):
    """Invalid or inconsistent run configuration."""

    exit_code = 2


class MeshError(NhpdError):
    """Mesh file or mesh content problem."""

    exit_code = 3


class MshParseError(MeshError):
    """Malformed mesh file; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class MeshIntegrityError(MeshError):
    """Element references a node that does not exist."""


class DegenerateElementError(MeshError):
    """Triangle with (numerically) zero area."""


class IsolatedNodeError(MeshError):
    """Node belongs to no triangle and would carry zero volume."""


class DuplicatePointError(MeshError):
    """Two material points coincide."""


class ModelError(NhpdError):
    """Model construction problem (horizons, bonds, material)."""

    exit_code = 4


class NoBondError(ModelError):
    """Neither endpoint horizon covers the pair distance."""


class DegenerateBondError(ModelError):
    """Bond with coincident endpoints."""


class SingularMaterialError(ModelError):
    """Elastic constants make a stiffness denominator vanish."""


class NegativeRotationalStiffnessError(ModelError):
    """Rotational spring factor would be negative for this Poisson ratio."""


class CorrectionError(NhpdError):
    """Domain energy correction failure."""

    exit_code = 5


class CorrectionSingularityError(CorrectionError):
    """A probe produced zero trial energy at a point that needs it."""


class CorrectionDivergenceError(CorrectionError):
    """The correction residual grew instead of shrinking."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class CorrectionNonConvergence(CorrectionError):
    """Iteration cap hit before the stop threshold."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class SolverError(NhpdError):
    """Quasi-static solve failure. May carry the partial run history."""

    exit_code = 6

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history


class SingularSystemError(SolverError):
    """Stiffness factorization failed (free-floating component)."""


class NonConvergenceError(SolverError):
    """Newton iteration or break-rerun cap exceeded."""


class OutputError(NhpdError):
    """Result file could not be written."""

    exit_code = 7
