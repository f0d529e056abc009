"""Exception hierarchy shared by the library and the command-line front end."""


class PbecError(Exception):
    """Base class for all package errors."""


class ConfigError(PbecError):
    """Invalid configuration, file schema, or physical-parameter violation."""


class DomainError(PbecError):
    """Arguments outside the mathematical domain of an operation."""


class SolverError(PbecError):
    """A numerical solver failed to converge; message carries diagnostics."""


class StiffnessError(SolverError):
    """Explicit integration step size underflowed; use the steady-state path."""


class CoverageError(PbecError):
    """Spatial grid does not cover enough of the mode or pump intensity."""


class FitError(PbecError):
    """A least-squares fit could not produce a usable result."""
