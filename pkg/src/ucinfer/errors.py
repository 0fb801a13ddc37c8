"""Exception hierarchy shared across the toolkit."""


class UcError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(UcError):
    """Input arrays or vectors have inconsistent shapes."""


class InvalidFleet(UcError):
    """Fleet configuration violates a structural invariant."""


class Infeasible(UcError):
    """The optimization problem has no feasible point."""


class SolverTimeout(UcError):
    """A solve exceeded its time limit."""


class BackendError(UcError):
    """A solver backend failed (bad exit code, unparseable output, ...)."""


class TooManyBinaries(UcError):
    """Instance exceeds the embedded solver's binary-variable cap."""


class LpNumericalFailure(UcError):
    """The LP subroutine could not produce a reliable result."""


class NodeLimitExceeded(UcError):
    """Branch-and-bound exhausted its node budget."""


class NonFiniteInput(UcError):
    """A numeric input contains NaN or infinity."""


class NonFiniteGradient(UcError):
    """A gradient computation produced NaN or infinity."""


class NonFiniteLoss(UcError):
    """A training loss became NaN or infinite."""


class NonFiniteDensity(UcError):
    """A density evaluation produced NaN or infinity."""


class CorruptFile(UcError):
    """A file failed structural or checksum validation."""


class SchemaMismatch(UcError):
    """A file declares an unsupported schema version or wrong layout."""


class ConfigHashMismatch(UcError):
    """A dataset or checkpoint was produced under a different configuration."""


class RejectionRateTooHigh(UcError):
    """Too many posterior samples fall outside the prior support."""


class UsageError(UcError):
    """Bad command-line arguments or option combinations."""
