"""Exception classes; each carries the CLI exit code of its failure class."""


class HybridReachError(Exception):
    exit_code = 1


class ContractError(HybridReachError, ValueError):
    """A documented precondition was violated."""

    exit_code = 5


class InadmissibleDecisionError(ContractError):
    pass


class CFLViolationError(HybridReachError):
    exit_code = 6


class SolverError(HybridReachError):
    exit_code = 6


class ConfigFileMissing(HybridReachError, FileNotFoundError):
    exit_code = 3


class ConfigSchemaError(HybridReachError, ValueError):
    exit_code = 4


class ConfigValueError(HybridReachError, ValueError):
    """Parameters parse but are physically invalid."""

    exit_code = 5


class VerificationFailed(HybridReachError):
    exit_code = 7
