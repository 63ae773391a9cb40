"""Exception hierarchy shared by every workbench stage.

Library code raises these; only the command-line shell turns them into
process exit codes.
"""


class DotError(Exception):
    """Base class for all workbench errors"""

    exit_code: int = 1

    def __init__(self, message: str, **context):
        super().__init__(message)
        self.message = message
        self.context = context

    def __str__(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in sorted(self.context.items()))
        return f"{self.message} ({details})"


class ConfigError(DotError):
    """Invalid or unknown configuration"""

    exit_code = 2


class InvalidParameterError(ConfigError):
    """A call received an argument outside its documented range"""


class ShapeMismatchError(ConfigError):
    """Arrays, grids or layers with incompatible shapes"""


class DataIOError(DotError):
    """Missing, unreadable or malformed files"""

    exit_code = 3


class TrainingDivergedError(DotError):
    """A training loss became NaN or infinite"""

    exit_code = 4


class GeometryError(DotError):
    """Invalid domain, mesh or probe configuration"""


class SolverError(DotError):
    """A linear or iterative solver failed to produce an acceptable answer"""


class ArchitectureError(DotError):
    """A network does not match its declared structure"""


class AutodiffError(DotError):
    """Misuse of the autodiff graph (e.g. backward without a forward pass)"""
