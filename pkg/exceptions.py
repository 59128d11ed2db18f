"""Exceptions raised by wtsel.

Validation problems (bad input, bad parameters) exit the CLI with status 1;
anything that goes wrong while a pipeline stage runs exits with status 2.
"""


class WtselError(Exception):
    """Base class for every error raised by wtsel."""

    exit_code = 2


class ValidationError(WtselError, ValueError):
    """Input or parameter outside its documented domain."""

    exit_code = 1


class DomainError(ValidationError):
    """Weather-type index or code that does not exist."""


class NoInWindowDataError(ValidationError):
    """A season window left no days to work with."""


class StencilOutOfBoundsError(ValidationError):
    """A cross-stencil point is not on the pressure grid."""

    def __init__(self, missing, center, date=None):
        self.missing = missing
        self.center = center
        self.date = date

        where = f"center {center}"
        if date is not None:
            where += f" on {date}"

        super().__init__(
            f"stencil out of bounds: point {missing} missing for {where}")


class EmptySubsetError(ValidationError):
    """A subset strategy selected no weather types."""


class RoiMismatchError(ValidationError):
    """Two fields that should share a region of interest do not."""

    def __init__(self, only_left, only_right):
        self.only_left = list(only_left)
        self.only_right = list(only_right)

        super().__init__(
            "region of interest mismatch: "
            f"only in first {self.only_left}, only in second {self.only_right}")


class FileFormatError(ValidationError):
    """A CSV file that does not follow its documented layout."""

    def __init__(self, path, message, line=None):
        self.path = path
        self.line = line

        location = f"{path}:{line}" if line is not None else f"{path}"
        super().__init__(f"{location}: {message}")


class PipelineError(WtselError):
    """One or more pipeline stages failed.

    `failures` holds (stage, trajectory_id, message) triples.
    """

    exit_code = 2

    def __init__(self, failures):
        self.failures = list(failures)

        lines = [
            f"[{stage}] {trajectory_id or '-'}: {message}"
            for stage, trajectory_id, message in self.failures
        ]
        super().__init__("pipeline failed:\n" + "\n".join(lines))
