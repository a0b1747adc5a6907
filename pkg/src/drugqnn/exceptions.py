"""Exception types shared across the package."""


class DrugQnnError(Exception):
    """Base class for all package errors."""


class ConfigError(DrugQnnError):
    """Invalid configuration (out-of-range sizes, inconsistent hyperparameters)."""


class DataError(DrugQnnError):
    """Malformed or inconsistent input data; carries file/line context when known."""

    def __init__(self, message, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}"
            if line is not None:
                loc += f":{line}"
            loc = f" [{loc}]"
        super().__init__(message + loc)
        self.path = path
        self.line = line


class SmilesParseError(DrugQnnError):
    """SMILES string rejected; ``position`` is the byte offset of the problem."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class TrainingError(DrugQnnError):
    """Training aborted (e.g. non-finite loss); message names epoch and sample."""
