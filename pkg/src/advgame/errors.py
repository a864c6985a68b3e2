"""Exception types shared across the package."""


class AdvgameError(Exception):
    """Base class for every error raised by this package."""


class ShapeMismatchError(AdvgameError, ValueError):
    """An array's shape is incompatible with the layer or operation it feeds."""


class TrainingDivergenceError(AdvgameError, RuntimeError):
    """Training loss or parameters became non-finite."""

    def __init__(self, message: str, epoch: int, batch: int):
        super().__init__(f"{message} (epoch {epoch}, batch {batch})")
        self.epoch = epoch
        self.batch = batch


class ModelFormatError(AdvgameError, ValueError):
    """A model file does not follow the documented binary layout."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class ModelVersionError(ModelFormatError):
    """A model file carries an unsupported version tag."""


class IdxFormatError(AdvgameError, ValueError):
    """An IDX file is malformed (bad magic, truncation, ...)."""

    def __init__(self, message: str, offset: int | None = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class DatasetError(AdvgameError, ValueError):
    """Dataset-level inconsistency, e.g. image/label count mismatch."""


class ScenarioError(AdvgameError, ValueError):
    """A game scenario cannot be set up as configured."""


class BudgetViolationError(AdvgameError, RuntimeError):
    """An attacker query left the perturbation budget while strict mode is on."""


class UndefinedSimilarityError(AdvgameError, ValueError):
    """Cosine similarity requested for a (near-)zero vector."""


class ConfigError(AdvgameError, ValueError):
    """A run-config document is missing, malformed, or self-inconsistent."""
