"""Exception types shared across lifeguard."""

from __future__ import annotations


class LifeguardError(Exception):
    pass


class ModelError(LifeguardError):
    """Base class for problems with an app-model document."""


class ModelSyntaxError(ModelError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class ModelSchemaError(ModelError):
    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class ModelReferenceError(ModelError):
    def __init__(self, message: str, ref: str):
        super().__init__(message)
        self.ref = ref


class NoResumedActivity(LifeguardError):
    pass


class InvalidEvent(LifeguardError):
    """An event whose preconditions do not hold in the current engine state."""


class ReplayDivergence(LifeguardError):
    def __init__(self, step: int, reason: str):
        super().__init__(f"replay diverged at event {step}: {reason}")
        self.step = step
        self.reason = reason


class PlanMismatch(LifeguardError):
    pass
