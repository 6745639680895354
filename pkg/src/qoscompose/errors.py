"""Exception types raised across the package."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any


class QosComposeError(Exception):
    """Base class for every error raised by qoscompose."""


@dataclass(frozen=True)
class Violation:
    """One failed problem invariant.

    ``kind`` is one of ``EmptyCandidates``, ``BadProbabilitySum``,
    ``WeightSumMismatch``, ``DanglingTaskIndex``, ``DuplicateTask``,
    ``MissingTask``, ``BadCandidateIndex``, ``BadTaskIndex``, ``BadLoopCount``,
    ``BadProbability``, ``EmptyComposite`` or ``BadWeight``.
    """

    kind: str
    field: str
    value: Any = None

    def __str__(self) -> str:
        if self.value is None:
            return f"{self.kind}({self.field})"
        return f"{self.kind}({self.field}: {self.value!r})"


class InvalidProblem(QosComposeError):
    def __init__(self, violations: list[Violation]):
        self.violations = list(violations)
        super().__init__("; ".join(str(v) for v in self.violations))

    @property
    def kinds(self) -> list[str]:
        return [v.kind for v in self.violations]


class InvalidGenome(QosComposeError):
    pass


class ConfigInvalid(QosComposeError):
    pass


class BadCutPoints(QosComposeError):
    pass


class InvalidReplacement(QosComposeError):
    pass


class TooLarge(QosComposeError):
    def __init__(self, total: int, cap: int):
        self.total = total
        self.cap = cap
        super().__init__(f"{total} combinations exceed the cap of {cap}")


class InvalidSpec(QosComposeError):
    pass


class InvalidShape(QosComposeError):
    pass


class InvalidWeights(QosComposeError):
    pass


class MissingColumn(QosComposeError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"missing column {name!r}")


class BadNumber(QosComposeError):
    def __init__(self, row: int, column, text: str = ""):
        self.row = row
        self.column = column
        self.text = text
        super().__init__(f"row {row}, column {column}: cannot parse {text!r} as a number")


class EmptyFile(QosComposeError):
    pass


class ParseError(QosComposeError):
    def __init__(self, position, message: str):
        self.position = position
        self.message = message
        super().__init__(f"at {position}: {message}")


class SchemaVersionMismatch(QosComposeError):
    def __init__(self, found, expected: str):
        self.found = found
        self.expected = expected
        super().__init__(f"schema {found!r} is not supported (expected {expected!r})")


class EmptyInput(QosComposeError):
    pass


class EmptyGroup(QosComposeError):
    def __init__(self, name):
        self.name = name
        super().__init__(f"group {name!r} has no records")


class ScenarioError(QosComposeError):
    """Failure inside one scenario cell, annotated with its coordinates."""

    def __init__(self, level: int, algorithm: str, seed: int, cause: Exception):
        self.level = level
        self.algorithm = algorithm
        self.seed = seed
        self.cause = cause
        super().__init__(f"level={level} algorithm={algorithm} seed={seed}: {cause}")
