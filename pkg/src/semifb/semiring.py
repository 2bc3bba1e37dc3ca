"""Semiring algebra: the log-semifield, the tropical semiring and the probability semiring.

Each semiring is a stateless singleton (``LOG``, ``TROPICAL``, ``PROB``) that
operates on plain floats and float arrays. ``LogWeight``, ``TropicalWeight``
and ``ProbWeight`` wrap a single validated value and expose the algebra
through operators::

    a + b   ->  a ⊕ b
    a * b   ->  a ⊗ b
    a / b   ->  a ⊘ b

Log and tropical values are log-probabilities in nats, with ``-inf`` as the
zero element. Probability values are non-negative reals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar

import numpy as np

from .errors import InvalidWeightError, ZeroDivisionInSemiring

NEG_INF = float("-inf")


class Semiring:
    """Scalar and element-wise operations of one semiring over floats."""

    name: ClassVar[str]
    zero: ClassVar[float]
    one: ClassVar[float]

    def plus(self, a: float, b: float) -> float:
        raise NotImplementedError

    def times(self, a: float, b: float) -> float:
        raise NotImplementedError

    def divide(self, a: float, b: float) -> float:
        raise NotImplementedError

    def validate(self, x: float) -> float:
        raise NotImplementedError

    def validate_array(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def from_log_prob(self, p: float) -> float:
        raise NotImplementedError

    def to_log_prob(self, x: float) -> float:
        raise NotImplementedError

    def from_log_array(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_log_array(self, arr: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def times_array(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def is_zero(self, x: float) -> bool:
        return x == self.zero

    def sum(self, values) -> float:
        """⊕-fold in iteration order, starting from the zero element."""
        acc = self.zero
        for x in values:
            acc = self.plus(acc, float(x))
        return acc

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    def __reduce__(self):
        return (semiring_by_name, (self.name,))


class _LogLikeSemiring(Semiring):
    """Shared representation for the log and tropical semirings."""

    zero = NEG_INF
    one = 0.0

    def times(self, a: float, b: float) -> float:
        # -inf + finite stays -inf; +inf never enters (validated at the boundary)
        return a + b

    def divide(self, a: float, b: float) -> float:
        if b == NEG_INF:
            raise ZeroDivisionInSemiring(f"division by the zero element in {self.name} semiring")
        return a - b

    def validate(self, x: float) -> float:
        x = float(x)
        if math.isnan(x):
            raise InvalidWeightError(f"NaN is not a {self.name} weight")
        if x == math.inf:
            raise InvalidWeightError(f"+inf is not a {self.name} weight")
        return x

    def validate_array(self, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr)
        if arr.dtype.kind != "f":
            arr = arr.astype(np.float64)
        if np.isnan(arr).any():
            raise InvalidWeightError(f"NaN is not a {self.name} weight")
        if np.isposinf(arr).any():
            raise InvalidWeightError(f"+inf is not a {self.name} weight")
        return arr

    def from_log_prob(self, p: float) -> float:
        return self.validate(p)

    def to_log_prob(self, x: float) -> float:
        return float(x)

    def from_log_array(self, arr: np.ndarray) -> np.ndarray:
        return self.validate_array(arr)

    def to_log_array(self, arr: np.ndarray) -> np.ndarray:
        return np.asarray(arr)

    def times_array(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return u + v


class LogSemiring(_LogLikeSemiring):
    name = "log"

    def plus(self, a: float, b: float) -> float:
        if a == NEG_INF:
            return b
        if b == NEG_INF:
            return a
        if a >= b:
            return a + math.log1p(math.exp(b - a))
        return b + math.log1p(math.exp(a - b))


class TropicalSemiring(_LogLikeSemiring):
    name = "tropical"

    def plus(self, a: float, b: float) -> float:
        return a if a >= b else b


class ProbSemiring(Semiring):
    name = "prob"
    zero = 0.0
    one = 1.0

    def plus(self, a: float, b: float) -> float:
        return a + b

    def times(self, a: float, b: float) -> float:
        return a * b

    def divide(self, a: float, b: float) -> float:
        if b == 0.0:
            raise ZeroDivisionInSemiring("division by the zero element in prob semiring")
        return a / b

    def validate(self, x: float) -> float:
        x = float(x)
        if math.isnan(x) or math.isinf(x) or x < 0.0:
            raise InvalidWeightError(f"{x!r} is not a prob weight (need finite, >= 0)")
        return x

    def validate_array(self, arr: np.ndarray) -> np.ndarray:
        arr = np.asarray(arr)
        if arr.dtype.kind != "f":
            arr = arr.astype(np.float64)
        if not np.isfinite(arr).all() or (arr < 0).any():
            raise InvalidWeightError("prob weights must be finite and >= 0")
        return arr

    def from_log_prob(self, p: float) -> float:
        p = _LOG_VALIDATOR.validate(p)
        if p > _MAX_LOG_DOUBLE:
            raise InvalidWeightError(f"exp({p}) overflows a prob weight")
        return math.exp(p)

    def to_log_prob(self, x: float) -> float:
        return math.log(x) if x > 0.0 else NEG_INF

    def from_log_array(self, arr: np.ndarray) -> np.ndarray:
        arr = _LOG_VALIDATOR.validate_array(arr)
        if (arr > _MAX_LOG_DOUBLE).any():
            raise InvalidWeightError("log-probability too large for a prob weight")
        return np.exp(arr)

    def to_log_array(self, arr: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(arr)

    def times_array(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        return u * v


_MAX_LOG_DOUBLE = math.log(np.finfo(np.float64).max)

LOG = LogSemiring()
TROPICAL = TropicalSemiring()
PROB = ProbSemiring()
_LOG_VALIDATOR = LOG

SEMIRINGS = {sr.name: sr for sr in (LOG, TROPICAL, PROB)}


def semiring_by_name(name: str) -> Semiring:
    try:
        return SEMIRINGS[name]
    except KeyError:
        raise ValueError(f"unknown semiring {name!r}; expected one of {sorted(SEMIRINGS)}") from None


@dataclass(frozen=True, slots=True)
class Weight:
    """A single semiring element. Subclasses bind the semiring."""

    value: float
    semiring: ClassVar[Semiring]

    def __post_init__(self):
        object.__setattr__(self, "value", self.semiring.validate(self.value))

    @classmethod
    def zero(cls):
        return cls(cls.semiring.zero)

    @classmethod
    def one(cls):
        return cls(cls.semiring.one)

    @classmethod
    def from_log_prob(cls, p: float):
        return cls(cls.semiring.from_log_prob(p))

    def to_log_prob(self) -> float:
        return self.semiring.to_log_prob(self.value)

    def is_zero(self) -> bool:
        return self.semiring.is_zero(self.value)

    def _check(self, other) -> None:
        if type(other) is not type(self):
            raise TypeError(f"cannot combine {type(self).__name__} with {type(other).__name__}")

    def __add__(self, other):
        self._check(other)
        return type(self)(self.semiring.plus(self.value, other.value))

    def __mul__(self, other):
        self._check(other)
        return type(self)(self.semiring.times(self.value, other.value))

    def __truediv__(self, other):
        self._check(other)
        return type(self)(self.semiring.divide(self.value, other.value))

    def __float__(self) -> float:
        return self.value


class LogWeight(Weight):
    semiring = LOG


class TropicalWeight(Weight):
    semiring = TROPICAL


class ProbWeight(Weight):
    semiring = PROB


def oplus(a: Weight, b: Weight) -> Weight:
    return a + b


def otimes(a: Weight, b: Weight) -> Weight:
    return a * b


def oslash(a: Weight, b: Weight) -> Weight:
    return a / b
