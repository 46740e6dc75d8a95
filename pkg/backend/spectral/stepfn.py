"""
Right-continuous step functions on the real line.

Every spectral distribution in the toolkit (N_A of a finite matrix, the
weighted sigma of a block operator, tile mixtures, Monte Carlo averages) is a
StepFunction. Breakpoints closer than MERGE_TOL are treated as one jump, both
at construction and when two functions are compared.
"""

# Built-in imports
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence, Tuple, Union

# External imports
import numpy as np


MERGE_TOL = 1e-9
MASS_TOL = 1e-12

ArrayLike = Union[float, Sequence[float], np.ndarray]


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


def _coalesce(points: np.ndarray, tol: float = MERGE_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """
    Group sorted points whose distance to the first point of their group is at
    most `tol`. Returns (group minimum, group maximum) per group.
    """
    if points.size == 0:
        return points, points
    starts = [0]
    anchor = points[0]
    for m in range(1, points.size):
        if points[m] - anchor > tol:
            starts.append(m)
            anchor = points[m]
    starts = np.array(starts)
    ends = np.append(starts[1:], points.size) - 1
    return points[starts], points[ends]


@dataclass(frozen=True, eq=False)
class StepFunction:
    """
    Piecewise constant, right-continuous function.

    `values[m]` is the value on [breakpoints[m], breakpoints[m+1]) and
    `initial` is the value left of the first breakpoint. Distribution
    functions have initial 0 and nondecreasing values; complements start at 1.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    initial: float = 0.0

    def __post_init__(self):
        breakpoints = _frozen(self.breakpoints)
        values = _frozen(self.values)
        if breakpoints.shape != values.shape or breakpoints.ndim != 1:
            raise ValueError("breakpoints and values must be 1-d and of equal length")
        if breakpoints.size > 1 and np.any(np.diff(breakpoints) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(values < -MASS_TOL) or np.any(values > 1 + MASS_TOL):
            raise ValueError("step function values must lie in [0, 1]")
        if not -MASS_TOL <= self.initial <= 1 + MASS_TOL:
            raise ValueError("initial value must lie in [0, 1]")
        object.__setattr__(self, "breakpoints", breakpoints)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "initial", float(self.initial))

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls(np.empty(0), np.empty(0), 0.0)

    @property
    def cumulative(self) -> np.ndarray:
        return self.values

    @property
    def total(self) -> float:
        """Value at +infinity."""
        return float(self.values[-1]) if self.values.size else self.initial

    @property
    def is_nondecreasing(self) -> bool:
        steps = np.diff(np.concatenate(([self.initial], self.values)))
        return bool(np.all(steps >= -MASS_TOL))

    def __call__(self, lam: ArrayLike):
        lam_array = np.asarray(lam, dtype=float)
        index = np.searchsorted(self.breakpoints, lam_array, side="right") - 1
        padded = np.concatenate(([self.initial], self.values))
        result = padded[index + 1]
        return float(result) if result.ndim == 0 else result

    def left_limit(self, lam: ArrayLike):
        """Value just left of `lam`."""
        lam_array = np.asarray(lam, dtype=float)
        index = np.searchsorted(self.breakpoints, lam_array, side="left") - 1
        padded = np.concatenate(([self.initial], self.values))
        result = padded[index + 1]
        return float(result) if result.ndim == 0 else result

    def complement(self) -> "StepFunction":
        """1 - f, on the same breakpoints."""
        return StepFunction(self.breakpoints, 1.0 - self.values, 1.0 - self.initial)

    def translate(self, shift: float) -> "StepFunction":
        """The function lambda -> f(lambda - shift)."""
        return StepFunction(self.breakpoints + shift, self.values, self.initial)

    def jumps(self) -> list:
        """(breakpoint, jump size) for every breakpoint."""
        previous = np.concatenate(([self.initial], self.values[:-1]))
        return [
            (float(b), float(v - p))
            for b, v, p in zip(self.breakpoints, self.values, previous)
        ]

    def to_csv_rows(self) -> list:
        initial = float(self.initial)
        rows = [("-inf", str(int(initial)) if initial.is_integer() else repr(initial))]
        rows.extend(
            (repr(float(b)), repr(float(v)))
            for b, v in zip(self.breakpoints, self.values)
        )
        return rows

    @classmethod
    def from_csv_rows(cls, rows: Iterable[Sequence[str]]) -> "StepFunction":
        rows = list(rows)
        if not rows or rows[0][0] != "-inf":
            raise ValueError("step function CSV must start with a '-inf' row")
        initial = float(rows[0][1])
        breakpoints = [float(r[0]) for r in rows[1:]]
        values = [float(r[1]) for r in rows[1:]]
        return cls(np.array(breakpoints), np.array(values), initial)

    def to_dict(self) -> dict:
        return {
            "initial": self.initial,
            "breakpoints": [float(b) for b in self.breakpoints],
            "values": [float(v) for v in self.values],
        }


def from_samples(values: Sequence[float], masses: Sequence[float]) -> StepFunction:
    """
    Cumulative function lambda -> sum of masses[m] over values[m] <= lambda.
    Values within MERGE_TOL are coalesced into one breakpoint (the smallest).
    """
    values = np.asarray(values, dtype=float).ravel()
    masses = np.asarray(masses, dtype=float).ravel()
    if values.size != masses.size:
        raise ValueError(
            f"values and masses differ in length ({values.size} != {masses.size})"
        )
    if values.size == 0:
        raise ValueError("from_samples needs at least one value")
    if np.any(masses < 0):
        raise ValueError("masses must be nonnegative")
    mass_sum = math.fsum(masses)
    if mass_sum > 1 + MASS_TOL:
        raise ValueError(f"masses sum to {mass_sum!r} > 1")

    order = np.argsort(values, kind="stable")
    values, masses = values[order], masses[order]
    cumulative = np.cumsum(masses)
    group_min, group_max = _coalesce(values)
    ends = np.searchsorted(values, group_max, side="right") - 1
    group_values = np.minimum(cumulative[ends], 1.0)
    if abs(mass_sum - 1.0) <= MASS_TOL:
        group_values[-1] = 1.0
    else:
        group_values[-1] = mass_sum
    group_values = np.maximum.accumulate(group_values)
    return StepFunction(group_min, group_values, 0.0)


def from_counts(values: Sequence[float], total: int) -> StepFunction:
    """
    lambda -> #{values <= lambda} / total, with the integer count divided once
    per breakpoint. Equal multisets of values give bit-equal functions.
    """
    values = np.sort(np.asarray(values, dtype=float).ravel())
    if values.size == 0:
        raise ValueError("from_counts needs at least one value")
    if total < values.size:
        raise ValueError(f"total {total} is smaller than the {values.size} values")
    group_min, group_max = _coalesce(values)
    counts = np.searchsorted(values, group_max, side="right")
    return StepFunction(group_min, counts / total, 0.0)


def mix(parts: Iterable[Tuple[float, StepFunction]]) -> StepFunction:
    """Convex combination sum w * f, on the (coalesced) union of breakpoints."""
    parts = list(parts)
    if not parts:
        raise ValueError("mix needs at least one part")
    weights = np.array([w for w, _ in parts], dtype=float)
    if np.any(weights < 0):
        raise ValueError("mixture weights must be nonnegative")
    weight_sum = math.fsum(weights)
    if abs(weight_sum - 1.0) > MASS_TOL:
        raise ValueError(f"mixture weights sum to {weight_sum!r}, expected 1")

    functions = [f for _, f in parts]
    points = np.unique(np.concatenate([f.breakpoints for f in functions]))
    initial = math.fsum(w * f.initial for w, f in parts)
    if points.size == 0:
        return StepFunction(points, points, min(max(initial, 0.0), 1.0))
    group_min, group_max = _coalesce(points)
    mixed = np.zeros(group_max.size)
    for w, f in parts:
        mixed += w * f(group_max)
    return StepFunction(group_min, np.clip(mixed, 0.0, 1.0), min(max(initial, 0.0), 1.0))


def sup_distance(f: StepFunction, g: StepFunction) -> float:
    """
    Exact sup |f - g| over the real line. Both functions are constant between
    consecutive merged breakpoints, so checking the region left of all
    breakpoints and the post-jump value of every merged breakpoint suffices.
    """
    distance = abs(f.initial - g.initial)
    points = np.unique(np.concatenate((f.breakpoints, g.breakpoints)))
    if points.size == 0:
        return float(distance)
    _, group_max = _coalesce(points)
    distance = max(distance, float(np.max(np.abs(f(group_max) - g(group_max)))))
    return float(distance)


def sup_distance_to(
    f: StepFunction,
    reference: Callable[[np.ndarray], np.ndarray],
    lower: float,
    upper: float,
) -> float:
    """
    Exact sup |f - F| for a continuous nondecreasing reference F supported
    on [lower, upper] (F(lower) = 0, F(upper) = 1, with F = 0 left of lower
    and F = 1 right of upper). The supremum is attained at one-sided limits
    of the breakpoints or at the support endpoints.
    """
    points = np.concatenate((f.breakpoints, [lower, upper]))
    clipped = np.clip(points, lower, upper)
    reference_values = np.asarray(reference(clipped), dtype=float)
    reference_values = np.where(points < lower, 0.0, reference_values)
    reference_values = np.where(points > upper, 1.0, reference_values)
    right = np.abs(f(points) - reference_values)
    left = np.abs(f.left_limit(points) - reference_values)
    tails = max(abs(f.initial - 0.0), abs(f.total - 1.0))
    return float(max(right.max(), left.max(), tails))
