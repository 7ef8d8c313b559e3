"""Dynamic-time-warping synchronization of two procedure timelines.

The cost matrix holds the factor-based graph distance for every frame
pair; the optimal monotonic continuous path through it is found by the
classic dynamic-programming recurrence

    D[i][j] = cell(i, j) + min(D[i-1][j], D[i][j-1], D[i-1][j-1])

with D[0][0] = cell(0, 0). Backtracking ties prefer the diagonal step,
then the vertical (advance in timeline a), then the horizontal. An
exhaustive-enumeration oracle is included for validation only.

Memory is O(m*n) because backtracking keeps the full accumulated
matrix; that is fine at desk scale (a few thousand frames per side).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np

from .distance import WeightProfile, extract_features, feature_distance
from .errors import (
    EmptyTimelineError,
    FieldError,
    IndexOutOfRangeError,
    InstanceTooLargeError,
)
from .model import Timeline

BRUTE_FORCE_LIMIT = 24  # max m+n accepted by the enumeration oracle


@dataclass(frozen=True)
class CostMatrix:
    """Pairwise frame distances between two timelines."""

    values: np.ndarray
    profile: WeightProfile = WeightProfile()
    a_id: str = "a"
    b_id: str = "b"

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float)
        if arr.ndim != 2 or arr.size == 0:
            raise FieldError("cost matrix", f"expected a nonempty 2d matrix, got shape {arr.shape}")
        if not np.isfinite(arr).all() or (arr < 0).any():
            raise FieldError("cost matrix", "cells must be finite and >= 0")
        object.__setattr__(self, "values", arr)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class AlignmentPath:
    """Monotonic continuous index-pair path with per-step costs."""

    steps: tuple[tuple[int, int], ...]
    step_costs: tuple[float, ...]

    def __post_init__(self):
        if not self.steps:
            raise FieldError("alignment path", "path must be nonempty")
        if len(self.steps) != len(self.step_costs):
            raise FieldError("alignment path", "one cost per step required")
        if self.steps[0] != (0, 0):
            raise FieldError("alignment path", f"path must start at (0, 0), got {self.steps[0]}")
        for (i0, j0), (i1, j1) in zip(self.steps, self.steps[1:]):
            di, dj = i1 - i0, j1 - j0
            if (di, dj) not in ((0, 1), (1, 0), (1, 1)):
                raise FieldError(
                    "alignment path", f"non-unit step from ({i0}, {j0}) to ({i1}, {j1})"
                )

    @cached_property
    def total_cost(self) -> float:
        return math.fsum(self.step_costs)

    @property
    def end(self) -> tuple[int, int]:
        return self.steps[-1]

    def __len__(self) -> int:
        return len(self.steps)


def cost_matrix(
    a: Timeline, b: Timeline, profile: WeightProfile = WeightProfile()
) -> CostMatrix:
    """Fill the m x n matrix of pairwise frame distances."""
    if len(a) == 0:
        raise EmptyTimelineError(a.id)
    if len(b) == 0:
        raise EmptyTimelineError(b.id)
    feats_a = [extract_features(g) for g in a.frames]
    feats_b = [extract_features(g) for g in b.frames]
    values = np.empty((len(feats_a), len(feats_b)), dtype=float)
    for i, fa in enumerate(feats_a):
        for j, fb in enumerate(feats_b):
            values[i, j] = feature_distance(fa, fb, profile)
    return CostMatrix(values, profile, a.id, b.id)


def _band_window(i: int, m: int, n: int, band: int) -> tuple[int, int]:
    # Sakoe-Chiba style window; widened so a valid path always exists.
    effective = max(band, abs(m - n), 1)
    center = i * (n - 1) / (m - 1) if m > 1 else 0.0
    lo = max(0, math.ceil(center - effective))
    hi = min(n - 1, math.floor(center + effective))
    return lo, hi


def dtw_align(c: CostMatrix, band: Optional[int] = None) -> AlignmentPath:
    """Globally minimal monotonic continuous path through the matrix.

    band, when given, restricts the search to a Sakoe-Chiba style window
    around the matrix diagonal; by default the search is unconstrained.
    """
    cells = c.values
    m, n = c.m, c.n
    acc = np.full((m, n), np.inf)
    for i in range(m):
        lo, hi = _band_window(i, m, n, band) if band is not None else (0, n - 1)
        for j in range(lo, hi + 1):
            if i == 0 and j == 0:
                best = 0.0
            else:
                best = np.inf
                if i > 0 and j > 0:
                    best = acc[i - 1, j - 1]
                if i > 0:
                    best = min(best, acc[i - 1, j])
                if j > 0:
                    best = min(best, acc[i, j - 1])
            acc[i, j] = cells[i, j] + best

    # backtrack; ties prefer diagonal, then vertical, then horizontal
    i, j = m - 1, n - 1
    rev = [(i, j)]
    while (i, j) != (0, 0):
        candidates: list[tuple[int, int]] = []
        if i > 0 and j > 0:
            candidates.append((i - 1, j - 1))
        if i > 0:
            candidates.append((i - 1, j))
        if j > 0:
            candidates.append((i, j - 1))
        best_val = min(acc[p] for p in candidates)
        i, j = next(p for p in candidates if acc[p] == best_val)
        rev.append((i, j))
    steps = tuple(reversed(rev))
    return AlignmentPath(steps, tuple(float(cells[p]) for p in steps))


def brute_force_align(c: CostMatrix) -> AlignmentPath:
    """Exhaustive enumeration of every monotonic continuous path.

    Validation oracle for dtw_align only; refuses instances with
    m + n > BRUTE_FORCE_LIMIT.
    """
    m, n = c.m, c.n
    if m + n > BRUTE_FORCE_LIMIT:
        raise InstanceTooLargeError(m, n, BRUTE_FORCE_LIMIT)
    cells = c.values
    best_steps: Optional[list[tuple[int, int]]] = None
    best_cost = math.inf

    path: list[tuple[int, int]] = [(0, 0)]

    def walk(i: int, j: int, cost: float):
        nonlocal best_steps, best_cost
        if (i, j) == (m - 1, n - 1):
            if cost < best_cost:
                best_cost = cost
                best_steps = list(path)
            return
        for di, dj in ((1, 1), (1, 0), (0, 1)):
            ni, nj = i + di, j + dj
            if ni < m and nj < n:
                path.append((ni, nj))
                walk(ni, nj, cost + cells[ni, nj])
                path.pop()

    walk(0, 0, float(cells[0, 0]))
    assert best_steps is not None
    return AlignmentPath(tuple(best_steps), tuple(float(cells[p]) for p in best_steps))


def warp_lookup(path: AlignmentPath, i: int) -> list[int]:
    """All indices of timeline b matched to frame i of timeline a."""
    m = path.end[0] + 1
    if not 0 <= i < m:
        raise IndexOutOfRangeError(i, m)
    return sorted(j for (ii, j) in path.steps if ii == i)


def recovery_fraction(truth: AlignmentPath, estimate: AlignmentPath, tol: int = 2) -> float:
    """Fraction of ground-truth pairs matched by the estimate within tol.

    A truth pair (i, j) counts as recovered when the estimated path
    pairs j with some i' satisfying |i' - i| <= tol.
    """
    by_j: dict[int, list[int]] = {}
    for ii, j in estimate.steps:
        by_j.setdefault(j, []).append(ii)
    hit = sum(
        1
        for i, j in truth.steps
        if any(abs(ii - i) <= tol for ii in by_j.get(j, ()))
    )
    return hit / len(truth.steps)


def alignment_to_dict(path: AlignmentPath) -> dict:
    return {
        "steps": [[i, j, cost] for (i, j), cost in zip(path.steps, path.step_costs)],
        "total_cost": path.total_cost,
    }


def alignment_from_dict(data: dict) -> AlignmentPath:
    steps = tuple((int(i), int(j)) for i, j, _ in data["steps"])
    costs = tuple(float(c) for _, _, c in data["steps"])
    return AlignmentPath(steps, costs)


def alignment_to_json(path: AlignmentPath) -> str:
    """Canonical serialized form; CLI and API emit exactly these bytes."""
    return json.dumps(alignment_to_dict(path), sort_keys=True, separators=(",", ":")) + "\n"
