"""Conditional-probability toy tables and local-model feasibility.

Tables have four rows (settings) and four columns, the outcome pairs
``(a, b)`` in the order ``++, +-, -+, --``. Under the two-input reading, row
``k`` is the setting pair ``(A, B)`` in the order ``(+,+), (+,-), (-,+),
(-,-)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from scipy.optimize import nnls

OUTCOMES = ((1, 1), (1, -1), (-1, 1), (-1, -1))
INPUT_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))
FEASIBILITY_TOL = 1e-9

Interpretation = Literal["two-input", "single-input"]


@dataclass(frozen=True)
class CondProbTable:
    p: np.ndarray
    rows: tuple[str, ...] = ("A=+1,B=+1", "A=+1,B=-1", "A=-1,B=+1", "A=-1,B=-1")

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.shape != (4, 4):
            raise ValueError("table must be 4x4")
        if np.any(p < 0.0) or np.any(p > 1.0):
            raise ValueError("entries must lie in [0, 1]")
        if np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-12):
            raise ValueError("each row must sum to 1")
        object.__setattr__(self, "p", p)


def _check_probs(ps) -> tuple[float, float, float, float]:
    if len(ps) != 4:
        raise ValueError("need four probabilities")
    ps = tuple(float(x) for x in ps)
    for x in ps:
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"probability {x} outside [0, 1]")
    return ps


def _pattern(p1, p2, p3, p4) -> np.ndarray:
    p = np.zeros((4, 4))
    for row, pk in enumerate((p1, p2, p3)):
        p[row, 0], p[row, 3] = pk, 1.0 - pk
    p[3, 1], p[3, 2] = p4, 1.0 - p4
    return p


def table1(p1: float, p2: float, p3: float, p4: float) -> CondProbTable:
    """Two binary inputs: rows 1-3 only allow ``a == b``, row 4 only ``a == -b``."""
    return CondProbTable(_pattern(*_check_probs((p1, p2, p3, p4))))


def table2(p1: float, p2: float, p3: float, p4: float) -> CondProbTable:
    """Same numbers as :func:`table1`, rows read as a single four-valued input D."""
    return CondProbTable(_pattern(*_check_probs((p1, p2, p3, p4))), rows=("D=1", "D=2", "D=3", "D=4"))


def row_correlations(t: CondProbTable) -> np.ndarray:
    return t.p @ np.array([1.0, -1.0, -1.0, 1.0])


def is_no_signaling(t: CondProbTable, tol: float = FEASIBILITY_TOL) -> bool:
    """Two-input reading: A's marginal ignores B's input and vice versa."""
    pa = t.p[:, 0] + t.p[:, 1]  # P(a=+1 | row)
    pb = t.p[:, 0] + t.p[:, 2]  # P(b=+1 | row)
    return bool(
        abs(pa[0] - pa[1]) <= tol
        and abs(pa[2] - pa[3]) <= tol
        and abs(pb[0] - pb[2]) <= tol
        and abs(pb[1] - pb[3]) <= tol
    )


def chsh_certificate(t: CondProbTable) -> tuple[int, float]:
    """Largest of the eight CHSH combinations of the row correlations.

    Returns ``(k, value)`` where ``k`` (0-based) is the row carrying the minus
    sign and ``value = |sum(E) - 2 E_k|``.
    """
    e = row_correlations(t)
    vals = np.abs(e.sum() - 2.0 * e)
    k = int(np.argmax(vals))
    return k, float(vals[k])


def deterministic_strategies() -> list[tuple[int, int, int, int]]:
    """The 16 local strategies ``(a(A=+1), a(A=-1), b(B=+1), b(B=-1))``."""
    return list(itertools.product((1, -1), repeat=4))


def vertex_matrix() -> np.ndarray:
    """16 columns, each the flattened 4x4 table of one deterministic strategy."""
    cols = []
    for a_p, a_m, b_p, b_m in deterministic_strategies():
        tab = np.zeros((4, 4))
        for row, (x, y) in enumerate(INPUT_PAIRS):
            a = a_p if x == 1 else a_m
            b = b_p if y == 1 else b_m
            tab[row, OUTCOMES.index((a, b))] = 1.0
        cols.append(tab.ravel())
    return np.column_stack(cols)


@dataclass(frozen=True)
class HiddenVariableModel:
    """Finite hidden-variable model for a single four-valued input.

    ``choices[i, D]`` is 0 when point ``i`` sends setting ``D`` to the first
    support cell of that row, 1 for the second.
    """

    choices: np.ndarray
    weights: np.ndarray
    support: tuple[tuple[int, int], ...] = ((0, 3), (0, 3), (0, 3), (1, 2))

    def outcome(self, point: int, setting: int) -> tuple[int, int]:
        cell = self.support[setting][int(self.choices[point, setting])]
        return OUTCOMES[cell]

    def conditional_table(self) -> np.ndarray:
        p = np.zeros((4, 4))
        for i, w in enumerate(self.weights):
            for d in range(4):
                p[d, OUTCOMES.index(self.outcome(i, d))] += w
        return p


def realize_table2(p1: float, p2: float, p3: float, p4: float) -> HiddenVariableModel:
    """Product model: coordinate D independently picks its row's support cells with (p_D, 1-p_D).

    Zero-weight points are dropped.
    """
    ps = _check_probs((p1, p2, p3, p4))
    choices, weights = [], []
    for combo in itertools.product((0, 1), repeat=4):
        w = 1.0
        for d, c in enumerate(combo):
            w *= ps[d] if c == 0 else 1.0 - ps[d]
        if w > 0.0:
            choices.append(combo)
            weights.append(w)
    return HiddenVariableModel(np.array(choices, dtype=int).reshape(-1, 4), np.array(weights))


@dataclass(frozen=True)
class FeasibilityVerdict:
    feasible: bool
    no_signaling: bool
    certificate: tuple[int, float] | None = None
    mixture: np.ndarray | None = None
    model: HiddenVariableModel | None = field(default=None, repr=False)
    residual: float = 0.0


def vertex_feasibility(t: CondProbTable) -> tuple[bool, np.ndarray, float]:
    """Is the table a convex mixture of the 16 deterministic local strategies?

    Solves the non-negative least-squares problem with the normalisation row
    appended; feasible iff the residual vanishes (to ``FEASIBILITY_TOL``).
    """
    m = np.vstack([vertex_matrix(), np.ones(16)])
    target = np.append(t.p.ravel(), 1.0)
    w, _ = nnls(m, target)
    residual = float(np.max(np.abs(m @ w - target)))
    return residual <= FEASIBILITY_TOL, w, residual


def local_feasibility(t: CondProbTable, interpretation: Interpretation = "two-input") -> FeasibilityVerdict:
    """Decide whether a local hidden-variable model reproduces the table.

    Under the single-input reading every table is realisable; the witness is
    the product model of :func:`realize_table2`. Under the two-input reading
    the vertex test decides, and an infeasible verdict carries the maximal
    CHSH combination as certificate.
    """
    ns = is_no_signaling(t)
    if interpretation == "single-input":
        ps = (t.p[0, 0], t.p[1, 0], t.p[2, 0], t.p[3, 1])
        if not np.allclose(_pattern(*ps), t.p, atol=1e-12, rtol=0.0):
            raise ValueError("single-input realisation expects the Table-2 support pattern")
        return FeasibilityVerdict(True, ns, model=realize_table2(*ps))
    if interpretation != "two-input":
        raise ValueError(f"unknown interpretation {interpretation!r}")
    feasible, w, residual = vertex_feasibility(t)
    if feasible:
        return FeasibilityVerdict(True, ns, mixture=w, residual=residual)
    return FeasibilityVerdict(False, ns, certificate=chsh_certificate(t), residual=residual)


def chsh_decision(t: CondProbTable) -> bool:
    """Locality by the eight CHSH inequalities; only valid for no-signalling tables."""
    if not is_no_signaling(t):
        raise ValueError("CHSH criterion requires a no-signalling table")
    return chsh_certificate(t)[1] <= 2.0 + FEASIBILITY_TOL
