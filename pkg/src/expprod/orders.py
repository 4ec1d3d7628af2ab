"""Order conditions: generation, verification, and Newton solving.

The condition generator runs the series logarithm of a stage pattern with
symbolic coefficients and Lie-projects each homogeneous component; every
Lyndon-word coefficient that must vanish (and the degree-1 sum-to-one
conditions) becomes one polynomial equation.  The solver is a damped
least-squares Newton iteration with exact polynomial gradients.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .ncalg import lie_project, product_log
from .poly import RationalPoly, as_exact
from .schemes import Scheme


@dataclass(frozen=True)
class ConditionEq:
    """One polynomial equation (== 0), tagged by degree and Lyndon word."""

    degree: int
    word: tuple[int, ...]
    poly: RationalPoly


@dataclass(frozen=True)
class OrderConditionSet:
    parameters: tuple[str, ...]
    equations: tuple[ConditionEq, ...]
    source: tuple[str, int]

    def of_degree(self, degree: int) -> tuple[ConditionEq, ...]:
        return tuple(eq for eq in self.equations if eq.degree == degree)

    def to_json(self) -> dict:
        return {
            "parameters": list(self.parameters),
            "source": {"pattern": self.source[0], "order": self.source[1]},
            "equations": [
                {"degree": eq.degree, "word": list(eq.word), "poly": eq.poly.to_json()}
                for eq in self.equations
            ],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "OrderConditionSet":
        eqs = tuple(
            ConditionEq(int(e["degree"]), tuple(int(i) for i in e["word"]),
                        RationalPoly.from_json(e["poly"]))
            for e in doc["equations"])
        return cls(tuple(doc["parameters"]), eqs,
                   (doc["source"]["pattern"], int(doc["source"]["order"])))


@dataclass
class SolveReport:
    solution: dict[str, float]
    residuals: tuple[float, ...]
    iterations: int
    converged: bool
    message: str = ""

    @property
    def max_residual(self) -> float:
        return max((abs(r) for r in self.residuals), default=0.0)


def order_conditions(pattern: str, m: int) -> OrderConditionSet:
    """Polynomial conditions for an alternating slot pattern to reach order m.

    Degree-1 equations are the per-slot sum-to-one conditions; for each
    degree 2..m there is one equation per Lyndon word of that length,
    namely the word's coefficient in the log of the product.
    """
    if m < 1:
        raise ValueError("target order must be >= 1")
    if len(pattern) < m:
        raise ValueError("pattern shorter than the target order is infeasible")
    labels = tuple(sorted(set(pattern)))
    if not set(pattern) <= {"A", "B"}:
        raise ValueError("pattern must be over the slots A and B")
    if m > 8:
        raise ValueError("target order exceeds the configured truncation cap (8)")
    params = tuple(f"p{i + 1}" for i in range(len(pattern)))
    stages = [(lab, RationalPoly.var(p)) for lab, p in zip(pattern, params)]
    log = product_log(stages, m, labels)
    combo = lie_project(log)
    equations: list[ConditionEq] = []
    for j, lab in enumerate(labels):
        coeff = combo.terms.get((j,), Fraction(0))
        poly = _as_poly(coeff) - RationalPoly.const(1)
        equations.append(ConditionEq(1, (j,), poly))
    for degree in range(2, m + 1):
        comp = combo.homogeneous(degree)
        from .ncalg import lyndon_words

        for lw in lyndon_words(len(labels), degree):
            if len(lw) != degree:
                continue
            coeff = comp.terms.get(lw, Fraction(0))
            equations.append(ConditionEq(degree, lw, _as_poly(coeff)))
    return OrderConditionSet(params, tuple(equations), (pattern, m))


def _as_poly(c) -> RationalPoly:
    if isinstance(c, RationalPoly):
        return c
    return RationalPoly.const(c)


def verify_order(scheme: Scheme, m: int) -> int:
    """Highest order k <= m at which all correction terms vanish.

    Schemes with purely rational coefficients are checked exactly; anything
    carrying algebraic or float coefficients is checked against a scaled
    1e-12 tolerance (the floats enter the series algebra as exact binary
    rationals, so structural cancellations still happen exactly).
    """
    if m > 8:
        raise ValueError("verification order exceeds the configured truncation cap (8)")
    exact = scheme.all_exact()
    stages = scheme.ncalg_stages()
    labels = tuple(lab for lab in scheme.slots)
    log = product_log(stages, m, labels)
    prod = _stage_product_abs(stages, m, labels)
    achieved = 0
    for degree in range(1, m + 1):
        comp = log.homogeneous(degree)
        if degree == 1:
            ok = True
            for j in range(len(labels)):
                c = comp.get((j,), Fraction(0))
                ok &= _is_value(c, Fraction(1), exact, prod.get(degree, 1.0))
            if not ok:
                break
        else:
            residual = {w: c for w, c in comp.items()
                        if not _is_value(c, Fraction(0), exact, prod.get(degree, 1.0))}
            if residual:
                break
        achieved = degree
    return achieved


def _stage_product_abs(stages, m, labels) -> dict[int, float]:
    """Per-degree magnitude scale of the stage product, for tolerance scaling."""
    from .ncalg import stage_product

    prod = stage_product(stages, m, labels)
    scale: dict[int, float] = {}
    for w, c in prod.terms.items():
        d = len(w)
        scale[d] = max(scale.get(d, 1.0), abs(float(c)))
    return scale


def _is_value(c, target: Fraction, exact: bool, scale: float) -> bool:
    diff = as_exact(c) - target
    if exact:
        return diff == 0
    return abs(float(diff)) <= 1e-12 * max(1.0, scale)


def evaluate_conditions(conds: OrderConditionSet, assignment: Mapping[str, object]):
    return [eq.poly.evaluate(assignment) for eq in conds.equations]


def solve(conds: OrderConditionSet, fixed: Mapping[str, object] | None = None,
          guess: Mapping[str, float] | None = None,
          tol: float = 1e-13, max_iter: int = 200) -> SolveReport:
    """Damped least-squares Newton on the condition polynomials.

    ``fixed`` pins parameters (the usual way to cut a one-parameter family
    down to isolated points); ``guess`` must cover every free parameter.
    Non-convergence is reported, not raised.
    """
    fixed = dict(fixed or {})
    guess = dict(guess or {})
    free = [p for p in conds.parameters if p not in fixed]
    missing = [p for p in free if p not in guess]
    if missing:
        raise ValueError(f"initial guess missing parameters {missing}")
    x = np.array([float(guess[p]) for p in free], dtype=float)
    fixed_f = {p: float(v) for p, v in fixed.items()}

    grads = [[eq.poly.derivative(p) for p in free] for eq in conds.equations]

    def assignment(vec):
        a = dict(fixed_f)
        a.update({p: float(v) for p, v in zip(free, vec)})
        return a

    def residuals(vec):
        # Exact rational evaluation at the (exact binary) float point kills
        # the cancellation noise floor; accuracy is then limited only by
        # the float resolution of the iterate itself.
        a = {p: Fraction(v) for p, v in assignment(vec).items()}
        return np.array([float(eq.poly.evaluate(a)) for eq in conds.equations])

    r = residuals(x)
    best = float(np.max(np.abs(r))) if r.size else 0.0
    iterations = 0
    message = ""
    nudges = 0
    for iterations in range(1, max_iter + 1):
        if not free:
            break
        a = assignment(x)
        jac = np.array([[float(g.evaluate(a)) for g in row] for row in grads])
        step, *_ = np.linalg.lstsq(jac, -r, rcond=None)
        if not np.all(np.isfinite(step)):
            message = "singular Newton step"
            break
        lam = 1.0
        improved = False
        for _ in range(30):
            x_new = x + lam * step
            r_new = residuals(x_new)
            if np.linalg.norm(r_new) < np.linalg.norm(r):
                x, r = x_new, r_new
                improved = True
                break
            lam *= 0.5
        if not improved:
            if best > tol and nudges < 3:
                # Stationary point of the residual norm away from any root
                # (e.g. a vanishing derivative at the guess): take a fixed
                # deterministic sidestep and keep going.
                nudges += 1
                x = x + 0.02 * (1.0 + np.abs(x))
                r = residuals(x)
                best = float(np.max(np.abs(r))) if r.size else 0.0
                continue
            message = "stalled (no descent along Newton direction)"
            break
        best = float(np.max(np.abs(r))) if r.size else 0.0
        if best == 0.0 or (best <= tol and np.linalg.norm(lam * step) <= 1e-15 * (1 + np.linalg.norm(x))):
            break
    solution = assignment(x)
    converged = best <= tol
    return SolveReport(solution={p: solution[p] for p in conds.parameters},
                       residuals=tuple(float(v) for v in r),
                       iterations=iterations, converged=converged, message=message)


def rationalize_solution(conds: OrderConditionSet, solution: Mapping[str, float],
                         max_denominator: int = 10 ** 6) -> dict[str, Fraction] | None:
    """Snap a float solution to small rationals if they satisfy the system exactly."""
    candidate = {p: Fraction(solution[p]).limit_denominator(max_denominator)
                 for p in conds.parameters}
    for eq in conds.equations:
        if eq.poly.evaluate(candidate) != 0:
            return None
    return candidate


@dataclass
class FamilyPoint:
    p6: float
    solution: dict[str, float] = field(default_factory=dict)
    max_residual: float = float("inf")
    converged: bool = False


def ruth_family(p6_values: Sequence[float], pattern: str = "ABABAB") -> list[FamilyPoint]:
    """Trace the one-parameter third-order solution family by continuation.

    Each grid value pins the last stage coefficient; the solve starts from
    the previous converged point (the known third-order solution seeds the
    point nearest to it).  Failed points are flagged and continuation
    restarts from the nearest converged neighbor.
    """
    conds = order_conditions(pattern, 3)
    last = conds.parameters[-1]
    seeds = {"p1": 7.0 / 24.0, "p2": 2.0 / 3.0, "p3": 0.75, "p4": -2.0 / 3.0,
             "p5": -1.0 / 24.0}
    p6_list = list(p6_values)
    points = [FamilyPoint(p6=float(v)) for v in p6_list]
    order = sorted(range(len(p6_list)), key=lambda i: abs(p6_list[i] - 1.0))
    current = dict(seeds)
    solved: list[tuple[float, dict[str, float]]] = []
    # sweep outward from the seed-nearest grid point
    for idx in order:
        p6 = p6_list[idx]
        if solved:
            nearest = min(solved, key=lambda sv: abs(sv[0] - p6))
            current = dict(nearest[1])
        report = solve(conds, fixed={last: p6}, guess=current)
        pt = points[idx]
        pt.max_residual = report.max_residual
        pt.converged = report.converged
        pt.solution = {p: report.solution[p] for p in conds.parameters}
        if report.converged:
            solved.append((p6, {p: report.solution[p] for p in conds.parameters if p != last}))
    return points


def family_csv(points: Sequence[FamilyPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["p6", "p1", "p2", "p3", "p4", "p5", "max_residual", "converged"])
    for pt in points:
        row = [f"{pt.p6:.17g}"]
        for p in ("p1", "p2", "p3", "p4", "p5"):
            row.append(f"{pt.solution.get(p, float('nan')):.17g}")
        row.append(f"{pt.max_residual:.17g}")
        row.append("true" if pt.converged else "false")
        writer.writerow(row)
    return buf.getvalue()
