"""Construction, composition, and inspection of splitting schemes.

A scheme is an ordered list of stages, written left to right exactly as
the product of exponentials is written on paper; application to a state
runs right to left.  Stage coefficients are exact rationals where
possible.  The fractal constructions introduce algebraic constants
(real roots of small odd-degree polynomials); their stage coefficients
are kept as exact polynomials in those named constants, with a
17-significant-digit decimal for numeric work, so per-slot sums stay
exactly 1 at every nesting depth without an algebraic-number tower.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from .ncalg import LieCombination, NcSeries, product_log
from .poly import RationalPoly, as_exact, frac_str, parse_frac


# ---------------------------------------------------------------------------
# Algebraic constants
# ---------------------------------------------------------------------------

class AlgebraicConstant:
    """Real root of a rational polynomial, with a frozen decimal rendering.

    Numeric callers read ``value``; exactness checks refine the root by
    bisection in Fraction arithmetic from the stored isolating bracket.
    """

    __slots__ = ("name", "poly_coeffs", "decimal", "value", "lo", "hi")

    def __init__(self, name: str, poly_coeffs: Sequence[Fraction],
                 lo: Fraction, hi: Fraction):
        self.name = name
        self.poly_coeffs = tuple(Fraction(c) for c in poly_coeffs)  # ascending
        if self._eval(lo) * self._eval(hi) >= 0:
            raise ValueError(f"bracket does not isolate a root of {name}")
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        approx = self.refined(Fraction(1, 10 ** 25))
        self.decimal = _sig17(approx)
        self.value = float(self.decimal)

    def _eval(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.poly_coeffs):
            acc = acc * x + c
        return acc

    def refined(self, eps: Fraction) -> Fraction:
        lo, hi = self.lo, self.hi
        flo = self._eval(lo)
        while hi - lo > eps:
            mid = (lo + hi) / 2
            fmid = self._eval(mid)
            if fmid == 0:
                return mid
            if (flo < 0) == (fmid < 0):
                lo, flo = mid, fmid
            else:
                hi = mid
        return (lo + hi) / 2

    def __float__(self) -> float:
        return self.value

    def __repr__(self) -> str:
        return f"AlgebraicConstant({self.name}={self.decimal})"


def _sig17(q: Fraction) -> str:
    """Decimal string of q with 17 significant digits."""
    from decimal import Decimal, getcontext

    ctx = getcontext().copy()
    ctx.prec = 17
    d = ctx.divide(Decimal(q.numerator), Decimal(q.denominator))
    return format(d, "f")


def _fractal_poly(mult: int, power: int) -> list[Fraction]:
    """Ascending coefficients of mult*s^power + (1 - mult*s)^power."""
    from math import comb

    coeffs = [Fraction(0)] * (power + 1)
    for k in range(power + 1):
        coeffs[k] += Fraction(comb(power, k) * (-mult) ** k)
    coeffs[power] += Fraction(mult)
    return coeffs


_CONSTANTS: dict[str, AlgebraicConstant] = {}


def fractal_constant(kind: str, base_order: int) -> AlgebraicConstant:
    """The promotion constant for a symmetric base of even order 2k.

    ``triple``: real root of 2 s^(2k+1) + (1 - 2s)^(2k+1) = 0 (root > 1).
    ``quintuple``: real root of 4 s^(2k+1) + (1 - 4s)^(2k+1) = 0 (root in (0, 1/2)).
    """
    if base_order < 2 or base_order % 2:
        raise ValueError("fractal promotion needs an even base order >= 2")
    mult = {"triple": 2, "quintuple": 4}[kind]
    name = f"{kind}_order{base_order}"
    if name not in _CONSTANTS:
        power = base_order + 1
        coeffs = _fractal_poly(mult, power)
        if kind == "triple":
            lo, hi = Fraction(1), Fraction(2)
        else:
            lo, hi = Fraction(1, 4), Fraction(1, 2)
        _CONSTANTS[name] = AlgebraicConstant(name, coeffs, lo, hi)
    return _CONSTANTS[name]


def constant_registry() -> dict[str, AlgebraicConstant]:
    return dict(_CONSTANTS)


class SymCoeff:
    """Exact polynomial in named algebraic constants, plus its float value."""

    __slots__ = ("poly", "value")

    def __init__(self, poly: RationalPoly):
        self.poly = poly
        self.value = float(poly.evaluate({n: _CONSTANTS[n].value for n in poly.variables()}))

    @classmethod
    def of(cls, constant: AlgebraicConstant) -> "SymCoeff":
        return cls(RationalPoly.var(constant.name))

    def __float__(self) -> float:
        return self.value

    def __eq__(self, other) -> bool:
        if isinstance(other, SymCoeff):
            return self.poly == other.poly
        if isinstance(other, (int, Fraction)):
            return self.poly == RationalPoly.const(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.poly)

    def __repr__(self) -> str:
        return f"SymCoeff({self.poly!r})"

    def refined_value(self, digits: int = 30) -> Fraction:
        eps = Fraction(1, 10 ** digits)
        return self.poly.evaluate({n: _CONSTANTS[n].refined(eps) for n in self.poly.variables()})


StageCoeff = Union[Fraction, SymCoeff, float]


def _sym(value) -> RationalPoly:
    if isinstance(value, SymCoeff):
        return value.poly
    if isinstance(value, (int, Fraction)):
        return RationalPoly.const(value)
    raise TypeError(f"no exact form for {value!r}")


def coeff_mul(a: StageCoeff, b: StageCoeff) -> StageCoeff:
    if isinstance(a, float) or isinstance(b, float):
        return coeff_value(a) * coeff_value(b)
    if isinstance(a, SymCoeff) or isinstance(b, SymCoeff):
        prod = as_exact(_sym(a) * _sym(b))
        return prod if isinstance(prod, Fraction) else SymCoeff(prod)
    return a * b


def coeff_add(a: StageCoeff, b: StageCoeff) -> StageCoeff:
    if isinstance(a, float) or isinstance(b, float):
        return coeff_value(a) + coeff_value(b)
    if isinstance(a, SymCoeff) or isinstance(b, SymCoeff):
        s = as_exact(_sym(a) + _sym(b))
        return s if isinstance(s, Fraction) else SymCoeff(s)
    return a + b


def coeff_value(c: StageCoeff) -> float:
    if isinstance(c, SymCoeff):
        return c.value
    return float(c)


def coeff_pow(c: StageCoeff, n: int) -> StageCoeff:
    out: StageCoeff = Fraction(1)
    for _ in range(n):
        out = coeff_mul(out, c)
    return out


# ---------------------------------------------------------------------------
# Stages and schemes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CommutatorSpec:
    """A nested commutator stage, e.g. ("B", ("A", "B")) with x_power 3."""

    tree: tuple
    x_power: int

    def __post_init__(self):
        depth = _tree_depth(self.tree)
        leaves = _tree_leaves(self.tree)
        if depth < 1:
            raise ValueError("commutator bracket depth must be >= 1")
        if self.x_power < 2:
            raise ValueError("commutator stage x_power must be >= 2")
        if leaves != self.x_power:
            raise ValueError("x_power must equal the number of bracket leaves")

    def labels_used(self) -> set[str]:
        out: set[str] = set()

        def walk(t):
            if isinstance(t, str):
                out.add(t)
            else:
                walk(t[0])
                walk(t[1])

        walk(self.tree)
        return out

    def to_json(self):
        def conv(t):
            if isinstance(t, str):
                return t
            return [conv(t[0]), conv(t[1])]

        return conv(self.tree)

    @classmethod
    def from_json(cls, doc, x_power: int) -> "CommutatorSpec":
        def conv(t):
            if isinstance(t, str):
                return t
            return (conv(t[0]), conv(t[1]))

        return cls(conv(doc), x_power)


def _tree_depth(tree) -> int:
    if isinstance(tree, str):
        return 0
    return 1 + max(_tree_depth(tree[0]), _tree_depth(tree[1]))


def _tree_leaves(tree) -> int:
    if isinstance(tree, str):
        return 1
    return _tree_leaves(tree[0]) + _tree_leaves(tree[1])


@dataclass(frozen=True)
class Stage:
    """One exponential factor: a slot index or commutator, and a coefficient."""

    target: Union[int, CommutatorSpec]
    coeff: StageCoeff

    def is_commutator(self) -> bool:
        return isinstance(self.target, CommutatorSpec)

    def scaled(self, factor: StageCoeff) -> "Stage":
        if self.is_commutator():
            return Stage(self.target, coeff_mul(self.coeff, coeff_pow(factor, self.target.x_power)))
        return Stage(self.target, coeff_mul(self.coeff, factor))


@dataclass(frozen=True)
class Scheme:
    """An exponential product formula: slots, ordered stages, claimed order."""

    slots: tuple[str, ...]
    stages: tuple[Stage, ...]
    claimed_order: int
    symmetric: bool
    name: str = ""
    unmerged: tuple[Stage, ...] | None = None

    def slot_sums(self) -> dict[str, StageCoeff]:
        sums: dict[str, StageCoeff] = {lab: Fraction(0) for lab in self.slots}
        for st in self.stages:
            if not st.is_commutator():
                lab = self.slots[st.target]
                sums[lab] = coeff_add(sums[lab], st.coeff)
        return sums

    def is_palindromic(self) -> bool:
        n = len(self.stages)
        for i in range(n // 2 + 1):
            a, b = self.stages[i], self.stages[n - 1 - i]
            if a.target != b.target:
                return False
            if isinstance(a.coeff, float) or isinstance(b.coeff, float):
                if coeff_value(a.coeff) != coeff_value(b.coeff):
                    return False
            elif coeff_add(a.coeff, coeff_mul(Fraction(-1), b.coeff)) != Fraction(0):
                return False
        return True

    def has_commutator_stages(self) -> bool:
        return any(st.is_commutator() for st in self.stages)

    def all_exact(self) -> bool:
        return all(isinstance(st.coeff, Fraction) for st in self.stages)

    def scale(self, factor: StageCoeff) -> "Scheme":
        """The scheme with x replaced by factor*x (commutators pick up factor^x_power)."""
        return Scheme(self.slots, tuple(st.scaled(factor) for st in self.stages),
                      self.claimed_order, self.symmetric)

    # -- series view ----------------------------------------------------
    def ncalg_stages(self, exact: bool = True):
        """Stage list for the series algebra; floats become exact binary rationals.

        Symbolic coefficients are evaluated in rational arithmetic at the
        binary-exact values of their constants, so merged and unmerged stage
        lists produce bit-identical series.
        """
        out = []
        for st in self.stages:
            coeff = st.coeff
            if isinstance(coeff, SymCoeff):
                point = {n: Fraction(_CONSTANTS[n].value) for n in coeff.poly.variables()}
                coeff = Fraction(coeff.poly.evaluate(point))
            elif isinstance(coeff, float):
                coeff = Fraction(coeff)
            if st.is_commutator():
                gen = LieCombination.from_bracket(st.target.tree, self.slots)
                out.append((gen, coeff))
            else:
                out.append((self.slots[st.target], coeff))
        return out

    def log_series(self, order: int) -> NcSeries:
        return product_log(self.ncalg_stages(), order, self.slots)

    # -- serialization ----------------------------------------------------
    def to_json(self) -> dict:
        stages = []
        constants: set[str] = set()
        for st in self.stages:
            entry: dict = {}
            if st.is_commutator():
                entry["commutator"] = st.target.to_json()
                entry["x_power"] = st.target.x_power
            else:
                entry["slot"] = st.target
            c = st.coeff
            if isinstance(c, Fraction):
                entry["coeff"] = frac_str(c)
            elif isinstance(c, SymCoeff):
                entry["coeff"] = f"{c.value:.17g}"
                entry["coeff_poly"] = c.poly.to_json()
                constants |= c.poly.variables()
            else:
                entry["coeff"] = f"{c:.17g}"
            stages.append(entry)
        doc = {
            "slots": list(self.slots),
            "order": self.claimed_order,
            "symmetric": self.symmetric,
            "stages": stages,
        }
        if self.name:
            doc["name"] = self.name
        if constants:
            doc["constants"] = {
                n: {"poly": [frac_str(c) for c in _CONSTANTS[n].poly_coeffs],
                    "decimal": _CONSTANTS[n].decimal,
                    "bracket": [frac_str(_CONSTANTS[n].lo), frac_str(_CONSTANTS[n].hi)]}
                for n in sorted(constants)
            }
        return doc

    @classmethod
    def from_json(cls, doc: dict) -> "Scheme":
        for n, spec in (doc.get("constants") or {}).items():
            if n not in _CONSTANTS:
                _CONSTANTS[n] = AlgebraicConstant(
                    n, [parse_frac(c) for c in spec["poly"]],
                    parse_frac(spec["bracket"][0]), parse_frac(spec["bracket"][1]))
        stages = []
        for entry in doc["stages"]:
            raw = entry["coeff"]
            if "coeff_poly" in entry:
                coeff: StageCoeff = SymCoeff(RationalPoly.from_json(entry["coeff_poly"]))
            elif "/" in raw or ("." not in raw and "e" not in raw and "E" not in raw):
                coeff = parse_frac(raw)
            else:
                coeff = float(raw)
            if "commutator" in entry:
                target: Union[int, CommutatorSpec] = CommutatorSpec.from_json(
                    entry["commutator"], int(entry["x_power"]))
            else:
                target = int(entry["slot"])
            stages.append(Stage(target, coeff))
        return cls(tuple(doc["slots"]), tuple(stages), int(doc["order"]),
                   bool(doc["symmetric"]), name=doc.get("name", ""))


# ---------------------------------------------------------------------------
# Composition
# ---------------------------------------------------------------------------

def merge_adjacent(stages: Sequence[Stage]) -> tuple[Stage, ...]:
    """Merge neighboring exponentials of the same slot (not commutators)."""
    merged: list[Stage] = []
    for st in stages:
        if (merged and not st.is_commutator() and not merged[-1].is_commutator()
                and merged[-1].target == st.target):
            merged[-1] = Stage(st.target, coeff_add(merged[-1].coeff, st.coeff))
        else:
            merged.append(st)
    return tuple(st for st in merged
                 if st.is_commutator() or not _coeff_is_zero(st.coeff))


def _coeff_is_zero(c: StageCoeff) -> bool:
    if isinstance(c, Fraction):
        return c == 0
    if isinstance(c, SymCoeff):
        return c.poly.is_zero()
    return c == 0.0


def compose(base: Scheme, factors: Sequence[StageCoeff], order: int,
            name: str = "") -> Scheme:
    """Flattened product base(f1 x) base(f2 x) ... with same-slot merging."""
    raw: list[Stage] = []
    for f in factors:
        raw.extend(base.scale(f).stages)
    merged = merge_adjacent(raw)
    symmetric = list(factors) == list(reversed(list(factors))) and base.symmetric
    return Scheme(base.slots, merged, order, symmetric, name=name,
                  unmerged=tuple(raw))


# ---------------------------------------------------------------------------
# Named constructions
# ---------------------------------------------------------------------------

def trotter() -> Scheme:
    return Scheme(("A", "B"), (Stage(0, Fraction(1)), Stage(1, Fraction(1))),
                  claimed_order=1, symmetric=False, name="trotter")


def strang() -> Scheme:
    return Scheme(("A", "B"),
                  (Stage(0, Fraction(1, 2)), Stage(1, Fraction(1)), Stage(0, Fraction(1, 2))),
                  claimed_order=2, symmetric=True, name="strang")


def triple_jump(base: Scheme) -> Scheme:
    """Promote a symmetric order-2k scheme by the three-copy composition."""
    if not base.symmetric:
        raise ValueError("triple jump requires a symmetric base scheme")
    if base.claimed_order % 2:
        raise ValueError("triple jump requires an even-order base scheme")
    s = SymCoeff.of(fractal_constant("triple", base.claimed_order))
    middle = coeff_add(Fraction(1), coeff_mul(Fraction(-2), s))
    name = f"triple_jump({base.name})" if base.name else ""
    return compose(base, [s, middle, s], base.claimed_order + 2, name=name)


def quintuple(base: Scheme) -> Scheme:
    """Promote a symmetric order-2k scheme by the five-copy composition."""
    if not base.symmetric:
        raise ValueError("quintuple composition requires a symmetric base scheme")
    if base.claimed_order % 2:
        raise ValueError("quintuple composition requires an even-order base scheme")
    s = SymCoeff.of(fractal_constant("quintuple", base.claimed_order))
    middle = coeff_add(Fraction(1), coeff_mul(Fraction(-4), s))
    name = f"quintuple({base.name})" if base.name else ""
    return compose(base, [s, s, middle, s, s], base.claimed_order + 2, name=name)


def suzuki4() -> Scheme:
    sch = quintuple(strang())
    return Scheme(sch.slots, sch.stages, sch.claimed_order, sch.symmetric,
                  name="suzuki4", unmerged=sch.unmerged)


def suzuki6() -> Scheme:
    sch = quintuple(suzuki4())
    return Scheme(sch.slots, sch.stages, sch.claimed_order, sch.symmetric,
                  name="suzuki6", unmerged=sch.unmerged)


def suzuki8() -> Scheme:
    sch = quintuple(suzuki6())
    return Scheme(sch.slots, sch.stages, sch.claimed_order, sch.symmetric,
                  name="suzuki8", unmerged=sch.unmerged)


def ruth() -> Scheme:
    return Scheme(
        ("A", "B"),
        (Stage(0, Fraction(7, 24)), Stage(1, Fraction(2, 3)),
         Stage(0, Fraction(3, 4)), Stage(1, Fraction(-2, 3)),
         Stage(0, Fraction(-1, 24)), Stage(1, Fraction(1))),
        claimed_order=3, symmetric=False, name="ruth")


def hybrid_second() -> Scheme:
    """Trotter step with a trailing commutator exponential killing the x^2 term."""
    comm = CommutatorSpec(("A", "B"), x_power=2)
    return Scheme(("A", "B"),
                  (Stage(0, Fraction(1)), Stage(1, Fraction(1)), Stage(comm, Fraction(-1, 2))),
                  claimed_order=2, symmetric=False, name="hybrid_second")


def hybrid_fourth() -> Scheme:
    """Fourth-order product with nested-commutator end caps.

    The interior is the symmetric A-B-A / B-A-B / A-B-A sandwich at a third
    of the step each; the caps carry (1/432) x^3 [B,[A,B]].
    """
    comm = CommutatorSpec(("B", ("A", "B")), x_power=3)
    cap = Stage(comm, Fraction(1, 432))
    third = Fraction(1, 3)
    sandwich_a = (Stage(0, third / 2), Stage(1, third), Stage(0, third / 2))
    sandwich_b = (Stage(1, third / 2), Stage(0, third), Stage(1, third / 2))
    inner = merge_adjacent(sandwich_a + sandwich_b + sandwich_a)
    return Scheme(("A", "B"), (cap,) + inner + (cap,),
                  claimed_order=4, symmetric=True, name="hybrid_fourth",
                  unmerged=(cap,) + sandwich_a + sandwich_b + sandwich_a + (cap,))


def strang3() -> Scheme:
    """Symmetric second-order splitting over three slots T, A, B."""
    return Scheme(("A", "B", "T"),
                  (Stage(2, Fraction(1, 2)), Stage(0, Fraction(1, 2)),
                   Stage(1, Fraction(1)),
                   Stage(0, Fraction(1, 2)), Stage(2, Fraction(1, 2))),
                  claimed_order=2, symmetric=True, name="timeordered2")


def timeordered1() -> Scheme:
    return Scheme(("A", "B", "T"),
                  (Stage(0, Fraction(1)), Stage(1, Fraction(1)), Stage(2, Fraction(1))),
                  claimed_order=1, symmetric=False, name="timeordered1")


def timeordered2() -> Scheme:
    return strang3()


def timeordered4() -> Scheme:
    sch = quintuple(strang3())
    return Scheme(sch.slots, sch.stages, sch.claimed_order, sch.symmetric,
                  name="timeordered4", unmerged=sch.unmerged)


def has_negative_coefficient(s: Scheme) -> bool:
    """True iff any non-commutator stage coefficient is negative."""
    return any(coeff_value(st.coeff) < 0
               for st in s.stages if not st.is_commutator())


def catalog() -> dict[str, Scheme]:
    return {
        "trotter": trotter(),
        "strang": strang(),
        "triple_jump4": triple_jump(strang()),
        "suzuki4": suzuki4(),
        "suzuki6": suzuki6(),
        "suzuki8": suzuki8(),
        "ruth": ruth(),
        "hybrid_second": hybrid_second(),
        "hybrid_fourth": hybrid_fourth(),
        "timeordered1": timeordered1(),
        "timeordered2": timeordered2(),
        "timeordered4": timeordered4(),
    }


def load_catalog_file() -> dict[str, Scheme]:
    """The shipped catalog of named constructions."""
    from importlib.resources import files

    doc = json.loads(files("expprod").joinpath("data/catalog.json").read_text())
    return {name: Scheme.from_json(entry) for name, entry in doc.items()}


# ---------------------------------------------------------------------------
# Shift-time evaluation
# ---------------------------------------------------------------------------

def evaluation_offsets(s: Scheme) -> list[tuple[str, StageCoeff, StageCoeff]]:
    """Expand a scheme with a T slot into (slot, coeff, tau) records.

    The stage list is scanned right to left (application order); tau
    accumulates the T coefficients already passed, exactly.  T stages are
    consumed, the rest are emitted with their offsets.
    """
    if "T" not in s.slots:
        raise ValueError("scheme has no shift-time slot")
    t_index = s.slots.index("T")
    tsum = Fraction(0)
    for st in s.stages:
        if not st.is_commutator() and st.target == t_index:
            tsum = coeff_add(tsum, st.coeff)
    if isinstance(tsum, float):
        if abs(tsum - 1.0) > 1e-12:
            raise ValueError("T-stage coefficients must sum to 1")
    elif tsum != Fraction(1):
        raise ValueError("T-stage coefficients must sum to 1")
    out: list[tuple[str, StageCoeff, StageCoeff]] = []
    tau: StageCoeff = Fraction(0)
    for st in reversed(s.stages):
        if st.is_commutator():
            raise ValueError("commutator stages are not supported with a T slot")
        if st.target == t_index:
            tau = coeff_add(tau, st.coeff)
        else:
            out.append((s.slots[st.target], st.coeff, tau))
    return out


def evaluation_times(s: Scheme, t: float, dt: float) -> list[tuple[str, float, float]]:
    """Numeric (slot, coeff, eval_time) records, emitted in application order."""
    return [(lab, coeff_value(c), t + coeff_value(tau) * dt)
            for lab, c, tau in evaluation_offsets(s)]
