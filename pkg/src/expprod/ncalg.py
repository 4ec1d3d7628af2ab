"""Exact algebra of truncated power series in noncommuting generators.

A series lives in the free associative algebra on a small alphabet,
truncated at a fixed total degree.  Each generator letter carries one
power of the expansion parameter, so the degree of a word is the power
of x it multiplies.  Coefficients are exact rationals, promoted to
polynomials over named parameters when symbolic stage coefficients are
in play.

The module provides the series product/log/exp, products of stage
exponentials, and the rewrite of homogeneous Lie elements into the
Lyndon basis of the free Lie algebra.  A handful of dense-matrix
utilities (commutator powers, the directional derivative of expm)
back the numeric identities exercised by the tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

import numpy as np
import scipy.linalg

from .poly import Coeff, RationalPoly, as_exact, coeff_from_json, coeff_to_json

Word = tuple[int, ...]


class NotLieElementError(ValueError):
    """Raised when a series component is not an element of the free Lie algebra."""


@dataclass(frozen=True)
class Generator:
    """A single letter of the algebra's alphabet."""

    id: int
    label: str


def generators(labels: Sequence[str]) -> tuple[Generator, ...]:
    return tuple(Generator(i, lab) for i, lab in enumerate(labels))


def _czero(c) -> bool:
    if isinstance(c, RationalPoly):
        return c.is_zero()
    return c == 0


class NcSeries:
    """Truncated series: map from words to exact coefficients.

    Instances are treated as immutable; all operations return new series.
    """

    __slots__ = ("order", "labels", "terms")

    def __init__(self, order: int, labels: Sequence[str],
                 terms: Mapping[Word, Coeff] | None = None):
        if order < 1:
            raise ValueError("truncation order must be >= 1")
        object.__setattr__(self, "order", int(order))
        object.__setattr__(self, "labels", tuple(labels))
        clean: dict[Word, Coeff] = {}
        for word, c in (terms or {}).items():
            if len(word) > order:
                continue
            c = as_exact(c)
            if not _czero(c):
                clean[tuple(word)] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover - immutability guard
        raise AttributeError("NcSeries is immutable")

    @classmethod
    def identity(cls, order: int, labels: Sequence[str]) -> "NcSeries":
        return cls(order, labels, {(): Fraction(1)})

    @classmethod
    def zero(cls, order: int, labels: Sequence[str]) -> "NcSeries":
        return cls(order, labels, {})

    # -- inspection ----------------------------------------------------
    def constant_term(self) -> Coeff:
        return self.terms.get((), Fraction(0))

    def coefficient(self, word: Iterable[int]) -> Coeff:
        return self.terms.get(tuple(word), Fraction(0))

    def homogeneous(self, degree: int) -> dict[Word, Coeff]:
        return {w: c for w, c in self.terms.items() if len(w) == degree}

    def max_degree(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def min_degree(self) -> int:
        return min((len(w) for w in self.terms), default=0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, NcSeries):
            return NotImplemented
        return (self.order == other.order and self.labels == other.labels
                and self.terms == other.terms)

    def __hash__(self):
        return hash((self.order, self.labels, frozenset(self.terms.items())))

    # -- linear structure ------------------------------------------------
    def _compatible(self, other: "NcSeries") -> None:
        if self.labels != other.labels:
            raise ValueError("series over different generator alphabets")
        if self.order != other.order:
            raise ValueError("series with mismatched truncation orders")

    def __add__(self, other: "NcSeries") -> "NcSeries":
        self._compatible(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = out.get(w, Fraction(0)) + c
            s = as_exact(s)
            if _czero(s):
                out.pop(w, None)
            else:
                out[w] = s
        return NcSeries(self.order, self.labels, out)

    def __sub__(self, other: "NcSeries") -> "NcSeries":
        return self + other.scale(Fraction(-1))

    def scale(self, c) -> "NcSeries":
        c = as_exact(c)
        if _czero(c):
            return NcSeries.zero(self.order, self.labels)
        return NcSeries(self.order, self.labels,
                        {w: as_exact(v * c) for w, v in self.terms.items()})

    def __mul__(self, other: "NcSeries") -> "NcSeries":
        return series_mul(self, other)

    def __repr__(self) -> str:
        if not self.terms:
            return "<0>"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            name = "".join(self.labels[i] for i in w) or "I"
            parts.append(f"{self.terms[w]!s}*{name}")
        return " + ".join(parts)

    # -- serialization -----------------------------------------------------
    def to_json(self) -> dict:
        words = sorted(self.terms, key=lambda w: (len(w), w))
        return {
            "order": self.order,
            "generators": list(self.labels),
            "terms": [{"word": list(w), "coeff": coeff_to_json(self.terms[w])}
                      for w in words],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "NcSeries":
        terms = {tuple(int(i) for i in entry["word"]): coeff_from_json(entry["coeff"])
                 for entry in doc["terms"]}
        return cls(int(doc["order"]), tuple(doc["generators"]), terms)


def series_mul(a: NcSeries, b: NcSeries) -> NcSeries:
    """Word-concatenation product truncated at the common order."""
    a._compatible(b)
    order = a.order
    out: dict[Word, Coeff] = {}
    for w1, c1 in a.terms.items():
        room = order - len(w1)
        for w2, c2 in b.terms.items():
            if len(w2) > room:
                continue
            w = w1 + w2
            s = out.get(w, Fraction(0)) + c1 * c2
            s = as_exact(s)
            if _czero(s):
                out.pop(w, None)
            else:
                out[w] = s
    return NcSeries(order, a.labels, out)


def series_exp(elem: NcSeries) -> NcSeries:
    """exp of a series with zero constant term (truncated, exact)."""
    if not _czero(elem.constant_term()):
        raise ValueError("exp requires a series with zero constant term")
    result = NcSeries.identity(elem.order, elem.labels)
    power = NcSeries.identity(elem.order, elem.labels)
    k = 0
    while True:
        k += 1
        power = series_mul(power, elem)
        if not power.terms:
            break
        result = result + power.scale(Fraction(1, _factorial(k)))
        if k >= elem.order:
            break
    return result


def series_log(s: NcSeries) -> NcSeries:
    """Series logarithm: sum_{k>=1} (-1)^{k+1} (s - I)^k / k, truncated."""
    if as_exact(s.constant_term()) != Fraction(1):
        raise ValueError("series logarithm requires constant term exactly 1")
    u = s - NcSeries.identity(s.order, s.labels)
    result = NcSeries.zero(s.order, s.labels)
    power = NcSeries.identity(s.order, s.labels)
    for k in range(1, s.order + 1):
        power = series_mul(power, u)
        if not power.terms:
            break
        sign = Fraction(1, k) if k % 2 == 1 else Fraction(-1, k)
        result = result + power.scale(sign)
    return result


@lru_cache(maxsize=None)
def _factorial(n: int) -> int:
    out = 1
    for i in range(2, n + 1):
        out *= i
    return out


StageGen = Union[Generator, "LieCombination", str, int]


def _element_words(g: StageGen, labels: Sequence[str]) -> dict[Word, Coeff]:
    """Word expansion of a stage generator (letter or Lie combination)."""
    if isinstance(g, LieCombination):
        if tuple(labels) != g.labels:
            raise ValueError("Lie combination over a different alphabet")
        return g.word_expansion()
    if isinstance(g, Generator):
        gid = g.id
    elif isinstance(g, str):
        gid = tuple(labels).index(g)
    else:
        gid = int(g)
    if not 0 <= gid < len(labels):
        raise ValueError(f"generator id {gid} outside alphabet")
    return {(gid,): Fraction(1)}


def stage_exp(g: StageGen, coeff, order: int, labels: Sequence[str] = ("A", "B")) -> NcSeries:
    """Taylor expansion of a single stage exponential exp(c * G), truncated.

    ``G`` is a generator letter or a homogeneous Lie combination; the word
    degree carries the power of x, so ``coeff`` is the pure numeric or
    symbolic multiplier of the stage.
    """
    if order < 1:
        raise ValueError("truncation order must be >= 1")
    coeff = as_exact(coeff)
    words = _element_words(g, labels)
    elem = NcSeries(order, labels, {w: as_exact(c * coeff) for w, c in words.items()})
    return series_exp(elem)


def product_log(stages: Sequence[tuple[StageGen, object]], order: int,
                labels: Sequence[str] = ("A", "B")) -> NcSeries:
    """log of the left-to-right product of stage exponentials.

    The degree-k homogeneous component is the k-th correction term of the
    product, scaled by x^k.
    """
    if not stages:
        raise ValueError("stage list must be nonempty")
    prod = NcSeries.identity(order, labels)
    for g, c in stages:
        prod = series_mul(prod, stage_exp(g, c, order, labels))
    return series_log(prod)


def stage_product(stages: Sequence[tuple[StageGen, object]], order: int,
                  labels: Sequence[str] = ("A", "B")) -> NcSeries:
    """Left-to-right product of stage exponentials without the log."""
    prod = NcSeries.identity(order, labels)
    for g, c in stages:
        prod = series_mul(prod, stage_exp(g, c, order, labels))
    return prod


# ---------------------------------------------------------------------------
# Lyndon words and the free Lie algebra
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def lyndon_words(nletters: int, maxlen: int) -> tuple[Word, ...]:
    """All Lyndon words over 0..nletters-1 of length 1..maxlen (Duval)."""
    words: list[Word] = []
    w = [-1]
    while w:
        w[-1] += 1
        m = len(w)
        if m <= maxlen:
            words.append(tuple(w))
        while len(w) < maxlen:
            w.append(w[len(w) - m])
        while w and w[-1] == nletters - 1:
            w.pop()
    return tuple(sorted(words, key=lambda t: (len(t), t)))


@lru_cache(maxsize=None)
def standard_bracketing(word: Word):
    """Right-standard factorization tree of a Lyndon word.

    Returns a letter id for length-1 words, else a pair (left, right) of
    subtrees, splitting at the lexicographically least proper suffix.
    """
    if len(word) == 1:
        return word[0]
    best = None
    for i in range(1, len(word)):
        suffix = word[i:]
        if best is None or suffix < best[1]:
            best = (i, suffix)
    i, _ = best
    return (standard_bracketing(word[:i]), standard_bracketing(word[i:]))


def bracket_tree_words(tree) -> dict[Word, int]:
    """Integer word expansion of a nested-bracket tree over letter ids."""
    if isinstance(tree, int):
        return {(tree,): 1}
    left, right = tree
    lw = bracket_tree_words(left)
    rw = bracket_tree_words(right)
    out: dict[Word, int] = {}
    for wl, cl in lw.items():
        for wr, cr in rw.items():
            out[wl + wr] = out.get(wl + wr, 0) + cl * cr
            out[wr + wl] = out.get(wr + wl, 0) - cl * cr
    return {w: c for w, c in out.items() if c}


@lru_cache(maxsize=None)
def lyndon_bracket_expansion(word: Word) -> tuple[tuple[Word, int], ...]:
    exp = bracket_tree_words(standard_bracketing(word))
    return tuple(sorted(exp.items()))


def bracket_tree_str(tree, labels: Sequence[str]) -> str:
    if isinstance(tree, int):
        return labels[tree]
    left, right = tree
    return f"[{bracket_tree_str(left, labels)},{bracket_tree_str(right, labels)}]"


class LieCombination:
    """Element of the free Lie algebra in the Lyndon basis.

    Keys are Lyndon words; each stands for its right-standard bracketing.
    """

    __slots__ = ("labels", "terms")

    def __init__(self, labels: Sequence[str], terms: Mapping[Word, Coeff] | None = None):
        object.__setattr__(self, "labels", tuple(labels))
        nlet = len(self.labels)
        clean: dict[Word, Coeff] = {}
        lyndon_ok = set(lyndon_words(nlet, max((len(w) for w in (terms or {})), default=1)))
        for w, c in (terms or {}).items():
            w = tuple(w)
            if w not in lyndon_ok:
                raise ValueError(f"key {w} is not a Lyndon word")
            c = as_exact(c)
            if not _czero(c):
                clean[w] = c
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, *a):  # pragma: no cover
        raise AttributeError("LieCombination is immutable")

    def __eq__(self, other) -> bool:
        if not isinstance(other, LieCombination):
            return NotImplemented
        return self.labels == other.labels and self.terms == other.terms

    def __hash__(self):
        return hash((self.labels, frozenset(self.terms.items())))

    def is_zero(self) -> bool:
        return not self.terms

    def min_degree(self) -> int:
        return min((len(w) for w in self.terms), default=0)

    def homogeneous(self, degree: int) -> "LieCombination":
        return LieCombination(self.labels,
                              {w: c for w, c in self.terms.items() if len(w) == degree})

    def scale(self, c) -> "LieCombination":
        c = as_exact(c)
        return LieCombination(self.labels, {w: as_exact(v * c) for w, v in self.terms.items()})

    def __add__(self, other: "LieCombination") -> "LieCombination":
        if self.labels != other.labels:
            raise ValueError("Lie combinations over different alphabets")
        out = dict(self.terms)
        for w, c in other.terms.items():
            s = as_exact(out.get(w, Fraction(0)) + c)
            if _czero(s):
                out.pop(w, None)
            else:
                out[w] = s
        return LieCombination(self.labels, out)

    def word_expansion(self) -> dict[Word, Coeff]:
        out: dict[Word, Coeff] = {}
        for w, c in self.terms.items():
            for word, mult in lyndon_bracket_expansion(w):
                s = as_exact(out.get(word, Fraction(0)) + c * mult)
                if _czero(s):
                    out.pop(word, None)
                else:
                    out[word] = s
        return out

    def to_series(self, order: int) -> NcSeries:
        return NcSeries(order, self.labels, self.word_expansion())

    @classmethod
    def from_bracket(cls, tree, labels: Sequence[str], coeff=Fraction(1)) -> "LieCombination":
        """Build from a nested bracket over labels, e.g. ("B", ("A", "B"))."""
        def to_ids(t):
            if isinstance(t, str):
                return tuple(labels).index(t)
            if isinstance(t, int):
                return t
            left, right = t
            return (to_ids(left), to_ids(right))

        words = bracket_tree_words(to_ids(tree))
        series = NcSeries(max(len(w) for w in words), labels,
                          {w: Fraction(c) for w, c in words.items()})
        return lie_project(series).scale(coeff)

    def pretty(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            tree = standard_bracketing(w)
            name = bracket_tree_str(tree, self.labels)
            parts.append(f"{_coeff_str(self.terms[w])} {name}")
        return " + ".join(parts)

    def to_json(self) -> dict:
        words = sorted(self.terms, key=lambda w: (len(w), w))
        return {
            "order": max((len(w) for w in words), default=1),
            "generators": list(self.labels),
            "terms": [{"word": list(w), "coeff": coeff_to_json(self.terms[w])}
                      for w in words],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LieCombination":
        terms = {tuple(int(i) for i in e["word"]): coeff_from_json(e["coeff"])
                 for e in doc["terms"]}
        return cls(tuple(doc["generators"]), terms)


def _coeff_str(c) -> str:
    if isinstance(c, RationalPoly):
        return f"({c!r})"
    from .poly import frac_str
    return frac_str(c)


def lie_project(s: NcSeries) -> LieCombination:
    """Rewrite each homogeneous component of ``s`` in the Lyndon basis.

    The rewrite is the standard triangular elimination: the bracketing of a
    Lyndon word expands to that word plus lexicographically larger words of
    the same multidegree, so scanning Lyndon words in increasing order peels
    the coefficients off one by one.  A nonzero residual means the input was
    not a Lie element.
    """
    if not _czero(s.constant_term()):
        raise ValueError("lie_project requires zero constant term")
    nlet = len(s.labels)
    result: dict[Word, Coeff] = {}
    for degree in range(1, s.order + 1):
        component = dict(s.homogeneous(degree))
        if not component:
            continue
        for lw in lyndon_words(nlet, degree):
            if len(lw) != degree:
                continue
            c = component.get(lw)
            if c is None or _czero(c):
                continue
            result[lw] = c
            for word, mult in lyndon_bracket_expansion(lw):
                v = as_exact(component.get(word, Fraction(0)) - c * mult)
                if _czero(v):
                    component.pop(word, None)
                else:
                    component[word] = v
        leftovers = {w: c for w, c in component.items() if not _czero(c)}
        if leftovers:
            raise NotLieElementError(
                f"degree-{degree} component has non-Lie residual on words "
                f"{sorted(leftovers)[:4]}")
    return LieCombination(s.labels, result)


# ---------------------------------------------------------------------------
# Dense-matrix operator calculus
# ---------------------------------------------------------------------------

def commutator(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return x @ y - y @ x


def delta_power(a: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    """n-fold application of the inner derivation X -> [A, X]."""
    out = np.asarray(x)
    for _ in range(n):
        out = commutator(a, out)
    return out


def left_minus_ad_power(a: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    """Apply (L_A - delta_A)^n to X, expanded as a binomial of hyperoperators.

    Left multiplication commutes with its own inner derivation, so the
    binomial theorem applies term by term.
    """
    from math import comb

    out = np.zeros_like(np.asarray(x, dtype=complex))
    apow = np.eye(a.shape[0], dtype=complex)
    apowers = [apow]
    for _ in range(n):
        apowers.append(apowers[-1] @ a)
    for k in range(n + 1):
        term = apowers[n - k] @ delta_power(a, x, k)
        out = out + (-1) ** k * comb(n, k) * term
    return out


def conjugation_series(a: np.ndarray, b: np.ndarray, x: float, kmax: int = 12) -> np.ndarray:
    """Truncated expansion sum_k x^k delta_A^k B / k!."""
    out = np.zeros_like(np.asarray(b, dtype=complex))
    term = np.asarray(b, dtype=complex)
    out += term
    for k in range(1, kmax + 1):
        term = commutator(a, term) * (x / k)
        out = out + term
    return out


def frechet_exp(a: np.ndarray, da: np.ndarray) -> np.ndarray:
    """Directional derivative of the matrix exponential at A along dA.

    Computed by the doubled-dimension block trick: expm([[A, dA], [0, A]])
    carries the derivative in its upper-right block.
    """
    a = np.asarray(a)
    da = np.asarray(da)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("A must be a square matrix")
    if a.shape != da.shape:
        raise ValueError("A and dA must have identical shapes")
    n = a.shape[0]
    dtype = np.result_type(a.dtype, da.dtype, float)
    block = np.zeros((2 * n, 2 * n), dtype=dtype)
    block[:n, :n] = a
    block[:n, n:] = da
    block[n:, n:] = a
    return scipy.linalg.expm(block)[:n, n:]
