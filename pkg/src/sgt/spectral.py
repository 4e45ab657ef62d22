"""Filtration by word length, the Dirac spectrum, and zeta functions.

The projection onto the span ``A_n`` of depth-``n`` cylinder indicators is
the conditional expectation onto depth-``n`` cylinders, so the partial
traces of a locally constant symbol ``a`` are cylinder averages::

    T_n(a) = sum_{|w| = n} (integral of a over cyl(w)) / nu(cyl(w))

and the detail coefficients are ``c_n(a) = T_n(a) - T_{n-1}(a)``. An
explicit Gram-Schmidt basis gives the same numbers and is kept as an
independent route.
"""

from __future__ import annotations

import math
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number
from typing import Iterable, Mapping, Sequence

import mpmath
import numpy as np

from .boundary import reduced_words
from .covering import CylinderMeasure
from .errors import AmbiguousGenus, PoleError

__all__ = [
    "Symbol",
    "Filtration",
    "DiracSpectrum",
    "filtration_dims",
    "dirac_eigenvalue",
    "dirac_spectrum",
    "filtration",
    "cylinder_traces",
    "detail_coefficients",
    "gram_schmidt_basis",
    "gram_schmidt_coefficients",
    "zeta_eval",
    "zeta_tail_bound",
    "zeta_one_closed",
    "genus_from_zeta",
    "summability_partial_sums",
    "CONVERGENCE_ABSCISSA",
    "MEASURE_FLOOR",
]

CONVERGENCE_ABSCISSA = -1.0 / 3.0
MEASURE_FLOOR = 1e-12
_EPS = sys.float_info.epsilon


def filtration_dims(g: int, n: int) -> int:
    """``dim A_n``: 1 for ``n = 0``, else ``2g (2g-1)**(n-1)``."""
    if g < 2 or n < 0:
        raise ValueError("need g >= 2 and n >= 0")
    return 1 if n == 0 else 2 * g * (2 * g - 1) ** (n - 1)


def dirac_eigenvalue(g: int, n: int) -> int:
    return filtration_dims(g, n) ** 3


def _multiplicity(g: int, n: int) -> int:
    return filtration_dims(g, n) - (filtration_dims(g, n - 1) if n else 0)


@dataclass(frozen=True)
class DiracSpectrum:
    g: int
    eigenvalues: tuple[int, ...]
    multiplicities: tuple[int, ...]


def dirac_spectrum(g: int, N: int) -> DiracSpectrum:
    return DiracSpectrum(g, tuple(dirac_eigenvalue(g, n) for n in range(N + 1)),
                         tuple(_multiplicity(g, n) for n in range(N + 1)))


@dataclass(frozen=True)
class Filtration:
    g: int
    N: int
    dims: tuple[int, ...]
    measure: CylinderMeasure | None = None


def filtration(g: int, N: int, measure: CylinderMeasure | None = None) -> Filtration:
    return Filtration(g, N, tuple(filtration_dims(g, n) for n in range(N + 1)), measure)


# --- symbols ---------------------------------------------------------------

class Symbol:
    """Finite linear combination of free-group cylinder indicators.

    ``Symbol({(): 1})`` is the unit; ``Symbol({(1, -2): 0.5})`` is half the
    indicator of ``cyl(x1 x2^-1)``.
    """

    def __init__(self, terms: Mapping[Sequence[int], Number] | None = None):
        self.terms: dict[tuple[int, ...], Number] = {}
        for w, c in (terms or {}).items():
            w = tuple(w)
            if any(a == -b for a, b in zip(w, w[1:])):
                raise ValueError(f"word {list(w)} is not reduced")
            if c:
                self.terms[w] = self.terms.get(w, 0) + c

    @classmethod
    def one(cls) -> "Symbol":
        return cls({(): 1})

    @classmethod
    def cylinder(cls, word: Sequence[int]) -> "Symbol":
        return cls({tuple(word): 1})

    _TERM = re.compile(r"^(?:([-+0-9./eE]+)\*)?(1|cyl\(([-0-9, ]*)\))$")

    @classmethod
    def parse(cls, text: str) -> "Symbol":
        """Parse ``"1"``, ``"cyl(1,-2)"``, ``"0.5*cyl(1)+2*cyl(2,1)"`` and the like."""
        terms: dict[tuple[int, ...], Number] = {}
        for part in re.split(r"\+(?![^()]*\))", text.replace(" ", "")):
            m = cls._TERM.match(part)
            if not m:
                raise ValueError(f"cannot parse symbol term {part!r}")
            coef = Fraction(m.group(1)) if m.group(1) else 1
            if isinstance(coef, Fraction) and coef.denominator == 1:
                coef = int(coef)
            word = () if m.group(2) == "1" else tuple(int(x) for x in m.group(3).split(",") if x)
            terms[word] = terms.get(word, 0) + coef
        return cls(terms)

    def __add__(self, other: "Symbol") -> "Symbol":
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return Symbol(out)

    def __mul__(self, k: Number) -> "Symbol":
        return Symbol({w: k * c for w, c in self.terms.items()})

    __rmul__ = __mul__

    @property
    def depth(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def value(self, word: Sequence[int]):
        """Value on ``cyl(word)``; ``word`` must be at least as deep as the symbol."""
        word = tuple(word)
        if len(word) < self.depth:
            raise ValueError("symbol is not constant on cylinders this coarse")
        return sum(c for w, c in self.terms.items() if word[: len(w)] == w)

    def sup_norm(self, g: int) -> float:
        return max(abs(self.value(w)) for w in reduced_words(g, self.depth, exact=True))

    def ident(self) -> str:
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            c = self.terms[w]
            body = "1" if not w else "cyl(" + ",".join(map(str, w)) + ")"
            parts.append(body if c == 1 else f"{c}*{body}")
        return "+".join(parts) or "0"

    def __repr__(self):
        return f"Symbol({self.ident()!r})"


def _extensions(g: int, n: int, w: tuple[int, ...]) -> int:
    """Number of reduced words of length ``n`` extending ``w``."""
    if n < len(w):
        raise ValueError
    if not w:
        return filtration_dims(g, n)
    return (2 * g - 1) ** (n - len(w))


def cylinder_traces(a: Symbol, nu: CylinderMeasure | None, g: int, N: int) -> list:
    """Partial traces ``T_0 .. T_N`` of ``a`` (cylinder averages)."""
    out = []
    for n in range(N + 1):
        if n >= a.depth:
            out.append(sum(c * _extensions(g, n, w) for w, c in a.terms.items()))
            continue
        if nu is None or nu.depth < a.depth:
            raise ValueError(f"measure of depth >= {a.depth} required for this symbol")
        total = 0.0
        for u in reduced_words(g, n, exact=True):
            mass = nu[u]
            if mass < MEASURE_FLOOR:
                raise ValueError(f"degenerate measure: nu(cyl({list(u)})) = {mass:.3g}")
            integral = 0.0
            for w, c in a.terms.items():
                if w[: n] == u:  # cyl(w) inside cyl(u)
                    integral += float(c) * nu[w]
                elif u[: len(w)] == w:  # cyl(u) inside cyl(w)
                    integral += float(c) * mass
            total += integral / mass
        out.append(total)
    return out


def detail_coefficients(a: Symbol, nu: CylinderMeasure | None, N: int, g: int | None = None) -> list:
    """``c_0 .. c_N`` of the symbol under the pulled-back measure ``nu``.

    Levels at or beyond the symbol's depth are pure counting and stay exact
    for integer or rational coefficients (so ``c_n(1)`` are the integer
    multiplicities); shallower levels are floats.
    """
    g = g if g is not None else _genus_of(nu)
    T = cylinder_traces(a, nu, g, N)
    return [T[0]] + [T[n] - T[n - 1] for n in range(1, N + 1)]


def _genus_of(nu: CylinderMeasure | None) -> int:
    if nu is None:
        raise ValueError("pass g when no measure is given")
    return sum(1 for w in nu.masses if len(w) == 1) // 2


def gram_schmidt_basis(nu: CylinderMeasure, N: int, rtol: float = 1e-8) -> tuple:
    """Orthonormal basis of ``A_N`` built level by level from cylinder indicators.

    Functions constant on depth-``N`` cylinders are vectors over those
    cylinders with inner product weighted by ``nu``. Indicators of each level
    are orthogonalized against everything kept so far (two passes of modified
    Gram-Schmidt); residuals below ``rtol`` times the original norm are
    linearly dependent and dropped. Returns ``(leaves, weight, levels)`` with
    ``levels[n]`` the array of new basis vectors of level ``n`` (one per row).
    """
    g = _genus_of(nu)
    if nu.depth < N:
        raise ValueError(f"measure of depth >= {N} required")
    leaves = reduced_words(g, N, exact=True)
    weight = np.array([nu[u] for u in leaves])
    if np.any(weight < MEASURE_FLOOR):
        raise ValueError("degenerate measure")

    def dot(x, y):
        return float(np.sum(weight * x * y))

    basis: list[np.ndarray] = []
    levels = []
    for n in range(N + 1):
        new = []
        for w in reduced_words(g, n, exact=True):
            vec = np.array([1.0 if u[:n] == w else 0.0 for u in leaves])
            norm0 = math.sqrt(dot(vec, vec))
            for _ in range(2):
                for q in basis + new:
                    vec = vec - dot(q, vec) * q
            norm = math.sqrt(dot(vec, vec))
            if norm > rtol * norm0:
                new.append(vec / norm)
        if len(new) != _multiplicity(g, n):
            raise ArithmeticError(f"level {n}: {len(new)} new basis vectors, "
                                  f"expected {_multiplicity(g, n)}")
        levels.append(np.array(new))
        basis.extend(new)
    return leaves, weight, levels


def gram_schmidt_coefficients(a: Symbol, nu: CylinderMeasure, N: int, rtol: float = 1e-8,
                              basis: tuple | None = None) -> list[float]:
    """``c_0 .. c_N`` as ``sum <q, a q>`` over the level-``n`` vectors of an explicit basis.

    ``basis`` may be a precomputed :func:`gram_schmidt_basis` of depth at
    least ``max(N, depth(a))``, shared between symbols.
    """
    D = max(N, a.depth)
    if basis is None or len(basis[2]) <= D:
        basis = gram_schmidt_basis(nu, D, rtol)
    leaves, weight, levels = basis
    avals = np.array([float(a.value(u)) for u in leaves])
    return [float(np.sum(weight * avals * Q * Q)) for Q in levels[: N + 1]]


# --- zeta functions --------------------------------------------------------

def zeta_tail_bound(g: int, s: float, N: int) -> float:
    """``sum_{n > N} lambda_n**s (dim A_n - dim A_{n-1})`` in closed form (N >= 1)."""
    q = (2 * g - 1) ** (3 * s + 1)
    if not q < 1:
        raise ValueError("tail diverges for s >= -1/3")
    return (2 * g) ** (3 * s + 1) * (2 * g - 2) / (2 * g - 1) * q ** N / (1 - q)


def zeta_eval(a: Symbol, nu: CylinderMeasure | None, s: float, N: int = 25,
              g: int | None = None) -> tuple[float, float]:
    """Truncated ``sum_n lambda_n**s c_n(a)`` and an error bound.

    The bound is ``sup|a|`` times the closed-form spectral tail beyond ``N``
    plus a floating-point allowance of ``16 eps`` times the sum of absolute
    terms. Only real ``s < -1/3`` is accepted.
    """
    s = float(s)
    if not s < CONVERGENCE_ABSCISSA:
        raise ValueError(f"series evaluation needs s < -1/3, got {s}")
    if N < 1:
        raise ValueError("N must be >= 1")
    g = g if g is not None else _genus_of(nu)
    c = detail_coefficients(a, nu, N, g)
    terms = [math.exp(3 * s * math.log(filtration_dims(g, n))) * float(cn) for n, cn in enumerate(c)]
    value = math.fsum(terms)
    bound = float(a.sup_norm(g)) * zeta_tail_bound(g, s, N) + 16 * _EPS * math.fsum(map(abs, terms))
    return value, bound


def zeta_one_closed(g: int, s):
    """``1 + (2g)**(3s) (2g-1) (1 - (2g-1)**(3s-1)) / (1 - (2g-1)**(3s+1))``.

    Works for real, complex and mpmath arguments; this is the meromorphic
    continuation of the unit's zeta function, with poles where
    ``(2g-1)**(3s+1) = 1``.
    """
    q = (2 * g - 1) ** (3 * s + 1)
    if abs(1 - q) < 1e-15:
        raise PoleError(f"pole of the unit zeta function at s = {s}")
    return 1 + (2 * g) ** (3 * s) * (2 * g - 1) * (1 - (2 * g - 1) ** (3 * s - 1)) / (1 - q)


def genus_from_zeta(samples: Iterable[tuple], g_max: int = 64, dps: int = 60,
                    accept: float = 1e-6, reject: float = 1e-3) -> int:
    """Recover the genus from samples ``(s, zeta_1(s))`` with ``s <= -5``.

    Deviations are measured relative to the correction term
    ``zeta_1(s) - 1`` of each candidate, the only part that carries ``g``
    this far left. The best candidate must deviate by less than ``accept``
    and every other by more than ``reject``. Values may be mpmath numbers
    when double precision cannot hold the correction.
    """
    samples = list(samples)
    ss = [s for s, _ in samples]
    if len(samples) < 2 or len(set(ss)) != len(ss) or any(s > -5 for s in ss):
        raise ValueError("need at least two samples at distinct s <= -5")
    with mpmath.workdps(dps):
        pts = [(mpmath.mpf(s), mpmath.mpf(z)) for s, z in samples]
        devs = []
        for g in range(2, g_max + 1):
            worst = max(abs(z - zeta_one_closed(g, s)) / abs(zeta_one_closed(g, s) - 1) for s, z in pts)
            devs.append((float(worst), g))
    devs.sort()
    (best, g), (second, _) = devs[0], devs[1]
    if not (best < accept and second > reject):
        raise AmbiguousGenus(f"no genus fits cleanly (best deviation {best:.3g}, runner-up {second:.3g})")
    return g


def summability_partial_sums(g: int, N: int) -> list[float]:
    """Partial sums of ``sum_n (1 + lambda_n**2)**(-1/2) (dim A_n - dim A_{n-1})``."""
    out, acc = [], 0.0
    for n in range(N + 1):
        lam = float(dirac_eigenvalue(g, n))
        acc += _multiplicity(g, n) / math.sqrt(1 + lam * lam)
        out.append(acc)
    return out
