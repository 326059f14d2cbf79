"""Exact rational geometry inside the unit cube.

Affine forms with rational coefficients, polytopes given by ``form <= 0``
constraints (the cube bounds ``0 <= x_i <= 1`` are always implicit), an
exact two-phase simplex with Bland's rule, interior-point computation via
a uniform-slack program, and sign-branching cell enumeration for finite
form families.  Everything is deterministic and float-free.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd, lcm
from typing import Iterable, Sequence, Union

try:  # gmpy2 rationals make simplex pivots several times faster
    from gmpy2 import mpq as _fastq
except ImportError:  # pragma: no cover
    _fastq = Fraction

from .errors import DomainError

Rational = Union[int, Fraction]

_F0 = Fraction(0)
_F1 = Fraction(1)

SIGN_LE = "<="
SIGN_GE = ">="


def _as_fraction(x: Rational) -> Fraction:
    if isinstance(x, bool) or not isinstance(x, (int, Fraction)):
        raise DomainError(f"exact rational required, got {x!r}")
    return Fraction(x)


def clamp01(value: Fraction) -> Fraction:
    """median(0, value, 1)"""
    if value < 0:
        return _F0
    if value > 1:
        return _F1
    return value


@dataclass(frozen=True)
class AffineForm:
    """constant + sum(coeffs[i] * x_{i+1}); exact rational entries."""

    constant: Fraction
    coeffs: tuple[Fraction, ...]

    @property
    def arity(self) -> int:
        return len(self.coeffs)

    @property
    def is_constant(self) -> bool:
        return not any(self.coeffs)

    @property
    def is_integral(self) -> bool:
        return self.constant.denominator == 1 and all(
            c.denominator == 1 for c in self.coeffs
        )

    def evaluate(self, point: Sequence[Fraction]) -> Fraction:
        if len(point) != len(self.coeffs):
            raise DomainError(
                f"form has arity {len(self.coeffs)}, point has {len(point)}"
            )
        return self.constant + sum(
            (c * p for c, p in zip(self.coeffs, point)), _F0
        )

    def __add__(self, other: "AffineForm") -> "AffineForm":
        if len(other.coeffs) != len(self.coeffs):
            raise DomainError("arity mismatch in form addition")
        return AffineForm(
            self.constant + other.constant,
            tuple(a + b for a, b in zip(self.coeffs, other.coeffs)),
        )

    def __sub__(self, other: "AffineForm") -> "AffineForm":
        return self + other.negated()

    def negated(self) -> "AffineForm":
        return AffineForm(-self.constant, tuple(-c for c in self.coeffs))

    def shifted(self, delta: Rational) -> "AffineForm":
        return AffineForm(self.constant + Fraction(delta), self.coeffs)

    def bounds(self) -> tuple[Fraction, Fraction]:
        """Exact (min, max) of the form over the whole unit cube."""
        lo = self.constant + sum((c for c in self.coeffs if c < 0), _F0)
        hi = self.constant + sum((c for c in self.coeffs if c > 0), _F0)
        return lo, hi

    def halfspace(self) -> tuple[tuple[Fraction, ...], Fraction]:
        """(d, beta) with d the positive-primitive integer direction such
        that {self <= 0} equals {d.x <= beta}.  Requires a non-constant
        form (positive rescaling preserves the half-space)."""
        scale = Fraction(lcm(*(c.denominator for c in self.coeffs)))
        ints = [int(c * scale) for c in self.coeffs]
        g = gcd(*ints)
        if g == 0:
            raise DomainError("constant form has no direction")
        lam = Fraction(g, 1) / scale  # positive
        return tuple(Fraction(v // g) for v in ints), -self.constant / lam

    def canonical(self) -> tuple["AffineForm", bool]:
        """Primitive integer representative with positive leading entry.

        Returns (canonical form, flipped); ``flipped`` is True when the
        representative is a negative multiple of this form.  The zero
        form canonicalizes to itself.
        """
        entries = (self.constant, *self.coeffs)
        if not any(entries):
            return self, False
        scale = Fraction(lcm(*(e.denominator for e in entries)))
        ints = [int(e * scale) for e in entries]
        g = gcd(*ints)
        ints = [v // g for v in ints]
        # Sign convention: first nonzero coefficient positive; for
        # constant forms, positive constant.
        leader = next((v for v in ints[1:] if v), ints[0])
        flipped = leader < 0
        if flipped:
            ints = [-v for v in ints]
        canon = AffineForm(
            Fraction(ints[0]), tuple(Fraction(v) for v in ints[1:])
        )
        return canon, flipped


def affine(constant: Rational, coeffs: Iterable[Rational]) -> AffineForm:
    return AffineForm(_as_fraction(constant), tuple(_as_fraction(c) for c in coeffs))


def dedup_canonical_forms(forms: Iterable[AffineForm]) -> list[AffineForm]:
    """Drop constant forms and positive-scale/sign duplicates, keeping the
    first occurrence's canonical representative."""
    out: list[AffineForm] = []
    seen: set[AffineForm] = set()
    for g in forms:
        if g.is_constant:
            continue
        canon, _ = g.canonical()
        if canon not in seen:
            seen.add(canon)
            out.append(canon)
    return out


def unit_form(arity: int, index: int) -> AffineForm:
    """The coordinate form x_index (1-based)."""
    if not 1 <= index <= arity:
        raise DomainError(f"variable index {index} outside 1..{arity}")
    return AffineForm(_F0, tuple(_F1 if i == index - 1 else _F0 for i in range(arity)))


def const_form(arity: int, value: Rational) -> AffineForm:
    return AffineForm(_as_fraction(value), (_F0,) * arity)


@dataclass(frozen=True)
class Polytope:
    """Intersection of ``form <= 0`` half-spaces with the unit cube."""

    arity: int
    constraints: tuple[AffineForm, ...] = ()

    def __post_init__(self):
        for g in self.constraints:
            if g.arity != self.arity:
                raise DomainError("constraint arity mismatch")

    def with_constraints(self, extra: Iterable[AffineForm]) -> "Polytope":
        """Extend by further ``form <= 0`` constraints, merging parallel
        half-spaces (only the tightest offset per direction is kept).
        This keeps LP row counts and rational magnitudes small when
        constraints pile up during recursive splitting."""
        order: list[tuple] = []
        tightest: dict[tuple, Fraction] = {}
        infeasible: AffineForm | None = None
        for g in (*self.constraints, *extra):
            if g.is_constant:
                if g.constant > 0 and infeasible is None:
                    infeasible = g
                continue
            direction, offset = g.halfspace()
            if direction not in tightest:
                order.append(direction)
                tightest[direction] = offset
            elif offset < tightest[direction]:
                tightest[direction] = offset
        merged = [
            AffineForm(-tightest[d], d) for d in order
        ]
        if infeasible is not None:
            merged.append(infeasible)
        return Polytope(self.arity, tuple(merged))

    def contains(self, point: Sequence[Fraction]) -> bool:
        if len(point) != self.arity:
            raise DomainError("point arity mismatch")
        if any(p < 0 or p > 1 for p in point):
            return False
        return all(g.evaluate(point) <= 0 for g in self.constraints)


def cube(arity: int) -> Polytope:
    if not isinstance(arity, int) or arity < 1:
        raise DomainError(f"arity must be an integer >= 1, got {arity!r}")
    return Polytope(arity)


@dataclass(frozen=True)
class LpResult:
    optimum: Fraction
    witness: tuple[Fraction, ...]


# Results of lp_optimize/interior_point are deterministic, so caching is
# transparent; the same small cells are re-queried many times during
# adaptive comparisons.
_LP_CACHE: dict = {}
_INTERIOR_CACHE: dict = {}
_CACHE_LIMIT = 400_000


def _cache_put(cache: dict, key, value):
    if len(cache) >= _CACHE_LIMIT:
        cache.clear()
    cache[key] = value


def lp_optimize(
    objective: AffineForm, polytope: Polytope, sense: str = "max"
) -> LpResult | None:
    """Exact optimum of an affine objective over ``polytope`` intersected
    with the unit cube; None when infeasible.

    Deterministic: dense two-phase simplex over Fractions with Bland's
    rule and fixed variable order, so repeated calls give identical
    witnesses.  Unboundedness cannot occur (the cube is bounded).
    """
    if sense not in ("max", "min"):
        raise ValueError(f"sense must be 'max' or 'min', got {sense!r}")
    if objective.arity != polytope.arity:
        raise DomainError("objective arity does not match polytope arity")
    key = (objective, polytope, sense)
    hit = _LP_CACHE.get(key)
    if hit is not None or key in _LP_CACHE:
        return hit

    n = polytope.arity
    rows: list[tuple[list[Fraction], Fraction]] = []
    feasible = True
    for g in polytope.constraints:
        if g.is_constant:
            if g.constant > 0:
                feasible = False
                break
            continue  # trivially satisfied
        rows.append((list(g.coeffs), -g.constant))
    result: LpResult | None = None
    if feasible:
        for i in range(n):
            rows.append(([_F1 if j == i else _F0 for j in range(n)], _F1))
        coeffs = list(objective.coeffs)
        if sense == "min":
            coeffs = [-c for c in coeffs]
        x = _simplex_max(coeffs, rows, n)
        if x is not None:
            result = LpResult(objective.evaluate(x), x)
    _cache_put(_LP_CACHE, key, result)
    return result


def _simplex_max(
    c: list[Fraction], rows: list[tuple[list[Fraction], Fraction]], n: int
) -> tuple[Fraction, ...] | None:
    """Maximize c.x subject to rows (a.x <= b) and x >= 0.

    Returns an optimal point or None when infeasible.  Assumes the
    feasible region is bounded.  Pivots run on gmpy2 rationals when
    available; inputs and outputs are exact either way.
    """
    Q = _fastq
    _q0, _q1 = Q(0), Q(1)
    m = len(rows)
    art_of_row: dict[int, int] = {}
    body: list[list] = []
    for i, (a, b) in enumerate(rows):
        coeffs = [Q(v.numerator, v.denominator) for v in a]
        b = Q(b.numerator, b.denominator)
        slack = _q1
        if b < 0:
            coeffs = [-v for v in coeffs]
            b = -b
            slack = -_q1
        row = coeffs + [_q0] * m + [b]
        row[n + i] = slack
        if slack < 0:
            art_of_row[i] = n + m + len(art_of_row)
        body.append(row)
    n_art = len(art_of_row)
    width = n + m + n_art
    tableau: list[list] = []
    for i in range(m):
        row = body[i][:-1] + [_q0] * n_art + [body[i][-1]]
        if i in art_of_row:
            row[art_of_row[i]] = _q1
        tableau.append(row)
    basis = [art_of_row.get(i, n + i) for i in range(m)]

    def pivot(r: int, col: int):
        piv = tableau[r][col]
        if piv != 1:
            tableau[r] = [v / piv for v in tableau[r]]
        prow = tableau[r]
        for i in range(m):
            if i != r and tableau[i][col]:
                f = tableau[i][col]
                tableau[i] = [v - f * pv for v, pv in zip(tableau[i], prow)]
        basis[r] = col

    def optimize(cost: list, allowed: int) -> list:
        # reduced-cost row, priced out for the current basis
        red = [-v for v in cost] + [_q0]
        for i, bv in enumerate(basis):
            if red[bv]:
                f = red[bv]
                red = [v - f * pv for v, pv in zip(red, tableau[i])]
        while True:
            enter = next(
                (j for j in range(allowed) if red[j] < 0), None
            )  # Bland: lowest index
            if enter is None:
                return red
            best = None
            for i in range(m):
                coeff = tableau[i][enter]
                if coeff > 0:
                    ratio = tableau[i][-1] / coeff
                    key = (ratio, basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                raise RuntimeError("LP unbounded; impossible inside the cube")
            pivot(best[1], enter)
            f = red[enter]
            if f:
                red = [v - f * pv for v, pv in zip(red, tableau[best[1]])]

    if n_art:
        cost1 = [_q0] * width
        for col in art_of_row.values():
            cost1[col] = -_q1  # maximize -(sum of artificials)
        red = optimize(cost1, width)
        if red[-1] != 0:
            return None
        # Drive leftover artificials out of the basis.
        for i in range(m):
            if basis[i] >= n + m:
                col = next(
                    (j for j in range(n + m) if tableau[i][j]), None
                )
                if col is not None:
                    pivot(i, col)
                # else: the row is redundant (all structural/slack zero);
                # its artificial stays basic at value 0, which is harmless.

    cost2 = [Q(v.numerator, v.denominator) for v in c] + [_q0] * (m + n_art)
    optimize(cost2, n + m)  # artificial columns excluded in phase 2
    x = [_F0] * n
    for i, bv in enumerate(basis):
        if bv < n:
            value = tableau[i][-1]
            x[bv] = Fraction(int(value.numerator), int(value.denominator))
    return tuple(x)


def is_feasible(polytope: Polytope) -> bool:
    return lp_optimize(const_form(polytope.arity, 0), polytope) is not None


def interior_point(polytope: Polytope) -> tuple[Fraction, ...] | None:
    """A point satisfying every constraint and every cube bound strictly,
    or None when no such point exists (empty or lower-dimensional body).

    Found by maximizing a uniform slack variable with `lp_optimize`;
    deterministic, exact, and square-root free.
    """
    key = polytope
    if key in _INTERIOR_CACHE:
        return _INTERIOR_CACHE[key]
    n = polytope.arity
    constraints = []
    result: tuple[Fraction, ...] | None = None
    trivially_empty = False
    for g in polytope.constraints:
        if g.is_constant:
            if g.constant > 0:
                trivially_empty = True
                break
            continue
        # g(x) + s <= 0
        constraints.append(AffineForm(g.constant, g.coeffs + (_F1,)))
    if not trivially_empty:
        for i in range(n):
            e = [_F0] * (n + 1)
            e[i] = -_F1
            e[n] = _F1
            constraints.append(AffineForm(_F0, tuple(e)))  # s <= x_i
            e = [_F0] * (n + 1)
            e[i] = _F1
            e[n] = _F1
            constraints.append(AffineForm(-_F1, tuple(e)))  # x_i + s <= 1
        slack_obj = AffineForm(_F0, (_F0,) * n + (_F1,))
        res = lp_optimize(slack_obj, Polytope(n + 1, tuple(constraints)))
        if res is not None and res.optimum > 0:
            result = res.witness[:n]
    _cache_put(_INTERIOR_CACHE, key, result)
    return result


@dataclass(frozen=True)
class Cell:
    """One full-dimensional sign cell: ``signs[i]`` fixes the sign of the
    i-th input form; ``point`` is strictly interior."""

    signs: tuple[str, ...]
    polytope: Polytope
    point: tuple[Fraction, ...]


# enumerate_cells output: lexicographic in sign vectors, "<=" before ">=".
CellDecomposition = list[Cell]


def enumerate_cells(
    forms: Sequence[AffineForm], arity: int, within: Polytope | None = None
) -> CellDecomposition:
    """All full-dimensional sign cells of a form family inside the cube
    (or inside ``within``), ordered lexicographically with ``<=`` before
    ``>=``.

    Forms must be pairwise distinct and non-constant; branches whose
    polytope has empty interior are pruned, so each listed cell carries a
    strictly interior point.
    """
    base = within if within is not None else cube(arity)
    if base.arity != arity:
        raise DomainError("within-polytope arity mismatch")
    for i, g in enumerate(forms):
        if g.arity != arity:
            raise DomainError("form arity mismatch")
        if g.is_constant:
            raise ValueError("constant forms are not allowed here")
        if g in forms[:i]:
            raise ValueError("duplicate forms are not allowed here")

    cells: list[Cell] = []
    signs: list[str] = []

    def walk(idx: int, poly: Polytope, point):
        # point: strictly interior to poly when inherited from the parent
        # branch; recomputed (one LP) only when inheritance fails.
        if point is None:
            point = interior_point(poly)
            if point is None:
                return
        if idx == len(forms):
            cells.append(Cell(tuple(signs), poly, point))
            return
        g = forms[idx]
        value = g.evaluate(point)
        signs.append(SIGN_LE)
        walk(idx + 1, poly.with_constraints((g,)), point if value < 0 else None)
        signs.pop()
        signs.append(SIGN_GE)
        walk(
            idx + 1,
            poly.with_constraints((g.negated(),)),
            point if value > 0 else None,
        )
        signs.pop()

    walk(0, base, None)
    return cells
