"""Region analysis, principal ideals, congruence gluing, and synthesis.

The pipeline turns a valid piecewise-linear description into a term with
the same function:

1. `analyze_regions` splits the cube into sign cells of the constituent
   forms, groups the cells by the induced ordering of the clamped
   constituents, verifies cell by cell which constituent the function
   equals on each group, and attaches the group's difference ideal.
2. `chinese_glue` folds the per-group constituent terms together; each
   step applies the explicit two-ideal gluing formula

       (a1 - a2 - c1) (+) (a2 - a1 - d2) (+) (a1 /\\ a2)

   (truncated operations) where c1 and d2 are iterates of the ideal
   generators found by a constructive membership search.
3. The result is certified function-equal to the input before being
   returned; certification failure is a bug, never a silent wrong answer.

`synthesize_direct` is an independent construction (clamp each leaf and
rebuild the lattice with wedge/vee) used to cross-check the glued route.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    CapExceededError,
    CertificationError,
    DomainError,
    InvalidDescriptionError,
    NotCongruentError,
    NotMemberError,
)
from .geometry import (
    AffineForm,
    Polytope,
    clamp01,
    const_form,
    dedup_canonical_forms,
    enumerate_cells,
    lp_optimize,
)
from .linear import linear_term
from .pwl import (
    Leaf,
    MinOf,
    PwlExpr,
    _resolve_at,
    decide_leq,
    eval_pwl,
    function_eq,
    function_leq,
    pwl_arity,
    pwl_leaves,
    term_to_pwl,
)
from .terms import (
    Term,
    ZERO,
    eval_term,
    iterate_oplus,
    ominus,
    oplus,
    vee,
    wedge,
)

DEFAULT_CAP = 65536


@dataclass(frozen=True)
class PrincipalIdeal:
    """Ideal of term functions generated by one term.

    Membership: e belongs iff e <= m * generator pointwise on the cube
    for some m >= 1; the ideal's zero set is the generator's zero set.
    """

    generator: Term
    arity: int

    def generator_pwl(self) -> PwlExpr:
        """Lattice form of the generator (cached; small generators only)."""
        key = (id(self.generator), self.arity)
        hit = _GEN_PWL_CACHE.get(key)
        if hit is None:
            hit = term_to_pwl(self.generator, self.arity)
            _GEN_PWL_CACHE[key] = hit
        return hit


# Generators are interned terms and therefore immortal, so id keys are safe.
_GEN_PWL_CACHE: dict[tuple[int, int], PwlExpr] = {}


@dataclass(frozen=True)
class RegionGroup:
    """Cells sharing one ordering of the clamped constituents.

    ordering: 1-based constituent indices, ascending by clamped value on
    every member cell (ties broken by index).  selected: the constituent
    whose clamp equals the described function on every member cell
    (verified, not assumed).
    """

    ordering: tuple[int, ...]
    cells: tuple[Polytope, ...]
    points: tuple[tuple[Fraction, ...], ...]
    selected: int
    ideal: PrincipalIdeal


@dataclass
class CombineRecord:
    left: Term
    right: Term
    left_ideal: PrincipalIdeal
    right_ideal: PrincipalIdeal
    result: Term
    bound_left: int
    bound_right: int


@dataclass
class SynthesisTrace:
    """Optional instrumentation filled in by the synthesis pipeline."""

    groups: list[RegionGroup] = field(default_factory=list)
    combines: list[CombineRecord] = field(default_factory=list)

    @property
    def max_bound(self) -> int:
        return max(
            (max(r.bound_left, r.bound_right) for r in self.combines), default=0
        )


def ideal_for_order(
    ordering: Sequence[int], constituent_terms: Sequence[Term], arity: int
) -> PrincipalIdeal:
    """The ideal vanishing exactly where the given constituent terms are
    ordered ascending along ``ordering``.

    Generator: the truncated sum of h[o1] - h[o2], ..., h[o(k-1)] - h[ok]
    (truncated differences, left-associated).  A single constituent gives
    the zero ideal.
    """
    k = len(constituent_terms)
    if sorted(ordering) != list(range(1, k + 1)):
        raise DomainError(
            f"ordering {tuple(ordering)} is not a permutation of 1..{k}"
        )
    if k == 1:
        return PrincipalIdeal(ZERO, arity)
    steps = [
        ominus(constituent_terms[ordering[i] - 1], constituent_terms[ordering[i + 1] - 1])
        for i in range(k - 1)
    ]
    gen = steps[0]
    for s in steps[1:]:
        gen = oplus(gen, s)
    return PrincipalIdeal(gen, arity)


def membership_bound(
    element: Term,
    ideal: PrincipalIdeal,
    cap: int = DEFAULT_CAP,
    probe_points: Sequence[tuple[Fraction, ...]] = (),
) -> int:
    """Smallest tested multiplier m (doubling 1, 2, 4, ...) with
    element <= m * generator everywhere on the cube.

    Raises `NotMemberError` as soon as some failure witness lies in the
    generator's zero set while the element is positive there (no m can
    ever work), and `CapExceededError` when the cap is passed without
    resolution.  ``probe_points`` are candidate refutation points tried
    before the full decision procedure; they only speed things up.
    """
    if isinstance(cap, bool) or not isinstance(cap, int) or cap < 1:
        raise DomainError(f"cap must be an integer >= 1, got {cap!r}")
    gen = ideal.generator
    probes = list(probe_points)
    m = 1
    while m <= cap:
        candidate = iterate_oplus(m, gen)
        witness = None
        for p in probes:
            if eval_term(element, p) > eval_term(candidate, p):
                witness = p
                break
        if witness is None:
            verdict = function_leq(element, candidate, ideal.arity)
            if verdict:
                return m
            witness = verdict.witness
        if eval_term(gen, witness) == 0 and eval_term(element, witness) > 0:
            raise NotMemberError(
                "element is positive on the generator's zero set", witness
            )
        probes.append(witness)
        m *= 2
    raise CapExceededError(cap)


def intersect_principal(a: PrincipalIdeal, b: PrincipalIdeal) -> PrincipalIdeal:
    """Ideal intersection: generated by the meet of the two generators
    (membership in the meet's ideal is membership in both)."""
    if a.arity != b.arity:
        raise DomainError("ideal arity mismatch")
    return PrincipalIdeal(wedge(a.generator, b.generator), a.arity)


def combine_pair(
    a1: Term,
    a2: Term,
    ideal1: PrincipalIdeal,
    ideal2: PrincipalIdeal,
    cap: int = DEFAULT_CAP,
    trace: SynthesisTrace | None = None,
    probe_points: Sequence[tuple[Fraction, ...]] = (),
) -> Term:
    """Glue two terms congruent modulo the joined ideal into one term
    congruent to a1 modulo ideal1 and to a2 modulo ideal2.

    Requires both truncated differences of a1 and a2 to be members of
    the ideal generated by generator1 (+) generator2; otherwise raises
    `NotCongruentError` with a witness point.
    """
    if ideal1.arity != ideal2.arity:
        raise DomainError("ideal arity mismatch")
    join = PrincipalIdeal(oplus(ideal1.generator, ideal2.generator), ideal1.arity)
    try:
        m1 = membership_bound(ominus(a1, a2), join, cap, probe_points)
        m2 = membership_bound(ominus(a2, a1), join, cap, probe_points)
    except NotMemberError as ex:
        raise NotCongruentError(
            "sides differ where the joined ideal's generator vanishes",
            ex.witness,
        ) from ex
    c1 = iterate_oplus(m1, ideal1.generator)
    d2 = iterate_oplus(m2, ideal2.generator)
    glued = oplus(
        oplus(ominus(ominus(a1, a2), c1), ominus(ominus(a2, a1), d2)),
        wedge(a1, a2),
    )
    if trace is not None:
        trace.combines.append(
            CombineRecord(a1, a2, ideal1, ideal2, glued, m1, m2)
        )
    return glued


def chinese_glue(
    pairs: Sequence[tuple[Term, PrincipalIdeal]],
    cap: int = DEFAULT_CAP,
    trace: SynthesisTrace | None = None,
    probe_points: Sequence[tuple[Fraction, ...]] = (),
) -> Term:
    """Fold `combine_pair` over (term, ideal) pairs, intersecting the
    accumulated ideal as it goes; the result is congruent to every input
    term modulo its ideal.

    A congruence failure at fold position i (1-based) re-raises the
    `NotCongruentError` with ``index`` set to i.
    """
    items = list(pairs)
    if not items:
        raise DomainError("at least one (term, ideal) pair is required")
    acc, acc_ideal = items[0]
    for idx, (term, ideal) in enumerate(items[1:], start=2):
        try:
            acc = combine_pair(acc, term, acc_ideal, ideal, cap, trace, probe_points)
        except NotCongruentError as ex:
            ex.index = idx
            raise
        acc_ideal = intersect_principal(acc_ideal, ideal)
    return acc


def _check_range(description: PwlExpr, arity: int):
    upper = decide_leq(description, Leaf(const_form(arity, 1)))
    if not upper:
        raise InvalidDescriptionError(
            "description exceeds 1 on the cube", upper.witness
        )
    lower = decide_leq(Leaf(const_form(arity, 0)), description)
    if not lower:
        raise InvalidDescriptionError(
            "description drops below 0 on the cube", lower.witness
        )


def _clamp_on_cell(g: AffineForm, point, arity: int) -> AffineForm:
    """Affine form of median(0, g, 1) on the cell with the given strictly
    interior point (the cell never straddles g = 0 or g = 1)."""
    if g.is_constant:
        return const_form(arity, clamp01(g.constant))
    value = g.evaluate(point)
    if value < 0:
        return const_form(arity, 0)
    if value > 1:
        return const_form(arity, 1)
    return g


def _matches_on_zero_set(
    diff: AffineForm, haffs: list[AffineForm], ordering, cell
) -> bool:
    """Is ``diff`` identically zero on the part of the cell where the
    ordering's ideal generator vanishes?

    The generator vanishes exactly where the clamped constituents are
    ascending along the ordering; on one cell those clamps are the affine
    ``haffs``, so the locus is a polyhedral face and two LPs decide the
    question.  An empty face passes vacuously.
    """
    face = cell.polytope.with_constraints(
        tuple(
            haffs[ordering[i] - 1] - haffs[ordering[i + 1] - 1]
            for i in range(len(ordering) - 1)
        )
    )
    if diff.is_constant:
        if diff.constant == 0:
            return True
        return lp_optimize(diff, face) is None  # nonzero: face must be empty
    top = lp_optimize(diff, face)
    if top is None:
        return True
    if top.optimum > 0:
        return False
    return lp_optimize(diff, face, "min").optimum >= 0


def analyze_regions(description: PwlExpr) -> list[RegionGroup]:
    """Decompose the cube into ordering groups for a valid description.

    Checks the [0, 1] range first; then enumerates the sign cells of the
    constituents, their pairwise differences, and their 1-shifts; groups
    cells by the clamped-constituent ordering at the cell's interior
    point; and selects for each group the first constituent whose clamp
    is verified equal to the description on the *whole zero set* of the
    group's ideal (every member cell, and every zero-set face the ideal
    has inside other cells; gluing congruences need the faces too).
    """
    arity = pwl_arity(description)
    _check_range(description, arity)
    constituents = pwl_leaves(description)
    k = len(constituents)

    collected: list[AffineForm] = []
    for i, g in enumerate(constituents):
        for h in constituents[i + 1:]:
            collected.append(g - h)
        if not g.is_constant:
            collected.append(g)
            collected.append(g.shifted(-1))
    forms = dedup_canonical_forms(collected)
    cells = enumerate_cells(forms, arity)

    cell_data = []  # (cell, f's affine form, clamped constituent forms)
    grouped: dict[tuple[int, ...], list] = {}
    for cell in cells:
        haffs = [_clamp_on_cell(g, cell.point, arity) for g in constituents]
        faff = _resolve_at(description, cell.point)
        cell_data.append((cell, faff, haffs))
        values = [h.evaluate(cell.point) for h in haffs]
        ordering = tuple(
            sorted(range(1, k + 1), key=lambda j: (values[j - 1], j))
        )
        grouped.setdefault(ordering, []).append(cell)

    constituent_terms = [linear_term(g) for g in constituents]
    groups: list[RegionGroup] = []
    for ordering, members in grouped.items():
        base_point = members[0].point
        value = eval_pwl(description, base_point)
        candidates = [
            j
            for j in range(1, k + 1)
            if clamp01(constituents[j - 1].evaluate(base_point)) == value
        ]
        selected = None
        for j in candidates:
            if all(
                _matches_on_zero_set(faff - haffs[j - 1], haffs, ordering, cell)
                for cell, faff, haffs in cell_data
            ):
                selected = j
                break
        if selected is None:
            raise InvalidDescriptionError(
                f"no constituent matches the function across region {ordering}",
                base_point,
            )
        groups.append(
            RegionGroup(
                ordering,
                tuple(cell.polytope for cell in members),
                tuple(cell.point for cell in members),
                selected,
                ideal_for_order(ordering, constituent_terms, arity),
            )
        )
    return groups


def synthesize_crt(
    description: PwlExpr,
    cap: int = DEFAULT_CAP,
    trace: SynthesisTrace | None = None,
) -> Term:
    """Glued synthesis: region analysis, then the congruence fold, then a
    mandatory exact certificate against the description."""
    arity = pwl_arity(description)
    groups = analyze_regions(description)
    if trace is not None:
        trace.groups = list(groups)
    constituents = pwl_leaves(description)
    probes = [pt for group in groups for pt in group.points]
    pairs = [
        (linear_term(constituents[group.selected - 1]), group.ideal)
        for group in groups
    ]
    result = chinese_glue(pairs, cap=cap, trace=trace, probe_points=probes)
    verdict = function_eq(result, description, arity)
    if not verdict:
        raise CertificationError(
            "glued term disagrees with the description", verdict.witness
        )
    return result


def synthesize_direct(description: PwlExpr) -> Term:
    """Structural synthesis: clamp every leaf via `linear_term` and fold
    the lattice with wedge/vee.  Sound because clamping commutes with
    min/max and the description's range check makes the outer clamp a
    no-op; certified exactly before returning."""
    arity = pwl_arity(description)
    _check_range(description, arity)

    def build(expr: PwlExpr) -> Term:
        if isinstance(expr, Leaf):
            return linear_term(expr.form)
        parts = [build(c) for c in expr.children]
        out = parts[0]
        for p in parts[1:]:
            out = wedge(out, p) if isinstance(expr, MinOf) else vee(out, p)
        return out

    result = build(description)
    verdict = function_eq(result, description, arity)
    if not verdict:
        raise CertificationError(
            "structural term disagrees with the description", verdict.witness
        )
    return result
