"""Piecewise-linear function descriptions and exact order/equality decisions.

A `PwlExpr` is a min/max lattice tree over affine leaves; it describes a
continuous piecewise-linear function on the unit cube.  This module
provides exact evaluation, the clamp-to-[0,1] truncation of an affine
form, the translation of a term into an equivalent lattice expression,
and two decision procedures:

* `decide_leq` / `decide_eq` work on lattice expressions by enumerating
  the sign cells of all leaf forms and their pairwise differences; inside
  a cell both expressions are affine and a single LP settles the cell.

* `function_leq` / `function_eq` compare term functions (or a term
  against a lattice expression) by resolving the DAG cell by cell and
  splitting a cell only when some clamp or min/max choice actually
  changes sign on it.  This stays polynomial-sized on the large shared
  terms produced by gluing, where an up-front lattice normal form would
  explode.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from . import terms
from .errors import DomainError, SizeLimitError
from .geometry import (
    AffineForm,
    Polytope,
    const_form,
    cube,
    dedup_canonical_forms,
    enumerate_cells,
    interior_point,
    lp_optimize,
    unit_form,
)
from .terms import Term, as_point

_F0 = Fraction(0)
_F1 = Fraction(1)

# Hard ceiling on lattice normal-form work; glued terms must go through
# function_leq instead of term_to_pwl.
NORMAL_FORM_LIMIT = 60_000


class PwlExpr:
    """Base class for lattice-expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Leaf(PwlExpr):
    form: AffineForm


@dataclass(frozen=True)
class MinOf(PwlExpr):
    children: tuple[PwlExpr, ...]

    def __post_init__(self):
        if not self.children:
            raise DomainError("min node needs at least one child")


@dataclass(frozen=True)
class MaxOf(PwlExpr):
    children: tuple[PwlExpr, ...]

    def __post_init__(self):
        if not self.children:
            raise DomainError("max node needs at least one child")


def leaf(form: AffineForm) -> Leaf:
    return Leaf(form)


def min_of(children: Sequence[PwlExpr]) -> PwlExpr:
    kids = tuple(children)
    return kids[0] if len(kids) == 1 else MinOf(kids)


def max_of(children: Sequence[PwlExpr]) -> PwlExpr:
    kids = tuple(children)
    return kids[0] if len(kids) == 1 else MaxOf(kids)


def _expr_children(node: PwlExpr) -> tuple[PwlExpr, ...]:
    if isinstance(node, Leaf):
        return ()
    return node.children


def pwl_arity(expr: PwlExpr) -> int:
    """Common arity of all leaves; raises if they disagree."""
    arity = None
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            if arity is None:
                arity = node.form.arity
            elif node.form.arity != arity:
                raise DomainError("leaves of mixed arity in one expression")
        else:
            stack.extend(node.children)
    assert arity is not None
    return arity


def pwl_leaves(expr: PwlExpr) -> list[AffineForm]:
    """Distinct leaf forms in first-occurrence (depth-first) order."""
    seen: list[AffineForm] = []
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf):
            if node.form not in seen:
                seen.append(node.form)
        else:
            stack.extend(reversed(node.children))
    return seen


def eval_pwl(expr: PwlExpr, point: Sequence) -> Fraction:
    """Exact value of the lattice expression at a cube point."""
    pt = as_point(point)
    if pwl_arity(expr) != len(pt):
        raise DomainError("point arity does not match expression arity")
    memo: dict[int, Fraction] = {}
    stack = [expr]
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        if isinstance(node, Leaf):
            memo[id(node)] = node.form.evaluate(pt)
            stack.pop()
            continue
        missing = [c for c in node.children if id(c) not in memo]
        if missing:
            stack.extend(missing)
            continue
        values = [memo[id(c)] for c in node.children]
        memo[id(node)] = min(values) if isinstance(node, MinOf) else max(values)
        stack.pop()
    return memo[id(expr)]


def truncate_affine(form: AffineForm) -> PwlExpr:
    """Clamp of an affine form to [0, 1]: evaluates to median(0, g, 1)."""
    n = form.arity
    return MinOf((MaxOf((Leaf(form), Leaf(const_form(n, 0)))), Leaf(const_form(n, 1))))


# --- term -> lattice expression ----------------------------------------------

def term_to_pwl(t: Term, arity: int) -> PwlExpr:
    """Lattice expression with the same function as the term.

    Negation is pushed through min/max; a truncated sum distributes the
    two operands' max-of-min normal forms leafwise and re-clamps.  The
    normal form can grow exponentially, so inputs past a size limit are
    rejected (`SizeLimitError`); compare large terms with `function_leq`
    instead of translating them.
    """
    if terms.max_var_index(t) > arity:
        raise DomainError("term variable index exceeds declared arity")
    if terms.term_node_count(t) > NORMAL_FORM_LIMIT:
        raise SizeLimitError(
            "term too large for lattice normal form; use function_leq/function_eq"
        )
    memo: dict[int, PwlExpr] = {}
    stack = [t]
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        if isinstance(node, terms.Zero):
            memo[id(node)] = Leaf(const_form(arity, 0))
        elif isinstance(node, terms.One):
            memo[id(node)] = Leaf(const_form(arity, 1))
        elif isinstance(node, terms.Var):
            memo[id(node)] = Leaf(unit_form(arity, node.index))
        elif isinstance(node, terms.Neg):
            child = memo.get(id(node.child))
            if child is None:
                stack.append(node.child)
                continue
            memo[id(node)] = _complement(child)
        else:  # Oplus
            left = memo.get(id(node.left))
            right = memo.get(id(node.right))
            if left is None or right is None:
                if right is None:
                    stack.append(node.right)
                if left is None:
                    stack.append(node.left)
                continue
            blocks = _sum_blocks(_blocks(left), _blocks(right))
            body = max_of(
                [min_of([Leaf(g) for g in blk]) for blk in blocks]
            )
            memo[id(node)] = MinOf(
                (
                    MaxOf((body, Leaf(const_form(arity, 0)))),
                    Leaf(const_form(arity, 1)),
                )
            )
        stack.pop()
    return memo[id(t)]


def _complement(expr: PwlExpr) -> PwlExpr:
    """1 - expr, pushed through the lattice structure."""
    memo: dict[int, PwlExpr] = {}
    stack = [expr]
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        if isinstance(node, Leaf):
            memo[id(node)] = Leaf(const_form(node.form.arity, 1) - node.form)
            stack.pop()
            continue
        missing = [c for c in node.children if id(c) not in memo]
        if missing:
            stack.extend(missing)
            continue
        kids = tuple(memo[id(c)] for c in node.children)
        memo[id(node)] = MaxOf(kids) if isinstance(node, MinOf) else MinOf(kids)
        stack.pop()
    return memo[id(expr)]


def _form_leq_everywhere(g: AffineForm, h: AffineForm) -> bool:
    """Exact pointwise g <= h over the whole cube (affine, so the box
    bound is the true maximum)."""
    return (g - h).bounds()[1] <= 0


def _prune_min_list(forms: list[AffineForm]) -> list[AffineForm]:
    """Remove forms dominated from below inside one min-list (exact)."""
    kept: list[AffineForm] = []
    for g in forms:
        if any(_form_leq_everywhere(k, g) for k in kept):
            continue
        kept = [k for k in kept if not _form_leq_everywhere(g, k)]
        kept.append(g)
    return kept


def _prune_blocks(blocks: list[list[AffineForm]]) -> list[list[AffineForm]]:
    """Dedup blocks and drop blocks whose min lies below another block's
    min everywhere (the max over blocks is unchanged)."""
    seen = set()
    unique: list[list[AffineForm]] = []
    for blk in blocks:
        key = frozenset(blk)
        if key not in seen:
            seen.add(key)
            unique.append(blk)
    if len(unique) > 220:  # quadratic pass; skip when clearly too wide
        return unique

    def dominated(a: list[AffineForm], b: list[AffineForm]) -> bool:
        # min(a) <= min(b) pointwise: every b-form sits above some a-form
        return all(any(_form_leq_everywhere(ga, gb) for ga in a) for gb in b)

    kept: list[list[AffineForm]] = []
    for blk in unique:
        if any(dominated(blk, other) and not dominated(other, blk) for other in kept):
            continue
        kept = [
            other
            for other in kept
            if not (dominated(other, blk) and not dominated(blk, other))
        ]
        kept.append(blk)
    return kept


def _blocks(expr: PwlExpr) -> list[list[AffineForm]]:
    """Max-of-min normal form: a list of blocks, each block a list of
    forms whose minimum is taken; the maximum is taken over blocks.
    Dominated pieces are pruned (exactly) to curb the distribution
    blowup; the function is unchanged."""
    memo: dict[int, list[list[AffineForm]]] = {}
    stack = [expr]
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        if isinstance(node, Leaf):
            memo[id(node)] = [[node.form]]
            stack.pop()
            continue
        missing = [c for c in node.children if id(c) not in memo]
        if missing:
            stack.extend(missing)
            continue
        parts = [memo[id(c)] for c in node.children]
        if isinstance(node, MaxOf):
            out = _prune_blocks([blk for p in parts for blk in p])
        else:
            out = parts[0]
            for p in parts[1:]:
                merged = []
                for a in out:
                    for b in p:
                        blk = list(a)
                        for g in b:
                            if g not in blk:
                                blk.append(g)
                        merged.append(_prune_min_list(blk))
                out = _prune_blocks(merged)
                if len(out) > NORMAL_FORM_LIMIT:
                    raise SizeLimitError("lattice normal form exceeds size limit")
        memo[id(node)] = out
        stack.pop()
    return memo[id(expr)]


def _sum_blocks(
    a: list[list[AffineForm]], b: list[list[AffineForm]]
) -> list[list[AffineForm]]:
    # min-of-forms + min-of-forms = min over pairwise sums, and max
    # distributes over +, so blocks combine pairwise.
    if len(a) * len(b) > NORMAL_FORM_LIMIT:
        raise SizeLimitError("lattice normal form exceeds size limit")
    out = []
    for blk_a in a:
        for blk_b in b:
            blk = []
            for ga in blk_a:
                for gb in blk_b:
                    s = ga + gb
                    if s not in blk:
                        blk.append(s)
            out.append(_prune_min_list(blk))
    return _prune_blocks(out)


# --- decision procedures ------------------------------------------------------

@dataclass(frozen=True)
class Decision:
    """Outcome of an order/equality check; falsy iff refuted, in which
    case `witness` is an exact cube point where the claim fails."""

    holds: bool
    witness: tuple[Fraction, ...] | None = None

    def __bool__(self) -> bool:
        return self.holds


def _check_region(region: Polytope | None, arity: int) -> Polytope:
    if region is None:
        return cube(arity)
    if region.arity != arity:
        raise DomainError("region arity mismatch")
    return region


def _resolve_at(expr: PwlExpr, point: tuple[Fraction, ...]) -> AffineForm:
    """The affine form the expression equals near ``point`` (first child
    attaining the min/max wins ties)."""
    memo: dict[int, tuple[AffineForm, Fraction]] = {}
    stack = [expr]
    while stack:
        node = stack[-1]
        if id(node) in memo:
            stack.pop()
            continue
        if isinstance(node, Leaf):
            memo[id(node)] = (node.form, node.form.evaluate(point))
            stack.pop()
            continue
        missing = [c for c in node.children if id(c) not in memo]
        if missing:
            stack.extend(missing)
            continue
        pairs = [memo[id(c)] for c in node.children]
        pick = pairs[0]
        for cand in pairs[1:]:
            if isinstance(node, MinOf):
                if cand[1] < pick[1]:
                    pick = cand
            else:
                if cand[1] > pick[1]:
                    pick = cand
        memo[id(node)] = pick
        stack.pop()
    return memo[id(expr)][0]


def decide_leq(
    lhs: PwlExpr, rhs: PwlExpr, region: Polytope | None = None
) -> Decision:
    """Does lhs <= rhs hold at every point of the region (default: the
    whole cube)?  Exact; a refutation carries a witness point.

    The sign cells of all distinct leaf forms plus all pairwise leaf
    differences are enumerated inside the region; on each cell both
    expressions collapse to single affine forms, compared by LP.
    """
    arity = pwl_arity(lhs)
    if pwl_arity(rhs) != arity:
        raise DomainError("expressions have different arities")
    region = _check_region(region, arity)
    if interior_point(region) is None:
        if lp_optimize(const_form(arity, 0), region) is None:
            return Decision(True)  # empty region: vacuously true
        raise DomainError("region has points but empty interior; not supported")

    leaves = pwl_leaves(lhs)
    for g in pwl_leaves(rhs):
        if g not in leaves:
            leaves.append(g)
    collected = list(leaves)
    for i in range(len(leaves)):
        for j in range(i + 1, len(leaves)):
            collected.append(leaves[i] - leaves[j])
    forms = dedup_canonical_forms(collected)

    for cell in enumerate_cells(forms, arity, within=region):
        fa = _resolve_at(lhs, cell.point)
        fb = _resolve_at(rhs, cell.point)
        diff = fa - fb
        if diff.bounds()[1] <= 0:
            continue
        res = lp_optimize(diff, cell.polytope)
        if res is not None and res.optimum > 0:
            return Decision(False, res.witness)
    return Decision(True)


def decide_eq(
    lhs: PwlExpr, rhs: PwlExpr, region: Polytope | None = None
) -> Decision:
    """Function equality on the region: decide_leq both ways."""
    forward = decide_leq(lhs, rhs, region)
    if not forward:
        return forward
    return decide_leq(rhs, lhs, region)


# --- adaptive comparison on term DAGs ----------------------------------------

class _Split(Exception):
    """Raised during cell resolution when a form changes sign on the cell."""

    def __init__(self, form: AffineForm):
        self.form = form


class _CellCtx:
    __slots__ = ("polytope", "point", "signs")

    def __init__(self, polytope: Polytope, point: tuple[Fraction, ...]):
        self.polytope = polytope
        self.point = point
        self.signs: dict[AffineForm, int | None] = {}

    def sign(self, form: AffineForm) -> tuple[int | None, bool]:
        """Sign of ``form`` on the cell: -1 (<= 0 everywhere), +1 (>= 0
        everywhere) or None (both).  Second component: True when the
        answer holds on the whole cube, not just this cell."""
        if form.is_constant:
            return (1 if form.constant >= 0 else -1), True
        lo, hi = form.bounds()
        if hi <= 0:
            return -1, True
        if lo >= 0:
            return 1, True
        canon, flipped = form.canonical()
        if canon in self.signs:
            sign = self.signs[canon]
        else:
            value = canon.evaluate(self.point)
            if value > 0:
                res = lp_optimize(canon, self.polytope, "min")
                sign = 1 if res.optimum >= 0 else None
            elif value < 0:
                res = lp_optimize(canon, self.polytope)
                sign = -1 if res.optimum <= 0 else None
            else:
                hi_res = lp_optimize(canon, self.polytope)
                if hi_res.optimum <= 0:
                    sign = -1
                else:
                    lo_res = lp_optimize(canon, self.polytope, "min")
                    sign = 1 if lo_res.optimum >= 0 else None
            self.signs[canon] = sign
        if sign is not None and flipped:
            sign = -sign
        return sign, False


# Cube-wide resolutions of interned term nodes, keyed by (node id, arity).
# Terms are immortal (the intern table keeps them alive) so id-keyed
# caching is safe; PwlExpr nodes are not interned and must not be cached
# across calls.
_TERM_CUBE_CACHE: dict[tuple[int, int], AffineForm] = {}


def _node_children(node) -> tuple:
    if isinstance(node, Term):
        return terms._children(node)
    return _expr_children(node)


def _affinize(root, arity: int, ctx: _CellCtx, local: dict[int, AffineForm]):
    """Affine form equal to the function of ``root`` on the cell.

    Resolutions that hold on the whole cube are cached globally (for
    terms) so repeated cells and repeated calls share the work.  Raises
    `_Split` when some internal choice changes sign on the cell.
    """
    pure_flags: dict[int, bool] = {}

    def lookup(node):
        if isinstance(node, Term):
            form = _TERM_CUBE_CACHE.get((id(node), arity))
            if form is not None:
                return form, True
        got = local.get(id(node))
        if got is not None:
            return got, pure_flags.get(id(node), False)
        return None, False

    stack = [root]
    while stack:
        node = stack[-1]
        found, _ = lookup(node)
        if found is not None:
            stack.pop()
            continue
        kids = _node_children(node)
        missing = [k for k in kids if lookup(k)[0] is None]
        if missing:
            stack.extend(missing)
            continue
        resolved = [lookup(k) for k in kids]
        forms = [r[0] for r in resolved]
        pure = all(r[1] for r in resolved)

        if isinstance(node, terms.Zero):
            form = const_form(arity, 0)
        elif isinstance(node, terms.One):
            form = const_form(arity, 1)
        elif isinstance(node, terms.Var):
            if node.index > arity:
                raise DomainError("term variable index exceeds arity")
            form = unit_form(arity, node.index)
        elif isinstance(node, terms.Neg):
            form = const_form(arity, 1) - forms[0]
        elif isinstance(node, terms.Oplus):
            total = forms[0] + forms[1]
            overflow = total.shifted(-1)
            sign, from_box = ctx.sign(overflow)
            if sign is None:
                raise _Split(overflow)
            form = const_form(arity, 1) if sign > 0 else total
            pure = pure and from_box
        elif isinstance(node, Leaf):
            form = node.form
        else:  # MinOf / MaxOf
            want_min = isinstance(node, MinOf)
            form = forms[0]
            for cand in forms[1:]:
                delta = form - cand
                if delta.is_constant:
                    better = delta.constant > 0 if want_min else delta.constant < 0
                    if better:
                        form = cand
                    continue
                sign, from_box = ctx.sign(delta)
                pure = pure and from_box
                if sign is None:
                    raise _Split(delta)
                if (want_min and sign > 0) or (not want_min and sign < 0):
                    form = cand

        if pure and isinstance(node, Term):
            _TERM_CUBE_CACHE[(id(node), arity)] = form
        else:
            local[id(node)] = form
            pure_flags[id(node)] = pure
        stack.pop()
    return lookup(root)[0]


FunctionLike = Union[Term, PwlExpr]


def _check_operand(obj: FunctionLike, arity: int):
    if isinstance(obj, Term):
        if terms.max_var_index(obj) > arity:
            raise DomainError("term variable index exceeds declared arity")
    elif isinstance(obj, PwlExpr):
        if pwl_arity(obj) != arity:
            raise DomainError("expression arity does not match declared arity")
    else:
        raise TypeError(f"expected Term or PwlExpr, got {type(obj).__name__}")


def function_leq(
    lhs: FunctionLike,
    rhs: FunctionLike,
    arity: int,
    region: Polytope | None = None,
) -> Decision:
    """Exact pointwise <= between term functions and/or lattice
    expressions over the region (default: whole cube).

    Works directly on the shared DAG: each candidate cell is refined only
    when some clamp or lattice choice genuinely changes sign on it, so
    the cost tracks the functions' true piecewise structure rather than
    their syntax size.  Semantically identical to translating both sides
    with `term_to_pwl` and running `decide_leq` (cross-checked in tests).
    """
    _check_operand(lhs, arity)
    _check_operand(rhs, arity)
    region = _check_region(region, arity)
    if interior_point(region) is None:
        if lp_optimize(const_form(arity, 0), region) is None:
            return Decision(True)  # empty region: vacuously true
        raise DomainError("region has points but empty interior; not supported")
    todo: list[tuple[Polytope, object, dict, dict]] = [(region, None, {}, {})]
    while todo:
        piece, point, signs, local = todo.pop()
        if point is None:
            point = interior_point(piece)
            if point is None:
                continue  # empty-interior pieces are covered by siblings
        ctx = _CellCtx(piece, point)
        ctx.signs = signs
        try:
            fa = _affinize(lhs, arity, ctx, local)
            fb = _affinize(rhs, arity, ctx, local)
        except _Split as split:
            # Everything resolved so far holds on both halves (they are
            # subsets of this piece), so the children inherit the work;
            # only still-ambiguous sign entries must be dropped.  The
            # interior point is inherited by the half it strictly
            # satisfies.
            canon, flipped = split.form.canonical()
            value = split.form.evaluate(point)
            kept = {k: v for k, v in ctx.signs.items() if v is not None}
            le_signs = dict(kept)
            le_signs[canon] = 1 if flipped else -1
            ge_signs = kept
            ge_signs[canon] = -1 if flipped else 1
            todo.append(
                (
                    piece.with_constraints((split.form.negated(),)),
                    point if value > 0 else None,
                    ge_signs,
                    dict(local),
                )
            )
            todo.append(
                (
                    piece.with_constraints((split.form,)),
                    point if value < 0 else None,
                    le_signs,
                    local,
                )
            )
            continue
        diff = fa - fb
        if diff.bounds()[1] <= 0:
            continue
        # Witness at the maximal violation: such points sit on cell
        # vertices, which is what ideal-membership refutation needs.
        res = lp_optimize(diff, piece)
        if res is not None and res.optimum > 0:
            return Decision(False, res.witness)
    return Decision(True)


def function_eq(
    lhs: FunctionLike,
    rhs: FunctionLike,
    arity: int,
    region: Polytope | None = None,
) -> Decision:
    forward = function_leq(lhs, rhs, arity, region)
    if not forward:
        return forward
    return function_leq(rhs, lhs, arity, region)
