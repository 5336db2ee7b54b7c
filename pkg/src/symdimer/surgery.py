"""Covers, edge deletion, re-embedding, and corner cuts.

The two cutting operations work by deleting the edges where chosen zigzag
paths cross, collapsing the divalent nodes this leaves behind, and
computing a fresh harmonic embedding.  Every candidate outcome is
verified from scratch (geometry, consistency, zigzag polygon) before it
is accepted.
"""

import itertools
import math
import os
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .dimer import (
    DimerModel,
    Edge,
    MergeLoopError,
    Node,
    SymmetryAction,
    frac_pt,
    remove_divalent,
    validate,
)
from .lattice import (
    DegenerateError,
    Mat2,
    convex_hull,
    corner_chop_admissible,
    exact_invariant_frame,
    normalize_translation,
    polygon_area2,
    primitive,
    remove_corner_orbit,
)
from .zigzag import (
    NonPrimitiveSlopeError,
    NotClosedError,
    check_consistency,
    zigzag_paths,
    zigzag_polygon,
)

Vec = Tuple[int, int]


class SurgeryError(Exception):
    pass


class SingularBasisError(SurgeryError):
    """The sublattice matrix of a cover has determinant zero."""


class IsolatedNodeError(SurgeryError):
    """An edge deletion would leave a node with no edges at all."""


class UnivalentAfterDeletionError(SurgeryError):
    """An edge deletion would leave a node with exactly one edge."""


class EmbeddingFailedError(SurgeryError):
    """No harmonic embedding with distinct node positions exists."""


class WholePolygonError(SurgeryError):
    """The requested cut would remove the whole polygon."""


class SelectionFailedError(SurgeryError):
    """No selection of crossing zigzag paths realizes the cut."""


class SearchExhaustedError(SurgeryError):
    """No symmetric crossing resolution realizes the corner chop."""


# ---------------------------------------------------------------------------
# Covers


def _rational_inverse(s: Mat2):
    det = Fraction(s.det())
    if det == 0:
        raise SingularBasisError("sublattice matrix is singular")
    return (
        (Fraction(s.d) / det, Fraction(-s.b) / det),
        (Fraction(-s.c) / det, Fraction(s.a) / det),
    )


def _apply_rational(m, v):
    return (
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    )


def _coset_representatives(s: Mat2) -> List[Vec]:
    """Representatives of Z^2 modulo the sublattice spanned by the columns
    of s, reduced with rep(v) = v - s*floor(s^{-1} v)."""
    k = abs(s.det())
    inv = _rational_inverse(s)

    def rep(v: Vec) -> Vec:
        w = _apply_rational(inv, v)
        f = (math.floor(w[0]), math.floor(w[1]))
        sf = s.apply(f)
        return (v[0] - sf[0], v[1] - sf[1])

    seen = []
    for a in range(k):
        for b in range(k):
            r = rep((a, b))
            if r not in seen:
                seen.append(r)
    if len(seen) != k:
        raise ValueError("coset enumeration failed")
    return sorted(seen)


def cover(model: DimerModel, s: Mat2) -> DimerModel:
    """Pullback of the model along the torus cover with deck lattice s*Z^2,
    written in unit-torus coordinates.

    A singular matrix raises SingularBasisError.  A basis with negative
    determinant is first canonicalized by negating its second column,
    which spans the same sublattice.  The characteristic polygon of the
    result is the transpose of the (canonicalized) basis applied to the
    original polygon."""
    if s.det() == 0:
        raise SingularBasisError("sublattice matrix is singular")
    if s.det() < 0:
        s = Mat2.from_rows(((s.a, -s.b), (s.c, -s.d)))
    reps = _coset_representatives(s)
    k = len(reps)
    index = {r: i for i, r in enumerate(reps)}
    inv = _rational_inverse(s)

    def rep_of(v: Vec) -> Vec:
        w = _apply_rational(inv, v)
        f = (math.floor(w[0]), math.floor(w[1]))
        sf = s.apply(f)
        return (v[0] - sf[0], v[1] - sf[1])

    # Exact position and its integer part for each (node, coset) pair.
    pos: Dict[Tuple[int, int], Tuple[Fraction, Fraction]] = {}
    whole: Dict[Tuple[int, int], Vec] = {}
    nodes = []
    for n in model.nodes:
        for ci, r in enumerate(reps):
            raw = _apply_rational(inv, (n.pos[0] + r[0], n.pos[1] + r[1]))
            m = (math.floor(raw[0]), math.floor(raw[1]))
            p = (raw[0] - m[0], raw[1] - m[1])
            pos[(n.id, ci)] = p
            whole[(n.id, ci)] = m
            nodes.append(Node(id=n.id * k + ci, color=n.color, pos=p))

    edges = []
    for e in model.edges:
        for ci, r in enumerate(reps):
            target = (r[0] + e.offset[0], r[1] + e.offset[1])
            r2 = rep_of(target)
            ci2 = index[r2]
            jump = _apply_rational(
                inv, (target[0] - r2[0], target[1] - r2[1])
            )
            assert jump[0].denominator == 1 and jump[1].denominator == 1
            off = (
                int(jump[0]) + whole[(e.black, ci2)][0] - whole[(e.white, ci)][0],
                int(jump[1]) + whole[(e.black, ci2)][1] - whole[(e.white, ci)][1],
            )
            edges.append(
                Edge(
                    id=e.id * k + ci,
                    white=e.white * k + ci,
                    black=e.black * k + ci2,
                    offset=off,
                )
            )
    return DimerModel(nodes, edges)


# ---------------------------------------------------------------------------
# Edge deletion


def delete_edges(model: DimerModel, edge_ids: Iterable[int]) -> DimerModel:
    """Remove the given edges and collapse any divalent nodes that appear.

    Deleting nothing returns the model unchanged.  A node left with no
    edges raises IsolatedNodeError, a node left with exactly one edge
    raises UnivalentAfterDeletionError, and a collapse that would produce
    a loop raises MergeLoopError.  Node positions are kept, so the result
    may need re-embedding before it is geometrically valid again."""
    doomed = set(edge_ids)
    if not doomed:
        return model
    unknown = doomed - {e.id for e in model.edges}
    if unknown:
        raise ValueError(f"unknown edge ids {sorted(unknown)}")
    kept = [e for e in model.edges if e.id not in doomed]
    degree: Dict[int, int] = {n.id: 0 for n in model.nodes}
    for e in kept:
        degree[e.white] += 1
        degree[e.black] += 1
    isolated = sorted(n for n, d in degree.items() if d == 0)
    if isolated:
        raise IsolatedNodeError(
            f"deletion leaves nodes {isolated} with no edges"
        )
    univalent = sorted(n for n, d in degree.items() if d == 1)
    if univalent:
        raise UnivalentAfterDeletionError(
            f"deletion leaves nodes {univalent} with a single edge"
        )
    return remove_divalent(DimerModel(model.nodes, kept))


# ---------------------------------------------------------------------------
# Harmonic re-embedding


def _solve_linear(a: List[List[Fraction]], b: List[Fraction]) -> List[Fraction]:
    n = len(a)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        pivot = next(
            (r for r in range(col, n) if m[r][col] != 0), None
        )
        if pivot is None:
            raise EmbeddingFailedError("singular harmonic system")
        m[col], m[pivot] = m[pivot], m[col]
        inv = Fraction(1) / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][n] for i in range(n)]


def reembed(model: DimerModel) -> DimerModel:
    """Move every node to the centroid of its neighbors (as seen through
    the edge offsets), keeping the smallest node id pinned in place.  The
    solution is the unique harmonic embedding with that pin; symmetric
    models stay symmetric because affine torus maps preserve centroids."""
    ids = sorted(n.id for n in model.nodes)
    idx = {nid: i for i, nid in enumerate(ids)}
    n = len(ids)
    mat = [[Fraction(0)] * n for _ in range(n)]
    rhs_x = [Fraction(0)] * n
    rhs_y = [Fraction(0)] * n
    for e in model.edges:
        w, b = idx[e.white], idx[e.black]
        mat[w][w] += 1
        mat[w][b] -= 1
        rhs_x[w] += e.offset[0]
        rhs_y[w] += e.offset[1]
        mat[b][b] += 1
        mat[b][w] -= 1
        rhs_x[b] -= e.offset[0]
        rhs_y[b] -= e.offset[1]
    pin = model.node(ids[0]).pos
    mat[0] = [Fraction(1 if j == 0 else 0) for j in range(n)]
    rhs_x[0] = pin[0]
    rhs_y[0] = pin[1]
    xs = _solve_linear(mat, rhs_x)
    ys = _solve_linear([row[:] for row in mat], rhs_y)
    nodes = [
        Node(id=nid, color=model.node(nid).color, pos=frac_pt((xs[i], ys[i])))
        for i, nid in enumerate(ids)
    ]
    try:
        return DimerModel(nodes, model.edges)
    except ValueError as exc:
        raise EmbeddingFailedError(str(exc)) from None


# ---------------------------------------------------------------------------
# Corner geometry in the zigzag polygon


def _corner_sides(poly: Sequence[Vec], corner: Vec):
    """For a corner of a counterclockwise convex polygon: the primitive
    directions and lattice lengths of the incoming side (from the previous
    corner) and the outgoing side (toward the next corner)."""
    poly = tuple(poly)
    corner = (int(corner[0]), int(corner[1]))
    if corner not in poly:
        raise ValueError(f"{corner} is not a corner of {poly}")
    i = poly.index(corner)
    prev = poly[i - 1]
    nxt = poly[(i + 1) % len(poly)]
    v_in = (corner[0] - prev[0], corner[1] - prev[1])
    v_out = (nxt[0] - corner[0], nxt[1] - corner[1])
    d_in = primitive(v_in)
    d_out = primitive(v_out)
    len_in = v_in[0] // d_in[0] if d_in[0] else v_in[1] // d_in[1]
    len_out = v_out[0] // d_out[0] if d_out[0] else v_out[1] // d_out[1]
    return d_in, d_out, len_in, len_out


def _side_normal(d: Vec) -> Vec:
    """Outward normal of a counterclockwise side direction; this is the
    slope of the zigzag paths contributing that side of the polygon."""
    return (d[1], -d[0])


def triangle_cut_target(
    poly: Sequence[Vec], corner: Vec, k: int, m: int
) -> Tuple[Vec, ...]:
    """Polygon left after cutting the triangle with apex at the corner and
    legs of lattice length k along the outgoing side and m along the
    incoming side.  Raises WholePolygonError when nothing two-dimensional
    remains and ValueError when a leg overshoots its side."""
    poly = convex_hull(poly)
    corner = (int(corner[0]), int(corner[1]))
    d_in, d_out, len_in, len_out = _corner_sides(poly, corner)
    if not 1 <= k <= len_out:
        raise ValueError(
            f"leg k={k} must lie in 1..{len_out} (outgoing side length)"
        )
    if not 1 <= m <= len_in:
        raise ValueError(
            f"leg m={m} must lie in 1..{len_in} (incoming side length)"
        )
    r = (corner[0] + k * d_out[0], corner[1] + k * d_out[1])
    rp = (corner[0] - m * d_in[0], corner[1] - m * d_in[1])
    pts = [c for c in poly if c != corner] + [r, rp]
    try:
        hull = convex_hull(pts)
    except DegenerateError:
        raise WholePolygonError("cut removes the whole polygon") from None
    if polygon_area2(hull) == 0:
        raise WholePolygonError("cut flattens the polygon")
    return hull


# ---------------------------------------------------------------------------
# Verified cutting engine

DEFAULT_SEARCH_BUDGET = 100000


def search_budget() -> int:
    """Maximum candidate selections a cut search may try.  The
    DIMER_SEARCH_BUDGET environment variable overrides the default."""
    raw = os.environ.get("DIMER_SEARCH_BUDGET", "")
    try:
        value = int(raw)
    except ValueError:
        return DEFAULT_SEARCH_BUDGET
    return value if value > 0 else DEFAULT_SEARCH_BUDGET


def _orbit_edges(action: Optional[SymmetryAction], seed: Set[int]) -> Set[int]:
    if action is None:
        return set(seed)
    out = set(seed)
    while True:
        grown = set(out)
        for h in action.elements:
            perm = action.edge_perm(h)
            grown.update(perm[e] for e in out)
        if grown == out:
            return out
        out = grown


def _try_cut(
    model: DimerModel,
    doomed: Set[int],
    target: Tuple[Vec, ...],
    accept=None,
) -> Optional[DimerModel]:
    """Delete the edges, collapse, re-embed, and accept the result only if
    it is a valid consistent model whose zigzag polygon is the target and
    the extra acceptance predicate (if any) passes."""
    try:
        cut = delete_edges(model, doomed)
        cut = reembed(cut)
    except (SurgeryError, MergeLoopError):
        return None
    if not validate(cut).ok:
        return None
    try:
        got = zigzag_polygon([p.slope for p in zigzag_paths(cut)])
    except (NotClosedError, NonPrimitiveSlopeError):
        return None
    if got != target:
        return None
    if not check_consistency(cut).consistent:
        return None
    if accept is not None and not accept(cut):
        return None
    return cut


def gulotta_cut(
    model: DimerModel,
    corner: Vec,
    k: int = 1,
    m: int = 1,
    expected: Optional[Sequence[Vec]] = None,
    action: Optional[SymmetryAction] = None,
    accept=None,
) -> DimerModel:
    """Cut the triangle with legs k and m off the named corner of the
    model's zigzag polygon (in its normalized frame, lexicographically
    smallest corner at the origin).

    The corner's outgoing side contributes k zigzag paths and its
    incoming side m paths; for each selection, all pairwise crossing
    edges are deleted, the model is collapsed and re-embedded, and the
    outcome is accepted only if it is valid, consistent, and realizes the
    target polygon.  With an action, the deleted edge set is closed under
    the group orbit, which cuts the whole orbit of the corner at once; an
    explicit expected polygon is then required because the outcome is no
    longer the single-corner cut.  Raises WholePolygonError when the
    triangle is the whole polygon and SelectionFailedError when no
    selection verifies."""
    paths = zigzag_paths(model)
    poly = zigzag_polygon([p.slope for p in paths])
    corner = (int(corner[0]), int(corner[1]))
    d_in, d_out, _len_in, _len_out = _corner_sides(poly, corner)
    if action is None:
        target = triangle_cut_target(poly, corner, k, m)
        if expected is not None:
            want = normalize_translation(convex_hull(expected))
            if want != normalize_translation(target):
                raise ValueError(
                    f"expected polygon {want} does not match the cut target "
                    f"{normalize_translation(target)}"
                )
    else:
        if expected is None:
            raise ValueError(
                "an orbit cut needs the expected polygon spelled out"
            )
        target = convex_hull(expected)
    target = normalize_translation(target)
    fam_out = [p for p in paths if p.slope == _side_normal(d_out)]
    fam_in = [p for p in paths if p.slope == _side_normal(d_in)]
    budget = search_budget()
    tried = 0
    for sel_out in itertools.combinations(fam_out, k):
        for sel_in in itertools.combinations(fam_in, m):
            seed: Set[int] = set()
            ok = True
            for z1 in sel_out:
                for z2 in sel_in:
                    shared = set(z1.edge_ids()) & set(z2.edge_ids())
                    if not shared:
                        ok = False
                        break
                    seed |= shared
                if not ok:
                    break
            if not ok:
                continue
            tried += 1
            if tried > budget:
                raise SearchExhaustedError(
                    f"cut search exceeded its budget of {budget} selections"
                )
            cut = _try_cut(model, _orbit_edges(action, seed), target, accept)
            if cut is not None:
                return cut
    raise SelectionFailedError(
        f"no zigzag path selection realizes the cut "
        f"({tried} candidate selections tried)"
    )


def corner_chop(
    model: DimerModel,
    action: SymmetryAction,
    corner: Vec,
    target: Optional[Sequence[Vec]] = None,
    accept=None,
) -> DimerModel:
    """Remove the orbit of one polygon corner symmetrically.

    The corner is named in the exactly invariant frame of the zigzag
    polygon (the translate fixed setwise by every group element).  The
    chop must be admissible: no other corner in the orbit is joined to
    this one by a primitive boundary segment.  By default the target is
    the hull of the remaining lattice points; candidate crossing pairs at
    the corner are resolved together with their whole orbit and verified.
    Raises WholePolygonError when nothing remains and SearchExhaustedError
    when no symmetric resolution verifies."""
    mats = list(action.elements)
    paths = zigzag_paths(model)
    poly = zigzag_polygon([p.slope for p in paths])
    frame = exact_invariant_frame(poly, mats)
    corner = (int(corner[0]), int(corner[1]))
    if corner not in frame:
        raise ValueError(f"{corner} is not a corner of {frame}")
    if not corner_chop_admissible(frame, mats, corner):
        raise ValueError(
            f"corner {corner} is joined to an orbit translate by a "
            f"primitive boundary segment"
        )
    if target is None:
        try:
            rest = remove_corner_orbit(frame, mats, corner)
        except DegenerateError:
            raise WholePolygonError("chop removes the whole polygon") from None
        if len(rest) < 3 or polygon_area2(rest) == 0:
            raise WholePolygonError("chop removes the whole polygon")
        target = rest
    # The verifier compares normalized polygons, so the shift between the
    # invariant frame and the model frame drops out.
    want = normalize_translation(convex_hull(target))

    d_in, d_out, _li, _lo = _corner_sides(frame, corner)
    fam_out = [p for p in paths if p.slope == _side_normal(d_out)]
    fam_in = [p for p in paths if p.slope == _side_normal(d_in)]
    if not fam_out or not fam_in:
        raise SearchExhaustedError(
            f"no zigzag paths with the corner's side slopes "
            f"{_side_normal(d_out)} and {_side_normal(d_in)}"
        )
    budget = search_budget()
    tried = 0
    for z1 in fam_out:
        shared1 = set(z1.edge_ids())
        for z2 in fam_in:
            seed = shared1 & set(z2.edge_ids())
            if not seed:
                continue
            tried += 1
            if tried > budget:
                raise SearchExhaustedError(
                    f"chop search exceeded its budget of {budget} pairs"
                )
            doomed = _orbit_edges(action, seed)
            cut = _try_cut(model, doomed, want, accept)
            if cut is not None:
                return cut
    raise SearchExhaustedError(
        f"no symmetric crossing resolution realizes the chop "
        f"({tried} candidate pairs tried)"
    )
