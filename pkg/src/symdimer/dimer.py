"""Bicolored graphs on the torus: validity, faces, symmetry detection.

A model is a set of colored nodes at exact rational positions in the
fundamental square [0,1)^2 plus straight edges; each edge records which
integer translate of its black endpoint the segment runs to.  All
predicates (crossing, angular order, symmetry) are exact.

Symmetry convention: a group element h acts on polygon (N) coordinates
as the matrix itself and on torus (M) coordinates by the inverse
transpose, composed with a rational translation; elements with
determinant -1 exchange the two node colors.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .lattice import Mat2, Vec

WHITE = "W"
BLACK = "B"

Pt = Tuple[Fraction, Fraction]


class TwoEdgesSameDirectionError(Exception):
    """Two edges leave one node at exactly the same angle."""

    def __init__(self, message: str, node: int = -1):
        super().__init__(message)
        self.node = node


class MergeLoopError(Exception):
    """Divalent-node removal would identify a node with itself."""


class NotSymmetricError(Exception):
    """No affine realization of the requested group maps the model to itself."""


class NoFixedFaceError(Exception):
    """The action fixes no face."""


class UnknownElementError(Exception):
    """Element is not part of the stored action."""


def frac(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def frac_pt(p) -> Pt:
    return (frac(Fraction(p[0])), frac(Fraction(p[1])))


@dataclass(frozen=True)
class Node:
    id: int
    color: str
    pos: Pt


@dataclass(frozen=True)
class Edge:
    id: int
    white: int
    black: int
    offset: Vec


@dataclass(frozen=True)
class Face:
    id: int
    boundary: Tuple[Tuple[int, int], ...]  # (edge id, +1 white->black / -1)


class DimerModel:
    """Immutable container for nodes and edges with id lookups."""

    def __init__(self, nodes: Iterable[Node], edges: Iterable[Edge]):
        self.nodes: Tuple[Node, ...] = tuple(sorted(nodes, key=lambda n: n.id))
        self.edges: Tuple[Edge, ...] = tuple(sorted(edges, key=lambda e: e.id))
        self.node_by_id: Dict[int, Node] = {}
        for n in self.nodes:
            if n.id in self.node_by_id:
                raise ValueError(f"duplicate node id {n.id}")
            if n.color not in (WHITE, BLACK):
                raise ValueError(f"node {n.id} has color {n.color!r}")
            if not (0 <= n.pos[0] < 1 and 0 <= n.pos[1] < 1):
                raise ValueError(f"node {n.id} position outside [0,1)^2")
            self.node_by_id[n.id] = n
        self.edge_by_id: Dict[int, Edge] = {}
        self._incident: Dict[int, List[int]] = {n.id: [] for n in self.nodes}
        for e in self.edges:
            if e.id in self.edge_by_id:
                raise ValueError(f"duplicate edge id {e.id}")
            w = self.node_by_id.get(e.white)
            b = self.node_by_id.get(e.black)
            if w is None or b is None:
                raise ValueError(f"edge {e.id} references a missing node")
            if w.color != WHITE or b.color != BLACK:
                raise ValueError(f"edge {e.id} endpoint colors are wrong")
            self.edge_by_id[e.id] = e
            self._incident[e.white].append(e.id)
            self._incident[e.black].append(e.id)
        seen = set()
        for n in self.nodes:
            if n.pos in seen:
                raise ValueError("two nodes share a position")
            seen.add(n.pos)

    def node(self, nid: int) -> Node:
        return self.node_by_id[nid]

    def edge(self, eid: int) -> Edge:
        return self.edge_by_id[eid]

    def edges_at(self, nid: int) -> Tuple[int, ...]:
        return tuple(self._incident[nid])

    def degree(self, nid: int) -> int:
        return len(self._incident[nid])

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DimerModel)
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return f"DimerModel({len(self.nodes)} nodes, {len(self.edges)} edges)"


def edge_segment(model: DimerModel, e: Edge) -> Tuple[Pt, Pt]:
    """Planar segment of an edge: white position to translated black position."""
    w = model.node(e.white).pos
    b = model.node(e.black).pos
    return w, (b[0] + e.offset[0], b[1] + e.offset[1])


def edge_direction_at(model: DimerModel, e: Edge, nid: int) -> Pt:
    """Outgoing direction of an edge at one of its endpoints."""
    w, b = edge_segment(model, e)
    if nid == e.white:
        return (b[0] - w[0], b[1] - w[1])
    if nid == e.black:
        return (w[0] - b[0], w[1] - b[1])
    raise ValueError(f"edge {e.id} is not incident to node {nid}")


def _angle_half(v) -> int:
    # 0 for angles in [0, pi), 1 for [pi, 2pi); start of the sweep is (1,0).
    if v[1] > 0 or (v[1] == 0 and v[0] > 0):
        return 0
    return 1


def angle_less(u, v) -> bool:
    """Strict counterclockwise comparison of nonzero directions from (1,0)."""
    hu, hv = _angle_half(u), _angle_half(v)
    if hu != hv:
        return hu < hv
    return u[0] * v[1] - u[1] * v[0] > 0


def angle_equal(u, v) -> bool:
    return _angle_half(u) == _angle_half(v) and u[0] * v[1] - u[1] * v[0] == 0


def rotation_system(model: DimerModel) -> Dict[int, Tuple[int, ...]]:
    """Counterclockwise cyclic edge order at every node, by exact angles."""
    rot: Dict[int, Tuple[int, ...]] = {}
    for n in model.nodes:
        incident = list(model.edges_at(n.id))
        dirs = {eid: edge_direction_at(model, model.edge(eid), n.id) for eid in incident}
        for i, e1 in enumerate(incident):
            for e2 in incident[i + 1 :]:
                if angle_equal(dirs[e1], dirs[e2]):
                    raise TwoEdgesSameDirectionError(
                        f"edges {e1} and {e2} leave node {n.id} at the same angle",
                        node=n.id,
                    )
        order = sorted(incident)
        # insertion sort with the exact comparator
        out: List[int] = []
        for eid in order:
            k = 0
            while k < len(out) and angle_less(dirs[out[k]], dirs[eid]):
                k += 1
            out.insert(k, eid)
        rot[n.id] = tuple(out)
    return rot


def next_face_side(
    model: DimerModel, rot: Dict[int, Tuple[int, ...]], side: Tuple[int, int]
) -> Tuple[int, int]:
    """Successor of a directed edge side along the face on its left."""
    eid, d = side
    e = model.edge(eid)
    head = e.black if d == 1 else e.white
    cycle = rot[head]
    i = cycle.index(eid)
    f = cycle[(i - 1) % len(cycle)]
    head_color = model.node(head).color
    return (f, 1 if head_color == WHITE else -1)


def faces(model: DimerModel, rot: Optional[Dict[int, Tuple[int, ...]]] = None) -> List[Face]:
    """All faces, traced with the interior on the left of each side."""
    if rot is None:
        rot = rotation_system(model)
    sides = [(e.id, 1) for e in model.edges] + [(e.id, -1) for e in model.edges]
    sides.sort(key=lambda s: (s[0], 0 if s[1] == 1 else 1))
    used = set()
    out: List[Face] = []
    for start in sides:
        if start in used:
            continue
        boundary = []
        cur = start
        while True:
            boundary.append(cur)
            used.add(cur)
            cur = next_face_side(model, rot, cur)
            if cur == start:
                break
            if cur in used:
                raise ValueError("face tracing revisited a side; rotation system broken")
        out.append(Face(id=len(out), boundary=tuple(boundary)))
    return out


def face_offset_sum(model: DimerModel, face: Face) -> Vec:
    ox = oy = 0
    for eid, d in face.boundary:
        e = model.edge(eid)
        ox += d * e.offset[0]
        oy += d * e.offset[1]
    return (ox, oy)


@dataclass
class ValidationReport:
    univalent: Tuple[int, ...] = ()
    crossing: Tuple[Tuple[int, int], ...] = ()
    same_direction: Tuple[int, ...] = ()
    non_disc_faces: Tuple[int, ...] = ()
    euler: Tuple[int, int, int] = (0, 0, 0)
    euler_ok: bool = False
    connected: bool = False

    @property
    def ok(self) -> bool:
        return (
            not self.univalent
            and not self.crossing
            and not self.same_direction
            and not self.non_disc_faces
            and self.euler_ok
            and self.connected
        )

    def failures(self) -> List[str]:
        out = []
        if self.univalent:
            out.append(f"univalent nodes {list(self.univalent)}")
        if self.crossing:
            out.append(f"crossing edge pairs {list(self.crossing)}")
        if self.same_direction:
            out.append(f"coincident edge directions at nodes {list(self.same_direction)}")
        if self.non_disc_faces:
            out.append(f"faces with nonzero offset {list(self.non_disc_faces)}")
        if not self.euler_ok:
            out.append(f"Euler count V-E+F = {self.euler[0]-self.euler[1]+self.euler[2]} != 0")
        if not self.connected:
            out.append("graph is disconnected")
        return out


def _scaled_segments(model: DimerModel):
    denoms = [1]
    for n in model.nodes:
        denoms.append(n.pos[0].denominator)
        denoms.append(n.pos[1].denominator)
    scale = lcm(*denoms)
    segs = {}
    for e in model.edges:
        p, q = edge_segment(model, e)
        segs[e.id] = (
            (int(p[0] * scale), int(p[1] * scale)),
            (int(q[0] * scale), int(q[1] * scale)),
        )
    return scale, segs


def _cross3(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _on_segment(a, b, p) -> bool:
    return (
        min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
        and min(a[1], b[1]) <= p[1] <= max(a[1], b[1])
    )


def _segments_conflict(p1, p2, q1, q2) -> bool:
    """True unless the segments are disjoint or touch only at shared endpoints."""
    d1 = _cross3(q1, q2, p1)
    d2 = _cross3(q1, q2, p2)
    d3 = _cross3(p1, p2, q1)
    d4 = _cross3(p1, p2, q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and (
        (d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)
    ):
        return True
    if d1 == 0 and d2 == 0 and d3 == 0 and d4 == 0:
        # collinear: reject any overlap longer than a point; a single shared
        # point must be an endpoint of both
        if p1 > p2:
            p1, p2 = p2, p1
        if q1 > q2:
            q1, q2 = q2, q1
        lo = max(p1, q1)
        hi = min(p2, q2)
        if lo > hi:
            return False
        if lo != hi:
            return True
        return not (lo in (p1, p2) and lo in (q1, q2))
    for d, p, (a, b) in ((d1, p1, (q1, q2)), (d2, p2, (q1, q2)),
                         (d3, q1, (p1, p2)), (d4, q2, (p1, p2))):
        if d == 0 and _on_segment(a, b, p):
            if p != a and p != b:
                return True
            # shared endpoint: fine only if it is an endpoint of the other too
            if p not in (p1, p2) or p not in (q1, q2):
                return True
    return False


def _crossing_pairs(model: DimerModel) -> List[Tuple[int, int]]:
    scale, segs = _scaled_segments(model)
    ids = sorted(segs)
    boxes = {}
    for eid in ids:
        (x1, y1), (x2, y2) = segs[eid]
        boxes[eid] = (min(x1, x2), min(y1, y2), max(x1, x2), max(y1, y2))
    bad = []
    for i, e1 in enumerate(ids):
        p1, p2 = segs[e1]
        bx1 = boxes[e1]
        for e2 in ids[i:]:
            q1, q2 = segs[e2]
            bx2 = boxes[e2]
            # integer translate range where bounding boxes can touch
            txs = range(
                -((bx2[2] - bx1[0]) // scale) - 1, (bx1[2] - bx2[0]) // scale + 2
            )
            tys = range(
                -((bx2[3] - bx1[1]) // scale) - 1, (bx1[3] - bx2[1]) // scale + 2
            )
            hit = False
            for tx in txs:
                for ty in tys:
                    if e1 == e2 and tx == 0 and ty == 0:
                        continue
                    dx, dy = tx * scale, ty * scale
                    if (
                        bx2[0] + dx > bx1[2]
                        or bx2[2] + dx < bx1[0]
                        or bx2[1] + dy > bx1[3]
                        or bx2[3] + dy < bx1[1]
                    ):
                        continue
                    if _segments_conflict(
                        p1, p2, (q1[0] + dx, q1[1] + dy), (q2[0] + dx, q2[1] + dy)
                    ):
                        bad.append((e1, e2))
                        hit = True
                        break
                if hit:
                    break
    return bad


def validate(model: DimerModel) -> ValidationReport:
    """Check the axioms: valence, planarity, disc faces, connectivity."""
    univalent = tuple(n.id for n in model.nodes if model.degree(n.id) < 2)
    crossing = tuple(_crossing_pairs(model))
    same_direction: Tuple[int, ...] = ()
    non_disc: Tuple[int, ...] = ()
    euler = (len(model.nodes), len(model.edges), 0)
    euler_ok = False
    try:
        rot = rotation_system(model)
    except TwoEdgesSameDirectionError as exc:
        same_direction = (exc.node,)
    else:
        fs = faces(model, rot)
        euler = (len(model.nodes), len(model.edges), len(fs))
        euler_ok = euler[0] - euler[1] + euler[2] == 0
        non_disc = tuple(
            f.id for f in fs if face_offset_sum(model, f) != (0, 0)
        )
    # connectivity over the undirected graph
    connected = False
    if model.nodes:
        seen = {model.nodes[0].id}
        stack = [model.nodes[0].id]
        while stack:
            nid = stack.pop()
            for eid in model.edges_at(nid):
                e = model.edge(eid)
                for other in (e.white, e.black):
                    if other not in seen:
                        seen.add(other)
                        stack.append(other)
        connected = len(seen) == len(model.nodes)
    return ValidationReport(
        univalent=univalent,
        crossing=crossing,
        same_direction=same_direction,
        non_disc_faces=non_disc,
        euler=euler,
        euler_ok=euler_ok,
        connected=connected,
    )


def remove_divalent(model: DimerModel) -> DimerModel:
    """Merge away all degree-2 nodes (each divalent node's two neighbors are
    identified and placed at the divalent node's position)."""
    nodes = {n.id: n for n in model.nodes}
    edges = {e.id: e for e in model.edges}

    def degree(nid):
        return sum(1 for e in edges.values() if nid in (e.white, e.black))

    while True:
        div = None
        for nid in sorted(nodes):
            if degree(nid) == 2:
                div = nid
                break
        if div is None:
            break
        v = nodes[div]
        inc = sorted(e.id for e in edges.values() if div in (e.white, e.black))
        e1, e2 = edges[inc[0]], edges[inc[1]]
        if v.color == WHITE:
            n1, n2 = e1.black, e2.black
            o1, o2 = e1.offset, e2.offset
        else:
            n1, n2 = e1.white, e2.white
            o1, o2 = e1.offset, e2.offset
        if n1 == n2:
            raise MergeLoopError(
                f"divalent node {div} has a single neighbor {n1}"
            )
        merged = Node(id=v.id, color=nodes[n1].color, pos=v.pos)
        del edges[e1.id]
        del edges[e2.id]
        del nodes[div]
        del nodes[n1]
        del nodes[n2]
        nodes[merged.id] = merged
        for eid in sorted(edges):
            e = edges[eid]
            if e.white in (n1, n2):
                shift = o1 if e.white == n1 else o2
                edges[eid] = Edge(
                    id=e.id,
                    white=merged.id,
                    black=e.black,
                    offset=(e.offset[0] - shift[0], e.offset[1] - shift[1]),
                )
            elif e.black in (n1, n2):
                shift = o1 if e.black == n1 else o2
                edges[eid] = Edge(
                    id=e.id,
                    white=e.white,
                    black=merged.id,
                    offset=(e.offset[0] - shift[0], e.offset[1] - shift[1]),
                )
    return DimerModel(nodes.values(), edges.values())


# ---------------------------------------------------------------------------
# Symmetry


@dataclass(frozen=True)
class ElementAction:
    element: Mat2
    linear: Mat2  # action on torus coordinates (inverse transpose of element)
    translation: Pt
    node_perm: Dict[int, int]
    edge_perm: Dict[int, int]
    face_perm: Dict[int, int]


@dataclass
class SymmetryAction:
    elements: Tuple[Mat2, ...]
    maps: Dict[Mat2, ElementAction]

    def node_perm(self, h: Mat2) -> Dict[int, int]:
        return self._get(h).node_perm

    def edge_perm(self, h: Mat2) -> Dict[int, int]:
        return self._get(h).edge_perm

    def face_perm(self, h: Mat2) -> Dict[int, int]:
        return self._get(h).face_perm

    def _get(self, h: Mat2) -> ElementAction:
        if h not in self.maps:
            raise UnknownElementError(f"{h.rows()} is not in the stored group")
        return self.maps[h]

    def fixed_faces(self) -> List[int]:
        ids = None
        for h in self.elements:
            fixed = {f for f, g in self.maps[h].face_perm.items() if f == g}
            ids = fixed if ids is None else ids & fixed
        return sorted(ids or ())


def apply_isometry(model: DimerModel, action: SymmetryAction, h: Mat2):
    """Stored permutations (nodes, edges, faces) of one element."""
    em = action._get(h)
    return em.node_perm, em.edge_perm, em.face_perm


def fixed_face(action: SymmetryAction) -> int:
    fixed = action.fixed_faces()
    if not fixed:
        raise NoFixedFaceError("no face is fixed by the whole group")
    return fixed[0]


def _apply_affine(linear: Mat2, t: Pt, p: Pt) -> Pt:
    q = linear.apply(p)
    return (q[0] + t[0], q[1] + t[1])


def _element_map(model: DimerModel, h: Mat2, linear: Mat2, t: Pt):
    """Node and edge permutations of the affine map x -> linear x + t, or
    None if the map does not preserve the model."""
    det = h.det()
    pos_index = {n.pos: n.id for n in model.nodes}
    node_perm: Dict[int, int] = {}
    kappa: Dict[int, Vec] = {}
    for n in model.nodes:
        img = _apply_affine(linear, t, n.pos)
        img_mod = (frac(img[0]), frac(img[1]))
        target = pos_index.get(img_mod)
        if target is None:
            return None
        tn = model.node(target)
        want = n.color if det == 1 else (BLACK if n.color == WHITE else WHITE)
        if tn.color != want:
            return None
        node_perm[n.id] = target
        kappa[n.id] = (int(img[0] - img_mod[0]), int(img[1] - img_mod[1]))
    edge_index = {(e.white, e.black, e.offset): e.id for e in model.edges}
    edge_perm: Dict[int, int] = {}
    for e in model.edges:
        lo = linear.apply(e.offset)
        kw, kb = kappa[e.white], kappa[e.black]
        if det == 1:
            key = (
                node_perm[e.white],
                node_perm[e.black],
                (lo[0] + kb[0] - kw[0], lo[1] + kb[1] - kw[1]),
            )
        else:
            key = (
                node_perm[e.black],
                node_perm[e.white],
                (kw[0] - kb[0] - lo[0], kw[1] - kb[1] - lo[1]),
            )
        img_e = edge_index.get(key)
        if img_e is None:
            return None
        edge_perm[e.id] = img_e
    if len(set(node_perm.values())) != len(node_perm):
        return None
    if len(set(edge_perm.values())) != len(edge_perm):
        return None
    return node_perm, edge_perm


def _candidate_translations(model: DimerModel, h: Mat2, linear: Mat2) -> List[Pt]:
    base = model.nodes[0]
    det = h.det()
    want = base.color if det == 1 else (BLACK if base.color == WHITE else WHITE)
    img = linear.apply(base.pos)
    out = []
    for n in model.nodes:
        if n.color != want:
            continue
        t = (frac(n.pos[0] - img[0]), frac(n.pos[1] - img[1]))
        out.append(t)
    return sorted(set(out))


def _generating_words(elements: Sequence[Mat2]):
    """A small generating subset plus a word (generator index list) for
    every element."""
    from itertools import combinations

    elems = set(elements)
    for r in (1, 2):
        for gens in combinations(sorted(elements), r):
            words = {Mat2.identity(): []}
            frontier = [Mat2.identity()]
            while frontier:
                nxt = []
                for e in frontier:
                    for gi, g in enumerate(gens):
                        p = e.mul(g)
                        if p in elems and p not in words:
                            words[p] = words[e] + [gi]
                            nxt.append(p)
                frontier = nxt
            if len(words) == len(elems):
                return list(gens), words
    raise ValueError("group needs more than two generators; unexpected")


def _face_perm_from_sides(model, face_list, side_to_face, edge_perm) -> Optional[Dict[int, int]]:
    perm: Dict[int, int] = {}
    for f in face_list:
        imgs = {side_to_face[(edge_perm[eid], d)] for eid, d in f.boundary}
        if len(imgs) != 1:
            return None
        perm[f.id] = imgs.pop()
    if len(set(perm.values())) != len(perm):
        return None
    return perm


def symmetry_actions(
    model: DimerModel, elements: Iterable[Mat2]
) -> Iterator[SymmetryAction]:
    """Yield every affine realization of the group on the model.

    Translations are chosen per generator (candidates read off node-image
    differences) and propagated by composition; coherent assignments are
    yielded in a deterministic order.  Distinct assignments can be
    genuinely different actions (fixing a face, a node, or nothing)."""
    elems = tuple(sorted(set(elements)))
    if Mat2.identity() not in elems:
        raise ValueError("element list must contain the identity")
    gens, words = _generating_words(elems)
    lin = {h: h.contragredient() for h in elems}
    face_list = faces(model)
    side_to_face = {}
    for f in face_list:
        for side in f.boundary:
            side_to_face[side] = f.id

    cand = [_candidate_translations(model, g, lin[g]) for g in gens]

    def attempt(choice: List[Pt]) -> Optional[SymmetryAction]:
        affine: Dict[Mat2, Pt] = {}
        for h in sorted(elems, key=lambda m: len(words[m])):
            w = words[h]
            # compose left to right: the word g1 g2 ... acts as map(g1) after
            # map(g2) applied to the argument, so extend on the right
            lin_tot = Mat2.identity()
            t = (Fraction(0), Fraction(0))
            cur = Mat2.identity()
            for gi in w:
                g = gens[gi]
                step = lin_tot.apply(choice[gi])
                t = (t[0] + step[0], t[1] + step[1])
                lin_tot = lin_tot.mul(lin[g])
                cur = cur.mul(g)
            assert cur == h
            affine[h] = (frac(t[0]), frac(t[1]))
        if affine[Mat2.identity()] != (Fraction(0), Fraction(0)):
            return None
        maps = {}
        for h in elems:
            res = _element_map(model, h, lin[h], affine[h])
            if res is None:
                return None
            node_perm, edge_perm = res
            face_perm = _face_perm_from_sides(model, face_list, side_to_face, edge_perm)
            if face_perm is None:
                return None
            maps[h] = ElementAction(
                element=h,
                linear=lin[h],
                translation=affine[h],
                node_perm=node_perm,
                edge_perm=edge_perm,
                face_perm=face_perm,
            )
        return SymmetryAction(elements=elems, maps=maps)

    def search(idx: int, choice: List[Pt]) -> Iterator[SymmetryAction]:
        if idx == len(gens):
            act = attempt(choice)
            if act is not None:
                yield act
            return
        for t in cand[idx]:
            yield from search(idx + 1, choice + [t])

    yield from search(0, [])


def find_symmetry(
    model: DimerModel,
    elements: Iterable[Mat2],
    require_fixed_face: bool = False,
) -> SymmetryAction:
    """First affine realization of the group on the model.

    With require_fixed_face the search continues until some realization
    fixes a face.  Raises NotSymmetricError when the group does not act
    and NoFixedFaceError when it acts but never fixes a face."""
    acts = False
    for act in symmetry_actions(model, elements):
        acts = True
        if not require_fixed_face or act.fixed_faces():
            return act
    if acts:
        raise NoFixedFaceError("group acts on the model but fixes no face")
    raise NotSymmetricError("no affine action of the group preserves the model")
