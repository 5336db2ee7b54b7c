"""Tests for perfect-matching enumeration, height changes, and supports."""

import itertools
from fractions import Fraction

import pytest

from symdimer.construct import (
    dodecagon_model,
    hexagonal_model,
    octagon_model,
    square_model,
)
from symdimer.dimer import WHITE, DimerModel, Edge, Node, find_symmetry, frac_pt
from symdimer.lattice import canonical_group, normalize_translation
from symdimer.matchings import (
    CapExceededError,
    apply_to_matching,
    characteristic_polygon,
    enumerate_matchings,
    height_change,
    invariant_matching_at_origin,
    is_perfect_matching,
    matchings_at,
    max_weight_perfect_matching,
    support,
)

ALL_MODELS = [
    ("hexagonal", hexagonal_model),
    ("square", square_model),
    ("octagon", octagon_model),
    ("dodecagon", dodecagon_model),
]


def brute_force_matchings(model):
    """Independent check: try every edge subset of the right size."""
    whites = sum(1 for n in model.nodes if n.color == WHITE)
    found = []
    for combo in itertools.combinations(sorted(e.id for e in model.edges), whites):
        seen = set()
        for eid in combo:
            e = model.edge(eid)
            if e.white in seen or e.black in seen:
                break
            seen.add(e.white)
            seen.add(e.black)
        else:
            if len(seen) == len(model.nodes):
                found.append(tuple(combo))
    return found


@pytest.mark.parametrize("name,mk", ALL_MODELS)
def test_enumeration_matches_brute_force(name, mk):
    model = mk()
    got = sorted(enumerate_matchings(model))
    assert got == brute_force_matchings(model)
    for m in got:
        assert is_perfect_matching(model, m)


def test_catalog_matching_counts():
    assert len(enumerate_matchings(hexagonal_model())) == 3
    assert len(enumerate_matchings(square_model())) == 4
    assert len(enumerate_matchings(octagon_model())) == 9
    assert len(enumerate_matchings(dodecagon_model())) == 17


@pytest.mark.parametrize("name,mk", ALL_MODELS)
def test_every_edge_lies_in_some_matching(name, mk):
    model = mk()
    used = set()
    for m in enumerate_matchings(model):
        used.update(m)
    assert used == {e.id for e in model.edges}


def test_cap_exceeded_reports_partial_count():
    with pytest.raises(CapExceededError) as exc:
        enumerate_matchings(hexagonal_model(), cap=2)
    assert exc.value.count == 2
    assert len(enumerate_matchings(hexagonal_model(), cap=3)) == 3
    with pytest.raises(ValueError):
        enumerate_matchings(hexagonal_model(), cap=0)


def test_unbalanced_colors_give_no_matchings():
    nodes = [
        Node(0, "W", frac_pt((Fraction(1, 4), Fraction(1, 4)))),
        Node(1, "B", frac_pt((Fraction(3, 4), Fraction(1, 4)))),
        Node(2, "B", frac_pt((Fraction(1, 2), Fraction(3, 4)))),
    ]
    edges = [
        Edge(0, 0, 1, (0, 0)),
        Edge(1, 0, 2, (0, 0)),
        Edge(2, 0, 1, (-1, 0)),
    ]
    assert enumerate_matchings(DimerModel(nodes, edges)) == []


def test_height_changes_hexagonal():
    model = hexagonal_model()
    ms = enumerate_matchings(model)
    assert ms[0] == (0,)
    hts = {height_change(model, m, ms[0]) for m in ms}
    assert hts == {(0, 0), (0, 1), (-1, 0)}


def test_height_changes_square():
    model = square_model()
    ms = enumerate_matchings(model)
    assert ms[0] == (0,)
    hts = {height_change(model, m, ms[0]) for m in ms}
    assert hts == {(0, 0), (0, -1), (1, 0), (1, -1)}


def test_characteristic_polygons():
    assert characteristic_polygon(hexagonal_model()) == (
        (-1, 0), (0, 0), (0, 1),
    )
    assert characteristic_polygon(square_model()) == (
        (0, -1), (1, -1), (1, 0), (0, 0),
    )
    # These two are centered at the origin with no translation needed.
    assert characteristic_polygon(octagon_model()) == (
        (-1, 0), (0, -1), (1, 0), (0, 1),
    )
    assert characteristic_polygon(dodecagon_model()) == (
        (-1, -1), (0, -1), (1, 0), (1, 1), (0, 1), (-1, 0),
    )


def test_reference_shift_translates_polygon():
    model = octagon_model()
    ms = enumerate_matchings(model)
    a = characteristic_polygon(model, reference=ms[0])
    b = characteristic_polygon(model, reference=ms[1])
    assert normalize_translation(a) == normalize_translation(b)


def test_matchings_at_corners_are_unique():
    model = octagon_model()
    for corner in [(-1, 0), (0, -1), (1, 0), (0, 1)]:
        assert len(matchings_at(model, corner)) == 1
    assert len(matchings_at(model, (0, 0))) == 9 - 4


def test_matching_action_equivariance():
    model = octagon_model()
    action = find_symmetry(model, canonical_group("D8"))
    ms = enumerate_matchings(model)
    ref = ms[0]
    for h in action.elements:
        href = apply_to_matching(action, h, ref)
        for m in ms:
            moved = apply_to_matching(action, h, m)
            assert is_perfect_matching(model, moved)
            assert height_change(model, moved, href) == h.apply(
                height_change(model, m, ref)
            )


def test_invariant_matching_octagon():
    model = octagon_model()
    action = find_symmetry(model, canonical_group("D8"))
    inv = invariant_matching_at_origin(model, action)
    assert inv == (0, 2, 5, 7)
    ref = enumerate_matchings(model)[0]
    assert height_change(model, inv, ref) == (0, 0)
    for h in action.elements:
        assert apply_to_matching(action, h, inv) == inv


def test_invariant_matching_orbit_fallback():
    # A tiny cap forces the orbit-cover search; it must agree.
    model = octagon_model()
    action = find_symmetry(model, canonical_group("D8"))
    assert invariant_matching_at_origin(model, action, cap=3) == (0, 2, 5, 7)
    model = dodecagon_model()
    action = find_symmetry(model, canonical_group("D12"))
    full = invariant_matching_at_origin(model, action)
    assert full == (0, 2, 4, 6, 8, 10)
    assert invariant_matching_at_origin(model, action, cap=2) == full


@pytest.mark.parametrize("name,mk", ALL_MODELS)
def test_support_agrees_with_enumeration(name, mk):
    model = mk()
    ms = enumerate_matchings(model)
    ref = ms[0]
    for u in [(1, 0), (0, 1), (-1, 0), (0, -1), (2, 1), (-1, -3), (3, -2)]:
        value, best = support(model, ref, u)
        assert is_perfect_matching(model, best)
        hts = [height_change(model, m, ref) for m in ms]
        assert value == max(h[0] * u[0] + h[1] * u[1] for h in hts)
        bh = height_change(model, best, ref)
        assert bh[0] * u[0] + bh[1] * u[1] == value


def test_max_weight_matching_prefers_heavy_edges():
    model = square_model()
    weights = {0: 5, 1: 0, 2: 0, 3: 1}
    assert max_weight_perfect_matching(model, weights) == (0,)
    weights = {0: 0, 1: 7, 2: 0, 3: 1}
    assert max_weight_perfect_matching(model, weights) == (1,)
