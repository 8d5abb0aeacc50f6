from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from knotforge.diagram import (
    CanonicalCode, InvalidDiagram, assemble, canonicalize, decode, validate,
    writhe,
)
from knotforge.reidemeister import (
    IllegalMove, Move, MoveSequence, NotFoundWithinDepth, ResourceLimit,
    apply_move, bounded_bfs, enumerate_applied, enumerate_moves,
    format_certificate, parse_certificate, replay_and_verify,
)
from oracles import braid_component_count, braid_signs, closed_braid


def bare_circle(oriented=False, reverse=False):
    ori = None if not oriented else [1 if reverse else 0]
    return assemble([1, 0, -1, -1], [-1], [0], outer=1, orientation=ori)


def infinity(over=0, outer_dart=1):
    return assemble([1, 0, 3, 2], [over], outer=outer_dart)


def trefoil():
    return closed_braid(2, [(0, 1)] * 3)


def kind_counts(d):
    return Counter(m.kind for m in enumerate_moves(d))


def face_ids_of_size(d, k):
    fo = d.face_of()
    sizes = Counter(fo.values())
    return sorted(f for f, c in sizes.items() if c == k)


# -- enumeration on the smallest diagrams -----------------------------------


def test_circle_move_menu():
    c = bare_circle(oriented=True)
    moves = enumerate_moves(c)
    counts = Counter(m.kind for m in moves)
    # nothing to shrink, nothing to slide; only pokes and kinks go in
    assert set(counts) == {"R1+", "R2+"}
    assert counts["R1+"] == 4       # two darts, kink on either side of each
    for m in moves:
        out = apply_move(c, m)
        assert validate(out).ok
        assert out.n_crossings() == (1 if m.kind == "R1+" else 2)
        assert len(out.components()) == 1


def test_kink_sites_depend_on_outer_face():
    # both lobes of the figure-eight are monogons, but one stops being a
    # legal site when it is the unbounded region
    assert kind_counts(infinity(outer_dart=1))["R1-"] == 2
    assert kind_counts(infinity(outer_dart=0))["R1-"] == 1
    circ = canonicalize(bare_circle())
    for m in enumerate_moves(infinity(outer_dart=1)):
        if m.kind == "R1-":
            assert canonicalize(apply_move(infinity(outer_dart=1), m)) == circ


def test_enumeration_is_deterministic_and_sorted():
    t = trefoil()
    a = enumerate_moves(t)
    b = enumerate_moves(t)
    assert a == b
    assert [m.sort_key() for m in a] == sorted(m.sort_key() for m in a)


# -- round trips ------------------------------------------------------------


def test_r1_plus_has_an_undo():
    c = bare_circle(oriented=True)
    code = canonicalize(c)
    for m in enumerate_moves(c):
        if m.kind != "R1+":
            continue
        kinked = apply_move(c, m)
        undone = {
            canonicalize(apply_move(kinked, u))
            for u in enumerate_moves(kinked) if u.kind == "R1-"
        }
        assert code in undone


def test_wrong_lobe_reverses_the_circle():
    # kink poked into the outer region: the loop lobe stays a bounded
    # monogon, and removing that one instead flips the winding
    c = bare_circle(oriented=True)
    m = next(m for m in enumerate_moves(c)
             if m.kind == "R1+" and m.darts == (1,))
    kinked = apply_move(c, m)
    results = {
        canonicalize(apply_move(kinked, u))
        for u in enumerate_moves(kinked) if u.kind == "R1-"
    }
    assert results == {
        canonicalize(bare_circle(oriented=True)),
        canonicalize(bare_circle(oriented=True, reverse=True)),
    }


def test_r2_plus_has_an_undo():
    t = trefoil()
    code = canonicalize(t)
    pokes = [m for m in enumerate_moves(t) if m.kind == "R2+"][:8]
    assert pokes
    for m in pokes:
        poked = apply_move(t, m)
        assert validate(poked).ok
        assert poked.n_crossings() == 5
        undone = {
            canonicalize(apply_move(poked, u))
            for u in enumerate_moves(poked) if u.kind == "R2-"
        }
        assert code in undone


# -- move legality ----------------------------------------------------------


def test_hopf_bigons_are_braid_like():
    h = closed_braid(2, [(0, 1)] * 2)
    assert kind_counts(h)["R2-"] == 0
    bigons = face_ids_of_size(h, 2)
    assert bigons
    for f in bigons:
        with pytest.raises(IllegalMove):
            apply_move(h, Move("R2-", (f,)))


def test_layered_triangle_is_immovable():
    # middle letter inverted: the three strands are cyclically over each
    # other around the triangle, so no strand can slide across
    d = closed_braid(3, [(0, 1), (1, 0), (0, 1)])
    assert kind_counts(d)["R3"] == 0
    (f,) = face_ids_of_size(d, 3)
    with pytest.raises(IllegalMove, match="cyclically"):
        apply_move(d, Move("R3", (f,)))


def test_mixed_sign_triangle_moves():
    d = closed_braid(3, [(0, 1), (1, 1), (0, 0)])
    slides = [m for m in enumerate_moves(d) if m.kind == "R3"]
    assert slides
    out = apply_move(d, slides[0])
    assert validate(out).ok
    assert out.n_crossings() == 3
    assert writhe(out) == writhe(d) == 1


def test_apply_move_rejects_nonsense():
    t = trefoil()
    with pytest.raises(IllegalMove):
        apply_move(t, Move("R5", ()))
    with pytest.raises(IllegalMove):
        apply_move(t, Move("R1+", (0,)))            # no over bit
    with pytest.raises(IllegalMove):
        apply_move(t, Move("R1+", (999,), over=1))
    with pytest.raises(IllegalMove):
        apply_move(t, Move("R1-", (0,)))            # not a monogon
    pair = next(m for m in enumerate_moves(t)
                if m.kind == "R2+" and len(set(m.darts)) == 2)
    bad = Move("R2+", pair.darts, over=pair.over, islands=frozenset({0}))
    with pytest.raises(IllegalMove):
        apply_move(t, bad)


# -- the braid relation, checked against the closure oracle -----------------


@pytest.mark.parametrize("bit", [1, 0])
def test_braid_relation(bit):
    a = closed_braid(3, [(0, bit), (1, bit), (0, bit)])
    b = closed_braid(3, [(1, bit), (0, bit), (1, bit)])
    slides = [m for m in enumerate_moves(a) if m.kind == "R3"]
    assert len(slides) == 1
    out = apply_move(a, slides[0])
    assert canonicalize(out) == canonicalize(b)
    # and the slide is reversible
    back = {
        canonicalize(apply_move(out, m))
        for m in enumerate_moves(out) if m.kind == "R3"
    }
    assert canonicalize(a) in back


# -- invariants over random closed braids -----------------------------------


CROSSING_DELTA = {"R1+": 1, "R1-": -1, "R2+": 2, "R2-": -2, "R3": 0}


@st.composite
def braid_cases(draw):
    k = draw(st.integers(2, 4))
    extra = draw(st.lists(st.integers(0, k - 2), max_size=3))
    positions = draw(st.permutations(tuple(range(k - 1)) + tuple(extra)))
    letters = [(i, draw(st.integers(0, 1))) for i in positions]
    return k, letters


@settings(deadline=None, max_examples=20)
@given(braid_cases())
def test_every_enumerated_move_preserves_the_link(case):
    k, letters = case
    d = closed_braid(k, letters, oriented=True)
    w = writhe(d)
    ncomp = braid_component_count(k, letters)
    assert ncomp == len(d.components())
    for m, out in enumerate_applied(d):
        assert validate(out).ok
        assert out.n_crossings() - d.n_crossings() == CROSSING_DELTA[m.kind]
        assert len(out.components()) == ncomp
        dw = writhe(out) - w
        if m.kind in ("R1+", "R1-"):
            assert dw in (-1, 1)
        else:
            assert dw == 0
        if m.kind == "R3":
            back = {
                canonicalize(apply_move(out, u))
                for u in enumerate_moves(out) if u.kind == "R3"
            }
            assert canonicalize(d) in back


@settings(deadline=None, max_examples=20)
@given(braid_cases())
def test_writhe_matches_letter_signs(case):
    k, letters = case
    d = closed_braid(k, letters, oriented=True)
    assert writhe(d) == braid_signs(letters)


# -- bounded search and certificates ----------------------------------------


def unlink_two(nested=False):
    nests = ((5, 0),) if nested else ((4, 0),)
    return assemble([1, 0, -1, -1, 5, 4, -1, -1], [-1, -1], [0, 1],
                    outer=0, nests=nests, orientation=[0, 4])


def test_bfs_finds_the_kink_removal():
    res = bounded_bfs(infinity(outer_dart=1), bare_circle(), 2)
    assert isinstance(res, MoveSequence)
    assert [m.kind for m in res.moves] == ["R1-"]
    assert replay_and_verify(res)


def test_bfs_untangles_a_cancelling_pair():
    d = closed_braid(2, [(0, 1), (0, 0)])
    res = bounded_bfs(d, unlink_two(), 2)
    assert isinstance(res, MoveSequence)
    assert [m.kind for m in res.moves] == ["R2-"]
    assert replay_and_verify(res)
    # rerunning the search gives the identical certificate
    again = bounded_bfs(d, unlink_two(), 2)
    assert format_certificate(again) == format_certificate(res)
    # at depth one the two loops cannot also be nested
    assert isinstance(bounded_bfs(d, unlink_two(nested=True), 1),
                      NotFoundWithinDepth)


def test_bfs_trivial_when_codes_match():
    t = trefoil()
    res = bounded_bfs(t, t, 3)
    assert isinstance(res, MoveSequence) and res.moves == ()
    assert replay_and_verify(res)


def test_bfs_depth_miss_is_typed():
    h = closed_braid(2, [(0, 1)] * 2)
    res = bounded_bfs(h, unlink_two(), 1)
    assert isinstance(res, NotFoundWithinDepth)
    assert res.depth == 1 and res.explored > 0


def test_bfs_state_budget_is_typed():
    res = bounded_bfs(trefoil(), bare_circle(oriented=True), 4, max_states=5)
    assert isinstance(res, ResourceLimit)
    assert "state budget" in res.reason


def test_certificate_round_trip():
    d = closed_braid(2, [(0, 1), (0, 0)])
    res = bounded_bfs(d, unlink_two(), 2)
    text = format_certificate(res)
    assert parse_certificate(text) == res
    lines = text.splitlines()
    assert lines[0].startswith("S ")
    assert all(ln.startswith("M ") for ln in lines[1:])


def test_tampered_certificate_fails_replay():
    d = closed_braid(2, [(0, 1), (0, 0)])
    res = bounded_bfs(d, unlink_two(), 2)
    text = format_certificate(res)
    assert replay_and_verify(parse_certificate(text))
    forged = text.replace("M R2-", "M R1-")
    assert not replay_and_verify(parse_certificate(forged))
    # scrambling the start code still parses, replay is what catches it
    garbled = text.replace("S ", "S X", 1)
    assert not replay_and_verify(parse_certificate(garbled))


def test_certificate_parse_errors():
    good = "S A B\nM R1- 0\n"
    parse_certificate(good)
    with pytest.raises(InvalidDiagram):
        parse_certificate("S A B\nS A B\n")
    with pytest.raises(InvalidDiagram):
        parse_certificate("S A\n")
    with pytest.raises(InvalidDiagram):
        parse_certificate("M R1- 0\n")
    with pytest.raises(InvalidDiagram):
        parse_certificate("S A B\nQ what\n")
    with pytest.raises(InvalidDiagram):
        parse_certificate("S A B\nM R9 0\n")


def test_replay_rejects_garbage_codes():
    seq = MoveSequence(CanonicalCode("junk"), CanonicalCode("junk"), ())
    assert replay_and_verify(seq) is False


def test_replay_checks_the_end_code():
    c = bare_circle()
    seq = MoveSequence(canonicalize(c), canonicalize(trefoil()), ())
    assert replay_and_verify(seq) is False
