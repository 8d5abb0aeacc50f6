import pytest
from hypothesis import given, settings, strategies as st

from knotforge.census import (
    BoundViolated, CapExceeded, CensusRow, CensusTable, Disconnected,
    bicubic_transform, format_census_tsv, generate_by_insertion,
    generate_connected_diagrams, mirror_diagram, oriented_census,
    parse_census_tsv, tutte_count, verify_bound_table,
    _check_table, _insert_all, _orientations, _shadow_key,
)
from knotforge.diagram import assemble, canonicalize, decode, validate, writhe
from knotforge.towers import Lit, Pow, evaluate
from oracles import closed_braid, rooted_bicubic_square_counts


def bare_circle():
    return assemble([1, 0, -1, -1], [-1], [0], outer=1)


def infinity(over=0, outer_dart=1):
    return assemble([1, 0, 3, 2], [over], outer=outer_dart)


def trefoil(oriented=False):
    return closed_braid(2, [(0, 1)] * 3, oriented=oriented)


# counts pinned after the two pipelines agreed on them; the agreement
# itself is retested below, the literals guard against regressions
UNORIENTED = {0: 1, 1: 4, 2: 21, 3: 190}
ORIENTED = {0: 2, 1: 6, 2: 46, 3: 448}


# ---------------------------------------------------------------------------
# counting formula


def test_tutte_count_values():
    assert [tutte_count(n) for n in (1, 2, 3, 4)] == [2, 9, 54, 378]


def test_tutte_count_rejects_small_n():
    with pytest.raises(ValueError):
        tutte_count(0)
    with pytest.raises(ValueError):
        tutte_count(-3)


def test_tutte_count_matches_rooted_bicubic_enumeration():
    # independent oracle: count rooted bicubic sphere maps whose
    # root-colour faces are all quadrilaterals, by brute construction
    counts = rooted_bicubic_square_counts(3)
    assert counts == {n: tutte_count(n) for n in (1, 2, 3)}


# ---------------------------------------------------------------------------
# the census itself


def test_zero_crossing_census_is_one_circle():
    circle_code = canonicalize(bare_circle())
    assert generate_connected_diagrams(0) == {circle_code}
    assert generate_by_insertion(0) == {circle_code}


def test_one_crossing_census_matches_brute_force():
    # generate_by_insertion(1) IS the independent brute force over all
    # pairings of a single vertex's darts
    a = generate_connected_diagrams(1)
    b = generate_by_insertion(1)
    assert a == b
    assert len(a) == UNORIENTED[1]


@pytest.mark.parametrize("n", [2, 3])
def test_pipelines_agree(n):
    assert generate_connected_diagrams(n) == generate_by_insertion(n)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_census_counts(n):
    assert len(generate_connected_diagrams(n)) == UNORIENTED[n]


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_members_are_valid_connected_diagrams(n):
    for code in generate_connected_diagrams(n):
        d = decode(code)
        assert validate(d).ok
        assert len(d.pieces()) == 1
        assert d.n_crossings() == n
        assert canonicalize(d) == code


def test_insertion_step_lands_inside_census():
    grown = _insert_all(infinity())
    assert grown <= generate_connected_diagrams(2)


def test_cap_is_enforced():
    with pytest.raises(CapExceeded):
        generate_connected_diagrams(5)
    with pytest.raises(CapExceeded):
        generate_by_insertion(5)
    with pytest.raises(CapExceeded):
        generate_connected_diagrams(3, cap=2)
    with pytest.raises(ValueError):
        generate_connected_diagrams(-1)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_census_closed_under_redecoration(data):
    codes = sorted(generate_connected_diagrams(2))
    code = data.draw(st.sampled_from(codes))
    d = decode(code)
    v = data.draw(st.integers(0, d.nv - 1))
    over = list(d.over)
    over[v] = 1 - over[v]
    flipped = assemble(d.alpha, over, sorted(d.phantom),
                       outer=min(d.regions[0]))
    assert canonicalize(flipped) in generate_connected_diagrams(2)


# ---------------------------------------------------------------------------
# mirrors


def test_mirror_is_an_involution():
    for code in sorted(generate_connected_diagrams(2)):
        d = decode(code)
        assert canonicalize(mirror_diagram(mirror_diagram(d))) == code


@pytest.mark.parametrize("n", [0, 1, 2])
def test_census_contains_all_mirrors(n):
    codes = generate_connected_diagrams(n)
    for code in codes:
        assert canonicalize(mirror_diagram(decode(code))) in codes


def test_mirror_negates_writhe():
    t = trefoil(oriented=True)
    assert writhe(t) == 3
    assert writhe(mirror_diagram(t)) == -3


def test_mirror_of_braid_closure_inverts_the_letters():
    # as unoriented plane diagrams: reflect, then spin the picture flat
    m = mirror_diagram(trefoil())
    anti = closed_braid(2, [(0, 0)] * 3, oriented=False)
    assert canonicalize(m) == canonicalize(anti)


def test_oriented_mirror_reverses_travel_direction():
    # the plane spin that returns the closure arcs to the right-hand
    # side also reverses every strand
    m = canonicalize(mirror_diagram(trefoil(oriented=True)))
    anti = decode(canonicalize(closed_braid(2, [(0, 0)] * 3)))
    variants = [canonicalize(o) for o in _orientations(anti)]
    assert m in variants
    assert m != variants[0]   # not the as-drawn direction


# ---------------------------------------------------------------------------
# orientations


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_oriented_census_counts(n):
    assert len(oriented_census(n)) == ORIENTED[n]


def test_oriented_circle_has_two_directions():
    # clockwise and counterclockwise circles differ by winding number
    assert len(oriented_census(0)) == 2


@pytest.mark.parametrize("n", [0, 1, 2])
def test_oriented_census_sandwiched_by_component_count(n):
    unoriented = generate_connected_diagrams(n)
    raw = sum(2 ** len(decode(c).components()) for c in unoriented)
    k = len(oriented_census(n))
    assert len(unoriented) <= k <= raw


# ---------------------------------------------------------------------------
# quadrilateral expansion


def test_expansion_of_kink_has_one_root_colour_face():
    bm = bicubic_transform(infinity())
    squares = bm.root_colour_faces()
    assert len(squares) == 1
    assert all(len(f) == 4 for f in squares)


def test_expansion_of_trefoil_has_three_root_colour_faces():
    bm = bicubic_transform(trefoil())
    assert len(bm.root_colour_faces()) == 3


@pytest.mark.parametrize("n", [1, 2, 3])
def test_expansion_is_bicubic_and_three_colourable(n):
    for code in generate_connected_diagrams(n):
        bm = bicubic_transform(decode(code))
        assert bm.degree_ok()
        assert bm.vertex_bipartition() is not None
        faces = bm.faces()
        assert bm.nv - 3 * bm.nv // 2 + len(faces) == 2
        col = bm.face_colouring()
        assert col is not None
        squares = bm.root_colour_faces()
        assert len(squares) == n
        assert all(len(f) == 4 for f in squares)


def test_expansion_keeps_over_marks():
    d = trefoil()
    assert bicubic_transform(d).over_marks == d.over


def test_expansion_round_trips_the_shadow():
    # rebuild the 4-valent map from the squares alone: injectivity
    # evidence for the expansion once the root is pinned
    for code in sorted(generate_connected_diagrams(2)):
        d = decode(code)
        bm = bicubic_transform(d)
        pos = {}
        squares = bm.root_colour_faces()
        for i, f in enumerate(squares):
            for t, dd in enumerate(f):
                pos[dd // 3] = (i, t)
        assert len(pos) == 4 * d.nv
        rebuilt = [-1] * (4 * len(squares))
        for x in range(4 * d.nv):
            i, t = pos[x]
            j, u = pos[bm.alpha[3 * x] // 3]
            rebuilt[4 * i + t] = 4 * j + u
        assert _shadow_key(tuple(rebuilt), len(squares)) == \
            _shadow_key(d.alpha, d.nv)


def test_expansion_rejects_disconnected():
    two_circles = assemble([1, 0, -1, -1, 5, 4, -1, -1], [-1, -1], [0, 1],
                           outer=1, nests=[(5, 1)])
    with pytest.raises(Disconnected):
        bicubic_transform(two_circles)


def test_expansion_rejects_crossing_free():
    with pytest.raises(ValueError):
        bicubic_transform(bare_circle())


def test_expansion_accepts_connected_multi_component_links():
    hopf = closed_braid(2, [(0, 1), (0, 1)], oriented=False)
    assert len(hopf.components()) == 2
    assert len(bicubic_transform(hopf).root_colour_faces()) == 2


# ---------------------------------------------------------------------------
# bound table


def test_verify_bound_table_rows():
    table = verify_bound_table(3)
    assert [r.k for r in table.rows] == [0, 1, 2, 3]
    for r in table.rows:
        assert r.unoriented == UNORIENTED[r.k]
        assert r.oriented == ORIENTED[r.k]
        assert r.tutte == (1, 2, 9, 54)[r.k]
        assert evaluate(r.bound24) == 24 ** (r.k + 1)
        assert evaluate(r.bound48) == 48 ** (r.k + 1)


def test_bounds_hold_with_room():
    table = verify_bound_table(3)
    total_u = total_o = 0
    for r in table.rows:
        assert r.unoriented <= 24 ** (r.k + 1)
        assert r.oriented <= 48 ** (r.k + 1)
        total_u += r.unoriented
        total_o += r.oriented
        assert total_u <= 24 ** (r.k + 1)
        assert total_o <= 48 ** (r.k + 1)


def test_doctored_table_raises_bound_violated():
    bad = CensusTable((CensusRow(0, 25, 2, 1,
                                 Pow(Lit(24), Lit(1)), Pow(Lit(48), Lit(1))),))
    with pytest.raises(BoundViolated):
        _check_table(bad)


def test_doctored_cumulative_raises_bound_violated():
    rows = (
        CensusRow(0, 20, 20, 1, Pow(Lit(24), Lit(1)), Pow(Lit(48), Lit(1))),
        CensusRow(1, 570, 570, 2, Pow(Lit(24), Lit(2)), Pow(Lit(48), Lit(2))),
    )
    with pytest.raises(BoundViolated, match="cumulative"):
        _check_table(CensusTable(rows))


def test_verify_bound_table_cap():
    with pytest.raises(CapExceeded):
        verify_bound_table(9)
    with pytest.raises(ValueError):
        verify_bound_table(-1)


# ---------------------------------------------------------------------------
# tsv


def test_tsv_round_trip():
    table = verify_bound_table(2)
    assert parse_census_tsv(format_census_tsv(table)) == table


def test_tsv_header_and_shape():
    text = format_census_tsv(verify_bound_table(1))
    lines = text.strip().split("\n")
    assert lines[0] == "k\tunoriented\toriented\ttutte\tbound24\tbound48"
    assert len(lines) == 3
    assert lines[1].split("\t") == ["0", "1", "2", "1", "24", "48"]


def test_tsv_parser_rejects_garbage():
    good = format_census_tsv(verify_bound_table(1))
    with pytest.raises(ValueError):
        parse_census_tsv("not a census\n")
    with pytest.raises(ValueError):
        parse_census_tsv(good.replace("\t24\t", "\t25\t"))
    with pytest.raises(ValueError):
        parse_census_tsv(good + "9\t1\n")
