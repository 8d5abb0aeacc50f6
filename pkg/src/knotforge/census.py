"""Exhaustive census of small connected diagrams, with counting bounds.

Diagrams are censused by crossing number, up to ambient isotopy of the
plane with the outer region kept outer (the equality notion of
``diagram``).  Two generation pipelines are kept deliberately separate
so each can audit the other:

* matchings: every fixed-point-free pairing of the 4n dart ends against
  the standard vertex rotations, filtered to connected sphere maps and
  then decorated every possible way;
* insertion: every way of cutting one or two edge sides of an

  (n-1)-crossing census member and rerouting the cut strands through
  one new crossing.

The census feeds a bound table (counts against 24^(k+1) and 48^(k+1)
budgets) and a quadrilateral expansion of each diagram into a bipartite
cubic sphere map whose face 3-colouring is checked mechanically.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial

from .diagram import (
    CanonicalCode,
    Diagram,
    InvalidDiagram,
    assemble,
    canonicalize,
    decode,
    validate,
)
from .towers import Lit, Pow, TowerExpr, evaluate

DEFAULT_CAP = 4


class CensusError(Exception):
    pass


class CapExceeded(CensusError):
    """Asked for a crossing number above the configured cap."""


class Disconnected(CensusError):
    """The operation needs a connected diagram."""


class BoundViolated(CensusError):
    """A census invariant failed.  Should never fire."""


# ---------------------------------------------------------------------------
# counting formula


def _tutte_raw(n: int) -> int:
    num = 2 * factorial(2 * n) * 3 ** n
    den = factorial(n) * factorial(n + 2)
    q, r = divmod(num, den)
    if r:  # pragma: no cover - the ratio is always integral
        raise ArithmeticError(f"count formula not integral at {n}")
    return q


def tutte_count(n: int) -> int:
    """Rooted 4-valent sphere maps with n vertices: 2*(2n)!*3^n/(n!(n+2)!).

    Exact integer arithmetic throughout; n must be at least 1.
    """
    if n < 1:
        raise ValueError("tutte_count needs n >= 1")
    return _tutte_raw(n)


# ---------------------------------------------------------------------------
# shadow machinery (4-valent maps, no over/under yet)
#
# Darts 4v..4v+3 belong to vertex v, rotation is the slot order.  An
# alpha tuple pairs dart ends into edges; faces are orbits of
# sigma^-1 after alpha exactly as in ``diagram``.


def _connected(alpha, nv: int) -> bool:
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for s in range(4):
            w = alpha[4 * v + s] // 4
            if w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == nv


def _face_orbits(alpha) -> list[list[int]]:
    nd = len(alpha)
    seen = [False] * nd
    out = []
    for d0 in range(nd):
        if seen[d0]:
            continue
        orb = []
        d = d0
        while not seen[d]:
            seen[d] = True
            orb.append(d)
            t = alpha[d]
            d = 4 * (t // 4) + (t % 4 - 1) % 4
        out.append(orb)
    return out


def _shadow_matchings(n: int):
    """All pairings of the 4n darts that make a connected sphere map.

    Pure backtracking over fixed-point-free involutions; the partner of
    dart 0 is restricted to darts 1..4, which loses no abstract map
    (relabel the partner vertex to 1 and rotate its entry to slot 0).
    """
    nd = 4 * n
    alpha = [-1] * nd

    def rec(first_free):
        x = first_free
        while x < nd and alpha[x] != -1:
            x += 1
        if x == nd:
            if _connected(alpha, n) and len(_face_orbits(alpha)) == n + 2:
                yield tuple(alpha)
            return
        top = min(5, nd) if x == 0 else nd
        for y in range(x + 1, top):
            if alpha[y] == -1:
                alpha[x] = y
                alpha[y] = x
                yield from rec(x + 1)
                alpha[x] = -1
                alpha[y] = -1

    yield from rec(0)


def _shadow_key(alpha, nv: int):
    """Canonical label of the abstract rooted-free shadow: the minimum
    over all root darts of a breadth-first dart-stream encoding."""
    nd = 4 * nv
    best = None
    for root in range(nd):
        number = {root // 4: 0}
        entry = {root // 4: root}
        order = [root // 4]
        tokens = []
        qi = 0
        while qi < len(order):
            v = order[qi]
            qi += 1
            e = entry[v]
            x = e
            for _ in range(4):
                t = alpha[x]
                w = t // 4
                if w not in number:
                    number[w] = len(order)
                    entry[w] = t
                    order.append(w)
                    tokens.append(-1)
                else:
                    off = (t - entry[w]) % 4
                    tokens.append(4 * number[w] + off)
                x = 4 * v + (x % 4 + 1) % 4
        cand = tuple(tokens)
        if best is None or cand < best:
            best = cand
    return best


def _decorations(alpha, n: int) -> set[CanonicalCode]:
    """Every plane diagram carried by one shadow: all outer faces, all
    over/under choices."""
    reps = [min(orb) for orb in _face_orbits(alpha)]
    out = set()
    for bits in range(1 << n):
        over = [(bits >> v) & 1 for v in range(n)]
        for rep in reps:
            out.add(canonicalize(assemble(alpha, over, outer=rep)))
    return out


def _circle() -> Diagram:
    return assemble([1, 0, -1, -1], [-1], [0], outer=1)


_MATCHING_CACHE: dict[int, frozenset[CanonicalCode]] = {}
_INSERTION_CACHE: dict[int, frozenset[CanonicalCode]] = {}


def generate_connected_diagrams(n: int, cap: int = DEFAULT_CAP) -> set[CanonicalCode]:
    """All connected n-crossing diagrams, once each, as canonical codes.

    Matching pipeline: enumerate the connected shadows by dart pairing,
    dedup abstract shadows, then decorate each with every outer face and
    every over/under assignment and dedup by canonical code.
    """
    if n < 0:
        raise ValueError("crossing number cannot be negative")
    if n > cap:
        raise CapExceeded(f"n={n} above cap={cap}")
    if n not in _MATCHING_CACHE:
        if n == 0:
            codes = frozenset({canonicalize(_circle())})
        else:
            shadows = {}
            for alpha in _shadow_matchings(n):
                key = _shadow_key(alpha, n)
                if key not in shadows:
                    shadows[key] = alpha
            codes = set()
            for alpha in shadows.values():
                codes |= _decorations(alpha, n)
            codes = frozenset(codes)
        _MATCHING_CACHE[n] = codes
    return set(_MATCHING_CACHE[n])


def _insert_all(d: Diagram) -> set[CanonicalCode]:
    """Every diagram reachable from ``d`` by one crossing insertion.

    A new crossing is wired in by cutting either one edge (once or
    twice: a curl or a self-clasp) or two edges bounding a common face,
    and reconnecting the loose strand ends through the four slots of the
    new vertex in every possible way.  Invalid wirings are discarded by
    the sphere-map filter, so over-trying costs only time.
    """
    n = d.nv + 1
    base = list(d.alpha) + [-1] * 4
    news = tuple(4 * d.nv + s for s in range(4))
    darts = list(d.darts())
    cands = set()

    for x in darts:
        xb = d.alpha[x]
        if xb < x:
            continue
        for i in range(4):
            for j in range(4):
                if j == i:
                    continue
                k, l = (t for t in range(4) if t not in (i, j))
                a2 = base.copy()
                a2[x], a2[news[i]] = news[i], x
                a2[xb], a2[news[j]] = news[j], xb
                a2[news[k]], a2[news[l]] = news[l], news[k]
                cands.add(tuple(a2))

    fo = d.face_of()
    byface: dict[int, list[int]] = {}
    for x in darts:
        byface.setdefault(fo[x], []).append(x)
    for xs in byface.values():
        for ai in range(len(xs)):
            x = xs[ai]
            xb = d.alpha[x]
            for bi in range(ai + 1, len(xs)):
                y = xs[bi]
                if y == xb:
                    continue
                yb = d.alpha[y]
                for i, j, k, l in permutations(range(4)):
                    a2 = base.copy()
                    a2[x], a2[news[i]] = news[i], x
                    a2[xb], a2[news[j]] = news[j], xb
                    a2[y], a2[news[k]] = news[k], y
                    a2[yb], a2[news[l]] = news[l], yb
                    cands.add(tuple(a2))

    out = set()
    for a2 in cands:
        if not _connected(a2, n):
            continue
        orbs = _face_orbits(a2)
        if len(orbs) != n + 2:
            continue
        reps = [min(orb) for orb in orbs]
        for bit in (0, 1):
            over = d.over + (bit,)
            for rep in reps:
                out.add(canonicalize(assemble(a2, over, outer=rep)))
    return out


def generate_by_insertion(n: int, cap: int = DEFAULT_CAP) -> set[CanonicalCode]:
    """The census again, by the independent insertion pipeline.

    Base cases are the bare circle and, for one crossing, a brute force
    over every pairing of a single vertex's darts.  Above that, every
    (n-1)-crossing member is grown by one crossing in all ways.  Must
    agree exactly with ``generate_connected_diagrams``.
    """
    if n < 0:
        raise ValueError("crossing number cannot be negative")
    if n > cap:
        raise CapExceeded(f"n={n} above cap={cap}")
    if n not in _INSERTION_CACHE:
        if n == 0:
            codes = frozenset({canonicalize(_circle())})
        elif n == 1:
            codes = set()
            for pairing in (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2))):
                a2 = [-1] * 4
                for i, j in pairing:
                    a2[i], a2[j] = j, i
                if not _connected(a2, 1) or len(_face_orbits(a2)) != 3:
                    continue
                codes |= _decorations(a2, 1)
            codes = frozenset(codes)
        else:
            prev = generate_by_insertion(n - 1, cap)
            codes = set()
            for code in sorted(prev):
                codes |= _insert_all(decode(code))
            codes = frozenset(codes)
        _INSERTION_CACHE[n] = codes
    return set(_INSERTION_CACHE[n])


# ---------------------------------------------------------------------------
# orientations


def _orientations(d: Diagram) -> list[Diagram]:
    """Each way of directing the components of ``d``, as new diagrams."""
    reps = [min(c) for c in d.components()]
    outer = min(d.regions[0])
    out = []
    for bits in range(1 << len(reps)):
        ori: set[int] = set()
        for i, r in enumerate(reps):
            start = d.alpha[r] if (bits >> i) & 1 else r
            ori |= d.forward_orbit(start)
        out.append(assemble(d.alpha, d.over, sorted(d.phantom),
                            outer=outer, orientation=sorted(ori)))
    return out


def oriented_census(n: int, cap: int = DEFAULT_CAP) -> set[CanonicalCode]:
    """All oriented connected n-crossing diagrams, by direct generation:
    every member of the unoriented census, every direction of each
    component, deduplicated by canonical code."""
    codes = set()
    for code in generate_connected_diagrams(n, cap):
        d = decode(code)
        for o in _orientations(d):
            codes.add(canonicalize(o))
    return codes


# ---------------------------------------------------------------------------
# mirror


def mirror_diagram(d: Diagram) -> Diagram:
    """Reflection of a one-piece diagram (rotations reversed, over/under
    kept, outer region kept outer)."""
    rep = validate(d)
    if not rep.ok:
        raise InvalidDiagram(f"{rep.violation}: {rep.detail}")
    if len(d.pieces()) != 1:
        raise ValueError("mirror_diagram handles one piece at a time")

    def m(x: int) -> int:
        v, s = divmod(x, 4)
        if v in d.phantom:
            return x
        return 4 * v + (-s) % 4

    alpha2 = [-1] * (4 * d.nv)
    for x in d.darts():
        alpha2[m(x)] = m(d.alpha[x])
    ori = None if d.orientation is None else sorted(m(x) for x in d.orientation)
    # the face left of dart x becomes the face left of the reversed image
    f0 = min(d.regions[0])
    return assemble(alpha2, d.over, sorted(d.phantom),
                    outer=m(d.alpha[f0]), orientation=ori)


# ---------------------------------------------------------------------------
# quadrilateral expansion


@dataclass(frozen=True)
class BicubicMap:
    """Trivalent sphere map from expanding each crossing to a square.

    Vertices are the darts of the source diagram; vertex x carries
    derived darts 3x..3x+2 in counterclockwise order.  Derived dart 3x
    runs along the source edge of x; 3x+1 and 3x+2 run along the square
    of x's crossing.  ``root`` is a derived dart on an edge-type edge
    and ``over_marks`` remembers the over slot of each source crossing,
    so no diagram information is dropped.
    """

    alpha: tuple[int, ...]
    nv: int
    root: int
    over_marks: tuple[int, ...]

    def sigma(self, dd: int) -> int:
        return 3 * (dd // 3) + (dd % 3 + 1) % 3

    def sigma_inv(self, dd: int) -> int:
        return 3 * (dd // 3) + (dd % 3 - 1) % 3

    def degree_ok(self) -> bool:
        nd = 3 * self.nv
        return (len(self.alpha) == nd
                and all(0 <= self.alpha[x] < nd and self.alpha[x] != x
                        and self.alpha[self.alpha[x]] == x for x in range(nd)))

    def faces(self) -> list[tuple[int, ...]]:
        nd = 3 * self.nv
        seen = [False] * nd
        out = []
        for d0 in range(nd):
            if seen[d0]:
                continue
            orb = []
            x = d0
            while not seen[x]:
                seen[x] = True
                orb.append(x)
                x = self.sigma_inv(self.alpha[x])
            out.append(tuple(orb))
        return out

    def vertex_bipartition(self) -> tuple[frozenset[int], frozenset[int]] | None:
        colour = {0: 0}
        stack = [0]
        while stack:
            v = stack.pop()
            for s in range(3):
                w = self.alpha[3 * v + s] // 3
                if w not in colour:
                    colour[w] = 1 - colour[v]
                    stack.append(w)
                elif colour[w] == colour[v]:
                    return None
        if len(colour) != self.nv:
            return None
        side = [v for v in range(self.nv) if colour[v] == 0]
        return frozenset(side), frozenset(set(range(self.nv)) - set(side))

    def face_colouring(self) -> dict[int, int] | None:
        """Proper 3-colouring of the faces by propagation from the root
        edge, or None if no proper colouring extends the seed."""
        faces = self.faces()
        face_of = {}
        for i, f in enumerate(faces):
            for x in f:
                face_of[x] = i
        a, b = face_of[self.root], face_of[self.alpha[self.root]]
        if a == b:
            return None
        col = {a: 0, b: 1}
        corners = [{face_of[3 * v], face_of[3 * v + 1], face_of[3 * v + 2]}
                   for v in range(self.nv)]
        if any(len(c) != 3 for c in corners):
            return None
        changed = True
        while changed and len(col) < len(faces):
            changed = False
            for c in corners:
                known = {col[i] for i in c if i in col}
                unknown = [i for i in c if i not in col]
                if len(unknown) == 1 and len(known) == 2:
                    col[unknown[0]] = ({0, 1, 2} - known).pop()
                    changed = True
        if len(col) < len(faces):
            return None
        for x, y in enumerate(self.alpha):
            if col[face_of[x]] == col[face_of[y]]:
                return None
        return col

    def root_colour_faces(self) -> list[tuple[int, ...]]:
        """Faces of the colour missing at the root edge's two sides."""
        col = self.face_colouring()
        if col is None:
            raise BoundViolated("expansion is not face 3-colourable")
        faces = self.faces()
        face_of = {}
        for i, f in enumerate(faces):
            for x in f:
                face_of[x] = i
        root_colour = ({0, 1, 2}
                       - {col[face_of[self.root]],
                          col[face_of[self.alpha[self.root]]]}).pop()
        return [f for i, f in enumerate(faces) if col[i] == root_colour]


def bicubic_transform(d: Diagram) -> BicubicMap:
    """Expand every crossing of a connected diagram into a square.

    The result is a rooted trivalent bipartite sphere map: vertices are
    the darts of ``d``, one edge per source edge and one per square
    side.  The root is the derived dart along source dart 0's edge.
    Raises Disconnected for a multi-piece diagram and ValueError for a
    crossing-free one (nothing to expand).
    """
    rep = validate(d)
    if not rep.ok:
        raise InvalidDiagram(f"{rep.violation}: {rep.detail}")
    if len(d.pieces()) != 1:
        raise Disconnected("expansion needs a connected diagram")
    if d.n_crossings() == 0:
        raise ValueError("expansion needs at least one crossing")
    nd = 4 * d.nv
    alpha = [-1] * (3 * nd)
    for x in range(nd):
        alpha[3 * x] = 3 * d.alpha[x]
        sx = d.sigma(x)
        alpha[3 * x + 1] = 3 * sx + 2
        alpha[3 * sx + 2] = 3 * x + 1
    return BicubicMap(tuple(alpha), nd, 0, d.over)


# ---------------------------------------------------------------------------
# bound table


@dataclass(frozen=True)
class CensusRow:
    k: int
    unoriented: int
    oriented: int
    tutte: int
    bound24: TowerExpr
    bound48: TowerExpr


@dataclass(frozen=True)
class CensusTable:
    rows: tuple[CensusRow, ...]

    def row(self, k: int) -> CensusRow:
        for r in self.rows:
            if r.k == k:
                return r
        raise KeyError(k)


def _check_table(table: CensusTable) -> None:
    cum_u = 0
    cum_o = 0
    for r in table.rows:
        b24 = evaluate(r.bound24)
        b48 = evaluate(r.bound48)
        if b24 is None or b48 is None:  # pragma: no cover - tiny numbers
            raise BoundViolated(f"row {r.k}: bound failed to evaluate")
        if r.unoriented > b24:
            raise BoundViolated(
                f"row {r.k}: {r.unoriented} unoriented diagrams exceed {b24}")
        if r.oriented > b48:
            raise BoundViolated(
                f"row {r.k}: {r.oriented} oriented diagrams exceed {b48}")
        cum_u += r.unoriented
        cum_o += r.oriented
        if cum_u > b24:
            raise BoundViolated(
                f"rows 0..{r.k}: cumulative {cum_u} exceeds {b24}")
        if cum_o > b48:
            raise BoundViolated(
                f"rows 0..{r.k}: cumulative oriented {cum_o} exceeds {b48}")


def verify_bound_table(max_n: int, cap: int = DEFAULT_CAP) -> CensusTable:
    """Census rows 0..max_n with every invariant checked.

    Checks, raising BoundViolated on any failure: the two generation
    pipelines agree exactly, every member is valid and connected, the
    per-size and cumulative counts stay under the 24^(k+1) and 48^(k+1)
    budgets.
    """
    if max_n < 0:
        raise ValueError("max_n cannot be negative")
    if max_n > cap:
        raise CapExceeded(f"max_n={max_n} above cap={cap}")
    rows = []
    for k in range(max_n + 1):
        codes = generate_connected_diagrams(k, cap)
        again = generate_by_insertion(k, cap)
        if codes != again:
            only_a = len(codes - again)
            only_b = len(again - codes)
            raise BoundViolated(
                f"pipelines disagree at {k} crossings "
                f"({only_a} matching-only, {only_b} insertion-only)")
        for code in codes:
            d = decode(code)
            rep = validate(d)
            if not rep.ok:
                raise BoundViolated(f"row {k}: invalid member ({rep.violation})")
            if len(d.pieces()) != 1 or d.n_crossings() != k:
                raise BoundViolated(f"row {k}: member has wrong shape")
        rows.append(CensusRow(
            k=k,
            unoriented=len(codes),
            oriented=len(oriented_census(k, cap)),
            tutte=_tutte_raw(k),
            bound24=Pow(Lit(24), Lit(k + 1)),
            bound48=Pow(Lit(48), Lit(k + 1)),
        ))
    table = CensusTable(tuple(rows))
    _check_table(table)
    return table


_TSV_HEADER = "k\tunoriented\toriented\ttutte\tbound24\tbound48"


def format_census_tsv(table: CensusTable) -> str:
    """The table as tab-separated decimal columns, header first."""
    lines = [_TSV_HEADER]
    for r in table.rows:
        lines.append("\t".join(str(x) for x in (
            r.k, r.unoriented, r.oriented, r.tutte,
            evaluate(r.bound24), evaluate(r.bound48))))
    return "\n".join(lines) + "\n"


def parse_census_tsv(text: str) -> CensusTable:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0] != _TSV_HEADER:
        raise ValueError("missing census header line")
    rows = []
    for ln in lines[1:]:
        parts = ln.split("\t")
        if len(parts) != 6:
            raise ValueError(f"bad census row: {ln!r}")
        k, uo, od, tu, b24, b48 = (int(p) for p in parts)
        row = CensusRow(k, uo, od, tu, Pow(Lit(24), Lit(k + 1)),
                        Pow(Lit(48), Lit(k + 1)))
        if evaluate(row.bound24) != b24 or evaluate(row.bound48) != b48:
            raise ValueError(f"bound columns wrong in row {k}")
        rows.append(row)
    return CensusTable(tuple(rows))
