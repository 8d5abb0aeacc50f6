"""Reidemeister moves: enumeration, application, bounded search.

A move names its site by darts (for face sites, the face id, which is
the smallest dart on the face walk).  Sites always refer to the diagram
the move is applied to; search results record moves against the
deterministic canonical rebuild of each intermediate diagram, so a
certificate can be replayed by anyone who can decode canonical codes.

Surgery bookkeeping runs on one shared finisher: each move edits a work
copy of the dart tables, marks dead vertices, and declares region hints
(fresh faces, anchor darts, region merges).  The finisher splices
strands through dead vertices, rebuilds faces, rejects non-planar
outcomes, reconstructs the region forest, and re-derives orientation by
propagating travel directions from surviving darts.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .diagram import (
    CanonicalCode, Diagram, InvalidDiagram, _UnionFind, _renorm_regions,
    canonicalize, decode, validate,
)


class IllegalMove(Exception):
    pass


KINDS = ("R1+", "R1-", "R2+", "R2-", "R3")


@dataclass(frozen=True)
class Move:
    kind: str
    darts: tuple[int, ...]
    over: int = -1                       # R1+/R2+: 1 puts the moving strand on top
    islands: frozenset[int] = frozenset()   # R2+ same-face split: faces sent to the A side; -1 marks the unbounded point
    swap: int = 0                        # R2+ self-poke variant

    def sort_key(self):
        return (self.kind, self.darts, self.over, self.swap,
                tuple(sorted(self.islands)))


@dataclass(frozen=True)
class MoveSequence:
    start: CanonicalCode
    end: CanonicalCode
    moves: tuple[Move, ...]


@dataclass(frozen=True)
class NotFoundWithinDepth:
    depth: int
    explored: int


@dataclass(frozen=True)
class ResourceLimit:
    reason: str
    explored: int


# ---------------------------------------------------------------------------
# shared surgery machinery


class _Work:
    """Mutable copy of the dart tables, with room for added crossings."""

    def __init__(self, d: Diagram, add: int = 0):
        self.d = d
        self.base = d.nv
        self.n = d.nv + add
        self.alpha = list(d.alpha) + [-1] * (4 * add)
        self.over = list(d.over) + [0] * add
        self.phantom = set(d.phantom)
        self.dead: set[int] = set()

    def opposite(self, x: int) -> int:
        v, s = divmod(x, 4)
        if v in self.phantom:
            return 4 * v + (1 - s)
        return 4 * v + (s + 2) % 4

    def join(self, a: int, b: int) -> None:
        self.alpha[a] = b
        self.alpha[b] = a


def _finish(d: Diagram, W: _Work, face_keys: dict[int, object],
            merges: tuple[tuple[int, ...], ...] = (),
            killed: tuple[int, ...] = (),
            outer_key: object = None,
            ori_explicit: dict[int, bool] | None = None,
            o_eff: frozenset[int] | None = None,
            excluded: frozenset[int] = frozenset(),
            retract_faces: tuple[int, ...] = ()) -> Diagram:
    """Assemble the surgered diagram.

    face_keys maps a work dart to a region key: ("fresh", n) starts a
    new empty region, ("old", r) reuses old region r's class.  The face
    holding that dart is forced into that region and skipped by the
    descent.  merges pre-unions old regions (retraction effects the
    face walks cannot see).  killed old regions must end up empty.
    retract_faces names the vanishing site face whose edges sweep
    through the plane; side readings for stranded circles skip them.
    Raises IllegalMove if the result is not a planar diagram.
    """
    # vanished components (moves that only delete vertices can strand a
    # crossing-free circle; vertex-adding moves never do)
    vanished: list[frozenset[int]] = []
    if W.n == d.nv:
        for comp in d.components():
            if all((x // 4) in W.dead for x in comp):
                vanished.append(comp)

    live = [v for v in range(W.n) if v not in W.dead]
    vmap = {v: i for i, v in enumerate(live)}
    nv2 = len(live) + len(vanished)

    def wmap(x: int) -> int:
        return 4 * vmap[x // 4] + x % 4

    def live_darts():
        for v in live:
            if v in W.phantom:
                yield 4 * v
                yield 4 * v + 1
            else:
                yield from range(4 * v, 4 * v + 4)

    def through(y: int) -> int:
        while (y // 4) in W.dead:
            y = W.alpha[W.opposite(y)]
        return y

    alpha2 = [-1] * (4 * nv2)
    over2 = [0] * nv2
    phantom2 = set()
    for v in live:
        over2[vmap[v]] = W.over[v]
        if v in W.phantom:
            phantom2.add(vmap[v])
    for x in live_darts():
        alpha2[wmap(x)] = wmap(through(W.alpha[x]))
    for k in range(len(vanished)):
        p = len(live) + k
        phantom2.add(p)
        over2[p] = -1
        alpha2[4 * p] = 4 * p + 1
        alpha2[4 * p + 1] = 4 * p

    skeleton = Diagram(nv2, tuple(alpha2), tuple(over2), frozenset(phantom2),
                       (frozenset(),), None)
    fo2 = skeleton.face_of()

    # planarity: every piece must keep V - E + F = 2
    for piece in skeleton.pieces():
        darts = [x for v in piece
                 for x in ((4 * v, 4 * v + 1) if v in phantom2
                           else range(4 * v, 4 * v + 4))]
        fs = {fo2[x] for x in darts}
        if len(piece) - len(darts) // 2 + len(fs) != 2:
            raise IllegalMove("move variant is not planar here")

    old_fo = d.face_of()
    old_rof = d.region_of_face()
    uf = _UnionFind(range(len(d.regions)))
    for group in merges:
        group = list(group)
        for r in group[1:]:
            uf.union(group[0], r)

    keyed_raw: list[tuple[int, object]] = []
    keyed: set[int] = set()
    for wd, key in face_keys.items():
        f2 = fo2[wmap(wd)]
        keyed_raw.append((f2, key))
        keyed.add(f2)

    # descent: surviving darts vote their old region onto their new face
    contrib: dict[int, list[int]] = {}
    for x in d.darts():
        if (x // 4) in W.dead or x in excluded:
            continue
        f2 = fo2[wmap(x)]
        if f2 in keyed:
            continue
        contrib.setdefault(f2, []).append(old_rof[old_fo[x]])
    for f2, regs in contrib.items():
        for r in regs[1:]:
            uf.union(regs[0], r)

    # side classes for circles stranded by a deletion; edges of the
    # vanished site face are swept through the plane by the retraction,
    # so their side faces say nothing about the final embedding
    phantom_keys: dict[int, object] = {}
    phantom_fwd: dict[int, bool] = {}
    for k, comp in enumerate(vanished):
        p = len(live) + k
        fwd = d.forward_orbit(min(comp))
        lefts = set()
        rights = set()
        for x in fwd:
            if old_fo[x] in retract_faces or old_fo[d.alpha[x]] in retract_faces:
                continue
            lefts.add(uf.find(old_rof[old_fo[x]]))
            rights.add(uf.find(old_rof[old_fo[d.alpha[x]]]))
        assert len(lefts) == 1 and len(rights) == 1, \
            "stranded circle has ambiguous sides"
        phantom_keys[4 * p] = ("old", lefts.pop())
        phantom_keys[4 * p + 1] = ("old", rights.pop())
        if d.orientation is not None:
            phantom_fwd[4 * p] = fwd <= d.orientation

    # group faces into regions
    def normal(key):
        if key[0] == "old":
            return ("old", uf.find(key[1]))
        return key

    face_region: dict[int, object] = {}
    for f2, key in keyed_raw:
        nk = normal(key)
        assert face_region.get(f2, nk) == nk, "conflicting region keys on one face"
        face_region[f2] = nk
    for f2, regs in contrib.items():
        face_region[f2] = ("old", uf.find(regs[0]))
    for nd, key in phantom_keys.items():
        face_region[fo2[nd]] = normal(key)
    assert set(face_region) == set(fo2.values()), "face missed by region rules"

    for r in killed:
        assert ("old", uf.find(r)) not in face_region.values(), \
            "killed region still referenced"

    groups: dict[object, set[int]] = {}
    for f2, key in face_region.items():
        groups.setdefault(key, set()).add(f2)
    out_key = normal(outer_key) if outer_key is not None else ("old", uf.find(0))
    assert out_key in groups, "outer region lost"
    regions2 = [groups.pop(out_key)]
    regions2.extend(g for _, g in sorted(groups.items(), key=lambda kv: min(kv[1])))

    # orientation: propagate travel directions
    ori2 = None
    src = o_eff if o_eff is not None else d.orientation
    if d.orientation is not None:
        known: dict[int, bool] = {}

        def learn(x: int, b: bool):
            if x in known:
                assert known[x] == b, "orientation propagation conflict"
                return
            known[x] = b
            queue.append(x)

        queue: list[int] = []
        for x in d.darts():
            if (x // 4) not in W.dead:
                learn(wmap(x), x in src)
        if ori_explicit:
            for wd, b in ori_explicit.items():
                learn(wmap(wd), b)
        for nd, b in phantom_fwd.items():
            learn(nd, b)
        while queue:
            x = queue.pop()
            b = known[x]
            learn(alpha2[x], not b)
            v, s = divmod(x, 4)
            opp = 4 * v + (1 - s) if v in phantom2 else 4 * v + (s + 2) % 4
            learn(opp, not b)
        ori2 = frozenset(x for x, b in known.items() if b)

    out = Diagram(nv2, tuple(alpha2), tuple(over2), frozenset(phantom2),
                  _renorm_regions([set(r) for r in regions2]), ori2)
    rep = validate(out)
    assert rep.ok, f"surgery produced an invalid diagram: {rep.violation}: {rep.detail}"
    return out


def _face_darts(d: Diagram, f: int):
    orb = []
    x = f
    while True:
        orb.append(x)
        x = d.phi(x)
        if x == f:
            return orb


# ---------------------------------------------------------------------------
# individual moves


def _check_dart(d: Diagram, x) -> None:
    if not isinstance(x, int) or not (0 <= x < 4 * d.nv) or d.alpha[x] == -1:
        raise IllegalMove(f"no dart {x!r}")


def _singleton_bounded_region(d: Diagram, f: int, what: str) -> int:
    rof = d.region_of_face()
    r = rof[f]
    if r == 0:
        raise IllegalMove(f"{what} bounds the unbounded region")
    if d.regions[r] != frozenset({f}):
        raise IllegalMove(f"{what} has pieces nested inside")
    return r


def _overness(d: Diagram, x: int) -> bool:
    """True when dart x rides the strand that passes over its crossing."""
    return (x % 4 - d.over[x // 4]) % 2 == 0


def _apply_r1_plus(d: Diagram, m: Move) -> Diagram:
    (dd,) = m.darts
    _check_dart(d, dd)
    if m.over not in (0, 1):
        raise IllegalMove("R1+ needs an over bit")
    e = d.alpha[dd]
    W = _Work(d, add=1)
    w = W.base
    w0, w1, w2, w3 = 4 * w, 4 * w + 1, 4 * w + 2, 4 * w + 3
    W.over[w] = m.over
    W.join(dd, w3)
    W.join(w0, e)
    W.join(w1, w2)
    for v in {dd // 4, e // 4}:
        if v in W.phantom:
            W.dead.add(v)         # the circle has a crossing now
    fo = d.face_of()
    rof = d.region_of_face()
    face_keys = {
        w1: ("fresh", 0),
        w2: ("old", rof[fo[dd]]),
        w3: ("old", rof[fo[e]]),
    }
    ori = None
    if d.orientation is not None:
        ori = {w1: dd in d.orientation}
    return _finish(d, W, face_keys, ori_explicit=ori)


def _apply_r1_minus(d: Diagram, m: Move) -> Diagram:
    (site,) = m.darts
    _check_dart(d, site)
    v = site // 4
    if v in d.phantom or d.alpha[site] != d.sigma(site):
        raise IllegalMove("site is not a monogon")
    fo = d.face_of()
    if fo[site] != site:
        raise IllegalMove("monogon site must be its face id")
    r = _singleton_bounded_region(d, site, "monogon")
    W = _Work(d)
    W.dead.add(v)
    rof = d.region_of_face()
    outer_face = fo[d.sigma(site)]     # the face the kink pokes into
    return _finish(d, W, {}, merges=((r, rof[outer_face]),),
                   retract_faces=(site,))


def _coherent_bigon(d: Diagram, p: int, q: int) -> bool:
    # one strand crosses over at both corners of the lens
    return _overness(d, p) == _overness(d, d.alpha[p])


def _apply_r2_minus(d: Diagram, m: Move) -> Diagram:
    (site,) = m.darts
    _check_dart(d, site)
    fo = d.face_of()
    face = _face_darts(d, fo[site])
    if fo[site] != site or len(face) != 2:
        raise IllegalMove("site is not a bigon face")
    p, q = face
    U, V = p // 4, q // 4
    if U == V or U in d.phantom or V in d.phantom:
        raise IllegalMove("bigon corners must be two distinct crossings")
    if not _coherent_bigon(d, p, q):
        raise IllegalMove("bigon is braid-like, one strand must be over at both corners")
    r = _singleton_bounded_region(d, fo[site], "bigon")
    rof = d.region_of_face()
    W = _Work(d)
    W.dead.update((U, V))
    opp = (rof[fo[d.opposite(p)]], rof[fo[d.opposite(q)]])
    return _finish(d, W, {}, merges=((r,) + opp,), retract_faces=(site,))


def _apply_r2_plus(d: Diagram, m: Move) -> Diagram:
    dm, dt = m.darts
    _check_dart(d, dm)
    _check_dart(d, dt)
    if m.over not in (0, 1):
        raise IllegalMove("R2+ needs an over bit")
    if m.swap not in (0, 1):
        raise IllegalMove("bad swap flag")
    fo = d.face_of()
    rof = d.region_of_face()
    fm, ft = fo[dm], fo[dt]
    r = rof[fm]
    if rof[ft] != r:
        raise IllegalMove("darts do not share a region")
    same_face = fm == ft
    if m.swap and dm != dt:
        raise IllegalMove("swap only applies to a self-poke")
    if not same_face:
        if m.islands:
            raise IllegalMove("islands only apply to a same-face poke")
    else:
        allowed = set(d.regions[r]) - {fm}
        if r == 0:
            allowed.add(-1)
        if not set(m.islands) <= allowed:
            raise IllegalMove("islands must be other faces of the split region")

    em, et = d.alpha[dm], d.alpha[dt]
    W = _Work(d, add=2)
    u, v = W.base, W.base + 1
    u0, u1, u2, u3 = (4 * u + s for s in range(4))
    v0, v1, v2, v3 = (4 * v + s for s in range(4))
    W.over[u] = W.over[v] = m.over       # slots {1,3} are the moving strand
    W.join(u2, v0)
    W.join(u3, v3)
    if dm == dt:
        W.join(dm, u1)
        if m.swap:
            W.join(v1, u0)
            W.join(v2, em)
        else:
            W.join(v1, v2)
            W.join(u0, em)
    elif dt == em:
        W.join(dm, u1)
        W.join(dt, v2)
        W.join(v1, u0)
    else:
        W.join(dm, u1)
        W.join(dt, v2)
        W.join(v1, em)
        W.join(u0, et)
    for x in (dm, dt):
        if (x // 4) in W.phantom:
            W.dead.add(x // 4)

    face_keys: dict[int, object] = {u2: ("fresh", 0)}
    killed: tuple[int, ...] = ()
    outer_key = None
    if same_face:
        face_keys[u0] = ("split", "A")
        face_keys[v1] = ("split", "B")
        for g in d.regions[r]:
            if g == fm:
                continue
            side = "A" if g in m.islands else "B"
            face_keys[g] = ("split", side)     # g is a face id, hence a dart
        killed = (r,)
        if r == 0:
            outer_key = ("split", "A" if -1 in m.islands else "B")
    else:
        face_keys[u0] = ("old", r)
        face_keys[v1] = ("old", r)
    if fo[em] != fm:
        face_keys[v0] = ("old", rof[fo[em]])
    if fo[et] != fm:
        face_keys[v2] = ("old", rof[fo[et]])

    ori = None
    if d.orientation is not None:
        ori = {u3: dm in d.orientation, v0: dt in d.orientation}
    return _finish(d, W, face_keys, killed=killed, outer_key=outer_key,
                   ori_explicit=ori)


def _triangle_strand_relations(d: Diagram, t: list[int]):
    # strand i runs along the side from corner i to corner i+1; at corner
    # i it meets strand i-1, and exactly one of the two is on top
    wins = []
    for i in range(3):
        wins.append(_overness(d, t[i]))      # strand i over strand i-1 at corner i
    return wins


def _apply_r3(d: Diagram, m: Move) -> Diagram:
    (site,) = m.darts
    _check_dart(d, site)
    fo = d.face_of()
    face = _face_darts(d, fo[site])
    if fo[site] != site or len(face) != 3:
        raise IllegalMove("site is not a triangle face")
    t = face                               # phi(t[i]) = t[i+1]
    verts = [x // 4 for x in t]
    if len(set(verts)) != 3 or any(v in d.phantom for v in verts):
        raise IllegalMove("triangle corners must be three distinct crossings")
    wins = _triangle_strand_relations(d, t)
    if wins == [True, True, True] or wins == [False, False, False]:
        raise IllegalMove("triangle strands are cyclically over each other")
    o = [d.opposite(x) for x in t]
    r = _singleton_bounded_region(d, fo[site], "triangle")
    rof = d.region_of_face()

    st = [d.sigma(x) for x in t]
    so = [d.sigma(x) for x in o]
    moved = set(t) | set(o) | set(st) | set(so)
    # sliding the sides across the far corners re-slots each outward edge:
    # the one leaving slot o[i] lands on slot st[i+1], the one leaving
    # so[i] lands on t[i-1]; chords between corner slots follow both ends
    reslot = {}
    for i in range(3):
        reslot[o[i]] = st[(i + 1) % 3]
        reslot[so[i]] = t[(i - 1) % 3]

    W = _Work(d)
    for i in range(3):
        W.join(o[i], so[(i + 1) % 3])
    for i in range(3):
        far_t = d.alpha[so[(i + 1) % 3]]
        far_s = d.alpha[o[(i - 1) % 3]]
        W.join(t[i], reslot.get(far_t, far_t))
        W.join(st[i], reslot.get(far_s, far_s))

    face_keys: dict[int, object] = {o[0]: ("fresh", 0)}
    for i in range(3):
        face_keys[t[i]] = ("old", rof[fo[so[(i + 1) % 3]]])
        face_keys[st[i]] = ("old", rof[fo[o[(i - 1) % 3]]])
        face_keys[so[i]] = ("old", rof[fo[o[(i + 1) % 3]]])

    # every corner dart keeps its travel flag: each slot's in/out role
    # at its crossing is untouched, only the edge pairing changes
    ori = None
    if d.orientation is not None:
        ori = {x: x in d.orientation for x in moved}
    return _finish(d, W, face_keys, killed=(r,), ori_explicit=ori,
                   excluded=frozenset(moved))


_APPLIERS = {
    "R1+": _apply_r1_plus,
    "R1-": _apply_r1_minus,
    "R2+": _apply_r2_plus,
    "R2-": _apply_r2_minus,
    "R3": _apply_r3,
}


def apply_move(d: Diagram, m: Move) -> Diagram:
    if m.kind not in _APPLIERS:
        raise IllegalMove(f"unknown move kind {m.kind!r}")
    return _APPLIERS[m.kind](d, m)


# ---------------------------------------------------------------------------
# enumeration


def _subsets(pool):
    pool = sorted(pool)
    for k in range(len(pool) + 1):
        for c in itertools.combinations(pool, k):
            yield frozenset(c)


def _candidate_moves(d: Diagram):
    fo = d.face_of()
    rof = d.region_of_face()
    faces = {}
    for x in sorted(fo):
        faces.setdefault(fo[x], []).append(x)

    for f, walk in sorted(faces.items()):
        if len(walk) == 1:
            yield Move("R1-", (f,))
        elif len(walk) == 2:
            yield Move("R2-", (f,))
        elif len(walk) == 3:
            yield Move("R3", (f,))
    for x in sorted(d.darts()):
        for bit in (0, 1):
            yield Move("R1+", (x,), over=bit)
    for r, reg in enumerate(d.regions):
        darts_r = sorted(x for g in reg for x in _face_darts(d, g))
        for dm in darts_r:
            for dt in darts_r:
                same = fo[dm] == fo[dt]
                if not same:
                    for bit in (0, 1):
                        yield Move("R2+", (dm, dt), over=bit)
                    continue
                pool = set(reg) - {fo[dm]}
                if r == 0:
                    pool.add(-1)
                for isl in _subsets(pool):
                    for bit in (0, 1):
                        if dm == dt:
                            for sw in (0, 1):
                                yield Move("R2+", (dm, dt), over=bit,
                                           islands=isl, swap=sw)
                        else:
                            yield Move("R2+", (dm, dt), over=bit, islands=isl)


def enumerate_applied(d: Diagram):
    """All legal moves with their results, deterministically ordered."""
    out = []
    for mv in _candidate_moves(d):
        try:
            out.append((mv, apply_move(d, mv)))
        except IllegalMove:
            continue
    out.sort(key=lambda pair: pair[0].sort_key())
    return out


def enumerate_moves(d: Diagram) -> list[Move]:
    return [mv for mv, _ in enumerate_applied(d)]


# ---------------------------------------------------------------------------
# bounded search


def bounded_bfs(d1: Diagram, d2: Diagram, max_depth: int,
                max_states: int = 100000, max_crossings: int | None = None):
    """Breadth-first search from d1 to d2 through legal moves.

    Deterministic and single-threaded: states are canonical codes, the
    frontier is expanded in sorted order.  Crossing counts along the way
    are capped (default: max of the endpoints plus four).
    """
    start = canonicalize(d1)
    target = canonicalize(d2)
    if max_crossings is None:
        max_crossings = max(d1.n_crossings(), d2.n_crossings()) + 4
    if start == target:
        return MoveSequence(start, target, ())
    parent: dict[CanonicalCode, object] = {start: None}
    frontier = [start]

    def rebuild(code):
        steps = []
        cur = code
        while parent[cur] is not None:
            pc, pm = parent[cur]
            steps.append(pm)
            cur = pc
        return MoveSequence(start, target, tuple(reversed(steps)))

    for depth in range(1, max_depth + 1):
        nxt = []
        for code in frontier:
            diag = decode(code)
            n = diag.n_crossings()
            for mv, res in enumerate_applied(diag):
                grow = {"R1+": 1, "R2+": 2}.get(mv.kind, 0)
                if grow and n + grow > max_crossings:
                    continue
                oc = canonicalize(res)
                if oc in parent:
                    continue
                parent[oc] = (code, mv)
                if oc == target:
                    return rebuild(oc)
                if len(parent) > max_states:
                    return ResourceLimit("state budget exhausted", len(parent))
                nxt.append(oc)
        frontier = sorted(nxt)
        if not frontier:
            break
    return NotFoundWithinDepth(max_depth, len(parent))


def replay_and_verify(seq: MoveSequence) -> bool:
    """Re-run a move sequence against canonical rebuilds; True iff every
    move applies and the end code matches."""
    try:
        code = seq.start
        decode(code)
        for mv in seq.moves:
            nxt = apply_move(decode(code), mv)
            code = canonicalize(nxt)
        return code == seq.end
    except (IllegalMove, InvalidDiagram):
        return False


# ---------------------------------------------------------------------------
# certificate text format
#
#   S <start code> <end code>
#   M <kind> <darts...> [o<bit>] [s<bit>] [i<f,f,...>]


def move_to_tokens(m: Move) -> list[str]:
    toks = [m.kind] + [str(x) for x in m.darts]
    if m.over >= 0:
        toks.append(f"o{m.over}")
    if m.swap:
        toks.append(f"s{m.swap}")
    if m.islands:
        toks.append("i" + ",".join(str(x) for x in sorted(m.islands)))
    return toks


def move_from_tokens(toks: list[str]) -> Move:
    if not toks or toks[0] not in KINDS:
        raise InvalidDiagram(f"bad move kind in certificate: {toks[:1]}")
    kind = toks[0]
    darts = []
    over = -1
    swap = 0
    islands: frozenset[int] = frozenset()
    for tok in toks[1:]:
        if tok.startswith("o"):
            over = int(tok[1:])
        elif tok.startswith("s"):
            swap = int(tok[1:])
        elif tok.startswith("i"):
            islands = frozenset(int(x) for x in tok[1:].split(","))
        else:
            darts.append(int(tok))
    return Move(kind, tuple(darts), over=over, islands=islands, swap=swap)


def format_certificate(seq: MoveSequence) -> str:
    lines = [f"S {seq.start} {seq.end}"]
    for mv in seq.moves:
        lines.append("M " + " ".join(move_to_tokens(mv)))
    return "\n".join(lines) + "\n"


def parse_certificate(text: str) -> MoveSequence:
    start = end = None
    moves = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "S":
            if len(parts) != 3 or start is not None:
                raise InvalidDiagram("bad S line in certificate")
            start, end = CanonicalCode(parts[1]), CanonicalCode(parts[2])
        elif parts[0] == "M":
            moves.append(move_from_tokens(parts[1:]))
        else:
            raise InvalidDiagram(f"unknown certificate line {parts[0]!r}")
    if start is None:
        raise InvalidDiagram("certificate lacks an S line")
    return MoveSequence(start, end, tuple(moves))
