"""Planar link diagrams as rotation systems.

A diagram is stored as a fat graph: every crossing is a 4-valent vertex
with counterclockwise dart slots 0..3, and every crossing-free circle
is recorded by a 2-dart "phantom" vertex so that bare unknot components
still have a combinatorial anchor.  Dart ``4*v + s`` sits in slot ``s``
of vertex ``v``.  ``alpha`` pairs dart ends into edges, the rotation
``sigma`` is implicit in the slot numbering, and faces are orbits of
``sigma^{-1} o alpha`` (the face on the left of a dart pointing away
from its vertex).

Diagrams may be disconnected.  Embeddings in the plane are captured by
``regions``: each region of the arrangement is the set of faces (one per
bounding piece) that meet it, ``regions[0]`` is the unbounded one, and
the piece/region incidence graph must be a tree.  Two diagrams count as
equal when ambient isotopy of the plane carries one to the other keeping
the outer region outer; reflections are *not* identified.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator


class DiagramError(Exception):
    pass


class InvalidDiagram(DiagramError):
    """Raised when an operation needs a diagram that fails validation."""


class Unoriented(DiagramError):
    """Raised when an orientation-dependent quantity is asked of an
    unoriented diagram."""


class NoSuchEdge(DiagramError):
    pass


class NotASummand(DiagramError):
    pass


class EmptySelection(DiagramError):
    pass


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violation: str | None = None
    detail: str = ""

    def __bool__(self) -> bool:  # pragma: no cover - convenience
        return self.ok


class CanonicalCode(str):
    """Canonical form of a diagram; compares and hashes as its text."""

    __slots__ = ()


@dataclass(frozen=True)
class Diagram:
    # nv vertices; crossing v uses darts 4v..4v+3, phantom v uses 4v, 4v+1
    nv: int
    alpha: tuple[int, ...]           # involution on used darts, -1 elsewhere
    over: tuple[int, ...]            # crossing: 0 or 1 (slots over[v], over[v]+2 over); phantom: -1
    phantom: frozenset[int]
    regions: tuple[frozenset[int], ...]   # regions[0] = outer; entries are face ids
    orientation: frozenset[int] | None = None   # forward darts, one per edge

    # -- dart-level maps ---------------------------------------------------

    def is_phantom(self, v: int) -> bool:
        return v in self.phantom

    def darts(self) -> Iterator[int]:
        for v in range(self.nv):
            if v in self.phantom:
                yield 4 * v
                yield 4 * v + 1
            else:
                yield from range(4 * v, 4 * v + 4)

    def vertex(self, d: int) -> int:
        return d // 4

    def slot(self, d: int) -> int:
        return d % 4

    def sigma(self, d: int) -> int:
        v, s = divmod(d, 4)
        if v in self.phantom:
            return 4 * v + (1 - s)
        return 4 * v + (s + 1) % 4

    def sigma_inv(self, d: int) -> int:
        v, s = divmod(d, 4)
        if v in self.phantom:
            return 4 * v + (1 - s)
        return 4 * v + (s - 1) % 4

    def opposite(self, d: int) -> int:
        """The dart across the vertex: where a strand continues."""
        v, s = divmod(d, 4)
        if v in self.phantom:
            return 4 * v + (1 - s)
        return 4 * v + (s + 2) % 4

    def strand_next(self, d: int) -> int:
        """Follow the strand: next forward dart after travelling dart d."""
        return self.opposite(self.alpha[d])

    def phi(self, d: int) -> int:
        return self.sigma_inv(self.alpha[d])

    # -- orbits ------------------------------------------------------------

    def faces(self) -> list[frozenset[int]]:
        seen: set[int] = set()
        out = []
        for d in self.darts():
            if d in seen:
                continue
            orb = []
            x = d
            while x not in seen:
                seen.add(x)
                orb.append(x)
                x = self.phi(x)
            out.append(frozenset(orb))
        return out

    def face_of(self) -> dict[int, int]:
        """dart -> face id (the minimum dart of its phi orbit)."""
        fo: dict[int, int] = {}
        for f in self.faces():
            m = min(f)
            for d in f:
                fo[d] = m
        return fo

    def pieces(self) -> list[frozenset[int]]:
        """Connected components of the fat graph, as vertex sets."""
        seen: set[int] = set()
        out = []
        for v0 in range(self.nv):
            if v0 in seen:
                continue
            comp = set()
            stack = [v0]
            while stack:
                v = stack.pop()
                if v in comp:
                    continue
                comp.add(v)
                ds = (4 * v, 4 * v + 1) if v in self.phantom else range(4 * v, 4 * v + 4)
                for d in ds:
                    w = self.alpha[d] // 4
                    if w not in comp:
                        stack.append(w)
            seen |= comp
            out.append(frozenset(comp))
        return out

    def components(self) -> list[frozenset[int]]:
        """Link components as dart sets (both travel directions),
        ordered by smallest dart."""
        seen: set[int] = set()
        comps = []
        for d0 in self.darts():
            if d0 in seen:
                continue
            comp = set()
            x = d0
            while x not in comp:
                comp.add(x)
                x = self.strand_next(x)
            # take the reverse orbit too
            comp |= {self.alpha[x] for x in comp}
            seen |= comp
            comps.append(frozenset(comp))
        return sorted(comps, key=min)

    def forward_orbit(self, d: int) -> frozenset[int]:
        orb = set()
        x = d
        while x not in orb:
            orb.add(x)
            x = self.strand_next(x)
        return frozenset(orb)

    def crossings(self) -> list[int]:
        return [v for v in range(self.nv) if v not in self.phantom]

    def n_crossings(self) -> int:
        return self.nv - len(self.phantom)

    def region_of_face(self) -> dict[int, int]:
        rof = {}
        for i, reg in enumerate(self.regions):
            for f in reg:
                rof[f] = i
        return rof


# ---------------------------------------------------------------------------
# validation


def validate(d: Diagram) -> ValidationReport:
    """Check every structural invariant; report the first violation.

    Total: never raises, whatever is handed in (as long as the fields
    have their declared container types).
    """
    try:
        if d.nv < 0 or len(d.alpha) != 4 * d.nv or len(d.over) != d.nv:
            return ValidationReport(False, "shape", "alpha/over lengths disagree with nv")
        for v in d.phantom:
            if not (0 <= v < d.nv):
                return ValidationReport(False, "phantom-range", f"phantom vertex {v}")
        used = set(d.darts())
        for i in range(4 * d.nv):
            a = d.alpha[i]
            if i in used:
                if not (isinstance(a, int) and a in used):
                    return ValidationReport(False, "alpha-range", f"alpha[{i}]={a}")
                if a == i or d.alpha[a] != i:
                    return ValidationReport(False, "alpha-involution", f"dart {i}")
            elif a != -1:
                return ValidationReport(False, "alpha-unused", f"unused slot {i} has alpha {a}")
        for v in range(d.nv):
            if v in d.phantom:
                if d.over[v] != -1:
                    return ValidationReport(False, "over-phantom", f"vertex {v}")
            elif d.over[v] not in (0, 1):
                return ValidationReport(False, "over-range", f"vertex {v}: {d.over[v]}")

        faces = d.faces()
        face_ids = {min(f) for f in faces}
        assigned = [f for reg in d.regions for f in reg]
        if len(assigned) != len(set(assigned)) or set(assigned) != face_ids:
            return ValidationReport(False, "regions-partition",
                                    "regions must partition the face ids")
        if not d.regions:
            return ValidationReport(False, "regions-empty", "no outer region")

        # per-piece sphere condition
        fo = d.face_of()
        pieces = d.pieces()
        piece_of_face: dict[int, int] = {}
        for pi, piece in enumerate(pieces):
            vs = len(piece)
            dart_list = [x for v in piece
                         for x in ((4 * v, 4 * v + 1) if v in d.phantom
                                   else range(4 * v, 4 * v + 4))]
            es = len(dart_list) // 2
            fs = {fo[x] for x in dart_list}
            for f in fs:
                piece_of_face[f] = pi
            if vs - es + len(fs) != 2:
                return ValidationReport(False, "piece-euler",
                                        f"piece {pi}: V-E+F = {vs - es + len(fs)}")

        # each region holds at most one face of any piece, and the
        # piece/region incidence graph is a tree
        edges = 0
        adj: dict[object, list[object]] = {}
        for ri, reg in enumerate(d.regions):
            touched = set()
            for f in reg:
                pi = piece_of_face[f]
                if pi in touched:
                    return ValidationReport(False, "region-piece-dup",
                                            f"region {ri} meets piece {pi} twice")
                touched.add(pi)
                edges += 1
                adj.setdefault(("r", ri), []).append(("p", pi))
                adj.setdefault(("p", pi), []).append(("r", ri))
        nodes = len(d.regions) + len(pieces)
        if edges != nodes - 1:
            return ValidationReport(False, "nesting-not-tree",
                                    f"{nodes} nodes, {edges} incidences")
        seen: set[object] = set()
        stack: list[object] = [("r", 0)]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(adj.get(x, []))
        if len(seen) != nodes:
            return ValidationReport(False, "nesting-disconnected",
                                    "piece/region graph not connected")

        if d.orientation is not None:
            o = d.orientation
            for x in o:
                if x not in used:
                    return ValidationReport(False, "orientation-range", f"dart {x}")
            for x in used:
                if (x in o) == (d.alpha[x] in o):
                    return ValidationReport(False, "orientation-edges",
                                            f"edge {{{x},{d.alpha[x]}}} not oriented once")
            for x in o:
                if d.strand_next(x) not in o:
                    return ValidationReport(False, "orientation-coherent",
                                            f"dart {x} breaks coherence")
        return ValidationReport(True)
    except Exception as e:  # pragma: no cover - total-ness guard
        return ValidationReport(False, "malformed", repr(e))


def _require_valid(d: Diagram) -> None:
    rep = validate(d)
    if not rep.ok:
        raise InvalidDiagram(f"{rep.violation}: {rep.detail}")


# ---------------------------------------------------------------------------
# assembly helper: build regions from nesting declarations


class _UnionFind:
    def __init__(self, items: Iterable[object]):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def assemble(alpha: Iterable[int], over: Iterable[int],
             phantom: Iterable[int] = (),
             outer: int | None = None,
             nests: Iterable[tuple[int, int]] = (),
             orientation: Iterable[int] | None = None) -> Diagram:
    """Build a Diagram, deriving the region partition.

    ``outer`` is any dart on the unbounded region.  ``nests`` lists
    (up_dart, container_dart) pairs: the face of up_dart merges into the
    region of container_dart's face.  Faces not merged with anything
    stay as singleton regions.  Raises InvalidDiagram on any breakage.
    """
    alpha = tuple(alpha)
    over = tuple(over)
    nv = len(over)
    d0 = Diagram(nv, alpha, over, frozenset(phantom), (frozenset(),), None)
    fo = d0.face_of()
    if outer is None:
        raise InvalidDiagram("assemble needs an outer dart")
    uf = _UnionFind(set(fo.values()))
    for up, cont in nests:
        uf.union(fo[up], fo[cont])
    groups: dict[int, set[int]] = {}
    for f in set(fo.values()):
        groups.setdefault(uf.find(f), set()).add(f)
    outer_root = uf.find(fo[outer])
    regs = [frozenset(groups.pop(outer_root))]
    regs.extend(frozenset(g) for _, g in sorted(groups.items()))
    ori = frozenset(orientation) if orientation is not None else None
    d = Diagram(nv, alpha, over, frozenset(phantom), tuple(regs), ori)
    _require_valid(d)
    return d


def _renorm_regions(regions: list[set[int]]) -> tuple[frozenset[int], ...]:
    head = frozenset(regions[0])
    rest = sorted((frozenset(r) for r in regions[1:]), key=min)
    return (head, *rest)


# ---------------------------------------------------------------------------
# canonical code


def _piece_of(d: Diagram) -> dict[int, int]:
    po = {}
    for i, piece in enumerate(d.pieces()):
        for v in piece:
            po[v] = i
    return po


def _vertex_darts(d: Diagram, v: int) -> tuple[int, ...]:
    return (4 * v, 4 * v + 1) if v in d.phantom else tuple(range(4 * v, 4 * v + 4))


def _encode_piece_from(d: Diagram, root: int) -> tuple[str, list[int]]:
    """BFS dart-stream code of the piece containing ``root``, rooted there.

    Returns the stream string and the canonical face order (face ids in
    order of first appearance over the canonical dart enumeration).
    """
    entry: dict[int, int] = {}          # vertex -> entry dart
    number: dict[int, int] = {}         # vertex -> discovery index
    order: list[int] = []
    entry[root // 4] = root
    number[root // 4] = 0
    order.append(root // 4)
    tokens: list[str] = []
    oriented = d.orientation is not None
    qi = 0
    while qi < len(order):
        v = order[qi]
        qi += 1
        e = entry[v]
        deg = 2 if v in d.phantom else 4
        head: list[str] = []
        if v in d.phantom:
            head.append("P")
        else:
            s = e % 4
            head.append("a" if (s - d.over[v]) % 2 == 0 else "b")
        if oriented:
            head.append("f" if e in d.orientation else "r")
            if v not in d.phantom:
                head.append("f" if d.sigma(e) in d.orientation else "r")
        tokens.append("".join(head))
        x = e
        for _ in range(deg):
            t = d.alpha[x]
            w = t // 4
            if w not in number:
                number[w] = len(order)
                entry[w] = t
                order.append(w)
                tokens.append("n")
            else:
                ew = entry[w]
                off = 0
                y = ew
                while y != t:
                    y = d.sigma(y)
                    off += 1
                tokens.append(f"v{number[w]}.{off}")
            x = d.sigma(x)
    fo = d.face_of()
    face_order: list[int] = []
    seen_f: set[int] = set()
    for v in order:
        x = entry[v]
        deg = 2 if v in d.phantom else 4
        for _ in range(deg):
            f = fo[x]
            if f not in seen_f:
                seen_f.add(f)
                face_order.append(f)
            x = d.sigma(x)
    return ",".join(tokens), face_order


def _piece_code(d: Diagram, attach_face: int, fo: dict[int, int],
                rof: dict[int, int], memo: dict) -> str:
    best: str | None = None
    roots = sorted(x for x in fo if fo[x] == attach_face)
    for r in roots:
        stream, face_order = _encode_piece_from(d, r)
        parts = [stream, ":"]
        for g in face_order:
            if g == attach_face:
                parts.append("^")
            else:
                parts.append("[" + _region_code(d, rof[g], g, fo, rof, memo) + "]")
        cand = "{" + "".join(parts) + "}"
        if best is None or cand < best:
            best = cand
    assert best is not None
    return best


def _region_code(d: Diagram, region: int, via_face: int | None,
                 fo: dict[int, int], rof: dict[int, int], memo: dict) -> str:
    key = (region, via_face)
    if key in memo:
        return memo[key]
    child_codes = []
    for f in d.regions[region]:
        if f == via_face:
            continue
        child_codes.append(_piece_code(d, f, fo, rof, memo))
    code = "+".join(sorted(child_codes))
    memo[key] = code
    return code


def canonicalize(d: Diagram) -> CanonicalCode:
    """Canonical code; equal codes mean equal diagrams (outer region
    fixed, reflections distinct).  O(E^2) per piece."""
    _require_valid(d)
    fo = d.face_of()
    rof = d.region_of_face()
    flag = "O" if d.orientation is not None else "U"
    return CanonicalCode(flag + ":" + _region_code(d, 0, None, fo, rof, {}))


# -- decoding ---------------------------------------------------------------


class _CodeParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, ch: str) -> None:
        if self.peek() != ch:
            raise InvalidDiagram(f"bad code near {self.pos}: expected {ch!r}")
        self.pos += 1


def _decode_region(p: _CodeParser, oriented: bool, sink: "_DecodeSink",
                   container_dart: int | None) -> None:
    while p.peek() == "{":
        _decode_piece(p, oriented, sink, container_dart)
        if p.peek() == "+":
            p.take("+")


class _DecodeSink:
    def __init__(self):
        self.alpha: dict[int, int] = {}
        self.over: list[int] = []
        self.phantom: set[int] = set()
        self.forward: set[int] = set()
        self.backward: set[int] = set()
        self.nests: list[tuple[int, int]] = []
        self.outer_dart: int | None = None


def _decode_piece(p: _CodeParser, oriented: bool, sink: _DecodeSink,
                  container_dart: int | None) -> None:
    p.take("{")
    base = len(sink.over)          # vertex numbers are piece-local
    # stream
    stream_end = p.text.index(":", p.pos)
    stream = p.text[p.pos:stream_end]
    p.pos = stream_end + 1
    tokens = stream.split(",")
    # first pass: vertex headers create vertices in discovery order
    heads = [t for t in tokens if t and t[0] in "Pab"]
    kinds = []
    for h in heads:
        kinds.append(h[0])
        v = base + len(kinds) - 1
        if h[0] == "P":
            sink.phantom.add(v)
            sink.over.append(-1)
        else:
            sink.over.append(0 if h[0] == "a" else 1)
        if oriented:
            flags = h[1:]
            need = 1 if h[0] == "P" else 2
            if len(flags) != need or any(c not in "fr" for c in flags):
                raise InvalidDiagram("bad orientation flags in code")
            e = 4 * v
            (sink.forward if flags[0] == "f" else sink.backward).add(e)
            if h[0] != "P":
                s1 = 4 * v + 1
                (sink.forward if flags[1] == "f" else sink.backward).add(s1)
        elif len(h) != 1:
            raise InvalidDiagram("orientation flags in unoriented code")
    # second pass: replay BFS to wire alpha
    def deg(v):
        return 2 if v in sink.phantom else 4
    ti = 0
    discovered = 1
    processed = 0
    while processed < len(kinds):
        v = base + processed
        processed += 1
        if ti >= len(tokens) or not tokens[ti] or tokens[ti][0] not in "Pab":
            raise InvalidDiagram("code stream desynchronised")
        ti += 1
        for s in range(deg(v)):
            x = 4 * v + s
            if ti >= len(tokens):
                raise InvalidDiagram("code stream truncated")
            t = tokens[ti]
            ti += 1
            if t == "n":
                if discovered >= len(kinds):
                    raise InvalidDiagram("code discovers too many vertices")
                w = base + discovered
                discovered += 1
                tgt = 4 * w
            elif t.startswith("v"):
                num, off = t[1:].split(".")
                w = base + int(num)
                if not (base <= w < base + len(kinds)):
                    raise InvalidDiagram(f"bad vertex reference {t!r}")
                if int(off) >= (2 if w in sink.phantom else 4):
                    raise InvalidDiagram(f"bad slot offset {t!r}")
                tgt = 4 * w + int(off)
            else:
                raise InvalidDiagram(f"bad code token {t!r}")
            if x in sink.alpha and sink.alpha[x] != tgt:
                raise InvalidDiagram("inconsistent alpha in code")
            sink.alpha[x] = tgt
            sink.alpha[tgt] = x
    if discovered != len(kinds):
        raise InvalidDiagram("code discovers wrong vertex count")
    # face parts, in the canonical face order of the rebuilt piece
    piece_faces = _decode_face_order(sink, base, len(kinds))
    attach_seen = False
    for f_dart in piece_faces:
        ch = p.peek()
        if ch == "^":
            p.take("^")
            if attach_seen:
                raise InvalidDiagram("two attach faces in code")
            attach_seen = True
            if container_dart is None:
                if sink.outer_dart is None:
                    sink.outer_dart = f_dart
                else:
                    sink.nests.append((f_dart, sink.outer_dart))
            else:
                sink.nests.append((f_dart, container_dart))
        elif ch == "[":
            p.take("[")
            _decode_region(p, oriented, sink, f_dart)
            p.take("]")
        else:
            raise InvalidDiagram(f"bad code near {p.pos}")
    if not attach_seen:
        raise InvalidDiagram("piece code lacks attach face")
    p.take("}")


def _decode_face_order(sink: _DecodeSink, base: int, count: int) -> list[int]:
    """Face order of a freshly decoded piece: first dart of each face,
    ordered as in _encode_piece_from (entry darts are the 4v slots)."""
    def is_ph(v):
        return v in sink.phantom
    def sigma(x):
        v, s = divmod(x, 4)
        return 4 * v + (1 - s) if is_ph(v) else 4 * v + (s + 1) % 4
    def sigma_inv(x):
        v, s = divmod(x, 4)
        return 4 * v + (1 - s) if is_ph(v) else 4 * v + (s - 1) % 4
    def phi(x):
        return sigma_inv(sink.alpha[x])
    seen: set[int] = set()
    order: list[int] = []
    for v in range(base, base + count):
        x = 4 * v
        for _ in range(2 if is_ph(v) else 4):
            if x not in seen:
                order.append(x)
                y = x
                while y not in seen:
                    seen.add(y)
                    y = phi(y)
            x = sigma(x)
    return order


def decode(code: str | CanonicalCode) -> Diagram:
    """Rebuild the diagram a canonical code describes.

    The rebuild is deterministic, so dart numbers in the result are a
    function of the code alone; move certificates reference them.
    """
    if not code or code[1:2] != ":" or code[0] not in "OU":
        raise InvalidDiagram("bad code header")
    oriented = code[0] == "O"
    p = _CodeParser(code[2:])
    sink = _DecodeSink()
    _decode_region(p, oriented, sink, None)
    if p.pos != len(p.text):
        raise InvalidDiagram("trailing junk in code")
    if sink.outer_dart is None:
        if p.text == "":
            return Diagram(0, (), (), frozenset(), (frozenset(),),
                           frozenset() if oriented else None)
        raise InvalidDiagram("empty code")
    nv = len(sink.over)
    alpha = [-1] * (4 * nv)
    for k, vv in sink.alpha.items():
        alpha[k] = vv
    ori = None
    if oriented:
        ori = _orient_from_claims(nv, alpha, sink.phantom, sink.forward, sink.backward)
    return assemble(alpha, sink.over, sink.phantom, sink.outer_dart,
                    sink.nests, ori)


def _orient_from_claims(nv, alpha, phantom, forward, backward):
    def opposite(x):
        v, s = divmod(x, 4)
        return 4 * v + (1 - s) if v in phantom else 4 * v + (s + 2) % 4
    darts = [x for v in range(nv)
             for x in ((4 * v, 4 * v + 1) if v in phantom else range(4 * v, 4 * v + 4))]
    seen: set[int] = set()
    chosen: set[int] = set()
    for d0 in darts:
        if d0 in seen:
            continue
        orb = set()
        x = d0
        while x not in orb:
            orb.add(x)
            x = opposite(alpha[x])
        rev = {alpha[x] for x in orb}
        seen |= orb | rev
        if orb & forward or rev & backward:
            pick = orb
        elif rev & forward or orb & backward:
            pick = rev
        else:
            raise InvalidDiagram("component with no orientation claim")
        if (pick & backward) or ((orb | rev) - pick) & forward:
            raise InvalidDiagram("contradictory orientation claims")
        chosen |= pick
    return chosen


def canonical_form(d: Diagram) -> Diagram:
    """The deterministic representative of d's isotopy class."""
    return decode(canonicalize(d))


# ---------------------------------------------------------------------------
# writhe


def _crossing_sign(d: Diagram, v: int, fwd: frozenset[int]) -> int:
    ob = d.over[v]
    over_pair = (4 * v + ob, 4 * v + ob + 2)
    under_pair = (4 * v + 1 - ob, 4 * v + 3 - ob)
    o_out = over_pair[0] if over_pair[0] in fwd else over_pair[1]
    u_out = under_pair[0] if under_pair[0] in fwd else under_pair[1]
    return 1 if (o_out - u_out) % 4 == 1 else -1


def writhe(d: Diagram) -> int:
    """Sum of crossing signs.  Needs an oriented diagram."""
    _require_valid(d)
    if d.orientation is None:
        raise Unoriented("writhe needs an orientation")
    return sum(_crossing_sign(d, v, d.orientation) for v in d.crossings())


def per_component_writhes(d: Diagram) -> list[int]:
    """Self-crossing writhe of each component (components ordered by
    smallest dart).  Defined without an orientation: reversing one
    component leaves its self-crossing signs alone."""
    _require_valid(d)
    comps = d.components()
    which = {}
    for i, c in enumerate(comps):
        for x in c:
            which[x] = i
    out = [0] * len(comps)
    for i, c in enumerate(comps):
        fwd = d.forward_orbit(min(c))
        for v in d.crossings():
            ds = range(4 * v, 4 * v + 4)
            if all(which[x] == i for x in ds):
                out[i] += _crossing_sign(d, v, fwd)
    return out


# ---------------------------------------------------------------------------
# unknot summands


def add_unknot_summand(d: Diagram, edge_dart: int, face_side: int) -> Diagram:
    """Drop a tiny crossing-free circle beside an edge.

    ``edge_dart`` names the edge; ``face_side`` 0 puts the circle in the
    face left of the dart, 1 in the face left of its partner.  Crossing
    count is unchanged and the region count grows by one (the circle's
    inside).  Raises NoSuchEdge for a dart that is not in the diagram.
    """
    _require_valid(d)
    if edge_dart not in set(d.darts()):
        raise NoSuchEdge(f"dart {edge_dart}")
    if face_side not in (0, 1):
        raise NoSuchEdge(f"face_side {face_side}")
    anchor = edge_dart if face_side == 0 else d.alpha[edge_dart]
    w = d.nv
    alpha = list(d.alpha) + [4 * w + 1, 4 * w, -1, -1]
    over = list(d.over) + [-1]
    fo = d.face_of()
    rof = d.region_of_face()
    host = rof[fo[anchor]]
    # new circle: face {4w} inside (fresh region), face {4w+1} outside
    regions = [set(r) for r in d.regions]
    regions[host].add(4 * w + 1)
    regions.append({4 * w})
    ori = d.orientation
    if ori is not None:
        ori = frozenset(ori | {4 * w})
    out = Diagram(d.nv + 1, tuple(alpha), tuple(over),
                  frozenset(d.phantom | {w}),
                  _renorm_regions(regions), ori)
    _require_valid(out)
    return out


def remove_unknot_summand(d: Diagram, site_dart: int) -> Diagram:
    """Delete the bare circle carrying ``site_dart``.

    The circle must be a phantom whose non-site faces hide nothing:
    its inner region (the one not shared with anything else) has to be
    empty.  Otherwise NotASummand.
    """
    _require_valid(d)
    v = site_dart // 4
    if not (0 <= v < d.nv) or v not in d.phantom or site_dart % 4 > 1:
        raise NotASummand(f"dart {site_dart} is not on a bare circle")
    rof = d.region_of_face()
    f_in, f_out = 4 * v, 4 * v + 1
    # one of the circle's two regions must be the singleton {face}
    inner = None
    for f in (f_in, f_out):
        if d.regions[rof[f]] == frozenset({f}) and rof[f] != 0:
            inner = f
            break
    if inner is None:
        raise NotASummand("circle has pieces on both sides")
    keep_region = rof[f_out if inner == f_in else f_in]
    drop_region = rof[inner]

    # renumber vertices past v down by one
    def m(dart: int) -> int:
        return dart - 4 if dart >= 4 * (v + 1) else dart
    alpha = [m(a) if a != -1 else -1
             for i, a in enumerate(d.alpha) if i // 4 != v]
    over = [o for i, o in enumerate(d.over) if i != v]
    regions = []
    for i, reg in enumerate(d.regions):
        if i == drop_region:
            continue
        regions.append({m(f) for f in reg if f // 4 != v})
    ori = None
    if d.orientation is not None:
        ori = frozenset(m(x) for x in d.orientation if x // 4 != v)
    out = Diagram(d.nv - 1, tuple(alpha), tuple(over),
                  frozenset(m(4 * p) // 4 for p in d.phantom if p != v),
                  _renorm_regions(regions), ori)
    _require_valid(out)
    return out


# ---------------------------------------------------------------------------
# sublink restriction


def restrict_to_sublink(d: Diagram, component_set: Iterable[int]) -> Diagram:
    """Keep the named components (indices into components()), splicing
    kept strands straight through every deleted crossing."""
    _require_valid(d)
    keep_idx = set(component_set)
    comps = d.components()
    if not keep_idx:
        raise EmptySelection("no components selected")
    bad = keep_idx - set(range(len(comps)))
    if bad:
        raise EmptySelection(f"no such components: {sorted(bad)}")
    if keep_idx == set(range(len(comps))):
        return d

    kept_darts: set[int] = set()
    for i in keep_idx:
        kept_darts |= comps[i]
    fo = d.face_of()
    rof = d.region_of_face()

    # a crossing survives iff all four darts are kept
    survives = {v: v not in d.phantom and all(x in kept_darts for x in range(4 * v, 4 * v + 4))
                for v in range(d.nv)}
    for v in d.phantom:
        survives[v] = 4 * v in kept_darts

    # regions merge across every deleted edge
    uf = _UnionFind(range(len(d.regions)))
    for x in d.darts():
        if x < d.alpha[x] and x not in kept_darts:
            uf.union(rof[fo[x]], rof[fo[d.alpha[x]]])

    # splice: follow each kept strand, walking through dead crossings
    def through(x: int) -> int:
        # x: kept dart whose edge ends at a dead crossing via alpha[x]
        y = d.alpha[x]
        while not survives[y // 4]:
            y = d.alpha[d.opposite(y)]
        return y

    old_new: dict[int, int] = {}
    nv2 = 0
    phantom2 = set()
    over2 = []
    for v in range(d.nv):
        if survives[v]:
            old_new[v] = nv2
            if v in d.phantom:
                phantom2.add(nv2)
            over2.append(d.over[v])
            nv2 += 1

    # components whose crossings all die become fresh circles; dart 4w of
    # the new phantom runs along the traversal direction we measure with
    extra_left: list[int] = []          # region class left of dart 4w
    extra_right: list[int] = []
    extra_fwd: list[bool] = []          # dart 4w is the oriented direction
    for i in sorted(keep_idx):
        comp = comps[i]
        if not any(survives[x // 4] for x in comp):
            w = nv2
            nv2 += 1
            phantom2.add(w)
            over2.append(-1)
            fwd = d.forward_orbit(min(comp))
            lc = {uf.find(rof[fo[x]]) for x in fwd}
            rc = {uf.find(rof[fo[d.alpha[x]]]) for x in fwd}
            if len(lc) != 1 or len(rc) != 1 or lc == rc:
                raise InvalidDiagram("sublink splice lost a side")
            extra_left.append(lc.pop())
            extra_right.append(rc.pop())
            extra_fwd.append(d.orientation is None or fwd <= d.orientation)

    def new_dart(x: int) -> int:
        v, s = divmod(x, 4)
        return 4 * old_new[v] + s

    alpha2 = [-1] * (4 * nv2)
    for x in d.darts():
        if x not in kept_darts or not survives[x // 4]:
            continue
        y = through(x)
        alpha2[new_dart(x)] = new_dart(y)

    base = len(over2) - len(extra_left)
    for k in range(len(extra_left)):
        w = base + k
        alpha2[4 * w] = 4 * w + 1
        alpha2[4 * w + 1] = 4 * w

    # faces of the restricted diagram, and their region classes
    dr = Diagram(nv2, tuple(alpha2), tuple(over2), frozenset(phantom2),
                 (frozenset(),), None)
    fo2 = dr.face_of()
    back = {new_dart(x): x for x in d.darts()
            if x in kept_darts and survives[x // 4]}
    face_class: dict[int, int] = {}
    for x2, f2 in fo2.items():
        if x2 in back:
            c = uf.find(rof[fo[back[x2]]])
            if face_class.setdefault(f2, c) != c:
                raise InvalidDiagram("sublink splice produced a torn face")
    for k in range(len(extra_left)):
        # face {4w} lies left of dart 4w
        w = base + k
        face_class[fo2[4 * w]] = extra_left[k]
        face_class[fo2[4 * w + 1]] = extra_right[k]
    by_class: dict[int, set[int]] = {}
    for f2, c in face_class.items():
        by_class.setdefault(c, set()).add(f2)
    outer_c = uf.find(0)
    regions2 = [by_class.pop(outer_c)]
    regions2.extend(g for _, g in sorted(by_class.items()))

    ori2 = None
    if d.orientation is not None:
        ori2 = set()
        for x in d.orientation:
            if x in kept_darts and survives[x // 4]:
                ori2.add(new_dart(x))
        for k in range(len(extra_left)):
            ori2.add(4 * (base + k) + (0 if extra_fwd[k] else 1))
        ori2 = frozenset(ori2)
    out = Diagram(nv2, tuple(alpha2), tuple(over2), frozenset(phantom2),
                  _renorm_regions(regions2), ori2)
    _require_valid(out)
    return out


# ---------------------------------------------------------------------------
# text format
#
#   D <crossings> <circles> <oriented 0|1>
#   X <vid> <h0> <h1> <h2> <h3> <over 0|1>     counterclockwise slots
#   E <ha> <hb>                                 edge between half-edge ids
#   C <h_in> <h_out>                            a bare circle's two sides
#   O <h ...>                                   a walk on the outer face
#   N <h_up> <h_container|outer>                nesting for extra pieces
#   R <h ...>                                   forward half-edge per component
#   # comment

def parse_diagram(text: str) -> Diagram:
    ncross = ncirc = None
    oriented = False
    xlines: list[tuple[int, list[str], int]] = []
    elines: list[tuple[str, str]] = []
    clines: list[tuple[str, str]] = []
    oline: list[str] | None = None
    nlines: list[tuple[str, str]] = []
    rline: list[str] = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        tag = parts[0]
        if tag == "D":
            if len(parts) != 4:
                raise InvalidDiagram("bad D line")
            ncross, ncirc, flag = int(parts[1]), int(parts[2]), parts[3]
            oriented = flag == "1"
        elif tag == "X":
            if len(parts) not in (7, 8):
                raise InvalidDiagram("bad X line")
            xlines.append((int(parts[1]), parts[2:6], int(parts[6])))
        elif tag == "E":
            elines.append((parts[1], parts[2]))
        elif tag == "C":
            if len(parts) != 3:
                raise InvalidDiagram("bad C line")
            clines.append((parts[1], parts[2]))
        elif tag == "O":
            oline = parts[1:]
        elif tag == "N":
            if len(parts) != 3:
                raise InvalidDiagram("bad N line")
            nlines.append((parts[1], parts[2]))
        elif tag == "R":
            rline = parts[1:]
        else:
            raise InvalidDiagram(f"unknown line tag {tag!r}")
    if ncross is None:
        raise InvalidDiagram("missing D line")
    if len(xlines) != ncross or len(clines) != ncirc:
        raise InvalidDiagram("X/C line counts disagree with D line")
    if oline is None:
        raise InvalidDiagram("missing O line")
    if ncross + ncirc == 0:
        if oline or elines or nlines or rline:
            raise InvalidDiagram("empty diagram with leftover lines")
        return Diagram(0, (), (), frozenset(), (frozenset(),),
                       frozenset() if oriented else None)

    nv = ncross + ncirc
    half: dict[str, int] = {}
    over = [0] * nv
    phantom = set()
    vids = set()
    for vid, hs, ob in xlines:
        if vid in vids or not (0 <= vid < ncross):
            raise InvalidDiagram(f"bad crossing id {vid}")
        vids.add(vid)
        if ob not in (0, 1):
            raise InvalidDiagram(f"bad over bit {ob}")
        over[vid] = ob
        for s, h in enumerate(hs):
            if h in half:
                raise InvalidDiagram(f"duplicate half-edge id {h}")
            half[h] = 4 * vid + s
    for k, (h_in, h_out) in enumerate(clines):
        v = ncross + k
        phantom.add(v)
        over[v] = -1
        for s, h in enumerate((h_in, h_out)):
            if h in half:
                raise InvalidDiagram(f"duplicate half-edge id {h}")
            half[h] = 4 * v + s

    alpha = [-1] * (4 * nv)
    for ha, hb in elines:
        if ha not in half or hb not in half:
            raise InvalidDiagram(f"E line references unknown id: {ha} {hb}")
        a, b = half[ha], half[hb]
        if alpha[a] != -1 or alpha[b] != -1 or a == b:
            raise InvalidDiagram(f"half-edge paired twice: {ha} {hb}")
        alpha[a], alpha[b] = b, a
    for v in phantom:
        a, b = 4 * v, 4 * v + 1
        if alpha[a] == -1 and alpha[b] == -1:
            alpha[a], alpha[b] = b, a       # default: circle is its own edge
    for v in range(nv):
        ds = (4 * v, 4 * v + 1) if v in phantom else range(4 * v, 4 * v + 4)
        for x in ds:
            if alpha[x] == -1:
                raise InvalidDiagram(f"unpaired half-edge (dart {x})")

    def ref(h: str) -> int:
        if h not in half:
            raise InvalidDiagram(f"unknown half-edge id {h!r}")
        return half[h]

    nests = []
    for h_up, h_cont in nlines:
        if h_cont == "outer":
            nests.append((ref(h_up), ref(oline[0])))
        else:
            nests.append((ref(h_up), ref(h_cont)))

    ori = None
    if oriented:
        if not rline:
            raise InvalidDiagram("oriented diagram needs an R line")
        d0 = Diagram(nv, tuple(alpha), tuple(over), frozenset(phantom),
                     (frozenset(),), None)
        ori = set()
        for h in rline:
            ori |= d0.forward_orbit(ref(h))
    d = assemble(alpha, over, phantom, ref(oline[0]), nests, ori)

    # cross-check the O walk: all named half-edges on one face
    fo = d.face_of()
    if len({fo[ref(h)] for h in oline}) != 1:
        raise InvalidDiagram("O walk spans several faces")
    return d


def format_diagram(d: Diagram) -> str:
    """Serialise; half-edge ids are the dart numbers of this diagram."""
    _require_valid(d)
    lines = [f"D {d.n_crossings()} {len(d.phantom)} {1 if d.orientation is not None else 0}"]
    cross = d.crossings()
    cross_index = {v: i for i, v in enumerate(cross)}
    for v in cross:
        hs = " ".join(str(4 * v + s) for s in range(4))
        lines.append(f"X {cross_index[v]} {hs} {d.over[v]}")
    for x in sorted(d.darts()):
        if x < d.alpha[x] and (x // 4 not in d.phantom or d.alpha[x] != d.sigma(x)):
            lines.append(f"E {x} {d.alpha[x]}")
    for v in sorted(d.phantom):
        lines.append(f"C {4 * v} {4 * v + 1}")
    if d.nv == 0:
        lines.append("O")
        return "\n".join(lines) + "\n"
    fo = d.face_of()
    outer_face = min(d.regions[0])
    walk = sorted(x for x in fo if fo[x] == outer_face)
    lines.append("O " + " ".join(str(x) for x in walk))
    # regions with several faces: nest the extras onto the first face
    for reg in d.regions:
        faces = sorted(reg)
        for f in faces[1:]:
            lines.append(f"N {f} {faces[0]}")
    if d.orientation is not None:
        reps = []
        for comp in d.components():
            fwd = min(x for x in comp if x in d.orientation)
            reps.append(str(fwd))
        lines.append("R " + " ".join(reps))
    return "\n".join(lines) + "\n"
