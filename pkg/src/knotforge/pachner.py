"""Triangulated complexes with exact coordinates and bistellar surgery.

Objects here are face-gluing presentations of 2- and 3-dimensional
triangulations: numbered top simplices, facets glued in pairs by explicit
corner bijections, named subcomplexes carried along as labels, and optional
rational corner positions that turn a presentation into a concrete
piecewise linear object.  Moves come in three families: interior bistellar
exchanges, and the boundary operations that attach or strip one top
simplex.  Applying a move yields a fresh complex plus the move that undoes
it.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, permutations


class PachnerError(Exception):
    pass


class InvalidComplex(PachnerError):
    pass


class PatternMismatch(PachnerError):
    """The requested move site does not match the local gluing pattern."""


class LabelConflict(PachnerError):
    """The move would destroy a protected labeled subcomplex."""


class BadLength(PachnerError):
    pass


class FormatError(PachnerError):
    pass


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _union(parent, a, b):
    ra, rb = _find(parent, a), _find(parent, b)
    if ra != rb:
        parent[ra] = rb


def _perm_sign(images):
    # sign of the permutation sending position k to images[k]
    seen = [False] * len(images)
    sign = 1
    for k in range(len(images)):
        if seen[k]:
            continue
        j, ln = k, 0
        while not seen[j]:
            seen[j] = True
            j = images[j]
            ln += 1
        if ln % 2 == 0:
            sign = -sign
    return sign


def _as_point(p):
    if len(p) != 3:
        raise InvalidComplex("points are triples")
    return tuple(Fraction(x) for x in p)


@dataclass(frozen=True)
class DeltaComplex:
    """A glued collection of top simplices of one dimension.

    gluings[t][f] is None for a free facet, else (t2, f2, corr) where corr
    lists, for the vertices of face f in ascending order, the matching
    vertex of t2.  Labels are (name, refs) rows; a ref is (top, vertex
    tuple).  coords, when present, give one exact point per corner.
    """

    dimension: int
    gluings: tuple
    labels: tuple = ()
    coords: object = None
    _cache: dict = field(default_factory=dict, init=False, compare=False,
                         repr=False)

    @property
    def ntop(self):
        return len(self.gluings)

    def face_vertices(self, f):
        return tuple(v for v in range(self.dimension + 1) if v != f)

    def _levels(self):
        if "levels" in self._cache:
            return self._cache["levels"]
        d = self.dimension
        parent = {}
        for t in range(self.ntop):
            for k in range(d + 1):
                for sub in combinations(range(d + 1), k + 1):
                    parent[(t, sub)] = (t, sub)
        for t, row in enumerate(self.gluings):
            for f, e in enumerate(row):
                if e is None:
                    continue
                t2, f2, corr = e
                m = dict(zip(self.face_vertices(f), corr))
                fv = self.face_vertices(f)
                for k in range(d):
                    for sub in combinations(fv, k + 1):
                        img = tuple(sorted(m[x] for x in sub))
                        _union(parent, (t, sub), (t2, img))
        groups = {}
        for ref in parent:
            groups.setdefault(_find(parent, ref), []).append(ref)
        levels = [[] for _ in range(d + 1)]
        for members in groups.values():
            members.sort()
            levels[len(members[0][1]) - 1].append(tuple(members))
        for lev in levels:
            lev.sort()
        index = {}
        for k, lev in enumerate(levels):
            for i, cls in enumerate(lev):
                for ref in cls:
                    index[ref] = (k, i)
        self._cache["levels"] = (levels, index)
        return levels, index

    def classes(self, k):
        return list(self._levels()[0][k])

    def class_of(self, t, sub):
        levels, index = self._levels()
        k, i = index[(t, tuple(sub))]
        return levels[k][i]

    def class_id(self, t, sub):
        return self._levels()[1][(t, tuple(sub))]

    def euler(self):
        levels, _ = self._levels()
        return sum((-1) ** k * len(lev) for k, lev in enumerate(levels))

    def homology_ranks(self):
        """GF(2) Betti numbers, one per dimension 0..d."""
        if "betti" in self._cache:
            return self._cache["betti"]
        levels, index = self._levels()
        d = self.dimension
        ranks = [0] * (d + 2)
        for k in range(1, d + 1):
            pivots = {}
            rank = 0
            for cls in levels[k]:
                t, sub = cls[0]
                col = 0
                for x in sub:
                    facet = tuple(y for y in sub if y != x)
                    _, i = index[(t, facet)]
                    col ^= 1 << i
                while col:
                    top = col.bit_length() - 1
                    if top in pivots:
                        col ^= pivots[top]
                    else:
                        pivots[top] = col
                        rank += 1
                        break
            ranks[k] = rank
        betti = tuple(len(levels[k]) - ranks[k] - ranks[k + 1]
                      for k in range(d + 1))
        self._cache["betti"] = betti
        return betti

    def orientable(self):
        if "orientable" in self._cache:
            return self._cache["orientable"]
        d = self.dimension
        sign = {}
        ok = True
        for start in range(self.ntop):
            if start in sign:
                continue
            sign[start] = 1
            queue = [start]
            while queue and ok:
                t = queue.pop()
                for f, e in enumerate(self.gluings[t]):
                    if e is None:
                        continue
                    t2, f2, corr = e
                    m = dict(zip(self.face_vertices(f), corr))
                    m[f] = f2
                    want = -sign[t] * _perm_sign([m[x] for x in range(d + 1)])
                    if t2 in sign:
                        if sign[t2] != want:
                            ok = False
                            break
                    else:
                        sign[t2] = want
                        queue.append(t2)
            if not ok:
                break
        self._cache["orientable"] = ok
        return ok

    def boundary_facets(self):
        return [(t, f) for t, row in enumerate(self.gluings)
                for f, e in enumerate(row) if e is None]

    def components(self):
        parent = {t: t for t in range(self.ntop)}
        for t, row in enumerate(self.gluings):
            for e in row:
                if e is not None:
                    _union(parent, t, e[0])
        groups = {}
        for t in range(self.ntop):
            groups.setdefault(_find(parent, t), []).append(t)
        return sorted(sorted(g) for g in groups.values())

    def boundary_complex(self):
        """The free facets as a complex one dimension down.

        Returns (complex, carriers) with carriers[i] the (top, face) slot
        of this complex that boundary top i came from.  Vertex i of a
        boundary top is vertex face_vertices(f)[i] of its carrier.
        """
        d = self.dimension
        carriers = sorted(self.boundary_facets())
        bindex = {tf: i for i, tf in enumerate(carriers)}
        rows = []
        for t, f in carriers:
            fv = self.face_vertices(f)
            row = []
            for w in fv:
                rset = tuple(x for x in fv if x != w)
                t2, f2, rho = _boundary_ridge_walk(self, t, f, rset)
                fv2 = self.face_vertices(f2)
                missing = [x for x in fv2 if x not in rho.values()]
                if len(missing) != 1:
                    raise InvalidComplex("bad boundary ridge")
                j2 = fv2.index(missing[0])
                corr = tuple(fv2.index(rho[x]) for x in rset)
                row.append((bindex[(t2, f2)], j2, corr))
            rows.append(tuple(row))
        bc = make_complex(d - 1, tuple(rows))
        return bc, carriers

    def boundary_code(self):
        bc, _ = self.boundary_complex()
        return bc.canonical_code()

    def canonical_code(self):
        """Isomorphism-invariant code: minimal relabeled traversal."""
        if "code" in self._cache:
            return self._cache["code"]
        d = self.dimension
        comp_codes = []
        for comp in self.components():
            best = None
            for root in comp:
                for rho0 in permutations(range(d + 1)):
                    code = self._traverse_code(root, rho0)
                    if best is None or code < best:
                        best = code
            comp_codes.append(best)
        full = (d, self.ntop, tuple(sorted(comp_codes)))
        self._cache["code"] = full
        return full

    def _traverse_code(self, root, rho0):
        d = self.dimension
        num = {root: 0}
        rhos = {root: list(rho0)}
        order = [root]
        tokens = []
        qi = 0
        while qi < len(order):
            t = order[qi]
            qi += 1
            rho = rhos[t]
            rinv = [0] * (d + 1)
            for v in range(d + 1):
                rinv[rho[v]] = v
            for a in range(d + 1):
                f = rinv[a]
                e = self.gluings[t][f]
                if e is None:
                    tokens.append((0,))
                    continue
                t2, f2, corr = e
                m = dict(zip(self.face_vertices(f), corr))
                if t2 not in num:
                    num[t2] = len(order)
                    rho2 = [0] * (d + 1)
                    for x in self.face_vertices(f):
                        rho2[m[x]] = rho[x]
                    rho2[f2] = rho[f]
                    rhos[t2] = rho2
                    order.append(t2)
                    tokens.append((1,))
                else:
                    rho2 = rhos[t2]
                    img = tuple(rho2[m[rinv[b]]] for b in range(d + 1)
                                if b != a)
                    tokens.append((2, num[t2], img))
        return tuple(tokens)

    def is_manifold(self):
        """Ridge and vertex link conditions for a (bounded) manifold."""
        d = self.dimension
        if d < 2:
            return all(len(cls) <= 2 for cls in self.classes(0))
        if not self._ridge_condition():
            return False
        if d == 3 and not self._vertex_links_ok():
            return False
        return True

    def _ridge_condition(self):
        d = self.dimension
        for cls in self.classes(d - 2):
            ports = {}
            ends = 0
            for t, rset in cls:
                for f in range(d + 1):
                    if f in rset:
                        continue
                    e = self.gluings[t][f]
                    if e is None:
                        ends += 1
                        ports[(t, rset, f)] = None
                    else:
                        t2, f2, corr = e
                        m = dict(zip(self.face_vertices(f), corr))
                        img = tuple(sorted(m[x] for x in rset))
                        ports[(t, rset, f)] = (t2, img, f2)
            if ends not in (0, 2):
                return False
            parent = {(t, r): (t, r) for t, r in cls}
            for (t, rset, f), tgt in ports.items():
                if tgt is not None:
                    _union(parent, (t, rset), (tgt[0], tgt[1]))
            roots = {_find(parent, m) for m in parent}
            if len(roots) != 1:
                return False
        return True

    def _vertex_links_ok(self):
        for cls in self.classes(0):
            members = set(cls)
            cells = {}
            for t, (v,) in members:
                others = [x for x in range(4) if x != v]
                for k in (1, 2, 3):
                    for sub in combinations(others, k):
                        cells[(t, v, sub)] = (t, v, sub)
            parent = dict(cells)
            for t, row in enumerate(self.gluings):
                for f, e in enumerate(row):
                    if e is None:
                        continue
                    t2, f2, corr = e
                    fv = self.face_vertices(f)
                    m = dict(zip(fv, corr))
                    for v in fv:
                        if (t, (v,)) not in members:
                            continue
                        rest = [x for x in fv if x != v]
                        for k in (1, 2):
                            for sub in combinations(rest, k):
                                img = tuple(sorted(m[x] for x in sub))
                                _union(parent, (t, v, sub),
                                       (t2, m[v], img))
            counts = [set(), set(), set()]
            for cell in cells:
                counts[len(cell[2]) - 1].add(_find(parent, cell))
            chi = len(counts[0]) - len(counts[1]) + len(counts[2])
            tri_parent = {(t, v): (t, v) for t, (v,) in members}
            edge_in = {}
            for t, v, sub in cells:
                if len(sub) != 2:
                    continue
                root = _find(parent, (t, v, sub))
                if root in edge_in:
                    _union(tri_parent, edge_in[root], (t, v))
                else:
                    edge_in[root] = (t, v)
            groups = {_find(tri_parent, m) for m in tri_parent}
            on_boundary = any(
                self.gluings[t][f] is None
                for t, (v,) in members
                for f in range(4) if f != v)
            want = 1 if on_boundary else 2
            if len(groups) != 1 or chi != want:
                return False
        return True


def make_complex(dimension, gluings, labels=(), coords=None,
                 require_manifold=False):
    """Validate and freeze a complex; raises InvalidComplex on any defect."""
    if dimension not in (1, 2, 3):
        raise InvalidComplex("dimension must be 1, 2 or 3")
    d = dimension
    n = len(gluings)
    rows = []
    for t, row in enumerate(gluings):
        row = tuple(row)
        if len(row) != d + 1:
            raise InvalidComplex("top %d has %d faces" % (t, len(row)))
        out = []
        for f, e in enumerate(row):
            if e is None:
                out.append(None)
                continue
            t2, f2, corr = e
            corr = tuple(corr)
            if not (0 <= t2 < n and 0 <= f2 <= d):
                raise InvalidComplex("gluing target out of range")
            if (t2, f2) == (t, f):
                raise InvalidComplex("facet glued to itself")
            fv2 = tuple(v for v in range(d + 1) if v != f2)
            if sorted(corr) != sorted(fv2):
                raise InvalidComplex("corr is not onto the target face")
            out.append((t2, f2, corr))
        rows.append(tuple(out))
    rows = tuple(rows)
    fvs = [tuple(v for v in range(d + 1) if v != f) for f in range(d + 1)]
    for t, row in enumerate(rows):
        for f, e in enumerate(row):
            if e is None:
                continue
            t2, f2, corr = e
            back = rows[t2][f2]
            minv = dict(zip(corr, fvs[f]))
            expect = (t, f, tuple(minv[x] for x in fvs[f2]))
            if back != expect:
                raise InvalidComplex("gluing not involutive at %d:%d" % (t, f))
    lab = []
    seen_names = set()
    for name, refs in labels:
        if not isinstance(name, str) or not name:
            raise InvalidComplex("bad label name")
        if name in seen_names:
            raise InvalidComplex("duplicate label %r" % name)
        seen_names.add(name)
        out = []
        for t, sub in refs:
            sub = tuple(sub)
            if not (0 <= t < n):
                raise InvalidComplex("label ref out of range")
            if not sub or list(sub) != sorted(set(sub)) \
                    or sub[0] < 0 or sub[-1] > d:
                raise InvalidComplex("bad label ref %r" % ((t, sub),))
            out.append((t, sub))
        lab.append((name, tuple(sorted(set(out)))))
    lab = tuple(sorted(lab))
    pts = None
    if coords is not None:
        if len(coords) != n:
            raise InvalidComplex("coords row count mismatch")
        pts = tuple(tuple(_as_point(p) for p in row) for row in coords)
        for row in pts:
            if len(row) != d + 1:
                raise InvalidComplex("coords arity mismatch")
        for t, row in enumerate(rows):
            for f, e in enumerate(row):
                if e is None:
                    continue
                t2, f2, corr = e
                m = dict(zip(fvs[f], corr))
                for x in fvs[f]:
                    if pts[t][x] != pts[t2][m[x]]:
                        raise InvalidComplex(
                            "glued corners disagree at %d:%d" % (t, f))
        for t in range(n):
            if _degenerate(d, pts[t]):
                raise InvalidComplex("top %d is geometrically flat" % t)
    c = DeltaComplex(dimension=d, gluings=rows, labels=lab, coords=pts)
    if require_manifold and not c.is_manifold():
        raise InvalidComplex("not a manifold triangulation")
    return c


def _degenerate(d, ps):
    vs = [tuple(b - a for a, b in zip(ps[0], p)) for p in ps[1:]]
    if d == 1:
        return all(x == 0 for x in vs[0])
    if d == 2:
        u, w = vs
        cx = u[1] * w[2] - u[2] * w[1]
        cy = u[2] * w[0] - u[0] * w[2]
        cz = u[0] * w[1] - u[1] * w[0]
        return cx == cy == cz == 0
    u, w, z = vs
    det = (u[0] * (w[1] * z[2] - w[2] * z[1])
           - u[1] * (w[0] * z[2] - w[2] * z[0])
           + u[2] * (w[0] * z[1] - w[1] * z[0]))
    return det == 0


def _boundary_ridge_walk(c, t, f, rset):
    """Cross the interior from one free facet to the other one sharing a
    ridge.  rset names d-1 vertices of t lying in face f; the return is
    (t2, f2, rho) with rho mapping the original ridge vertices into t2."""
    rho = {x: x for x in rset}
    cur_t, block = t, f
    limit = 2 * (c.dimension + 1) * max(c.ntop, 1) + 4
    for _ in range(limit):
        here = set(rho.values())
        exits = [g for g in range(c.dimension + 1)
                 if g != block and g not in here]
        if len(exits) != 1:
            raise InvalidComplex("ridge walk lost the ridge")
        g = exits[0]
        e = c.gluings[cur_t][g]
        if e is None:
            return cur_t, g, rho
        t2, f2, corr = e
        m = dict(zip(c.face_vertices(g), corr))
        rho = {o: m[v] for o, v in rho.items()}
        cur_t, block = t2, f2
    raise InvalidComplex("ridge walk did not terminate")


@dataclass(frozen=True)
class PachnerMove:
    """kind plus a site tuple; see apply_pachner for site conventions."""
    kind: str
    site: tuple


# interior kinds: name -> (simplices removed, dimension)
_INTERIOR = {
    "1-4": (1, 3), "2-3": (2, 3), "3-2": (3, 3), "4-1": (4, 3),
    "1-3": (1, 2), "2-2": (2, 2), "3-1": (3, 2),
}

_INV = {"1-4": "4-1", "2-3": "3-2", "3-2": "2-3", "4-1": "1-4",
        "1-3": "3-1", "2-2": "2-2", "3-1": "1-3"}


def apply_pachner(c, move):
    return _apply(c, move)[0]


def apply_with_inverse(c, move):
    new, inv, _ = _apply(c, move)
    return new, inv


def _apply(c, move):
    if move.kind in _INTERIOR:
        return _apply_interior(c, move)
    if move.kind == "boundary-attach":
        return _apply_attach(c, move)
    if move.kind == "boundary-remove":
        return _apply_remove(c, move)
    raise PatternMismatch("unknown move kind %r" % (move.kind,))


def _validated_site(c, move):
    i, dim = _INTERIOR[move.kind]
    if c.dimension != dim:
        raise PatternMismatch("move %s needs dimension %d" % (move.kind, dim))
    nv = dim + 2
    site = tuple(move.site)
    if len(site) != i:
        raise PatternMismatch("site needs %d simplices" % i)
    tets, vmaps = [], []
    for a, (t, vmap) in enumerate(site):
        vmap = tuple(vmap)
        if not (0 <= t < c.ntop):
            raise PatternMismatch("site top out of range")
        if len(vmap) != nv or vmap[a] != -1:
            raise PatternMismatch("site map %d malformed" % a)
        rest = [vmap[x] for x in range(nv) if x != a]
        if sorted(rest) != list(range(dim + 1)):
            raise PatternMismatch("site map %d is not a corner bijection" % a)
        tets.append(t)
        vmaps.append(vmap)
    if len(set(tets)) != i:
        raise PatternMismatch("site tops must be distinct")
    return i, dim, nv, tets, vmaps


def _apply_interior(c, move):
    i, dim, nv, tets, vmaps = _validated_site(c, move)
    d = dim
    # the i site simplices must realize the closed star of the pattern:
    # check every internal face gluing, then the central simplex class
    for a in range(i):
        for b in range(a + 1, i):
            fa = vmaps[a][b]
            fv = c.face_vertices(fa)
            want = []
            amap = {vmaps[a][x]: vmaps[b][x] for x in range(nv)
                    if x not in (a, b)}
            for w in fv:
                want.append(amap[w])
            e = c.gluings[tets[a]][fa]
            if e != (tets[b], vmaps[b][a], tuple(want)):
                raise PatternMismatch("site simplices not glued as required")
    comp = list(range(i, nv))
    if i >= 2:
        central = tuple(sorted(vmaps[0][x] for x in comp))
        cls = set(c.class_of(tets[0], central))
        expect = {(tets[a], tuple(sorted(vmaps[a][x] for x in comp)))
                  for a in range(i)}
        if cls != expect:
            raise PatternMismatch("central simplex has extra incidences")

    removed = set(tets)
    tet_map = {}
    nxt = 0
    for t in range(c.ntop):
        if t in removed:
            tet_map[t] = None
        else:
            tet_map[t] = nxt
            nxt += 1
    base = nxt
    j = nv - i
    uidx = {b: base + k for k, b in enumerate(comp)}
    nu = {}
    for b in comp:
        pat = [x for x in range(nv) if x != b]
        nu[b] = {x: k for k, x in enumerate(pat)}
    vinv = []
    for a in range(i):
        vinv.append({vmaps[a][x]: x for x in range(nv) if x != a})

    new_rows = []
    for t in range(c.ntop):
        if t in removed:
            continue
        row = []
        for f, e in enumerate(c.gluings[t]):
            if e is None:
                row.append(None)
                continue
            t2, f2, rc = e
            if t2 not in removed:
                row.append((tet_map[t2], f2, rc))
                continue
            a = tets.index(t2)
            b = vinv[a].get(f2)
            if b is None or b < i:
                raise PatternMismatch("site boundary touches itself badly")
            newcorr = tuple(nu[b][vinv[a][w]] for w in rc)
            row.append((uidx[b], nu[b][a], newcorr))
        new_rows.append(tuple(row))

    for b in comp:
        pat = [x for x in range(nv) if x != b]
        row = [None] * (d + 1)
        for pv in pat:
            p = nu[b][pv]
            face_pat = [x for x in pat if x != pv]
            if pv in comp:
                row[p] = (uidx[pv], nu[pv][b],
                          tuple(nu[pv][x] for x in face_pat))
                continue
            a = pv
            e = c.gluings[tets[a]][vmaps[a][b]]
            if e is None:
                row[p] = None
                continue
            t2, f2, rc = e
            m_old = dict(zip(c.face_vertices(vmaps[a][b]), rc))
            if t2 not in removed:
                fv_new = [q for q in range(d + 1) if q != p]
                inv_nub = {v: x for x, v in nu[b].items()}
                newcorr = tuple(m_old[vmaps[a][inv_nub[q]]] for q in fv_new)
                row[p] = (tet_map[t2], f2, newcorr)
                continue
            a2 = tets.index(t2)
            b2 = vinv[a2].get(f2)
            if b2 is None or b2 < i:
                raise PatternMismatch("site boundary touches itself badly")
            fv_new = [q for q in range(d + 1) if q != p]
            inv_nub = {v: x for x, v in nu[b].items()}
            chain = tuple(
                nu[b2][vinv[a2][m_old[vmaps[a][inv_nub[q]]]]]
                for q in fv_new)
            row[p] = (uidx[b2], nu[b2][a2], chain)
        new_rows.append(tuple(row))

    new_labels = _rehome_labels(c, removed, tet_map, tets, vmaps, vinv,
                                comp, nu, uidx, i, nv)

    new_coords = None
    if c.coords is not None:
        delta_pt = {}
        for x in range(nv):
            if x < i:
                if i == 1:
                    s = [sum(c.coords[tets[0]][v][k] for v in range(d + 1))
                         for k in range(3)]
                    delta_pt[x] = tuple(Fraction(v, d + 1) for v in s)
                else:
                    a = 1 if x == 0 else 0
                    delta_pt[x] = c.coords[tets[a]][vmaps[a][x]]
            else:
                delta_pt[x] = c.coords[tets[0]][vmaps[0][x]]
        rows_pts = [c.coords[t] for t in range(c.ntop) if t not in removed]
        for b in comp:
            inv_nub = {v: x for x, v in nu[b].items()}
            rows_pts.append(tuple(delta_pt[inv_nub[q]]
                                  for q in range(d + 1)))
        new_coords = tuple(rows_pts)

    out = make_complex(d, tuple(new_rows), new_labels, coords=None)
    if new_coords is not None:
        try:
            out = make_complex(d, tuple(new_rows), new_labels,
                               coords=new_coords)
        except InvalidComplex:
            pass

    inv_site = []
    for k, b in enumerate(comp):
        wm = [-1] * nv
        for y in range(nv):
            x = (i + y) if y < j else (y - j)
            if x != b:
                wm[y] = nu[b][x]
        inv_site.append((base + k, tuple(wm)))
    inverse = PachnerMove(_INV[move.kind], tuple(inv_site))
    info = {"tet_map": tet_map, "new_tets": [base + k for k in range(j)]}
    return out, inverse, info


def _rehome_labels(c, removed, tet_map, tets, vmaps, vinv, comp, nu, uidx,
                   i, nv):
    out = []
    for name, refs in c.labels:
        scratch = name.startswith("~")
        new_refs = []
        for t, sub in refs:
            if t not in removed:
                new_refs.append((tet_map[t], sub))
                continue
            placed = False
            for t2, sub2 in c.class_of(t, sub):
                if t2 not in removed:
                    new_refs.append((tet_map[t2], sub2))
                    placed = True
                    break
            if placed:
                continue
            for t2, sub2 in c.class_of(t, sub):
                if t2 not in removed:
                    continue
                a = tets.index(t2)
                if len(sub2) == nv - 1:
                    continue
                pat = {vinv[a][v] for v in sub2}
                free = [b for b in comp if b not in pat]
                if not free:
                    continue
                b = free[0]
                img = tuple(sorted(nu[b][x] for x in pat))
                new_refs.append((uidx[b], img))
                placed = True
                break
            if not placed:
                if scratch:
                    continue
                raise LabelConflict(name)
        if scratch and not new_refs:
            continue
        out.append((name, tuple(sorted(set(new_refs)))))
    return tuple(out)


def _apply_attach(c, move):
    d = c.dimension
    site = tuple(move.site)
    i = len(site)
    if not (1 <= i <= d):
        raise PatternMismatch("attach glues between 1 and %d facets" % d)
    hosts, emaps = [], []
    for a, (t, f, emap) in enumerate(site):
        emap = tuple(emap)
        if not (0 <= t < c.ntop and 0 <= f <= d):
            raise PatternMismatch("attach site out of range")
        if c.gluings[t][f] is not None:
            raise PatternMismatch("attach needs free facets")
        if len(emap) != d + 1 or emap[a] != -1:
            raise PatternMismatch("attach map %d malformed" % a)
        rest = [emap[x] for x in range(d + 1) if x != a]
        if sorted(rest) != sorted(c.face_vertices(f)):
            raise PatternMismatch("attach map %d misses the facet" % a)
        hosts.append((t, f))
        emaps.append(emap)
    if len(set(hosts)) != i:
        raise PatternMismatch("attach facets must be distinct")
    for a in range(i):
        for b in range(a + 1, i):
            ta, fa = hosts[a]
            rset = tuple(sorted(emaps[a][x] for x in range(d + 1)
                                if x not in (a, b)))
            t2, f2, rho = _boundary_ridge_walk(c, ta, fa, rset)
            if (t2, f2) != hosts[b]:
                raise PatternMismatch("attach facets do not share the ridge")
            for x in range(d + 1):
                if x in (a, b):
                    continue
                if rho[emaps[a][x]] != emaps[b][x]:
                    raise PatternMismatch("attach maps disagree on the ridge")
    if i == d:
        t0, f0 = hosts[0]
        vstar = emaps[0][d]
        star = set()
        for t2, sub2 in c.class_of(t0, (vstar,)):
            for f in range(d + 1):
                if f != sub2[0] and c.gluings[t2][f] is None:
                    star.add((t2, f))
        if star != set(hosts):
            raise PatternMismatch("central vertex star exceeds the site")

    n = c.ntop
    rows = [list(r) for r in c.gluings]
    new_row = [None] * (d + 1)
    for a in range(i):
        ta, fa = hosts[a]
        fv = c.face_vertices(a)
        corr = tuple(emaps[a][x] for x in fv)
        new_row[a] = (ta, fa, corr)
        einv = {v: x for x, v in enumerate(emaps[a]) if v != -1}
        rev = tuple(einv[w] for w in c.face_vertices(fa))
        rows[ta][fa] = (n, a, rev)
    rows.append(new_row)
    rows = tuple(tuple(r) for r in rows)

    labels = c.labels
    new_coords = None
    if c.coords is not None and i >= 2:
        pts = []
        for x in range(d + 1):
            a = 1 if x == 0 else 0
            pts.append(c.coords[hosts[a][0]][emaps[a][x]])
        new_coords = c.coords + (tuple(pts),)

    # with a single host facet there is no position for the fresh corner,
    # so geometry is dropped in that case
    out = make_complex(d, rows, labels, coords=None)
    if new_coords is not None:
        try:
            out = make_complex(d, rows, labels, coords=new_coords)
        except InvalidComplex:
            pass
    inverse = PachnerMove("boundary-remove", (n,))
    info = {"tet_map": {t: t for t in range(n)}, "new_tets": [n]}
    return out, inverse, info


def _apply_remove(c, move):
    d = c.dimension
    if len(move.site) != 1:
        raise PatternMismatch("remove takes one top simplex")
    t = move.site[0]
    if not (0 <= t < c.ntop):
        raise PatternMismatch("remove site out of range")
    row = c.gluings[t]
    glued = [f for f in range(d + 1) if row[f] is not None]
    free = [f for f in range(d + 1) if row[f] is None]
    if not glued or not free:
        raise PatternMismatch("remove needs both glued and free facets")
    if any(row[f][0] == t for f in glued):
        raise PatternMismatch("remove site is glued to itself")
    for fa, fb in combinations(glued, 2):
        rset = tuple(x for x in range(d + 1) if x not in (fa, fb))
        for t2, sub2 in c.class_of(t, rset):
            for f in range(d + 1):
                if f not in sub2 and c.gluings[t2][f] is None:
                    raise PatternMismatch("interior ridge lies on boundary")
    if len(glued) == d:
        vstar = free[0]
        for t2, sub2 in c.class_of(t, (vstar,)):
            for f in range(d + 1):
                if f != sub2[0] and c.gluings[t2][f] is None:
                    raise PatternMismatch("apex vertex lies on boundary")

    tet_map = {}
    nxt = 0
    for x in range(c.ntop):
        if x == t:
            tet_map[x] = None
        else:
            tet_map[x] = nxt
            nxt += 1
    rows = []
    for x in range(c.ntop):
        if x == t:
            continue
        out_row = []
        for e in c.gluings[x]:
            if e is None or e[0] == t:
                out_row.append(None)
            else:
                out_row.append((tet_map[e[0]], e[1], e[2]))
        rows.append(tuple(out_row))

    new_labels = []
    for name, refs in c.labels:
        scratch = name.startswith("~")
        out_refs = []
        for rt, sub in refs:
            if rt != t:
                out_refs.append((tet_map[rt], sub))
                continue
            placed = False
            for t2, sub2 in c.class_of(rt, sub):
                if t2 != t:
                    out_refs.append((tet_map[t2], sub2))
                    placed = True
                    break
            if not placed:
                if scratch:
                    continue
                raise LabelConflict(name)
        if scratch and not out_refs:
            continue
        new_labels.append((name, tuple(sorted(set(out_refs)))))
    new_coords = None
    if c.coords is not None:
        new_coords = tuple(r for x, r in enumerate(c.coords) if x != t)
    out = make_complex(d, tuple(rows), tuple(new_labels), coords=new_coords)

    inv_site = []
    sigma = list(glued) + list(free)
    for a in range(len(glued)):
        fa = sigma[a]
        t2, f2, rc = row[fa]
        m = dict(zip(c.face_vertices(fa), rc))
        emap = [-1] * (d + 1)
        for x in range(d + 1):
            if x != a:
                emap[x] = m[sigma[x]]
        inv_site.append((tet_map[t2], f2, tuple(emap)))
    inverse = PachnerMove("boundary-attach", tuple(inv_site))
    info = {"tet_map": tet_map, "new_tets": []}
    return out, inverse, info


# ---------------------------------------------------------------------------
# move construction helpers

def move_14(c, tet):
    return PachnerMove("1-4", ((tet, (-1, 0, 1, 2, 3)),))


def move_13(c, tri):
    return PachnerMove("1-3", ((tri, (-1, 0, 1, 2)),))


def _expand_site(c, tet, vmap0, i, nv):
    """Walk from simplex 0 across internal faces to fill in the site."""
    site = [(tet, tuple(vmap0))]
    for b in range(1, i):
        e = c.gluings[tet][vmap0[b]]
        if e is None:
            raise PatternMismatch("needed interior face is free")
        t2, f2, corr = e
        m = dict(zip(c.face_vertices(vmap0[b]), corr))
        vm = [-1] * nv
        vm[0] = f2
        for x in range(1, nv):
            if x != b:
                vm[x] = m[vmap0[x]]
        vm[b] = -1
        site.append((t2, tuple(vm)))
    return tuple(site)


def move_23(c, tet, face):
    fv = c.face_vertices(face)
    vmap0 = (-1, face, fv[0], fv[1], fv[2])
    return PachnerMove("2-3", _expand_site(c, tet, vmap0, 2, 5))


def move_22(c, tri, face):
    fv = c.face_vertices(face)
    vmap0 = (-1, face, fv[0], fv[1])
    return PachnerMove("2-2", _expand_site(c, tri, vmap0, 2, 4))


def move_32(c, tet, edge):
    v1, v2 = edge
    others = sorted(x for x in range(4) if x not in (v1, v2))
    vmap0 = (-1, others[0], others[1], v1, v2)
    return PachnerMove("3-2", _expand_site(c, tet, vmap0, 3, 5))


def move_41(c, tet, vertex):
    others = sorted(x for x in range(4) if x != vertex)
    vmap0 = (-1, others[0], others[1], others[2], vertex)
    return PachnerMove("4-1", _expand_site(c, tet, vmap0, 4, 5))


def move_31(c, tri, vertex):
    others = sorted(x for x in range(3) if x != vertex)
    vmap0 = (-1, others[0], others[1], vertex)
    return PachnerMove("3-1", _expand_site(c, tri, vmap0, 3, 4))


def move_remove(c, tet):
    return PachnerMove("boundary-remove", (tet,))


def move_attach(c, facets, ridge=None):
    """Build a boundary-attach move over 1, 2 or 3 free facets.

    For two facets the shared ridge is located by walking the boundary;
    pass ridge (a vertex tuple of the first facet) to disambiguate."""
    d = c.dimension
    facets = [tuple(x) for x in facets]
    i = len(facets)
    for t, f in facets:
        if not (0 <= t < c.ntop and 0 <= f <= d):
            raise PatternMismatch("attach facet out of range")
        if c.gluings[t][f] is not None:
            raise PatternMismatch("attach facet is not free")
    if i == 1:
        t, f = facets[0]
        emap = [-1] + list(c.face_vertices(f))
        return PachnerMove("boundary-attach", ((t, f, tuple(emap)),))
    if i == 2:
        t0, f0 = facets[0]
        fv0 = c.face_vertices(f0)
        cands = [tuple(ridge)] if ridge is not None else \
            [tuple(s) for s in combinations(fv0, d - 1)]
        for rset in cands:
            rset = tuple(sorted(rset))
            if not all(v in fv0 for v in rset):
                continue
            t2, f2, rho = _boundary_ridge_walk(c, t0, f0, rset)
            if (t2, f2) != tuple(facets[1]):
                continue
            c0 = [v for v in fv0 if v not in rset][0]
            emap0 = [-1, c0] + list(rset)
            fv1 = c.face_vertices(f2)
            c1 = [v for v in fv1 if v not in rho.values()][0]
            emap1 = [c1, -1] + [rho[v] for v in rset]
            return PachnerMove("boundary-attach",
                               ((t0, f0, tuple(emap0)),
                                (t2, f2, tuple(emap1))))
        raise PatternMismatch("no shared boundary ridge found")
    if i == 3 and d == 3:
        t0, f0 = facets[0]
        fv0 = c.face_vertices(f0)
        for w in fv0:
            rest = [v for v in fv0 if v != w]
            for x2 in rest:
                x1 = [v for v in rest if v != x2][0]
                try:
                    mv = _attach3(c, facets, x1, x2, w)
                except PatternMismatch:
                    continue
                if mv is not None:
                    return mv
        raise PatternMismatch("no consistent three-facet corner found")
    raise PatternMismatch("unsupported attach arity")


def _attach3(c, facets, x1, x2, w):
    t0, f0 = facets[0]
    t1, f1, rho01 = _boundary_ridge_walk(c, t0, f0, tuple(sorted((x2, w))))
    if (t1, f1) != tuple(facets[1]):
        return None
    t2, f2, rho02 = _boundary_ridge_walk(c, t0, f0, tuple(sorted((x1, w))))
    if (t2, f2) != tuple(facets[2]):
        return None
    emap0 = (-1, x1, x2, w)
    fv1 = c.face_vertices(f1)
    y0 = [v for v in fv1 if v not in rho01.values()][0]
    emap1 = (y0, -1, rho01[x2], rho01[w])
    fv2 = c.face_vertices(f2)
    z0 = [v for v in fv2 if v not in rho02.values()][0]
    emap2 = (z0, rho02[x1], -1, rho02[w])
    mv = PachnerMove("boundary-attach",
                     ((t0, f0, emap0), (t1, f1, emap1), (t2, f2, emap2)))
    try:
        _apply_attach(c, mv)
    except PatternMismatch:
        return None
    return mv


def legal_interior_moves(c):
    """All interior moves that apply to c, found by trial."""
    d = c.dimension
    out = []

    def works(mv):
        try:
            _apply(c, mv)
        except PachnerError:
            return False
        return True

    for t in range(c.ntop):
        mv = move_14(c, t) if d == 3 else move_13(c, t)
        if works(mv):
            out.append(mv)
    seen = set()
    for t, row in enumerate(c.gluings):
        for f, e in enumerate(row):
            if e is None or e[0] == t:
                continue
            key = tuple(sorted([(t, f), (e[0], e[1])]))
            if key in seen:
                continue
            seen.add(key)
            try:
                mv = move_23(c, t, f) if d == 3 else move_22(c, t, f)
            except PatternMismatch:
                continue
            if works(mv):
                out.append(mv)
    if d == 3:
        for cls in c.classes(1):
            if len(cls) != 3:
                continue
            t, sub = cls[0]
            try:
                mv = move_32(c, t, sub)
            except PatternMismatch:
                continue
            if works(mv):
                out.append(mv)
    for cls in c.classes(0):
        if len(cls) != d + 1:
            continue
        t, (v,) = cls[0]
        try:
            mv = move_41(c, t, v) if d == 3 else move_31(c, t, v)
        except PatternMismatch:
            continue
        if works(mv):
            out.append(mv)
    return out


# ---------------------------------------------------------------------------
# labels, pins, isomorphism

def with_label(c, name, refs):
    rows = [r for r in c.labels if r[0] != name]
    rows.append((name, tuple((t, tuple(s)) for t, s in refs)))
    return make_complex(c.dimension, c.gluings, tuple(rows), c.coords)


def drop_label(c, name):
    rows = tuple(r for r in c.labels if r[0] != name)
    return make_complex(c.dimension, c.gluings, rows, c.coords)


def drop_scratch_labels(c):
    rows = tuple(r for r in c.labels if not r[0].startswith("~"))
    return make_complex(c.dimension, c.gluings, rows, c.coords)


def pin_boundary(c):
    """Give every free facet its own pin label, replacing older pins."""
    rows = [r for r in c.labels if not r[0].startswith("pin:")]
    for k, (t, f) in enumerate(sorted(c.boundary_facets())):
        rows.append(("pin:%d" % k, ((t, c.face_vertices(f)),)))
    return make_complex(c.dimension, c.gluings, tuple(rows), c.coords)


@dataclass(frozen=True)
class Correspondence:
    """tets[i] = (image top, corner map tuple) for each top of the source."""
    tets: tuple


def isomorphic(a, b, pinned_boundary=False):
    """A label-respecting isomorphism from a to b, or None.

    With pinned_boundary the match must send each pin label to the pin of
    the same name by the order-preserving corner bijection; both sides
    must then have every free facet pinned."""
    if a.dimension != b.dimension or a.ntop != b.ntop:
        return None
    d = a.dimension
    for k in range(d + 1):
        if len(a.classes(k)) != len(b.classes(k)):
            return None
    if len(a.boundary_facets()) != len(b.boundary_facets()):
        return None
    if sorted(n for n, _ in a.labels) != sorted(n for n, _ in b.labels):
        return None
    pins_a = {n: r for n, r in a.labels if n.startswith("pin:")}
    pins_b = {n: r for n, r in b.labels if n.startswith("pin:")}
    if pinned_boundary:
        for side, pins in ((a, pins_a), (b, pins_b)):
            covered = set()
            for n, refs in pins.items():
                if len(refs) != 1:
                    raise ValueError("pin label %r must name one facet" % n)
                t, sub = refs[0]
                f = [x for x in range(d + 1) if x not in sub]
                if len(f) != 1 or side.gluings[t][f[0]] is not None:
                    raise ValueError("pin label %r is not a free facet" % n)
                covered.add((t, f[0]))
            if covered != set(side.boundary_facets()):
                raise ValueError("pins do not cover the boundary")

    comps_a = a.components()
    comps_b = b.components()
    if sorted(map(len, comps_a)) != sorted(map(len, comps_b)):
        return None

    assign = {}

    def extend(ta0, tb0, rho0):
        """Force the correspondence out from a seed; None on clash."""
        local = {ta0: (tb0, tuple(rho0))}
        queue = [ta0]
        while queue:
            ta = queue.pop()
            tb, rho = local[ta]
            for f in range(d + 1):
                ea = a.gluings[ta][f]
                fb = rho[f]
                eb = b.gluings[tb][fb]
                if ea is None:
                    if eb is not None:
                        return None
                    continue
                if eb is None:
                    return None
                ta2, fa2, ca = ea
                tb2, fb2, cb = eb
                ma = dict(zip(a.face_vertices(f), ca))
                ma[f] = fa2
                mb = dict(zip(b.face_vertices(fb), cb))
                mb[fb] = fb2
                rho2 = [0] * (d + 1)
                for x in range(d + 1):
                    rho2[ma[x]] = mb[rho[x]]
                cand = (tb2, tuple(rho2))
                prev = local.get(ta2, assign.get(ta2))
                if prev is None:
                    local[ta2] = cand
                    queue.append(ta2)
                elif prev != cand:
                    return None
        return local

    def final_checks():
        def image(side_ref):
            t, sub = side_ref
            tb, rho = assign[t]
            return (tb, tuple(sorted(rho[v] for v in sub)))

        la = dict(a.labels)
        lb = dict(b.labels)
        for name in la:
            ia = {b.class_id(*image(r)) for r in la[name]}
            ib = {b.class_id(t, s) for t, s in lb[name]}
            if ia != ib:
                return False
        if pinned_boundary:
            for name, refs in pins_a.items():
                t, sub = refs[0]
                tb, rho = assign[t]
                t2, sub2 = pins_b[name][0]
                if tb != t2:
                    return False
                if tuple(rho[v] for v in sub) != sub2:
                    return False
        return True

    used = [False] * len(comps_b)

    def solve(ci):
        if ci == len(comps_a):
            return final_checks()
        comp = comps_a[ci]
        ta0 = comp[0]
        for bi, bcomp in enumerate(comps_b):
            if used[bi] or len(bcomp) != len(comp):
                continue
            for tb0 in bcomp:
                for rho0 in permutations(range(d + 1)):
                    local = extend(ta0, tb0, rho0)
                    if local is None:
                        continue
                    if set(local) != set(comp):
                        continue
                    assign.update(local)
                    used[bi] = True
                    if solve(ci + 1):
                        return True
                    used[bi] = False
                    for t in local:
                        del assign[t]
        return False

    if not solve(0):
        return None
    return Correspondence(tuple(assign[t] for t in range(a.ntop)))


def restrict_complex(c, keep):
    """The subcomplex on the given top simplices; cut gluings become
    boundary, label refs outside are discarded."""
    keep = sorted(set(keep))
    if any(not 0 <= t < c.ntop for t in keep):
        raise InvalidComplex("restriction out of range")
    idx = {t: k for k, t in enumerate(keep)}
    rows = []
    for t in keep:
        row = []
        for e in c.gluings[t]:
            if e is None or e[0] not in idx:
                row.append(None)
            else:
                row.append((idx[e[0]], e[1], e[2]))
        rows.append(tuple(row))
    labels = []
    for name, refs in c.labels:
        nr = tuple(sorted((idx[t], sub) for t, sub in refs if t in idx))
        if nr:
            labels.append((name, nr))
    coords = None
    if c.coords is not None:
        coords = tuple(c.coords[t] for t in keep)
    return make_complex(c.dimension, tuple(rows), tuple(labels), coords)


# ---------------------------------------------------------------------------
# stock triangulations

def _complex_from_points(dim, tops, labels=()):
    facemap = {}
    for t, pts in enumerate(tops):
        for f in range(dim + 1):
            key = frozenset(p for k, p in enumerate(pts) if k != f)
            facemap.setdefault(key, []).append((t, f))
    rows = []
    for t, pts in enumerate(tops):
        row = []
        for f in range(dim + 1):
            key = frozenset(p for k, p in enumerate(pts) if k != f)
            occ = facemap[key]
            if len(occ) == 1:
                row.append(None)
                continue
            if len(occ) > 2:
                raise InvalidComplex("facet shared more than twice")
            (t2, f2) = occ[0] if occ[1] == (t, f) else occ[1]
            fv = tuple(v for v in range(dim + 1) if v != f)
            corr = tuple(tops[t2].index(pts[v]) for v in fv)
            row.append((t2, f2, corr))
        rows.append(tuple(row))
    return make_complex(dim, tuple(rows), labels, coords=tuple(tops))


def _label_boundary_by(c, name_of):
    """Attach labels to free facets chosen by a predicate on their points."""
    rows = {n: list(r) for n, r in c.labels}
    for t, f in c.boundary_facets():
        pts = [c.coords[t][v] for v in c.face_vertices(f)]
        name = name_of(pts)
        if name is None:
            continue
        rows.setdefault(name, []).append((t, c.face_vertices(f)))
    labels = tuple((n, tuple(sorted(r))) for n, r in sorted(rows.items()))
    return make_complex(c.dimension, c.gluings, labels, c.coords)


def standard_sphere():
    """Boundary of one tetrahedron: four triangles, Euler number 2."""
    ps = [(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1)]
    ps = [tuple(Fraction(x) for x in p) for p in ps]
    tops = [tuple(p for k, p in enumerate(ps) if k != i) for i in range(4)]
    return _complex_from_points(2, tops)


def _cube_tops(cx, cy, cz):
    F = Fraction
    o = (F(cx), F(cy), F(cz))
    tops = []
    for axis in range(3):
        for sign in (-1, 1):
            center = list(o)
            center[axis] += sign
            center = tuple(center)
            oa, ob = [x for x in range(3) if x != axis]
            ring = [(1, 1), (1, -1), (-1, -1), (-1, 1)]
            for k in range(4):
                sa, sb = ring[k]
                sa2, sb2 = ring[(k + 1) % 4]
                c1, c2 = list(o), list(o)
                c1[axis] += sign
                c1[oa] += sa
                c1[ob] += sb
                c2[axis] += sign
                c2[oa] += sa2
                c2[ob] += sb2
                tops.append((o, center, tuple(c1), tuple(c2)))
    return tops


def standard_cube():
    """A cube cored into 24 tetrahedra around its center."""
    c = _complex_from_points(3, _cube_tops(0, 0, 0))
    axes = "xyz"

    def name_of(pts):
        for axis in range(3):
            for sign in (-1, 1):
                if all(p[axis] == sign for p in pts):
                    return "face-%s%s" % (axes[axis], "-" if sign < 0 else "+")
        return None

    return _label_boundary_by(c, name_of)


def standard_s_x_i():
    """A thickened sphere: shell between a tetrahedron and its triple.

    Tetrahedron count is the value this construction produces, kept as a
    regression constant: 56.  The two boundary spheres are labeled
    sphere-inner and sphere-outer."""
    F = Fraction
    p = [(F(0), F(0), F(0)), (F(12), F(0), F(0)),
         (F(0), F(12), F(0)), (F(0), F(0), F(12))]
    m = (F(3), F(3), F(3))
    po = [tuple(3 * a - 2 * b for a, b in zip(pt, m)) for pt in p]

    def mean(pts):
        k = len(pts)
        return tuple(sum(q[i] for q in pts) / k for i in range(3))

    tops = []
    for i in range(4):
        idx = [x for x in range(4) if x != i]
        inner = [p[x] for x in idx]
        outer = [po[x] for x in idx]
        g = mean(inner + outer)
        tops.append((g,) + tuple(inner))
        tops.append((g,) + tuple(outer))
        for a, b in combinations(idx, 2):
            q = mean([p[a], p[b], po[b], po[a]])
            quad = [p[a], p[b], po[b], po[a]]
            for k in range(4):
                tops.append((g, q, quad[k], quad[(k + 1) % 4]))
    c = _complex_from_points(3, tops)
    inner_set = set(p)
    outer_set = set(po)

    def name_of(pts):
        if all(q in inner_set for q in pts):
            return "sphere-inner"
        if all(q in outer_set for q in pts):
            return "sphere-outer"
        return None

    return _label_boundary_by(c, name_of)


def standard_solid_torus(n):
    """A ring of n cubes, 24n tetrahedra, torus boundary.

    The four long sides keep annulus labels.  Corner positions are not
    retained: the closing identification is a translation, so no single
    exact embedding restricts to every gluing."""
    if not isinstance(n, int) or n < 1:
        raise BadLength("ring length must be a positive integer")
    tops = []
    for k in range(n):
        tops.extend(_cube_tops(2 * k, 0, 0))
    c = _complex_from_points(3, tops)

    def name_of(pts):
        for axis, nm in ((1, "y"), (2, "z")):
            for sign in (-1, 1):
                if all(q[axis] == sign for q in pts):
                    return "annulus-%s%s" % (nm, "-" if sign < 0 else "+")
        return None

    c = _label_boundary_by(c, name_of)
    hi = 2 * n - 1
    pairs = []
    for t, f in c.boundary_facets():
        pts = [c.coords[t][v] for v in c.face_vertices(f)]
        if all(q[0] == hi for q in pts):
            shifted = [(q[0] - 2 * n, q[1], q[2]) for q in pts]
            tgt = None
            for t2, f2 in c.boundary_facets():
                pts2 = [c.coords[t2][v] for v in c.face_vertices(f2)]
                if set(pts2) == set(shifted):
                    tgt = (t2, f2, pts2)
                    break
            if tgt is None:
                raise InvalidComplex("ring faces fail to match")
            t2, f2, pts2 = tgt
            fv2 = c.face_vertices(f2)
            corr = tuple(fv2[pts2.index(s)] for s in shifted)
            pairs.append(((t, f), (t2, f2), corr))
    return glue_boundary_facets(c, pairs)


def glue_boundary_facets(c, pairs):
    """Glue listed free facet pairs; ((t,f),(t2,f2),corr) with corr over
    the ascending vertices of f.  Coordinates are kept only if every new
    gluing is exact pointwise, else dropped."""
    rows = [list(r) for r in c.gluings]
    for (t, f), (t2, f2), corr in pairs:
        if rows[t][f] is not None or rows[t2][f2] is not None:
            raise InvalidComplex("facet already glued")
        fv = c.face_vertices(f)
        fv2 = c.face_vertices(f2)
        corr = tuple(corr)
        if sorted(corr) != sorted(fv2):
            raise InvalidComplex("bad corr in facet pair")
        minv = dict(zip(corr, fv))
        rows[t][f] = (t2, f2, corr)
        rows[t2][f2] = (t, f, tuple(minv[x] for x in fv2))
    rows = tuple(tuple(r) for r in rows)
    try:
        return make_complex(c.dimension, rows, c.labels, c.coords)
    except InvalidComplex:
        return make_complex(c.dimension, rows, c.labels, None)


# ---------------------------------------------------------------------------
# plain text form

def format_complex(c):
    lines = ["T%d %d" % (c.dimension, c.ntop)]
    for t, row in enumerate(c.gluings):
        for f, e in enumerate(row):
            if e is None:
                lines.append("G %d %d B" % (t, f))
            else:
                t2, f2, corr = e
                lines.append("G %d %d -> %d %d %s"
                             % (t, f, t2, f2, "".join(map(str, corr))))
    if c.coords is not None:
        done = set()
        for t in range(c.ntop):
            for v in range(c.dimension + 1):
                k = _vclass_key(c, t, v)
                if k in done:
                    continue
                done.add(k)
                x, y, z = c.coords[t][v]
                lines.append("V %d %s %s %s" % (k, x, y, z))
    for name, refs in c.labels:
        toks = " ".join("%d:%s" % (t, "".join(map(str, sub)))
                        for t, sub in refs)
        lines.append("L %s %s" % (name, toks))
    return "\n".join(lines) + "\n"


def _vclass_key(c, t, v):
    _, index = c._levels()
    return index[(t, (v,))][1]


def parse_complex(text):
    lines = [ln for ln in (s.strip() for s in text.splitlines()) if ln]
    if not lines:
        raise FormatError("empty input")
    head = lines[0].split()
    if len(head) != 2 or not head[0].startswith("T"):
        raise FormatError("bad header %r" % lines[0])
    try:
        d = int(head[0][1:])
        n = int(head[1])
    except ValueError:
        raise FormatError("bad header %r" % lines[0])
    rows = [[None] * (d + 1) for _ in range(n)]
    vlines = []
    labels = []
    for ln in lines[1:]:
        parts = ln.split()
        if parts[0] == "G":
            try:
                t, f = int(parts[1]), int(parts[2])
            except (ValueError, IndexError):
                raise FormatError("bad G line %r" % ln)
            if not (0 <= t < n and 0 <= f <= d):
                raise FormatError("G line out of range %r" % ln)
            if len(parts) == 4 and parts[3] == "B":
                rows[t][f] = None
            elif len(parts) == 7 and parts[3] == "->":
                try:
                    t2, f2 = int(parts[4]), int(parts[5])
                    corr = tuple(int(ch) for ch in parts[6])
                except ValueError:
                    raise FormatError("bad G line %r" % ln)
                rows[t][f] = (t2, f2, corr)
            else:
                raise FormatError("bad G line %r" % ln)
        elif parts[0] == "V":
            if len(parts) != 5:
                raise FormatError("bad V line %r" % ln)
            try:
                k = int(parts[1])
                pt = tuple(Fraction(x) for x in parts[2:])
            except (ValueError, ZeroDivisionError):
                raise FormatError("bad V line %r" % ln)
            vlines.append((k, pt))
        elif parts[0] == "L":
            if len(parts) < 2:
                raise FormatError("bad L line %r" % ln)
            name = parts[1]
            refs = []
            for tok in parts[2:]:
                if ":" not in tok:
                    raise FormatError("bad label ref %r" % tok)
                ts, ss = tok.split(":", 1)
                try:
                    refs.append((int(ts), tuple(int(ch) for ch in ss)))
                except ValueError:
                    raise FormatError("bad label ref %r" % tok)
            labels.append((name, tuple(refs)))
        else:
            raise FormatError("unknown line %r" % ln)
    bare = make_complex(d, tuple(tuple(r) for r in rows), tuple(labels))
    if not vlines:
        return bare
    vmap = dict(vlines)
    coords = []
    for t in range(n):
        row = []
        for v in range(d + 1):
            k = _vclass_key(bare, t, v)
            if k not in vmap:
                raise FormatError("missing V line for class %d" % k)
            row.append(vmap[k])
        coords.append(tuple(row))
    return make_complex(d, tuple(tuple(r) for r in rows), tuple(labels),
                        coords=tuple(coords))
