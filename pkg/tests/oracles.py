"""Independent constructions the tests check library output against.

Everything in here is written from first principles (hand-derived dart
wiring, brute-force counting) rather than through the code paths under
test, so agreement is evidence and not tautology.
"""

from knotforge.diagram import Diagram, assemble


def closed_braid(k, letters, oriented=True):
    """Closure of a braid on ``k`` strands, built dart by dart.

    ``letters`` is a sequence of (position, over_bit): a crossing between
    the strands at positions i and i+1, read bottom to top.  over_bit 1
    is the positive generator (lower-right strand passes over), 0 the
    negative one.  Slot layout at each crossing, counterclockwise:

        slot 0 = up-right   slot 1 = up-left
        slot 2 = down-left  slot 3 = down-right

    so strand pairs are the opposite slots {0,2} and {1,3}.  All strands
    run upward; closure arcs return around the right-hand side, the arc
    for position 0 outermost.  The braid must use every generator index
    in 0..k-2 so the diagram is connected.
    """
    if k < 2:
        raise ValueError("need at least two strands")
    used = {i for i, _ in letters}
    if used != set(range(k - 1)):
        raise ValueError("braid must touch every adjacent strand pair")
    nv = len(letters)
    alpha = [-1] * (4 * nv)
    over = [0] * nv

    def join(a, b):
        alpha[a], alpha[b] = b, a

    open_top = [None] * k       # dart waiting above each position
    bottom = [None] * k         # dart hanging below each position
    for c, (i, bit) in enumerate(letters):
        over[c] = 1 if bit else 0
        ar, al, bl, br = 4 * c, 4 * c + 1, 4 * c + 2, 4 * c + 3
        for pos, down in ((i, bl), (i + 1, br)):
            if open_top[pos] is None:
                bottom[pos] = down
            else:
                join(open_top[pos], down)
        open_top[i], open_top[i + 1] = al, ar
    # unbounded region sits west of the braid: left of position 0's top dart
    outer_dart = open_top[0]
    for p in range(k):
        join(open_top[p], bottom[p])

    orientation = None
    if oriented:
        # upward travel: every up-right and up-left dart is forward
        orientation = [4 * c for c in range(nv)] + [4 * c + 1 for c in range(nv)]
    return assemble(alpha, over, outer=outer_dart, orientation=orientation)


def braid_signs(letters):
    """Writhe of the closed braid, straight from the letters."""
    return sum(1 if bit else -1 for _, bit in letters)


def braid_component_count(k, letters):
    """Cycle count of the permutation the braid word induces."""
    perm = list(range(k))
    for i, _ in letters:
        perm[i], perm[i + 1] = perm[i + 1], perm[i]
    seen = [False] * k
    n = 0
    for s in range(k):
        if not seen[s]:
            n += 1
            while not seen[s]:
                seen[s] = True
                s = perm[s]
    return n


def enumerate_rooted_bicubic(max_vertices):
    """Every rooted bicubic sphere-or-higher-genus map with at most
    ``max_vertices`` vertices, as (alpha, nv) pairs.

    Darts of vertex v are 3v, 3v+1, 3v+2 in counterclockwise order and
    dart 0 is the root.  Labels are assigned in breadth-first discovery
    order, so each rooted map is built exactly once: a rooted map has no
    nontrivial automorphism.  Vertices are 2-coloured as they appear and
    only opposite-colour pairings are allowed, which is what bicubic
    means.  Genus is not restricted here; filter by Euler count later.
    """
    out = []

    def rec(alpha, colour, nv):
        x = None
        for d in range(3 * nv):
            if d not in alpha:
                x = d
                break
        if x is None:
            out.append((dict(alpha), nv))
            return
        # option 1: x pairs into a fresh vertex (entry dart = 3*nv)
        if nv < max_vertices:
            w = nv
            alpha[x] = 3 * w
            alpha[3 * w] = x
            colour.append(1 - colour[x // 3])
            rec(alpha, colour, nv + 1)
            colour.pop()
            del alpha[x], alpha[3 * w]
        # option 2: x pairs with a later unpaired dart of opposite colour
        for y in range(x + 1, 3 * nv):
            if y in alpha or colour[y // 3] == colour[x // 3]:
                continue
            alpha[x] = y
            alpha[y] = x
            rec(alpha, colour, nv)
            del alpha[x], alpha[y]

    rec({}, [0], 1)
    return out


def bicubic_faces(alpha, nv):
    """Orbits of sigma^-1 after alpha: the face on the left of each dart."""
    def sigma_inv(d):
        return 3 * (d // 3) + (d % 3 - 1) % 3

    seen = set()
    faces = []
    for d0 in range(3 * nv):
        if d0 in seen:
            continue
        orb = []
        d = d0
        while d not in seen:
            seen.add(d)
            orb.append(d)
            d = sigma_inv(alpha[d])
        faces.append(tuple(orb))
    return faces


def bicubic_face_colouring(faces, alpha, nv):
    """Proper 3-colouring of the faces, or None when there is none.

    Seeded with colours 0, 1 on the two sides of the root edge and
    propagated by the rule that a trivalent vertex of a properly
    3-coloured map meets one face of each colour.  Returns "ambiguous"
    if propagation stalls before colouring everything.
    """
    face_of = {}
    for i, f in enumerate(faces):
        for d in f:
            face_of[d] = i
    a, b = face_of[0], face_of[alpha[0]]
    if a == b:
        return None
    col = {a: 0, b: 1}
    corners = [{face_of[3 * v], face_of[3 * v + 1], face_of[3 * v + 2]}
               for v in range(nv)]
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
        return "ambiguous"
    for d, e in alpha.items():
        if col[face_of[d]] == col[face_of[e]]:
            return None
    for c in corners:
        if len({col[i] for i in c}) != 3:
            return None
    return col


def rooted_bicubic_square_counts(max_n):
    """dict n -> rooted bicubic sphere maps with exactly n root-colour
    faces, all of them quadrilaterals, for 1 <= n <= max_n.

    The root colour is the one absent from the two sides of the root
    edge.  In a properly 3-coloured trivalent map each vertex meets one
    face of each colour, so n quadrilateral root-colour faces force
    exactly 4n vertices; enumerating up to 4*max_n vertices is complete.
    """
    counts = {n: 0 for n in range(1, max_n + 1)}
    for alpha, nv in enumerate_rooted_bicubic(4 * max_n):
        faces = bicubic_faces(alpha, nv)
        if nv - 3 * nv // 2 + len(faces) != 2:
            continue
        col = bicubic_face_colouring(faces, alpha, nv)
        if col is None or col == "ambiguous":
            continue
        face_of = {}
        for i, f in enumerate(faces):
            for d in f:
                face_of[d] = i
        root_colour = ({0, 1, 2}
                       - {col[face_of[0]], col[face_of[alpha[0]]]}).pop()
        k = [i for i in range(len(faces)) if col[i] == root_colour]
        if not (1 <= len(k) <= max_n):
            continue
        if all(len(faces[i]) == 4 for i in k):
            counts[len(k)] += 1
    return counts


def relabel_diagram(d, vperm, rotations):
    """Rebuild ``d`` with vertex ``v`` renamed ``vperm[v]`` and its slots
    rotated by ``rotations[v]``.  A pure renaming: the abstract embedded
    diagram is unchanged, so canonical codes must agree."""
    nv = d.nv
    assert sorted(vperm) == list(range(nv))

    def m(dart):
        v, s = divmod(dart, 4)
        if v in d.phantom:
            return 4 * vperm[v] + (s + rotations[v]) % 2
        return 4 * vperm[v] + (s + rotations[v]) % 4

    alpha = [-1] * (4 * nv)
    over = [-1] * nv
    for x in d.darts():
        alpha[m(x)] = m(d.alpha[x])
    for v in range(nv):
        if v not in d.phantom:
            over[vperm[v]] = (d.over[v] + rotations[v]) % 2
    phantom = [vperm[v] for v in d.phantom]
    # carry regions over as nesting instructions
    nests = []
    anchor = None
    rep = {}
    for f in d.regions[0]:
        if anchor is None:
            anchor = m(f)
        else:
            nests.append((m(f), anchor))
    for reg in d.regions[1:]:
        first = None
        for f in sorted(reg):
            if first is None:
                first = m(f)
            else:
                nests.append((m(f), first))
    ori = None
    if d.orientation is not None:
        ori = [m(x) for x in d.orientation]
    return assemble(alpha, over, phantom, anchor, nests, ori)


# ---------------------------------------------------------------------------
# triangulation oracles


def pentachoron_sphere():
    """S^3 as the boundary of a 4-simplex, wired by hand.

    Five tetrahedra on global vertex labels 0..4; tet a omits label a and
    is glued to tet b across the face omitting {a, b}, matching globals.
    Built directly from the combinatorics, not through any move engine.
    """
    from knotforge.pachner import make_complex

    verts = [tuple(g for g in range(5) if g != a) for a in range(5)]
    rows = []
    for a in range(5):
        va = verts[a]
        row = []
        for f in range(4):
            b = va[f]
            vb = verts[b]
            shared = [g for g in va if g != b]
            corr = tuple(vb.index(g) for g in shared)
            row.append((b, vb.index(a), corr))
        rows.append(tuple(row))
    return make_complex(3, rows)


def _quotient_classes(c):
    """Cells of the quotient complex per dimension, by raw union-find.

    Reads only ``c.gluings`` and ``c.dimension``; keeps its own parent
    table, so counts are independent of the library's class machinery.
    Returns a list indexed by cell dimension, each a list of cell classes,
    each class a sorted tuple of (top, vertex-tuple) representatives.
    """
    from itertools import combinations

    d = c.dimension
    parent = {}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x, y):
        rx, ry = find(x), find(y)
        if rx != ry:
            parent[rx] = ry

    for t in range(len(c.gluings)):
        for size in range(1, d + 2):
            for sub in combinations(range(d + 1), size):
                parent.setdefault((t, sub), (t, sub))
    for t, row in enumerate(c.gluings):
        for f, g in enumerate(row):
            if g is None:
                continue
            t2, f2, corr = g
            fv = [v for v in range(d + 1) if v != f]
            m = dict(zip(fv, corr))
            for size in range(1, d + 1):
                for sub in combinations(fv, size):
                    union((t, sub), (t2, tuple(sorted(m[v] for v in sub))))
    groups = {}
    for x in parent:
        groups.setdefault(find(x), []).append(x)
    out = [[] for _ in range(d + 1)]
    for members in groups.values():
        members.sort()
        out[len(members[0][1]) - 1].append(tuple(members))
    for level in out:
        level.sort()
    return out


def euler_by_quotient(c):
    """Alternating cell-count sum, from the independent union-find."""
    cells = _quotient_classes(c)
    return sum((-1) ** k * len(level) for k, level in enumerate(cells))


def gf2_betti(c):
    """Mod-2 Betti numbers via set-based column elimination.

    Boundary of a cell toggles each facet class once per facet, so a
    doubled facet (a loop edge, say) cancels.  Ranks are found with a
    pivot dictionary over frozensets: different bookkeeping from any
    bitmask elimination in the library.
    """
    cells = _quotient_classes(c)
    index = [{}, {}, {}, {}]
    for k, level in enumerate(cells):
        for i, cls in enumerate(level):
            for rep in cls:
                index[k][rep] = i

    def boundary_cols(k):
        cols = []
        for cls in cells[k]:
            t, sub = cls[0]
            col = set()
            for drop in range(len(sub)):
                face = sub[:drop] + sub[drop + 1:]
                j = index[k - 1][(t, face)]
                col.symmetric_difference_update({j})
            cols.append(frozenset(col))
        return cols

    def rank(cols):
        pivots = {}
        r = 0
        for col in cols:
            col = set(col)
            while col:
                p = max(col)
                if p in pivots:
                    col ^= pivots[p]
                else:
                    pivots[p] = col
                    r += 1
                    break
        return r

    d = c.dimension
    ranks = [0] * (d + 2)
    for k in range(1, d + 1):
        ranks[k] = rank(boundary_cols(k))
    betti = []
    for k in range(d + 1):
        betti.append(len(cells[k]) - ranks[k] - ranks[k + 1])
    return tuple(betti)


def check_correspondence(a, b, corr):
    """Verify an isomorphism certificate against the raw gluing tables.

    ``corr.tets[t]`` is (image tet, vertex map).  Checks bijectivity,
    gluing preservation including the vertex correspondences, boundary
    to boundary, and label classes mapping onto label classes, all with
    the independent quotient machinery above.
    """
    if a.dimension != b.dimension or len(a.gluings) != len(b.gluings):
        return False
    d = a.dimension
    images = [tb for tb, _ in corr.tets]
    if sorted(images) != list(range(len(b.gluings))):
        return False
    for t, (tb, rho) in enumerate(corr.tets):
        if sorted(rho) != list(range(d + 1)):
            return False
        rinv = {w: v for v, w in enumerate(rho)}
        for f in range(d + 1):
            g = a.gluings[t][f]
            gb = b.gluings[tb][rho[f]]
            if (g is None) != (gb is None):
                return False
            if g is None:
                continue
            t2, f2, cmap = g
            fv = [v for v in range(d + 1) if v != f]
            m = dict(zip(fv, cmap))
            tb2, rho2 = corr.tets[t2]
            fvb = [w for w in range(d + 1) if w != rho[f]]
            expect = tuple(rho2[m[rinv[w]]] for w in fvb)
            if gb != (tb2, rho2[f2], expect):
                return False
    acells = _quotient_classes(a)
    bcells = _quotient_classes(b)
    bindex = [{}, {}, {}, {}]
    for k, level in enumerate(bcells):
        for i, cls in enumerate(level):
            for rep in cls:
                bindex[k][rep] = i

    def image_class(ref):
        t, sub = ref
        tb, rho = corr.tets[t]
        return bindex[len(sub) - 1][(tb, tuple(sorted(rho[v] for v in sub)))]

    amap = dict(a.labels)
    bmap = dict(b.labels)
    if set(amap) != set(bmap):
        return False
    for name, refs in amap.items():
        got = {image_class(r) for r in refs}
        want = {bindex[len(sub) - 1][(t, sub)] for t, sub in bmap[name]}
        if got != want:
            return False
    return True


def arc_pieces_by_scan(tets, p, q):
    """Minimal straight-piece count of [p, q] across a tiling, by sweep.

    Collects every parameter where the segment crosses a face plane of
    any tet, then walks the subsegments left to right keeping the set of
    tets containing the current run; a run ends when the intersection
    empties.  Greedy on interval systems is optimal, and the bookkeeping
    (breakpoint sweep over containment sets) shares nothing with a
    per-tet clip-and-cover implementation.
    """
    from fractions import Fraction

    def sub(x, y):
        return tuple(xi - yi for xi, yi in zip(x, y))

    def cross(u, v):
        return (u[1] * v[2] - u[2] * v[1],
                u[2] * v[0] - u[0] * v[2],
                u[0] * v[1] - u[1] * v[0])

    def dot(u, v):
        return sum(ui * vi for ui, vi in zip(u, v))

    def halfspaces(tet):
        out = []
        for i in range(4):
            rest = [tet[j] for j in range(4) if j != i]
            n = cross(sub(rest[1], rest[0]), sub(rest[2], rest[0]))
            s = dot(n, sub(tet[i], rest[0]))
            if s < 0:
                n = tuple(-x for x in n)
            out.append((n, rest[0]))
        return out

    dirv = sub(q, p)
    cuts = {Fraction(0), Fraction(1)}
    planes = [hs for tet in tets for hs in halfspaces(tet)]
    for n, base in planes:
        denom = dot(n, dirv)
        if denom != 0:
            s = Fraction(dot(n, sub(base, p)), denom)
            if 0 < s < 1:
                cuts.add(s)
    grid = sorted(cuts)

    def containing(s):
        pt = tuple(pi + s * di for pi, di in zip(p, dirv))
        hit = set()
        for i, tet in enumerate(tets):
            if all(dot(n, sub(pt, base)) >= 0 for n, base in halfspaces(tet)):
                hit.add(i)
        return hit

    pieces = 0
    live = None
    for lo, hi in zip(grid, grid[1:]):
        mid = (lo + hi) / 2
        owners = containing(mid)
        if not owners:
            raise ValueError("segment leaves the tiling")
        if live is None or not (live & owners):
            pieces += 1
            live = owners
        else:
            live &= owners
    return max(pieces, 1)


def build_subdivided_surface(surface, weights):
    """The arc-subdivided surface, assembled directly from first principles.

    ``weights[t][e]`` counts arc crossings of edge e of triangle t (must
    agree across gluings).  The expected end state of the move sequence is
    written out cell by cell: each original edge carries a path of crossing
    points; a zero-weight edge keeps the two diagonal triangles joining the
    flanking centers; corners with a arcs get one corner triangle, 2(a-1)
    band triangles split by the outer-point-to-inner-point diagonal, and
    one center fan triangle over the outermost arc; each edge side keeps a
    single center triangle over its middle segment.  Gluing is by shared
    structural edge keys, never by replaying moves.
    """
    from knotforge.pachner import make_complex

    cells = _quotient_classes(surface)
    vid = {}
    for i, cls in enumerate(cells[0]):
        for t, sub in cls:
            vid[(t, sub[0])] = i
    eid = {}
    esides = {}
    for j, cls in enumerate(cells[1]):
        sides = []
        for t, sub in cls:
            f = 3 - sub[0] - sub[1]
            eid[(t, f)] = j
            sides.append((t, f))
        sides = sorted(set(sides))
        assert len(sides) == 2, "oracle needs a closed surface, no self-glued edges"
        esides[j] = sides

    ntri = len(surface.gluings)
    w = [tuple(weights[t]) for t in range(ntri)]
    ends = {}
    for j, ((t, f), _) in esides.items():
        u, v = [x for x in range(3) if x != f]
        cu, cv = vid[(t, u)], vid[(t, v)]
        assert cu != cv, "oracle does not handle loop edges"
        ends[j] = (min(cu, cv), max(cu, cv))
    m_of = {j: w[t][f] for j, ((t, f), _) in esides.items()}
    corner = {}
    for t in range(ntri):
        for v in range(3):
            u, x = [y for y in range(3) if y != v]
            a2 = w[t][u] + w[t][x] - w[t][v]
            assert a2 >= 0 and a2 % 2 == 0, "weights not normal"
            corner[(t, v)] = a2 // 2

    def vname(cls_id):
        return ("v", cls_id)

    def path_vert(j, i):
        m = m_of[j]
        if i == 0:
            return vname(ends[j][0])
        if i == m + 1:
            return vname(ends[j][1])
        return ("x", j, i)

    def from_corner(t, v, f, k):
        # index along edge-class f's path of the k-th point from corner v
        j = eid[(t, f)]
        if vid[(t, v)] == ends[j][0]:
            return j, k
        return j, m_of[j] + 1 - k

    tris = []

    def emit(a, b, c, kbc, kac, kab):
        tris.append(((a, b, c), (kbc, kac, kab)))

    def pathkey(j, i1, i2):
        return ("path", j, min(i1, i2))

    for j, ((t0, f0), (t1, f1)) in esides.items():
        m = m_of[j]
        c0, c1 = ("c", t0), ("c", t1)
        if m == 0:
            lo, hi = ends[j]
            for V in (vname(lo), vname(hi)):
                emit(c0, c1, V,
                     ("cone", t1, V), ("cone", t0, V), ("diag", j))
            continue
        for t, f in ((t0, f0), (t1, f1)):
            u = next(v for v in range(3)
                     if v != f and vid[(t, v)] == ends[j][0])
            near = corner[(t, u)]
            emit(path_vert(j, near), path_vert(j, near + 1), ("c", t),
                 ("cone", t, path_vert(j, near + 1)),
                 ("cone", t, path_vert(j, near)),
                 pathkey(j, near, near + 1))

    for t in range(ntri):
        for v in range(3):
            a = corner[(t, v)]
            if a == 0:
                continue
            u, x = [y for y in range(3) if y != v]
            j1f, j2f = x, u  # edge through (v,u) is face x, through (v,x) is face u
            V, c = vname(vid[(t, v)]), ("c", t)

            def pt(f, k):
                j, i = from_corner(t, v, f, k)
                return path_vert(j, i), (j, i)

            def pkey(f, k1, k2):
                j, i1 = from_corner(t, v, f, k1)
                _, i2 = from_corner(t, v, f, k2)
                return pathkey(j, i1, i2)

            p1, _ = pt(j1f, 1)
            q1, _ = pt(j2f, 1)
            emit(V, p1, q1,
                 ("arc", t, v, 1), pkey(j2f, 0, 1), pkey(j1f, 0, 1))
            for k in range(2, a + 1):
                pk, _ = pt(j1f, k)
                pk1, _ = pt(j1f, k - 1)
                qk, _ = pt(j2f, k)
                qk1, _ = pt(j2f, k - 1)
                emit(pk, qk1, pk1,
                     ("arc", t, v, k - 1), pkey(j1f, k, k - 1),
                     ("bdiag", t, v, k))
                emit(pk, qk, qk1,
                     pkey(j2f, k, k - 1), ("bdiag", t, v, k),
                     ("arc", t, v, k))
            pa, _ = pt(j1f, a)
            qa, _ = pt(j2f, a)
            emit(c, pa, qa,
                 ("arc", t, v, a), ("cone", t, qa), ("cone", t, pa))

    occur = {}
    for i, (verts, keys) in enumerate(tris):
        for f in range(3):
            occur.setdefault(keys[f], []).append((i, f))
    rows = [[None, None, None] for _ in tris]
    for key, occ in occur.items():
        assert len(occ) == 2, (key, occ)
        (i1, f1), (i2, f2) = occ
        v1 = [surfv for k, surfv in enumerate(tris[i1][0]) if k != f1]
        v2 = [surfv for k, surfv in enumerate(tris[i2][0]) if k != f2]
        assert sorted(map(repr, v1)) == sorted(map(repr, v2)), key
        locs2 = [k for k in range(3) if k != f2]
        corr12 = tuple(locs2[v2.index(nm)] for nm in v1)
        locs1 = [k for k in range(3) if k != f1]
        corr21 = tuple(locs1[v1.index(nm)] for nm in v2)
        rows[i1][f1] = (i2, f2, corr12)
        rows[i2][f2] = (i1, f1, corr21)
    return make_complex(2, [tuple(r) for r in rows])
