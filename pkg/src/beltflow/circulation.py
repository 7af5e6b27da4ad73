"""Equality-coupled circulations on directed multigraphs.

Given a digraph and a partition of its arcs into *coupled classes* — each
class contained in the out-arcs of a single vertex — we look for nonnegative
circulations that are constant on every class.  The workhorse is the
stationary distribution of the uniform random walk: dividing each vertex's
stationary mass by its out-degree yields a circulation that is uniform on
each out-incidence, hence constant on every coupled class of any partition
refining the out-incidencies.

Graphs are plain dicts ``arc_id -> (tail, head)`` (see _graphs.py); all
values are exact rationals.
"""

from collections import deque
from fractions import Fraction

from ._graphs import graph_vertices, in_map, reachable, sink_components
from ._linalg import solve_square

ZERO = Fraction(0)


def coupled_partition(arcs, classes=None):
    """Normalize and validate a coupled-arc partition.

    `classes` is an iterable of arc-id collections; arcs not mentioned are
    treated as singleton classes.  Returns a list of frozensets sorted by
    smallest member.  Raises ValueError if a class mixes tails, repeats an
    arc, or mentions an unknown arc.
    """
    seen = set()
    result = []
    if classes is not None:
        for cls in classes:
            cls = frozenset(cls)
            if not cls:
                continue
            tails = set()
            for aid in cls:
                if aid not in arcs:
                    raise ValueError("unknown arc in coupled class: %r" % (aid,))
                if aid in seen:
                    raise ValueError("arc %r appears in two coupled classes" % (aid,))
                seen.add(aid)
                tails.add(arcs[aid][0])
            if len(tails) > 1:
                raise ValueError(
                    "coupled class %s spans several tails %s"
                    % (sorted(cls), sorted(tails))
                )
            result.append(cls)
    for aid in arcs:
        if aid not in seen:
            result.append(frozenset([aid]))
    result.sort(key=min)
    return result


def _class_index(classes):
    return {aid: cls for cls in classes for aid in cls}


def verify_circulation(arcs, partition, values, positive_on=None):
    """Independent checker: conservation, nonnegativity, class-constancy.

    Returns a list of human-readable violations (empty list = valid).
    """
    violations = []
    classes = coupled_partition(arcs, partition)
    balance = {v: ZERO for v in graph_vertices(arcs)}
    for aid in arcs:
        x = values.get(aid)
        if x is None:
            violations.append("arc %s has no value" % (aid,))
            continue
        if x < 0:
            violations.append("arc %s has negative value %s" % (aid, x))
        tail, head = arcs[aid]
        balance[tail] -= x
        balance[head] += x
    for v, b in balance.items():
        if b != 0:
            violations.append("conservation fails at %s (net %s)" % (v, b))
    for cls in classes:
        vals = {values.get(aid) for aid in cls}
        if len(vals) > 1:
            violations.append(
                "coupled class %s carries unequal values %s"
                % (sorted(cls), sorted(vals, key=lambda q: (q is None, q)))
            )
    if positive_on is not None:
        if not values.get(positive_on, ZERO) > 0:
            violations.append("arc %s is not positive" % (positive_on,))
    return violations


def verify_certificate(arcs, partition, parts, special):
    """Check an infeasibility certificate for the distinguished-arc problem.

    `parts` is the ordered partition S_0, ..., S_k of a vertex set avoiding
    the tail of `special`, with the head of `special` in S_0.  The defining
    condition: every arc leaving some S_i has a coupled arc (possibly
    itself) from S_i into an S_j with j > i.  Returns a list of violations.
    """
    violations = []
    classes = coupled_partition(arcs, partition)
    class_of = _class_index(classes)
    t_vert, s_vert = arcs[special]
    where = {}
    for i, part in enumerate(parts):
        if not part:
            violations.append("part %d is empty" % (i,))
        for v in part:
            if v in where:
                violations.append("vertex %s appears in parts %d and %d" % (v, where[v], i))
            where[v] = i
    if where.get(s_vert) != 0:
        violations.append("head of %s is not in the first part" % (special,))
    if t_vert in where:
        violations.append("tail of %s lies inside the certificate" % (special,))
    for aid, (u, v) in sorted(arcs.items()):
        i = where.get(u)
        if i is None or where.get(v) == i:
            continue
        # u's part loses this arc; some coupled sibling must go strictly up
        ok = False
        for sib in class_of[aid]:
            j = where.get(arcs[sib][1])
            if j is not None and j > i:
                ok = True
                break
        if not ok:
            violations.append(
                "arc %s leaves part %d with no coupled arc into a later part" % (aid, i)
            )
    return violations


def _out_degrees(arcs):
    deg = {}
    for tail, _head in arcs.values():
        deg[tail] = deg.get(tail, 0) + 1
    return deg


def stationary_distribution(arcs):
    """Exact stationary distribution of the uniform walk on a digraph.

    The graph must be strongly connected with every out-degree >= 1 (a
    single vertex with a self-loop is the smallest legal input).  Returns
    a dict vertex -> Fraction with sum 1, all entries positive, satisfying
    sum over arcs uv of pi_u/outdeg(u) = pi_v exactly.
    """
    vertices = graph_vertices(arcs)
    if not vertices:
        raise ValueError("empty graph has no stationary distribution")
    everything = set(vertices)
    if reachable(arcs, vertices[:1], forward=True) != everything or \
            reachable(arcs, vertices[:1], forward=False) != everything:
        raise ValueError("graph is not strongly connected")
    deg = _out_degrees(arcs)
    if any(deg.get(v, 0) == 0 for v in vertices):
        raise ValueError("vertex without outgoing arcs")
    n = len(vertices)
    col = {v: i for i, v in enumerate(vertices)}
    # stationarity rows for all but the last vertex (they sum to zero, so one
    # is redundant), plus the normalization row sum(pi) = 1
    matrix = [[ZERO] * n for _ in range(n)]
    for tail, head in arcs.values():
        r = col[head]
        if r < n - 1:
            matrix[r][col[tail]] += Fraction(1, deg[tail])
    for v in vertices[:-1]:
        matrix[col[v]][col[v]] -= 1
    matrix[n - 1] = [Fraction(1)] * n
    rhs = [ZERO] * (n - 1) + [Fraction(1)]
    pi = solve_square(matrix, rhs)
    out = dict(zip(vertices, pi))
    if any(p <= 0 for p in pi):  # pragma: no cover - guarded by the SC check
        raise ValueError("walk is not irreducible")
    return out


def stationary_circulation(arcs, partition=None):
    """Nonzero coupled circulation on a strongly connected graph.

    Each arc carries pi_tail / outdeg(tail): uniform on every out-incidence,
    hence constant on each class of any partition refining out-incidencies.
    """
    coupled_partition(arcs, partition)  # validation only
    pi = stationary_distribution(arcs)
    deg = _out_degrees(arcs)
    return {aid: pi[tail] / deg[tail] for aid, (tail, _head) in arcs.items()}


def circulation_or_sink(arcs, partition=None):
    """Either a nonzero coupled circulation or a vertex with no out-arcs.

    Returns ("circulation", values) with support inside one sink strongly
    connected component (zero elsewhere), or ("sink", vertex).  Among sink
    components the one with the smallest vertex id is taken.
    """
    if not arcs:
        raise ValueError("graph has no arcs")
    coupled_partition(arcs, partition)  # validation only
    comp = sink_components(arcs)[0]
    if len(comp) == 1:
        v = next(iter(comp))
        if all(tail != v for tail, _head in arcs.values()):
            return ("sink", v)
        # self-loop: fall through, the loop itself circulates
    sub = {aid: th for aid, th in arcs.items() if th[0] in comp and th[1] in comp}
    inner = stationary_circulation(sub)
    values = {aid: inner.get(aid, ZERO) for aid in arcs}
    return ("circulation", values)


def solve_ceq(arcs, special, partition=None):
    """Coupled circulation positive on `special`, or an obstruction.

    The distinguished arc must be single (not coupled to another arc); with
    a coupled distinguished arc the obstruction characterization below is
    simply false, so we refuse such instances.  Returns either
    ("circulation", values) with values[special] > 0, or
    ("certificate", parts) where parts = [S_0, ..., S_k] is an ordered
    family of disjoint vertex sets, the head of `special` in S_0, its tail
    outside all parts, and every arc leaving an S_i has a coupled arc from
    S_i into a strictly later part.  Certificates are re-verified before
    being returned.

    Vertices that cannot reach the tail of `special` can carry no flow, so
    they are deleted together with every arc coupled to an arc touching
    them; reachability is simply recomputed after each deletion round.  The
    batches of vertices dying per round, in reverse order of death, are
    exactly the certificate parts once the head's own batch dies.
    """
    if special not in arcs:
        raise ValueError("unknown distinguished arc %r" % (special,))
    classes = coupled_partition(arcs, partition)
    class_of = _class_index(classes)
    if len(class_of[special]) != 1:
        raise ValueError("distinguished arc must not be coupled to another arc")
    t_vert, s_vert = arcs[special]

    alive = dict(arcs)
    dead = set()
    batches = []
    vertices = graph_vertices(arcs)
    while True:
        reach_root = reachable(alive, [t_vert], forward=False)
        newly = {v for v in vertices if v not in dead and v not in reach_root}
        if not newly:
            break
        batches.append(newly)
        if s_vert in newly:
            parts = list(reversed(batches))
            bad = verify_certificate(arcs, classes, parts, special)
            if bad:  # pragma: no cover - would be an internal bug
                raise AssertionError("built an invalid certificate: %s" % bad)
            return ("certificate", parts)
        doomed = set()
        for aid, (u, v) in alive.items():
            if u in newly or v in newly:
                doomed |= class_of[aid]
        for aid in doomed:
            alive.pop(aid, None)
        dead |= newly

    # every remaining vertex reaches the tail; keep only what its head reaches
    reach_head = reachable(alive, [s_vert], forward=True)
    sub = {aid: (u, v) for aid, (u, v) in alive.items()
           if u in reach_head and v in reach_head}
    values = _positive_on_special(sub, special, class_of)
    return ("circulation", {aid: values.get(aid, ZERO) for aid in arcs})


def _positive_on_special(arcs, special, class_of):
    """Strongly connected case, via the in-arborescence restriction.

    Pick for every vertex one path-to-tail arc (a maximal in-arborescence
    rooted at the tail of `special`), keep only the coupled classes meeting
    the arborescence or the special arc, and circulate on the strongly
    connected component of the result containing both endpoints.  Inside
    that component each vertex's surviving out-arcs form exactly one
    coupled class, so the uniform-walk circulation is constant on classes
    and positive everywhere there — including on `special`.
    """
    t_vert, s_vert = arcs[special]
    inm = in_map(arcs)
    tree = {}
    seen = {t_vert}
    queue = deque([t_vert])
    while queue:
        u = queue.popleft()
        for aid, tail in inm.get(u, ()):
            if tail not in seen:
                seen.add(tail)
                tree[tail] = aid
                queue.append(tail)
    marked = set(tree.values())
    marked.add(special)
    kept = set()
    for aid in marked:
        kept |= class_of[aid]
    restricted = {aid: arcs[aid] for aid in kept if aid in arcs}
    for comp in sink_components(restricted):
        if s_vert in comp:
            break
    else:  # pragma: no cover - the tree guarantees a component with s
        raise AssertionError("no component containing the special head")
    assert t_vert in comp, "special arc endpoints ended up in different components"
    sub = {aid: (u, v) for aid, (u, v) in restricted.items()
           if u in comp and v in comp}
    return stationary_circulation(sub)
