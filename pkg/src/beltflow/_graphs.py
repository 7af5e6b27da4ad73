"""Small digraph helpers shared by the flow modules.

Graphs are passed around as a plain dict mapping arc id -> (tail, head).
Vertex ids and arc ids are compared as strings everywhere, so iteration
in sorted order makes every traversal deterministic.
"""


def graph_vertices(arcs, extra=()):
    verts = set(extra)
    for tail, head in arcs.values():
        verts.add(tail)
        verts.add(head)
    return sorted(verts)


def out_map(arcs):
    """vertex -> sorted list of (arc_id, head)."""
    out = {}
    for aid in sorted(arcs):
        tail, head = arcs[aid]
        out.setdefault(tail, []).append((aid, head))
        out.setdefault(head, [])
    return out


def in_map(arcs):
    inc = {}
    for aid in sorted(arcs):
        tail, head = arcs[aid]
        inc.setdefault(head, []).append((aid, tail))
        inc.setdefault(tail, [])
    return inc


def reachable(arcs, sources, forward=True):
    """Set of vertices reachable from `sources` along arcs (or against them)."""
    adj = {}
    for tail, head in arcs.values():
        if not forward:
            tail, head = head, tail
        adj.setdefault(tail, set()).add(head)
    seen = set()
    stack = [v for v in sources]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj.get(v, ()))
    return seen


def strong_components(arcs, vertices=None):
    """Tarjan SCCs, iterative.

    Returns a list of vertex sets.  The traversal visits vertices and arcs in
    sorted order, so the output is deterministic; components come out in
    reverse topological order of the condensation (sinks first).
    """
    if vertices is None:
        vertices = graph_vertices(arcs)
    out = out_map(arcs)
    for v in vertices:
        out.setdefault(v, [])
    index = {}
    low = {}
    on_stack = set()
    stack = []
    comps = []
    counter = [0]

    for root in sorted(vertices):
        if root in index:
            continue
        # explicit DFS stack: (vertex, iterator position)
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack.add(v)
            recurse = False
            succs = out[v]
            while i < len(succs):
                w = succs[i][1]
                i += 1
                if w not in index:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                elif w in on_stack:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = set()
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.add(w)
                    if w == v:
                        break
                comps.append(comp)
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[v])
        # loop continues with next root
    return comps


def sink_components(arcs, vertices=None):
    """SCCs with no arc leaving them, sorted by their smallest vertex id."""
    comps = strong_components(arcs, vertices)
    comp_of = {}
    for idx, comp in enumerate(comps):
        for v in comp:
            comp_of[v] = idx
    leaving = [False] * len(comps)
    for tail, head in arcs.values():
        if comp_of[tail] != comp_of[head]:
            leaving[comp_of[tail]] = True
    sinks = [comp for idx, comp in enumerate(comps) if not leaving[idx]]
    return sorted(sinks, key=lambda comp: min(comp))
