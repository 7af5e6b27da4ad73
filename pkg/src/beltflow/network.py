"""Splitter-network data model, validation, normalization, reversal, file format.

A splitter network is a directed multigraph (loops and parallel arcs are
fine) whose nodes are inputs (out-degree 1, in-degree 0), outputs (in-degree
1, out-degree 0) and splitters (in-degree 2 and out-degree 2 after
normalization).  Inputs and outputs carry a capacity in [0, 1]; arcs are
identified by an explicit string id, never by their endpoint pair (parallel
arcs and loops would make that ambiguous).

Arc ids are ordered lexicographically everywhere a "lowest arc id" or
"ascending arc id" tie-break is mentioned in this package; node ids likewise.

Text format (UTF-8, line based, '#' starts a comment):

    input NAME [cap=R]
    output NAME [cap=R]
    splitter NAME [inprio=ARC] [outprio=ARC]
    arc NAME TAIL -> HEAD [len=N]

R is 'p/q' or an integer (default 1); N is a positive integer (default 1).
The inprio/outprio attributes are consumed by the priority module and
ignored everywhere else.  Ids starting with '~' are reserved for the dummy
terminals added by :func:`normalize`; serializers can elide them on request.
"""

from dataclasses import dataclass
from fractions import Fraction

from .rational import ONE, ZERO, format_rational, parse_rational

INPUT = "input"
OUTPUT = "output"
SPLITTER = "splitter"

DUMMY_PREFIX = "~"


class NetworkError(Exception):
    """Malformed network, or malformed network file (message carries line numbers)."""


@dataclass(frozen=True)
class Arc:
    name: str
    tail: str
    head: str


class SplitterNetwork:
    """Nodes, arcs, terminal capacities, belt lengths, optional priorities.

    Built once via the add_* methods (or :func:`parse`) and treated as
    immutable afterwards; every transformation here returns a new network.
    """

    def __init__(self):
        self.nodes = {}    # name -> INPUT | OUTPUT | SPLITTER, insertion ordered
        self.caps = {}     # terminal name -> Fraction in [0, 1]
        self.arcs = {}     # arc name -> Arc, insertion ordered
        self.lengths = {}  # arc name -> int >= 1 (discrete module only)
        self.in_prio = {}  # splitter name -> arc name (preferred incoming)
        self.out_prio = {}  # splitter name -> arc name (preferred outgoing)

    # -- construction -----------------------------------------------------

    def add_input(self, name, cap=ONE):
        self._add_node(name, INPUT, cap)

    def add_output(self, name, cap=ONE):
        self._add_node(name, OUTPUT, cap)

    def add_splitter(self, name):
        self._add_node(name, SPLITTER, None)

    def _add_node(self, name, kind, cap):
        if name in self.nodes:
            raise NetworkError("duplicate node id %r" % (name,))
        self.nodes[name] = kind
        if kind != SPLITTER:
            self.caps[name] = Fraction(cap)

    def add_arc(self, name, tail, head, length=1):
        if name in self.arcs:
            raise NetworkError("duplicate arc id %r" % (name,))
        for endpoint in (tail, head):
            if endpoint not in self.nodes:
                raise NetworkError("arc %r references unknown node %r" % (name, endpoint))
        self.arcs[name] = Arc(name, tail, head)
        self.lengths[name] = int(length)

    def set_in_prio(self, splitter, arc_name):
        self.in_prio[splitter] = arc_name

    def set_out_prio(self, splitter, arc_name):
        self.out_prio[splitter] = arc_name

    # -- queries ----------------------------------------------------------

    def kind(self, name):
        return self.nodes[name]

    def inputs(self):
        return [n for n, k in self.nodes.items() if k == INPUT]

    def outputs(self):
        return [n for n, k in self.nodes.items() if k == OUTPUT]

    def splitters(self):
        return [n for n, k in self.nodes.items() if k == SPLITTER]

    def sorted_arcs(self):
        return sorted(self.arcs)

    def in_arcs(self, node):
        return sorted(a.name for a in self.arcs.values() if a.head == node)

    def out_arcs(self, node):
        return sorted(a.name for a in self.arcs.values() if a.tail == node)

    def arc_capacity(self, arc_name):
        """c(e): capacity of the tail input and/or head output, else 1.

        An arc joining an input directly to an output is bounded by both, so
        it gets the smaller of the two capacities.
        """
        arc = self.arcs[arc_name]
        cap = ONE
        if self.nodes[arc.tail] == INPUT:
            cap = min(cap, self.caps[arc.tail])
        if self.nodes[arc.head] == OUTPUT:
            cap = min(cap, self.caps[arc.head])
        return cap

    def with_caps(self, caps):
        """Copy of the network with some terminal capacities replaced."""
        net = self.copy()
        for name, cap in caps.items():
            if name not in net.caps:
                raise NetworkError("%r is not a terminal" % (name,))
            net.caps[name] = Fraction(cap)
        return net

    def copy(self):
        net = SplitterNetwork()
        net.nodes = dict(self.nodes)
        net.caps = dict(self.caps)
        net.arcs = dict(self.arcs)
        net.lengths = dict(self.lengths)
        net.in_prio = dict(self.in_prio)
        net.out_prio = dict(self.out_prio)
        return net

    def __eq__(self, other):
        if not isinstance(other, SplitterNetwork):
            return NotImplemented
        return (self.nodes == other.nodes and self.caps == other.caps
                and self.arcs == other.arcs and self.lengths == other.lengths
                and self.in_prio == other.in_prio and self.out_prio == other.out_prio)

    def __repr__(self):
        return "<SplitterNetwork %d nodes %d arcs>" % (len(self.nodes), len(self.arcs))


def validate(net):
    """List of invariant violations (empty iff the network is well formed).

    Violations are strings naming the offending node or arc and the rule:
    degree conditions per node kind, capacities within [0, 1], lengths >= 1,
    priority references incident to their splitter.
    """
    out = []
    in_deg = {n: 0 for n in net.nodes}
    out_deg = {n: 0 for n in net.nodes}
    for arc in net.arcs.values():
        out_deg[arc.tail] += 1
        in_deg[arc.head] += 1
    for name, kind in net.nodes.items():
        di, do = in_deg[name], out_deg[name]
        if kind == INPUT:
            if do != 1 or di != 0:
                out.append("input %s: degree in=%d out=%d (must be in=0 out=1)" % (name, di, do))
        elif kind == OUTPUT:
            if di != 1 or do != 0:
                out.append("output %s: degree in=%d out=%d (must be in=1 out=0)" % (name, di, do))
        else:
            if di != 2 or do != 2:
                out.append("splitter %s: degree in=%d out=%d (must be in=2 out=2)" % (name, di, do))
    for name, cap in net.caps.items():
        if not (ZERO <= cap <= ONE):
            out.append("%s %s: capacity %s outside [0, 1]" % (net.nodes[name], name, format_rational(cap)))
    for arc_name, length in net.lengths.items():
        if length < 1:
            out.append("arc %s: length %d (must be >= 1)" % (arc_name, length))
    for prio_map, side in ((net.in_prio, "in"), (net.out_prio, "out")):
        for splitter, arc_name in prio_map.items():
            if net.nodes.get(splitter) != SPLITTER:
                out.append("%sprio on %s: not a splitter" % (side, splitter))
                continue
            arcs = net.in_arcs(splitter) if side == "in" else net.out_arcs(splitter)
            if arc_name not in arcs:
                out.append("splitter %s: %sprio arc %s is not an %s-arc of it"
                           % (splitter, side, arc_name, side))
    return out


def normalize(net):
    """Pad every degree-1 splitter side with a dummy terminal of capacity 0.

    A splitter with a single incoming arc gains a dummy input '~i_NAME' and a
    connecting arc '~e_in_NAME' (capacity 0, so the arc is pinned at
    throughput 0 and stays fluid); a single outgoing arc is padded with a
    dummy output and an arc that any solver immediately saturates at 0.
    Existing ids are untouched.  A splitter side with degree 0 or more than 2
    cannot be repaired and raises NetworkError.  Idempotent on valid networks.
    """
    in_deg = {n: 0 for n in net.nodes}
    out_deg = {n: 0 for n in net.nodes}
    for arc in net.arcs.values():
        out_deg[arc.tail] += 1
        in_deg[arc.head] += 1
    result = net.copy()
    for name, kind in net.nodes.items():
        if kind != SPLITTER:
            continue
        di, do = in_deg[name], out_deg[name]
        if di == 0 or di > 2 or do == 0 or do > 2:
            raise NetworkError("splitter %s has degree in=%d out=%d; cannot normalize" % (name, di, do))
        if di == 1:
            dummy = DUMMY_PREFIX + "i_" + name
            result.add_input(dummy, ZERO)
            result.add_arc(DUMMY_PREFIX + "e_in_" + name, dummy, name)
        if do == 1:
            dummy = DUMMY_PREFIX + "o_" + name
            result.add_output(dummy, ZERO)
            result.add_arc(DUMMY_PREFIX + "e_out_" + name, name, dummy)
    return result


def reverse(net):
    """The reverse network: arcs flipped, inputs and outputs exchanged.

    Capacities, arc ids and lengths are carried over; the in/out priority
    maps swap roles (the preferred incoming arc of a splitter becomes its
    preferred outgoing arc in the reverse network).  An involution.
    """
    result = SplitterNetwork()
    for name, kind in net.nodes.items():
        if kind == INPUT:
            result.add_output(name, net.caps[name])
        elif kind == OUTPUT:
            result.add_input(name, net.caps[name])
        else:
            result.add_splitter(name)
    for arc in net.arcs.values():
        result.add_arc(arc.name, arc.head, arc.tail, net.lengths[arc.name])
    result.in_prio = dict(net.out_prio)
    result.out_prio = dict(net.in_prio)
    return result


def parse(text):
    """Parse the line-based network format; errors carry line numbers."""
    node_lines = []
    arc_lines = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] in (INPUT, OUTPUT, SPLITTER):
            node_lines.append((ln, tokens))
        elif tokens[0] == "arc":
            arc_lines.append((ln, tokens))
        else:
            raise NetworkError("line %d: unknown directive %r" % (ln, tokens[0]))

    net = SplitterNetwork()
    prio_requests = []  # (line, splitter, side, arc name)
    for ln, tokens in node_lines:
        kind = tokens[0]
        if len(tokens) < 2:
            raise NetworkError("line %d: %s needs a name" % (ln, kind))
        name = tokens[1]
        opts = _parse_options(ln, tokens[2:])
        try:
            if kind == SPLITTER:
                _expect_keys(ln, opts, ("inprio", "outprio"))
                net.add_splitter(name)
                for side in ("in", "out"):
                    if side + "prio" in opts:
                        prio_requests.append((ln, name, side, opts[side + "prio"]))
            else:
                _expect_keys(ln, opts, ("cap",))
                cap = _parse_cap(ln, opts.get("cap", "1"))
                if kind == INPUT:
                    net.add_input(name, cap)
                else:
                    net.add_output(name, cap)
        except NetworkError as exc:
            raise NetworkError("line %d: %s" % (ln, exc)) from None

    for ln, tokens in arc_lines:
        if len(tokens) < 5 or tokens[3] != "->":
            raise NetworkError("line %d: expected 'arc NAME TAIL -> HEAD [len=N]'" % (ln,))
        name, tail, head = tokens[1], tokens[2], tokens[4]
        opts = _parse_options(ln, tokens[5:])
        _expect_keys(ln, opts, ("len",))
        length = opts.get("len", "1")
        try:
            length = int(length)
        except ValueError:
            raise NetworkError("line %d: len=%r is not an integer" % (ln, length)) from None
        if length < 1:
            raise NetworkError("line %d: len must be >= 1" % (ln,))
        try:
            net.add_arc(name, tail, head, length)
        except NetworkError as exc:
            raise NetworkError("line %d: %s" % (ln, exc)) from None

    for ln, splitter, side, arc_name in prio_requests:
        if arc_name not in net.arcs:
            raise NetworkError("line %d: %sprio references unknown arc %r" % (ln, side, arc_name))
        if side == "in":
            net.set_in_prio(splitter, arc_name)
        else:
            net.set_out_prio(splitter, arc_name)
    return net


def _parse_options(ln, tokens):
    opts = {}
    for token in tokens:
        if "=" not in token:
            raise NetworkError("line %d: expected key=value, got %r" % (ln, token))
        key, value = token.split("=", 1)
        if key in opts:
            raise NetworkError("line %d: duplicate option %r" % (ln, key))
        opts[key] = value
    return opts


def _expect_keys(ln, opts, allowed):
    for key in opts:
        if key not in allowed:
            raise NetworkError("line %d: unknown option %r" % (ln, key))


def _parse_cap(ln, text):
    try:
        cap = parse_rational(text)
    except ValueError as exc:
        raise NetworkError("line %d: %s" % (ln, exc)) from None
    if not (ZERO <= cap <= ONE):
        raise NetworkError("line %d: capacity %s outside [0, 1]" % (ln, text))
    return cap


def serialize(net, elide_dummies=False):
    """Render a network back to the text format (parse . serialize == id)."""
    lines = []
    skip = lambda name: elide_dummies and name.startswith(DUMMY_PREFIX)
    for name, kind in net.nodes.items():
        if skip(name):
            continue
        if kind == SPLITTER:
            line = "splitter %s" % (name,)
            if name in net.in_prio:
                line += " inprio=%s" % (net.in_prio[name],)
            if name in net.out_prio:
                line += " outprio=%s" % (net.out_prio[name],)
        else:
            line = "%s %s" % (kind, name)
            if net.caps[name] != ONE:
                line += " cap=%s" % (format_rational(net.caps[name]),)
        lines.append(line)
    for arc in net.arcs.values():
        if skip(arc.name) or skip(arc.tail) or skip(arc.head):
            continue
        line = "arc %s %s -> %s" % (arc.name, arc.tail, arc.head)
        if net.lengths[arc.name] != 1:
            line += " len=%d" % (net.lengths[arc.name],)
        lines.append(line)
    return "\n".join(lines) + "\n"
