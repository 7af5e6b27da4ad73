"""Steady-states of splitter networks: rules, residual graphs, exact solver.

A state of a network assigns every arc an exact throughput t(e) in [0, 1]
and one of two regimes: *fluid* (upstream is the bottleneck; items would
flow off faster if more arrived) or *saturated* (downstream is the
bottleneck; the belt is full and backed up).  The steady-states are the
pairs (t, F) — F the set of fluid arcs — satisfying:

  R1  0 <= t(e) <= 1;
  R2  every arc is fluid or saturated, never both;
  R3  an arc leaving an input i never exceeds c(i), and carries exactly
      c(i) while fluid;
  R4  an arc entering an output o never exceeds c(o), and carries exactly
      c(o) while saturated;
  R5  splitters conserve flow;
  R6  a saturated arc into a splitter carries at least as much as the
      sibling arc next to it (a blocked lane is the last to starve);
  R7  a fluid arc out of a splitter carries at least as much as its
      sibling (a free lane gets its fair share first);
  R8  around a splitter, a saturated arc feeding a fluid arc forces one
      of the two to run at belt capacity 1 — the strong variant R8S
      forces the downstream (fluid) one.

`check_rules` tests all of these; `solve` finds a steady-state satisfying
R8S by walking through *sub-steady-states* (R3 weakened to an upper bound,
so inputs may be fed gradually) and improving them with three primitive
operations: saturating an arc that the rules pin from above, and pushing
exact flow along a coupled circulation of the residual graph — `Augment`
when the circulation moves terminal flow, `Move` when it only rearranges
an internal loop.  Progress is measured by the potential

    psi(t, F) = #{saturated arcs at 0} - #{fluid arcs below capacity},

which never decreases and strictly increases at every recorded trace step.

Throughout, "lowest arc id" / "lowest vertex" means lexicographic string
order, which keeps every run deterministic.  `uniform_solve` implements
the restricted all-or-nothing capacity regime where the operation *order*
is deliberately shuffled by a seed: terminal throughputs provably do not
depend on it, and `meet`/`join` combine any two of its intermediate
states.
"""

from dataclasses import dataclass
from fractions import Fraction
from random import Random

from ._graphs import sink_components, strong_components
from .circulation import coupled_partition, stationary_circulation
from .network import INPUT, OUTPUT, SPLITTER, NetworkError, validate
from .rational import ONE, ZERO, format_rational, parse_rational

#: Residual-graph vertex standing for all inputs and outputs at once.  The
#: empty string cannot collide with a node id and sorts below every one.
Z_VERTEX = ""

FLUID = "fluid"
SATURATED = "saturated"

_MODES = ("R8", "R8S", "sub", "pre")


@dataclass(frozen=True)
class SteadyState:
    """Throughput map plus the set of fluid arcs (everything else saturated).

    `t` maps arc id -> Fraction; `fluid` is a frozenset of arc ids.  The
    class stores any state, rule-abiding or not; `check_rules` judges it.
    """

    t: dict
    fluid: frozenset

    def regime(self, arc):
        return FLUID if arc in self.fluid else SATURATED


def zero_state(net):
    """The all-fluid, all-zero state every solver run starts from."""
    return SteadyState({aid: ZERO for aid in net.arcs}, frozenset(net.arcs))


def serialize_steady_state(state):
    """Text form, one `arc NAME t=p/q state=...` line per arc, sorted by id."""
    lines = []
    for aid in sorted(state.t):
        lines.append(
            "arc %s t=%s state=%s"
            % (aid, format_rational(state.t[aid]), state.regime(aid))
        )
    return "\n".join(lines) + "\n"


def parse_steady_state(text):
    """Inverse of :func:`serialize_steady_state`; '#' comments allowed.

    Raises ValueError with a line number on malformed input.
    """
    t = {}
    fluid = set()
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        if tokens[0] != "arc" or len(tokens) != 4:
            raise ValueError(
                "line %d: expected 'arc NAME t=p/q state=fluid|saturated'" % ln
            )
        name = tokens[1]
        if name in t:
            raise ValueError("line %d: duplicate arc %s" % (ln, name))
        fields = {}
        for token in tokens[2:]:
            key, eq, value = token.partition("=")
            if not eq or key in fields:
                raise ValueError("line %d: bad field %r" % (ln, token))
            fields[key] = value
        if sorted(fields) != ["state", "t"]:
            raise ValueError("line %d: need exactly the fields t= and state=" % ln)
        try:
            t[name] = parse_rational(fields["t"])
        except ValueError as exc:
            raise ValueError("line %d: %s" % (ln, exc))
        if fields["state"] not in (FLUID, SATURATED):
            raise ValueError("line %d: state must be fluid or saturated" % ln)
        if fields["state"] == FLUID:
            fluid.add(name)
    return SteadyState(t, frozenset(fluid))


def _check_dimensions(net, state):
    missing = sorted(set(net.arcs) - set(state.t))
    extra = sorted(set(state.t) - set(net.arcs))
    if missing or extra:
        raise ValueError(
            "state does not fit the network (missing %s, extra %s)"
            % (missing, extra)
        )
    stray = sorted(set(state.fluid) - set(state.t))
    if stray:
        raise ValueError("fluid set mentions unknown arcs %s" % stray)


def psi(net, state):
    """Progress potential: #saturated-at-0 minus #fluid-below-capacity."""
    up = sum(
        1 for aid in net.arcs if aid not in state.fluid and state.t[aid] == ZERO
    )
    down = sum(
        1 for aid in state.fluid if state.t[aid] < net.arc_capacity(aid)
    )
    return up - down


def check_rules(net, state, mode="R8S"):
    """All rule violations of `state`, as strings starting with the rule name.

    Modes: "R8" and "R8S" test the full steady-state rules with the weak or
    strong maximization rule; "sub" drops the R3 equality clause (fluid
    input arcs may run below the input's capacity), as the solver's
    intermediate states do; "pre" instead relaxes R5 to allow a splitter to
    send less than it receives.  Dimension mismatches raise ValueError —
    they are malformed states, not rule violations.
    """
    if mode not in _MODES:
        raise ValueError("unknown mode %r (want one of %s)" % (mode, _MODES))
    _check_dimensions(net, state)
    out = []
    t = state.t
    for aid in sorted(net.arcs):
        if not ZERO <= t[aid] <= ONE:
            out.append(
                "R1: arc %s carries %s outside [0, 1]"
                % (aid, format_rational(t[aid]))
            )
    for node in sorted(net.nodes):
        kind = net.kind(node)
        if kind == INPUT:
            cap = net.caps[node]
            for aid in net.out_arcs(node):
                if t[aid] > cap:
                    out.append(
                        "R3: arc %s carries %s above the capacity %s of input %s"
                        % (aid, format_rational(t[aid]), format_rational(cap), node)
                    )
                elif mode != "sub" and aid in state.fluid and t[aid] != cap:
                    out.append(
                        "R3: fluid arc %s carries %s, not the capacity %s of input %s"
                        % (aid, format_rational(t[aid]), format_rational(cap), node)
                    )
        elif kind == OUTPUT:
            cap = net.caps[node]
            for aid in net.in_arcs(node):
                if t[aid] > cap:
                    out.append(
                        "R4: arc %s carries %s above the capacity %s of output %s"
                        % (aid, format_rational(t[aid]), format_rational(cap), node)
                    )
                elif aid not in state.fluid and t[aid] != cap:
                    out.append(
                        "R4: saturated arc %s carries %s, not the capacity %s of output %s"
                        % (aid, format_rational(t[aid]), format_rational(cap), node)
                    )
        else:
            ins = net.in_arcs(node)
            outs = net.out_arcs(node)
            inflow = sum((t[aid] for aid in ins), ZERO)
            outflow = sum((t[aid] for aid in outs), ZERO)
            if mode == "pre":
                if outflow > inflow:
                    out.append(
                        "R5: splitter %s sends %s, more than the %s it receives"
                        % (node, format_rational(outflow), format_rational(inflow))
                    )
            elif inflow != outflow:
                out.append(
                    "R5: splitter %s receives %s but sends %s"
                    % (node, format_rational(inflow), format_rational(outflow))
                )
            for e1 in ins:
                if e1 in state.fluid:
                    continue
                for e2 in ins:
                    if e2 != e1 and t[e1] < t[e2]:
                        out.append(
                            "R6: saturated arc %s into %s carries %s < %s on arc %s"
                            % (e1, node, format_rational(t[e1]),
                               format_rational(t[e2]), e2)
                        )
            for e1 in outs:
                if e1 not in state.fluid:
                    continue
                for e2 in outs:
                    if e2 != e1 and t[e1] < t[e2]:
                        out.append(
                            "R7: fluid arc %s out of %s carries %s < %s on arc %s"
                            % (e1, node, format_rational(t[e1]),
                               format_rational(t[e2]), e2)
                        )
            for uv in ins:
                if uv in state.fluid:
                    continue
                for vw in outs:
                    if vw not in state.fluid or t[vw] == ONE:
                        continue
                    if mode == "R8":
                        if t[uv] != ONE:
                            out.append(
                                "R8: saturated arc %s meets fluid arc %s at %s "
                                "with neither at 1" % (uv, vw, node)
                            )
                    else:
                        out.append(
                            "R8S: fluid arc %s carries %s < 1 after saturated "
                            "arc %s at %s"
                            % (vw, format_rational(t[vw]), uv, node)
                        )
    return out


# --------------------------------------------------------------------------
# Residual graph


@dataclass(frozen=True)
class ResidualGraph:
    """Where the current state still has room to shift flow.

    Inputs and outputs are identified into the single vertex `z`; the other
    vertices are the splitters.  A fluid arc below its capacity appears in
    its own direction, a saturated arc above zero appears reversed —
    except saturated arcs into outputs, which are pinned by R4 and never
    appear.  Residual arcs keep the network arc ids (the map back to the
    network is the identity); `forward` lists the ids kept in network
    direction.  `partition` groups arcs that must move in lockstep: a fluid
    sibling pair out of a splitter rises together, a saturated sibling pair
    into a splitter falls together (their reverses again share a tail).
    Every class is contained in the out-arcs of a single vertex.
    """

    z: str
    arcs: dict
    forward: frozenset
    partition: tuple

    def out_arcs(self, vertex):
        return sorted(a for a, (tail, _head) in self.arcs.items() if tail == vertex)


def build_residual(net, state, mode="standard"):
    """Residual graph of `state`; mode "uniform" applies the all-caps-1 rules.

    In uniform mode the forward images of all fluid input arcs form one
    class, so every circulation feeds the inputs evenly.
    """
    if mode not in ("standard", "uniform"):
        raise ValueError("unknown mode %r (want standard or uniform)" % (mode,))
    _check_dimensions(net, state)
    arcs = {}
    forward = set()
    for aid, arc in net.arcs.items():
        tail = Z_VERTEX if net.kind(arc.tail) == INPUT else arc.tail
        head = Z_VERTEX if net.kind(arc.head) == OUTPUT else arc.head
        if aid in state.fluid:
            if state.t[aid] < net.arc_capacity(aid):
                arcs[aid] = (tail, head)
                forward.add(aid)
        elif state.t[aid] > ZERO and net.kind(arc.head) != OUTPUT:
            arcs[aid] = (head, tail)
    pairs = []
    for node in net.splitters():
        outs = net.out_arcs(node)
        if len(outs) == 2 and all(a in state.fluid and a in arcs for a in outs):
            pairs.append(frozenset(outs))
        ins = net.in_arcs(node)
        if len(ins) == 2 and all(a not in state.fluid and a in arcs for a in ins):
            pairs.append(frozenset(ins))
    if mode == "uniform":
        z_class = frozenset(
            aid for aid in forward if arcs[aid][0] == Z_VERTEX
        )
        if len(z_class) > 1:
            pairs.append(z_class)
    partition = tuple(coupled_partition(arcs, pairs))
    return ResidualGraph(z=Z_VERTEX, arcs=arcs, forward=frozenset(forward),
                         partition=partition)


# --------------------------------------------------------------------------
# Primitive operations


@dataclass(frozen=True)
class Saturate:
    """Trace record: `arc` moved from fluid to saturated."""

    arc: str


@dataclass(frozen=True)
class Augment:
    """Trace record: `amount` times `circulation` pushed, touching terminals."""

    circulation: dict
    amount: Fraction


@dataclass(frozen=True)
class Move:
    """Trace record: like Augment, but rearranging an internal loop only."""

    circulation: dict
    amount: Fraction


@dataclass(frozen=True)
class TraceStep:
    """One or more primitive operations ending on a strict psi increase."""

    ops: tuple
    psi: int


@dataclass(frozen=True)
class SolverTrace:
    """The recorded run: starting psi and the steps taken."""

    start: int
    steps: tuple

    @property
    def operations(self):
        return [op for step in self.steps for op in step.ops]


def _saturate(state, aid):
    return SteadyState(dict(state.t), state.fluid - {aid})


def _filter_candidates(net, state, live):
    """Fluid arcs whose saturation the tightness rules license, sorted.

    A fluid arc is upper-tight if a saturated sibling enters the same
    splitter at equal throughput, or if it feeds an output exactly at the
    output's capacity.  Saturating one is allowed when the residual graph
    still contains an arc it pins: the tight arc itself or a fluid sibling
    sharing its tail (held below its fair share), or the equal saturated
    partner (held above).  `live` is the residual arc-id set.
    """
    found = []
    for aid in sorted(state.fluid):
        arc = net.arcs[aid]
        head_kind = net.kind(arc.head)
        tight = False
        licensed = False
        if head_kind == OUTPUT and state.t[aid] == net.caps[arc.head]:
            tight = True
        if head_kind == SPLITTER:
            for other in net.in_arcs(arc.head):
                if other == aid or other in state.fluid:
                    continue
                if state.t[other] == state.t[aid]:
                    tight = True
                    if other in live:
                        licensed = True
        if not tight:
            continue
        group = [aid]
        if net.kind(arc.tail) == SPLITTER:
            group = [a for a in net.out_arcs(arc.tail) if a in state.fluid]
        if any(a in live for a in group):
            licensed = True
        if licensed:
            found.append(aid)
    return found


def _weak_component(arcs, root):
    adj = {root: set()}
    for tail, head in arcs.values():
        adj.setdefault(tail, set()).add(head)
        adj.setdefault(head, set()).add(tail)
    seen = set()
    stack = [root]
    while stack:
        v = stack.pop()
        if v in seen:
            continue
        seen.add(v)
        stack.extend(adj.get(v, ()))
    return seen


def _sink_saturations(net, state, residual):
    """Per residual sink splitter near z: the arcs whose saturation unblocks it.

    A sink (a splitter with no leaving residual arc) in z's connected
    component cannot pass on what its fluid in-arcs could still bring, so
    one of the highest-throughput fluid in-arcs gets saturated.  If the
    sink still has a fluid out-arc pinned at an output capacity below 1,
    that arc must go first — otherwise the freshly saturated in-arc would
    demand belt-capacity downstream (R8S) that the output cap forbids.
    Returns [(vertex, [arc, ...]), ...] sorted by vertex.
    """
    component = _weak_component(residual.arcs, residual.z)
    tails = {tail for tail, _head in residual.arcs.values()}
    actions = []
    for v in sorted(component):
        if v == residual.z or v in tails:
            continue
        hazards = [
            aid for aid in net.out_arcs(v)
            if aid in state.fluid
            and net.kind(net.arcs[aid].head) == OUTPUT
            and state.t[aid] == net.caps[net.arcs[aid].head] < ONE
        ]
        if hazards:
            actions.append((v, hazards))
            continue
        ins = [aid for aid in net.in_arcs(v) if aid in state.fluid]
        if not ins:  # pragma: no cover - a sink always keeps a fluid in-arc
            raise AssertionError("residual sink %s has no fluid in-arc" % v)
        best = max(state.t[aid] for aid in ins)
        actions.append((v, [aid for aid in ins if state.t[aid] == best]))
    return actions


def saturate_nonloose(net, state):
    """One rule-forced saturation, or None if the state has none.

    Covers both tightness cases: a licensed upper-tight arc (lowest id
    first), else the strongest fluid in-arc of the lowest residual sink.
    Returns (arc, new state) or None; the new state is again a
    sub-steady-state.
    """
    residual = build_residual(net, state)
    candidates = _filter_candidates(net, state, set(residual.arcs))
    if candidates:
        aid = candidates[0]
        return aid, _saturate(state, aid)
    sinks = _sink_saturations(net, state, residual)
    if sinks:
        aid = sinks[0][1][0]
        return aid, _saturate(state, aid)
    return None


def _step_bound(net, state, supp):
    """Largest lam keeping t +/- lam*supp a sub-steady-state (may be 0)."""
    bounds = []
    for aid, x in supp.items():
        if aid in state.fluid:
            bounds.append((net.arc_capacity(aid) - state.t[aid]) / x)
        else:
            bounds.append(state.t[aid] / x)
    for node in net.splitters():
        ins = net.in_arcs(node)
        if len(ins) == 2:
            a, b = ins
            fa, fb = a in state.fluid, b in state.fluid
            if fa != fb:
                sat, fl = (b, a) if fa else (a, b)
                rate = supp.get(sat, ZERO) + supp.get(fl, ZERO)
                if rate > ZERO:
                    bounds.append((state.t[sat] - state.t[fl]) / rate)
            elif not fa and state.t[a] == state.t[b]:
                if supp.get(a, ZERO) != supp.get(b, ZERO):
                    raise ValueError(
                        "circulation must fall evenly on the saturated pair "
                        "into %s" % node
                    )
        outs = net.out_arcs(node)
        if len(outs) == 2:
            a, b = outs
            if a in state.fluid and b in state.fluid and state.t[a] == state.t[b]:
                if supp.get(a, ZERO) != supp.get(b, ZERO):
                    raise ValueError(
                        "circulation must rise evenly on the fluid pair "
                        "out of %s" % node
                    )
    return min(bounds)


def _shift(state, supp, lam):
    t = dict(state.t)
    for aid, x in supp.items():
        if aid in state.fluid:
            t[aid] = t[aid] + lam * x
        else:
            t[aid] = t[aid] - lam * x
    return SteadyState(t, state.fluid)


def augment(net, state, circulation):
    """Push as much of `circulation` as the rules allow; returns (state, lam).

    `circulation` maps residual arc ids to nonnegative rates (fluid arcs
    rise, saturated arcs fall).  The rate map must be supported on current
    residual arcs and move coupled pairs evenly; lam is the exact largest
    multiple that stays sub-steady.  A zero circulation, or one blocked at
    lam = 0 by a tight incoming pair, raises ValueError.
    """
    supp = {aid: x for aid, x in circulation.items() if x != ZERO}
    if not supp:
        raise ValueError("circulation is zero")
    negative = sorted(aid for aid, x in supp.items() if x < ZERO)
    if negative:
        raise ValueError("negative rate on arcs %s" % negative)
    residual = build_residual(net, state)
    outside = sorted(set(supp) - set(residual.arcs))
    if outside:
        raise ValueError("arcs %s are not in the residual graph" % outside)
    lam = _step_bound(net, state, supp)
    if lam <= ZERO:
        raise ValueError(
            "circulation is blocked by a tight incoming pair; saturate first"
        )
    return _shift(state, supp, lam), lam


# --------------------------------------------------------------------------
# The solver


class _Recorder:
    """Collects primitive operations into strictly psi-increasing steps."""

    def __init__(self, net, state):
        self.net = net
        self.psi = psi(net, state)
        self.start = self.psi
        self.pending = []
        self.steps = []

    def add(self, op, state):
        self.pending.append(op)
        now = psi(self.net, state)
        if now > self.psi:
            self.steps.append(TraceStep(tuple(self.pending), now))
            self.pending = []
            self.psi = now

    def finish(self):
        if self.pending:  # pragma: no cover - runs always close on an increase
            raise AssertionError("trace ended in the middle of a step")
        return SolverTrace(self.start, tuple(self.steps))


def _require_solvable(net):
    bad = validate(net)
    if bad:
        raise NetworkError("; ".join(bad))
    direct = sorted(
        arc.name for arc in net.arcs.values()
        if net.kind(arc.tail) == INPUT and net.kind(arc.head) == OUTPUT
    )
    if direct:
        raise NetworkError(
            "arcs %s connect inputs directly to outputs; route them through "
            "a splitter" % direct
        )


def _restricted_pairs(partition, inner):
    arcs = set(inner)
    return [cls for cls in partition if len(cls) > 1 and cls <= arcs]


def _advance(net, state, residual):
    """One circulation push: the z-arc sweep, else an internal move."""
    pairs = residual.partition
    for cand in residual.out_arcs(residual.z):
        arcs = {
            aid: ends for aid, ends in residual.arcs.items()
            if ends[0] != residual.z or aid == cand
        }
        comp = next(c for c in strong_components(arcs) if residual.z in c)
        if any(ends[0] in comp and ends[1] not in comp for ends in arcs.values()):
            continue
        inner = {aid: ends for aid, ends in arcs.items() if ends[0] in comp}
        x = stationary_circulation(inner, _restricted_pairs(pairs, inner))
        new_state, lam = augment(net, state, x)
        return Augment(x, lam), new_state
    # No single z-arc closes into a sink component: push an internal loop.
    component = _weak_component(residual.arcs, residual.z)
    main = {
        aid: ends for aid, ends in residual.arcs.items() if ends[0] in component
    }
    sinks = sink_components(main)
    for comp in sinks:
        if residual.z in comp:
            continue
        inner = {aid: ends for aid, ends in main.items() if ends[0] in comp}
        if not inner:  # pragma: no cover - bare sinks are saturated earlier
            continue
        x = stationary_circulation(inner, _restricted_pairs(pairs, inner))
        new_state, lam = augment(net, state, x)
        return Move(x, lam), new_state
    # Last resort: z sits in a sink component but only with several of its
    # leaving arcs at once; circulate on all of them.
    for comp in sinks:
        if residual.z not in comp:
            continue
        inner = {aid: ends for aid, ends in main.items() if ends[0] in comp}
        if inner:
            x = stationary_circulation(inner, _restricted_pairs(pairs, inner))
            new_state, lam = augment(net, state, x)
            return Augment(x, lam), new_state
    raise AssertionError("no applicable operation; the solver is stuck")


def solve(net):
    """Steady-state of a valid normalized network, with the run's trace.

    Starts all-fluid at zero and repairs: licensed tight-arc saturations
    first, then residual-sink saturations, then the lowest feasible
    circulation through the terminals (or an internal move).  Ends when no
    input arc has residual headroom; the result passes check_rules(R8S).
    """
    _require_solvable(net)
    state = zero_state(net)
    recorder = _Recorder(net, state)
    budget = 8 * len(net.arcs) + 32
    while True:
        residual = build_residual(net, state)
        if all(ends[0] != residual.z for ends in residual.arcs.values()):
            break
        if budget == 0:  # pragma: no cover - termination is a theorem
            raise AssertionError("operation budget exhausted; solver stuck")
        budget -= 1
        candidates = _filter_candidates(net, state, set(residual.arcs))
        if candidates:
            aid = candidates[0]
            state = _saturate(state, aid)
            recorder.add(Saturate(aid), state)
            continue
        sinks = _sink_saturations(net, state, residual)
        if sinks:
            aid = sinks[0][1][0]
            state = _saturate(state, aid)
            recorder.add(Saturate(aid), state)
            continue
        op, state = _advance(net, state, residual)
        recorder.add(op, state)
    trace = recorder.finish()
    leftovers = check_rules(net, state, "R8S")
    if leftovers:  # pragma: no cover - would be an internal bug
        raise AssertionError("solver returned an invalid state: %s" % leftovers[0])
    return state, trace


# --------------------------------------------------------------------------
# Uniform (all-or-nothing capacities) variant


def _uniform_ops(net, state, residual):
    """All currently applicable operations, as (key, op, next state), sorted."""
    live = set(residual.arcs)
    ops = []
    chosen = set()
    for aid in _filter_candidates(net, state, live):
        chosen.add(aid)
        ops.append((("saturate", aid), Saturate(aid), _saturate(state, aid)))
    for _v, arcs in _sink_saturations(net, state, residual):
        for aid in arcs:
            if aid not in chosen:
                chosen.add(aid)
                ops.append(
                    (("saturate", aid), Saturate(aid), _saturate(state, aid))
                )
    for comp in sink_components(residual.arcs):
        inner = {
            aid: ends for aid, ends in residual.arcs.items() if ends[0] in comp
        }
        if not inner:
            continue
        x = stationary_circulation(
            inner, _restricted_pairs(residual.partition, inner)
        )
        try:
            lam = _step_bound(net, state, x)
        except ValueError:
            continue
        if lam <= ZERO:
            continue
        new_state = _shift(state, x, lam)
        if residual.z in comp:
            ops.append((("augment",), Augment(x, lam), new_state))
        else:
            ops.append((("move", min(comp)), Move(x, lam), new_state))
    ops.sort(key=lambda entry: entry[0])
    return ops


def uniform_solve(net, seed=0):
    """Like solve, but under all-or-nothing capacities and a shuffled run.

    Requires every terminal capacity to be 0 or 1 (0 tolerates the padding
    terminals normalization adds).  Each round enumerates every applicable
    operation — saturations, the terminal augmentation that feeds all open
    inputs evenly, internal moves — and lets `seed` choose among them.
    Terminal throughputs of the result do not depend on the seed.
    """
    _require_solvable(net)
    off = sorted(
        node for node, cap in net.caps.items() if cap not in (ZERO, ONE)
    )
    if off:
        raise ValueError(
            "uniform mode needs every capacity to be 0 or 1; offending: %s"
            % off
        )
    rng = Random(seed)
    state = zero_state(net)
    recorder = _Recorder(net, state)
    budget = 10 * len(net.arcs) + 40
    while True:
        residual = build_residual(net, state, "uniform")
        if all(ends[0] != residual.z for ends in residual.arcs.values()):
            break
        if budget == 0:  # pragma: no cover - termination is a theorem
            raise AssertionError("operation budget exhausted; solver stuck")
        budget -= 1
        ops = _uniform_ops(net, state, residual)
        if not ops:  # pragma: no cover - some operation always applies
            raise AssertionError("no applicable operation; solver stuck")
        _key, op, state = rng.choice(ops)
        recorder.add(op, state)
    trace = recorder.finish()
    leftovers = check_rules(net, state, "R8S")
    if leftovers:  # pragma: no cover - would be an internal bug
        raise AssertionError("solver returned an invalid state: %s" % leftovers[0])
    return state, trace


# --------------------------------------------------------------------------
# Transformations between steady-states


def to_strong_maximization(net, state):
    """Grow the fluid set of an R8 steady-state until it satisfies R8S.

    Wherever a saturated arc (necessarily full, by R8) precedes a fluid arc
    below 1, the saturated arc turns fluid; a saturated sibling entering
    the same splitter turns with it.  Throughputs stay untouched.
    """
    _check_dimensions(net, state)
    fluid = set(state.fluid)
    changed = True
    while changed:
        changed = False
        for node in sorted(net.splitters()):
            ins = net.in_arcs(node)
            outs = net.out_arcs(node)
            for uv in ins:
                if uv in fluid:
                    continue
                if not any(
                    vw in fluid and state.t[vw] < ONE for vw in outs
                ):
                    continue
                fluid.add(uv)
                for other in ins:
                    if other != uv and other not in fluid:
                        fluid.add(other)
                changed = True
    return SteadyState(dict(state.t), frozenset(fluid))


def reverse_state(net, state):
    """The mirror state carried by reverse(net): regimes swap, t stays.

    A backed-up belt of the network is a freely flowing belt of the
    reversed network and vice versa.  The result satisfies the R8 rules on
    the reversed network whenever `state` does here (R8S may be lost; see
    to_strong_maximization).
    """
    _check_dimensions(net, state)
    flipped = frozenset(aid for aid in state.t if aid not in state.fluid)
    return SteadyState(dict(state.t), flipped)


def _same_arcs(state1, state2):
    if set(state1.t) != set(state2.t):
        raise ValueError("states describe different arc sets")


def meet(state1, state2):
    """Greatest common predecessor of two uniform sub-steady-states.

    Fluid wins: the meet is fluid wherever either state is, carries the
    smaller value where both are fluid, the larger where both are
    saturated, and the fluid side's value where they disagree.
    """
    _same_arcs(state1, state2)
    t = {}
    for aid in state1.t:
        in1 = aid in state1.fluid
        in2 = aid in state2.fluid
        if in1 and in2:
            t[aid] = min(state1.t[aid], state2.t[aid])
        elif in1:
            t[aid] = state1.t[aid]
        elif in2:
            t[aid] = state2.t[aid]
        else:
            t[aid] = max(state1.t[aid], state2.t[aid])
    return SteadyState(t, state1.fluid | state2.fluid)


def join(state1, state2):
    """Least common successor of two uniform sub-steady-states.

    Saturation wins: the join is fluid only where both states are, carries
    the larger value there, the smaller where both are saturated, and the
    saturated side's value where they disagree.
    """
    _same_arcs(state1, state2)
    t = {}
    for aid in state1.t:
        in1 = aid in state1.fluid
        in2 = aid in state2.fluid
        if in1 and in2:
            t[aid] = max(state1.t[aid], state2.t[aid])
        elif in1:
            t[aid] = state2.t[aid]
        elif in2:
            t[aid] = state1.t[aid]
        else:
            t[aid] = min(state1.t[aid], state2.t[aid])
    return SteadyState(t, state1.fluid & state2.fluid)
