"""Balancer constructions, capacity gadgets, property verifiers, size bounds.

A *balancer* splits whatever arrives at its inputs evenly over its outputs:
with every output capacity at 1, all output arcs carry the same throughput.
A network is *throughput-unlimited* when its total throughput always reaches
min{c(I), c(O)}, the best any network could do, and *universally balancing*
when on top of both properties the inputs are drained evenly too: there are
thresholds a and b with every input arc at min{c(i), a} and every output arc
at min{c(o), b}.

Four generator families produce these networks:

- `gen_simple(k)`: the classic 2^k-lane balancer, k levels of 2^(k-1)
  splitters wired by growing bit flips.  A balancer, but not
  throughput-unlimited.
- `gen_benes(k)`: the butterfly followed by its mirror image, 2k-1 levels.
  Balancer and throughput-unlimited; its own reverse up to relabeling.
- `gen_half_universal(k)` / `gen_universal(k)`: a Benes core of order k+1
  with per-lane loopback belts from the last level back to the first; the
  loopbacks absorb back-pressure so balancing survives arbitrary output
  capacities at half throughput, and running two such blocks in parallel
  recovers the lost half.  The universal network is universally balancing.

Two gadget families simulate a rational arc capacity p/q with O(log q)
splitters between one input and one output:

- `gen_capacity(p, q)`: splits a full belt into 2^k equal shares with a
  labeled arborescence (`gen_arborescence`), then merges shares back along
  three collector chains: p shares to the output, q-p shares back to the
  bottleneck's tail, 2^k-q shares back to its head.  Ratios below 1/2 are
  reached by halving wrappers around the gadget for 2p/q.
- `gen_capacity_binary(p, q)`: reads the eventually periodic binary
  expansion of p/q and splits lane by lane, sending each bit's share toward
  the output (1-bits) or back into circulation (0-bits); the period is
  closed into a loop.

The verifiers cannot check a for-all-capacities property exhaustively, so
they run a finite `capacity_suite` (all ones, all zeros, unit vectors, the
full 0/1 hypercube up to dimension 8, seeded random dyadic vectors) through
the exact solver.  A pass is evidence; a failure is a definitive
counterexample, and the report says which.

`counts(k)` gives the closed-form splitter counts of the three balancer
families, and `lower_bound` the matching impossibility bound: distributing
flow evenly to n outputs costs, per input-output pair, a factor
`knuth_yao_factor(1/n)` — the expected number of fair coin tosses an
optimal discrete sampler charges to an outcome of probability 1/n —
giving |S| >= 1/4 |I| |O| sum_k k 2^-k bit_k(1/|O|)  (1/2 for balancers
whose all-ones steady-state keeps every arc fluid).
"""

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from math import gcd
from random import Random

from .network import DUMMY_PREFIX, SplitterNetwork, normalize, validate
from .rational import ONE, ZERO, binary_expansion, format_rational
from .steady_state import solve

# --------------------------------------------------------------------------
# Balancer families


def _benes_pairs(order):
    """Lane wiring of the Benes network of `order`: (level, lane, partner).

    Level l of 2^(order-1) lanes feeds level l+1 straight and across a bit
    flip whose weight first shrinks (butterfly) then grows again (mirror):
    the partner lane is j XOR 2^max{order-2-l, l-order+1}.
    """
    width = 2 ** (order - 1)
    for level in range(2 * order - 2):
        power = max(order - 2 - level, level - order + 1)
        for lane in range(width):
            yield level, lane, lane ^ (1 << power)


def _terminal_arcs(net, k, last_level):
    """Attach 2^k inputs and outputs, two per end-level splitter."""
    for j in range(2 ** k):
        net.add_input("i%d" % j)
    for j in range(2 ** k):
        net.add_output("o%d" % j)
    for j in range(2 ** k):
        net.add_arc("in%d" % j, "i%d" % j, "s0_%d" % (j // 2))
        net.add_arc("out%d" % j, "s%d_%d" % (last_level, j // 2), "o%d" % j)


def gen_simple(k):
    """The 2^k-lane simple balancer: k levels, bit-flip weight 2^level.

    k * 2^(k-1) splitters.  Every output arc carries the average of the
    input capacities, but total throughput can fall short of
    min{c(I), c(O)} (see `verify_throughput_unlimited`).
    """
    if k < 1:
        raise ValueError("balancer order must be >= 1, got %r" % (k,))
    net = SplitterNetwork()
    width = 2 ** (k - 1)
    for level in range(k):
        for j in range(width):
            net.add_splitter("s%d_%d" % (level, j))
    _terminal_arcs(net, k, k - 1)
    for level in range(k - 1):
        for j in range(width):
            net.add_arc("e%d_%da" % (level, j),
                        "s%d_%d" % (level, j), "s%d_%d" % (level + 1, j))
            net.add_arc("e%d_%db" % (level, j),
                        "s%d_%d" % (level, j),
                        "s%d_%d" % (level + 1, j ^ (1 << level)))
    return net


def gen_benes(k):
    """The Benes network of order k: 2k-1 levels of 2^(k-1) splitters.

    Throughput-unlimited on top of balancing; the last k levels are exactly
    the simple balancer of order k, and reversing the network yields an
    isomorphic copy (flip levels, keep lanes).
    """
    if k < 1:
        raise ValueError("balancer order must be >= 1, got %r" % (k,))
    net = SplitterNetwork()
    width = 2 ** (k - 1)
    for level in range(2 * k - 1):
        for j in range(width):
            net.add_splitter("s%d_%d" % (level, j))
    _terminal_arcs(net, k, 2 * k - 2)
    for level, j, j2 in _benes_pairs(k):
        net.add_arc("e%d_%da" % (level, j),
                    "s%d_%d" % (level, j), "s%d_%d" % (level + 1, j))
        net.add_arc("e%d_%db" % (level, j),
                    "s%d_%d" % (level, j), "s%d_%d" % (level + 1, j2))
    return net


def _half_core(net, prefix, k):
    """Splitter grid and internal arcs of one half-universal block.

    A Benes grid of order k+1 (2k+1 levels of 2^k lanes, terminals are the
    caller's business) plus a loopback arc per lane from the last level back
    to the first.  All ids get `prefix` prepended so two blocks can share a
    network.
    """
    width = 2 ** k
    last = 2 * k
    for level in range(last + 1):
        for j in range(width):
            net.add_splitter("%ss%d_%d" % (prefix, level, j))
    for level, j, j2 in _benes_pairs(k + 1):
        net.add_arc("%se%d_%da" % (prefix, level, j),
                    "%ss%d_%d" % (prefix, level, j),
                    "%ss%d_%d" % (prefix, level + 1, j))
        net.add_arc("%se%d_%db" % (prefix, level, j),
                    "%ss%d_%d" % (prefix, level, j),
                    "%ss%d_%d" % (prefix, level + 1, j2))
    for j in range(width):
        net.add_arc("%sf%d" % (prefix, j),
                    "%ss%d_%d" % (prefix, last, j), "%ss%d_%d" % (prefix, 0, j))


def gen_half_universal(k):
    """Benes core of order k+1 with a loopback belt per lane.

    2^k inputs and outputs on (2k+1) * 2^k splitters.  While some output can
    still accept flow, excess pushed back from the others rides a loopback
    to the first level and is re-balanced instead of jamming the core; the
    price is that half the internal throughput is recirculation, so the
    universal behavior only holds for capacities up to 1/2.  Its own reverse
    up to relabeling.  k = 0 is a single splitter whose loopback is a
    self-loop.
    """
    if k < 0:
        raise ValueError("balancer order must be >= 0, got %r" % (k,))
    net = SplitterNetwork()
    _half_core(net, "", k)
    last = 2 * k
    for j in range(2 ** k):
        net.add_input("i%d" % j)
    for j in range(2 ** k):
        net.add_output("o%d" % j)
    for j in range(2 ** k):
        net.add_arc("in%d" % j, "i%d" % j, "s0_%d" % j)
        net.add_arc("out%d" % j, "s%d_%d" % (last, j), "o%d" % j)
    return net


def gen_universal(k):
    """Two half-universal blocks in parallel behind per-lane tees.

    Lane j's input tee `u%d` halves the arriving flow over the two blocks,
    and the join `x%d` merges their lane-j ends into output j; each block
    then sees capacities at most 1/2, where it balances universally, and
    the two halves add back up to full throughput.  (k+1) * 2^(k+2)
    splitters (the tees' free sides are padded with capacity-0 dummy
    terminals).  Universally balancing, and its own reverse up to
    relabeling.
    """
    if k < 0:
        raise ValueError("balancer order must be >= 0, got %r" % (k,))
    net = SplitterNetwork()
    for j in range(2 ** k):
        net.add_input("i%d" % j)
    for j in range(2 ** k):
        net.add_output("o%d" % j)
    for j in range(2 ** k):
        net.add_splitter("u%d" % j)
        net.add_splitter("x%d" % j)
    _half_core(net, "A_", k)
    _half_core(net, "B_", k)
    last = 2 * k
    for j in range(2 ** k):
        net.add_arc("in%d" % j, "i%d" % j, "u%d" % j)
        net.add_arc("out%d" % j, "x%d" % j, "o%d" % j)
        for prefix in ("A_", "B_"):
            net.add_arc("fan%s%d" % (prefix[0], j),
                        "u%d" % j, "%ss0_%d" % (prefix, j))
            net.add_arc("col%s%d" % (prefix[0], j),
                        "%ss%d_%d" % (prefix, last, j), "x%d" % j)
    net = normalize(net)
    bad = validate(net)
    if bad:  # pragma: no cover - would be a construction bug
        raise AssertionError("generated network is invalid: %s" % bad[0])
    return net


# --------------------------------------------------------------------------
# Labeled arborescences


@dataclass(frozen=True)
class LabeledArborescence:
    """Binary out-arborescence of depth `k` with integer-labeled leaves.

    `weights` lists one nonnegative integer per label, summing to 2^k (a
    slack label is appended by `gen_arborescence` when the given weights
    fall short).  The shape realizes the binary expansions of the weights:
    at depth d there are exactly bit-of-weight-2^(k-d)(weights[i-1]) leaves
    with label i, which forces the inner-node count at depth d to
    2^d - sum(weights[i] >> (k-d)).  Node ids are "n{depth}_{position}";
    `children` maps each inner node to its ordered pair, `labels` each leaf
    to its 1-based label, `coords` every node to (depth, position).
    """

    k: int
    weights: tuple
    root: str
    children: dict
    labels: dict
    coords: dict

    def leaves(self, label):
        """Leaves carrying `label`, ordered by increasing depth."""
        found = [n for n, lab in self.labels.items() if lab == label]
        return sorted(found, key=lambda n: self.coords[n])

    def depth_counts(self, label):
        """Number of leaves with `label` at each depth 0..k."""
        counts = [0] * (self.k + 1)
        for node in self.leaves(label):
            counts[self.coords[node][0]] += 1
        return counts


def gen_arborescence(weights, k):
    """The labeled arborescence for `weights` at depth `k`, deterministically.

    Works depth by depth: the children of the previous inner nodes are
    numbered left to right, leaves claim the leftmost slots in ascending
    label order (each label takes bit-of-weight-2^(k-d) of its weight many),
    and the remaining slots stay inner.  Weights must be nonnegative and sum
    to at most 2^k; a shortfall is absorbed by one extra slack label.
    """
    ws = [int(p) for p in weights]
    if k < 0:
        raise ValueError("depth must be >= 0, got %r" % (k,))
    if not ws or any(p < 0 for p in ws):
        raise ValueError("weights must be a nonempty list of nonnegative "
                         "integers, got %r" % (weights,))
    total = sum(ws)
    if total > 2 ** k:
        raise ValueError("weights sum to %d > 2^%d" % (total, k))
    if total < 2 ** k:
        ws.append(2 ** k - total)

    children = {}
    labels = {}
    coords = {"n0_0": (0, 0)}
    slots = ["n0_0"]
    for d in range(k + 1):
        filled = 0
        for lab, p in enumerate(ws, 1):
            for _ in range((p >> (k - d)) & 1):
                labels[slots[filled]] = lab
                filled += 1
        inner = slots[filled:]
        slots = []
        for rank, node in enumerate(inner):
            left = "n%d_%d" % (d + 1, 2 * rank)
            right = "n%d_%d" % (d + 1, 2 * rank + 1)
            children[node] = (left, right)
            coords[left] = (d + 1, 2 * rank)
            coords[right] = (d + 1, 2 * rank + 1)
            slots.extend((left, right))
    if slots:  # pragma: no cover - impossible once the weights sum to 2^k
        raise AssertionError("depth-%d slots left unfilled" % (k + 1,))
    return LabeledArborescence(k=k, weights=tuple(ws), root="n0_0",
                               children=children, labels=labels,
                               coords=coords)


# --------------------------------------------------------------------------
# Capacity gadgets


def _check_ratio(p, q):
    if p < 1 or q <= p:
        raise ValueError("need 0 < p < q, got %d/%d" % (p, q))
    if gcd(p, q) != 1:
        raise ValueError("%d/%d is not in lowest terms" % (p, q))


def _capacity_tree(p, q):
    """The one-splitter-wide gadget for 1/2 <= p/q < 1, unnormalized.

    A mixer splitter feeds the root of the arborescence for
    (p, q-p, 2^k-q) over the bottleneck arc "feed"; the tree splits the
    belt into 2^k shares of t(feed)/2^k each.  Collector chains then run
    through each label's leaves in depth order, so label 1 accumulates p
    shares (sent to the output), label 2 accumulates q-p shares (returned
    to the mixer), and label 3 the 2^k-q slack shares (returned to the
    root).  At equilibrium "feed" fills to 1 and the input is pinched to
    exactly p/q.
    """
    k = max(1, (q - 1).bit_length())
    tree = gen_arborescence((p, q - p, 2 ** k - q), k)
    net = SplitterNetwork()
    net.add_input("i")
    net.add_output("o")
    net.add_splitter("mix")
    for node in sorted(tree.coords):
        net.add_splitter(node)
    net.add_arc("in", "i", "mix")
    net.add_arc("feed", "mix", tree.root)
    for parent in sorted(tree.children):
        for child in tree.children[parent]:
            net.add_arc("t_" + child, parent, child)
    ends = {}
    for label in (1, 2, 3):
        path = tree.leaves(label)
        for hop, (u, v) in enumerate(zip(path, path[1:])):
            net.add_arc("p%d_%d" % (label, hop), u, v)
        ends[label] = path[-1] if path else None
    net.add_arc("out", ends[1], "o")
    net.add_arc("back", ends[2], "mix")
    if ends[3] is not None:
        net.add_arc("spill", ends[3], tree.root)
    return net


def _capacity_halve(inner, level):
    """Wrap a p/q gadget so the result simulates p/(2q), unnormalized.

    The inner gadget's terminals become splitters: the new output vertex
    returns half of what it receives to the inner input vertex, so the
    inner gadget sees twice the outgoing throughput and the wrapped network
    passes exactly half the inner ratio.
    """
    head = "half%d_i" % level
    tail = "half%d_o" % level
    rename_node = {"i": head, "o": tail}
    rename_arc = {"in": "in%d" % level, "out": "out%d" % level}
    net = SplitterNetwork()
    net.add_input("i")
    net.add_output("o")
    net.add_splitter(head)
    net.add_splitter(tail)
    for name, _kind in inner.nodes.items():
        if name not in rename_node:
            net.add_splitter(name)
    for arc in inner.arcs.values():
        net.add_arc(rename_arc.get(arc.name, arc.name),
                    rename_node.get(arc.tail, arc.tail),
                    rename_node.get(arc.head, arc.head))
    net.add_arc("in", "i", head)
    net.add_arc("out", tail, "o")
    net.add_arc("back%d" % level, tail, head)
    return net


def gen_capacity(p, q):
    """One-input one-output network with maximum throughput exactly p/q.

    O(log q) splitters.  For p/q >= 1/2 this is the arborescence gadget of
    `_capacity_tree`; smaller ratios halve a gadget for the doubled ratio
    (reduced to lowest terms) once per factor of two.  With unit terminal
    capacities the throughput is p/q and only the input arc is saturated;
    capping a terminal below p/q moves the bottleneck there, for a
    throughput of min{c(i), c(o), p/q}.
    """
    p, q = int(p), int(q)
    _check_ratio(p, q)
    chain = [(p, q)]
    while 2 * chain[-1][0] < chain[-1][1]:
        doubled = Fraction(2 * chain[-1][0], chain[-1][1])
        chain.append((doubled.numerator, doubled.denominator))
    net = _capacity_tree(*chain[-1])
    for level in range(len(chain) - 1, 0, -1):
        net = _capacity_halve(net, level)
    net = normalize(net)
    bad = validate(net)
    if bad:  # pragma: no cover - would be a construction bug
        raise AssertionError("generated network is invalid: %s" % bad[0])
    return net


def gen_capacity_binary(p, q):
    """Like `gen_capacity`, but shaped by the binary expansion of p/q.

    Writes p/q = 0.prefix(period)^w with the period rotated to start with a
    1, then builds three lanes over the bit positions: a splitting lane u
    (each u_j passes half onward and drops half toward position j's bit), a
    collector v for the 0 bits (returned into circulation at u_1) and a
    collector w for the 1 bits (sent to the output).  The final u returns
    its leftover to the period's first position, closing the loop.  Bitless
    lane vertices (never fed, or mere pass-throughs) are pruned and
    contracted away, so the size is O(|prefix| + |period|).
    """
    p, q = int(p), int(q)
    _check_ratio(p, q)
    prefix, period = binary_expansion(Fraction(p, q),
                                      period_starts_with_one=True)
    bits = prefix + period
    l = len(bits)
    start = len(prefix) + 1

    arcs = {"in": ("i", "v%d" % l), "vu": ("v1", "u1"),
            "out": ("w%d" % l, "o"), "loop": ("u%d" % l, "u%d" % start)}
    for j in range(1, l):
        arcs["eu%d" % j] = ("u%d" % j, "u%d" % (j + 1))
        arcs["ev%d" % (j + 1)] = ("v%d" % (j + 1), "v%d" % j)
        arcs["ew%d" % j] = ("w%d" % j, "w%d" % (j + 1))
    for j, b in enumerate(bits, 1):
        lane = "v%d" if b == 0 else "w%d"
        arcs["b%d" % j] = ("u%d" % j, lane % j)
    splitters = {name for pair in arcs.values() for name in pair}
    splitters -= {"i", "o"}

    # A splitter no arc feeds can never carry flow: drop it (this clears the
    # w lane ahead of the first 1 bit).
    while True:
        fed = {head for _tail, head in arcs.values()}
        dead = sorted(splitters - fed)
        if not dead:
            break
        splitters -= set(dead)
        for name in sorted(arcs):
            if arcs[name][0] in dead:
                del arcs[name]

    # A 1-in 1-out splitter is a plain belt: contract it, keeping the
    # incoming arc's id.
    while True:
        for s in sorted(splitters):
            ins = sorted(n for n, (_t, h) in arcs.items() if h == s)
            outs = sorted(n for n, (t, _h) in arcs.items() if t == s)
            if len(ins) == 1 and len(outs) == 1 and ins[0] != outs[0]:
                arcs[ins[0]] = (arcs[ins[0]][0], arcs[outs[0]][1])
                del arcs[outs[0]]
                splitters.remove(s)
                break
        else:
            break

    net = SplitterNetwork()
    net.add_input("i")
    net.add_output("o")
    for name in sorted(splitters):
        net.add_splitter(name)
    for name in sorted(arcs):
        tail, head = arcs[name]
        net.add_arc(name, tail, head)
    net = normalize(net)
    bad = validate(net)
    if bad:  # pragma: no cover - would be a construction bug
        raise AssertionError("generated network is invalid: %s" % bad[0])
    return net


# --------------------------------------------------------------------------
# Verifiers


@dataclass(frozen=True)
class VerifierReport:
    """Outcome of driving one property over a capacity suite.

    A report with no counterexample means every suite vector passed —
    evidence for the property, not a proof.  A counterexample (the exact
    capacity assignment, with `detail` naming the violated clause) refutes
    the property outright.
    """

    claim: str
    vectors: int
    counterexample: dict
    detail: str

    @property
    def passed(self):
        return self.counterexample is None

    def summary(self):
        if self.passed:
            return ("%s: %d capacity vectors pass (evidence, not a proof)"
                    % (self.claim, self.vectors))
        caps = ", ".join("%s=%s" % (t, format_rational(c))
                         for t, c in sorted(self.counterexample.items()))
        return ("%s: counterexample (definitive) at {%s}: %s"
                % (self.claim, caps, self.detail))


def capacity_suite(dim, seed=0, samples=12):
    """Deterministic capacity vectors of length `dim` for the verifiers.

    All ones, all zeros, every unit vector, the full 0/1 hypercube while it
    is small (dim <= 8), and `samples` random dyadic vectors drawn from the
    seeded generator.  Duplicates are dropped, order is stable.
    """
    vectors = [(ONE,) * dim, (ZERO,) * dim]
    for pos in range(dim):
        vectors.append(tuple(ONE if j == pos else ZERO for j in range(dim)))
    if dim <= 8:
        vectors.extend(product((ZERO, ONE), repeat=dim))
    rng = Random(seed)
    for _ in range(samples):
        vectors.append(tuple(Fraction(rng.randrange(33), 32)
                             for _ in range(dim)))
    return list(dict.fromkeys(vectors))


def _driven(net):
    """Real terminals, in declaration order (dummy padding stays at 0)."""
    ins = [n for n in net.inputs() if not n.startswith(DUMMY_PREFIX)]
    outs = [n for n in net.outputs() if not n.startswith(DUMMY_PREFIX)]
    return ins, outs


def _terminal_flow(net, state, terminal):
    arcs = (net.out_arcs(terminal) if net.kind(terminal) == "input"
            else net.in_arcs(terminal))
    return state.t[arcs[0]]


def _solved(net, caps):
    state, _trace = solve(net.with_caps(caps))
    return state


def verify_balancer(net, suite=None):
    """Check output evenness over a suite of input-capacity vectors.

    Every output capacity is forced to 1 (the property is defined that
    way); each suite vector assigns the real inputs, the network is solved
    exactly, and all output arcs must carry one common value.
    """
    ins, outs = _driven(net)
    if suite is None:
        suite = capacity_suite(len(ins))
    count = 0
    for vector in suite:
        vector = tuple(Fraction(c) for c in vector)
        if len(vector) != len(ins):
            raise ValueError("vector %r does not cover the %d inputs"
                             % (vector, len(ins)))
        caps = dict(zip(ins, vector))
        caps.update((o, ONE) for o in outs)
        state = _solved(net, caps)
        count += 1
        flows = [_terminal_flow(net, state, o) for o in outs]
        if len(set(flows)) > 1:
            detail = "output arcs diverge: " + ", ".join(
                "%s=%s" % (o, format_rational(f)) for o, f in zip(outs, flows))
            return VerifierReport("balancer", count, dict(zip(ins, vector)),
                                  detail)
    return VerifierReport("balancer", count, None, "")


def _split_caps(net, vector):
    ins, outs = _driven(net)
    vector = tuple(Fraction(c) for c in vector)
    if len(vector) != len(ins) + len(outs):
        raise ValueError("vector %r does not cover the %d terminals"
                         % (vector, len(ins) + len(outs)))
    caps = dict(zip(ins + outs, vector))
    return ins, outs, caps


def verify_throughput_unlimited(net, suite=None):
    """Check total throughput = min{c(I), c(O)} over capacity vectors.

    Suite vectors run over inputs then outputs, in declaration order.
    """
    count = 0
    ins, outs = _driven(net)
    if suite is None:
        suite = capacity_suite(len(ins) + len(outs))
    for vector in suite:
        ins, outs, caps = _split_caps(net, vector)
        state = _solved(net, caps)
        count += 1
        total = sum((_terminal_flow(net, state, o) for o in outs), ZERO)
        bound = min(sum((caps[i] for i in ins), ZERO),
                    sum((caps[o] for o in outs), ZERO))
        if total != bound:
            detail = ("total throughput %s, bound min{c(I), c(O)} = %s"
                      % (format_rational(total), format_rational(bound)))
            return VerifierReport("throughput-unlimited", count, caps, detail)
    return VerifierReport("throughput-unlimited", count, None, "")


def verify_universal(net, suite=None):
    """Check universal balancing over capacity vectors (inputs + outputs).

    The thresholds are recovered from the solved state itself: a = the
    largest input-arc throughput, b = the largest output-arc throughput.
    Each input arc must carry min{c(i), a}, each output arc min{c(o), b},
    and the total must reach min{c(I), c(O)}.
    """
    count = 0
    ins, outs = _driven(net)
    if suite is None:
        suite = capacity_suite(len(ins) + len(outs))
    for vector in suite:
        ins, outs, caps = _split_caps(net, vector)
        state = _solved(net, caps)
        count += 1
        in_flow = {i: _terminal_flow(net, state, i) for i in ins}
        out_flow = {o: _terminal_flow(net, state, o) for o in outs}
        alpha = max(in_flow.values())
        beta = max(out_flow.values())
        detail = None
        for i in ins:
            if in_flow[i] != min(caps[i], alpha):
                detail = ("input %s carries %s, not min{c, a} = %s (a = %s)"
                          % (i, format_rational(in_flow[i]),
                             format_rational(min(caps[i], alpha)),
                             format_rational(alpha)))
                break
        if detail is None:
            for o in outs:
                if out_flow[o] != min(caps[o], beta):
                    detail = ("output %s carries %s, not min{c, b} = %s "
                              "(b = %s)"
                              % (o, format_rational(out_flow[o]),
                                 format_rational(min(caps[o], beta)),
                                 format_rational(beta)))
                    break
        if detail is None:
            total = sum(out_flow.values(), ZERO)
            bound = min(sum((caps[i] for i in ins), ZERO),
                        sum((caps[o] for o in outs), ZERO))
            if total != bound:
                detail = ("total throughput %s, bound min{c(I), c(O)} = %s"
                          % (format_rational(total), format_rational(bound)))
        if detail is not None:
            return VerifierReport("universal", count, caps, detail)
    return VerifierReport("universal", count, None, "")


# --------------------------------------------------------------------------
# Counting and lower bounds


def counts(k):
    """Splitter counts (simple, benes, universal) of order k >= 1."""
    if k < 1:
        raise ValueError("order must be >= 1, got %r" % (k,))
    return (k * 2 ** (k - 1), (2 * k - 1) * 2 ** (k - 1),
            (k + 1) * 2 ** (k + 2))


def knuth_yao_factor(r):
    """sum_{k>=1} k 2^-k bit_k(r), exactly: the expected number of fair
    coin tosses an optimal discrete sampler charges to an outcome of
    probability r.

    Closed form over the eventually periodic expansion r = 0.prefix(period):
    a prefix bit at position k contributes k/2^k, and a period bit at
    position P+j contributes the geometric tail
    2^-(P+j) ((P+j)/(1-x) + L x/(1-x)^2) with x = 2^-L.
    """
    r = Fraction(r)
    if not (ZERO <= r <= ONE):
        raise ValueError("need a probability in [0, 1], got %s" % (r,))
    if r == ONE:
        return ZERO  # 1 = 1.000...: no fractional bits
    prefix, period = binary_expansion(r)
    total = ZERO
    for k, b in enumerate(prefix, 1):
        if b:
            total += Fraction(k, 2 ** k)
    pre, length = len(prefix), len(period)
    x = Fraction(1, 2 ** length)
    straight = 1 / (1 - x)
    shifted = x / (1 - x) ** 2
    for j, b in enumerate(period, 1):
        if b:
            total += ((pre + j) * straight + length * shifted) \
                / 2 ** (pre + j)
    return total


def lower_bound(n_inputs, n_outputs, mode="general"):
    """Minimum splitter count forced by even distribution, exactly.

    Any universally balancing (more generally, any balancing) network on
    |I| inputs and |O| outputs needs at least
    1/4 |I| |O| knuth_yao_factor(1/|O|) splitters; for balancers whose
    all-ones steady-state keeps every arc fluid the factor improves to 1/2
    (mode "weak").  For |I| = |O| = 2^k the weak bound is k 2^(k-1),
    exactly the size of the simple balancer.
    """
    if mode not in ("weak", "general"):
        raise ValueError("mode must be 'weak' or 'general', got %r" % (mode,))
    if n_inputs < 0 or n_outputs < 1:
        raise ValueError("need n_inputs >= 0 and n_outputs >= 1, got %r, %r"
                         % (n_inputs, n_outputs))
    scale = Fraction(1, 2) if mode == "weak" else Fraction(1, 4)
    return (scale * n_inputs * n_outputs
            * knuth_yao_factor(Fraction(1, n_outputs)))
