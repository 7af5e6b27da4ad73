import itertools
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beltflow.network import (
    NetworkError,
    SplitterNetwork,
    normalize,
    parse,
    reverse,
    validate,
)
from beltflow.steady_state import (
    Augment,
    Move,
    Saturate,
    SteadyState,
    augment,
    build_residual,
    check_rules,
    join,
    meet,
    parse_steady_state,
    psi,
    reverse_state,
    saturate_nonloose,
    serialize_steady_state,
    solve,
    to_strong_maximization,
    uniform_solve,
    zero_state,
    _uniform_ops,
)

F = Fraction


def looped_net():
    """Five splitters in a loop, one input, one output (same wiring as the
    looped_example of test_network).  Normalization pads b and c."""
    return normalize(parse("""
    input i
    output o
    splitter a
    splitter b
    splitter c
    splitter d
    splitter e
    arc ia i -> a
    arc ab a -> b
    arc ad a -> d
    arc bc b -> c
    arc be b -> e
    arc ca c -> a
    arc dc d -> c
    arc de d -> e
    arc ed e -> d
    arc eo e -> o
    """))


def crossing_net(i1="1", i2="1", o1="1", o2="1"):
    """A single splitter with two inputs and two outputs, caps as given."""
    return normalize(parse("""
    input i1 cap=%s
    input i2 cap=%s
    output o1 cap=%s
    output o2 cap=%s
    splitter v
    arc a1 i1 -> v
    arc a2 i2 -> v
    arc b1 v -> o1
    arc b2 v -> o2
    """ % (i1, i2, o1, o2)))


def two_splitter_loop(icap="1", ocap="1"):
    """Input into a, a <-> b two-cycle, b into output."""
    return normalize(parse("""
    input i cap=%s
    output o cap=%s
    splitter a
    splitter b
    arc ia i -> a
    arc ab a -> b
    arc ba b -> a
    arc bo b -> o
    """ % (icap, ocap)))


def chain_net(i0, i1, o0, o1):
    """Two splitters in series: two capped inputs, one middle belt, two
    capped outputs.  The stage in the throughput-monotonicity pictures."""
    return normalize(parse("""
    input i0 cap=%s
    input i1 cap=%s
    output o0 cap=%s
    output o1 cap=%s
    splitter s0
    splitter s1
    arc e0 i0 -> s0
    arc e1 i1 -> s0
    arc m s0 -> s1
    arc f0 s1 -> o0
    arc f1 s1 -> o1
    """ % (i0, i1, o0, o1)))


def two_diamond_net():
    """Ten splitters: two three-splitter eddies joined by a bridge, with the
    terminals hanging off the far ends.  The interior eddy levels admit a
    whole interval of steady values, yet the terminals are forced to 1/4."""
    return normalize(parse("""
    input i
    output o
    splitter s1
    splitter s2
    splitter s3
    splitter s4
    splitter s5
    splitter s7
    splitter s8
    splitter s9
    splitter s10
    splitter s11
    arc e01 i -> s1
    arc e12 s1 -> s2
    arc e23 s2 -> s3
    arc e32 s3 -> s2
    arc e34 s3 -> s4
    arc e41 s4 -> s1
    arc e45 s4 -> s5
    arc e57 s5 -> s7
    arc e75 s7 -> s5
    arc e78 s7 -> s8
    arc e89 s8 -> s9
    arc e910 s9 -> s10
    arc e109 s10 -> s9
    arc e1011 s10 -> s11
    arc e118 s11 -> s8
    arc e11o s11 -> o
    """))


def eddy_state(net, eps):
    """A steady-state of two_diamond_net for any eps in [0, 1/2]: only the
    s5/s7 eddy level moves with eps, terminals stay at 1/4."""
    t = {
        "e01": F(1, 4), "e12": F(1, 2), "e23": F(1), "e32": F(1, 2),
        "e34": F(1, 2), "e41": F(1, 4), "e45": F(1, 4),
        "e57": F(1, 2) + eps, "e75": F(1, 4) + eps, "e78": F(1, 4),
        "e89": F(1, 2), "e910": F(1), "e109": F(1, 2), "e1011": F(1, 2),
        "e118": F(1, 4), "e11o": F(1, 4),
    }
    fluid = {"e34", "e45", "e57", "e75", "e1011", "e11o"}
    for aid in net.arcs:
        if aid.startswith("~"):
            t[aid] = F(0)
            if "_in_" in aid:
                fluid.add(aid)
    return SteadyState(t, frozenset(fluid))


def random_net(rng, max_splitters=8, binary_caps=False):
    """Random valid normalized network: splitters wired slot-to-slot, spare
    slots fed by fresh inputs / drained by fresh outputs."""
    n = rng.randint(1, max_splitters)
    net = SplitterNetwork()
    for k in range(n):
        net.add_splitter("s%d" % k)
    out_slots = [(k, j) for k in range(n) for j in range(2)]
    in_slots = [(k, j) for k in range(n) for j in range(2)]
    rng.shuffle(out_slots)
    rng.shuffle(in_slots)
    internal = rng.randint(0, 2 * n - 1)
    made = 0
    aid = 0
    while made < internal and out_slots and in_slots:
        tail = out_slots[-1]
        heads = [s for s in in_slots if s[0] != tail[0]]
        if not heads:
            break
        head = heads[rng.randrange(len(heads))]
        out_slots.pop()
        in_slots.remove(head)
        net.add_arc("e%02d" % aid, "s%d" % tail[0], "s%d" % head[0])
        aid += 1
        made += 1

    def cap():
        if binary_caps:
            return F(rng.randint(0, 1))
        r = rng.random()
        if r < 0.15:
            return F(0)
        if r < 0.3:
            return F(1)
        q = rng.randint(1, 12)
        return F(rng.randint(0, q), q)

    for idx, (k, _j) in enumerate(in_slots):
        net.add_input("i%d" % idx, cap())
        net.add_arc("e%02d" % aid, "i%d" % idx, "s%d" % k)
        aid += 1
    for idx, (k, _j) in enumerate(out_slots):
        net.add_output("o%d" % idx, cap())
        net.add_arc("e%02d" % aid, "s%d" % k, "o%d" % idx)
        aid += 1
    return normalize(net)


def op_sketch(trace):
    """Compress a trace to [(kind, arc-or-amount), ...] per step."""
    out = []
    for step in trace.steps:
        ops = []
        for op in step.ops:
            if isinstance(op, Saturate):
                ops.append(("sat", op.arc))
            elif isinstance(op, Augment):
                ops.append(("aug", op.amount))
            else:
                ops.append(("move", op.amount))
        out.append((ops, step.psi))
    return out


# The solver run on looped_net, worked through by hand round by round (the
# circulation values agree with the frozen LOOP_* fixtures of
# test_circulation).  Every lambda and the final throughputs match the
# pictured run.
LOOPED_FINAL = SteadyState(
    {"ia": F(6, 7), "ab": F(1), "ad": F(5, 7), "bc": F(3, 7), "be": F(4, 7),
     "ca": F(6, 7), "dc": F(3, 7), "de": F(1), "ed": F(5, 7), "eo": F(6, 7),
     "~e_in_b": F(0), "~e_out_c": F(0)},
    frozenset(["ab", "be", "de", "eo", "~e_in_b"]))

LOOPED_SKETCH = [
    ([("sat", "~e_out_c")], -9),
    ([("aug", F(6))], -8),
    ([("sat", "dc")], -7),
    ([("aug", F(39, 28))], -6),
    ([("sat", "ad")], -5),
    ([("aug", F(4, 7))], -4),
    ([("sat", "bc")], -3),
    ([("sat", "ed")], -2),
    ([("sat", "ca"), ("aug", F(9, 14)), ("sat", "ia")], -1),
]

# Sub-steady-state after the first two steps: the loop spun up by lambda=6,
# nothing saturated but the padding arc.
LOOPED_ROUND2 = SteadyState(
    {"ia": F(1, 2), "ab": F(3, 4), "ad": F(3, 4), "bc": F(3, 8),
     "be": F(3, 8), "ca": F(1), "dc": F(5, 8), "de": F(5, 8),
     "ed": F(1, 2), "eo": F(1, 2), "~e_in_b": F(0), "~e_out_c": F(0)},
    frozenset(["ia", "ab", "ad", "bc", "be", "ca", "dc", "de", "ed", "eo",
               "~e_in_b"]))

# Two steps later: dc saturated, the push of lambda=39/28 drove de to 1.
LOOPED_ROUND4 = SteadyState(
    {"ia": F(5, 7), "ab": F(6, 7), "ad": F(6, 7), "bc": F(3, 7),
     "be": F(3, 7), "ca": F(1), "dc": F(4, 7), "de": F(1),
     "ed": F(5, 7), "eo": F(5, 7), "~e_in_b": F(0), "~e_out_c": F(0)},
    frozenset(["ia", "ab", "ad", "bc", "be", "ca", "de", "ed", "eo",
               "~e_in_b"]))

# One saturation further (ad gone): the state the lambda=4/7 push leaves
# with both central incoming pairs tight.
LOOPED_ROUND5 = SteadyState(
    dict(LOOPED_ROUND4.t),
    LOOPED_ROUND4.fluid - {"ad"})

# First circulation of the run, on network arc ids; equals the frozen
# LOOP_ALL_FORWARD values of test_circulation under za->ia, ez->eo.
LOOPED_FIRST_CIRC = {
    "ia": F(1, 12), "ab": F(1, 8), "ad": F(1, 8), "bc": F(1, 16),
    "be": F(1, 16), "ca": F(1, 6), "dc": F(5, 48), "de": F(5, 48),
    "ed": F(1, 12), "eo": F(1, 12),
}


# ---------------------------------------------------------------------------
# check_rules


def test_check_rules_crossing_figure_passes():
    # in arcs 7/10 saturated and 1/2 fluid, out arcs saturated at their
    # output capacities: a legal split, under both maximization rules
    net = crossing_net(i1="7/10", i2="1/2", o1="2/5", o2="4/5")
    state = SteadyState(
        {"a1": F(7, 10), "a2": F(1, 2), "b1": F(2, 5), "b2": F(4, 5)},
        frozenset(["a2"]))
    assert check_rules(net, state) == []
    assert check_rules(net, state, "R8") == []


def test_check_rules_inverted_regimes_break_incoming_fairness():
    # same throughputs, but now the 1/2 arc is the saturated one: a blocked
    # lane may not carry less than its free-flowing sibling
    net = crossing_net(i1="7/10", i2="1/2", o1="2/5", o2="4/5")
    state = SteadyState(
        {"a1": F(7, 10), "a2": F(1, 2), "b1": F(2, 5), "b2": F(4, 5)},
        frozenset(["a1"]))
    violations = check_rules(net, state)
    assert len(violations) == 1
    assert violations[0].startswith("R6:")


def test_check_rules_zero_state_on_zero_caps():
    net = crossing_net(i1="0", i2="0", o1="0", o2="0")
    assert check_rules(net, zero_state(net)) == []


def test_check_rules_zero_state_needs_input_equality():
    net = crossing_net()
    violations = check_rules(net, zero_state(net))
    assert violations and all(v.startswith("R3:") for v in violations)
    # sub-steady-states drop exactly that equality clause
    assert check_rules(net, zero_state(net), "sub") == []


def test_check_rules_range_and_conservation():
    net = crossing_net()
    state = SteadyState(
        {"a1": F(3, 2), "a2": F(1), "b1": F(1), "b2": F(1)},
        frozenset())
    violations = check_rules(net, state, "sub")
    assert any(v.startswith("R1:") for v in violations)
    assert any(v.startswith("R5:") for v in violations)


def test_check_rules_pre_mode_allows_deficit_only():
    net = crossing_net()
    deficit = SteadyState(
        {"a1": F(1), "a2": F(1), "b1": F(1, 2), "b2": F(1, 2)},
        frozenset())
    assert any(v.startswith("R5:") for v in check_rules(net, deficit, "sub"))
    assert not any(v.startswith("R5:")
                   for v in check_rules(net, deficit, "pre"))
    surplus = SteadyState(
        {"a1": F(1, 2), "a2": F(1, 2), "b1": F(1), "b2": F(1)},
        frozenset())
    assert any(v.startswith("R5:") for v in check_rules(net, surplus, "pre"))


def test_check_rules_dimension_mismatch():
    net = crossing_net()
    with pytest.raises(ValueError):
        check_rules(net, SteadyState({"a1": F(0)}, frozenset()))
    with pytest.raises(ValueError):
        check_rules(net, zero_state(net), "strict")


def test_psi_counts_both_sides():
    net = looped_net()
    # all twelve arcs fluid, ten of them below capacity (the two padding
    # arcs sit exactly at their zero caps)
    assert psi(net, zero_state(net)) == -10
    assert psi(net, LOOPED_FINAL) == -1


# ---------------------------------------------------------------------------
# solve: worked examples


def test_solve_looped_example_trace_and_state():
    net = looped_net()
    state, trace = solve(net)
    assert state == LOOPED_FINAL
    assert trace.start == -10
    assert op_sketch(trace) == LOOPED_SKETCH
    assert check_rules(net, state) == []
    # the pictured multiset of throughputs on the real arcs
    values = sorted(state.t[a] for a in net.arcs if not a.startswith("~"))
    assert values == sorted([F(6, 7), F(1), F(5, 7), F(3, 7), F(4, 7),
                             F(3, 7), F(6, 7), F(1), F(5, 7), F(6, 7)])


def test_solve_looped_example_first_circulation():
    _, trace = solve(looped_net())
    first = next(op for op in trace.operations if isinstance(op, Augment))
    assert first.circulation == LOOPED_FIRST_CIRC
    assert first.amount == F(6)


def test_solve_fair_split_with_capped_output():
    # caps 3/5 on both inputs, 2/5 and 1 on the outputs: the capped output
    # backs up at 2/5, everything else reaches the free output
    net = crossing_net(i1="3/5", i2="3/5", o1="2/5", o2="1")
    state, trace = solve(net)
    assert state == SteadyState(
        {"a1": F(3, 5), "a2": F(3, 5), "b1": F(2, 5), "b2": F(4, 5)},
        frozenset(["a1", "a2", "b2"]))
    assert op_sketch(trace) == [
        ([("aug", F(6, 5))], -3),
        ([("aug", F(2, 5))], -2),
        ([("sat", "b1"), ("aug", F(4, 5))], -1),
    ]


def test_solve_loop_throttles_throughput():
    # a free-flowing two-splitter loop halves what can pass through, even
    # though both terminal capacities are 1
    net = two_splitter_loop()
    state, trace = solve(net)
    assert state.t["ia"] == F(1, 2)
    assert state.t["bo"] == F(1, 2)
    assert state.t["ab"] == F(1)
    assert op_sketch(trace) == [
        ([("sat", "~e_out_a")], -3),
        ([("aug", F(5, 2))], -2),
        ([("sat", "ba")], -1),
        ([("sat", "ia")], 0),
    ]


def test_solve_zero_capacities_need_no_work():
    net = crossing_net(i1="0", i2="0", o1="0", o2="0")
    state, trace = solve(net)
    assert state == zero_state(net)
    assert trace.steps == ()


def test_solve_uncapped_crossing_saturates_nothing():
    net = crossing_net()
    state, trace = solve(net)
    assert state.fluid == frozenset(net.arcs)
    assert all(v == F(1) for v in state.t.values())


def test_solve_tightly_capped_outputs_take_hazard_path():
    # both outputs capped at 1/4: their arcs pin at the cap while the
    # splitter still has inflow headroom, so the solver must saturate them
    # before the incoming arcs (otherwise the strong maximization rule
    # would demand a full belt the caps forbid)
    net = crossing_net(o1="1/4", o2="1/4")
    state, trace = solve(net)
    assert state == SteadyState(
        {"a1": F(1, 4), "a2": F(1, 4), "b1": F(1, 4), "b2": F(1, 4)},
        frozenset())
    assert op_sketch(trace) == [
        ([("aug", F(1))], -2),
        ([("sat", "b1"), ("sat", "b2"), ("sat", "a1")], -1),
        ([("aug", F(1, 2)), ("sat", "a2")], 0),
    ]


def test_solve_rejects_invalid_network():
    net = SplitterNetwork()
    net.add_splitter("s")
    with pytest.raises(NetworkError):
        solve(net)


def test_solve_rejects_terminal_to_terminal_arc():
    net = parse("""
    input i
    input i2
    output o
    output o2
    splitter v
    arc d i -> o
    arc x i2 -> v
    arc y v -> o2
    """)
    net = normalize(net)
    assert validate(net) == []
    with pytest.raises(NetworkError):
        solve(net)
    with pytest.raises(NetworkError):
        uniform_solve(net, 0)


def test_trace_operations_flattens_steps():
    _, trace = solve(looped_net())
    assert trace.operations == [op for s in trace.steps for op in s.ops]
    assert len(trace.operations) == 11


# ---------------------------------------------------------------------------
# build_residual


def splitter_residual(o1, o2, t, fluid):
    net = crossing_net(o1=o1, o2=o2)
    state = SteadyState({k: F(v) for k, v in t.items()}, frozenset(fluid))
    assert check_rules(net, state, "sub") == []
    return build_residual(net, state)


def test_residual_all_fluid_below_caps():
    res = splitter_residual(
        "1", "1", {"a1": "1/3", "a2": "1/3", "b1": "1/3", "b2": "1/3"},
        ["a1", "a2", "b1", "b2"])
    assert res.out_arcs("v") == ["b1", "b2"]
    assert res.forward == frozenset(["a1", "a2", "b1", "b2"])
    assert frozenset(["b1", "b2"]) in res.partition


def test_residual_one_output_pinned():
    res = splitter_residual(
        "1/4", "1", {"a1": "1/2", "a2": "1/2", "b1": "1/4", "b2": "3/4"},
        ["a1", "a2", "b2"])
    assert res.out_arcs("v") == ["b2"]
    assert "b1" not in res.arcs


def test_residual_sink_when_both_outputs_pinned():
    res = splitter_residual(
        "1/4", "1/4", {"a1": "1/4", "a2": "1/4", "b1": "1/4", "b2": "1/4"},
        ["a1", "a2"])
    assert res.out_arcs("v") == []
    assert set(res.arcs) == {"a1", "a2"}


def test_residual_saturated_arc_turns_around():
    res = splitter_residual(
        "1/4", "1/2", {"a1": "1/4", "a2": "1/2", "b1": "1/4", "b2": "1/2"},
        ["a1"])
    # a2 is saturated above zero: usable backwards, away from the splitter
    assert res.arcs["a2"] == ("v", "")
    assert res.out_arcs("v") == ["a2"]
    assert res.out_arcs("") == ["a1"]


def test_residual_saturated_pair_moves_in_lockstep():
    res = splitter_residual(
        "1/4", "3/4", {"a1": "1/2", "a2": "1/2", "b1": "1/4", "b2": "3/4"},
        [])
    assert res.out_arcs("v") == ["a1", "a2"]
    assert frozenset(["a1", "a2"]) in res.partition
    assert res.out_arcs("") == []


def test_residual_classes_sit_on_one_vertex():
    res = build_residual(looped_net(), LOOPED_ROUND2)
    for cls in res.partition:
        tails = {res.arcs[a][0] for a in cls}
        assert len(tails) == 1


def test_residual_of_freshly_saturated_round():
    res = build_residual(looped_net(), LOOPED_ROUND4)
    # the reverse of the newly saturated arc is present, the two arcs pinned
    # at capacity (ca, de) are not
    assert res.arcs["dc"] == ("c", "d")
    assert "ca" not in res.arcs
    assert "de" not in res.arcs
    assert res.forward == frozenset(
        ["ia", "ab", "ad", "bc", "be", "ed", "eo"])
    pairs = sorted(sorted(c) for c in res.partition if len(c) > 1)
    assert pairs == [["ab", "ad"], ["bc", "be"], ["ed", "eo"]]


def test_residual_empty_for_all_saturated_at_zero():
    net = looped_net()
    state = SteadyState({a: F(0) for a in net.arcs}, frozenset())
    assert build_residual(net, state).arcs == {}


def test_residual_uniform_mode_couples_the_input_arcs():
    net = crossing_net()
    res = build_residual(net, zero_state(net), "uniform")
    assert frozenset(["a1", "a2"]) in res.partition
    with pytest.raises(ValueError):
        build_residual(net, zero_state(net), "both")


# ---------------------------------------------------------------------------
# saturate_nonloose


def test_saturate_nonloose_equal_incoming_pair():
    # fluid and saturated arcs meeting at equal throughput: the fluid one
    # is pinned from above and below, so it flips
    net = two_splitter_loop()
    state = SteadyState(
        {"ia": F(1, 2), "ab": F(1), "ba": F(1, 2), "bo": F(1, 2),
         "~e_out_a": F(0), "~e_in_b": F(0)},
        frozenset(["ia", "ab", "bo", "~e_in_b"]))
    arc, after = saturate_nonloose(net, state)
    assert arc == "ia"
    assert after.fluid == state.fluid - {"ia"}
    assert after.t == state.t
    assert check_rules(net, after, "sub") == []


def test_saturate_nonloose_none_when_everything_loose():
    net = crossing_net()
    state = SteadyState(
        {"a1": F(1, 3), "a2": F(1, 3), "b1": F(1, 3), "b2": F(1, 3)},
        frozenset(["a1", "a2", "b1", "b2"]))
    assert saturate_nonloose(net, state) is None


def test_saturate_nonloose_unblocks_residual_sink():
    # in the spun-up loop, c cannot forward what both its incoming arcs
    # could still bring: the stronger one (dc at 5/8) gets saturated
    arc, after = saturate_nonloose(looped_net(), LOOPED_ROUND2)
    assert arc == "dc"
    assert after.fluid == LOOPED_ROUND2.fluid - {"dc"}


# ---------------------------------------------------------------------------
# augment


def test_augment_spins_up_the_loop():
    net = looped_net()
    start = SteadyState(
        {a: F(0) for a in net.arcs},
        frozenset(a for a in net.arcs if a != "~e_out_c"))
    state, lam = augment(net, start, LOOPED_FIRST_CIRC)
    assert lam == F(6)
    assert state == LOOPED_ROUND2


def test_augment_stops_where_pairs_tighten():
    # pushing through the reversed arcs: ab reaches the full belt exactly
    # when both central incoming pairs tighten (bc=dc and ad=ed)
    net = looped_net()
    circ = {"ia": F(1, 16), "ab": F(1, 4), "bc": F(1, 8), "be": F(1, 8),
            "dc": F(1, 8), "ad": F(3, 16), "ed": F(1, 16), "eo": F(1, 16)}
    state, lam = augment(net, LOOPED_ROUND5, circ)
    assert lam == F(4, 7)
    assert state.t["ab"] == F(1)
    assert state.t["bc"] == state.t["dc"] == F(1, 2)
    assert state.t["ed"] == state.t["ad"] == F(3, 4)


def test_augment_headroom_bound():
    # both arcs of the a<->b cycle rising at unit rate with 1/3 headroom
    net = two_splitter_loop(icap="0", ocap="0")
    state = SteadyState(
        {"ia": F(0), "ab": F(2, 3), "ba": F(2, 3), "bo": F(0),
         "~e_out_a": F(0), "~e_in_b": F(0)},
        frozenset(["ia", "ab", "ba", "~e_in_b"]))
    new, lam = augment(net, state, {"ab": F(1), "ba": F(1)})
    assert lam == F(1, 3)
    assert new.t["ab"] == new.t["ba"] == F(1)


def test_augment_rejects_zero_and_stray_circulations():
    net = looped_net()
    with pytest.raises(ValueError):
        augment(net, LOOPED_ROUND2, {})
    with pytest.raises(ValueError):
        augment(net, LOOPED_ROUND2, {"ab": F(0)})
    with pytest.raises(ValueError):
        augment(net, LOOPED_ROUND2, {"ab": F(-1)})
    with pytest.raises(ValueError):
        # ~e_out_c is saturated at zero: not a residual arc
        augment(net, LOOPED_ROUND2, {"~e_out_c": F(1)})


def test_augment_rejects_blocked_push():
    # ia and ba meet at a with equal throughput; raising ia alone would
    # immediately leave the blocked lane behind
    net = two_splitter_loop()
    state = SteadyState(
        {"ia": F(1, 2), "ab": F(1), "ba": F(1, 2), "bo": F(1, 2),
         "~e_out_a": F(0), "~e_in_b": F(0)},
        frozenset(["ia", "ab", "bo", "~e_in_b"]))
    with pytest.raises(ValueError):
        augment(net, state, {"ia": F(1)})


def test_augment_rejects_uneven_rates_on_coupled_pairs():
    net = crossing_net()
    state = SteadyState(
        {"a1": F(1, 3), "a2": F(1, 3), "b1": F(1, 3), "b2": F(1, 3)},
        frozenset(["a1", "a2", "b1", "b2"]))
    with pytest.raises(ValueError):
        augment(net, state, {"a1": F(1), "b1": F(1), "b2": F(2)})


# ---------------------------------------------------------------------------
# strong maximization and reversal


def test_strong_maximization_keeps_conforming_states():
    net = looped_net()
    state, _ = solve(net)
    assert to_strong_maximization(net, state) == state


def test_strong_maximization_frees_blocking_arcs():
    net = looped_net()
    state, _ = solve(net)
    rnet = reverse(net)
    rstate = reverse_state(net, state)
    assert check_rules(rnet, rstate, "R8") == []
    assert check_rules(rnet, rstate, "R8S") != []
    grown = to_strong_maximization(rnet, rstate)
    # exactly the two full arcs blocking a slack fluid arc turn fluid
    assert grown.fluid - rstate.fluid == {"ab", "de"}
    assert grown.t == rstate.t
    assert check_rules(rnet, grown, "R8S") == []


def test_strong_maximization_pulls_partner_along():
    # mechanical rewrite check: when both incoming arcs block a slack
    # fluid arc, they turn together (keeps incoming fairness intact)
    net = crossing_net()
    state = SteadyState(
        {"a1": F(1), "a2": F(1), "b1": F(1, 2), "b2": F(1, 2)},
        frozenset(["b1", "b2"]))
    grown = to_strong_maximization(net, state)
    assert grown.fluid == frozenset(["a1", "a2", "b1", "b2"])


def test_reverse_state_swaps_regimes():
    net = looped_net()
    state, _ = solve(net)
    rstate = reverse_state(net, state)
    assert rstate.fluid == frozenset(net.arcs) - state.fluid
    assert rstate.t == state.t
    # the reversal is an involution and keeps every terminal value
    assert reverse_state(reverse(net), rstate) == state


def test_reverse_state_of_all_fluid_is_all_saturated():
    net = crossing_net(i1="0", i2="0", o1="0", o2="0")
    rstate = reverse_state(net, zero_state(net))
    assert rstate.fluid == frozenset()
    assert check_rules(reverse(net), rstate, "R8") == []


# ---------------------------------------------------------------------------
# uniform capacities: seeded runs, confluence, lattice


def test_uniform_solve_requires_binary_caps():
    with pytest.raises(ValueError):
        uniform_solve(crossing_net(o1="1/2"), 0)


def test_uniform_solve_single_splitter_fills_every_belt():
    state, trace = uniform_solve(crossing_net(), seed=3)
    assert all(v == F(1) for v in state.t.values())
    assert state.fluid == frozenset(["a1", "a2", "b1", "b2"])
    assert op_sketch(trace) == [([("aug", F(4))], 0)]


def test_eddy_family_is_steady_under_the_weak_rule_only():
    net = two_diamond_net()
    for eps in (F(0), F(1, 4), F(1, 2)):
        state = eddy_state(net, eps)
        assert check_rules(net, state, "R8") == []
        strong = check_rules(net, state, "R8S")
        assert strong and all(v.startswith("R8S:") for v in strong)


def test_uniform_solve_terminals_ignore_the_seed():
    net = two_diamond_net()
    op_counts = set()
    for seed in range(10):
        state, trace = uniform_solve(net, seed)
        assert check_rules(net, state) == []
        assert state.t["e01"] == F(1, 4)
        assert state.t["e11o"] == F(1, 4)
        op_counts.add(len(trace.operations))
    # the seeds genuinely reorder the runs, only the terminals agree
    assert len(op_counts) > 1
    plain, _ = solve(net)
    assert plain.t["e01"] == plain.t["e11o"] == F(1, 4)


def test_uniform_runs_record_moves_and_saturations():
    net = two_diamond_net()
    kinds = set()
    for seed in range(10):
        _, trace = uniform_solve(net, seed)
        kinds.update(type(op).__name__ for op in trace.operations)
    assert kinds == {"Saturate", "Augment", "Move"}


def uniform_frontier(net, state):
    res = build_residual(net, state, "uniform")
    if all(ends[0] != res.z for ends in res.arcs.values()):
        return []
    return _uniform_ops(net, state, res)


def test_uniform_operations_are_locally_confluent():
    # two distinct applicable operations always rejoin after one more step
    net = two_diamond_net()
    state = zero_state(net)
    examined = 0
    while True:
        ops = uniform_frontier(net, state)
        if not ops:
            break
        if len(ops) >= 2 and examined < 4:
            for first, second in itertools.combinations(ops[:3], 2):
                rejoined = join(first[2], second[2])
                for _, _, successor in (first, second):
                    assert successor == rejoined or any(
                        nxt == rejoined
                        for _, _, nxt in uniform_frontier(net, successor))
            examined += 1
        state = ops[0][2]
    assert examined == 4


def replayed_states(net, seed):
    rng = random.Random(seed)
    state = zero_state(net)
    states = [state]
    while True:
        ops = uniform_frontier(net, state)
        if not ops:
            return states
        _, _, state = rng.choice(ops)
        states.append(state)


def test_meet_and_join_are_idempotent():
    net = two_diamond_net()
    state, _ = uniform_solve(net, 1)
    assert meet(state, state) == state
    assert join(state, state) == state


def test_meet_and_join_on_a_shared_fluid_set():
    # the eddy family all shares one fluid set; meet takes the lower eddy
    # level, join the higher
    net = two_diamond_net()
    low, high = eddy_state(net, F(0)), eddy_state(net, F(1, 2))
    assert meet(low, high) == low
    assert join(low, high) == high
    mid = eddy_state(net, F(1, 4))
    assert meet(mid, high) == mid
    assert join(low, mid) == mid


def test_meet_and_join_lattice_laws_on_run_states():
    net = two_diamond_net()
    sample = replayed_states(net, 11)[::4] + replayed_states(net, 12)[::4]
    for s1, s2 in itertools.combinations(sample, 2):
        m, j = meet(s1, s2), join(s1, s2)
        assert m == meet(s2, s1)
        assert j == join(s2, s1)
        assert m.fluid == s1.fluid | s2.fluid
        assert j.fluid == s1.fluid & s2.fluid
        assert meet(s1, j) == s1
        assert join(s1, m) == s1
        # closure: both stay uniform sub-steady-states
        assert check_rules(net, m, "sub") == []
        assert check_rules(net, j, "sub") == []


def test_meet_rejects_mismatched_arc_sets():
    s1 = zero_state(crossing_net())
    s2 = zero_state(looped_net())
    with pytest.raises(ValueError):
        meet(s1, s2)
    with pytest.raises(ValueError):
        join(s1, s2)


# ---------------------------------------------------------------------------
# text format


def test_serialize_sorts_by_arc_id():
    text = serialize_steady_state(LOOPED_FINAL)
    names = [line.split()[1] for line in text.strip().splitlines()]
    assert names == sorted(LOOPED_FINAL.t)
    assert "arc ab t=1 state=fluid" in text
    assert "arc ad t=5/7 state=saturated" in text


def test_parse_steady_state_roundtrip():
    assert parse_steady_state(serialize_steady_state(LOOPED_FINAL)) \
        == LOOPED_FINAL


def test_parse_steady_state_allows_comments():
    state = parse_steady_state("""
    # a lone arc
    arc x t=3/7 state=saturated  # trailing note
    """)
    assert state == SteadyState({"x": F(3, 7)}, frozenset())


@pytest.mark.parametrize("line", [
    "arc x t=1/2",
    "arc x t=1/2 state=frozen",
    "arc x t=3/2x state=fluid",
    "arc x t=1/2 t=1/2",
    "edge x t=1/2 state=fluid",
])
def test_parse_steady_state_rejects_malformed_lines(line):
    with pytest.raises(ValueError) as err:
        parse_steady_state("arc ok t=0 state=fluid\n%s\n" % line)
    assert "line 2" in str(err.value)


def test_parse_steady_state_rejects_duplicates():
    with pytest.raises(ValueError) as err:
        parse_steady_state(
            "arc x t=0 state=fluid\narc x t=1 state=fluid\n")
    assert "line 2" in str(err.value)


@given(st.lists(
    st.tuples(st.integers(0, 40), st.integers(1, 40), st.booleans()),
    min_size=0, max_size=8))
@settings(max_examples=60, deadline=None)
def test_serialize_parse_is_lossless(rows):
    t = {}
    fluid = set()
    for idx, (num, den, is_fluid) in enumerate(rows):
        name = "e%d" % idx
        t[name] = F(num, den)
        if is_fluid:
            fluid.add(name)
    state = SteadyState(t, frozenset(fluid))
    assert parse_steady_state(serialize_steady_state(state)) == state


# ---------------------------------------------------------------------------
# monotonicity


def test_raising_caps_never_hurts_downstream():
    # open the second input, then the second output: every output arc's
    # throughput is nondecreasing along the way, every input arc's too
    first, _ = solve(chain_net("1", "0", "1", "0"))
    second, _ = solve(chain_net("1", "1", "1", "0"))
    third, _ = solve(chain_net("1", "1", "1", "1"))
    assert (first.t["f0"], first.t["f1"]) == (F(1), F(0))
    assert (second.t["f0"], second.t["f1"]) == (F(1), F(0))
    assert (third.t["f0"], third.t["f1"]) == (F(1, 2), F(1, 2))
    for before, after in ((first, second),):
        assert after.t["f0"] >= before.t["f0"]
        assert after.t["f1"] >= before.t["f1"]
    # raising an output capacity is the mirrored statement for inputs
    assert third.t["e0"] >= second.t["e0"]
    assert third.t["e1"] >= second.t["e1"]
    assert (second.t["e0"], second.t["e1"]) == (F(1, 2), F(1, 2))


def test_monotonicity_on_random_networks():
    rng = random.Random(77)
    for _ in range(120):
        net = random_net(rng, max_splitters=6)
        before, _ = solve(net)
        name = rng.choice(net.inputs())
        bump = net.caps[name] + (F(1) - net.caps[name]) * F(rng.randint(1, 4), 4)
        after, _ = solve(net.with_caps({name: bump}))
        for out in net.outputs():
            for arc in net.in_arcs(out):
                assert after.t[arc] >= before.t[arc], (name, arc)


# ---------------------------------------------------------------------------
# fuzzing the solver invariants


def test_solve_fuzz_rules_progress_and_step_bound():
    rng = random.Random(20260819)
    for _ in range(500):
        net = random_net(rng, max_splitters=40)
        assert validate(net) == []
        state, trace = solve(net)
        assert check_rules(net, state) == []
        m = len(net.arcs)
        values = [trace.start] + [step.psi for step in trace.steps]
        assert all(a < b for a, b in zip(values, values[1:]))
        assert all(-m <= v <= m for v in values)
        assert len(trace.steps) <= 2 * m


def test_uniform_and_plain_solver_agree_on_terminals():
    rng = random.Random(99)
    for trial in range(60):
        net = random_net(rng, max_splitters=5, binary_caps=True)
        plain, _ = solve(net)
        shuffled, _ = uniform_solve(net, seed=trial)
        for term in net.inputs() + net.outputs():
            for arc in net.out_arcs(term) + net.in_arcs(term):
                assert plain.t[arc] == shuffled.t[arc]


def test_reversal_of_fuzzed_solutions_stays_steady():
    rng = random.Random(5150)
    for _ in range(40):
        net = random_net(rng, max_splitters=10)
        state, _ = solve(net)
        rnet = reverse(net)
        rstate = reverse_state(net, state)
        assert check_rules(rnet, rstate, "R8") == []
        grown = to_strong_maximization(rnet, rstate)
        assert check_rules(rnet, grown, "R8S") == []
