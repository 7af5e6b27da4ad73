"""Exact linear programming and the relaxed-conservation solver built on it.

This is the second route to a steady-state: instead of walking residual
circulations, relax flow conservation at splitters to "sends at most what
it receives" (a pre-steady-state, in the spirit of a preflow) and
repeatedly solve the linear program

    maximize the total throughput into the outputs, subject to the
    throughput, capacity, fairness and strong-maximization rules for the
    current set of fluid arcs, with conservation weakened to
    t(out) <= t(in) at every splitter,

breaking ties among optima in favor of high fluid / low saturated
throughputs.  Whenever the optimum still loses flow at some splitter, a
short case analysis finds one fluid arc whose saturation keeps the pair a
pre-steady-state, and the loop repeats with one fewer fluid arc — so it
ends after at most |E| + 1 rounds, necessarily in a steady-state.

The simplex solver is written here in plain dense-tableau form over exact
rationals, with Bland's pivot rule, so runs are deterministic and cycling
is impossible.  Every optimal solve is certified: the dual values read off
the final tableau are checked against the original program (feasibility
both ways, matching objectives, complementary slackness), all exactly.

The refinement loop routes its programs through a presolve that folds
singleton rows (all the 0 <= t <= 1 and capacity rows) into variable
bounds and then runs the tableau with those bounds kept implicit — same
optimum, same certificate against the original rows, but the tableau
holds only the genuinely multi-variable rows, which is what makes the
loop affordable on larger networks.
"""

from dataclasses import dataclass
from fractions import Fraction

from ._linalg import _fast_q
from .network import INPUT, OUTPUT
from .rational import ONE, ZERO
from .steady_state import SteadyState, _require_solvable, check_rules

LESS = "<="
EQUAL = "="
GREATER = ">="

_RELATIONS = (LESS, EQUAL, GREATER)


@dataclass(frozen=True)
class LinearProgram:
    """max objective . x subject to rows, over free rational variables.

    `variables` fixes the variable order (ties in the pivot rule follow
    it); `objective` maps variable -> coefficient (missing means 0);
    `constraints` is a tuple of (row, relation, rhs) with row a mapping
    variable -> coefficient and relation one of "<=", "=", ">=".
    """

    variables: tuple
    objective: dict
    constraints: tuple

    def __post_init__(self):
        known = set(self.variables)
        if len(known) != len(self.variables):
            raise ValueError("duplicate variable names")
        stray = sorted(set(self.objective) - known)
        if stray:
            raise ValueError("objective mentions unknown variables %s" % stray)
        for idx, (row, relation, _rhs) in enumerate(self.constraints):
            if relation not in _RELATIONS:
                raise ValueError(
                    "constraint %d: unknown relation %r" % (idx, relation))
            stray = sorted(set(row) - known)
            if stray:
                raise ValueError(
                    "constraint %d mentions unknown variables %s"
                    % (idx, stray))


OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


def _certify(lp, assignment, duals):
    """Exact optimality certificate, raising on any discrepancy.

    Checks primal feasibility, dual feasibility (equality per variable —
    the variables are free), the sign of each dual against its relation,
    equal objectives, and per-row complementary slackness.
    """
    totals = {v: ZERO for v in lp.variables}
    dual_value = ZERO
    for idx, (row, relation, rhs) in enumerate(lp.constraints):
        lhs = sum((coeff * assignment[v] for v, coeff in row.items()), ZERO)
        ok = (lhs <= rhs if relation == LESS
              else lhs >= rhs if relation == GREATER
              else lhs == rhs)
        if not ok:  # pragma: no cover - solver bug guard
            raise AssertionError("constraint %d violated by optimum" % idx)
        y = duals[idx]
        if relation == LESS and y < ZERO:  # pragma: no cover - bug guard
            raise AssertionError("dual %d has the wrong sign" % idx)
        if relation == GREATER and y > ZERO:  # pragma: no cover - bug guard
            raise AssertionError("dual %d has the wrong sign" % idx)
        if y * (rhs - lhs) != ZERO:  # pragma: no cover - bug guard
            raise AssertionError(
                "complementary slackness fails on row %d" % idx)
        if y != ZERO:
            dual_value += y * rhs
            for v, coeff in row.items():
                totals[v] += y * coeff
    for v in lp.variables:
        if totals[v] != lp.objective.get(v, ZERO):  # pragma: no cover
            raise AssertionError("dual infeasible at variable %s" % v)
    primal = sum((lp.objective.get(v, ZERO) * assignment[v]
                  for v in lp.variables), ZERO)
    if primal != dual_value:  # pragma: no cover - bug guard
        raise AssertionError("objective values of primal and dual differ")


def _pivot(tableau, basis, row, col):
    prow = tableau[row]
    inv = 1 / prow[col]
    if inv != 1:
        tableau[row] = prow = [x * inv for x in prow]
    for r, other in enumerate(tableau):
        if r == row:
            continue
        factor = other[col]
        if factor != 0:
            tableau[r] = [a - factor * b for a, b in zip(other, prow)]
    basis[row] = col


def _run_phase(tableau, basis, cost, allowed):
    """Maximize `cost` (a full-width row, rhs last) in place; Bland's rule.

    Returns True, or False when some improving column is unbounded.
    `allowed[j]` bars columns (the artificials, in phase two) from
    entering.
    """
    width = len(cost) - 1
    while True:
        enter = None
        for j in range(width):
            if allowed[j] and cost[j] > 0:
                enter = j
                break
        if enter is None:
            return True
        leave = None
        best = None
        for r, row in enumerate(tableau):
            coeff = row[enter]
            if coeff > 0:
                ratio = row[-1] / coeff
                if best is None or ratio < best or (
                        ratio == best and basis[r] < basis[leave]):
                    best = ratio
                    leave = r
        if leave is None:
            return False
        _pivot(tableau, basis, leave, enter)
        factor = cost[enter]
        if factor != 0:
            prow = tableau[leave]
            for j in range(width + 1):
                cost[j] = cost[j] - factor * prow[j]


def simplex(lp):
    """Exact optimum of `lp`: ("optimal", {var: value}) with the optimum
    certified against its dual, or ("infeasible", None) / ("unbounded",
    None).

    Dense two-phase tableau over rationals.  Bland's smallest-index rule
    decides every entering and leaving choice, so the run is deterministic
    and never cycles.  Free variables are handled by the usual split into
    a difference of two nonnegative columns.
    """
    nvars = len(lp.variables)
    position = {v: j for j, v in enumerate(lp.variables)}
    # columns: x+ | x- | one slack or surplus per inequality | artificials
    flips = []
    relations = []
    for _row, relation, rhs in lp.constraints:
        flip = rhs < ZERO
        flips.append(flip)
        if flip and relation != EQUAL:
            relation = LESS if relation == GREATER else GREATER
        relations.append(relation)
    slack_of = {}
    col = 2 * nvars
    for idx, relation in enumerate(relations):
        if relation != EQUAL:
            slack_of[idx] = col
            col += 1
    art_of = {}
    marker = {}
    for idx, relation in enumerate(relations):
        if relation == LESS:
            marker[idx] = slack_of[idx]
        else:
            art_of[idx] = col
            marker[idx] = col
            col += 1
    width = col

    tableau = []
    basis = []
    for idx, (row, _relation, rhs) in enumerate(lp.constraints):
        sign = -1 if flips[idx] else 1
        line = [_fast_q(0)] * (width + 1)
        for v, coeff in row.items():
            j = position[v]
            line[j] = _fast_q(sign * coeff.numerator, coeff.denominator)
            line[nvars + j] = -line[j]
        if idx in slack_of:
            line[slack_of[idx]] = _fast_q(1 if idx not in art_of else -1)
        if idx in art_of:
            line[art_of[idx]] = _fast_q(1)
        line[width] = _fast_q(sign * rhs.numerator, rhs.denominator)
        tableau.append(line)
        basis.append(art_of.get(idx, slack_of.get(idx)))

    if art_of:
        cost = [_fast_q(0)] * (width + 1)
        for idx in art_of:
            row = tableau[idx]
            for j in range(width + 1):
                cost[j] = cost[j] + row[j]
        for c in art_of.values():
            cost[c] = _fast_q(0)
        allowed = [True] * width
        _run_phase(tableau, basis, cost, allowed)
        if cost[width] != 0:
            return (INFEASIBLE, None)
        # Drive leftover artificials out of the basis: a zero-level basic
        # artificial could creep back up during phase two otherwise.  Rows
        # with no structural entry left are redundant and stay inert.
        artificial = set(art_of.values())
        for r, b in enumerate(basis):
            if b not in artificial:
                continue
            row = tableau[r]
            for j in range(2 * nvars + len(slack_of)):
                if row[j] != 0:
                    _pivot(tableau, basis, r, j)
                    break

    cost = [_fast_q(0)] * (width + 1)
    for v, coeff in lp.objective.items():
        j = position[v]
        cost[j] = _fast_q(coeff.numerator, coeff.denominator)
        cost[nvars + j] = -cost[j]
    for r, b in enumerate(basis):
        factor = cost[b]
        if factor != 0:
            row = tableau[r]
            for j in range(width + 1):
                cost[j] = cost[j] - factor * row[j]
    allowed = [True] * width
    for c in art_of.values():
        allowed[c] = False
    if not _run_phase(tableau, basis, cost, allowed):
        return (UNBOUNDED, None)

    values = [ZERO] * width
    for r, b in enumerate(basis):
        cell = tableau[r][width]
        values[b] = Fraction(int(cell.numerator), int(cell.denominator))
    assignment = {
        v: values[j] - values[nvars + j] for j, v in enumerate(lp.variables)
    }
    duals = []
    for idx in range(len(lp.constraints)):
        cell = -cost[marker[idx]]
        y = Fraction(int(cell.numerator), int(cell.denominator))
        duals.append(-y if flips[idx] else y)
    _certify(lp, assignment, duals)
    return (OPTIMAL, assignment)


# ---------------------------------------------------------------------------
# The bounded fast path.  Same optima, same certificates, smaller tableaus:
# singleton rows become variable bounds before the tableau is built, and the
# bounds are then enforced implicitly (nonbasic variables may rest at either
# end, leaving basic variables checked against both ends in the ratio test).


_FREE = "free"


def _presolve(lp):
    """Fold singleton rows into per-variable bounds and fixed values.

    Returns (verdict, fixed, bounds, rows, sources).  verdict is None,
    INFEASIBLE, or _FREE when some variable ends up with no lower bound
    (the caller then falls back to the plain tableau).  `fixed` maps
    variables to (value, fixing row index or None — None when the fix
    came from coinciding bounds); `bounds` gives (lo, hi) for the rest,
    hi possibly None for unbounded above; `rows` lists the surviving
    multi-variable constraints as (index, row, relation, rhs); `sources`
    is (lo_row, hi_row) naming, for every bounded variable, the
    constraint index that supplied its binding bound — folded rows still
    owe their duals, and this is how they get them back.
    """
    lo, hi, lo_row, hi_row = {}, {}, {}, {}
    fixed = {}
    pending = []
    for idx, (row, relation, rhs) in enumerate(lp.constraints):
        live = {v: a for v, a in row.items() if a != ZERO}
        pending.append((idx, live, relation, rhs))
    while True:
        rows = []
        progress = False
        for idx, row, relation, rhs in pending:
            gone = [v for v in row if v in fixed]
            if gone:
                row = dict(row)
                for v in gone:
                    rhs = rhs - row.pop(v) * fixed[v][0]
            if not row:
                ok = (rhs >= ZERO if relation == LESS
                      else rhs <= ZERO if relation == GREATER
                      else rhs == ZERO)
                if not ok:
                    return (INFEASIBLE, None, None, None, None)
                continue
            if len(row) > 1:
                rows.append((idx, row, relation, rhs))
                continue
            (v, a), = row.items()
            bound = rhs / a
            kind = relation
            if a < ZERO and relation != EQUAL:
                kind = LESS if relation == GREATER else GREATER
            if kind == EQUAL:
                if (v in lo and bound < lo[v]) or (v in hi and bound > hi[v]):
                    return (INFEASIBLE, None, None, None, None)
                fixed[v] = (bound, idx)
                progress = True
                continue
            if kind == LESS:
                if v not in hi or bound < hi[v]:
                    hi[v] = bound
                    hi_row[v] = idx
            else:
                if v not in lo or bound > lo[v]:
                    lo[v] = bound
                    lo_row[v] = idx
            if v in lo and v in hi:
                if lo[v] > hi[v]:
                    return (INFEASIBLE, None, None, None, None)
                if lo[v] == hi[v]:
                    fixed[v] = (lo[v], None)
                    progress = True
        pending = rows
        if not progress:
            break
    bounds = {}
    for v in lp.variables:
        if v in fixed:
            continue
        if v not in lo:
            return (_FREE, None, None, None, None)
        bounds[v] = (lo[v], hi.get(v))
    return (None, fixed, bounds, pending, (lo_row, hi_row))


def _complement(tableau, cost, col, u, flags):
    """Re-express column `col` through its distance from the upper bound."""
    for row in tableau:
        a = row[col]
        if a != 0:
            row[-1] = row[-1] - u * a
            row[col] = -a
    a = cost[col]
    if a != 0:
        cost[-1] = cost[-1] - u * a
        cost[col] = -a
    flags[col] = not flags[col]


def _run_bounded(tableau, basis, cost, allowed, ubound, flags):
    """Bland-rule phase over a tableau with implicit upper bounds.

    Entering: lowest-index improving column.  The ratio test weighs three
    exits — a basic variable reaching zero, a basic variable reaching its
    upper bound (the column is complemented on the way out), or the
    entering variable hitting its own bound (no pivot, just a
    complement).  Returns False when no exit limits an improving column.
    """
    width = len(cost) - 1
    while True:
        enter = None
        for j in range(width):
            if allowed[j] and cost[j] > 0:
                enter = j
                break
        if enter is None:
            return True
        leave = None
        leave_up = False
        best = None
        for r, row in enumerate(tableau):
            a = row[enter]
            if a > 0:
                ratio = row[-1] / a
                up = False
            elif a < 0:
                cap = ubound[basis[r]]
                if cap is None:
                    continue
                ratio = (cap - row[-1]) / -a
                up = True
            else:
                continue
            if best is None or ratio < best or (
                    ratio == best and basis[r] < basis[leave]):
                best = ratio
                leave = r
                leave_up = up
        own = ubound[enter]
        if best is None and own is None:
            return False
        if best is None or (own is not None and own < best):
            _complement(tableau, cost, enter, own, flags)
            continue
        if leave_up:
            k = basis[leave]
            row = tableau[leave]
            row[-1] = row[-1] - ubound[k]
            row[k] = -row[k]
            flags[k] = not flags[k]
        _pivot(tableau, basis, leave, enter)
        factor = cost[enter]
        if factor != 0:
            prow = tableau[leave]
            for j in range(width + 1):
                cost[j] = cost[j] - factor * prow[j]


def _bounded_state(variables, rows, lows, highs):
    """Tableau state for the bounded path, reusable across objectives.

    `rows` holds only multi-variable constraints (original indices kept);
    every variable has a finite lower bound in `lows` and an optional
    upper bound in `highs`.  The state carries everything needed to aim
    a new objective at the same tableau or to pin an extra equality row
    that the current point already satisfies.
    """
    nvars = len(variables)
    position = {v: j for j, v in enumerate(variables)}
    shifted = []
    flips = []
    relations = []
    for _idx, row, relation, rhs in rows:
        rhs = rhs - sum((a * lows[v] for v, a in row.items()), ZERO)
        flip = rhs < ZERO
        if flip and relation != EQUAL:
            relation = LESS if relation == GREATER else GREATER
        shifted.append(rhs)
        flips.append(flip)
        relations.append(relation)
    slack_of = {}
    col = nvars
    for i, relation in enumerate(relations):
        if relation != EQUAL:
            slack_of[i] = col
            col += 1
    art_of = {}
    marker = {}
    for i, relation in enumerate(relations):
        if relation == LESS:
            marker[i] = slack_of[i]
        else:
            art_of[i] = col
            marker[i] = col
            col += 1
    width = col

    ubound = [None] * width
    for v, j in position.items():
        cap = highs[v]
        if cap is not None:
            span = cap - lows[v]
            ubound[j] = _fast_q(span.numerator, span.denominator)
    tableau = []
    basis = []
    for i, (_idx, row, _relation, _rhs) in enumerate(rows):
        sign = -1 if flips[i] else 1
        line = [_fast_q(0)] * (width + 1)
        for v, coeff in row.items():
            line[position[v]] = _fast_q(sign * coeff.numerator,
                                        coeff.denominator)
        if i in slack_of:
            line[slack_of[i]] = _fast_q(1 if i not in art_of else -1)
        if i in art_of:
            line[art_of[i]] = _fast_q(1)
        rhs = shifted[i]
        line[width] = _fast_q(sign * rhs.numerator, rhs.denominator)
        tableau.append(line)
        basis.append(art_of.get(i, slack_of.get(i)))
    return {
        "variables": variables,
        "position": position,
        "rows": list(rows),
        "lows": lows,
        "flips": flips,
        "marker": dict(marker),
        "arts": set(art_of.values()),
        "structural": nvars + len(slack_of),
        "tableau": tableau,
        "basis": basis,
        "flags": [False] * width,
        "ubound": ubound,
        "width": width,
        "cost": None,
    }


def _phase_one(state):
    """Drive the artificials to zero; False means infeasible."""
    tableau, basis = state["tableau"], state["basis"]
    width = state["width"]
    arts = state["arts"]
    if not arts:
        return True
    cost = [_fast_q(0)] * (width + 1)
    for r, b in enumerate(basis):
        if b in arts:
            row = tableau[r]
            for j in range(width + 1):
                cost[j] = cost[j] + row[j]
    for c in arts:
        cost[c] = _fast_q(0)
    if cost[width] != 0:
        allowed = [True] * width
        _run_bounded(tableau, basis, cost, allowed,
                     state["ubound"], state["flags"])
        if cost[width] != 0:
            return False
    for r, b in enumerate(basis):
        if b not in arts:
            continue
        row = tableau[r]
        for j in range(state["structural"]):
            if row[j] != 0:
                _pivot(tableau, basis, r, j)
                break
    return True


def _aim(state, objective):
    """Point the tableau at a fresh x-space objective."""
    tableau, basis = state["tableau"], state["basis"]
    width = state["width"]
    flags = state["flags"]
    position = state["position"]
    cost = [_fast_q(0)] * (width + 1)
    for v, coeff in objective.items():
        j = position[v]
        cell = _fast_q(coeff.numerator, coeff.denominator)
        cost[j] = -cell if flags[j] else cell
    for r, b in enumerate(basis):
        factor = cost[b]
        if factor != 0:
            row = tableau[r]
            for j in range(width + 1):
                cost[j] = cost[j] - factor * row[j]
    state["cost"] = cost


def _climb(state):
    """Optimize the aimed objective; False means unbounded."""
    allowed = [True] * state["width"]
    for c in state["arts"]:
        allowed[c] = False
    return _run_bounded(state["tableau"], state["basis"], state["cost"],
                        allowed, state["ubound"], state["flags"])


def _pin_equality(state, row, rhs, idx):
    """Append an equality row the current point satisfies exactly.

    The row arrives in x-space over the state's variables; it is shifted,
    complement-adjusted, reduced against the basis (which must zero its
    right-hand side — the caller promises the current point meets it),
    and parked on a fresh barred artificial.  The artificial is then
    immediately pivoted back out (degenerately) wherever the row still
    touches an allowed column — a basic artificial would otherwise be
    free to grow during later climbs, silently breaking the equality.
    """
    position = state["position"]
    lows = state["lows"]
    flags = state["flags"]
    ubound = state["ubound"]
    width = state["width"]
    line = [_fast_q(0)] * (width + 2)
    rest = rhs - sum((a * lows[v] for v, a in row.items()), ZERO)
    cell = _fast_q(rest.numerator, rest.denominator)
    for v, coeff in row.items():
        j = position[v]
        a = _fast_q(coeff.numerator, coeff.denominator)
        if flags[j]:
            cell = cell - a * ubound[j]
            a = -a
        line[j] = a
    line[width + 1] = cell
    for r, other in enumerate(state["tableau"]):
        other.insert(width, _fast_q(0))
    for r, b in enumerate(state["basis"]):
        factor = line[b]
        if factor != 0:
            prow = state["tableau"][r]
            for j in range(width + 2):
                line[j] = line[j] - factor * prow[j]
    if line[width + 1] != 0:  # pragma: no cover - caller contract
        raise AssertionError("pinned row not satisfied by current point")
    line[width] = _fast_q(1)
    state["tableau"].append(line)
    state["basis"].append(width)
    state["flags"].append(False)
    state["ubound"].append(None)
    state["arts"].add(width)
    state["marker"][len(state["rows"])] = width
    state["rows"].append((idx, dict(row), EQUAL, rhs))
    state["flips"].append(False)
    state["width"] = width + 1
    r = len(state["tableau"]) - 1
    for j in range(state["structural"]):
        if line[j] != 0:
            _pivot(state["tableau"], state["basis"], r, j)
            break


def _extract(state):
    """The current basic solution, mapped back to x-space Fractions."""
    values = [_fast_q(0)] * state["width"]
    for r, b in enumerate(state["basis"]):
        values[b] = state["tableau"][r][-1]
    assignment = {}
    for v, j in state["position"].items():
        y = values[j]
        if state["flags"][j]:
            y = state["ubound"][j] - y
        assignment[v] = state["lows"][v] + Fraction(int(y.numerator),
                                                    int(y.denominator))
    return assignment


def _row_duals(state):
    """Dual values of the tableau rows, keyed by original row index."""
    cost = state["cost"]
    duals = {}
    for i, (idx, _row, _relation, _rhs) in enumerate(state["rows"]):
        cell = -cost[state["marker"][i]]
        y = Fraction(int(cell.numerator), int(cell.denominator))
        duals[idx] = -y if state["flips"][i] else y
    return duals


def _bounded_simplex(variables, objective, rows, lows, highs):
    """One-shot solve on a fresh bounded state: (kind, assignment, duals)."""
    state = _bounded_state(variables, rows, lows, highs)
    if not _phase_one(state):
        return (INFEASIBLE, None, None)
    _aim(state, objective)
    if not _climb(state):
        return (UNBOUNDED, None, None)
    return (OPTIMAL, _extract(state), _row_duals(state))


def _settle(lp, fixed, bounds, sources, assignment, duals_by_row):
    """Certify a bounded-path optimum against the original program.

    The folded rows still owe duals: whatever reduced cost is left at a
    variable is routed to the constraint that supplied its binding bound
    (or fixed it).  A routed row may mention variables fixed before its
    own, so the bounded variables go first and the fixed ones follow in
    reverse fixing order — each routing then only touches entries that
    are still to be processed.
    """
    lo_row, hi_row = sources
    duals = [ZERO] * len(lp.constraints)
    totals = {v: ZERO for v in lp.variables}
    for idx, y in duals_by_row.items():
        duals[idx] = y
        if y != ZERO:
            for v, coeff in lp.constraints[idx][0].items():
                totals[v] += y * coeff
    ordered = [v for v in lp.variables if v not in fixed]
    ordered.extend(reversed(list(fixed)))
    for v in ordered:
        gap = lp.objective.get(v, ZERO) - totals[v]
        if gap == ZERO:
            continue
        if v in fixed and fixed[v][1] is not None:
            idx = fixed[v][1]
        elif gap > ZERO:
            idx = hi_row.get(v)
        else:
            idx = lo_row.get(v)
        if idx is None:  # pragma: no cover - solver bug guard
            raise AssertionError("no source row for the dual at %s" % v)
        y = gap / lp.constraints[idx][0][v]
        duals[idx] += y
        for u, coeff in lp.constraints[idx][0].items():
            totals[u] += y * coeff
    _certify(lp, assignment, duals)


def _solve_program(lp):
    """simplex() for the refinement loop: presolve into bounds, run the
    bounded tableau, hand back duals for the folded singleton rows, and
    certify the result against the original program.  Falls back to the
    plain path when some variable has no lower bound to fold."""
    verdict, fixed, bounds, rows, sources = _presolve(lp)
    if verdict == INFEASIBLE:
        return (INFEASIBLE, None)
    if verdict == _FREE:
        return simplex(lp)
    if rows:
        variables = tuple(v for v in lp.variables if v in bounds)
        objective = {v: lp.objective[v] for v in variables
                     if v in lp.objective}
        lows = {v: bounds[v][0] for v in variables}
        highs = {v: bounds[v][1] for v in variables}
        kind, partial, duals_by_row = _bounded_simplex(
            variables, objective, rows, lows, highs)
        if kind != OPTIMAL:
            return (kind, None)
    else:
        partial, duals_by_row = {}, {}
        for v, (lo, hi) in bounds.items():
            if lp.objective.get(v, ZERO) > ZERO:
                if hi is None:
                    return (UNBOUNDED, None)
                partial[v] = hi
            else:
                partial[v] = lo
    assignment = {v: value for v, (value, _idx) in fixed.items()}
    assignment.update(partial)
    _settle(lp, fixed, bounds, sources, assignment, duals_by_row)
    return (OPTIMAL, assignment)


# ---------------------------------------------------------------------------
# The relaxed-conservation solver.


def _program(net, fluid, lower, upper, objective):
    """The linear program over throughputs for the given fluid set.

    Bounds, capacities (with equality on fluid input / saturated output
    arcs), weak conservation at splitters, the two fairness rules, strong
    maximization as equalities, plus any extra lower bounds (on arcs still
    fluid) and upper bounds (on arcs saturated from the start).
    """
    rows = []
    seen = set()

    def add(row, relation, rhs):
        key = (tuple(sorted(row.items())), relation, rhs)
        if key not in seen:
            seen.add(key)
            rows.append((dict(row), relation, rhs))

    for aid in sorted(net.arcs):
        add({aid: ONE}, GREATER, ZERO)
        add({aid: ONE}, LESS, ONE)
    for node in sorted(net.splitters()):
        row = {}
        for aid in net.out_arcs(node):
            row[aid] = row.get(aid, ZERO) + ONE
        for aid in net.in_arcs(node):
            row[aid] = row.get(aid, ZERO) - ONE
        add(row, LESS, ZERO)
        ins = net.in_arcs(node)
        for uv in ins:
            if uv in fluid:
                continue
            for wv in ins:
                if wv != uv:
                    add({wv: ONE, uv: -ONE}, LESS, ZERO)
        outs = net.out_arcs(node)
        for uv in outs:
            if uv not in fluid:
                continue
            for uw in outs:
                if uw != uv:
                    add({uw: ONE, uv: -ONE}, LESS, ZERO)
        if any(uv not in fluid for uv in ins):
            for vw in outs:
                if vw in fluid:
                    add({vw: ONE}, EQUAL, ONE)
    for node in sorted(net.inputs()):
        for aid in net.out_arcs(node):
            add({aid: ONE}, LESS, net.caps[node])
            if aid in fluid:
                add({aid: ONE}, EQUAL, net.caps[node])
    for node in sorted(net.outputs()):
        for aid in net.in_arcs(node):
            add({aid: ONE}, LESS, net.caps[node])
            if aid not in fluid:
                add({aid: ONE}, EQUAL, net.caps[node])
    for aid in sorted(lower):
        if aid in fluid:
            add({aid: ONE}, GREATER, lower[aid])
    for aid in sorted(upper):
        add({aid: ONE}, LESS, upper[aid])
    return LinearProgram(tuple(sorted(net.arcs)), dict(objective),
                         tuple(rows))


def throughput_program(net, fluid):
    """The program each refinement round solves: maximize total throughput
    into the outputs subject to the rules for `fluid`."""
    objective = {
        aid: ONE for aid in sorted(net.arcs)
        if net.kind(net.arcs[aid].head) == OUTPUT
    }
    return _program(net, frozenset(fluid), {}, {}, objective)


def _lex_solve(lp, secondary):
    """Optimum of `lp`, then the best `secondary` value among its optima.

    Two exact optima on one tableau: after the first solve its objective
    value is pinned as an equality row — already satisfied, so the
    second climb continues from the first optimal basis instead of
    starting over.  `lp` must be feasible with both objectives bounded
    on it, so anything but two optima is an internal error.
    """
    primary = lp.objective

    def cold(reached):
        tie = LinearProgram(
            lp.variables, secondary,
            lp.constraints + ((dict(primary), EQUAL, reached),))
        kind, best = _solve_program(tie)
        if kind != OPTIMAL:  # pragma: no cover - feasibility is invariant
            raise AssertionError("tie-break program came back %s" % kind)
        return best

    verdict, fixed, bounds, rows, sources = _presolve(lp)
    if verdict is not None or not rows:
        kind, first = _solve_program(lp)
        if kind != OPTIMAL:  # pragma: no cover - feasibility invariant
            raise AssertionError("throughput program came back %s" % kind)
        return cold(sum((first[aid] for aid in primary), ZERO))

    variables = tuple(v for v in lp.variables if v in bounds)
    lows = {v: bounds[v][0] for v in variables}
    highs = {v: bounds[v][1] for v in variables}
    state = _bounded_state(variables, rows, lows, highs)
    if not _phase_one(state):  # pragma: no cover - feasibility invariant
        raise AssertionError("throughput program came back infeasible")
    held = {v: value for v, (value, _idx) in fixed.items()}
    _aim(state, {v: primary[v] for v in variables if v in primary})
    if not _climb(state):  # pragma: no cover - programs are bounded
        raise AssertionError("throughput program came back unbounded")
    first = dict(held)
    first.update(_extract(state))
    _settle(lp, fixed, bounds, sources, first, _row_duals(state))
    reached = sum((first[aid] for aid in primary), ZERO)

    pin = {v: a for v, a in primary.items() if v not in fixed}
    if len(pin) == 1:
        return cold(reached)
    tie = LinearProgram(
        lp.variables, secondary,
        lp.constraints + ((dict(primary), EQUAL, reached),))
    if pin:
        rest = reached - sum(
            (primary[v] * held[v] for v in primary if v in fixed), ZERO)
        _pin_equality(state, pin, rest, len(lp.constraints))
    _aim(state, {v: secondary[v] for v in variables if v in secondary})
    if not _climb(state):  # pragma: no cover - programs are bounded
        raise AssertionError("tie-break program came back unbounded")
    best = dict(held)
    best.update(_extract(state))
    _settle(tie, fixed, bounds, sources, best, _row_duals(state))
    return best


def _lex_optimize(net, fluid, lower, upper):
    """Best throughput-to-outputs, then highest fluid minus saturated sum."""
    primary = {
        aid: ONE for aid in sorted(net.arcs)
        if net.kind(net.arcs[aid].head) == OUTPUT
    }
    secondary = {
        aid: (ONE if aid in fluid else -ONE) for aid in sorted(net.arcs)
    }
    return _lex_solve(_program(net, fluid, lower, upper, primary), secondary)


def _starved_splitter(net, t):
    for node in sorted(net.splitters()):
        received = sum((t[aid] for aid in net.in_arcs(node)), ZERO)
        sent = sum((t[aid] for aid in net.out_arcs(node)), ZERO)
        if sent < received:
            return node
    return None


def _arc_to_saturate(net, t, fluid, node):
    """The fluid arc around a starved splitter that can be blocked.

    In order: a leaving fluid arc pinned by an equal saturated partner
    entering the same head splitter; a leaving fluid arc sitting exactly
    at its output's capacity; the stronger incoming arc if fluid; the
    weaker one on a throughput tie.  Saturating the chosen arc keeps the
    state a pre-steady-state.  The remaining configurations contradict
    optimality of the tie-broken optimum, so reaching one means the
    solver itself is broken.
    """
    e1, e2 = sorted(net.in_arcs(node), key=lambda a: (t[a], a))
    e3, e4 = sorted(net.out_arcs(node), key=lambda a: (t[a], a))
    for e in (e3, e4):
        if e not in fluid:
            continue
        head = net.arcs[e].head
        if net.kind(head) != OUTPUT:
            for partner in net.in_arcs(head):
                if partner != e and partner not in fluid \
                        and t[partner] == t[e]:
                    return e
    for e in (e3, e4):
        if e in fluid and net.kind(net.arcs[e].head) == OUTPUT \
                and t[e] == net.caps[net.arcs[e].head]:
            return e
    loose = (e3 in fluid and t[e3] < ONE) or (e4 in fluid and t[e4] < ONE)
    if loose:  # pragma: no cover - contradicts optimality
        raise AssertionError("a leaving arc of %s still had headroom" % node)
    if e2 in fluid:
        return e2
    if e1 in fluid and t[e1] == t[e2]:
        return e1
    raise AssertionError(  # pragma: no cover - contradicts optimality
        "no saturable arc at starved splitter %s" % node)


def _refine(net, fluid, lower, upper):
    budget = len(net.arcs) + 1
    iterations = 0
    while True:
        if iterations >= budget:  # pragma: no cover - bounded by theory
            raise AssertionError("relaxed solver exceeded its round bound")
        iterations += 1
        t = _lex_optimize(net, fluid, lower, upper)
        node = _starved_splitter(net, t)
        if node is None:
            state = SteadyState(t, fluid)
            leftovers = check_rules(net, state, "R8S")
            if leftovers:  # pragma: no cover - would be an internal bug
                raise AssertionError(
                    "relaxed solver returned an invalid state: %s"
                    % leftovers[0])
            return state, iterations
        fluid = fluid - {_arc_to_saturate(net, t, fluid, node)}


def starting_state(net):
    """The everything-fluid pre-steady-state the iteration begins from:
    input arcs carry their input's capacity, every other arc is empty."""
    t = {}
    for aid, arc in net.arcs.items():
        if net.kind(arc.tail) == INPUT:
            t[aid] = net.caps[arc.tail]
        else:
            t[aid] = ZERO
    return SteadyState(t, frozenset(net.arcs))


def pre_steady_solve(net):
    """Steady-state via repeated exact LP solves; returns (state, rounds).

    Starts from the everything-fluid pre-steady-state and saturates one
    arc per round, so at most |E| + 1 rounds run.  The result passes the
    strong-maximization rule check, and its terminal throughputs agree
    exactly with the walking solver's — the two are interchangeable
    oracles for each other.
    """
    _require_solvable(net)
    return _refine(net, frozenset(net.arcs), {}, {})


def constrained_pre_steady_solve(net, lower, upper, start):
    """Steady-state reachable below `start`: only fluid arcs of `start`
    may stay fluid, fluid arcs keep t >= lower, and upper bounds hold
    throughout.

    `start` must be a pre-steady-state satisfying the bounds.  A lower
    bound applies to its arc only while that arc remains fluid; upper
    bounds apply always (callers bound the arcs already saturated at the
    start, which stay saturated anyway).  With no bounds and the
    everything-fluid start this is exactly pre_steady_solve.
    """
    _require_solvable(net)
    bad = check_rules(net, start, "pre")
    if bad:
        raise ValueError(
            "starting state is not a pre-steady-state: %s" % bad[0])
    stray = sorted(set(lower) - set(net.arcs)) + sorted(
        set(upper) - set(net.arcs))
    if stray:
        raise ValueError("bounds mention unknown arcs %s" % stray)
    for aid, bound in sorted(lower.items()):
        if aid in start.fluid and start.t[aid] < bound:
            raise ValueError("start violates the lower bound on %s" % aid)
    for aid, bound in sorted(upper.items()):
        if start.t[aid] > bound:
            raise ValueError("start violates the upper bound on %s" % aid)
    state, _ = _refine(net, start.fluid, dict(lower), dict(upper))
    return state
