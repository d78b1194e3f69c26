"""Brute-force reference solvers on tiny deterministic instances.

``brute_force_min_T`` searches the full binary action-sequence space for
the fastest burst completion; equivalent search prefixes are merged by
deduplicating identical queue states per slot, which leaves the result
identical to plain enumeration.  ``verify_nstep_identity`` checks the
window-throughput bookkeeping identity (delivered equals available work
minus the surviving one-sided backlog) on instances where exactly one side
of the split stays saturated, and the strategy-ranking equivalence between
window throughput and the drift objective.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from casplit.engine import Simulation
from casplit.fuzzy_pid import SplitAction, PCC_ONLY_ACTION, SCC_ONLY_ACTION
from casplit.stack import ProtocolStack

MAX_L = 14
MAX_SCC = 2
MAX_SLOTS = 24

COMPLEMENTARY_ACTIONS = (PCC_ONLY_ACTION, SCC_ONLY_ACTION)
ALL_ACTIONS = (PCC_ONLY_ACTION, SCC_ONLY_ACTION, SplitAction(1, 1), SplitAction(0, 0))


@dataclass
class TinyInstance:
    """Desk-sized deterministic instance; capacities are explicit per slot."""

    l: int
    n_scc: int
    caps: list[list[int]]  # one row per carrier (PCC first), one column per slot
    d_xn: int = 0
    max_slots: int = MAX_SLOTS
    preseed_rlc: list[int] = field(default_factory=list)
    label: str = ""

    def __post_init__(self) -> None:
        if not 1 <= self.l <= MAX_L:
            raise ValueError(f"l must be in [1, {MAX_L}]")
        if not 1 <= self.n_scc <= MAX_SCC:
            raise ValueError(f"n_scc must be in [1, {MAX_SCC}]")
        if self.max_slots > MAX_SLOTS:
            raise ValueError(f"max_slots bounded by {MAX_SLOTS} (search space cap)")
        if len(self.caps) != 1 + self.n_scc:
            raise ValueError("caps must cover every carrier")
        if any(len(row) < self.max_slots for row in self.caps):
            raise ValueError("caps rows must span max_slots")
        if self.d_xn < 0:
            raise ValueError("d_xn must be non-negative")

    def caps_array(self, n_slots: int | None = None) -> np.ndarray:
        n = self.max_slots if n_slots is None else n_slots
        if any(len(row) < n for row in self.caps):
            raise ValueError(f"instance capacities span fewer than {n} slots")
        return np.array([row[:n] for row in self.caps], dtype=np.int64)


@dataclass
class OracleResult:
    feasible: bool
    t_star: int | None
    actions: list[SplitAction]
    per_slot_throughput: list[int]
    states_explored: int = 0


class ScriptedController:
    """Plays back a fixed action list (witness replay)."""

    name = "scripted"

    def __init__(self, actions: list[SplitAction]):
        self.actions = actions

    def decide(self, t: int, b: int) -> SplitAction:
        return self.actions[t] if t < len(self.actions) else self.actions[-1]

    def observe(self, t, delivered, rlc_occ, inflight) -> None:
        pass


def _step_counts(state, action: SplitAction, caps_t, n_scc: int, d_xn: int):
    """Count-level mirror of one protocol-stack slot; returns (state, served)."""
    pdcp, rlc, pipes = state
    rlc = list(rlc)
    pipes = [list(p) for p in pipes]
    # dispatch: PCC head first, then one packet per SCC in index order
    if action.a_p and pdcp:
        pdcp -= 1
        rlc[0] += 1
    if action.a_s:
        for s in range(n_scc):
            if not pdcp:
                break
            pdcp -= 1
            if d_xn:
                pipes[s][d_xn] += 1
            else:
                pipes[s][0] += 1
    # Xn arrivals due this slot
    for s in range(n_scc):
        rlc[1 + s] += pipes[s][0]
        pipes[s] = pipes[s][1:] + [0]
    # serve
    served = 0
    for c in range(1 + n_scc):
        take = min(caps_t[c], rlc[c])
        rlc[c] -= take
        served += take
    new_state = (pdcp, tuple(rlc), tuple(tuple(p) for p in pipes))
    return new_state, served


def brute_force_min_T(inst: TinyInstance, allow_noncomplementary: bool = False) -> OracleResult:
    """Exhaustive minimum-completion-time search over action sequences.

    By default the search space is restricted to complementary actions;
    the flag widens it to the full two-bit action set to quantify the cost
    of that restriction.
    """
    if inst.preseed_rlc and any(inst.preseed_rlc):
        raise ValueError("min-T search expects an initially empty stack")
    n_car = 1 + inst.n_scc
    actions = ALL_ACTIONS if allow_noncomplementary else COMPLEMENTARY_ACTIONS
    pipe0 = tuple(tuple([0] * (inst.d_xn + 1)) for _ in range(inst.n_scc))
    start = (inst.l, (0,) * n_car, pipe0)
    done = lambda st: st[0] == 0 and not any(st[1]) and not any(sum(p) for p in st[2])

    frontier = {start: None}
    parents: list[dict] = [dict(frontier)]
    explored = 0
    for t in range(inst.max_slots):
        caps_t = [inst.caps[c][t] for c in range(n_car)]
        nxt: dict = {}
        winner = None
        for state in frontier:
            for action in actions:
                ns, _ = _step_counts(state, action, caps_t, inst.n_scc, inst.d_xn)
                explored += 1
                if ns not in nxt:
                    nxt[ns] = (state, action)
                    if winner is None and done(ns):
                        winner = ns
        parents.append(nxt)
        if winner is not None:
            seq: list[SplitAction] = []
            node = winner
            for layer in range(t + 1, 0, -1):
                prev, act = parents[layer][node]
                seq.append(act)
                node = prev
            seq.reverse()
            _, per_slot = replay_counts(inst, seq)
            return OracleResult(True, t + 1, seq, per_slot, explored)
        frontier = nxt
    return OracleResult(False, None, [], [], explored)


def replay_counts(inst: TinyInstance, actions: list[SplitAction]):
    """Replay through the count-level transition; returns (state, per-slot served)."""
    n_car = 1 + inst.n_scc
    pipe0 = tuple(tuple([0] * (inst.d_xn + 1)) for _ in range(inst.n_scc))
    state = (inst.l, (0,) * n_car, pipe0)
    served = []
    for t, action in enumerate(actions):
        caps_t = [inst.caps[c][t] for c in range(n_car)]
        state, s = _step_counts(state, action, caps_t, inst.n_scc, inst.d_xn)
        served.append(s)
    return state, served


def replay_witness(inst: TinyInstance, actions: list[SplitAction]):
    """Replay a witness through the full protocol stack (independent route).

    Returns (completion_slot_count or None, per-slot deliveries).
    """
    sim = Simulation(
        l=inst.l, arrival_mode="burst", arrival_rate=0, n_scc=inst.n_scc,
        d_xn=inst.d_xn, caps=inst.caps_array(len(actions)),
        controller=ScriptedController(actions), max_slots=len(actions),
        stop_on_complete=True,
    )
    result = sim.run()
    t = result.completion_slot + 1 if result.completed else None
    return t, result.delivered.tolist()


@dataclass
class IdentityReport:
    valid_case: str | None  # "case1", "case2" or None
    holds: bool | None
    delta_h: int
    workload: int
    delivered: int
    b0: int
    dispatched: list[int]
    violations: list[str] = field(default_factory=list)


def verify_nstep_identity(inst: TinyInstance, pattern: list[SplitAction],
                          n: int) -> IdentityReport:
    """Check ``delivered == workload - |backlog drift|`` over an n-slot window.

    The instance runs with a saturated per-slot source and the repeating
    action pattern through the real protocol stack.  The identity applies
    when exactly one side stays saturated for the whole window (serving at
    capacity every slot) while the other side ends the window empty;
    assumption violations are reported, not raised.
    """
    if n > inst.max_slots:
        raise ValueError("window exceeds instance horizon")
    n_car = 1 + inst.n_scc
    preseed = list(inst.preseed_rlc) if inst.preseed_rlc else [0] * n_car
    stack = ProtocolStack(inst.n_scc, inst.d_xn, preseed)
    rate = 1 + inst.n_scc  # covers the widest dispatch a pattern can ask for
    b0 = preseed[0] - sum(preseed[1:])

    dispatched = [0] * n_car
    pcc_at_cap = True
    scc_at_cap = True
    delivered = 0
    for t in range(n):
        action = pattern[t % len(pattern)]
        stack.pdcp_ingest(rate)
        moved = stack.pdcp_dispatch(action.a_p, action.a_s, t)
        for c in range(n_car):
            dispatched[c] += len(moved[c])
        stack.xn_tick(t)
        served = stack.rlc_serve([inst.caps[c][t] for c in range(n_car)])
        delivered += stack.ue_receive(served)
        if len(served[0]) != inst.caps[0][t]:
            pcc_at_cap = False
        for s in range(inst.n_scc):
            if len(served[1 + s]) != inst.caps[1 + s][t]:
                scc_at_cap = False

    occ = stack.rlc_occupancy()
    inflight = stack.xn_inflight()
    sccs_end_empty = not any(occ[1:]) and not any(inflight)
    pcc_end_empty = occ[0] == 0

    violations = []
    case = None
    if pcc_at_cap and sccs_end_empty:
        case = "case1"
        cap_sum = sum(inst.caps[0][:n])
        delta_h = preseed[0] + dispatched[0] - cap_sum
    elif scc_at_cap and pcc_end_empty:
        case = "case2"
        delta_h = 0
        for s in range(inst.n_scc):
            cap_sum = sum(inst.caps[1 + s][:n])
            delta_h -= preseed[1 + s] + dispatched[1 + s] - cap_sum
    else:
        if not pcc_at_cap:
            violations.append("pcc served below capacity in the window")
        if not sccs_end_empty:
            violations.append("scc backlog or in-flight packets survive the window")
        if not scc_at_cap:
            violations.append("an scc served below capacity in the window")
        if not pcc_end_empty:
            violations.append("pcc backlog survives the window")
        return IdentityReport(None, None, 0, 0, delivered, b0, dispatched, violations)

    workload = sum(preseed) + sum(dispatched)
    holds = delivered == workload - abs(delta_h)
    return IdentityReport(case, holds, delta_h, workload, delivered, b0, dispatched)


def drift_objective(inst: TinyInstance, pattern: list[SplitAction], n: int) -> float:
    """Window-mean form of the one-step drift objective for a pattern.

    Uses the instance's (constant) capacities as the service drift and the
    window-mean action shares; smaller is predicted-better.
    """
    for row in inst.caps:
        if len(set(row[:n])) != 1:
            raise ValueError("drift objective needs constant capacities")
    drift = inst.caps[0][0] - sum(inst.caps[1 + s][0] for s in range(inst.n_scc))
    slots = [pattern[t % len(pattern)] for t in range(n)]
    mean_p = sum(a.a_p for a in slots) / n
    mean_s = sum(a.a_s for a in slots) / n
    b0 = (inst.preseed_rlc[0] - sum(inst.preseed_rlc[1:])) if inst.preseed_rlc else 0
    return abs(b0 + (n + 1) * (mean_p - inst.n_scc * mean_s - drift))


def ranking_consistent(inst: TinyInstance, patterns: list[list[SplitAction]],
                       n: int) -> tuple[bool, list[tuple[float, int]]]:
    """True when ascending drift objective never inverts descending window
    throughput across the given stationary patterns (ties allowed)."""
    rows = []
    for pattern in patterns:
        report = verify_nstep_identity(inst, pattern, n)
        if report.valid_case is None:
            raise ValueError(f"pattern breaks the identity assumptions: {report.violations}")
        rows.append((drift_objective(inst, pattern, n), report.delivered))
    ok = all(
        not (ri[0] < rj[0] and ri[1] < rj[1])
        for ri in rows for rj in rows
    )
    return ok, rows


# -- instance generators ------------------------------------------------------


def gen_min_t_instance(rng: np.random.Generator, label: str = "") -> TinyInstance:
    """Random burst instance for near-optimality comparisons.

    Capacities are constant per carrier with at most one brief early outage
    window, so every carrier remains usable and completion is guaranteed
    well inside the horizon.
    """
    horizon = 10 * MAX_SLOTS  # room for slower splitters to finish too
    l = int(rng.integers(4, 13))
    n_scc = int(rng.integers(1, 3))
    d_xn = int(rng.integers(0, 3))
    ratio = int(rng.integers(1, 3))
    caps = [[ratio] * horizon]
    for _ in range(n_scc):
        caps.append([1] * horizon)
    if rng.random() < 0.5:
        victim = int(rng.integers(0, 1 + n_scc))
        start = int(rng.integers(0, 6))
        length = int(rng.integers(1, 4))
        for t in range(start, start + length):
            caps[victim][t] = 0
    return TinyInstance(l=l, n_scc=n_scc, caps=caps, d_xn=d_xn, label=label)


def gen_identity_instances(count: int) -> list[tuple[TinyInstance, list[SplitAction], int]]:
    """Deterministic family of (instance, pattern, window) triples that meet
    the one-sided saturation assumptions of the window identity."""
    out = []
    variants = []
    for n_scc in (1, 2):
        for cap_p in (1, 2):
            for k in (1, 2, 3):
                variants.append((n_scc, cap_p, k))
    i = 0
    while len(out) < count:
        n_scc, cap_p, k = variants[i % len(variants)]
        n = 8 + 2 * (i % 3)
        pattern = [PCC_ONLY_ACTION if t % (k + 1) == 0 else SCC_ONLY_ACTION
                   for t in range(k + 1)]
        if i % 2 == 0:
            # saturated PCC side: big head start, SCCs drain every slot
            preseed = [(n + 1) * cap_p] + [0] * n_scc
        else:
            # saturated SCC side: big SCC backlogs, PCC keeps up
            preseed = [0] + [n + 2] * n_scc
        caps = [[cap_p] * MAX_SLOTS] + [[1] * MAX_SLOTS for _ in range(n_scc)]
        inst = TinyInstance(l=1, n_scc=n_scc, caps=caps, d_xn=0,
                            preseed_rlc=preseed, label=f"identity-{i}")
        out.append((inst, pattern, n))
        i += 1
    return out
