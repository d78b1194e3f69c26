"""Fuzzy-gain-scheduled incremental PID traffic splitter.

The controller watches the buffer difference
``B = pcc_occupancy - sum(scc_occupancies)`` and emits one binary routing
action per slot: feed the PCC or feed the SCC group.  The regulated error
is ``e = B - b_target`` with a slightly negative setpoint, which keeps a
couple of packets parked in each secondary queue so capacity draws never
idle.  Operation has two stages.  During the fill stage (the first horizon
worth of slots) both routes are active so the buffers acquire state.
Afterwards each slot is resolved as one of:

* coast    -- the buffers are exactly empty on both sides: keep playing
              the held impulse schedule (an empty system carries no
              gradient, and re-planning on it walks the schedule
              open-loop);
* probe    -- buffers empty for two full windows: widen the impulse
              spacing to its maximum so spare SCC capacity, invisible
              while nothing queues, gets discovered;
* static   -- the sign of e is unchanged and not running away: repeat the
              previous action;
* dynamic  -- e touched or crossed zero, or a sign-stable run is worsening
              past the escape threshold: re-plan spacing and impulse count.

Re-planning derives the spacing ``k`` from the recent action history and
the impulse count from the PID value of the raw buffer difference; PCC
impulses are laid on a k-grid inside the current window.  The PID value
enters negated: a negative B means the SCC side is overloaded, which must
*increase* the number of PCC impulses.  Gains are adapted by the fuzzy
rule tables only at window boundaries.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence


@dataclass(frozen=True)
class SplitAction:
    """Per-slot routing decision: ``a_s`` is the group bit for all SCCs."""

    a_p: int
    a_s: int

    def __post_init__(self) -> None:
        if self.a_p not in (0, 1) or self.a_s not in (0, 1):
            raise ValueError("action components must be 0 or 1")

    @property
    def complementary(self) -> bool:
        return self.a_s == 1 - self.a_p


ACTIVE_BOTH = SplitAction(1, 1)
PCC_ONLY_ACTION = SplitAction(1, 0)
SCC_ONLY_ACTION = SplitAction(0, 1)


@dataclass(frozen=True)
class PidGains:
    kp: float
    ki: float
    kd: float

    def clamped(self, lo: float, hi: float) -> "PidGains":
        c = lambda v: min(max(v, lo), hi)
        return PidGains(c(self.kp), c(self.ki), c(self.kd))


Table = tuple[tuple[float, float], tuple[float, float]]

# Row index follows the membership weight of "error near zero": row 0 applies
# when the normalized error is small, row 1 when it is large; column 0 when
# the error is steady, column 1 when it moves fast.  A small error relaxes
# the gains (strongly so when it is also noisy), a large error stiffens
# them.  Because the scheduler maps the PID value straight to an impulse
# count, the integral gain sets where the buffer difference settles
# (proportional droop); growing it under a sustained offset is the adaptive
# layer's integral action.
DEFAULT_T_P: Table = ((-0.10, -0.50), (0.30, 0.20))
DEFAULT_T_I: Table = ((-0.004, -0.05), (0.10, 0.05))
DEFAULT_T_D: Table = ((-0.02, -0.10), (0.06, 0.04))
DEFAULT_GAINS = PidGains(0.5, 0.2, 0.1)


@dataclass
class FuzzyConfig:
    """Tuning surface of the fuzzy gain scheduler and impulse planner.

    ``b_target`` shifts the buffer-difference setpoint the mode gates work
    against (default 0); a slightly negative value parks packets in the
    secondary queues, which the gain adaptation otherwise arranges on its
    own by stiffening the integral gain.
    """

    b_max: int = 96
    t_p: Table = DEFAULT_T_P
    t_i: Table = DEFAULT_T_I
    t_d: Table = DEFAULT_T_D
    gain_min: float = 0.02
    gain_max: float = 1.0
    membership_width: float = 0.25
    membership_width_change: float | None = 0.035
    offset_second_segment: bool = False
    escape_divisor: int = 16
    b_target: float | None = None
    update_every_boundary: bool = True  # False: only boundaries that re-plan
    update_deadband_divisor: int = 0  # >0: no gain learning while |e| < b_max/this
    probe_resets_gains: bool = True  # probe marks a regime change: forget tuning

    def __post_init__(self) -> None:
        if self.b_max <= 0:
            raise ValueError("b_max must be positive")
        if self.escape_divisor <= 0:
            raise ValueError("escape_divisor must be positive")


def membership(x: float, width: float = 1.0) -> float:
    """Triangular membership, peak 1 at zero, reaching 0 at ``|x| = width``."""
    return max(0.0, 1.0 - abs(x) / width)


def fuzzify(b: float, b_prev: float, cfg: FuzzyConfig) -> tuple[float, float]:
    """Membership degrees of the normalized error and error change.

    The two axes carry separate triangular widths: per-slot error changes
    are tiny against the buffer scale, so the change axis usually needs a
    much narrower width to discriminate calm from busy regimes.
    """
    xb = min(max(b / cfg.b_max, -1.0), 1.0)
    xe = min(max((b - b_prev) / (2.0 * cfg.b_max), -1.0), 1.0)
    we = cfg.membership_width_change
    if we is None:
        we = cfg.membership_width
    return membership(xb, cfg.membership_width), membership(xe, we)


def update_gains(gains: PidGains, d_b: float, d_e: float, cfg: FuzzyConfig) -> PidGains:
    """One fuzzy inference step on all three gains.

    The increment is the doubly weighted table read
    ``sum_ij w_i * T_ij * (w_i * v_j) * v_j`` with ``w = [d_b, 1-d_b]`` and
    ``v = [d_e, 1-d_e]``; the inner product weights each rule by its joint
    firing strength.  Results are clamped to the configured gain range.
    """
    if not (0.0 <= d_b <= 1.0 and 0.0 <= d_e <= 1.0):
        raise ValueError("membership degrees must lie in [0, 1]")
    w = (d_b, 1.0 - d_b)
    v = (d_e, 1.0 - d_e)

    def delta(table: Table) -> float:
        return sum(
            w[i] * table[i][j] * (w[i] * v[j]) * v[j] for i in range(2) for j in range(2)
        )

    out = PidGains(
        gains.kp + delta(cfg.t_p),
        gains.ki + delta(cfg.t_i),
        gains.kd + delta(cfg.t_d),
    )
    return out.clamped(cfg.gain_min, cfg.gain_max)


def pid_increment(gains: PidGains, b_hist: tuple[int, int, int]) -> float:
    """Second-order incremental PID value from (B, B previous, B before that)."""
    b0, b1, b2 = b_hist
    return gains.kp * (b0 - b1) + gains.ki * b0 + gains.kd * (b0 - 2 * b1 + b2)


def compute_k(history: Sequence[SplitAction], n_scc: int) -> int:
    """Auxiliary spacing ratio from the trailing action history.

    Counts every SCC's activity (the group bit fires all of them), divides
    by the PCC activity, floors, and clamps to at least 1.  An all-SCC
    history divides by a clamped denominator of 1 instead of zero.
    """
    if not history:
        raise ValueError("history must be non-empty")
    sum_p = sum(a.a_p for a in history)
    sum_s = n_scc * sum(a.a_s for a in history)
    return max(1, sum_s // max(1, sum_p))


def schedule_action(t: int, n: int, k: int, g: float,
                    offset_second_segment: bool = False) -> SplitAction:
    """Impulse-train slot decision for slot ``t`` inside a window of ``n``.

    The window position ``r = t mod n`` is split in two segments by the
    rounded impulse count ``g_int = clamp(round(g), 0, (n-1)//k)``.  In the
    first segment (``r <= g_int*k``) the PCC fires on multiples of ``k``;
    beyond it the PCC fires on multiples of ``k+1`` (or, with the offset
    variant, on the ``k+1`` grid anchored at the segment boundary).  All
    other slots go to the SCC group.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if n < 2:
        raise ValueError("window must span at least 2 slots")
    g_int = min(max(int(round(g)), 0), (n - 1) // k)
    r = t % n
    if r <= g_int * k:
        a_p = 1 if (r % k == 0 and 1 <= r // k <= g_int) else 0
    elif offset_second_segment:
        off = r - g_int * k
        a_p = 1 if off % (k + 1) == 0 else 0
    else:
        a_p = 1 if (r % (k + 1) == 0 and r >= k + 1) else 0
    return SplitAction(a_p, 1 - a_p)


class FuzzyPidController:
    """Stateful splitter; one instance drives one simulation run."""

    name = "fuzzy_pid"

    def __init__(self, n: int, n_scc: int, cfg: FuzzyConfig | None = None,
                 gains: PidGains = DEFAULT_GAINS, adapt_gains: bool = True):
        if n < 2:
            raise ValueError("horizon must be at least 2 slots")
        self.n = n
        self.n_scc = n_scc
        self.cfg = cfg if cfg is not None else FuzzyConfig()
        self.gains = gains
        self._gains0 = gains
        self.adapt_gains = adapt_gains
        self.history: deque[SplitAction] = deque(maxlen=n)
        self.k: int | None = None
        self.g = 0.0
        self.mode = "init"
        self._b_prev = 0
        self._b_prev2 = 0
        self._zero_streak = 0
        self._escape = self.cfg.b_max / self.cfg.escape_divisor
        self.b_target = self.cfg.b_target if self.cfg.b_target is not None else 0.0

    @property
    def phase(self) -> str:
        return "init" if self.mode == "init" else "adapt"

    @property
    def b_history(self) -> tuple[int, int]:
        """Most recent two observed buffer differences (newest first)."""
        return (self._b_prev, self._b_prev2)

    def _maybe_update_gains(self, t: int, e: float, e1: float) -> None:
        if not self.adapt_gains or t % self.n != 0:
            return
        if self.cfg.update_deadband_divisor > 0:
            # Optional deadband: a small error carries nothing worth
            # learning, so leave a working tuning alone.
            if abs(e) < self.cfg.b_max / self.cfg.update_deadband_divisor:
                return
        d_b, d_e = fuzzify(e, e1, self.cfg)
        self.gains = update_gains(self.gains, d_b, d_e, self.cfg)

    def _replan(self, t: int, b: int, b1: int, b2: int, e: float, e1: float,
                reset_k: bool = False) -> SplitAction:
        if not self.cfg.update_every_boundary:
            self._maybe_update_gains(t, e, e1)
        if reset_k:
            # Runaway recovery: a spacing derived from the (bad) recent
            # history would keep the schedule starved of PCC impulses.
            self.k = 1
        else:
            self.k = min(compute_k(self.history, self.n_scc), self.n - 1)
        # The PID value on the raw buffer difference maps straight to the
        # impulse count, negated: a deeply negative B (SCC overload) needs
        # many PCC impulses.
        self.g = pid_increment(self.gains, (b, b1, b2))
        return schedule_action(t, self.n, self.k, -self.g,
                               self.cfg.offset_second_segment)

    def decide(self, t: int, b: int) -> SplitAction:
        b1, b2 = self._b_prev, self._b_prev2
        self._b_prev, self._b_prev2 = b, b1
        self._zero_streak = self._zero_streak + 1 if b == 0 else 0
        e, e1 = b - self.b_target, b1 - self.b_target

        if self.cfg.update_every_boundary and t > self.n:
            self._maybe_update_gains(t, e, e1)

        if t <= self.n:
            self.mode = "init"
            action = ACTIVE_BOTH
        elif self.k is None:
            # First adaptation slot: plan from the fill-stage history.
            self.mode = "dynamic"
            action = self._replan(t, b, b1, b2, e, e1)
        elif b == 0 and b1 == 0:
            # Exactly empty buffers carry no gradient; keep playing the held
            # schedule, and after a long all-zero stretch probe toward the
            # SCCs, whose spare capacity is invisible while nothing queues.
            if self._zero_streak > 2 * self.n and self.k < self.n - 2:
                self.mode = "probe"
                self.k = self.n - 2
                self.g = 0.0
                if self.adapt_gains and self.cfg.probe_resets_gains:
                    # A long-silent plant is a new regime; stale tuning
                    # from the previous one is worse than the generic start.
                    self.gains = self._gains0
            else:
                self.mode = "coast"
            action = schedule_action(t, self.n, self.k, -self.g,
                                     self.cfg.offset_second_segment)
        elif e * e1 > 0:
            if abs(e) > abs(e1) and abs(e) > self._escape:
                # Sign-stable but moving away from the setpoint beyond the
                # hold band: the inherited action is hurting, re-plan.  A
                # deep runaway also resets the impulse spacing.
                self.mode = "escape"
                action = self._replan(t, b, b1, b2, e, e1,
                                      reset_k=abs(e) > self.cfg.b_max / 4)
            else:
                self.mode = "static"
                action = self.history[-1]
        else:
            self.mode = "dynamic"
            action = self._replan(t, b, b1, b2, e, e1)

        self.history.append(action)
        return action

    def observe(self, t: int, delivered: list[int], rlc_occ: list[int],
                inflight: list[int]) -> None:
        """No feedback beyond the buffer difference is used."""


class NoFuzzyController(FuzzyPidController):
    """The same splitter with gain adaptation disabled (gains frozen)."""

    name = "nofuzzy_pid"

    def __init__(self, n: int, n_scc: int, cfg: FuzzyConfig | None = None,
                 gains: PidGains = DEFAULT_GAINS):
        super().__init__(n, n_scc, cfg=cfg, gains=gains, adapt_gains=False)
