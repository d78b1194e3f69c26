"""Comparison splitting policies: bandwidth-weighted, delay-based, fixed-gain
PID and tabular Q-learning, plus fixed-pattern policies used by sweeps and
forced single-carrier runs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from casplit.fuzzy_pid import (
    SplitAction,
    PCC_ONLY_ACTION,
    SCC_ONLY_ACTION,
    NoFuzzyController,
)

__all__ = [
    "BwaController",
    "LtrController",
    "NoFuzzyController",
    "QTable",
    "QLearningController",
    "StationaryKController",
    "ForcedController",
]


class BwaController:
    """Route in proportion to configured bandwidths.

    Uses a deterministic largest-remainder schedule: over any window of W
    slots the PCC share deviates from ``bw_pcc / total_bw`` by less than
    one slot.
    """

    name = "bwa"

    def __init__(self, bw_pcc: float, bw_sccs: list[float]):
        if bw_pcc < 0 or any(b <= 0 for b in bw_sccs) or not bw_sccs:
            raise ValueError("bandwidths must be positive (PCC may be zero)")
        self.share = bw_pcc / (bw_pcc + sum(bw_sccs))

    def decide(self, t: int, b: int) -> SplitAction:
        a_p = math.floor((t + 1) * self.share) - math.floor(t * self.share)
        return SplitAction(a_p, 1 - a_p)

    def observe(self, t, delivered, rlc_occ, inflight) -> None:
        pass


class LtrController:
    """Send to the carrier with the lowest estimated end-to-end delay.

    The estimate uses only state visible at the PDCP host: per-carrier RLC
    occupancy, packets in flight on the Xn link, the known Xn delay, and an
    exponentially averaged recent service rate.  Ties go to the PCC.
    """

    name = "ltr"

    def __init__(self, n_scc: int, d_xn: int, eps_rate: float = 0.05,
                 smoothing: float = 0.05):
        self.n_scc = n_scc
        self.d_xn = d_xn
        self.eps_rate = eps_rate
        self.smoothing = smoothing
        self.rates = [1.0] * (1 + n_scc)
        self._occ = [0] * (1 + n_scc)
        self._inflight = [0] * n_scc

    def delay_estimates(self) -> list[float]:
        est = [self._occ[0] / max(self.rates[0], self.eps_rate)]
        for s in range(self.n_scc):
            backlog = self._occ[1 + s] + self._inflight[s] + self.d_xn
            est.append(backlog / max(self.rates[1 + s], self.eps_rate))
        return est

    def decide(self, t: int, b: int) -> SplitAction:
        est = self.delay_estimates()
        a_p = 1 if est[0] <= min(est[1:]) else 0
        return SplitAction(a_p, 1 - a_p)

    def observe(self, t, delivered, rlc_occ, inflight) -> None:
        a = self.smoothing
        for c, served in enumerate(delivered):
            self.rates[c] = (1 - a) * self.rates[c] + a * served
        self._occ = list(rlc_occ)
        self._inflight = list(inflight)


@dataclass
class QTable:
    """Tabular action values over discretized buffer-difference states."""

    n_bins: int = 16
    b_max: int = 96
    epsilon: float = 0.1
    learn_rate: float = 0.1
    discount: float = 0.9
    values: np.ndarray = field(default=None)  # (n_bins, 2)

    def __post_init__(self) -> None:
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.values is None:
            self.values = np.zeros((self.n_bins, 2))

    def bucket(self, b: int) -> int:
        x = min(max(b, -self.b_max), self.b_max)
        frac = (x + self.b_max) / (2 * self.b_max)
        return min(int(frac * self.n_bins), self.n_bins - 1)


class QLearningController:
    """One-step tabular Q-learning over the buffer difference.

    Action 0 feeds the PCC, action 1 the SCC group; the reward is the
    number of packets the UE received in the slot.  Exploration draws come
    from the controller's own stream so channel noise is untouched.
    """

    name = "qlearning"

    def __init__(self, table: QTable, rng: np.random.Generator):
        self.table = table
        self.rng = rng
        self._pending: tuple[int, int] | None = None

    def decide(self, t: int, b: int) -> SplitAction:
        s = self.table.bucket(b)
        if self.table.epsilon > 0 and self.rng.random() < self.table.epsilon:
            a = int(self.rng.integers(2))
        else:
            a = int(np.argmax(self.table.values[s]))
        self._pending = (s, a)
        return PCC_ONLY_ACTION if a == 0 else SCC_ONLY_ACTION

    def observe(self, t, delivered, rlc_occ, inflight) -> None:
        if self._pending is None:
            return
        s, a = self._pending
        reward = sum(delivered)
        b_next = rlc_occ[0] - sum(rlc_occ[1:])
        self.update(s, a, reward, self.table.bucket(b_next))
        self._pending = None

    def update(self, s: int, a: int, reward: float, s_next: int) -> None:
        q = self.table.values
        target = reward + self.table.discount * float(np.max(q[s_next]))
        q[s, a] += self.table.learn_rate * (target - q[s, a])


class StationaryKController:
    """Fixed impulse pattern: the PCC fires every (k+1)-th slot."""

    name = "stationary_k"

    def __init__(self, k: int):
        if k < 0:
            raise ValueError("k must be non-negative")
        self.k = k

    def decide(self, t: int, b: int) -> SplitAction:
        a_p = 1 if t % (self.k + 1) == 0 else 0
        return SplitAction(a_p, 1 - a_p)

    def observe(self, t, delivered, rlc_occ, inflight) -> None:
        pass


class ForcedController:
    """Emit one fixed action every slot (single-carrier reference modes)."""

    name = "forced"

    def __init__(self, action: SplitAction):
        self.action = action

    def decide(self, t: int, b: int) -> SplitAction:
        return self.action

    def observe(self, t, delivered, rlc_occ, inflight) -> None:
        pass
