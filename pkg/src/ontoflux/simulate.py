"""Discrete-event simulation of sequential merge-update regimes.

The system is a continuous-review, lost-sales, base-stock model: unit
demands arrive by a Poisson process, each served demand immediately
places a replenishment order restoring the inventory position to S,
and demands that find nothing on hand are lost.  Three regimes differ
only in how an order's delivery time comes about:

* Exogenous: lead times are drawn from a Gamma distribution once per
  review period (orders placed in between wait for the next review),
  then pushed through the non-crossing adjustment so deliveries never
  overtake each other.
* Endogenous: orders queue for a single FIFO server with Gamma service
  times; congestion makes lead times depend on the order flow itself.
* ExogenousIID: leads are drawn at placement and used as-is, crossing
  allowed.  This regime exists for oracle tests: with independent
  leads the loss fraction is the Erlang-B probability of an M/G/S/S
  system.

One run is driven by a single seeded generator consumed in event
order, so statistics are a pure function of the configuration.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional

import numpy as np

from .errors import InvalidConfigError, NegativeAdjustmentError, NonPositiveRateError


@dataclass(frozen=True)
class GammaParams:
    """Shape r, rate mu (scale 1/mu): mean r/mu, variance r/mu^2."""

    mu: float
    r: float

    def __post_init__(self):
        if self.mu <= 0 or self.r <= 0:
            raise InvalidConfigError(f"gamma parameters must be positive: mu={self.mu}, r={self.r}")

    @property
    def mean(self) -> float:
        return self.r / self.mu

    @property
    def variance(self) -> float:
        return self.r / self.mu**2


class Regime(Enum):
    EXOGENOUS = "exo"
    ENDOGENOUS = "endo"
    EXOGENOUS_IID = "exo-iid"


@dataclass(frozen=True)
class Costs:
    holding: float = 1.0  # per item per time unit
    lost_penalty: float = 10.0  # per lost update
    processing: float = 1.0  # per completed merge

    def __post_init__(self):
        if min(self.holding, self.lost_penalty, self.processing) < 0:
            raise InvalidConfigError("costs must be nonnegative")


@dataclass(frozen=True)
class SimConfig:
    regime: Regime
    base_stock: int
    demand_rate: float
    lead: GammaParams
    horizon: float
    warmup: float = 0.0
    review_period: float = 1.0
    seed: int = 0
    costs: Costs = Costs()
    measure_position: bool = False  # avg_on_hand reports position instead of on-hand

    def __post_init__(self):
        if self.base_stock < 1 or self.base_stock != int(self.base_stock):
            raise InvalidConfigError(f"base_stock must be an integer >= 1, got {self.base_stock}")
        if self.demand_rate < 0:
            raise InvalidConfigError("demand_rate must be nonnegative")
        if self.review_period <= 0:
            raise InvalidConfigError("review_period must be positive")
        if self.horizon <= 0:
            raise InvalidConfigError("horizon must be positive")
        if self.warmup < 0 or self.warmup >= self.horizon:
            raise InvalidConfigError("warmup must satisfy 0 <= warmup < horizon")


@dataclass(frozen=True)
class UpdateOrder:
    seq: int
    placed_at: float
    drawn_lead: float
    effective_delivery: float
    drawn_at: float

    def __post_init__(self):
        if self.effective_delivery < self.placed_at:
            raise InvalidConfigError(
                f"order {self.seq}: delivery {self.effective_delivery} precedes placement {self.placed_at}"
            )


@dataclass(frozen=True)
class SimStats:
    fill_rate: float
    avg_on_hand: float
    long_run_avg_cost: float
    service_time_mean: float
    service_time_var: float
    lost_count: int
    served_count: int


def sample_gamma(params: GammaParams, rng: np.random.Generator, size: Optional[int] = None):
    """Gamma(shape r, scale 1/mu) draw(s) from a seeded generator."""
    return rng.gamma(shape=params.r, scale=1.0 / params.mu, size=size)


def sample_poisson_interarrival(rate: float, rng: np.random.Generator, size: Optional[int] = None):
    """Exponential interarrival(s) of a Poisson process with the given rate."""
    if rate <= 0:
        raise NonPositiveRateError(f"rate must be positive, got {rate}")
    return rng.exponential(1.0 / rate, size=size)


def adjust_exogenous(prev_delivery: float, t_n: float, drawn: float) -> tuple[float, float]:
    """Non-crossing adjustment of one drawn lead time.

    If the drawn delivery t_n + drawn would not overtake the previous
    order's delivery it is used as-is; otherwise the lead is stretched
    so this delivery lands exactly on the previous one.
    """
    if t_n + drawn >= prev_delivery:
        return t_n + drawn, drawn
    adjusted = prev_delivery - t_n
    if adjusted < 0:
        raise NegativeAdjustmentError(
            f"adjusted lead {adjusted} negative (prev={prev_delivery}, t_n={t_n})"
        )
    return prev_delivery, adjusted


def erlang_b(servers: int, offered_load: float) -> float:
    """Loss probability of an M/G/s/s system via the stable recursion."""
    if servers < 0 or offered_load < 0:
        raise InvalidConfigError("servers and offered load must be nonnegative")
    b = 1.0
    for k in range(1, servers + 1):
        b = offered_load * b / (k + offered_load * b)
    return b


class _EventKind(IntEnum):
    # heap tiebreak at equal times: reviews decide leads before anything
    # else moves; deliveries land before a coincident demand is served
    REVIEW = 0
    DELIVERY = 1
    DEMAND = 2


@dataclass
class _Order:
    seq: int
    placed_at: float
    drawn_at: float = math.nan
    drawn_lead: float = math.nan
    effective_delivery: float = math.nan


class Simulation:
    """One seeded run; exposes the order history for invariant checks."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.rng = np.random.default_rng(config.seed)
        self.on_hand = config.base_stock
        self.on_order = 0
        self.orders: list[_Order] = []
        self.completed: list[UpdateOrder] = []
        self.noncrossing_violations = 0
        self.lost = 0
        self.served = 0
        self._completions_in_window = 0
        self._lost_in_window = 0
        self._heap: list[tuple[float, int, int, Optional[int]]] = []
        self._tie = itertools.count()
        self._last_time = 0.0
        self._area_on_hand = 0.0
        self._area_position = 0.0
        self._dormant: list[int] = []
        self._last_delivery = 0.0
        self._server_free_at = 0.0

    def _push(self, time: float, kind: _EventKind, order_idx: Optional[int] = None) -> None:
        heapq.heappush(self._heap, (time, int(kind), next(self._tie), order_idx))

    def _accrue(self, now: float) -> None:
        lo = max(self._last_time, self.config.warmup)
        hi = min(now, self.config.horizon)
        if hi > lo:
            self._area_on_hand += self.on_hand * (hi - lo)
            self._area_position += (self.on_hand + self.on_order) * (hi - lo)
        self._last_time = now

    def _schedule_delivery(self, order: _Order, drawn_at: float, drawn: float) -> None:
        regime = self.config.regime
        if regime is Regime.EXOGENOUS_IID:
            effective = drawn_at + drawn
        elif regime is Regime.EXOGENOUS:
            effective, _ = adjust_exogenous(self._last_delivery, drawn_at, drawn)
        else:
            start = max(order.placed_at, self._server_free_at)
            effective = start + drawn
            self._server_free_at = effective
        if regime is not Regime.EXOGENOUS_IID and effective < self._last_delivery:
            self.noncrossing_violations += 1
        self._last_delivery = max(self._last_delivery, effective)
        order.drawn_at = drawn_at
        order.drawn_lead = drawn
        order.effective_delivery = effective
        self._push(effective, _EventKind.DELIVERY, order.seq)

    def _place_order(self, now: float) -> None:
        order = _Order(seq=len(self.orders), placed_at=now)
        self.orders.append(order)
        self.on_order += 1
        if self.config.regime is Regime.EXOGENOUS:
            self._dormant.append(order.seq)
        else:
            drawn = float(sample_gamma(self.config.lead, self.rng))
            self._schedule_delivery(order, now, drawn)

    def _on_demand(self, now: float) -> None:
        if self.on_hand > 0:
            self.on_hand -= 1
            self.served += 1
            self._place_order(now)
        else:
            self.lost += 1
            if now >= self.config.warmup:
                self._lost_in_window += 1

    def _on_review(self, now: float) -> None:
        for seq in self._dormant:
            drawn = float(sample_gamma(self.config.lead, self.rng))
            self._schedule_delivery(self.orders[seq], now, drawn)
        self._dormant.clear()

    def _on_delivery(self, now: float, seq: int) -> None:
        self.on_hand += 1
        self.on_order -= 1
        order = self.orders[seq]
        self.completed.append(
            UpdateOrder(order.seq, order.placed_at, order.drawn_lead, order.effective_delivery, order.drawn_at)
        )
        if now >= self.config.warmup:
            self._completions_in_window += 1

    def run(self) -> SimStats:
        cfg = self.config
        if cfg.demand_rate > 0:
            self._push(float(sample_poisson_interarrival(cfg.demand_rate, self.rng)), _EventKind.DEMAND)
        if cfg.regime is Regime.EXOGENOUS:
            self._push(cfg.review_period, _EventKind.REVIEW)
        while self._heap:
            now, kind, _, seq = heapq.heappop(self._heap)
            if now > cfg.horizon:
                break
            self._accrue(now)
            if kind == _EventKind.DEMAND:
                self._on_demand(now)
                self._push(
                    now + float(sample_poisson_interarrival(cfg.demand_rate, self.rng)),
                    _EventKind.DEMAND,
                )
            elif kind == _EventKind.REVIEW:
                self._on_review(now)
                self._push(now + cfg.review_period, _EventKind.REVIEW)
            else:
                self._on_delivery(now, seq)
        self._accrue(cfg.horizon)
        return self._stats()

    def _window_demands(self) -> tuple[int, int]:
        served = sum(
            1 for o in self.orders if o.placed_at >= self.config.warmup
        )
        return served, self._lost_in_window

    def _stats(self) -> SimStats:
        cfg = self.config
        elapsed = cfg.horizon - cfg.warmup
        served, lost = self._window_demands()
        total = served + lost
        fill_rate = served / total if total else 1.0
        area = self._area_position if cfg.measure_position else self._area_on_hand
        avg_on_hand = area / elapsed
        cost = (
            cfg.costs.holding * self._area_on_hand
            + cfg.costs.lost_penalty * lost
            + cfg.costs.processing * self._completions_in_window
        ) / elapsed
        leads = np.array(
            [o.effective_delivery - o.placed_at for o in self.completed if o.placed_at >= cfg.warmup]
        )
        mean = float(leads.mean()) if leads.size else 0.0
        var = float(leads.var(ddof=1)) if leads.size > 1 else 0.0
        return SimStats(
            fill_rate=fill_rate,
            avg_on_hand=avg_on_hand,
            long_run_avg_cost=cost,
            service_time_mean=mean,
            service_time_var=var,
            lost_count=lost,
            served_count=served,
        )


def run_simulation(config: SimConfig) -> SimStats:
    """Simulate one run and return its post-warmup statistics."""
    return Simulation(config).run()
