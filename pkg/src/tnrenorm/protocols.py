"""FTNR and LTNR: iterative renormalization driven by partial norms.

Both protocols share one control flow and differ only in the norm used and
the exponent of the per-node factor: the squared Frobenius norm of ``N``
nodes scales as ``c**(2N)`` under a global node scaling ``c``, the linear
norm as ``c**N``.

Every rescaling is applied as a multiplication (never a division) and logged
in the report trace, so replaying the trace on the original network gives
the output bit for bit.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .network import TensorNetworkLayer, scale_all_nodes
from .norms import (FROBENIUS, LINEAR, METHODS, EnvironmentCache, build_cache,
                    extend_environment, frobenius_norm_sq, linear_norm,
                    method_norm, partial_norm, rescale_cache)
from .tensor import NormState, NormValue

SUCCESS = "Success"
FAILED = "Failed"

ONE_NODE_OVERFLOW = "one-node-overflow"
ONE_NODE_UNDERFLOW = "one-node-underflow"
PARTIAL_NONFINITE = "partial-nonfinite"
PARTIAL_RANGE = "partial-out-of-range"
FULL_RESIDUAL = "full-norm-residual"
STEP_CAUSES = (ONE_NODE_OVERFLOW, ONE_NODE_UNDERFLOW, PARTIAL_NONFINITE,
               PARTIAL_RANGE, FULL_RESIDUAL)
# the closing exact normalization, logged but never counted as a step
FINAL = "final-normalization"


@dataclass
class RenormConfig:
    """Protocol parameters.

    ``target`` of ``None`` means the number of entries of the represented
    tensor (``n_A * m_A`` for a matrix layer). The tolerance band for
    partial norms is ``(range_lo * target, range_hi * target)``.
    """

    target: Optional[float] = None
    range_lo: float = 1e-3
    range_hi: float = 1e3
    max_steps: int = 1000
    xi_seed: int = 0
    method: str = FROBENIUS

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if not 0 < self.range_lo <= 1 <= self.range_hi:
            raise ValueError("need 0 < range_lo <= 1 <= range_hi, got "
                             f"{self.range_lo}, {self.range_hi}")
        if self.target is not None and not (
                math.isfinite(self.target) and self.target > 0):
            raise ValueError(f"target must be finite and positive, got {self.target}")
        if self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")


@dataclass(frozen=True)
class TraceEvent:
    cause: str
    n: int
    factor: float  # multiplier applied to every node entry
    negative: bool = False


@dataclass
class RenormReport:
    status: str
    target: float
    method: str
    steps_total: int = 0
    steps_by_cause: dict = field(
        default_factory=lambda: {c: 0 for c in STEP_CAUSES})
    cumulative_log_scale: float = 0.0
    final_norm: NormValue = field(default_factory=NormValue.overflow)
    trace: List[TraceEvent] = field(default_factory=list)

    @property
    def succeeded(self):
        return self.status == SUCCESS

    @property
    def negative_seen(self):
        return any(ev.negative for ev in self.trace)

    def to_dict(self):
        return {
            "status": self.status,
            "method": self.method,
            "target": self.target,
            "steps_total": self.steps_total,
            "steps_by_cause": dict(self.steps_by_cause),
            "cumulative_log_scale": self.cumulative_log_scale,
            "final_norm": str(self.final_norm),
            "trace": [{"cause": ev.cause, "n": ev.n, "factor": ev.factor,
                       "negative": ev.negative} for ev in self.trace],
        }


class _Run:
    """Mutable state of one protocol run over a network it owns."""

    def __init__(self, tn, cfg, check_causes):
        self.tn = tn
        self.cfg = cfg
        self.method = cfg.method
        self.n_nodes = tn.n_nodes
        target = cfg.target if cfg.target is not None else float(tn.n_entries())
        self.target = float(target)
        self.log_target = math.log(self.target)
        # exponent of the node factor relative to the controlled quantity
        self.exponent = (1.0 / (2 * self.n_nodes) if self.method == FROBENIUS
                         else 1.0 / self.n_nodes)
        self.xi_rng = np.random.default_rng(cfg.xi_seed)
        self.check_causes = check_causes
        self.cache = None
        self.report = RenormReport(status=FAILED, target=self.target,
                                   method=self.method)

    def apply(self, factor, cause, n, negative=False):
        scale_all_nodes(self.tn, factor)
        rep = self.report
        rep.cumulative_log_scale += math.log(factor)
        rep.trace.append(TraceEvent(cause, n, float(factor), negative))
        if cause != FINAL:
            rep.steps_total += 1
            rep.steps_by_cause[cause] += 1
        if self.cache is not None and self.cache.valid:
            rescale_cache(self.cache, factor)

    def factor_towards_target(self, log_value):
        """Multiplier dividing nodes by ``(value / F) ** exponent``."""
        return math.exp(-self.exponent * (log_value - self.log_target))

    def full_norm_step(self):
        """Exact normalization when the full norm is finite."""
        if self.method == FROBENIUS:
            sq = frobenius_norm_sq(self.tn)
            if not sq.is_finite:
                return sq
            log_norm = 0.5 * math.log(sq.value)
        else:
            total = linear_norm(self.tn)
            if not total.is_finite:
                return total
            log_norm = math.log(total.value)
        factor = math.exp(-(log_norm - self.log_target) / self.n_nodes)
        self.apply(factor, FINAL, self.n_nodes)
        return None

    def one_node_step(self):
        """Returns True when a rescale happened."""
        self.cache = EnvironmentCache(self.method)
        first = extend_environment(self.cache, self.tn)
        if first.is_finite:
            return False
        # order-of-magnitude guess, jittered to avoid rescaling cycles
        xi = self.xi_rng.random()
        factor = math.exp(self.exponent * math.log(10.0 * (1.0 + xi)))
        if first.state is NormState.OVERFLOW:
            self.apply(1.0 / factor, ONE_NODE_OVERFLOW, 1)
        else:
            self.apply(factor, ONE_NODE_UNDERFLOW, 1, first.negative)
        self.cache = None
        return True

    def restore_cache(self, n):
        """Make sure the cache covers at least ``n - 1`` nodes."""
        if self.cache is not None and self.cache.valid and (
                self.cache.prefix_len in (n - 1, n)):
            return True
        self.cache, last = build_cache(self.tn, self.method, n - 1)
        return last is None or last.is_finite

    def partial_loop(self, n_start):
        """Returns the n to resume at after a rescale, or None if all passed."""
        lo = self.cfg.range_lo * self.target
        hi = self.cfg.range_hi * self.target
        for n in range(n_start, self.n_nodes):
            cache = self.cache
            if cache.prefix_len == n:
                value = cache.value()
            else:
                value = extend_environment(cache, self.tn)
            if not value.is_finite:
                if self.check_causes:
                    self._check_nonfinite(n)
                previous = cache.value()
                factor = math.exp(-self.exponent * math.log(previous.value))
                self.apply(factor, PARTIAL_NONFINITE, n, value.negative)
                return n
            if not lo < value.value < hi:
                factor = self.factor_towards_target(math.log(value.value))
                self.apply(factor, PARTIAL_RANGE, n)
                return n
        return None

    def residual_step(self):
        """Rescale by the partial norm at ``N - 1`` nodes."""
        n = self.n_nodes - 1
        if self.cache is None or not self.cache.valid or self.cache.prefix_len != n:
            self.cache, last = build_cache(self.tn, self.method, n)
            if last is not None and not last.is_finite:
                return False
        value = self.cache.value()
        if not value.is_finite:
            return False
        self.apply(self.factor_towards_target(math.log(value.value)),
                   FULL_RESIDUAL, self.n_nodes)
        return True

    def _check_nonfinite(self, n):
        fresh = partial_norm(self.tn, self.method, n)
        if fresh.is_finite:
            raise AssertionError(
                f"partial norm at {n} is finite from scratch ({fresh.value}) "
                "but the cached path reported it non-finite")

    def run(self):
        rep = self.report
        resume = None
        in_residual = False
        while True:
            if self.full_norm_step() is None:
                rep.status = SUCCESS
                break
            if rep.steps_total >= self.cfg.max_steps:
                break
            if in_residual and self.n_nodes > 1 and self.residual_step():
                continue
            in_residual = False
            if resume is None or not self.restore_cache(resume):
                if self.one_node_step():
                    resume = None
                    continue
                resume = 2
            resume = self.partial_loop(resume)
            if resume is not None:
                continue
            if self.n_nodes > 1 and self.residual_step():
                in_residual = True
                continue
            # nothing left to rescale by; a fresh one-node pass is all we have
            resume = None
            self.cache = None
            if not self.one_node_step():
                break
        rep.final_norm = method_norm(self.tn, self.method)
        return rep


def renormalize(tn: TensorNetworkLayer, cfg: RenormConfig,
                check_causes=False) -> RenormReport:
    """Run the protocol selected by ``cfg.method`` on ``tn`` in place.

    With ``check_causes`` every partial-nonfinite event is re-verified with a
    from-scratch partial norm (slow; meant for small instances).
    """
    if tn.n_nodes == 0:
        raise ValueError("cannot renormalize an empty network")
    return _Run(tn, cfg, check_causes).run()


def ftnr(tn, cfg=None, **kwargs):
    """Frobenius renormalization: drive ``||A||_F`` to the target."""
    cfg = cfg or RenormConfig(method=FROBENIUS, **kwargs)
    if cfg.method != FROBENIUS:
        raise ValueError("ftnr needs method='frobenius'")
    return renormalize(tn, cfg)


def ltnr(tn, cfg=None, **kwargs):
    """Linear renormalization: drive the entry sum to the target.

    Meant for networks with non-negative entries.
    """
    cfg = cfg or RenormConfig(method=LINEAR, **kwargs)
    if cfg.method != LINEAR:
        raise ValueError("ltnr needs method='linear'")
    return renormalize(tn, cfg)


def replay_trace(tn: TensorNetworkLayer, trace):
    """Apply the multipliers of a report trace to ``tn`` in place."""
    for ev in trace:
        scale_all_nodes(tn, ev.factor)
