"""Full and partial network norms without materializing the represented tensor.

Two methods are supported:

``frobenius``
    The squared Frobenius norm, obtained by contracting the network with a
    copy of itself. The environment after ``n`` nodes carries one axis per
    cut bond for the network and one per cut bond for the copy; the partial
    norm pairs each cut bond with its copy.

``linear``
    The plain sum of entries, obtained by closing every open index with a
    ones vector. The environment carries one axis per cut bond; the partial
    norm sums it.

Both are accumulated node by node in the network's ``order``.
"""

import math

import numpy as np

from .network import TensorNetworkLayer
from .tensor import TINY, NormValue, classify, contract

FROBENIUS = "frobenius"
LINEAR = "linear"
METHODS = (FROBENIUS, LINEAR)


class CacheInvalidError(RuntimeError):
    """The environment cache can no longer be trusted and must be rebuilt."""


def _check_method(method):
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")


def _extend(tn, method, env, cut, k):
    """Absorb node ``k`` into an environment over cut bonds ``cut``.

    ``cut`` lists the (node, axis) endpoints, on the prefix side, of bonds
    leaving the prefix. For frobenius ``env`` has ``2 * len(cut)`` axes
    (network side first, copy side second, same label order).
    """
    t = tn.tensors[k]
    idx = tn.indices[k]
    m = len(cut)
    pair_pos = [i for i, (node, ax) in enumerate(cut)
                if tn.indices[node][ax].peer[0] == k]
    pair_ax = [tn.indices[cut[i][0]][cut[i][1]].peer[1] for i in pair_pos]
    rest_pos = [i for i in range(m) if i not in pair_pos]
    rest = [ax for ax in range(t.ndim) if ax not in pair_ax]
    new_bonds = [ax for ax in rest if idx[ax].is_bond]
    new_cut = [cut[i] for i in rest_pos] + [(k, ax) for ax in new_bonds]

    if method == LINEAR:
        phys = tuple(ax for ax in range(t.ndim) if not idx[ax].is_bond)
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            reduced = t.sum(axis=phys) if phys else t
        # axes of ``reduced`` are the bond axes of t in ascending order
        bond_axes = [ax for ax in range(t.ndim) if idx[ax].is_bond]
        r_pair = [bond_axes.index(ax) for ax in pair_ax]
        new_env = contract(env, pair_pos, reduced, r_pair)
        return new_env, new_cut

    # network side: env ket axes against node k
    x = contract(env, pair_pos, t, pair_ax)
    # x axes: ket rest (len(rest_pos)), bra (m), node rest axes (len(rest))
    n_ket = len(rest_pos)
    bra_pair = [n_ket + i for i in pair_pos]
    phys_rest = [j for j, ax in enumerate(rest) if not idx[ax].is_bond]
    x_axes = bra_pair + [n_ket + m + j for j in phys_rest]
    copy_axes = pair_ax + [rest[j] for j in phys_rest]
    y = contract(x, x_axes, t, copy_axes)
    # y axes: ket rest, bra rest, new bonds (network), new bonds (copy)
    nb = len(new_bonds)
    n_rest = len(rest_pos)
    perm = (list(range(n_rest))
            + list(range(2 * n_rest, 2 * n_rest + nb))
            + list(range(n_rest, 2 * n_rest))
            + list(range(2 * n_rest + nb, 2 * n_rest + 2 * nb)))
    return np.transpose(y, perm), new_cut


def _reduce(method, env):
    """Scalar partial norm from an environment."""
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        if method == LINEAR:
            return np.sum(env)
        half = env.ndim // 2
        d = int(np.prod(env.shape[:half], dtype=np.int64))
        return np.trace(env.reshape(d, d))


class EnvironmentCache:
    """Partial contraction of the first ``prefix_len`` nodes of a network.

    Attributes:
        method: ``"frobenius"`` or ``"linear"``.
        prefix_len: number of nodes absorbed, in network order.
        env: tensor over the cut indices.
        cut: (node, axis) labels of the cut bonds, in env axis order.
        valid: cleared when a rescale leaves env non-finite or all-subnormal.
    """

    def __init__(self, method):
        _check_method(method)
        self.method = method
        self.prefix_len = 0
        self.env = np.ones(())
        self.cut = []
        self.valid = True

    def value(self) -> NormValue:
        """The partial norm at the current prefix."""
        if not self.valid:
            raise CacheInvalidError("environment cache must be rebuilt")
        if self.prefix_len == 0:
            raise ValueError("empty prefix has no partial norm")
        return classify(_reduce(self.method, self.env))

    def __repr__(self):
        return (f"EnvironmentCache({self.method}, prefix_len={self.prefix_len},"
                f" shape={self.env.shape}, valid={self.valid})")


def extend_environment(cache: EnvironmentCache,
                       tn: TensorNetworkLayer) -> NormValue:
    """Absorb the next node and return the partial norm at the new prefix.

    On overflow/underflow the cache is left untouched at its old prefix.

    Raises:
        CacheInvalidError: if the cache was invalidated by a rescale.
    """
    if not cache.valid:
        raise CacheInvalidError("environment cache must be rebuilt")
    if cache.prefix_len >= tn.n_nodes:
        raise ValueError("cache already covers the whole network")
    k = tn.order[cache.prefix_len]
    env, cut = _extend(tn, cache.method, cache.env, cache.cut, k)
    result = classify(_reduce(cache.method, env))
    if result.is_finite and np.all(np.isfinite(env)):
        cache.env, cache.cut = env, cut
        cache.prefix_len += 1
        return result
    if result.is_finite:
        return NormValue.overflow()
    return result


def build_cache(tn, method, n):
    """Fresh cache advanced to prefix ``n``; also returns the last norm."""
    cache = EnvironmentCache(method)
    value = None
    for _ in range(n):
        value = extend_environment(cache, tn)
        if not value.is_finite:
            break
    return cache, value


def partial_norm(tn, method, n) -> NormValue:
    """Partial norm at ``n`` nodes, from scratch."""
    if not 1 <= n <= tn.n_nodes:
        raise ValueError(f"n must lie in 1..{tn.n_nodes}, got {n}")
    return build_cache(tn, method, n)[1]


def frobenius_norm_sq(tn: TensorNetworkLayer) -> NormValue:
    """Squared Frobenius norm of the represented tensor."""
    return partial_norm(tn, FROBENIUS, tn.n_nodes)


def linear_norm(tn: TensorNetworkLayer) -> NormValue:
    """Sum of all entries of the represented tensor."""
    return partial_norm(tn, LINEAR, tn.n_nodes)


def method_norm(tn, method) -> NormValue:
    """The norm a protocol drives to its target: ``||A||_F`` or ``||A||_L``."""
    _check_method(method)
    if method == FROBENIUS:
        return frobenius_norm_sq(tn).sqrt()
    return linear_norm(tn)


def _int_power(factor, k):
    with np.errstate(over="ignore", under="ignore"):
        scale = np.float64(factor) ** k
    if np.isfinite(scale) and scale > 0:
        return scale
    return None


def rescale_cache(cache: EnvironmentCache, factor):
    """Account for ``scale_all_nodes(tn, factor)`` in the cached environment.

    The environment of ``n`` nodes scales by ``factor**(2n)`` (frobenius) or
    ``factor**n`` (linear). Clears ``valid`` if the result is unusable.
    """
    if not cache.valid:
        raise CacheInvalidError("environment cache must be rebuilt")
    k = cache.prefix_len * (2 if cache.method == FROBENIUS else 1)
    if k == 0 or factor == 1.0:
        return
    scale = _int_power(factor, k)
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        if scale is not None:
            env = cache.env * scale
        else:
            # the combined power is out of range; step through it instead
            env = cache.env.copy()
            for _ in range(k):
                env *= factor
    if not np.all(np.isfinite(env)) or np.max(np.abs(env)) < TINY:
        cache.valid = False
    cache.env = env


def log_norm_reference(tn: TensorNetworkLayer, method) -> float:
    """Natural log of ``||A||_F**2`` or ``||A||_L`` immune to over/underflow.

    The environment is renormalized by its largest entry after every node
    and the logs of those factors are accumulated. Only chain structures
    (TT, TT-M) are supported.
    """
    _check_method(method)
    if tn.structure not in ("TT", "TTM"):
        raise ValueError(
            f"log_norm_reference supports TT and TTM, not {tn.structure}")
    env, cut = np.ones(()), []
    log_acc = 0.0
    for k in tn.order:
        env, cut = _extend(tn, method, env, cut, k)
        peak = float(np.max(np.abs(env)))
        if peak == 0.0 or not np.isfinite(peak):
            # a single node overflowing float64 is out of reach here too
            return -math.inf if peak == 0.0 else math.inf
        env = env / peak
        log_acc += math.log(peak)
    total = float(_reduce(method, env))
    if total < 0:
        return math.nan
    if total == 0:
        return -math.inf
    return log_acc + math.log(total)
