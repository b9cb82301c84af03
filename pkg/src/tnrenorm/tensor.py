"""Dense float64 tensors, pairwise contraction and overflow-aware reductions."""

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Subnormals count as zero for norm purposes.
TINY = np.finfo(np.float64).tiny
HUGE = np.finfo(np.float64).max


class DimensionMismatchError(ValueError):
    """Paired axes of a contraction have different extents."""


class NormState(enum.Enum):
    FINITE = "finite"
    OVERFLOW = "overflow"
    UNDERFLOW = "underflow"


@dataclass(frozen=True)
class NormValue:
    """Outcome of a norm computation.

    ``value`` is only meaningful when ``state`` is ``FINITE``; it then lies in
    ``[TINY, HUGE]``. ``negative`` flags a linear total that came out below
    zero, which is reported as underflow.
    """

    state: NormState
    value: float = float("nan")
    negative: bool = False

    @classmethod
    def finite(cls, value):
        return cls(NormState.FINITE, float(value))

    @classmethod
    def overflow(cls):
        return cls(NormState.OVERFLOW)

    @classmethod
    def underflow(cls, negative=False):
        return cls(NormState.UNDERFLOW, negative=negative)

    @property
    def is_finite(self):
        return self.state is NormState.FINITE

    def sqrt(self):
        """Square root, keeping the overflow/underflow state."""
        if self.is_finite:
            return NormValue.finite(np.sqrt(self.value))
        return self

    def __str__(self):
        if self.is_finite:
            return repr(self.value)
        if self.negative:
            return f"{self.state.value} (negative total)"
        return self.state.value


def classify(total) -> NormValue:
    """Map a raw accumulated scalar to a :class:`NormValue`.

    NaN can only come out of inf-inf or 0*inf chains seeded by an overflow,
    so it maps to ``OVERFLOW``.
    """
    total = float(total)
    if not np.isfinite(total):
        return NormValue.overflow()
    if total < 0.0:
        return NormValue.underflow(negative=True)
    if total < TINY:
        return NormValue.underflow()
    return NormValue.finite(total)


def as_tensor(data, shape=None) -> np.ndarray:
    """Build a float64 tensor from nested sequences or a flat row-major list."""
    arr = np.asarray(data, dtype=np.float64)
    if shape is not None:
        shape = tuple(int(s) for s in shape)
        if arr.size != int(np.prod(shape, dtype=np.int64)):
            raise ValueError(
                f"data of length {arr.size} does not fit shape {shape}")
        arr = arr.reshape(shape)
    return arr


def contract(a: np.ndarray, axes_a: Sequence[int],
             b: np.ndarray, axes_b: Sequence[int]) -> np.ndarray:
    """Sum over paired axes of ``a`` and ``b``.

    Free axes of ``a`` come first in the output, then free axes of ``b``,
    each in their original order. Empty axis lists give the outer product.
    """
    axes_a = [int(x) for x in axes_a]
    axes_b = [int(x) for x in axes_b]
    if len(axes_a) != len(axes_b):
        raise ValueError(
            f"axis lists differ in length: {len(axes_a)} vs {len(axes_b)}")
    for name, axes, t in (("a", axes_a, a), ("b", axes_b, b)):
        if len(set(axes)) != len(axes):
            raise ValueError(f"repeated axis in axes_{name}: {axes}")
        for ax in axes:
            if not -t.ndim <= ax < t.ndim:
                raise ValueError(
                    f"axis {ax} out of range for {t.ndim}-d tensor {name}")
    for ia, ib in zip(axes_a, axes_b):
        if a.shape[ia] != b.shape[ib]:
            raise DimensionMismatchError(
                f"axis {ia} of a has extent {a.shape[ia]}, "
                f"axis {ib} of b has extent {b.shape[ib]}")
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        return np.tensordot(a, b, axes=(axes_a, axes_b))


def fill_gaussian(shape, mean=1.0, std=0.5, seed=0, positive=False):
    """Gaussian entries from a generator fully determined by ``seed``.

    ``seed`` may be an int or a sequence of ints (used by the network
    builders to give every node its own stream). With ``positive`` each
    sample is replaced by its absolute value.
    """
    shape = tuple(int(s) for s in shape)
    if len(shape) == 0:
        raise ValueError("shape must be non-empty")
    if std < 0:
        raise ValueError(f"std must be non-negative, got {std}")
    rng = np.random.default_rng(seed)
    out = rng.normal(mean, std, size=shape)
    if positive:
        out = np.abs(out)
    return out


def sum_of_squares(t: np.ndarray) -> NormValue:
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        total = np.sum(np.square(t))
    return classify(total)


def sum_of_entries(t: np.ndarray) -> NormValue:
    with np.errstate(over="ignore", under="ignore", invalid="ignore"):
        total = np.sum(t)
    return classify(total)
