"""Tensor-network layers: TT, TT-M and PEPS builders, dense oracle, scaling."""

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .tensor import as_tensor, contract, fill_gaussian

PHYS_OUT = "physical-out"
PHYS_IN = "physical-in"
BOND = "bond"
INDEX_KINDS = (PHYS_OUT, PHYS_IN, BOND)

STRUCTURES = ("TT", "TTM", "PEPS", "custom")

DEFAULT_DENSE_CAP = 2 ** 22


class BondConsistencyError(ValueError):
    """Index descriptors of a network do not describe a consistent graph."""


class OracleTooLargeError(ValueError):
    """Dense contraction would exceed the configured entry cap."""


@dataclass(frozen=True)
class IndexRef:
    kind: str
    dim: int
    peer: Optional[tuple] = None  # (node, axis), bonds only

    @property
    def is_bond(self):
        return self.kind == BOND


@dataclass(frozen=True)
class InitParams:
    mean: float = 1.0
    std: float = 0.5
    seed: int = 0
    positive: bool = False

    def to_dict(self):
        return asdict(self)


def _bond(dim, node, axis):
    return IndexRef(BOND, int(dim), (int(node), int(axis)))


class TensorNetworkLayer:
    """Ordered collection of node tensors with a bond graph.

    ``tensors[k]`` is a float64 array whose axes are described one-to-one by
    ``indices[k]``. ``order`` is the node ordering used for partial norms;
    every prefix of it must be connected.

    ``dims`` and ``init`` are descriptive metadata (builder arguments) carried
    through serialization; they take no part in any computation.
    """

    def __init__(self, tensors, indices, structure="custom", order=None,
                 dims=None, init=None, validate=True):
        self.tensors = [as_tensor(t).copy() for t in tensors]
        self.indices = [[IndexRef(ix.kind, int(ix.dim),
                                  None if ix.peer is None else tuple(ix.peer))
                         for ix in node] for node in indices]
        self.structure = structure
        self.order = list(range(len(self.tensors)) if order is None else order)
        self.dims = dict(dims or {})
        self.init = init
        if validate:
            self.validate()

    def __len__(self):
        return len(self.tensors)

    @property
    def n_nodes(self):
        return len(self.tensors)

    def __repr__(self):
        shapes = [t.shape for t in self.tensors]
        return f"TensorNetworkLayer({self.structure}, shapes={shapes})"

    def copy(self):
        return TensorNetworkLayer(self.tensors, self.indices, self.structure,
                                  self.order, self.dims, self.init,
                                  validate=False)

    def validate(self):
        """Check bond pairing, shapes and prefix connectivity.

        Raises:
            BondConsistencyError: on any violated invariant.
        """
        n = len(self.tensors)
        if self.structure not in STRUCTURES:
            raise BondConsistencyError(f"unknown structure {self.structure!r}")
        if len(self.indices) != n:
            raise BondConsistencyError(
                f"{n} tensors but {len(self.indices)} index lists")
        if sorted(self.order) != list(range(n)):
            raise BondConsistencyError(
                f"order {self.order} is not a permutation of 0..{n - 1}")
        for k, (t, idx) in enumerate(zip(self.tensors, self.indices)):
            if t.ndim != len(idx):
                raise BondConsistencyError(
                    f"node {k}: {t.ndim} axes but {len(idx)} index descriptors")
            for ax, ix in enumerate(idx):
                if ix.kind not in INDEX_KINDS:
                    raise BondConsistencyError(
                        f"node {k} axis {ax}: unknown kind {ix.kind!r}")
                if ix.dim < 1 or t.shape[ax] != ix.dim:
                    raise BondConsistencyError(
                        f"node {k} axis {ax}: extent {t.shape[ax]} "
                        f"vs declared dim {ix.dim}")
                if not ix.is_bond:
                    if ix.peer is not None:
                        raise BondConsistencyError(
                            f"node {k} axis {ax}: physical index with a peer")
                    continue
                if ix.peer is None or len(ix.peer) != 2:
                    raise BondConsistencyError(
                        f"node {k} axis {ax}: bond without a peer")
                pn, pa = ix.peer
                if not (0 <= pn < n) or pn == k or not (
                        0 <= pa < len(self.indices[pn])):
                    raise BondConsistencyError(
                        f"node {k} axis {ax}: peer {ix.peer} does not exist")
                back = self.indices[pn][pa]
                if not back.is_bond or back.peer != (k, ax) or back.dim != ix.dim:
                    raise BondConsistencyError(
                        f"node {k} axis {ax}: peer {ix.peer} does not point back")
        seen = set()
        for pos, k in enumerate(self.order):
            if pos > 0 and not any(ix.is_bond and ix.peer[0] in seen
                                   for ix in self.indices[k]):
                raise BondConsistencyError(
                    f"prefix of length {pos + 1} is not connected "
                    f"(node {k} has no bond to earlier nodes)")
            seen.add(k)

    def physical_axes(self):
        """(node, axis) pairs of all open indices: outputs first, then inputs.

        Within each group nodes follow ``order``. For TT-M this puts every
        out index before every in index, i.e. the represented matrix has
        out-dims as rows.
        """
        outs, ins = [], []
        for k in self.order:
            for ax, ix in enumerate(self.indices[k]):
                if ix.kind == PHYS_OUT:
                    outs.append((k, ax))
                elif ix.kind == PHYS_IN:
                    ins.append((k, ax))
        return outs + ins

    def n_entries(self):
        """Number of entries of the represented tensor (exact integer)."""
        return math.prod(self.indices[k][ax].dim
                         for k, ax in self.physical_axes())


def _init_nodes(shapes, init):
    init = init or InitParams()
    return [fill_gaussian(s, init.mean, init.std, seed=[int(init.seed), k],
                          positive=init.positive)
            for k, s in enumerate(shapes)]


def _chain_indices(n, phys_kinds, phys_dims, b):
    """Index lists for a chain whose nodes carry ``phys_kinds`` open indices."""
    n_phys = len(phys_kinds)
    indices = []
    for k in range(n):
        idx = []
        if k > 0:
            # right bond of the previous node is its last axis
            prev_last = n_phys + (1 if k - 1 > 0 else 0)
            idx.append(_bond(b, k - 1, prev_last))
        idx += [IndexRef(kind, d) for kind, d in zip(phys_kinds, phys_dims)]
        if k < n - 1:
            idx.append(_bond(b, k + 1, 0))
        indices.append(idx)
    return indices


def _check_positive(**kw):
    for name, v in kw.items():
        if int(v) != v or v < 1:
            raise ValueError(f"{name} must be a positive integer, got {v}")


def build_tt(n, p, b, init=None):
    """Tensor train of ``n`` nodes, shapes (p, b), (b, p, b), ..., (b, p)."""
    _check_positive(N=n, p=p, b=b)
    indices = _chain_indices(n, [PHYS_OUT], [p], b)
    shapes = [tuple(ix.dim for ix in idx) for idx in indices]
    return TensorNetworkLayer(_init_nodes(shapes, init), indices, "TT",
                              dims={"N": n, "p": p, "b": b}, init=init)


def build_ttm(n, p_out, p_in, b, init=None):
    """Tensor-train matrix: nodes (b, p_out, p_in, b) with open chain ends."""
    _check_positive(N=n, p_out=p_out, p_in=p_in, b=b)
    indices = _chain_indices(n, [PHYS_OUT, PHYS_IN], [p_out, p_in], b)
    shapes = [tuple(ix.dim for ix in idx) for idx in indices]
    return TensorNetworkLayer(_init_nodes(shapes, init), indices, "TTM",
                              dims={"N": n, "p_out": p_out, "p_in": p_in,
                                    "b": b}, init=init)


def build_peps(rows, cols, p, b, init=None):
    """Open-boundary PEPS grid in row-major order.

    Axis layout per node: physical, then bonds to the up, left, right and
    down neighbours (whichever exist).
    """
    _check_positive(rows=rows, cols=cols, p=p, b=b)

    def node(r, c):
        return r * cols + c

    def neighbours(r, c):
        out = []
        for dr, dc in ((-1, 0), (0, -1), (0, 1), (1, 0)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < rows and 0 <= cc < cols:
                out.append((rr, cc))
        return out

    indices = []
    for r in range(rows):
        for c in range(cols):
            idx = [IndexRef(PHYS_OUT, p)]
            for rr, cc in neighbours(r, c):
                peer_axis = 1 + neighbours(rr, cc).index((r, c))
                idx.append(_bond(b, node(rr, cc), peer_axis))
            indices.append(idx)
    shapes = [tuple(ix.dim for ix in idx) for idx in indices]
    return TensorNetworkLayer(_init_nodes(shapes, init), indices, "PEPS",
                              dims={"rows": rows, "cols": cols, "p": p,
                                    "b": b}, init=init)


def contract_dense(tn: TensorNetworkLayer, cap=DEFAULT_DENSE_CAP):
    """Materialize the represented tensor. Verification use only.

    Raises:
        OracleTooLargeError: if the output would have more than ``cap``
            entries.
    """
    size = tn.n_entries()
    if size > cap:
        raise OracleTooLargeError(
            f"represented tensor has {size} entries, cap is {cap}")
    result = np.ones(())
    labels = []  # (node, axis) of every axis of ``result``
    for k in tn.order:
        pos_env, pos_node = [], []
        for i, (node, ax) in enumerate(labels):
            ix = tn.indices[node][ax]
            if ix.is_bond and ix.peer[0] == k:
                pos_env.append(i)
                pos_node.append(ix.peer[1])
        result = contract(result, pos_env, tn.tensors[k], pos_node)
        labels = ([lab for i, lab in enumerate(labels) if i not in pos_env]
                  + [(k, ax) for ax in range(tn.tensors[k].ndim)
                     if ax not in pos_node])
    perm = [labels.index(lab) for lab in tn.physical_axes()]
    return np.transpose(result, perm) if perm else result


def scale_all_nodes(tn: TensorNetworkLayer, factor):
    """Multiply every entry of every node by ``factor`` in place."""
    factor = float(factor)
    if not (np.isfinite(factor) and factor > 0):
        raise ValueError(f"factor must be finite and positive, got {factor}")
    for t in tn.tensors:
        np.multiply(t, factor, out=t)


def prefix_network(tn: TensorNetworkLayer, n):
    """The sub-network of the first ``n`` nodes in order.

    Bonds to nodes outside the prefix become open (physical-out) indices,
    which is exactly how partial norms treat cut bonds.
    """
    keep = tn.order[:n]
    new_id = {old: i for i, old in enumerate(keep)}
    tensors, indices = [], []
    for old in keep:
        idx = []
        for ix in tn.indices[old]:
            if ix.is_bond and ix.peer[0] in new_id:
                idx.append(_bond(ix.dim, new_id[ix.peer[0]], ix.peer[1]))
            elif ix.is_bond:
                idx.append(IndexRef(PHYS_OUT, ix.dim))
            else:
                idx.append(ix)
        indices.append(idx)
        tensors.append(tn.tensors[old])
    return TensorNetworkLayer(tensors, indices, "custom")
