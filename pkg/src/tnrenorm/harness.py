"""Parameter sweeps over TT / TT-M layers and the step-count CSV."""

import csv
import hashlib
import itertools
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Sequence

from .network import InitParams, build_tt, build_ttm
from .norms import FROBENIUS, LINEAR, METHODS
from .protocols import STEP_CAUSES, RenormConfig, renormalize
from .tensor import NormState

SKIPPED = "Skipped"
SWEEP_STRUCTURES = ("TT", "TTM")

CSV_HEADER = ("structure,method,N,p,b,seed,status,steps_total,"
              "steps_one_node_overflow,steps_one_node_underflow,"
              "steps_partial_nonfinite,steps_partial_range,steps_full_residual,"
              "final_norm_log,cumulative_log_scale,wall_ms").split(",")


@dataclass
class SweepSpec:
    """Grid of protocol runs.

    ``target`` is ``"auto"`` (``p**N``) or a fixed float. ``positive`` maps a
    method to the absolute-value flag of its Gaussian init. Combinations
    whose largest node exceeds ``max_node_floats`` entries are recorded as
    skipped. With ``timing`` off, ``wall_ms`` is written as 0 so that the
    CSV depends on the spec alone.
    """

    structures: Sequence[str] = ("TT", "TTM")
    methods: Sequence[str] = (FROBENIUS,)
    n_values: Sequence[int] = (2, 3)
    p_values: Sequence[int] = (2,)
    b_values: Sequence[int] = (2,)
    seeds: Sequence[int] = (0,)
    mean: float = 1.0
    std: float = 0.5
    positive: dict = field(
        default_factory=lambda: {FROBENIUS: False, LINEAR: True})
    target: object = "auto"
    range_lo: float = 1e-3
    range_hi: float = 1e3
    max_steps: int = 1000
    max_node_floats: int = 10_000_000
    timing: bool = True

    def __post_init__(self):
        for name in ("structures", "methods", "n_values", "p_values",
                     "b_values", "seeds"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must not be empty")
            setattr(self, name, values)
        bad = set(self.structures) - set(SWEEP_STRUCTURES)
        if bad:
            raise ValueError(f"sweeps support TT and TTM only, got {sorted(bad)}")
        bad = set(self.methods) - set(METHODS)
        if bad:
            raise ValueError(f"unknown methods {sorted(bad)}")
        if self.target != "auto":
            self.target = float(self.target)

    def combinations(self):
        """Unique (structure, method, N, p, b, seed) tuples, canonical order."""
        combos = set(itertools.product(
            self.structures, self.methods, self.n_values, self.p_values,
            self.b_values, self.seeds))
        return sorted(combos)

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown sweep spec fields: {sorted(unknown)}")
        return cls(**doc)

    def to_dict(self):
        return asdict(self)


@dataclass
class ResultRow:
    structure: str
    method: str
    N: int
    p: int
    b: int
    seed: int
    status: str
    steps_total: int
    steps_one_node_overflow: int
    steps_one_node_underflow: int
    steps_partial_nonfinite: int
    steps_partial_range: int
    steps_full_residual: int
    final_norm_log: float
    cumulative_log_scale: float
    wall_ms: float

    @property
    def key(self):
        return (self.structure, self.method, self.N, self.p, self.b, self.seed)


def xi_seed_for(seed, structure, method, n, p, b):
    """Protocol RNG seed, decorrelated across combinations."""
    text = f"{seed}|{structure}|{method}|{n}|{p}|{b}".encode()
    return int.from_bytes(hashlib.blake2b(text, digest_size=8).digest(), "big")


def build_layer(structure, n, p, b, init):
    if structure == "TT":
        return build_tt(n, p, b, init)
    return build_ttm(n, p, p, b, init)


def _largest_node(structure, p, b):
    return b * b * (p * p if structure == "TTM" else p)


def prepare(spec: SweepSpec, combo):
    """The fresh network and protocol config for one combination."""
    structure, method, n, p, b, seed = combo
    init = InitParams(spec.mean, spec.std, seed,
                      bool(spec.positive.get(method, False)))
    tn = build_layer(structure, n, p, b, init)
    target = float(p) ** n if spec.target == "auto" else spec.target
    cfg = RenormConfig(target=target, range_lo=spec.range_lo,
                       range_hi=spec.range_hi, max_steps=spec.max_steps,
                       xi_seed=xi_seed_for(seed, structure, method, n, p, b),
                       method=method)
    return tn, cfg


def run_one(spec: SweepSpec, combo) -> ResultRow:
    structure, method, n, p, b, seed = combo
    if _largest_node(structure, p, b) > spec.max_node_floats:
        nan = math.nan
        return ResultRow(structure, method, n, p, b, seed, SKIPPED,
                         0, 0, 0, 0, 0, 0, nan, nan, 0.0)
    start = time.perf_counter()
    tn, cfg = prepare(spec, combo)
    rep = renormalize(tn, cfg)
    wall_ms = (time.perf_counter() - start) * 1e3 if spec.timing else 0.0
    fn = rep.final_norm
    if fn.is_finite:
        final_log = math.log(fn.value)
    else:
        final_log = math.inf if fn.state is NormState.OVERFLOW else -math.inf
    by_cause = [rep.steps_by_cause[c] for c in STEP_CAUSES]
    return ResultRow(structure, method, n, p, b, seed, rep.status,
                     rep.steps_total, *by_cause, final_log,
                     rep.cumulative_log_scale, wall_ms)


def _run_chunk(args):
    spec, combos = args
    return [run_one(spec, c) for c in combos]


def run_sweep(spec: SweepSpec, jobs: int = 1, progress=None):
    """Run every combination of ``spec``; rows come back in canonical order.

    ``jobs > 1`` spreads combinations over a process pool. ``progress`` is an
    optional callable receiving each finished row.
    """
    combos = spec.combinations()
    if jobs <= 1:
        rows = []
        for c in combos:
            rows.append(run_one(spec, c))
            if progress:
                progress(rows[-1])
        return rows
    chunks = [combos[i::jobs * 4] for i in range(jobs * 4)]
    rows = []
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        for part in pool.map(_run_chunk, [(spec, ch) for ch in chunks if ch]):
            rows.extend(part)
            if progress:
                for r in part:
                    progress(r)
    rows.sort(key=lambda r: r.key)
    return rows


def _fmt(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(rows, path):
    """Header plus one line per row in canonical order.

    ``path`` may also be an open text stream.
    """
    rows = sorted(rows, key=lambda r: r.key)
    lines = [",".join(CSV_HEADER)]
    lines += [",".join(_fmt(getattr(r, c)) for c in CSV_HEADER) for r in rows]
    text = "\n".join(lines) + "\n"
    if hasattr(path, "write"):
        path.write(text)
        return
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(text)


_INT_COLUMNS = {"N", "p", "b", "seed", "steps_total", *CSV_HEADER[8:13]}
_FLOAT_COLUMNS = {"final_norm_log", "cumulative_log_scale", "wall_ms"}


def read_csv(path):
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != CSV_HEADER:
            raise ValueError(f"unexpected CSV header in {path}")
        for rec in reader:
            values = {}
            for col in CSV_HEADER:
                if col in _INT_COLUMNS:
                    values[col] = int(rec[col])
                elif col in _FLOAT_COLUMNS:
                    values[col] = float(rec[col])
                else:
                    values[col] = rec[col]
            rows.append(ResultRow(**values))
    return rows


def median_steps(rows, keys: Sequence[str], include_failed=True):
    """Median ``steps_total`` over seeds, grouped by the ``keys`` columns.

    Skipped rows are ignored. Failed runs count with the steps they took.
    """
    groups = {}
    for r in rows:
        if r.status == SKIPPED or (not include_failed and r.status != "Success"):
            continue
        groups.setdefault(tuple(getattr(r, k) for k in keys), []).append(
            r.steps_total)
    return {k: statistics.median(v) for k, v in sorted(groups.items())}


def filter_rows(rows, **where):
    """Rows whose columns equal every given value."""
    return [r for r in rows
            if all(getattr(r, k) == v for k, v in where.items())]
