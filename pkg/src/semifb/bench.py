"""Batched forward-backward timing on replicated synthetic graphs.

Protocol: build one graph of a given shape, replicate it I times into a
block-diagonal batch, draw fresh pseudo log-likelihoods for every repetition
and time ``forward_backward_batch``. The default shapes are a numerator-like
alignment graph (454 states, 1036 arcs) and a denominator-like n-gram graph
(3022 states, 50984 arcs), with 700 frames per sequence.
"""

from __future__ import annotations

import csv
import io
import json
import os
import statistics
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .fsm import random_graph, replicate
from .errors import EmptyLatticeError
from .inference import batch_lattices, posteriors

DEFAULT_SHAPES = {"alignment": (454, 1036), "ngram": (3022, 50984)}
DEFAULT_BATCH = 128
DEFAULT_FRAMES = 700

CSV_FIELDS = ["kind", "K", "arcs", "batch", "frames", "reps", "median_s", "spread_s", "nnz_per_s"]


class BenchMemoryError(MemoryError):
    def __init__(self, required: int, available: int):
        self.required = required
        self.available = available
        super().__init__(
            f"configuration needs about {required / 2**30:.2f} GiB, only {available / 2**30:.2f} GiB available"
        )


@dataclass
class BenchRecord:
    kind: str
    K: int
    arcs: int
    batch: int
    frames: int
    reps: int
    median_s: float
    spread_s: float
    nnz_per_s: float
    times: list[float] = field(default_factory=list, repr=False)


def estimate_memory(states: int, batch: int, frames: int) -> int:
    """Rough peak bytes: likelihoods, emissions, both lattices and two posterior temporaries."""
    cells = states * batch * (frames + 1)
    return 6 * cells * 8


def available_memory() -> int:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return 2**63


def _pass(bg, Vs) -> bool:
    """One batched forward-backward with posteriors; False if any member has an empty lattice."""
    ok = True
    for res in batch_lattices(bg, Vs):
        if isinstance(res, EmptyLatticeError):
            ok = False
        else:
            posteriors(res)
    return ok


def run_bench(
    kind: str = "alignment",
    batch: int = 8,
    frames: int = DEFAULT_FRAMES,
    reps: int = 5,
    states: int | None = None,
    arcs: int | None = None,
    seed: int = 0,
    ll_range: tuple[float, float] = (-10.0, 0.0),
    max_memory: int | None = None,
) -> BenchRecord:
    if reps < 3:
        raise ValueError("need at least 3 repetitions for a median")
    K0, A0 = DEFAULT_SHAPES[kind]
    K = states or K0
    A = arcs or A0
    need = estimate_memory(K, batch, frames)
    limit = max_memory if max_memory is not None else available_memory()
    if need > limit:
        raise BenchMemoryError(need, limit)

    g = random_graph(K, A, seed, kind)
    bg = replicate(g, batch)
    rng = np.random.default_rng((seed, 1))
    lo, hi = ll_range

    # compile kernels and build cached views outside the timed region
    _pass(bg, [rng.uniform(lo, hi, (K, 2)) for _ in range(batch)])

    times = []
    for _ in range(reps):
        Vs = [rng.uniform(lo, hi, (K, frames)) for _ in range(batch)]
        t0 = time.perf_counter()
        ok = _pass(bg, Vs)
        times.append(time.perf_counter() - t0)
        if not ok:
            raise ValueError(f"{frames} frames are too few for a {kind} graph with {K} states: empty lattice")
    nnz = bg.composed.T.nnz
    return BenchRecord(
        kind=kind,
        K=K,
        arcs=A,
        batch=batch,
        frames=frames,
        reps=reps,
        median_s=statistics.median(times),
        spread_s=max(times) - min(times),
        nnz_per_s=nnz * frames * reps / sum(times),
        times=times,
    )


def scaling_fit(records: list[BenchRecord]) -> tuple[float, float, float]:
    """Least-squares line of median time against total nnz; returns (slope, intercept, r^2)."""
    x = np.array([r.arcs * r.batch for r in records], dtype=float)
    y = np.array([r.median_s for r in records])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = ((y - y.mean()) ** 2).sum()
    r2 = 1.0 - (resid**2).sum() / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def to_json(records: list[BenchRecord]) -> str:
    return json.dumps([asdict(r) for r in records], indent=2)


def to_csv(records: list[BenchRecord]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    writer.writeheader()
    for r in records:
        writer.writerow(asdict(r))
    return buf.getvalue()
