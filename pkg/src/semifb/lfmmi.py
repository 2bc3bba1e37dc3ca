"""Lattice-free MMI loss and its gradient.

For one utterance with network outputs Phi (K×N, entry (i, n) = log p(x_n | z_n = i)):

    loss = log p(X | G_num) - log p(X | G_den)
    d loss / d Phi[i, n] = p(z_n = i | X, G_num) - p(z_n = i | X, G_den)

Both terms come from exact forward-backward runs; nothing is approximated.
The loss is per utterance and not divided by the frame count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DimensionMismatchError, EmptyLatticeError
from .fsm import WeightedGraph, compose_batch, replicate
from .inference import FBResult, as_likelihoods, batch_lattices, lattices, posteriors


@dataclass(frozen=True, eq=False)
class LossResult:
    loss: float
    grad: np.ndarray  # K×N, probability domain
    logZ_num: float
    logZ_den: float


@dataclass(eq=False)
class BatchLossResult:
    """Per-utterance results; failed members map to their error in ``errors``."""

    results: list[LossResult | None]
    errors: dict[int, Exception] = field(default_factory=dict)

    @property
    def total_loss(self) -> float:
        return float(sum(r.loss for r in self.results if r is not None))

    @property
    def frames(self) -> int:
        return int(sum(r.grad.shape[1] for r in self.results if r is not None))


def _check_dims(num: WeightedGraph, den: WeightedGraph, K: int) -> None:
    if not (num.K == den.K == K):
        raise DimensionMismatchError(
            f"numerator ({num.K}), denominator ({den.K}) and likelihoods ({K}) must share one state space"
        )


def _combine(num_fb: FBResult, den_fb: FBResult) -> LossResult:
    grad = posteriors(num_fb).probs - posteriors(den_fb).probs
    return LossResult(num_fb.logZ - den_fb.logZ, grad, num_fb.logZ, den_fb.logZ)


def _lattices_or_raise(g, Phi, which: str):
    try:
        return lattices(g, Phi)
    except EmptyLatticeError as exc:
        raise EmptyLatticeError(f"empty {which} lattice: no accepting path in {Phi.N} frames") from exc


def lfmmi(num: WeightedGraph, den: WeightedGraph, Phi) -> LossResult:
    Phi = as_likelihoods(Phi)
    _check_dims(num, den, Phi.K)
    return _combine(_lattices_or_raise(num, Phi, "numerator"), _lattices_or_raise(den, Phi, "denominator"))


def lfmmi_batch(nums: Sequence[WeightedGraph], den: WeightedGraph, Phis: Sequence) -> BatchLossResult:
    """Batched LF-MMI: numerators composed block-diagonally, the denominator replicated.

    Each member's result equals its solo :func:`lfmmi` bit for bit. Dimension
    errors abort the batch; an empty lattice only fails its own member.
    """
    Phis = [as_likelihoods(P) for P in Phis]
    if len(nums) != len(Phis):
        raise DimensionMismatchError(f"{len(nums)} numerator graphs but {len(Phis)} likelihood tensors")
    if not nums:
        raise ValueError("lfmmi_batch needs at least one utterance")
    for num, P in zip(nums, Phis):
        _check_dims(num, den, P.K)

    num_res = batch_lattices(compose_batch(list(nums)), Phis)
    den_res = batch_lattices(replicate(den, len(nums)), Phis)
    out = BatchLossResult([])
    for i, (n_fb, d_fb) in enumerate(zip(num_res, den_res)):
        if isinstance(n_fb, EmptyLatticeError):
            out.errors[i] = EmptyLatticeError("empty numerator lattice", member=i)
        elif isinstance(d_fb, EmptyLatticeError):
            out.errors[i] = EmptyLatticeError("empty denominator lattice", member=i)
        else:
            out.results.append(_combine(n_fb, d_fb))
            continue
        out.results.append(None)
    return out
