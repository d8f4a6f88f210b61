"""Set partitions of agents into exactly k blocks, and the worst-grouping search."""

from __future__ import annotations

import itertools
from functools import lru_cache
from math import factorial
from typing import Iterator

import numpy as np

from ..core import Grouping, Instance, Objective
from ..objectives import distortion

DEFAULT_MAX_AGENTS = 12
_BATCH = 50_000


class EnumerationBudgetExceeded(RuntimeError):
    pass


@lru_cache(maxsize=None)
def stirling2(n: int, k: int) -> int:
    """Number of partitions of an n-set into k non-empty blocks."""
    if n == k:
        return 1
    if k == 0 or k > n:
        return 0
    return k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)


def count_equal_partitions(n: int, k: int) -> int:
    if k < 1 or n % k:
        return 0
    lam = n // k
    return factorial(n) // (factorial(lam) ** k * factorial(k))


def set_partitions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings of length n using exactly labels 0..k-1.

    Label ``labels[i]`` is the block of agent ``i``; blocks are numbered by
    first appearance, so every partition appears exactly once.
    """
    if not 1 <= k <= n:
        return
    labels = [0] * n

    def rec(i: int, used: int):
        if i == n:
            yield tuple(labels)
            return
        remaining = n - i
        # must still open k - used new blocks
        if remaining == k - used:
            labels[i] = used
            yield from rec(i + 1, used + 1)
            return
        for lab in range(used):
            labels[i] = lab
            yield from rec(i + 1, used)
        if used < k:
            labels[i] = used
            yield from rec(i + 1, used + 1)

    yield from rec(0, 0)


def equal_partitions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """Partitions into k blocks of size n/k, as label tuples (blocks by first member)."""
    if k < 1 or n % k:
        return
    lam = n // k
    labels = [-1] * n

    def rec(block: int, free: list[int]):
        if not free:
            yield tuple(labels)
            return
        head, rest = free[0], free[1:]
        for mates in itertools.combinations(rest, lam - 1):
            chosen = (head, *mates)
            for i in chosen:
                labels[i] = block
            left = [i for i in rest if i not in mates]
            yield from rec(block + 1, left)
        for i in (head, *rest):
            labels[i] = -1

    yield from rec(0, list(range(n)))


def _batched_ratios(d: np.ndarray, batch: np.ndarray, k: int, obj: Objective, winner: int) -> np.ndarray:
    """Distortion of ``winner`` for each label row of ``batch`` (B x n)."""
    onehot = batch[:, :, None] == np.arange(k)[None, None, :]  # B x n x k
    if obj is Objective.MAX_OF_AVG:
        sums = np.einsum("bnk,nm->bkm", onehot.astype(float), d)
        sizes = onehot.sum(axis=1)[:, :, None]
        costs = (sums / sizes).max(axis=1)
    else:
        masked = np.where(onehot[:, :, :, None], d[None, :, None, :], -np.inf)  # B x n x k x m
        costs = masked.max(axis=1).sum(axis=1) / k
    w = costs[:, winner]
    opt = costs.min(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(opt > 0, w / np.where(opt > 0, opt, 1.0), np.where(w > 0, np.inf, 1.0))
    return r


def worst_grouping(
    inst: Instance,
    k: int,
    obj: Objective | str,
    winner: int,
    symmetric_only: bool = False,
    max_agents: int = DEFAULT_MAX_AGENTS,
) -> tuple[Grouping, float]:
    """Grouping of the agents into exactly ``k`` groups that maximises the winner's distortion.

    Enumerates every set partition (or every equal-size partition when
    ``symmetric_only``) with no sampling; instances with more than
    ``max_agents`` agents are refused. The first maximiser in enumeration
    order is returned together with its ratio.
    """
    obj = Objective.parse(obj)
    n = inst.n
    if n > max_agents:
        raise EnumerationBudgetExceeded(f"n={n} exceeds the enumeration budget of {max_agents} agents")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    if symmetric_only and n % k:
        raise ValueError(f"symmetric groupings need k | n (n={n}, k={k})")
    if not 0 <= winner < inst.m:
        raise IndexError(f"winner {winner} out of range")
    gen = equal_partitions(n, k) if symmetric_only else set_partitions(n, k)
    d = np.asarray(inst.agent_alt)
    best_ratio = -1.0
    best_labels = None
    while True:
        chunk = list(itertools.islice(gen, _BATCH))
        if not chunk:
            break
        arr = np.array(chunk, dtype=np.intp)
        r = _batched_ratios(d, arr, k, obj, winner)
        i = int(np.argmax(r))
        if r[i] > best_ratio:
            best_ratio = float(r[i])
            best_labels = chunk[i]
    grp = Grouping.from_labels(best_labels)
    # recompute through the objectives module so the reported ratio is the canonical one
    return grp, distortion(inst, grp, obj, winner).ratio
