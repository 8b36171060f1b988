"""Ground-truth suprema: exhaustive enumeration, branch-and-bound, signed maps."""

from __future__ import annotations

import itertools
import time
from typing import Sequence

import numpy as np

from . import _kernels
from .alpha import SignedMap, alpha, alpha_int, alpha_scale, alpha_signed_map
from .dyadic import DyadicRational, KappaInstance, Permutation
from .report import TABLE_ONE_IDENTITY, SearchReport

MAX_EXHAUSTIVE_LEVEL = 3
MAX_BNB_LEVEL = 4
MAX_SIGNED_MAP_LEVEL = 2
BATCH = 4096


class SearchLimitError(ValueError):
    """Requested level is beyond what the chosen mode can handle."""


def _convention_flags(n: int, identity_value: DyadicRational) -> list[str]:
    if n == 1:
        return [
            f"n=1: tabulated identity value {TABLE_ONE_IDENTITY[1]} differs from the "
            f"computed {identity_value.decimal()} under the adopted summation convention"
        ]
    return []


def _batch_totals(inst: KappaInstance, images: np.ndarray) -> np.ndarray:
    """Integer alpha numerators for a batch of permutations given by images, shape (M, N)."""
    orders = np.argsort(images, axis=1)
    E = inst.matrix()
    # gathered[m, i, r] = E[i, orders[m, r]]
    gathered = E[:, orders].transpose(1, 0, 2)
    return np.abs(np.cumsum(gathered, axis=2)).max(axis=2).sum(axis=1)


def _swap_normalized(image: Sequence[int]) -> bool:
    return all(image[k] < image[k + 1] for k in range(0, len(image), 2))


def exhaustive_search(n: int, use_swap_symmetry: bool = False) -> SearchReport:
    """Maximum of alpha over all permutations; the witness is the lexicographically smallest maximizer.

    With ``use_swap_symmetry`` only permutations with image(2k) < image(2k+1)
    are evaluated; the lexicographically smallest maximizer always has this
    form, so the result is identical.
    """
    if not 1 <= n <= MAX_EXHAUSTIVE_LEVEL:
        raise SearchLimitError(f"exhaustive search supports 1 <= n <= {MAX_EXHAUSTIVE_LEVEL}, got {n}")
    start = time.perf_counter()
    inst = KappaInstance.for_level(n)
    size = inst.size
    best_total = -1
    best_image: tuple[int, ...] | None = None
    evaluated = 0
    skipped = 0
    perms = itertools.permutations(range(size))
    while True:
        batch = list(itertools.islice(perms, BATCH))
        if not batch:
            break
        if use_swap_symmetry:
            kept = [p for p in batch if _swap_normalized(p)]
            skipped += len(batch) - len(kept)
            batch = kept
            if not batch:
                continue
        totals = _batch_totals(inst, np.asarray(batch, dtype=np.int64))
        evaluated += len(batch)
        idx = int(np.argmax(totals))
        if totals[idx] > best_total:
            best_total = int(totals[idx])
            best_image = batch[idx]
    witness = Permutation(best_image)
    identity_value = alpha(inst, Permutation.identity(n)).value
    report = SearchReport(
        n=n,
        best_value=DyadicRational(best_total, alpha_scale(inst)),
        witness=witness,
        nodes_explored=evaluated,
        pruned=skipped,
        mode="enumeration",
        identity_value=identity_value,
        flags=_convention_flags(n, identity_value),
        extra={"use_swap_symmetry": use_swap_symmetry},
    )
    report.wall_time = time.perf_counter() - start
    return report


def completion_bound(inst: KappaInstance, partial_order: Sequence[int]) -> DyadicRational:
    """Admissible upper bound on alpha over all completions of a partial rank order."""
    partial = np.asarray(partial_order, dtype=np.int64)
    E = inst.matrix()
    placed = E[:, partial] if len(partial) else np.zeros((inst.size, 0), dtype=np.int64)
    prefix = np.cumsum(placed, axis=1)
    cur = prefix[:, -1] if len(partial) else np.zeros(inst.size, dtype=np.int64)
    smax = np.abs(prefix).max(axis=1) if len(partial) else np.zeros(inst.size, dtype=np.int64)
    mask = np.ones(inst.size, dtype=bool)
    mask[partial] = False
    rest = E[:, mask]
    pos = np.where(rest > 0, rest, 0).sum(axis=1)
    neg = -np.where(rest < 0, rest, 0).sum(axis=1)
    bound = np.maximum(smax, np.maximum(cur + pos, neg - cur))
    return DyadicRational(int(bound.sum()), alpha_scale(inst))


def best_completion(inst: KappaInstance, partial_order: Sequence[int]) -> DyadicRational:
    """Exact best alpha over all completions, by enumeration (small n only)."""
    partial = [int(v) for v in partial_order]
    rest = [j for j in range(inst.size) if j not in set(partial)]
    E = inst.matrix()
    best = -1
    tails = itertools.permutations(rest)
    while batch := list(itertools.islice(tails, BATCH)):
        orders = np.hstack([np.tile(np.asarray(partial, dtype=np.int64), (len(batch), 1)), np.asarray(batch, dtype=np.int64)])
        gathered = E[:, orders].transpose(1, 0, 2)
        best = max(best, int(np.abs(np.cumsum(gathered, axis=2)).max(axis=2).sum(axis=1).max()))
    return DyadicRational(best, alpha_scale(inst))


def branch_and_bound(n: int, node_budget: int = 10**9, use_swap_symmetry: bool = True) -> SearchReport:
    """Proven maximum of alpha by rank-by-rank branch-and-bound.

    The incumbent starts at the identity permutation, so the witness is the
    identity whenever nothing strictly better exists; otherwise it is the first
    strictly better leaf found in depth-first order. When the node budget runs
    out the report is marked incomplete and carries the best incumbent.
    """
    if not 1 <= n <= MAX_BNB_LEVEL:
        raise SearchLimitError(f"branch-and-bound supports 1 <= n <= {MAX_BNB_LEVEL}, got {n}")
    if node_budget < 1:
        raise ValueError("node budget must be positive")
    start = time.perf_counter()
    inst = KappaInstance.for_level(n)
    E = np.ascontiguousarray(inst.matrix(), dtype=np.int64)
    identity = Permutation.identity(n)
    identity_total = alpha_int(inst, identity.order)
    best_order = np.arange(inst.size, dtype=np.int64)
    best, nodes, pruned, exhausted, improved = _kernels.branch_and_bound(
        E, identity_total, int(node_budget), use_swap_symmetry, best_order
    )
    witness = Permutation.from_order(best_order) if improved else identity
    identity_value = DyadicRational(identity_total, alpha_scale(inst))
    flags = _convention_flags(n, identity_value)
    if exhausted:
        flags.append(f"node budget {node_budget} exhausted: value is a lower bound only")
    report = SearchReport(
        n=n,
        best_value=DyadicRational(int(best), alpha_scale(inst)),
        witness=witness,
        nodes_explored=max(1, int(nodes)),
        pruned=int(pruned),
        mode="branch_and_bound",
        complete=not exhausted,
        identity_value=identity_value,
        flags=flags,
        extra={"node_budget": int(node_budget), "use_swap_symmetry": use_swap_symmetry},
    )
    report.wall_time = time.perf_counter() - start
    return report


def signed_map_supremum(n: int, return_witness: bool = False):
    """Exact maximum of the signed-map functional over all maps and sign vectors."""
    if not 1 <= n <= MAX_SIGNED_MAP_LEVEL:
        raise SearchLimitError(f"signed-map supremum supports 1 <= n <= {MAX_SIGNED_MAP_LEVEL}, got {n}")
    inst = KappaInstance.for_level(n)
    size = inst.size
    best: DyadicRational | None = None
    witness: SignedMap | None = None
    for image in itertools.product(range(size), repeat=size):
        for signs in itertools.product((1, -1), repeat=size):
            m = SignedMap(n, image, signs)
            v = alpha_signed_map(inst, m)
            if best is None or v > best:
                best, witness = v, m
    return (best, witness) if return_witness else best
