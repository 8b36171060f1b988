"""Cycle moves, the improvement step, and the restarted local search for alpha_n."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels
from .alpha import alpha, alpha_int, alpha_scale, row_sups_int
from .dyadic import DyadicRational, KappaInstance, Permutation
from .report import SearchReport

CHOICES = ("original", "gamma_variant", "delta_variant")
READINGS = ("adopted", "inverse")
GENERATOR = "numpy.PCG64"


def _check_cycle_args(h: int, i: int, n: int) -> int:
    size = 1 << n
    if not 0 <= h < i < size:
        raise ValueError(f"cycle needs 0 <= h < i < {size}, got h={h}, i={i}")
    return size


def gamma_cycle(h: int, i: int, n: int) -> Permutation:
    """Cycle sending i to h+1 and shifting h+1, ..., i-1 up by one."""
    size = _check_cycle_args(h, i, n)
    img = list(range(size))
    for j in range(h + 1, i):
        img[j] = j + 1
    img[i] = h + 1
    return Permutation(img)


def delta_cycle(h: int, i: int, n: int) -> Permutation:
    """Cycle sending h to i-1 and shifting h+1, ..., i-1 down by one."""
    size = _check_cycle_args(h, i, n)
    img = list(range(size))
    for j in range(h + 1, i):
        img[j] = j - 1
    img[h] = i - 1
    return Permutation(img)


def _cycles(h: int, i: int, n: int, reading: str) -> tuple[Permutation, Permutation]:
    if reading == "adopted":
        return gamma_cycle(h, i, n), delta_cycle(h, i, n)
    if reading == "inverse":
        return gamma_cycle(h, i, n).inverse(), delta_cycle(h, i, n).inverse()
    raise ValueError(f"unknown reading {reading!r}; expected one of {READINGS}")


def partner_block(a: int, b: int) -> range:
    """Smallest aligned block containing both indices."""
    size = 1 << (a ^ b).bit_length()
    base = a & ~(size - 1)
    return range(base, base + size)


def _pair_ranks(perm: Permutation, i0: int, partner: int | None) -> tuple[int, int, int]:
    partner = i0 ^ 1 if partner is None else partner
    if not (0 <= i0 < perm.size and 0 <= partner < perm.size) or partner == i0:
        raise ValueError(f"invalid pair ({i0}, {partner}) for n={perm.n}")
    h, i = perm[i0], perm[partner]
    if h >= i:
        raise ValueError(f"expects perm[{i0}] < perm[{partner}], got {h} >= {i}")
    return partner, h, i


def _variant_orders(order: np.ndarray, h: int, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Rank orders after the gamma and delta cycles with parameters (h, i)."""
    og = np.concatenate([order[: h + 1], order[i : i + 1], order[h + 1 : i], order[i + 1 :]])
    od = np.concatenate([order[:h], order[h + 1 : i], order[h : h + 1], order[i:]])
    return og, od


def _variant_order_pair(perm: Permutation, i0: int, partner: int | None, reading: str):
    partner, h, i = _pair_ranks(perm, i0, partner)
    if reading == "adopted":
        og, od = _variant_orders(np.asarray(perm.order, dtype=np.int64), h, i)
    else:
        g, d = _cycles(h, i, perm.n, reading)
        og = np.asarray(g.compose(perm).order, dtype=np.int64)
        od = np.asarray(d.compose(perm).order, dtype=np.int64)
    return partner, og, od


def _variants(perm: Permutation, i0: int, partner: int | None, reading: str):
    partner, og, od = _variant_order_pair(perm, i0, partner, reading)
    return partner, Permutation.from_order(og), Permutation.from_order(od)


@dataclass(frozen=True)
class StepOutcome:
    chosen: str
    value_before: DyadicRational
    value_after: DyadicRational
    i0: int
    permutation: Permutation
    gamma_value: DyadicRational
    delta_value: DyadicRational


def improve_step(
    inst: KappaInstance,
    perm: Permutation,
    i0: int,
    partner: int | None = None,
    accept_ties: bool = False,
) -> StepOutcome:
    """Compare perm with its gamma and delta variants for the pair (i0, partner).

    The partner defaults to i0 xor 1. The better variant wins, gamma on a tie
    between the two. By default the original is kept unless a variant is
    strictly better; with ``accept_ties`` an equally good variant is taken.
    """
    partner, p_gamma, p_delta = _variants(perm, i0, partner, "adopted")
    v0 = alpha(inst, perm).value
    vg = alpha(inst, p_gamma).value
    vd = alpha(inst, p_delta).value
    best, chosen, result = (vg, "gamma_variant", p_gamma) if vg >= vd else (vd, "delta_variant", p_delta)
    moved = result != perm
    if not (best > v0 or (accept_ties and moved and best == v0)):
        best, chosen, result = v0, "original", perm
    return StepOutcome(chosen, v0, best, i0, result, vg, vd)


def pair_gap(
    inst: KappaInstance,
    perm: Permutation,
    i0: int,
    partner: int | None = None,
    reading: str = "adopted",
) -> DyadicRational:
    """Average of the two variants' row suprema minus the original's, over rows outside the pair's block.

    For the default partner i0 xor 1 the excluded rows are exactly i0 and its
    partner. Nonnegative for the adopted cycle reading.
    """
    partner, og, od = _variant_order_pair(perm, i0, partner, reading)
    keep = np.ones(inst.size, dtype=bool)
    keep[list(partner_block(i0, partner))] = False
    s0 = row_sups_int(inst, perm.order)[0][keep].sum()
    sg = row_sups_int(inst, og)[0][keep].sum()
    sd = row_sups_int(inst, od)[0][keep].sum()
    return DyadicRational(int(sg + sd - 2 * s0), inst.scale + 1)


def perturbation_bound(
    inst: KappaInstance, perm: Permutation, i0: int, partner: int | None = None
) -> tuple[DyadicRational, DyadicRational]:
    """(alpha(perm), max(alpha of variants) + 2^-n * sum of the excluded rows' losses).

    A row's loss is its supremum minus the mean of its suprema under the two
    variants. The first value never exceeds the second when the gap is nonnegative.
    """
    partner, og, od = _variant_order_pair(perm, i0, partner, "adopted")
    s0 = row_sups_int(inst, perm.order)[0]
    sg = row_sups_int(inst, og)[0]
    sd = row_sups_int(inst, od)[0]
    block = list(partner_block(i0, partner))
    # Work at one extra binary digit so the halved losses stay integers.
    loss = int((2 * s0[block] - sg[block] - sd[block]).sum())
    lhs = DyadicRational(int(s0.sum()), alpha_scale(inst))
    rhs = DyadicRational(2 * max(int(sg.sum()), int(sd.sum())) + loss, alpha_scale(inst) + 1)
    return lhs, rhs


@dataclass
class OptimizerConfig:
    n: int
    restarts: int = 100
    seed: int = 0
    max_passes: int = 200
    block_levels: int | None = None
    parallelism: int = 1
    accept_ties: bool = True
    incremental: bool = True

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.restarts < 1:
            raise ValueError("restarts must be at least 1")
        if self.max_passes < 1:
            raise ValueError("max_passes must be at least 1")
        if self.block_levels is None:
            self.block_levels = self.n - 1
        if not 0 <= self.block_levels <= self.n - 1:
            raise ValueError(f"block_levels must lie in 0..{self.n - 1}")
        if self.parallelism < 1:
            self.parallelism = os.cpu_count() or 1


def level_pairs(n: int, level: int) -> tuple[np.ndarray, np.ndarray]:
    """Pairs (a, b) with a in the lower and b in the upper half of an aligned block of size 2^(level+1).

    Level 0 gives the sibling pairs (2k, 2k+1) in ascending order.
    """
    size = 1 << n
    half = 1 << level
    a, b = [], []
    for base in range(0, size, 2 * half):
        for x in range(base, base + half):
            for y in range(base + half, base + 2 * half):
                a.append(x)
                b.append(y)
    return np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64)


def restart_generator(seed: int, restart: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(restart,))))


def starting_order(n: int, seed: int, restart: int) -> np.ndarray:
    """Rank order of the uniformly random starting permutation of a restart."""
    return restart_generator(seed, restart).permutation(1 << n).astype(np.int64)


def _python_sweep(inst, order, pa, pb, cur, accept_ties):
    """Reference sweep re-evaluating every candidate from scratch."""
    pos = np.empty_like(order)
    pos[order] = np.arange(len(order))
    improved = False
    moves = 0
    for a, b in zip(pa, pb):
        x, y = (a, b) if pos[a] < pos[b] else (b, a)
        h, k = int(pos[x]), int(pos[y])
        if k == h + 1:
            continue
        og = np.concatenate([order[: h + 1], [y], order[h + 1 : k], order[k + 1 :]])
        od = np.concatenate([order[:h], order[h + 1 : k], [x], order[k:]])
        vg = alpha_int(inst, og)
        vd = alpha_int(inst, od)
        best = max(vg, vd)
        if best > cur or (accept_ties and best == cur):
            improved |= best > cur
            order[:] = og if vg >= vd else od
            pos[order] = np.arange(len(order))
            cur = best
            moves += 1
    return cur, improved, moves


@dataclass
class RestartResult:
    restart: int
    start_total: int
    total: int
    passes: int
    moves: int
    order: np.ndarray = field(repr=False)


def run_restart(inst: KappaInstance, cfg: OptimizerConfig, restart: int, order: np.ndarray | None = None) -> RestartResult:
    """Improve one starting permutation level by level until a full cycle brings no strict gain."""
    order = starting_order(inst.n, cfg.seed, restart) if order is None else np.array(order, dtype=np.int64)
    size = inst.size
    start_total = alpha_int(inst, order)
    cur = start_total
    pairs = [level_pairs(inst.n, lvl) for lvl in range(cfg.block_levels + 1)]
    passes = 0
    moves = 0
    if cfg.incremental:
        E = np.ascontiguousarray(inst.matrix(), dtype=np.int64)
        pos = np.empty(size, dtype=np.int64)
        pos[order] = np.arange(size)
        P = np.empty((size, size), dtype=np.int64)
        L = np.empty_like(P)
        R = np.empty_like(P)
        _kernels.prefix_tables(E, order, P, L, R)

        def sweep(pa, pb, value):
            return _kernels.pair_sweep(E, order, pos, P, L, R, pa, pb, value, cfg.accept_ties)
    else:

        def sweep(pa, pb, value):
            return _python_sweep(inst, order, pa, pb, value, cfg.accept_ties)

    for _ in range(cfg.max_passes):
        cycle_improved = False
        for pa, pb in pairs:
            for _ in range(cfg.max_passes):
                cur, improved, applied = sweep(pa, pb, cur)
                cur = int(cur)
                passes += 1
                moves += int(applied)
                cycle_improved |= bool(improved)
                if not improved:
                    break
        if not cycle_improved:
            break
    return RestartResult(restart, start_total, cur, passes, moves, order.copy())


def optimize(inst: KappaInstance, cfg: OptimizerConfig) -> SearchReport:
    """Restarted local search; the best restart wins, the smallest restart index on ties."""
    if cfg.n != inst.n:
        raise ValueError(f"level mismatch: instance has n={inst.n}, config has n={cfg.n}")
    start = time.perf_counter()
    if cfg.parallelism > 1:
        with ThreadPoolExecutor(max_workers=cfg.parallelism) as pool:
            results = list(pool.map(lambda r: run_restart(inst, cfg, r), range(cfg.restarts)))
    else:
        results = [run_restart(inst, cfg, r) for r in range(cfg.restarts)]
    best = results[0]
    for res in results[1:]:
        if res.total > best.total:
            best = res
    witness = Permutation.from_order(best.order)
    scale = alpha_scale(inst)
    identity_value = alpha(inst, Permutation.identity(inst.n)).value
    flags = [
        "moves: element pairs across the two halves of aligned blocks, levels 0.."
        f"{cfg.block_levels}, scanned level by level",
        "equal-value moves accepted" if cfg.accept_ties else "equal-value moves rejected",
    ]
    if inst.flagged:
        flags.append("n=1: kappa(0) exceeds the level count; tabulated value differs")
    per_restart = [
        {
            "restart": r.restart,
            "start_value": DyadicRational(r.start_total, scale).decimal(),
            "final_value": DyadicRational(r.total, scale).decimal(),
            "passes": r.passes,
            "moves": r.moves,
        }
        for r in results
    ]
    config = asdict(cfg)
    config.pop("parallelism")
    report = SearchReport(
        n=inst.n,
        best_value=DyadicRational(best.total, scale),
        witness=witness,
        nodes_explored=sum(r.passes for r in results),
        pruned=0,
        mode="local_search",
        seeds=[cfg.seed],
        identity_value=identity_value,
        flags=flags,
        extra={
            "config": config,
            "generator": GENERATOR,
            "restarts": cfg.restarts,
            "success_count": sum(1 for r in results if r.total == best.total),
            "best_restart": best.restart,
            "per_restart": per_restart,
        },
    )
    report.wall_time = time.perf_counter() - start
    return report


def swap_normalize(perm: Permutation, i0: int) -> Permutation:
    """Exchange the images of i0 and i0 xor 1 when needed so that perm[i0] < perm[i0 xor 1]."""
    j = i0 ^ 1
    if perm[i0] < perm[j]:
        return perm
    img = list(perm.image)
    img[i0], img[j] = img[j], img[i0]
    return Permutation(img)


# Name used by the interface contract.
proposition2_gap = pair_gap
