"""Exact row suprema and the permutation functional alpha_n."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dyadic import DyadicRational, KappaInstance, Permutation

ROW_CHUNK_CELLS = 1 << 22


@dataclass(frozen=True)
class SignedMap:
    """Arbitrary map of {0, ..., 2**n - 1} into itself with a sign per index."""

    n: int
    image: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        size = 1 << self.n
        object.__setattr__(self, "image", tuple(int(v) for v in self.image))
        object.__setattr__(self, "signs", tuple(int(v) for v in self.signs))
        if len(self.image) != size or len(self.signs) != size:
            raise ValueError(f"a signed map at n={self.n} needs {size} images and signs")
        for j, v in enumerate(self.image):
            if not 0 <= v < size:
                raise ValueError(f"image out of range at index {j}")
        for j, e in enumerate(self.signs):
            if e not in (1, -1):
                raise ValueError(f"sign at index {j} must be +1 or -1, got {e}")

    @classmethod
    def from_permutation(cls, perm: Permutation, signs: Sequence[int] | None = None) -> "SignedMap":
        signs = signs if signs is not None else (1,) * perm.size
        return cls(perm.n, perm.image, tuple(signs))

    def negated(self) -> "SignedMap":
        return SignedMap(self.n, self.image, tuple(-e for e in self.signs))


@dataclass(frozen=True)
class AlphaValue:
    value: DyadicRational
    per_row: tuple[DyadicRational, ...]
    argmax_h: tuple[int, ...]
    total: int
    scale: int

    @property
    def n(self) -> int:
        return len(self.per_row).bit_length() - 1


def _check_level(inst: KappaInstance, n: int) -> None:
    if inst.n != n:
        raise ValueError(f"level mismatch: instance has n={inst.n}, input has n={n}")


def _row_chunks(size: int) -> Iterable[np.ndarray]:
    step = max(1, ROW_CHUNK_CELLS // size)
    for start in range(0, size, step):
        yield np.arange(start, min(size, start + step), dtype=np.int64)


def row_sups_int(
    inst: KappaInstance,
    order: Sequence[int] | np.ndarray,
    rows: np.ndarray | None = None,
    include_full_prefix: bool = True,
) -> tuple[np.ndarray, np.ndarray]:
    """Integer row suprema (at ``inst.scale``) and the first maximizing h.

    ``order[r]`` is the index at rank r. With ``include_full_prefix=False``
    the last prefix (h = 2**n - 1) is left out.
    """
    order = np.asarray(order, dtype=np.int64)
    rows = np.arange(inst.size, dtype=np.int64) if rows is None else np.asarray(rows, dtype=np.int64)
    sups = np.empty(len(rows), dtype=np.int64)
    arg = np.empty(len(rows), dtype=np.int64)
    width = inst.size if include_full_prefix else inst.size - 1
    if width == 0:
        sups[:] = 0
        arg[:] = 0
        return sups, arg
    step = max(1, ROW_CHUNK_CELLS // inst.size)
    for start in range(0, len(rows), step):
        chunk = rows[start : start + step]
        prefix = np.abs(np.cumsum(inst.rows(chunk)[:, order], axis=1)[:, :width])
        a = np.argmax(prefix, axis=1)
        arg[start : start + step] = a
        sups[start : start + step] = prefix[np.arange(len(chunk)), a]
    return sups, arg


def alpha_int(inst: KappaInstance, order: Sequence[int] | np.ndarray, include_full_prefix: bool = True) -> int:
    """Numerator of alpha_n at scale ``n + inst.scale`` for the permutation with this rank order."""
    sups, _ = row_sups_int(inst, order, include_full_prefix=include_full_prefix)
    return int(sups.sum())


def alpha_scale(inst: KappaInstance) -> int:
    return inst.n + inst.scale


def row_sup(inst: KappaInstance, perm: Permutation, i: int) -> DyadicRational:
    _check_level(inst, perm.n)
    i = inst.check_index(i, "row")
    sups, _ = row_sups_int(inst, perm.order, rows=np.array([i]))
    return DyadicRational(int(sups[0]), inst.scale)


def alpha(inst: KappaInstance, perm: Permutation, include_full_prefix: bool = True) -> AlphaValue:
    """alpha_n(perm): the average over rows of the largest absolute prefix sum."""
    _check_level(inst, perm.n)
    sups, arg = row_sups_int(inst, perm.order, include_full_prefix=include_full_prefix)
    total = int(sups.sum())
    return AlphaValue(
        value=DyadicRational(total, alpha_scale(inst)),
        per_row=tuple(DyadicRational(int(v), inst.scale) for v in sups),
        argmax_h=tuple(int(v) for v in arg),
        total=total,
        scale=alpha_scale(inst),
    )


def alpha_signed_map(inst: KappaInstance, m: SignedMap) -> DyadicRational:
    """Signed-map variant: prefixes collect every j with image(j) <= h, weighted by its sign."""
    _check_level(inst, m.n)
    image = np.asarray(m.image, dtype=np.int64)
    signs = np.asarray(m.signs, dtype=np.int64)
    total = 0
    for chunk in _row_chunks(inst.size):
        weighted = inst.rows(chunk) * signs[None, :]
        by_level = np.zeros((len(chunk), inst.size), dtype=np.int64)
        np.add.at(by_level, (slice(None), image), weighted)
        total += int(np.abs(np.cumsum(by_level, axis=1)).max(axis=1).sum())
    return DyadicRational(total, alpha_scale(inst))


def map_to_permutation(m: SignedMap | Sequence[int]) -> Permutation:
    """Spread each fiber of the map into consecutive ranks, ordered by index."""
    image = m.image if isinstance(m, SignedMap) else tuple(int(v) for v in m)
    order = np.argsort(np.asarray(image, dtype=np.int64), kind="stable")
    return Permutation.from_order(order)


def subset_permutation(subset: Iterable[int], perm: Permutation) -> Permutation:
    """List the members of ``subset`` first, then the rest, each part in the order of ``perm``."""
    members = set(int(j) for j in subset)
    for j in members:
        if not 0 <= j < perm.size:
            raise ValueError(f"subset element {j} out of range")
    first = [j for j in perm.order if j in members]
    rest = [j for j in perm.order if j not in members]
    return Permutation.from_order(first + rest)


def map_prefix_sup(values: Sequence, image: Sequence[int]):
    """max over h of |sum of values[j] over j with image[j] <= h|, in the values' own arithmetic."""
    size = len(image)
    buckets = [0] * size
    for j, v in enumerate(values):
        buckets[image[j]] = buckets[image[j]] + v
    best = 0
    run = 0
    for v in buckets:
        run = run + v
        if abs(run) > best:
            best = abs(run)
    return best
