"""Linear and pseudo-linear permutations, A-set counts, and the sqrt(n) bound checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .alpha import alpha_int, alpha_scale
from .dyadic import DyadicRational, KappaInstance, Permutation, kappa_array

EXHAUSTIVE_LINEAR_LEVEL = 6
CHUNK_CELLS = 1 << 22

# Permutations of {0..7} used as fixtures for the linearity checks.
LINEAR_EXAMPLE = Permutation([0, 4, 2, 6, 1, 5, 3, 7])
PSEUDO_LINEAR_EXAMPLE = Permutation([0, 1, 2, 3, 4, 5, 7, 6])
NON_PSEUDO_COMPOSITION = LINEAR_EXAMPLE.compose(PSEUDO_LINEAR_EXAMPLE)
PSEUDO_WITH_BAD_INVERSE = Permutation([0, 6, 2, 5, 3, 4, 1, 7])


def _chunks(size: int, width: int) -> Iterable[np.ndarray]:
    step = max(1, CHUNK_CELLS // max(1, width))
    for start in range(0, size, step):
        yield np.arange(start, min(size, start + step), dtype=np.int64)


def is_linear(perm: Permutation) -> bool:
    """perm(i xor j) = perm(i) xor perm(j) for all i, j."""
    img = perm.array
    size = perm.size
    if img[0] != 0:
        return False
    if perm.n <= EXHAUSTIVE_LINEAR_LEVEL:
        idx = np.arange(size)
        return bool(np.array_equal(img[idx[:, None] ^ idx[None, :]], img[:, None] ^ img[None, :]))
    # A map fixing 0 is linear iff it is the XOR-combination of its values on the unit vectors.
    spanned = np.zeros(size, dtype=np.int64)
    for b in range(perm.n):
        bit = 1 << b
        spanned[bit : 2 * bit] = spanned[:bit] ^ img[bit]
    return bool(np.array_equal(spanned, img))


def is_pseudo_linear(perm: Permutation) -> bool:
    """kappa(perm(i xor j) xor perm(0)) = kappa(perm(i) xor perm(j)) for all i, j."""
    img = perm.array
    size = perm.size
    cols = np.arange(size, dtype=np.int64)
    for rows in _chunks(size, size):
        left = kappa_array(img[rows[:, None] ^ cols[None, :]] ^ img[0])
        right = kappa_array(img[rows][:, None] ^ img[None, :])
        if not np.array_equal(left, right):
            return False
    return True


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank over the two-element field by Gaussian elimination."""
    m = (np.array(matrix, dtype=np.uint8) & 1).copy()
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        pivot = next((r for r in range(rank, rows) if m[r, c]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(rows):
            if r != rank and m[r, c]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def linear_from_gf2_matrix(matrix: Sequence[Sequence[int]]) -> Permutation:
    """Permutation i -> M * bits(i), with bit b of i (least significant first) as coordinate b."""
    m = np.array(matrix, dtype=np.int64) & 1
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError("expected a nonempty square binary matrix")
    n = m.shape[0]
    if gf2_rank(m) < n:
        raise ValueError("matrix is singular over GF(2)")
    # Column b of M is the image of the unit vector 2^b.
    unit_images = [int(sum(int(m[r, b]) << r for r in range(n))) for b in range(n)]
    size = 1 << n
    img = np.zeros(size, dtype=np.int64)
    for b, v in enumerate(unit_images):
        bit = 1 << b
        img[bit : 2 * bit] = img[:bit] ^ v
    return Permutation(img.tolist())


def random_invertible_gf2(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        m = rng.integers(0, 2, size=(n, n))
        if gf2_rank(m) == n:
            return m


def random_linear(n: int, rng: np.random.Generator) -> Permutation:
    return linear_from_gf2_matrix(random_invertible_gf2(n, rng))


def random_pseudo_linear(n: int, rng: np.random.Generator, attempts: int = 200) -> Permutation | None:
    """A pseudo-linear permutation that is not linear, or None if none was found.

    Candidates are a random linear permutation composed on either side with a
    transposition of two indices that differ only in low bits; each candidate
    is re-validated.
    """
    size = 1 << n
    for _ in range(attempts):
        lin = random_linear(n, rng)
        a = int(rng.integers(size))
        b = a ^ int(rng.integers(1, min(size, 4)))
        swap = list(range(size))
        swap[a], swap[b] = swap[b], swap[a]
        tau = Permutation(swap)
        cand = lin.compose(tau) if rng.integers(2) else tau.compose(lin)
        if is_pseudo_linear(cand) and not is_linear(cand):
            return cand
    return None


RELATIONS = ("equal", "less")


@dataclass(frozen=True)
class ASetQuery:
    """The set of j with kappa(i xor j) [k_relation] k and kappa(h xor perm(j)) [l_relation] l."""

    k_relation: str
    l_relation: str
    k: int
    l: int
    i: int
    h: int

    def validate(self, n: int) -> None:
        for rel, val, name in ((self.k_relation, self.k, "k"), (self.l_relation, self.l, "l")):
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r} for {name}")
            lo, hi = (3, n) if rel == "equal" else (1, n + 1)
            if not lo <= val <= hi:
                raise ValueError(f"{name}={val} outside {lo}..{hi} for relation {rel!r}")
        size = 1 << n
        if not (0 <= self.i < size and 0 <= self.h < size):
            raise ValueError("i and h must be indices")


def _holds(rel: str, values: np.ndarray, bound: int) -> np.ndarray:
    return values == bound if rel == "equal" else values < bound


def a_set(inst: KappaInstance, perm: Permutation, q: ASetQuery) -> np.ndarray:
    q.validate(inst.n)
    j = np.arange(inst.size, dtype=np.int64)
    mask = _holds(q.k_relation, kappa_array(q.i ^ j), q.k) & _holds(
        q.l_relation, kappa_array(q.h ^ perm.array), q.l
    )
    return j[mask]


def a_set_size(inst: KappaInstance, perm: Permutation, q: ASetQuery) -> int:
    return len(a_set(inst, perm, q))


def identity_aset_size(i: int, h: int, k: int, l: int) -> int:
    """Closed form for the identity permutation, i != h, 3 <= k, l."""
    m = (i ^ h).bit_length() if i != h else 2
    if l == m and m > k:
        return 1 << (k - 1)
    if k == m and m > l:
        return 1 << (l - 1)
    if k == l and l > m:
        return 1 << (l - 1)
    return 0


def level_histogram(inst: KappaInstance, perm: Permutation, rows: np.ndarray, h_of_row: np.ndarray) -> np.ndarray:
    """hist[r, a, b] = #{j : kappa(rows[r] xor j) = a, kappa(h_of_row[r] xor perm(j)) = b}."""
    width = inst.n + 2
    j = np.arange(inst.size, dtype=np.int64)
    ka = kappa_array(rows[:, None] ^ j[None, :])
    kb = kappa_array(h_of_row[:, None] ^ perm.array[None, :])
    codes = (np.arange(len(rows))[:, None] * width + ka) * width + kb
    hist = np.bincount(codes.ravel(), minlength=len(rows) * width * width)
    return hist.reshape(len(rows), width, width)


def less_equal_counts(hist: np.ndarray) -> np.ndarray:
    """From a level histogram, cnt[r, k, l] = |A_{<k,=l}| for k = 0..n+2."""
    rows, width, _ = hist.shape
    out = np.zeros((rows, width + 1, width), dtype=np.int64)
    out[:, 1:, :] = np.cumsum(hist, axis=1)
    return out


@dataclass
class ProfileReport:
    l: int
    k0: int | None
    p: dict[int, int]
    k0_table: np.ndarray = field(repr=False)
    consistent: bool = True
    problems: list[str] = field(default_factory=list)


def pseudo_linear_profile(inst: KappaInstance, perm: Permutation, l: int) -> ProfileReport:
    """Sizes of A_{<k,=l}(i, h) for k = 3..n+1 over all (i, h), checked for the power-of-two profile."""
    if not is_pseudo_linear(perm):
        raise ValueError("profile is defined for pseudo-linear permutations only")
    n, size = inst.n, inst.size
    if not 3 <= l <= n:
        raise ValueError(f"l must lie in 3..{n}")
    ks = range(3, n + 2)
    sizes = np.zeros((len(ks), size, size), dtype=np.int64)
    j = np.arange(size, dtype=np.int64)
    kl = kappa_array(j[:, None] ^ perm.array[None, :]) == l  # [h, j]
    kl_int = kl.astype(np.int64)
    ki = kappa_array(j[:, None] ^ j[None, :])  # [i, j]
    for t, k in enumerate(ks):
        sizes[t] = (ki < k).astype(np.int64) @ kl_int.T  # [i, h]
    problems: list[str] = []
    nonempty = sizes > 0
    # Monotone in k: once nonempty, stays nonempty.
    if np.any(nonempty[:-1] & ~nonempty[1:]):
        problems.append("a set became empty as k grew")
    first = np.where(nonempty.any(axis=0), nonempty.argmax(axis=0) + 3, -1)
    p: dict[int, int] = {}
    for t, k in enumerate(ks):
        vals = np.unique(sizes[t][nonempty[t]])
        if len(vals) == 0:
            continue
        if len(vals) > 1:
            problems.append(f"k={k}: nonempty sizes differ across (i, h): {vals.tolist()}")
            continue
        v = int(vals[0])
        if v & (v - 1):
            problems.append(f"k={k}: size {v} is not a power of two")
            continue
        pk = v.bit_length() - 1
        if not 0 <= pk <= k:
            problems.append(f"k={k}: exponent {pk} outside 0..{k}")
        p[k] = pk
    for k in p:
        if k + 1 in p and p[k + 1] - p[k] not in (0, 1):
            problems.append(f"p jumps from {p[k]} to {p[k + 1]} at k={k}")
    present = first[first > 0]
    return ProfileReport(
        l=l,
        k0=int(present.min()) if present.size else None,
        p=p,
        k0_table=first,
        consistent=not problems,
        problems=problems,
    )


def diagonal_quantity(inst: KappaInstance, perm: Permutation, check: bool = True) -> DyadicRational:
    """2^-n sum_i |sum_{k,l=3..n} perm(i)_l (-2)^-k |A_{<k,=l}(i, perm(i))||, exactly."""
    if check and not is_pseudo_linear(perm):
        raise ValueError("the diagonal quantity is defined for pseudo-linear permutations")
    n = inst.n
    if n < 3:
        return DyadicRational(0)
    # Integer weights at scale n: (-2)^-k -> (-1)^k 2^(n-k).
    kw = np.array([(-1) ** k * (1 << (n - k)) for k in range(3, n + 1)], dtype=np.int64)
    total = 0
    for rows in _chunks(inst.size, inst.size):
        h = perm.array[rows]
        counts = less_equal_counts(level_histogram(inst, perm, rows, h))
        a = counts[:, 3 : n + 1, 3 : n + 1]  # [r, k, l]
        bits = (h[:, None] >> (np.arange(3, n + 1)[None, :] - 1)) & 1  # [r, l]
        inner = np.einsum("rkl,k,rl->r", a, kw, bits)
        total += int(np.abs(inner).sum())
    return DyadicRational(total, 2 * n)


def diagonal_quantity_bruteforce(inst: KappaInstance, perm: Permutation) -> DyadicRational:
    """Reference implementation by direct enumeration over i, k, l, j."""
    n = inst.n
    total = DyadicRational(0)
    for i in range(inst.size):
        h = perm[i]
        s = DyadicRational(0)
        for k in range(3, n + 1):
            for l in range(3, n + 1):
                if not (h >> (l - 1)) & 1:
                    continue
                count = sum(
                    1
                    for j in range(inst.size)
                    if kappa_int(i ^ j) < k and kappa_int(h ^ perm[j]) == l
                )
                s = s + DyadicRational((-1) ** k * count, k)
        total = total + abs(s)
    return total.shift(n)


def kappa_int(x: int) -> int:
    return 2 if x == 0 else x.bit_length()


class AlternatingSumResult(NamedTuple):
    lam: DyadicRational
    m_prime: int | None
    bounds_hold: bool


def alternating_power_sum(q: Sequence[int], m: int) -> AlternatingSumResult:
    """lambda = (-1)^m sum_{k=m..n} (-1)^k 2^-q[k] for n = len(q) - 1, plus the index m'.

    m' is the smallest k in m..n-1 with k + m even and q[k+1] = q[k] + 1; when
    it exists the bounds 2^-q[m']/2 <= |lambda| <= 2 * 2^-q[m'] are checked,
    and |lambda| <= 2 is always checked.
    """
    q = [int(v) for v in q]
    n = len(q) - 1
    if not 0 <= m <= n:
        raise ValueError(f"start index {m} outside 0..{n}")
    for k in range(m, n + 1):
        if q[k] < 0:
            raise ValueError(f"q[{k}] = {q[k]} is negative")
        if k < n and q[k + 1] - q[k] not in (0, 1):
            raise ValueError(f"q[{k + 1}] - q[{k}] must be 0 or 1")
    s = DyadicRational(0)
    for k in range(m, n + 1):
        term = DyadicRational(1, q[k])
        s = s + term if k % 2 == 0 else s - term
    lam = s if m % 2 == 0 else -s
    m_prime = next((k for k in range(m, n) if (k + m) % 2 == 0 and q[k + 1] == q[k] + 1), None)
    ok = abs(lam) <= 2
    if m_prime is not None:
        unit = DyadicRational(1, q[m_prime])
        ok = ok and unit.shift(1) <= abs(lam) <= unit * 2
    return AlternatingSumResult(lam, m_prime, ok)


@dataclass(frozen=True)
class RatioRow:
    n: int
    value: DyadicRational
    ratio: float


def identity_alpha_ratio(n_range: Iterable[int]) -> list[RatioRow]:
    """alpha_n(identity) / sqrt(n) for each n."""
    rows = []
    for n in n_range:
        if not 1 <= n <= 14:
            raise ValueError(f"n={n} outside 1..14")
        inst = KappaInstance.for_level(n)
        value = DyadicRational(alpha_int(inst, np.arange(inst.size)), alpha_scale(inst))
        rows.append(RatioRow(n, value, float(value) / math.sqrt(n)))
    return rows


# Names used by the interface contract.
lemma6_size = identity_aset_size
lemma7_evaluate = alternating_power_sum
