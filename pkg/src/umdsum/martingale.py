"""Finite dyadic martingales and the exact identities linking them to the kappa matrix.

Leaf values are rationals. Internally everything is kept as integers at the
common scale 2^depth * L, where L clears the leaf denominators; block averages
then never leave the integers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

import numpy as np

from .dyadic import KappaInstance

INT64_SAFE = 1 << 40


def _as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


@dataclass(frozen=True)
class LeafFunction:
    """Function on [0, 1) constant on the 2^depth dyadic leaf intervals; scalar or vector valued."""

    depth: int
    values: tuple

    def __post_init__(self):
        if self.depth < 0:
            raise ValueError("depth must be nonnegative")
        vals = tuple(
            tuple(_as_fraction(c) for c in v) if isinstance(v, (tuple, list, np.ndarray)) else _as_fraction(v)
            for v in self.values
        )
        if len(vals) != 1 << self.depth:
            raise ValueError(f"depth {self.depth} needs {1 << self.depth} leaf values, got {len(vals)}")
        if vals and isinstance(vals[0], tuple):
            dims = {len(v) if isinstance(v, tuple) else -1 for v in vals}
            if len(dims) != 1 or -1 in dims:
                raise ValueError("vector leaf values must all have the same length")
        object.__setattr__(self, "values", vals)

    @property
    def is_vector(self) -> bool:
        return bool(self.values) and isinstance(self.values[0], tuple)

    @property
    def size(self) -> int:
        return 1 << self.depth

    def integer_form(self) -> tuple[np.ndarray, int]:
        """(X, L) with X = L * values as an integer array of shape (leaves, dim)."""
        rows = [v if isinstance(v, tuple) else (v,) for v in self.values]
        denoms = [c.denominator for r in rows for c in r]
        lcm = reduce(math.lcm, denoms, 1)
        ints = [[c.numerator * (lcm // c.denominator) for c in r] for r in rows]
        big = max((abs(c) for r in ints for c in r), default=0)
        dtype = np.int64 if big < INT64_SAFE else object
        return np.array(ints, dtype=dtype), lcm


def _unscale(arr: np.ndarray, scale: int, vector: bool):
    """Turn an integer array at the given scale into Fractions (scalars unless vector)."""
    out = [tuple(Fraction(int(c), scale) for c in row) for row in arr]
    return out if vector else [row[0] for row in out]


def _block_sums(X: np.ndarray, depth: int, k: int) -> np.ndarray:
    """Sum of X over the level-k dyadic block containing each leaf, at leaf resolution."""
    width = 1 << (depth - k)
    sums = X.reshape(1 << k, width, X.shape[1]).sum(axis=1)
    return np.repeat(sums, width, axis=0)


def _scaled_expectations(X: np.ndarray, depth: int) -> list[np.ndarray]:
    """E(f | F_k) * 2^depth * L for k = 0..depth, each at leaf resolution."""
    return [_block_sums(X, depth, k) * (1 << k) for k in range(depth + 1)]


def _scaled_differences(X: np.ndarray, depth: int, centered: bool) -> list[np.ndarray]:
    exps = _scaled_expectations(X, depth)
    base = exps[0] if centered else np.zeros_like(exps[0])
    prev = [base] + exps[1:-1]
    return [exps[k] - prev[k - 1] for k in range(1, depth + 1)]


def leaves_to_differences(f: LeafFunction, centered: bool = False) -> list:
    """Martingale differences d_1..d_depth of f, each listed at leaf resolution.

    d_k = E(f | F_k) - E(f | F_{k-1}); the starting term is 0, or the mean of f
    when ``centered``. The differences sum to f (to f minus its mean when centered).
    """
    if f.depth < 1:
        raise ValueError("depth must be at least 1")
    X, L = f.integer_form()
    scale = L << f.depth
    return [_unscale(d, scale, f.is_vector) for d in _scaled_differences(X, f.depth, centered)]


def _norm(row, vector: bool):
    return max(abs(c) for c in row) if vector else abs(row[0])


def _transform_scaled(X: np.ndarray, depth: int) -> np.ndarray:
    """sum_k (2 d_{2k-1} - d_{2k}) with centered differences, scaled by 2^depth * L."""
    d = _scaled_differences(X, depth, centered=True)
    out = np.zeros_like(d[0])
    for k in range(1, depth // 2 + 1):
        out = out + 2 * d[2 * k - 2] - d[2 * k - 1]
    return out


def _sibling_terms_scaled(X: np.ndarray, depth: int, t: int) -> np.ndarray:
    """sum_k (-2)^k * integral of f over the sibling interval of level k at leaf t, scaled by 2^depth * L."""
    total = np.zeros(X.shape[1], dtype=X.dtype)
    leaves = np.arange(1 << depth)
    for k in range(1, depth + 1):
        parent = (leaves >> (depth - k + 1)) == (t >> (depth - k + 1))
        other = ((leaves >> (depth - k)) & 1) != ((t >> (depth - k)) & 1)
        total = total + (-2) ** k * X[parent & other].sum(axis=0)
    return total


def sibling_identity_residual(f: LeafFunction, t_index: int):
    """Difference of the two sides of the sibling-interval identity at one leaf.

    Left: sum_{k=1..n} (2 d_{2k-1} - d_{2k}) at the leaf, with the differences
    started from the mean of f. Right: sum_{k=1..2n} (-2)^k times the integral
    of f over the level-k sibling interval of the leaf. Returns the exact
    residual (a Fraction, or a tuple for vector leaves); it is always zero.
    """
    if f.depth % 2:
        raise ValueError("the identity needs an even depth")
    if not 0 <= t_index < f.size:
        raise IndexError(f"leaf {t_index} out of range")
    X, L = f.integer_form()
    lhs = _transform_scaled(X, f.depth)[t_index]
    rhs = _sibling_terms_scaled(X, f.depth, t_index)
    res = _unscale((lhs - rhs)[None, :], L << f.depth, True)[0]
    return res if f.is_vector else res[0]


def transform_identity_check(f: LeafFunction) -> tuple[Fraction, Fraction]:
    """(L1 norm of the transform sum_k (2 d_{2k-1} - d_{2k}), matrix form of the same number).

    The matrix form is 2 / 2^m * sum_i || sum_{j != i} (-2)^-kappa(i xor j) x_j ||
    with m the depth and x_j the leaf values. Both are exact and coincide.
    """
    if f.depth % 2 or f.depth < 2:
        raise ValueError("the identity needs an even positive depth")
    X, L = f.integer_form()
    m = f.depth
    vector = f.is_vector
    transform = _transform_scaled(X, m)
    lhs_num = sum(_norm(row, vector) for row in transform.tolist())
    lhs = Fraction(int(lhs_num), (L << m) << m)

    inst = KappaInstance.for_level(m)
    E = inst.matrix().astype(X.dtype).copy()
    np.fill_diagonal(E, 0)
    prod = E @ X
    rhs_num = sum(_norm(row, vector) for row in prod.tolist())
    rhs = Fraction(2 * int(rhs_num), (L << m) << inst.scale)
    return lhs, rhs


def _kappa_norm_average(inst: KappaInstance, X: np.ndarray, vector: bool, L: int) -> Fraction:
    prod = inst.matrix().astype(X.dtype) @ X
    num = sum(_norm(row, vector) for row in prod.tolist())
    return Fraction(int(num), (L << inst.n) << inst.scale)


def duplicate(x: Sequence) -> list:
    """x'_{2j} = x'_{2j+1} = x_j."""
    return [v for v in x for _ in range(2)]


def duplication_invariance(inst: KappaInstance, x: Sequence) -> tuple[Fraction, Fraction]:
    """(value at level n on x, value at level n+1 on the duplicated x).

    The value is 2^-n sum_i || sum_j (-2)^-kappa(i xor j) x_j ||; the two agree exactly.
    """
    if len(x) != inst.size:
        raise ValueError(f"expected {inst.size} values, got {len(x)}")
    f = LeafFunction(inst.n, tuple(x))
    X, L = f.integer_form()
    v_n = _kappa_norm_average(inst, X, f.is_vector, L)
    X2 = np.repeat(X, 2, axis=0)
    v_next = _kappa_norm_average(KappaInstance.for_level(inst.n + 1), X2, f.is_vector, L)
    return v_n, v_next


def _harmonic_prefix(count: int) -> list[Fraction]:
    out = [Fraction(0)]
    for k in range(1, count + 1):
        out.append(out[-1] + Fraction(1, k))
    return out


def hilbert_vector_norms(n: int) -> list[Fraction]:
    """Exact sup norms of sum_{h != k} Sigma e_h / (h - k), k = 1..N, for N = 2^n.

    Coordinate r of the vector is sum_{h <= r, h != k} 1/(h - k): it falls to
    -H_{k-1} at r = k - 1 and then climbs by 1/(r - k), so the sup norm is
    max(H_{k-1}, |H_{N-k} - H_{k-1}|).
    """
    N = 1 << n
    H = _harmonic_prefix(N)
    return [max(H[k - 1], abs(H[N - k] - H[k - 1])) for k in range(1, N + 1)]


def hilbert_vector_norms_bruteforce(n: int) -> list[Fraction]:
    N = 1 << n
    norms = []
    for k in range(1, N + 1):
        best = Fraction(0)
        run = Fraction(0)
        for r in range(1, N + 1):
            if r != k:
                run += Fraction(1, r - k)
            best = max(best, abs(run))
        norms.append(best)
    return norms


def hilbert_lower_bound(n: int) -> float:
    """sqrt(sum_k ||v_k||^2) / sqrt(N) for the unit-vector test family, N = 2^n."""
    if not 1 <= n <= 12:
        raise ValueError(f"n={n} outside 1..12")
    norms = hilbert_vector_norms(n)
    total = math.fsum(float(v) ** 2 for v in norms)
    return math.sqrt(total / (1 << n))



# Names used by the interface contract.
eq10_residual = sibling_identity_residual
