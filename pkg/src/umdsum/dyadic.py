"""Bit-level primitives: kappa, dyadic addition, exact dyadic rationals, the kappa matrix."""

from __future__ import annotations

import functools
import re
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .checks import CheckReport, PropertyResult

DEFAULT_DIGITS = 10
_DECIMAL_RE = re.compile(r"^\s*([+-]?)(\d*)(?:\.(\d*))?(?:…|\.\.\.)?\s*$")


def _trailing_zeros(m: int) -> int:
    return (m & -m).bit_length() - 1


class DyadicRational:
    """Exact value ``numerator / 2**scale``.

    Stored in lowest terms: the numerator is odd unless the scale is 0, and
    zero is always ``(0, 0)``.
    """

    __slots__ = ("_num", "_scale")

    def __init__(self, numerator: int = 0, scale: int = 0):
        numerator = int(numerator)
        scale = int(scale)
        if scale < 0:
            numerator <<= -scale
            scale = 0
        if numerator == 0:
            scale = 0
        elif scale:
            shift = min(_trailing_zeros(numerator), scale)
            numerator >>= shift
            scale -= shift
        object.__setattr__(self, "_num", numerator)
        object.__setattr__(self, "_scale", scale)

    def __setattr__(self, name, value):
        raise AttributeError("DyadicRational is immutable")

    @property
    def numerator(self) -> int:
        return self._num

    @property
    def scale(self) -> int:
        return self._scale

    @classmethod
    def coerce(cls, value) -> "DyadicRational":
        if isinstance(value, DyadicRational):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value), 0)
        if isinstance(value, Fraction):
            return cls.from_fraction(value)
        raise TypeError(f"cannot convert {type(value).__name__} to DyadicRational")

    @classmethod
    def from_fraction(cls, value: Fraction) -> "DyadicRational":
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} has a denominator that is not a power of two")
        return cls(value.numerator, den.bit_length() - 1)

    def at_scale(self, scale: int) -> int:
        """Integer numerator of this value at the (larger or equal) given scale."""
        if scale < self._scale:
            raise ValueError(f"value needs scale {self._scale}, asked for {scale}")
        return self._num << (scale - self._scale)

    def to_fraction(self) -> Fraction:
        return Fraction(self._num, 1 << self._scale)

    def shift(self, k: int) -> "DyadicRational":
        """Divide by ``2**k`` (multiply when ``k`` is negative)."""
        return DyadicRational(self._num, self._scale + k)

    def _aligned(self, other: "DyadicRational") -> tuple[int, int, int]:
        s = max(self._scale, other._scale)
        return self._num << (s - self._scale), other._num << (s - other._scale), s

    def __add__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, s = self._aligned(other)
        return DyadicRational(a + b, s)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        a, b, s = self._aligned(other)
        return DyadicRational(a - b, s)

    def __rsub__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        try:
            other = DyadicRational.coerce(other)
        except TypeError:
            return NotImplemented
        return DyadicRational(self._num * other._num, self._scale + other._scale)

    __rmul__ = __mul__

    def __neg__(self):
        return DyadicRational(-self._num, self._scale)

    def __pos__(self):
        return self

    def __abs__(self):
        return DyadicRational(abs(self._num), self._scale)

    def __bool__(self):
        return self._num != 0

    def _cmp(self, other) -> int | None:
        if isinstance(other, Fraction):
            f = self.to_fraction()
            return (f > other) - (f < other)
        try:
            other = DyadicRational.coerce(other)
        except TypeError:
            return None
        a, b, _ = self._aligned(other)
        return (a > b) - (a < b)

    def __eq__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c == 0

    def __lt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c < 0

    def __le__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c <= 0

    def __gt__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c > 0

    def __ge__(self, other):
        c = self._cmp(other)
        return NotImplemented if c is None else c >= 0

    def __hash__(self):
        if self._scale == 0:
            return hash(self._num)
        return hash(self.to_fraction())

    def __float__(self):
        return self._num / (1 << self._scale) if self._scale < 1000 else float(self.to_fraction())

    def __repr__(self):
        return f"DyadicRational({self._num}, {self._scale})"

    def __str__(self):
        if self._scale == 0:
            return str(self._num)
        return f"{self._num}/{1 << self._scale}"

    def decimal(self, digits: int | None = DEFAULT_DIGITS) -> str:
        """Exact decimal expansion; cut to ``digits`` fractional digits with a trailing "…".

        A dyadic value with scale s has exactly s fractional decimal digits,
        so nothing is lost when ``digits`` is None or at least the scale.
        """
        sign = "-" if self._num < 0 else ""
        s = self._scale
        body = str(abs(self._num) * 5**s).rjust(s + 1, "0")
        int_part, frac = (body[:-s], body[-s:]) if s else (body, "")
        if digits is not None and len(frac) > digits:
            return f"{sign}{int_part}.{frac[:digits]}…"
        return f"{sign}{int_part}.{frac}" if frac else f"{sign}{int_part}"

    @classmethod
    def parse(cls, text: str) -> "DyadicRational":
        """Parse ``"a/b"``, an integer, or a finite decimal such as ``"-0.59375"``.

        A trailing "…" is ignored, so a truncated rendering parses only when
        its digits are themselves a dyadic value.
        """
        text = text.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            return cls.from_fraction(Fraction(int(num), int(den)))
        match = _DECIMAL_RE.match(text)
        if match is None or not (match.group(2) or match.group(3)):
            raise ValueError(f"cannot parse {text!r} as a dyadic rational")
        sign, whole, frac = match.group(1), match.group(2) or "0", match.group(3) or ""
        value = Fraction(int(whole + frac), 10 ** len(frac))
        if sign == "-":
            value = -value
        return cls.from_fraction(value)

    def to_json(self, digits: int | None = DEFAULT_DIGITS) -> dict:
        return {"numerator": self._num, "scale": self._scale, "decimal": self.decimal(digits)}


def kappa(i: int) -> int:
    """Number of binary digits of ``i``, with the convention kappa(0) = 2."""
    if i < 0:
        raise ValueError(f"kappa needs a nonnegative index, got {i}")
    return 2 if i == 0 else int(i).bit_length()


def kappa_array(x: np.ndarray) -> np.ndarray:
    """Vectorized kappa for nonnegative integer arrays below 2**52."""
    x = np.asarray(x, dtype=np.int64)
    if x.size and (x.min() < 0 or x.max() >= 1 << 52):
        raise ValueError("kappa_array needs entries in [0, 2**52)")
    _, exp = np.frexp(x.astype(np.float64))
    return np.where(x == 0, 2, exp).astype(np.int64)


def dyadic_xor(i: int, j: int) -> int:
    if i < 0 or j < 0:
        raise ValueError("dyadic addition is defined on nonnegative integers")
    return i ^ j


def digit(i: int, k: int) -> int:
    """Binary digit of ``i`` at position ``k`` (1-indexed from the least significant)."""
    return (i >> (k - 1)) & 1


def signed_power(k: int) -> DyadicRational:
    """(-2)**(-k) as an exact value."""
    return DyadicRational(-1 if k % 2 else 1, k)


class KappaInstance:
    """Precomputed kappa table and matrix entries (-2)^(-kappa(i xor j)) for a fixed n.

    Entries are kept as integers at the common scale ``max(n, 2)``; they depend
    only on ``x = i xor j`` so a single table of length 2**n suffices.
    """

    MAX_DENSE_LEVEL = 12

    def __init__(self, n: int):
        if n < 1:
            raise ValueError(f"level count must be at least 1, got {n}")
        self.n = n
        self.size = 1 << n
        self.scale = max(n, 2)
        kt = kappa_array(np.arange(self.size))
        kt.setflags(write=False)
        self.kappa_table = kt
        ints = np.where(kt % 2 == 1, -1, 1) * (np.int64(1) << (self.scale - kt))
        ints = ints.astype(np.int64)
        ints.setflags(write=False)
        self.entry_ints = ints
        self.entry_table = tuple(DyadicRational(int(v), self.scale) for v in ints)
        self._dense: np.ndarray | None = None

    @classmethod
    @functools.lru_cache(maxsize=None)
    def for_level(cls, n: int) -> "KappaInstance":
        return cls(n)

    def __repr__(self):
        return f"KappaInstance(n={self.n})"

    @property
    def flagged(self) -> bool:
        """True at n = 1, where kappa(0) = 2 exceeds the level count."""
        return self.n < 2

    def rows(self, idx: Sequence[int] | np.ndarray) -> np.ndarray:
        """Integer entries (at ``self.scale``) of the given rows, shape (len(idx), 2**n)."""
        idx = np.asarray(idx, dtype=np.int64)
        return self.entry_ints[idx[:, None] ^ np.arange(self.size, dtype=np.int64)[None, :]]

    def matrix(self) -> np.ndarray:
        """Full integer matrix at ``self.scale``; cached and read-only."""
        if self.n > self.MAX_DENSE_LEVEL:
            raise ValueError(f"dense matrix refused above n={self.MAX_DENSE_LEVEL}")
        if self._dense is None:
            m = self.rows(np.arange(self.size))
            m.setflags(write=False)
            self._dense = m
        return self._dense

    def check_index(self, i: int, name: str = "index") -> int:
        if not 0 <= i < self.size:
            raise IndexError(f"{name} {i} out of range for n={self.n}")
        return int(i)


def matrix_entry(inst: KappaInstance, i: int, j: int) -> DyadicRational:
    i = inst.check_index(i, "row")
    j = inst.check_index(j, "column")
    return inst.entry_table[i ^ j]


def level_count(inst: KappaInstance, i: int, k: int) -> int:
    """Number of j with kappa(i xor j) = k, by direct enumeration."""
    i = inst.check_index(i)
    if not 1 <= k <= inst.n:
        raise ValueError(f"level {k} out of range 1..{inst.n}")
    x = i ^ np.arange(inst.size, dtype=np.int64)
    return int(np.count_nonzero(inst.kappa_table[x] == k))


class InvalidPermutation(ValueError):
    pass


def _level_of(size: int) -> int:
    if size < 1 or size & (size - 1):
        raise InvalidPermutation(f"length {size} is not a power of two")
    return size.bit_length() - 1


class Permutation:
    """Bijection of {0, ..., 2**n - 1}, stored by its images."""

    __slots__ = ("n", "image", "_order", "_array")

    def __init__(self, image: Iterable[int], n: int | None = None):
        img = tuple(int(v) for v in image)
        level = _level_of(len(img))
        if n is not None and n != level:
            raise InvalidPermutation(f"expected {1 << n} images for n={n}, got {len(img)}")
        seen = bytearray(len(img))
        for idx, v in enumerate(img):
            if not 0 <= v < len(img):
                raise InvalidPermutation(f"image out of range at index {idx}")
            if seen[v]:
                raise InvalidPermutation(f"not a bijection at index {idx}")
            seen[v] = 1
        self.n = level
        self.image = img
        self._order: tuple[int, ...] | None = None
        self._array: np.ndarray | None = None

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(1 << n))

    @classmethod
    def from_order(cls, order: Sequence[int]) -> "Permutation":
        """Build the permutation that lists ``order[0], order[1], ...`` at ranks 0, 1, ..."""
        order = [int(v) for v in order]
        img = [-1] * len(order)
        for r, j in enumerate(order):
            if not 0 <= j < len(order):
                raise InvalidPermutation(f"image out of range at index {r}")
            if img[j] >= 0:
                raise InvalidPermutation(f"not a bijection at index {r}")
            img[j] = r
        return cls(img)

    @classmethod
    def from_text(cls, text: str, n: int | None = None) -> "Permutation":
        tokens = text.split()
        values = []
        for idx, tok in enumerate(tokens):
            try:
                values.append(int(tok))
            except ValueError:
                raise InvalidPermutation(f"malformed entry {tok!r} at index {idx}") from None
        return cls(values, n)

    def to_text(self) -> str:
        return " ".join(map(str, self.image))

    @property
    def size(self) -> int:
        return len(self.image)

    @property
    def order(self) -> tuple[int, ...]:
        """Inverse images: ``order[r]`` is the index placed at rank r."""
        if self._order is None:
            inv = [0] * len(self.image)
            for j, r in enumerate(self.image):
                inv[r] = j
            self._order = tuple(inv)
        return self._order

    @property
    def array(self) -> np.ndarray:
        if self._array is None:
            a = np.asarray(self.image, dtype=np.int64)
            a.setflags(write=False)
            self._array = a
        return self._array

    def inverse(self) -> "Permutation":
        return Permutation(self.order)

    def compose(self, other: "Permutation") -> "Permutation":
        """``self o other``: apply ``other`` first."""
        if other.size != self.size:
            raise ValueError("cannot compose permutations of different sizes")
        return Permutation(self.image[v] for v in other.image)

    def is_identity(self) -> bool:
        return all(v == j for j, v in enumerate(self.image))

    def __len__(self):
        return len(self.image)

    def __getitem__(self, j):
        return self.image[j]

    def __iter__(self):
        return iter(self.image)

    def __eq__(self, other):
        if not isinstance(other, Permutation):
            return NotImplemented
        return self.image == other.image

    def __lt__(self, other):
        return self.image < other.image

    def __hash__(self):
        return hash(self.image)

    def __repr__(self):
        if self.size <= 16:
            return f"Permutation({list(self.image)})"
        return f"Permutation(n={self.n}, image=[{', '.join(map(str, self.image[:8]))}, ...])"


def check_kappa_identities(limit: int = 1 << 20, pair_bits: int = 8) -> CheckReport:
    """Exact checks of the kappa recursion and the elementary kappa facts.

    The recursion (-2)^-kappa(2i xor 1) + (-2)^-kappa(2i) = -(-2)^-kappa(i) is
    checked for every i < limit; the pairwise facts for every pair below
    ``2**pair_bits``.
    """
    if limit < 1:
        raise ValueError("limit must be at least 1")
    report = CheckReport("kappa identities")

    # Recursion, checked exactly with integers at a common scale.
    res = report.add(PropertyResult("kappa recursion for sibling indices"))
    top = (2 * limit).bit_length() + 2
    step = 1 << 16
    for start in range(0, limit, step):
        i = np.arange(start, min(limit, start + step), dtype=np.int64)
        def scaled(x):
            k = kappa_array(x)
            return np.where(k % 2 == 1, -1, 1) * (np.int64(1) << (top - k))
        lhs = scaled(2 * i + 1) + scaled(2 * i)
        bad = i[lhs != -scaled(i)]
        res.add_bulk(len(i), [int(v) for v in bad])
    # One case re-run in DyadicRational arithmetic as a cross-check of the scaling.
    for i in (0, 1, limit - 1):
        ok = signed_power(kappa(2 * i + 1)) + signed_power(kappa(2 * i)) == -signed_power(kappa(i))
        res.record(ok, i)

    size = 1 << pair_bits
    a = np.arange(size, dtype=np.int64)
    I, J = np.meshgrid(a, a, indexing="ij")
    X = I ^ J
    KX = kappa_array(X)
    KI = kappa_array(I)
    KJ = kappa_array(J)
    nonzero = X != 0

    def pairs(mask):
        idx = np.argwhere(mask)
        return [tuple(int(v) for v in p) for p in idx[:MAX_PAIRS_LISTED]]

    # Definition bracket: 2^(kappa(x)-1) <= x < 2^kappa(x) for x >= 1.
    res = report.add(PropertyResult("kappa brackets the index"))
    xs = np.arange(1, size * 4, dtype=np.int64)
    kx = kappa_array(xs)
    bad = xs[((1 << (kx - 1)) > xs) | (xs >= (1 << kx))]
    res.add_bulk(len(xs), [int(v) for v in bad])

    # Minimal block: for i != j, kappa(i xor j) = k iff the indices share the
    # aligned block of size 2^k but not the one of size 2^(k-1).
    res = report.add(PropertyResult("minimal common block"))
    share_k = (I >> KX) == (J >> KX)
    share_km1 = (I >> (KX - 1)) == (J >> (KX - 1))
    res.add_bulk(int(nonzero.sum()), pairs(nonzero & ~(share_k & ~share_km1)))

    # Sibling intervals at resolution 2^-m: the point i 2^-m lies in the sibling
    # of the length-2^-k interval containing j 2^-m iff kappa(i xor j) = m-k+1.
    res = report.add(PropertyResult("sibling interval equivalence"))
    m = pair_bits
    bad_all: list = []
    cases = 0
    for k in range(1, m + 1):
        in_parent = (I >> (m - k + 1)) == (J >> (m - k + 1))
        in_same = (I >> (m - k)) == (J >> (m - k))
        lhs = in_parent & ~in_same
        rhs = KX == m - k + 1
        cases += int(nonzero.sum())
        bad_all.extend(pairs(nonzero & (lhs != rhs)))
    res.add_bulk(cases, bad_all)

    # Order criterion: for i != j, i < j iff j has digit 1 at position kappa(i xor j).
    res = report.add(PropertyResult("order criterion"))
    jdig = (J >> (KX - 1)) & 1
    ok = (I < J) == (jdig == 1)
    res.add_bulk(int(nonzero.sum()), pairs(nonzero & ~ok))

    # Level composition rules for levels k >= 3 (indices i, j >= 1).
    pos = nonzero & (I > 0) & (J > 0)
    rules = [
        ("equal levels: kappa(i xor j) < k", lambda k: (KI == k) & (KJ == k), lambda k: KX < k),
        ("one level below: kappa(i xor j) = k", lambda k: (KI == k) & (KJ < k), lambda k: KX == k),
        ("both below: kappa(i xor j) < k", lambda k: (KI < k) & (KJ < k), lambda k: KX < k),
    ]
    for name, premise, conclusion in rules:
        res = report.add(PropertyResult(name))
        for k in range(3, pair_bits + 1):
            mask = pos & premise(k)
            res.add_bulk(int(mask.sum()), pairs(mask & ~conclusion(k)))
    return report


MAX_PAIRS_LISTED = 10
