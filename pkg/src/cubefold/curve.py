"""Recursive 2**d-way subdivision with a face-adjacent numbering.

Each cell of the cube is split into 2**d children visited in a Gray-code
order, so consecutive children (and, by the orientation bookkeeping,
consecutive cells globally) share a (d-1)-face.  The matching split of
the segment into 2**d equal parts gives the digit-level forward and
inverse maps between [0,1)**d and [0,1); cells map to intervals of equal
measure at every depth.

For d=2 the root-level order is lower-left, upper-left, upper-right,
lower-right (the classical U order), with child orientations
swap / identity / identity / swap-and-reflect.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .dyadic import CubePoint, DyadicRect, PrecisionError, RangeError, UnitScalar

MAX_DIMENSION = 8


def _gray(i: int) -> int:
    return i ^ (i >> 1)


def _gray_inverse(g: int) -> int:
    i = g
    while g:
        g >>= 1
        i ^= g
    return i


def _trailing_ones(i: int) -> int:
    n = 0
    while i & 1:
        n += 1
        i >>= 1
    return n


@lru_cache(maxsize=None)
def _tables(d: int):
    """Per-dimension child tables: Gray octants, entry flips, directions."""
    size = 1 << d
    gc = tuple(_gray(i) for i in range(size))
    entry = tuple(0 if i == 0 else _gray(2 * ((i - 1) // 2)) for i in range(size))
    direction = []
    for i in range(size):
        if i == 0:
            direction.append(0)
        elif i % 2 == 0:
            direction.append(_trailing_ones(i - 1) % d)
        else:
            direction.append(_trailing_ones(i) % d)
    return gc, entry, tuple(direction)


def _rot_left(x: int, s: int, d: int) -> int:
    s %= d
    return ((x << s) | (x >> (d - s))) & ((1 << d) - 1)


def _rot_right(x: int, s: int, d: int) -> int:
    return _rot_left(x, d - s % d, d)


@dataclass(frozen=True)
class OrientationState:
    """Cube symmetry carried through the subdivision: a cyclic axis
    rotation plus per-axis reflection flags, acting on octant bit vectors.
    """

    dimension: int
    rotation: int
    flips: int

    def __post_init__(self):
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise RangeError(
                f"dimension must be in 1..{MAX_DIMENSION}, got {self.dimension}"
            )
        if not 0 <= self.rotation < self.dimension:
            raise RangeError("rotation out of range")
        if not 0 <= self.flips < (1 << self.dimension):
            raise RangeError("flips out of range")

    @classmethod
    def identity(cls, dimension: int) -> "OrientationState":
        return cls(dimension, 0, 0)

    def apply(self, octant: int) -> int:
        return _rot_left(octant, self.rotation, self.dimension) ^ self.flips

    def compose(self, other: "OrientationState") -> "OrientationState":
        """State applying `other` first, then self."""
        if other.dimension != self.dimension:
            raise RangeError("dimension mismatch")
        d = self.dimension
        return OrientationState(
            d,
            (self.rotation + other.rotation) % d,
            self.flips ^ _rot_left(other.flips, self.rotation, d),
        )


def _child_octant(state: OrientationState, digit: int) -> int:
    d = state.dimension
    gc, _, _ = _tables(d)
    return _rot_left(gc[digit], state.rotation + 1, d) ^ state.flips


def _child_state(state: OrientationState, digit: int) -> OrientationState:
    d = state.dimension
    _, entry, direction = _tables(d)
    return OrientationState(
        d,
        (state.rotation + direction[digit] + 1) % d,
        state.flips ^ _rot_left(entry[digit], state.rotation + 1, d),
    )


def _digit_for_octant(state: OrientationState, octant: int) -> int:
    d = state.dimension
    return _gray_inverse(_rot_right(octant ^ state.flips, state.rotation + 1, d))


def child_order(state: OrientationState, dimension: int | None = None):
    """The 2**d children of a cell in traversal order.

    Returns a list of (octant, child state) pairs.  Octant bit a selects
    the upper half along axis a.  Consecutive children share a (d-1)-face.
    """
    if dimension is not None and dimension != state.dimension:
        raise RangeError(
            f"state has dimension {state.dimension}, asked for {dimension}"
        )
    d = state.dimension
    return [(_child_octant(state, i), _child_state(state, i))
            for i in range(1 << d)]


_ADDRESS_RE = re.compile(r"^\d+(\.\d+)*$")


@dataclass(frozen=True)
class CellAddress:
    """Digit path j_1..j_n into the recursive subdivision, zero-based."""

    dimension: int
    digits: tuple[int, ...]

    def __post_init__(self):
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise RangeError(f"dimension must be in 1..{MAX_DIMENSION}")
        hi = 1 << self.dimension
        for j in self.digits:
            if not 0 <= j < hi:
                raise RangeError(f"digit {j} out of range 0..{hi - 1}")

    @property
    def depth(self) -> int:
        return len(self.digits)

    def prefix(self, depth: int) -> "CellAddress":
        return CellAddress(self.dimension, self.digits[:depth])

    def format(self) -> str:
        """One-based dot-separated digit string, e.g. `1.3.2.4`."""
        return ".".join(str(j + 1) for j in self.digits)

    @classmethod
    def parse(cls, text: str, dimension: int) -> "CellAddress":
        text = text.strip()
        if not text:
            return cls(dimension, ())
        if not _ADDRESS_RE.match(text):
            raise ValueError(f"cannot parse cell address from {text!r}")
        return cls(dimension, tuple(int(t) - 1 for t in text.split(".")))


@dataclass(frozen=True)
class SegmentInterval:
    """Half-open segment cell [q * b**-n, (q+1) * b**-n) with b = 2**d."""

    dimension: int
    depth: int
    index: int

    def __post_init__(self):
        if not 1 <= self.dimension <= MAX_DIMENSION:
            raise RangeError(f"dimension must be in 1..{MAX_DIMENSION}")
        if self.depth < 0:
            raise RangeError("depth must be >= 0")
        if not 0 <= self.index < (1 << (self.dimension * self.depth)):
            raise RangeError(
                f"index {self.index} out of range at depth {self.depth}"
            )

    def left(self) -> UnitScalar:
        return UnitScalar(self.index, self.dimension * self.depth)

    def length(self) -> Fraction:
        return Fraction(1, 1 << (self.dimension * self.depth))

    def format(self) -> str:
        return f"{self.index}/{1 << self.dimension}^{self.depth}"


_INTERVAL_RE = re.compile(r"^(\d+)/(\d+)\^(\d+)$")


def parse_interval(text: str, dimension: int) -> SegmentInterval:
    m = _INTERVAL_RE.match(text.strip())
    if not m:
        raise ValueError(f"cannot parse interval from {text!r}")
    q, base, depth = int(m.group(1)), int(m.group(2)), int(m.group(3))
    if base != 1 << dimension:
        raise ValueError(
            f"interval base {base} does not match dimension {dimension}"
        )
    return SegmentInterval(dimension, depth, q)


def point_to_address(pt: CubePoint, depth: int) -> CellAddress:
    """Locate the unique depth-n half-open cell containing the point."""
    if depth < 0:
        raise RangeError("depth must be >= 0")
    p = pt.precision
    if p < depth:
        raise PrecisionError(f"point precision {p} < depth {depth}")
    state = OrientationState.identity(pt.dimension)
    digits = []
    for k in range(1, depth + 1):
        octant = 0
        for a, c in enumerate(pt.coords):
            octant |= ((c.mantissa >> (p - k)) & 1) << a
        j = _digit_for_octant(state, octant)
        digits.append(j)
        state = _child_state(state, j)
    return CellAddress(pt.dimension, tuple(digits))


def address_to_rect(a: CellAddress) -> DyadicRect:
    """The half-open cube cell named by the address; side 2**-depth."""
    d = a.dimension
    state = OrientationState.identity(d)
    mant = [0] * d
    for j in a.digits:
        octant = _child_octant(state, j)
        for axis in range(d):
            mant[axis] = (mant[axis] << 1) | ((octant >> axis) & 1)
        state = _child_state(state, j)
    lower = CubePoint(tuple(UnitScalar(m, a.depth) for m in mant))
    return DyadicRect(lower, (a.depth,) * d)


def address_to_interval(a: CellAddress) -> SegmentInterval:
    """Positional base-2**d reading of the digit path."""
    q = 0
    for j in a.digits:
        q = (q << a.dimension) | j
    return SegmentInterval(a.dimension, a.depth, q)


def interval_to_address(iv: SegmentInterval, dimension: int | None = None) -> CellAddress:
    """Exact inverse of address_to_interval."""
    d = iv.dimension if dimension is None else dimension
    if d != iv.dimension:
        raise RangeError("dimension mismatch")
    mask = (1 << d) - 1
    digits = [(iv.index >> (d * (iv.depth - 1 - k))) & mask
              for k in range(iv.depth)]
    return CellAddress(d, tuple(digits))


def forward_map(pt: CubePoint, depth: int) -> UnitScalar:
    """Left endpoint of the segment cell matched to the point's cube cell.

    The limit value lies within (2**d)**-depth of the result; refining
    the depth never moves the output by that much or more.
    """
    return address_to_interval(point_to_address(pt, depth)).left()


def inverse_map(t: UnitScalar, depth: int, dimension: int) -> CubePoint:
    """Lower corner of the cube cell matched to t's segment cell."""
    if not 1 <= dimension <= MAX_DIMENSION:
        raise RangeError(f"dimension must be in 1..{MAX_DIMENSION}")
    bits = dimension * depth
    if t.precision < bits:
        raise PrecisionError(
            f"scalar precision {t.precision} < {dimension}*{depth} bits"
        )
    q = t.mantissa >> (t.precision - bits)
    addr = interval_to_address(SegmentInterval(dimension, depth, q))
    return address_to_rect(addr).lower


def compose_n_to_m(pt: CubePoint, depth: int, target_dimension: int) -> CubePoint:
    """Map a point of [0,1)**n to [0,1)**m through the segment.

    The intermediate segment scalar carries n*depth bits; the target depth
    is floor(n*depth / m), so source and image cells have equal measure at
    matched depths.
    """
    n = pt.dimension
    target_depth = (n * depth) // target_dimension
    if target_depth < 1:
        raise PrecisionError(
            f"{n}*{depth} bits yield no whole depth-1 digit in dimension "
            f"{target_dimension}"
        )
    t = forward_map(pt, depth)
    return inverse_map(t, target_depth, target_dimension)


def inverse_map_batch(indices: np.ndarray, depth: int, dimension: int) -> np.ndarray:
    """Vectorized inverse over depth-n segment cell indices.

    Returns an (N, d) uint64 array of lower-corner mantissas at precision
    `depth` per coordinate.  Must agree with inverse_map on every index;
    requires dimension * depth <= 64.
    """
    d = dimension
    if not 1 <= d <= MAX_DIMENSION:
        raise RangeError(f"dimension must be in 1..{MAX_DIMENSION}")
    if d * depth > 64:
        raise PrecisionError("dimension * depth must be <= 64 for batch use")
    gc, entry, direction = _tables(d)
    gc_a = np.array(gc, dtype=np.uint64)
    entry_a = np.array(entry, dtype=np.uint64)
    dir_a = np.array(direction, dtype=np.uint64)
    mask = np.uint64((1 << d) - 1)
    du = np.uint64(d)

    q = np.asarray(indices, dtype=np.uint64)
    e = np.zeros_like(q)
    r = np.zeros_like(q)
    coords = np.zeros((d, q.shape[0]), dtype=np.uint64)

    def rot_left(x, s):
        s = s % du
        return ((x << s) | (x >> (du - s))) & mask

    one = np.uint64(1)
    for k in range(depth):
        shift = np.uint64(d * (depth - 1 - k))
        w = (q >> shift) & mask
        s = (r + one) % du
        octant = rot_left(gc_a[w], s) ^ e
        e = e ^ rot_left(entry_a[w], s)
        r = (r + dir_a[w] + one) % du
        for axis in range(d):
            coords[axis] = (coords[axis] << one) | ((octant >> np.uint64(axis)) & one)
    return coords.T
