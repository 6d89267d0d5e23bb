"""Signal constellations: square QAM lattices and arbitrary complex sets.

All constellations are normalized to unit average energy, carry an exact
minimum distance and a bijective bit labelling.  Square QAM uses a reflected
Gray code independently on each axis, so neighbouring lattice levels differ
in exactly one bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Constellation", "make_square_qam", "make_arbitrary", "make_psk"]

SYMBOLS_PER_BLOCK = 4  # the code transmits four data symbols per block


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def _gray(n: int) -> int:
    return n ^ (n >> 1)


def _bits_of(value: int, width: int) -> np.ndarray:
    return np.array([(value >> (width - 1 - k)) & 1 for k in range(width)], np.int8)


def _pack_bits(bits: np.ndarray) -> int:
    value = 0
    for b in bits:
        value = (value << 1) | int(b)
    return value


@dataclass(frozen=True)
class Constellation:
    """Immutable signal set with unit mean energy and a bit labelling.

    ``points[i]`` is the complex amplitude of symbol index ``i``.
    ``bit_to_index`` maps the integer value of a bit pattern (MSB first) to a
    symbol index and ``index_to_pattern`` is its inverse.  Square-lattice sets
    additionally carry the strictly increasing per-axis levels; their points
    are laid out row-major, ``index = re_level * M + im_level``.
    """

    points: np.ndarray
    kind: str  # "square-lattice" | "arbitrary"
    bits_per_symbol: int
    d_min: float
    mean_energy: float
    bit_to_index: np.ndarray
    index_to_pattern: np.ndarray
    axis_levels: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def is_square(self) -> bool:
        return self.kind == "square-lattice"

    @property
    def side(self) -> int:
        """Number of levels per axis (square-lattice only)."""
        if not self.is_square:
            raise ValueError("side is defined only for square-lattice constellations")
        return self.axis_levels.size

    # -- bit mapping -------------------------------------------------------

    def symbols_from_bits(self, bits) -> np.ndarray:
        """Map a block of bits to the four transmitted symbols.

        ``bits`` must hold ``4 * bits_per_symbol`` entries (array of 0/1 or a
        string of '0'/'1').  The inverse is :meth:`bits_from_symbols`.
        """
        idx = self.indices_from_bits(bits)
        return self.points[idx]

    def indices_from_bits(self, bits) -> np.ndarray:
        if isinstance(bits, str):
            bits = np.array([int(ch) for ch in bits], np.int8)
        bits = np.asarray(bits).astype(np.int8).ravel()
        want = SYMBOLS_PER_BLOCK * self.bits_per_symbol
        if bits.size != want:
            raise ValueError(f"expected {want} bits, got {bits.size}")
        if np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be 0 or 1")
        groups = bits.reshape(SYMBOLS_PER_BLOCK, self.bits_per_symbol)
        return np.array([self.bit_to_index[_pack_bits(g)] for g in groups], np.int64)

    def bits_from_symbols(self, symbols) -> np.ndarray:
        """Hard-decision inverse of :meth:`symbols_from_bits`."""
        symbols = np.asarray(symbols, complex).ravel()
        if symbols.size != SYMBOLS_PER_BLOCK:
            raise ValueError(f"expected {SYMBOLS_PER_BLOCK} symbols, got {symbols.size}")
        idx = [self.nearest_index(c) for c in symbols]
        return self.bits_from_indices(np.array(idx, np.int64))

    def bits_from_indices(self, indices: np.ndarray) -> np.ndarray:
        out = [_bits_of(int(self.index_to_pattern[i]), self.bits_per_symbol)
               for i in np.asarray(indices).ravel()]
        return np.concatenate(out)

    def nearest_index(self, value: complex) -> int:
        return int(np.argmin(np.abs(self.points - value)))

    # -- lattice queries -----------------------------------------------------

    def axis_candidates(self, center: float, radius: float) -> np.ndarray:
        """Per-axis levels within ``radius`` of ``center``, nearest first.

        Membership uses closed comparison so a level sitting exactly on the
        window edge is kept; distance ties resolve toward the smaller level.
        Only meaningful for square-lattice constellations.
        """
        if not self.is_square:
            raise ValueError("axis candidates require a square-lattice constellation")
        if radius < 0:
            raise ValueError("radius must be nonnegative")
        levels = self.axis_levels
        dist = np.abs(levels - center)
        keep = dist <= radius
        order = np.lexsort((levels[keep], dist[keep]))
        return levels[keep][order]


def _label_square(levels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-axis Gray labelling for a row-major square lattice."""
    m = levels.size
    bits_axis = int(np.log2(m))
    n = m * m
    bit_to_index = np.empty(n, np.int64)
    index_to_pattern = np.empty(n, np.int64)
    for kre in range(m):
        for kim in range(m):
            idx = kre * m + kim
            pattern = (_gray(kre) << bits_axis) | _gray(kim)
            bit_to_index[pattern] = idx
            index_to_pattern[idx] = pattern
    return bit_to_index, index_to_pattern


def _exact_min_distance(points: np.ndarray) -> float:
    diff = np.abs(points[:, None] - points[None, :])
    np.fill_diagonal(diff, np.inf)
    return float(diff.min())


def make_square_qam(side: int) -> Constellation:
    """Build the unit-energy square QAM constellation with ``side`` levels per axis.

    Levels are the odd integers ``+/-1, +/-3, ..., +/-(side-1)`` under a common
    scale; with 4 levels per axis this is ordinary 16-QAM.  ``side`` must be a
    power of two so each axis carries a whole number of bits.  All-zero bits
    map to the most negative corner of the lattice.
    """
    if side < 2 or not _is_power_of_two(side):
        raise ValueError(f"side must be a power of two >= 2, got {side}")
    raw = np.arange(-(side - 1), side, 2, dtype=float)
    grid = raw[:, None] + 1j * raw[None, :]
    points = grid.ravel()
    scale = np.sqrt(np.mean(np.abs(points) ** 2))
    points = points / scale
    levels = raw / scale
    bit_to_index, index_to_pattern = _label_square(levels)
    d_min = _exact_min_distance(points)
    return Constellation(
        points=points,
        kind="square-lattice",
        bits_per_symbol=2 * int(np.log2(side)),
        d_min=d_min,
        mean_energy=float(np.mean(np.abs(points) ** 2)),
        bit_to_index=bit_to_index,
        index_to_pattern=index_to_pattern,
        axis_levels=levels,
    )


def make_arbitrary(points, bit_map=None) -> Constellation:
    """Build a unit-energy constellation from an explicit point list.

    ``bit_map`` optionally assigns a bit pattern (as an integer) to every
    point index; it must be a permutation of ``range(len(points))``.  When
    omitted, the point count must be a power of two and indices are labelled
    with their own binary value.
    """
    points = np.asarray(points, complex).ravel()
    if points.size < 2:
        raise ValueError("a constellation needs at least two points")
    if len(set(points.tolist())) != points.size:
        raise ValueError("constellation points must be distinct")
    points = points / np.sqrt(np.mean(np.abs(points) ** 2))

    n = points.size
    if bit_map is None:
        if not _is_power_of_two(n):
            raise ValueError("point count must be a power of two without an explicit bit map")
        index_to_pattern = np.arange(n, dtype=np.int64)
    else:
        index_to_pattern = np.asarray(bit_map, np.int64).ravel()
        if index_to_pattern.size != n or set(index_to_pattern.tolist()) != set(range(n)):
            raise ValueError("bit map must be a permutation of the point indices")
    bit_to_index = np.empty(n, np.int64)
    bit_to_index[index_to_pattern] = np.arange(n)

    return Constellation(
        points=points,
        kind="arbitrary",
        bits_per_symbol=int(np.log2(n)),
        d_min=_exact_min_distance(points),
        mean_energy=float(np.mean(np.abs(points) ** 2)),
        bit_to_index=bit_to_index,
        index_to_pattern=index_to_pattern,
    )


def make_psk(order: int) -> Constellation:
    """Equally spaced phase-shift-keying constellation of the given order."""
    phases = 2.0 * np.pi * np.arange(order) / order
    return make_arbitrary(np.exp(1j * phases))
