"""Quasi-orthogonal space-time block encoding and the equivalent linear channel.

The transmitter sends four symbols over four time slots from four antennas;
the third and fourth symbols are phase-rotated by a configurable angle.  At
the receiver, conjugating the even time slots turns the block structure into
an ordinary linear model ``y = sqrt(rho/4) H s + w`` whose Gram matrix
``H^H H`` has only two distinct scalar weights.  Everything the fast decoders
need (combined fades, Gram weights, the soft estimate) is derived here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .counters import SETUP, OpCounters

__all__ = [
    "M_T",
    "Codeword",
    "ChannelRealization",
    "EquivalentChannel",
    "ChannelStats",
    "SoftEstimate",
    "SingularChannelError",
    "encode",
    "to_equivalent_rx",
    "equivalent_channel",
    "channel_stats",
    "compute_z",
    "soft_noise_covariance",
]

M_T = 4  # transmit antennas (fixed by the code structure)


class SingularChannelError(RuntimeError):
    """Raised when the Gram matrix is singular and no soft estimate exists."""


@dataclass(frozen=True)
class Codeword:
    """Transmit matrix (rows = time slots, columns = antennas)."""

    X: np.ndarray
    theta: float


@dataclass(frozen=True)
class ChannelRealization:
    """Raw fades, one column per receive antenna."""

    fades: np.ndarray  # complex, shape (4, n_rx)

    def __post_init__(self):
        fades = np.asarray(self.fades, complex)
        if fades.ndim != 2 or fades.shape[0] != M_T:
            raise ValueError(f"fades must have shape (4, n_rx), got {fades.shape}")
        if fades.shape[1] < 1:
            raise ValueError("need at least one receive antenna")
        if not np.all(np.isfinite(fades)):
            raise ValueError("fades must be finite")
        object.__setattr__(self, "fades", fades)

    @property
    def n_rx(self) -> int:
        return self.fades.shape[1]


@dataclass(frozen=True)
class EquivalentChannel:
    """Per-antenna equivalent channel blocks and their combined-fade split.

    ``blocks[j]`` reproduces the physical block transmission once the even
    received slots are conjugated (see :func:`to_equivalent_rx`), ``h`` is the
    vertical stack over receive antennas.  ``u``/``v`` and ``prime_blocks``
    realise the butterfly factorisation ``H_j = 0.5 * U H'_j U V`` in which
    the sum/difference fades ``h13p = h1 + h3`` etc. decouple the two halves.
    """

    blocks: np.ndarray        # (n_rx, 4, 4)
    h: np.ndarray             # (4*n_rx, 4)
    u: np.ndarray             # (4, 4) real butterfly
    v: np.ndarray             # (4, 4) rotation diagonal
    prime_blocks: np.ndarray  # (n_rx, 4, 4) block-diagonal combined fades
    h13p: np.ndarray
    h13m: np.ndarray
    h24p: np.ndarray
    h24m: np.ndarray
    theta: float

    @property
    def n_rx(self) -> int:
        return self.blocks.shape[0]


@dataclass(frozen=True)
class ChannelStats:
    """Scalar statistics of the Gram matrix at a given SNR.

    ``alpha``/``beta`` are the total energies of the sum and difference
    combined fades; ``t0 = (alpha+beta)/2`` and ``t1 = (alpha-beta)/2`` are
    the only two weights in the Gram matrix.  ``lam = t1/t0`` drives the
    search: ``tau1/tau2`` weight the cross term, ``vartheta = 1/(1-|lam|)``
    converts a metric bound into a squared search radius.  ``sigma1_sq`` and
    ``varrho`` are the variance and cross-correlation scale of the soft
    estimate's noise.  A zero ``alpha`` or ``beta`` makes the Gram matrix
    singular; such channels are flagged ``degenerate`` and the derived
    quantities become infinite.
    """

    alpha: float
    beta: float
    t0: float
    t1: float
    t2: float
    lam: float
    tau1: float
    tau2: float
    vartheta: float
    sigma1_sq: float
    varrho: float
    inv_alpha: float
    inv_beta: float
    degenerate: bool
    rho: float
    theta: float


@dataclass(frozen=True)
class SoftEstimate:
    """Zero-forcing soft estimate of the four transmitted symbols."""

    z: np.ndarray  # complex, shape (4,)

    @property
    def z13(self) -> np.ndarray:
        return self.z[[0, 2]]

    @property
    def z24(self) -> np.ndarray:
        return self.z[[1, 3]]

    def pair(self, which: int) -> np.ndarray:
        """Complex pair ``(z1, z3)`` for ``which == 0`` or ``(z2, z4)`` for 1."""
        return self.z13 if which == 0 else self.z24

    def search_center(self, which: int) -> np.ndarray:
        """Real search center ``[re_a, im_a, re_b, im_b]`` for one pair."""
        a, b = (0, 2) if which == 0 else (1, 3)
        return np.array([self.z[a].real, self.z[a].imag,
                         self.z[b].real, self.z[b].imag])


def _block(a, b) -> np.ndarray:
    """Elementary 2x2 fade block [[a, b], [b*, -a*]]."""
    return np.array([[a, b], [np.conj(b), -np.conj(a)]])


def encode(s, theta: float) -> Codeword:
    """Lay out four symbols as the rotated quasi-orthogonal transmit matrix."""
    s = np.asarray(s, complex).ravel()
    if s.size != 4:
        raise ValueError(f"expected 4 symbols, got {s.size}")
    if not np.all(np.isfinite(s)):
        raise ValueError("symbols must be finite")
    s1, s2 = s[0], s[1]
    s3 = np.exp(1j * theta) * s[2]
    s4 = np.exp(1j * theta) * s[3]
    X = np.array([
        [s1, s2, s3, s4],
        [-np.conj(s2), np.conj(s1), -np.conj(s4), np.conj(s3)],
        [s3, s4, s1, s2],
        [-np.conj(s4), np.conj(s3), -np.conj(s2), np.conj(s1)],
    ])
    return Codeword(X=X, theta=float(theta))


def to_equivalent_rx(r) -> np.ndarray:
    """Conjugate the even time slots of a physical 4-slot receive vector.

    This is the unique slot convention under which the equivalent channel
    blocks reproduce the physical transmission.
    """
    r = np.asarray(r, complex).ravel()
    return np.array([r[0], np.conj(r[1]), r[2], np.conj(r[3])])


def equivalent_channel(ch: ChannelRealization, theta: float,
                       counters: OpCounters | None = None) -> EquivalentChannel:
    """Build the equivalent linear channel and its butterfly factorisation.

    Only the combined fades (four sums/differences per receive antenna) are
    tallied; assembling the explicit block matrices is bookkeeping for
    verification paths, not part of the decoding pipeline.
    """
    h = ch.fades
    n_rx = ch.n_rx
    ejt = np.exp(1j * theta)

    h13p = h[0] + h[2]
    h13m = h[0] - h[2]
    h24p = h[1] + h[3]
    h24m = h[1] - h[3]
    if counters is not None:
        counters.tally(SETUP, adds=8 * n_rx)

    blocks = np.empty((n_rx, 4, 4), complex)
    prime = np.zeros((n_rx, 4, 4), complex)
    for j in range(n_rx):
        b12 = _block(h[0, j], h[1, j])
        b34 = _block(h[2, j], h[3, j])
        blocks[j, :2, :2] = b12
        blocks[j, :2, 2:] = ejt * b34
        blocks[j, 2:, :2] = b34
        blocks[j, 2:, 2:] = ejt * b12
        prime[j, :2, :2] = _block(h13p[j], h24p[j])
        prime[j, 2:, 2:] = _block(h13m[j], h24m[j])

    eye2 = np.eye(2)
    u = np.block([[eye2, eye2], [eye2, -eye2]])
    v = np.diag([1.0, 1.0, ejt, ejt])

    return EquivalentChannel(
        blocks=blocks,
        h=blocks.reshape(4 * n_rx, 4),
        u=u,
        v=v,
        prime_blocks=prime,
        h13p=h13p,
        h13m=h13m,
        h24p=h24p,
        h24m=h24m,
        theta=float(theta),
    )


def channel_stats(eq: EquivalentChannel, rho: float,
                  counters: OpCounters | None = None) -> ChannelStats:
    """Derive the Gram weights and search scalars for one channel realization."""
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    n_rx = eq.n_rx

    alpha = float(np.sum(np.abs(eq.h13p) ** 2 + np.abs(eq.h24p) ** 2))
    beta = float(np.sum(np.abs(eq.h13m) ** 2 + np.abs(eq.h24m) ** 2))
    t0 = 0.5 * (alpha + beta)
    t1 = 0.5 * (alpha - beta)
    if counters is not None:
        # per antenna: two squared magnitudes + pair sum + accumulation, twice
        counters.tally(SETUP, adds=8 * n_rx + 2, mults=8 * n_rx + 2)

    degenerate = alpha == 0.0 or beta == 0.0
    if degenerate:
        lam = math.copysign(1.0, t1) if t0 > 0 else math.nan
        return ChannelStats(
            alpha=alpha, beta=beta, t0=t0, t1=t1,
            t2=math.inf, lam=lam,
            tau1=2.0 * lam * math.cos(eq.theta) if t0 > 0 else math.nan,
            tau2=2.0 * lam * math.sin(eq.theta) if t0 > 0 else math.nan,
            vartheta=math.inf, sigma1_sq=math.inf, varrho=math.inf,
            inv_alpha=math.inf, inv_beta=math.inf,
            degenerate=True, rho=float(rho), theta=eq.theta,
        )

    inv_alpha = 1.0 / alpha
    inv_beta = 1.0 / beta
    lam = t1 / t0
    abs_lam = abs(lam)
    one_minus = 1.0 - abs_lam
    vartheta = 1.0 / one_minus
    tau1 = (2.0 * lam) * math.cos(eq.theta)
    tau2 = (2.0 * lam) * math.sin(eq.theta)
    if counters is not None:
        # divisions: 1/alpha, 1/beta, lam, vartheta; the sign test on t1 is
        # the lone relational op of the setup
        counters.tally(SETUP, adds=1, mults=3, divs=4, cmps=1)

    # diagnostics (not consumed by the search, untallied)
    t2 = abs(t1) / (t0 - abs(t1))
    sigma1_sq = M_T * (alpha + beta) / (2.0 * rho * alpha * beta)
    varrho = M_T * (alpha - beta) / (2.0 * rho * alpha * beta)

    return ChannelStats(
        alpha=alpha, beta=beta, t0=t0, t1=t1, t2=t2, lam=lam,
        tau1=tau1, tau2=tau2, vartheta=vartheta,
        sigma1_sq=sigma1_sq, varrho=varrho,
        inv_alpha=inv_alpha, inv_beta=inv_beta,
        degenerate=False, rho=float(rho), theta=eq.theta,
    )


def compute_z(y, eq: EquivalentChannel, stats: ChannelStats, rho: float | None = None,
              counters: OpCounters | None = None) -> SoftEstimate:
    """Soft estimate of the transmitted symbols from the stacked receive vector.

    Uses the butterfly factorisation so the Gram inverse costs two scalar
    reciprocals instead of a matrix inverse; agrees with the definitional
    form ``sqrt(4/rho) (H^H H)^-1 H^H y`` to working precision.
    """
    if stats.degenerate:
        raise SingularChannelError("Gram matrix is singular; no soft estimate")
    rho = stats.rho if rho is None else rho
    y = np.asarray(y, complex).ravel()
    n_rx = eq.n_rx
    if y.size != 4 * n_rx:
        raise ValueError(f"expected {4 * n_rx} receive samples, got {y.size}")

    z = _compute_z_batch(y[:, None], eq, stats, rho, counters)[:, 0]
    return SoftEstimate(z=z)


def _compute_z_batch(y: np.ndarray, eq: EquivalentChannel, stats: ChannelStats,
                     rho: float, counters: OpCounters | None = None) -> np.ndarray:
    """Vectorized soft-estimate pipeline, columns of ``y`` are trials."""
    n_rx = eq.n_rx
    n = y.shape[1]
    yj = y.reshape(n_rx, 4, n)

    # butterfly combine of the receive slots
    u1 = yj[:, 0] + yj[:, 2]
    u2 = yj[:, 1] + yj[:, 3]
    u3 = yj[:, 0] - yj[:, 2]
    u4 = yj[:, 1] - yj[:, 3]

    # adjoint combined-fade blocks applied per antenna, then summed
    ap = eq.h13p[:, None]
    bp = eq.h24p[:, None]
    am = eq.h13m[:, None]
    bm = eq.h24m[:, None]
    g1 = np.sum(np.conj(ap) * u1 + bp * u2, axis=0)
    g2 = np.sum(np.conj(bp) * u1 - ap * u2, axis=0)
    g3 = np.sum(np.conj(am) * u3 + bm * u4, axis=0)
    g4 = np.sum(np.conj(bm) * u3 - am * u4, axis=0)

    scale = math.sqrt(M_T / (4.0 * rho))  # run-configuration constant
    ca = scale * stats.inv_alpha
    cb = scale * stats.inv_beta
    ra = np.exp(-1j * eq.theta) * ca
    rb = np.exp(-1j * eq.theta) * cb

    z = np.empty((4, n), complex)
    z[0] = ca * g1 + cb * g3
    z[1] = ca * g2 + cb * g4
    z[2] = ra * g1 - rb * g3
    z[3] = ra * g2 - rb * g4

    if counters is not None:
        counters.tally(
            SETUP,
            # slot combine + adjoint blocks + antenna accumulation + assembly
            adds=(8 * n_rx + 24 * n_rx + 8 * n_rx + 16) * n,
            # adjoint blocks + reciprocal scaling + rotated assembly
            mults=(32 * n_rx + 30) * n,
        )
    return z


def soft_noise_covariance(stats: ChannelStats) -> np.ndarray:
    """Exact covariance of the soft-estimate error ``z - s``.

    Diagonal entries are ``sigma1_sq``; the cross blocks couple the rotated
    symbol pair with magnitude ``varrho`` and carry a minus sign because the
    Gram inverse negates its off-diagonal weight.
    """
    if stats.degenerate:
        raise SingularChannelError("covariance undefined for a singular channel")
    cross = -stats.varrho * np.exp(1j * stats.theta)
    r = np.zeros((4, 4), complex)
    np.fill_diagonal(r, stats.sigma1_sq)
    r[0, 2] = r[1, 3] = cross
    r[2, 0] = r[3, 1] = np.conj(cross)
    return r
