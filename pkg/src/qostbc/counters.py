"""Real-arithmetic operation counters for decoder cost accounting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Stage rows.
SETUP = 0    # shared per-decode pipeline: channel combining, Gram weights, soft estimate
SELECT = 1   # per-pair candidate selection: interval endpoints, window scans, ordering
SEARCH = 2   # per-pair search: residuals, partial sums, metric updates, pruning tests

# Operation columns.
ADD = 0
MUL = 1
DIV = 2
CMP = 3

STAGE_NAMES = ("setup", "select", "search")
OP_NAMES = ("adds", "mults", "divs", "comparisons")


@dataclass
class OpCounters:
    """Tally of real arithmetic split by pipeline stage.

    Counting conventions (real-operation equivalents):

    * complex add/sub            -> 2 additions
    * complex times complex      -> 4 multiplications + 2 additions
    * complex times real         -> 2 multiplications
    * squared magnitude |x|^2    -> 2 multiplications + 1 addition
    * sums over receive antennas -> one addition per accumulated term
    * reciprocal or quotient     -> 1 division
    * relational test            -> 1 comparison

    Constants that depend only on the run configuration (rotation phasors,
    the SNR scale factor, the initial search radius) are precomputed and not
    tallied.  Diagnostic fields that the search never consumes (noise
    variances, the interference weight ``t2``) are not tallied either.

    The ``setup`` stage is incurred once per decoded block and is shared by
    the two symbol-pair searches; ``select`` and ``search`` accumulate over
    both pairs.  :meth:`per_pair_report` folds these into the two-stage view
    used by the operation-count study (full setup plus half of the per-pair
    stages, i.e. the cost of detecting one symbol pair).
    """

    data: np.ndarray = field(default_factory=lambda: np.zeros((3, 4), np.int64))
    trials: int = 0

    def tally(self, stage: int, adds: int = 0, mults: int = 0, divs: int = 0,
              cmps: int = 0) -> None:
        row = self.data[stage]
        row[ADD] += adds
        row[MUL] += mults
        row[DIV] += divs
        row[CMP] += cmps

    @staticmethod
    def kernel_buffer() -> np.ndarray:
        """Flat int64 buffer handed to the search kernels (select | search)."""
        return np.zeros(8, np.int64)

    def absorb_kernel(self, buf: np.ndarray) -> None:
        self.data[SELECT] += buf[:4]
        self.data[SEARCH] += buf[4:]

    def merge(self, other: "OpCounters") -> None:
        self.data += other.data
        self.trials += other.trials

    def __iadd__(self, other: "OpCounters") -> "OpCounters":
        self.merge(other)
        return self

    # -- views -----------------------------------------------------------

    @property
    def pre(self) -> np.ndarray:
        """Pre-computation stage: shared setup plus candidate selection."""
        return self.data[SETUP] + self.data[SELECT]

    @property
    def search(self) -> np.ndarray:
        return self.data[SEARCH].copy()

    @property
    def total(self) -> np.ndarray:
        return self.data.sum(axis=0)

    def averages(self, n_trials: int | None = None) -> dict:
        """Average counts per trial (both symbol pairs included)."""
        n = self.trials if n_trials is None else n_trials
        n = max(n, 1)
        return {
            "pre": self.pre / n,
            "search": self.search / n,
            "total": self.total / n,
        }

    def per_pair_report(self, n_trials: int | None = None) -> dict:
        """Average cost of detecting one symbol pair, shared setup included.

        The shared setup is charged in full (neither pair can be detected
        without it); selection and search are averaged over the two pairs.
        """
        n = self.trials if n_trials is None else n_trials
        n = max(n, 1)
        pre = (self.data[SETUP] + self.data[SELECT] / 2.0) / n
        search = self.data[SEARCH] / 2.0 / n
        return {"pre-computation": pre, "search": search, "total": pre + search}

    def as_dict(self) -> dict:
        out = {}
        for s, sname in enumerate(STAGE_NAMES):
            for o, oname in enumerate(OP_NAMES):
                out[f"{sname}_{oname}"] = int(self.data[s, o])
        return out
