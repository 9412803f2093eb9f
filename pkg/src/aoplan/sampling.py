"""Sample streams and the brute-force dispersion meter.

Two stream kinds: seeded uniform draws over a box, and the seedless Halton
sequence (radical inverse with the first d primes, index starting at 1).
Streams are single-owner and stateful; concurrent trials must each own a
stream derived from (base_seed, trial_index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SaturationError, UsageError
from .geometry import Box, Scenario, points_valid


def first_primes(k: int) -> list:
    """The first k primes, by trial division (k is tiny here)."""
    primes = []
    n = 2
    while len(primes) < k:
        if all(n % p for p in primes if p * p <= n):
            primes.append(n)
        n += 1
    return primes


def radical_inverse(base: int, index: int) -> float:
    f = 1.0
    r = 0.0
    while index > 0:
        f /= base
        r += f * (index % base)
        index //= base
    return r


class UniformStream:
    """I.i.d. uniform sampling over a box; equal seeds emit equal sequences."""

    kind = "uniform"

    def __init__(self, dimension: int, seed: int):
        self.dimension = int(dimension)
        self.seed = int(seed)
        self._rng = np.random.default_rng(self.seed)

    def next_point(self, domain: Box) -> np.ndarray:
        if domain.dimension != self.dimension:
            raise UsageError("stream dimension does not match the domain")
        return domain.lo + self._rng.random(self.dimension) * domain.widths

    def next_uniform01(self) -> float:
        return float(self._rng.random())


class HaltonStream:
    """Deterministic low-dispersion Halton points, one base per coordinate.

    Scalar draws (goal biasing and the like) come from an extra radical
    inverse channel on the next prime so they never perturb the point
    sequence.
    """

    kind = "halton"

    def __init__(self, dimension: int, start_index: int = 1):
        if start_index < 1:
            raise UsageError("halton start_index must be >= 1")
        self.dimension = int(dimension)
        primes = first_primes(dimension + 1)
        self.bases = primes[:dimension]
        self._scalar_base = primes[dimension]
        self.index = int(start_index)
        self._scalar_index = int(start_index)

    def next_point(self, domain: Box) -> np.ndarray:
        if domain.dimension != self.dimension:
            raise UsageError("stream dimension does not match the domain")
        unit = np.array(
            [radical_inverse(b, self.index) for b in self.bases], dtype=float
        )
        self.index += 1
        return domain.lo + unit * domain.widths

    def next_uniform01(self) -> float:
        v = radical_inverse(self._scalar_base, self._scalar_index)
        self._scalar_index += 1
        return v


def make_stream(dimension: int, sampler: str = "uniform", seed: int = 0):
    if sampler == "uniform":
        return UniformStream(dimension, seed)
    if sampler == "halton":
        return HaltonStream(dimension)
    raise UsageError(f"unknown sampler {sampler!r}")


def next_sample(stream, domain: Box) -> np.ndarray:
    """Draw the stream's next point inside the domain box."""
    return stream.next_point(domain)


def sample_free(stream, scenario: Scenario, max_attempts: int,
                margin: float = 0.0) -> np.ndarray:
    """First emitted sample that is valid; SaturationError when the budget runs out."""
    if max_attempts < 1:
        raise UsageError("max_attempts must be >= 1")
    for _ in range(max_attempts):
        q = stream.next_point(scenario.domain)
        if points_valid(scenario, q[None, :], margin)[0]:
            return q
    raise SaturationError(
        f"no valid sample in {max_attempts} attempts; space looks heavily obstructed"
    )


@dataclass(frozen=True)
class DispersionReport:
    n: int
    dispersion: float
    grid_resolution: float

    def csv_line(self) -> str:
        return f"{self.n},{self.dispersion!r},{self.grid_resolution!r}"


def measure_dispersion(samples, domain: Box, grid_resolution: float) -> DispersionReport:
    """Radius of the largest sample-free ball, brute-forced on a grid.

    Exact up to the grid resolution: the true dispersion differs from the
    reported max-min distance by at most half the grid diagonal.
    """
    pts = np.atleast_2d(np.asarray(samples, dtype=float))
    if pts.shape[0] == 0 or pts.shape[1] != domain.dimension:
        raise UsageError("measure_dispersion needs samples of the domain dimension")
    if grid_resolution <= 0.0:
        raise UsageError("grid_resolution must be > 0")
    axes = [
        np.linspace(lo, hi, max(2, int(math.ceil((hi - lo) / grid_resolution)) + 1))
        for lo, hi in zip(domain.lo, domain.hi)
    ]
    mesh = np.meshgrid(*axes, indexing="ij")
    grid = np.stack([m.ravel() for m in mesh], axis=1)
    worst = 0.0
    # chunk the grid so the pairwise distance block stays small
    chunk = max(1, int(4_000_000 // max(1, pts.shape[0])))
    for lo in range(0, grid.shape[0], chunk):
        block = grid[lo:lo + chunk]
        d2 = ((block[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2)
        worst = max(worst, float(np.sqrt(d2.min(axis=1)).max()))
    return DispersionReport(
        n=pts.shape[0], dispersion=worst, grid_resolution=float(grid_resolution)
    )
