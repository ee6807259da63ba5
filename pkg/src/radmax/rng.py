"""Per-trial seeding and the random profile generator used by the suites.

Trial ``i`` of a run with master seed ``s`` draws from
``numpy.random.Generator(PCG64(splitmix64(s + i * GOLDEN)))``, so each trial
is reproducible on its own and results do not depend on how trials are
split between workers.
"""

from __future__ import annotations

import math

import numpy as np

from .profiles import PiecewisePower

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(x: int) -> int:
    """One output of the splitmix64 mixer for state ``x``."""
    z = (x + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def trial_seed(master: int, index: int) -> int:
    return splitmix64((int(master) + int(index) * GOLDEN) & MASK64)


def trial_rng(master: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(trial_seed(master, index)))


# exponent ranges of the two documented suites
A1_EXPONENTS = (-0.9, 0.0)
COUNTER_EXPONENTS = (-0.9, 2.0)


def random_profile(rng: np.random.Generator, *, max_pieces: int = 8,
                   exponents=A1_EXPONENTS, span=(0.1, 10.0)) -> PiecewisePower:
    """Random piecewise power profile.

    Number of pieces uniform in ``1..max_pieces``; breakpoints and
    coefficients log-uniform in ``span``; exponents uniform in ``exponents``.
    """
    k = int(rng.integers(1, max_pieces + 1))
    lo_s, hi_s = math.log(span[0]), math.log(span[1])
    cuts = np.sort(np.exp(rng.uniform(lo_s, hi_s, size=k - 1)))
    cuts = np.unique(cuts)
    edges = np.concatenate([[0.0], cuts, [math.inf]])
    coeffs = np.exp(rng.uniform(lo_s, hi_s, size=edges.size - 1))
    expo = rng.uniform(exponents[0], exponents[1], size=edges.size - 1)
    return PiecewisePower(
        [(float(edges[i]), float(edges[i + 1]), float(coeffs[i]), float(expo[i]))
         for i in range(edges.size - 1)]
    )
