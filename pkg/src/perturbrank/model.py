"""System specification, spectral validation, and random instance generation.

A system is an n x n interaction matrix A together with K diagonal
transport matrices (stored as their diagonals).  Admissible systems have
a simple zero eigenvalue of A — one-dimensional right and left kernels,
with the zero root of the characteristic polynomial simple — and all
remaining eigenvalues in the open left half-plane.  The right/left null
vectors are normalized so that the first nonzero entry of h1 is 1 and
(h1, h1_star) = 1.

Two generator families are provided.  ``markov_generator`` draws matrices
with positive off-diagonal entries and zero column sums, which satisfy the
admissibility conditions by construction (irreducible generator: simple
zero eigenvalue, Hurwitz remainder, strictly positive null vectors).
``similarity_transformed`` conjugates such a matrix by a random invertible
integer matrix, producing the same exact spectrum without the sign
structure.  Generation is fully deterministic in the seed.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .exact_linalg import (
    Polynomial,
    RationalMatrix,
    Vector,
    charpoly_exact,
    det_exact,
    dot,
    hurwitz_stable,
    inverse,
    nullspace,
    rank_exact,
)

MARKOV_FAMILY = "markov_generator"
SIMILARITY_FAMILY = "similarity_transformed"
FAMILIES = (MARKOV_FAMILY, SIMILARITY_FAMILY)

_MAX_GENERATION_ATTEMPTS = 200

__all__ = [
    "FAMILIES",
    "MARKOV_FAMILY",
    "SIMILARITY_FAMILY",
    "GenerationFailed",
    "GeneratorConfig",
    "KernelDimensionError",
    "NonNormalizable",
    "NotStable",
    "SpectralData",
    "SystemSpec",
    "generate_instance",
    "null_pair_normalized",
    "validate_system",
]


class KernelDimensionError(ValueError):
    """The zero eigenvalue is absent or not simple."""


class NotStable(ValueError):
    """Some nonzero eigenvalue fails to lie in the open left half-plane."""


class NonNormalizable(ValueError):
    """The right/left null vectors are orthogonal, so no unit pairing exists."""


class GenerationFailed(RuntimeError):
    """Bounded resampling could not produce an admissible instance."""


@dataclass(frozen=True)
class SystemSpec:
    """An interaction matrix with K diagonal transport directions.

    ``D`` holds the diagonals, one length-n vector per direction.
    """

    n: int
    K: int
    D: tuple[Vector, ...]
    A: RationalMatrix
    label: str = ""

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be at least 2, got {self.n}")
        if self.K < 1:
            raise ValueError(f"K must be at least 1, got {self.K}")
        if self.A.rows != self.n or self.A.cols != self.n:
            raise ValueError(f"A must be {self.n}x{self.n}")
        if len(self.D) != self.K or any(len(d) != self.n for d in self.D):
            raise ValueError(f"D must hold {self.K} diagonals of length {self.n}")


@dataclass(frozen=True)
class SpectralData:
    """Normalized null pair of A plus the stability verdict."""

    h1: Vector
    h1_star: Vector
    normalized: bool
    stable: bool


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    K: int
    seed: int
    family: str = MARKOV_FAMILY
    entry_bound: int = 6

    def __post_init__(self):
        if self.n < 2 or self.K < 2:
            raise ValueError("generator needs n >= 2 and K >= 2")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}, expected one of {FAMILIES}")
        if self.entry_bound < 1:
            raise ValueError("entry_bound must be positive")


def null_pair_normalized(a: RationalMatrix) -> tuple[Vector, Vector]:
    """Right/left null vectors with first-nonzero(h1) = 1 and (h1, h1_star) = 1.

    Requires one-dimensional kernels on both sides; raises
    ``NonNormalizable`` when the vectors are orthogonal (defective zero
    eigenvalue), in which case no such scaling exists.
    """
    right = nullspace(a, side="right")
    if len(right) != 1:
        raise KernelDimensionError(
            f"right kernel dimension is {len(right)}, need exactly 1"
        )
    left = nullspace(a, side="left")
    if len(left) != 1:
        raise KernelDimensionError(
            f"left kernel dimension is {len(left)}, need exactly 1"
        )
    h1 = right[0]
    pairing = dot(h1, left[0])
    if pairing == 0:
        raise NonNormalizable("right and left null vectors are orthogonal")
    h1_star = tuple(x / pairing for x in left[0])
    return h1, h1_star


def _validate_interaction(a: RationalMatrix) -> SpectralData:
    p = charpoly_exact(a)
    coeffs = p.coefficients
    if coeffs[0] != 0:
        raise KernelDimensionError("zero is not an eigenvalue")
    if len(coeffs) < 2 or coeffs[1] == 0:
        raise KernelDimensionError("zero eigenvalue is not simple")
    h1, h1_star = null_pair_normalized(a)
    deflated = Polynomial(coeffs[1:])
    if not hurwitz_stable(deflated):
        raise NotStable("nonzero spectrum is not contained in the open left half-plane")
    return SpectralData(h1=h1, h1_star=h1_star, normalized=True, stable=True)


def validate_system(s: SystemSpec) -> SpectralData:
    """Check admissibility of A and return the normalized null pair.

    Raises ``KernelDimensionError`` when the zero eigenvalue is missing,
    repeated, or defective (λ² dividing the characteristic polynomial),
    and ``NotStable`` when the deflated polynomial is not Hurwitz.
    """
    return _validate_interaction(s.A)


def _positive_fraction(rng: random.Random, bound: int) -> Fraction:
    return Fraction(rng.randint(1, bound), rng.randint(1, bound))


def _signed_fraction(rng: random.Random, bound: int) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, bound))


def _markov_generator(rng: random.Random, n: int, bound: int) -> RationalMatrix:
    """Matrix with positive off-diagonal entries and zero column sums."""
    cols: list[list[Fraction]] = []
    for _ in range(n):
        col = [_positive_fraction(rng, bound) for _ in range(n - 1)]
        cols.append(col)
    rows = [[Fraction(0)] * n for _ in range(n)]
    for j in range(n):
        off = iter(cols[j])
        total = Fraction(0)
        for i in range(n):
            if i == j:
                continue
            x = next(off)
            rows[i][j] = x
            total += x
        rows[j][j] = -total
    return RationalMatrix(rows)


def _random_invertible(rng: random.Random, n: int, bound: int) -> RationalMatrix:
    for _ in range(_MAX_GENERATION_ATTEMPTS):
        t = RationalMatrix(
            [[Fraction(rng.randint(-bound, bound)) for _ in range(n)] for _ in range(n)]
        )
        if det_exact(t) != 0:
            return t
    raise GenerationFailed("could not sample an invertible transform")


def _sample_interaction(cfg: GeneratorConfig, rng: random.Random) -> RationalMatrix:
    if cfg.family == MARKOV_FAMILY:
        return _markov_generator(rng, cfg.n, cfg.entry_bound)
    base = _markov_generator(rng, cfg.n, cfg.entry_bound)
    t_bound = min(cfg.entry_bound, 3)  # keeps conjugated denominators modest
    for _ in range(_MAX_GENERATION_ATTEMPTS):
        t = _random_invertible(rng, cfg.n, t_bound)
        a = t @ base @ inverse(t)
        h1, h1_star = null_pair_normalized(a)
        # Stay inside the rank law's evident hypothesis class: the
        # conjugation must not park a null vector on a coordinate plane.
        if all(x != 0 for x in h1) and all(x != 0 for x in h1_star):
            return a
    raise GenerationFailed("similarity transform kept zeroing a null-vector entry")


def _sample_diagonals(
    cfg: GeneratorConfig,
    rng: random.Random,
    h1: Vector,
    h1_star: Vector,
) -> tuple[Vector, ...]:
    """K diagonals in general position for the rank law.

    Each diagonal has n distinct entries, the vectors are pairwise
    distinct, no pushed vector Psi_i h1 = (D_i - v_i) h1 vanishes, and
    together the pushed vectors span the full generic dimension
    min(K, n - 1).  The span screen matters: the rank law is a
    generic-rank statement, and a bounded rational grid lands on the
    lower-rank stratum with small but real probability — affinely
    dependent diagonals such as D_2 = a D_1 + b (1,...,1) force
    Psi_2 h1 parallel to Psi_1 h1, capping rank M below the prediction
    without any single direction being degenerate.  The screen reads
    only the input data (D, h1, h1_star), never M, so a genuine rank
    anomaly on general-position data stays observable downstream.

    Entries are rejection-sampled one diagonal at a time, so the retry
    budget bounds the failure odds per vector instead of compounding
    across all K (a whole-batch restart makes n = K = 8 genuinely flaky).
    """
    weights = tuple(a * b for a, b in zip(h1, h1_star))
    diagonals: list[Vector] = []
    pushed: list[Vector] = []
    span = 0
    for _ in range(cfg.K):
        for _ in range(_MAX_GENERATION_ATTEMPTS):
            d = tuple(_signed_fraction(rng, cfg.entry_bound) for _ in range(cfg.n))
            if len(set(d)) != cfg.n or any(d == prev for prev in diagonals):
                continue
            v = dot(d, weights)  # transport speed of the conserved mode
            x = tuple((di - v) * h for di, h in zip(d, h1))
            if all(xi == 0 for xi in x):
                continue  # Psi_i h1 = 0 (unreachable for distinct entries)
            if span < cfg.n - 1:
                grown = rank_exact(RationalMatrix(pushed + [x]))
                if grown == span:
                    continue  # direction already spanned: lower-rank stratum
                span = grown
            diagonals.append(d)
            pushed.append(x)
            break
        else:
            raise GenerationFailed("could not sample admissible transport diagonals")
    return tuple(diagonals)


def generate_instance(cfg: GeneratorConfig) -> SystemSpec:
    """Deterministically generate an admissible random instance.

    The same config always returns the identical instance; all rejection
    loops draw from the one seeded stream and are attempt-bounded.
    """
    rng = random.Random(cfg.seed)
    a = _sample_interaction(cfg, rng)
    data = _validate_interaction(a)
    diagonals = _sample_diagonals(cfg, rng, data.h1, data.h1_star)
    label = f"{cfg.family}-n{cfg.n}-K{cfg.K}-seed{cfg.seed}"
    return SystemSpec(n=cfg.n, K=cfg.K, D=diagonals, A=a, label=label)
