"""Transfer structure of the conserved mode and its limiting profile.

Given an admissible system, the conserved mode travels with exact speed
v_i = (D_i h1, h1_star) along direction i.  The second-order (diffusive)
correction is governed by the symmetric K x K matrix

    M_ij = ((Psi_i G Psi_j + Psi_j G Psi_i) h1, h1_star) / 2,

where Psi_i = D_i - v_i I and G is the constrained pseudo-inverse of A
determined by A G = I - h1 h1_starᵀ and h1_starᵀ G = 0.  M is built
exactly; its rank comes from fraction-free elimination and its spectrum
from a hand-written cyclic Jacobi sweep on the float image, so the two
routes stay independent.  The limiting profile itself is an anisotropic
Gaussian with covariance sigma0² I - 2 M t, evaluated in floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from .exact_linalg import (
    RationalMatrix,
    Vector,
    dot,
    nullspace,
    outer,
    rank_exact,
    solve_constrained,
)
from .model import SpectralData, SystemSpec

#: Cyclic Jacobi: stop once the off-diagonal Frobenius mass drops below this
#: times the Frobenius norm of the input (or after the sweep cap).
JACOBI_TOLERANCE = 1e-12
JACOBI_MAX_SWEEPS = 100

#: A numeric eigenvalue of M above this times max|M| breaks dissipativity.
DISSIPATIVITY_TOLERANCE = 1e-9

#: Numeric eigenvalues larger than this times max|M| count as nonzero when
#: cross-checking the exact rank.
RANK_AGREEMENT_TOLERANCE = 1e-8

__all__ = [
    "DISSIPATIVITY_TOLERANCE",
    "JACOBI_MAX_SWEEPS",
    "JACOBI_TOLERANCE",
    "RANK_AGREEMENT_TOLERANCE",
    "NotDissipative",
    "ProfileQuery",
    "StructureReport",
    "TransferStructure",
    "SingularCovariance",
    "analyze_structure",
    "build_M",
    "group_inverse",
    "jacobi_eigenvalues",
    "leading_term_eval",
    "pde_residual",
    "phi0_eval",
    "velocities",
]


class NotDissipative(ValueError):
    """M has a numerically positive eigenvalue; no spreading Gaussian exists."""


class SingularCovariance(ValueError):
    """The profile covariance failed to be positive definite."""


@dataclass(frozen=True)
class TransferStructure:
    """Exact transfer data: speeds v, shifted transports Psi, pseudo-inverse G,
    and the symmetric diffusion matrix M."""

    v: Vector
    Psi: tuple[RationalMatrix, ...]
    G: RationalMatrix
    M: RationalMatrix


@dataclass(frozen=True)
class StructureReport:
    rank_exact: int
    eigenvalues: tuple[float, ...]
    predicted_rank: int
    rank_matches_prediction: bool
    degenerate: bool
    kernel_directions: tuple[Vector, ...]


@dataclass(frozen=True)
class ProfileQuery:
    """Evaluation request for the leading-order profile.

    ``t = 0`` is allowed (initial Gaussian); the full leading-term
    evaluation additionally requires t > 0.
    """

    epsilon: float
    t: float
    x: tuple[float, ...]
    sigma0: float
    amplitude: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.t < 0:
            raise ValueError("t must be nonnegative")
        if not self.sigma0 > 0:
            raise ValueError("sigma0 must be positive")
        if not self.amplitude > 0:
            raise ValueError("amplitude must be positive")


def velocities(s: SystemSpec, sd: SpectralData) -> Vector:
    """Exact transport speeds v_i = (D_i h1, h1_star)."""
    weights = tuple(a * b for a, b in zip(sd.h1, sd.h1_star))
    return tuple(dot(d, weights) for d in s.D)


def group_inverse(a: RationalMatrix, sd: SpectralData) -> RationalMatrix:
    """Constrained pseudo-inverse: A G = I - h1 h1_starᵀ with h1_starᵀ G = 0.

    All columns are solved in one elimination of [A | I - h1 h1_starᵀ] and
    then shifted onto the constraint hyperplane along h1 (the same result,
    column for column, as ``solve_constrained`` with c = h1_star).
    """
    n = a.rows
    target = RationalMatrix.identity(n) - outer(sd.h1, sd.h1_star)
    aug = [list(row) + list(trow) for row, trow in zip(a.data, target.data)]
    from .exact_linalg import _rref  # local import keeps the helper private

    rref_rows, pivot_cols = _rref(aug)
    if any(pc >= n for pc in pivot_cols):
        raise ValueError("projector is not in the range of A")  # cannot happen
    cols: list[list[Fraction]] = []
    for j in range(n):
        x = [Fraction(0)] * n
        for row_idx, pc in enumerate(pivot_cols):
            x[pc] = rref_rows[row_idx][n + j]
        shift = dot(x, sd.h1_star)  # (h1, h1_star) = 1, so no division needed
        cols.append([xi - shift * hi for xi, hi in zip(x, sd.h1)])
    return RationalMatrix(zip(*cols))


def build_M(s: SystemSpec, sd: SpectralData) -> TransferStructure:
    """Assemble speeds, shifted transports, pseudo-inverse and the matrix M."""
    v = velocities(s, sd)
    psi_diags = tuple(
        tuple(di - vi for di in d) for d, vi in zip(s.D, v)
    )
    g = group_inverse(s.A, sd)
    pushed = [tuple(p * h for p, h in zip(diag, sd.h1)) for diag in psi_diags]
    lifted = [g.matvec(w) for w in pushed]
    m_rows = [[Fraction(0)] * s.K for _ in range(s.K)]
    for i in range(s.K):
        for j in range(i, s.K):
            first = dot(tuple(p * u for p, u in zip(psi_diags[i], lifted[j])), sd.h1_star)
            second = dot(tuple(p * u for p, u in zip(psi_diags[j], lifted[i])), sd.h1_star)
            value = (first + second) / 2
            m_rows[i][j] = value
            m_rows[j][i] = value
    return TransferStructure(
        v=v,
        Psi=tuple(RationalMatrix.diagonal(diag) for diag in psi_diags),
        G=g,
        M=RationalMatrix(m_rows),
    )


def jacobi_eigenvalues(sym: list[list[float]]) -> list[float]:
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations, ascending.

    Off-diagonal mass is driven below ``JACOBI_TOLERANCE`` times the input
    Frobenius norm, or ``JACOBI_MAX_SWEEPS`` sweeps, whichever comes first.
    """
    n = len(sym)
    a = [row[:] for row in sym]
    scale = math.sqrt(sum(x * x for row in a for x in row))
    if scale == 0.0 or n == 1:
        return sorted(a[i][i] for i in range(n))
    threshold = JACOBI_TOLERANCE * scale
    for _ in range(JACOBI_MAX_SWEEPS):
        off = math.sqrt(sum(a[i][j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off <= threshold:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p][q]
                if abs(apq) <= threshold / (n * n):
                    continue
                tau = (a[q][q] - a[p][p]) / (2.0 * apq)
                t = math.copysign(1.0, tau) / (abs(tau) + math.hypot(1.0, tau))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                for k in range(n):
                    akp, akq = a[k][p], a[k][q]
                    a[k][p] = c * akp - s * akq
                    a[k][q] = s * akp + c * akq
                for k in range(n):
                    apk, aqk = a[p][k], a[q][k]
                    a[p][k] = c * apk - s * aqk
                    a[q][k] = s * apk + c * aqk
    return sorted(a[i][i] for i in range(n))


def analyze_structure(
    ts: TransferStructure, s: SystemSpec, sd: SpectralData | None = None
) -> StructureReport:
    """Exact rank, numeric spectrum, and the rank-law verdict for M.

    The prediction is min(n - 1, K).  ``degenerate`` flags instances where
    some Psi_i h1 vanishes exactly or all transport diagonals coincide;
    the rank law is not asserted for those.
    """
    if sd is None:
        from .model import null_pair_normalized

        h1, h1_star = null_pair_normalized(s.A)
        sd = SpectralData(h1=h1, h1_star=h1_star, normalized=True, stable=True)
    rank = rank_exact(ts.M)
    eigs = tuple(jacobi_eigenvalues(ts.M.to_float()))
    predicted = min(s.n - 1, s.K)
    zero = (Fraction(0),) * s.n
    psi_kills_h1 = any(psi.matvec(sd.h1) == zero for psi in ts.Psi)
    all_equal = all(d == s.D[0] for d in s.D)
    kernel = tuple(nullspace(ts.M, side="right"))
    return StructureReport(
        rank_exact=rank,
        eigenvalues=eigs,
        predicted_rank=predicted,
        rank_matches_prediction=rank == predicted,
        degenerate=psi_kills_h1 or all_equal,
        kernel_directions=kernel,
    )


def _covariance(m: RationalMatrix, t: float, sigma0: float) -> np.ndarray:
    mf = np.array(m.to_float(), dtype=float)
    return sigma0 * sigma0 * np.eye(m.rows) - 2.0 * t * mf


def _require_dissipative(m: RationalMatrix) -> None:
    mf = m.to_float()
    top = max((abs(x) for row in mf for x in row), default=0.0)
    eigs = jacobi_eigenvalues(mf)
    if eigs and eigs[-1] > DISSIPATIVITY_TOLERANCE * top:
        raise NotDissipative(
            f"largest numeric eigenvalue {eigs[-1]:.3e} exceeds tolerance"
        )


def phi0_eval(m: RationalMatrix, q: ProfileQuery, zeta: tuple[float, ...]) -> float:
    """Leading-order scalar profile at comoving point zeta and time q.t.

    The Gaussian with covariance Sigma_t = sigma0² I - 2 M t solves
    phi_t + sum_ij M_ij phi_{zeta_i zeta_j} = 0 with an isotropic Gaussian
    of width sigma0 at t = 0 and peak value ``amplitude``.
    """
    k = m.rows
    if len(zeta) != k:
        raise ValueError(f"zeta must have length {k}")
    _require_dissipative(m)
    sigma = _covariance(m, q.t, q.sigma0)
    det = float(np.linalg.det(sigma))
    if det <= 0:
        raise SingularCovariance("covariance is not positive definite")
    z = np.array(zeta, dtype=float)
    quad = float(z @ np.linalg.solve(sigma, z))
    det0 = q.sigma0 ** (2 * k)
    return q.amplitude * math.sqrt(det0 / det) * math.exp(-0.5 * quad)


def leading_term_eval(
    s: SystemSpec, sd: SpectralData, ts: TransferStructure, q: ProfileQuery
) -> list[float]:
    """Leading-order state vector phi0(zeta, t) · h1 at the lab point q.x.

    The comoving coordinates are zeta_i = (x_i - v_i t) / epsilon; the
    expansion is only valid for t > 0.
    """
    if len(q.x) != s.K:
        raise ValueError(f"x must have length {s.K}")
    if not q.t > 0:
        raise ValueError("leading-term evaluation requires t > 0")
    zeta = tuple(
        (xi - float(vi) * q.t) / q.epsilon for xi, vi in zip(q.x, ts.v)
    )
    value = phi0_eval(ts.M, q, zeta)
    return [value * float(h) for h in sd.h1]


def pde_residual(
    m: RationalMatrix, q: ProfileQuery, zeta: tuple[float, ...], h: float
) -> float:
    """Second-order central-difference residual of phi_t + sum M_ij phi_ij.

    For the exact Gaussian profile this is O(h²); it is the independent
    check that the evaluated profile actually solves its equation.
    """
    if not h > 0:
        raise ValueError("step h must be positive")
    if q.t - h < 0:
        raise ValueError("step h must keep t - h nonnegative")
    k = m.rows

    def phi(tval: float, point: tuple[float, ...]) -> float:
        return phi0_eval(m, replace(q, t=tval), point)

    def shifted(base: tuple[float, ...], idx: int, delta: float) -> tuple[float, ...]:
        moved = list(base)
        moved[idx] += delta
        return tuple(moved)

    d_t = (phi(q.t + h, zeta) - phi(q.t - h, zeta)) / (2.0 * h)
    center = phi(q.t, zeta)
    total = d_t
    for i in range(k):
        for j in range(k):
            mij = float(m[i, j])
            if mij == 0.0:
                continue
            if i == j:
                second = (
                    phi(q.t, shifted(zeta, i, h))
                    - 2.0 * center
                    + phi(q.t, shifted(zeta, i, -h))
                ) / (h * h)
            else:
                pp = phi(q.t, shifted(shifted(zeta, i, h), j, h))
                pm = phi(q.t, shifted(shifted(zeta, i, h), j, -h))
                mp = phi(q.t, shifted(shifted(zeta, i, -h), j, h))
                mm = phi(q.t, shifted(shifted(zeta, i, -h), j, -h))
                second = (pp - pm - mp + mm) / (4.0 * h * h)
            total += mij * second
    return abs(total)
