"""Closed-form mean response times for rank-based M/G/1 scheduling.

The trust policies are analyzed through their relevant-size moments: for
each rank level ell, the first two moments of the service a generic honest
job receives while its rank is <= ell.  Mean response times then follow
from the age-based-priority queueing formula

    E[U] = lam * E[S^2_{<=w}] / (2 (1 - rho_{<w}) (1 - rho_{<=w}))
           + z_i / (1 - rho_{<w})

where w is the job's final (worst) rank.  A punished job has w = n+1, an
honest or overestimating job has w = k (its declared class), and an
unpunished underestimator climbs to w = i under MeasuredTrust or stays at
w = k under BlindTrust.

Moment tables are linear in the punishment probability b, so everything
here is evaluated over whole b-grids at once where useful.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Policy, SystemConfig

TRUST_POLICIES = (Policy.MEASURED_TRUST, Policy.BLIND_TRUST)


def _require_trust(kind: Policy) -> None:
    if kind not in TRUST_POLICIES:
        raise ValueError(f"rank-based analysis applies to trust policies, not {kind}")


@dataclass(frozen=True)
class MomentTable:
    """Relevant-size moments indexed by rank ell = 0..n+1.

    m1[ell] = E[S_{<=ell}], m2[ell] = E[S^2_{<=ell}], rho[ell] = lam * m1[ell].
    Index 0 is the empty rank class (identically zero), index n+1 the full
    service distribution.  rho_{<ell} is read as rho[ell - 1].
    """

    kind: Policy
    b: float
    m1: np.ndarray
    m2: np.ndarray
    rho: np.ndarray

    @property
    def n(self) -> int:
        return len(self.m1) - 2


def _case_values(config: SystemConfig, kind: Policy, ell: int, punished: bool) -> np.ndarray:
    """Deterministic service at ranks <= ell for each (true size i, estimate j).

    ell is a 1-based rank in 1..n.  An honest job sits in class j until age
    z_j; if its size exceeds z_j it is either punished to rank n+1 or, when
    spared, climbs class by class (MeasuredTrust) or keeps class j
    (BlindTrust).
    """
    z = config.sizes
    n = config.n
    v = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if j + 1 > ell:
                v[i, j] = 0.0
            elif i <= j:
                v[i, j] = z[i]
            elif punished:
                v[i, j] = z[j]
            elif kind == Policy.BLIND_TRUST:
                v[i, j] = z[i]
            else:
                v[i, j] = z[i] if i + 1 <= ell else z[ell - 1]
    return v


def relevant_size_moments(config: SystemConfig, kind: Policy, b: float) -> MomentTable:
    """Relevant-size moment table for the given trust policy and punishment b."""
    _require_trust(kind)
    n = config.n
    M = config.matrix.entries
    z = config.sizes
    m1 = np.zeros(n + 2)
    m2 = np.zeros(n + 2)
    for ell in range(1, n + 1):
        v1 = _case_values(config, kind, ell, punished=True)
        v0 = _case_values(config, kind, ell, punished=False)
        mix = b * v1 + (1.0 - b) * v0
        mix2 = b * v1**2 + (1.0 - b) * v0**2
        m1[ell] = float((M * mix).sum())
        m2[ell] = float((M * mix2).sum())
    zi = np.broadcast_to(z[:, None], (n, n))
    m1[n + 1] = float((M * zi).sum())
    m2[n + 1] = float((M * zi**2).sum())
    return MomentTable(kind=kind, b=float(b), m1=m1, m2=m2, rho=config.lam * m1)


def _moment_coeffs(config: SystemConfig, kind: Policy):
    """Arrays (a1, d1, a2, d2) with m1[ell](b) = a1[ell] + b d1[ell], ditto m2."""
    n = config.n
    M = config.matrix.entries
    z = config.sizes
    a1 = np.zeros(n + 2); d1 = np.zeros(n + 2)
    a2 = np.zeros(n + 2); d2 = np.zeros(n + 2)
    for ell in range(1, n + 1):
        v1 = _case_values(config, kind, ell, punished=True)
        v0 = _case_values(config, kind, ell, punished=False)
        a1[ell] = float((M * v0).sum())
        d1[ell] = float((M * (v1 - v0)).sum())
        a2[ell] = float((M * v0**2).sum())
        d2[ell] = float((M * (v1**2 - v0**2)).sum())
    zi = np.broadcast_to(z[:, None], (n, n))
    a1[n + 1] = float((M * zi).sum())
    a2[n + 1] = float((M * zi**2).sum())
    return a1, d1, a2, d2


def response_cube(config: SystemConfig, kind: Policy, bs: np.ndarray):
    """(U, U_punished, U_unpunished) arrays of shape (n, n, len(bs)).

    The conditional planes hold NaN where i <= k (no overrun is possible,
    so the punishment coin never matters).
    """
    _require_trust(kind)
    bs = np.atleast_1d(np.asarray(bs, dtype=float))
    n = config.n
    z = config.sizes
    lam = config.lam
    a1, d1, a2, d2 = _moment_coeffs(config, kind)
    m2 = a2[:, None] + np.outer(d2, bs)
    rho = lam * (a1[:, None] + np.outer(d1, bs))
    rho_total = rho[n + 1]
    # queueing delay shared by every job whose final rank is ell
    queue = [None] + [
        lam * m2[ell] / (2.0 * (1.0 - rho[ell - 1]) * (1.0 - rho[ell]))
        for ell in range(1, n + 1)
    ]
    queue_punished = lam * m2[n + 1] / (2.0 * (1.0 - rho[n]) * (1.0 - rho_total))
    B = len(bs)
    U = np.empty((n, n, B))
    Upun = np.full((n, n, B), np.nan)
    Uunp = np.full((n, n, B), np.nan)
    for i in range(n):
        punished_i = queue_punished + z[i] / (1.0 - rho[n])
        climb_i = queue[i + 1] + z[i] / (1.0 - rho[i])
        for k in range(n):
            if i <= k:
                U[i, k] = queue[k + 1] + z[i] / (1.0 - rho[k])
            else:
                spared = climb_i if kind == Policy.MEASURED_TRUST \
                    else queue[k + 1] + z[i] / (1.0 - rho[k])
                U[i, k] = bs * punished_i + (1.0 - bs) * spared
                Upun[i, k] = punished_i
                Uunp[i, k] = spared
    return U, Upun, Uunp


@dataclass(frozen=True)
class UCell:
    unconditional: float
    punished: float | None
    unpunished: float | None


def mean_response_u(config: SystemConfig, kind: Policy, b: float, i: int, k: int) -> UCell:
    """Mean response for a true-size-z_i job declaring z_k (0-based i, k)."""
    U, Upun, Uunp = response_cube(config, kind, np.array([b]))
    if i <= k:
        return UCell(float(U[i, k, 0]), None, None)
    return UCell(float(U[i, k, 0]), float(Upun[i, k, 0]), float(Uunp[i, k, 0]))


@dataclass(frozen=True)
class ResponseTable:
    """All mean response times for one (policy, b) pair.

    U[i, k]: true size index i, declared index k.  T[j, k]: internal
    estimate j, declared k; rows with zero estimate-marginal are NaN and
    listed in undefined_estimates.  overall is the honest-equilibrium mean.
    """

    kind: Policy
    b: float
    U: np.ndarray
    u_punished: np.ndarray
    u_unpunished: np.ndarray
    T: np.ndarray
    overall: float
    undefined_estimates: tuple[int, ...]


def response_table(config: SystemConfig, kind: Policy, b: float) -> ResponseTable:
    U3, Upun3, Uunp3 = response_cube(config, kind, np.array([b]))
    U, Upun, Uunp = U3[:, :, 0], Upun3[:, :, 0], Uunp3[:, :, 0]
    M = config.matrix.entries
    R = config.matrix.estimate_marginal
    n = config.n
    T = np.full((n, n), np.nan)
    undefined = []
    for j in range(n):
        if R[j] > 0:
            T[j, :] = M[:, j] @ U / R[j]
        else:
            undefined.append(j)
    overall = float((M * U).sum())  # sum_j R_j T_jj with honest declarations k = j
    return ResponseTable(
        kind=kind, b=float(b), U=U, u_punished=Upun, u_unpunished=Uunp,
        T=T, overall=overall, undefined_estimates=tuple(undefined),
    )


def overall_curve(config: SystemConfig, kind: Policy, bs) -> np.ndarray:
    """Honest-equilibrium overall mean response over a b-grid."""
    U, _, _ = response_cube(config, kind, bs)
    return np.einsum("ij,ijb->b", config.matrix.entries, U)


def rank_function(grid, kind: Policy, k: int, punished: bool, age: float) -> int:
    """Current rank (1..n+1) of a job declaring index k at the given age."""
    _require_trust(kind)
    z = grid.sizes
    n = len(z)
    if not 0 <= k < n:
        raise ValueError(f"declared index {k} out of range for n={n}")
    if age < z[k]:
        return k + 1
    if punished:
        return n + 1
    if kind == Policy.BLIND_TRUST:
        return k + 1
    return int(np.searchsorted(z, age, side="right")) + 1


def fcfs_mean_response(config: SystemConfig) -> float:
    """First-come first-served mean response (single-queue identity)."""
    rho = config.load
    return config.mean_size + config.lam * config.mean_size_sq / (2.0 * (1.0 - rho))


def scf_mean_response(config: SystemConfig) -> tuple[float, np.ndarray]:
    """Smallest Class First: overall and per-true-size mean responses.

    SCF serves the job whose smallest still-possible size is least, i.e.
    blind rank = min {ell : age < z_ell}.  A size-z_i job then has final
    rank i and the relevant size at rank ell is min(S, z_ell).
    """
    z = config.sizes
    lam = config.lam
    S = config.matrix.size_marginal
    n = config.n
    capped1 = np.array([0.0] + [float(S @ np.minimum(z, z[i])) for i in range(n)])
    capped2 = np.array([0.0] + [float(S @ np.minimum(z, z[i]) ** 2) for i in range(n)])
    rho = lam * capped1
    per_size = np.empty(n)
    for i in range(n):
        per_size[i] = (
            lam * capped2[i + 1] / (2.0 * (1.0 - rho[i]) * (1.0 - rho[i + 1]))
            + z[i] / (1.0 - rho[i])
        )
    return float(S @ per_size), per_size
