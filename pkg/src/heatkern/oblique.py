"""Oblique boundary conditions: ellipticity verdicts and the first
boundary trace coefficient.

The boundary operator mixes the normal derivative with tangential
derivatives through anti-Hermitian matrices Gamma^i and projects a
Dirichlet sector with Pi.  Everything here works in boundary normal
coordinates where the induced metric at the frozen point is the identity.

a1 is computed three ways: Gaussian quadrature of the xi-integrated
representation (general case), and two closed forms (commuting family,
Clifford family) used as cross-checks and exact limits.  The quadrature
genuinely diverges outside the strong-ellipticity cone, so that case is a
domain error, distinct from the conditioning error raised when the
integrand is merely near-singular.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (ConditioningError, DomainError, NumericError,
                     ValidationError)

_HERM_TOL = 1e-12


@dataclass(frozen=True)
class ObliqueBoundaryData:
    """Boundary condition data (Pi, Gamma^i, S) with the block constraints."""

    m: int
    d: int
    Pi: np.ndarray
    Gamma: tuple
    S: np.ndarray = None

    def __post_init__(self):
        if self.m < 2:
            raise ValidationError("need m >= 2 for a boundary problem")
        Pi = np.asarray(self.Pi, dtype=complex).reshape(self.d, self.d)
        if np.max(np.abs(Pi - Pi.conj().T)) > _HERM_TOL:
            raise ValidationError("Pi must be Hermitian")
        if np.max(np.abs(Pi @ Pi - Pi)) > _HERM_TOL:
            raise ValidationError("Pi must be idempotent")
        object.__setattr__(self, "Pi", Pi)

        gam = tuple(np.asarray(g, dtype=complex).reshape(self.d, self.d)
                    for g in self.Gamma)
        if len(gam) != self.m - 1:
            raise ValidationError("need m-1 tangential matrices Gamma^i")
        for g in gam:
            if np.max(np.abs(g + g.conj().T)) > _HERM_TOL:
                raise ValidationError("Gamma^i must be anti-Hermitian")
            if np.max(np.abs(Pi @ g)) > _HERM_TOL or np.max(np.abs(g @ Pi)) > _HERM_TOL:
                raise ValidationError("Gamma^i must annihilate the Pi sector")
        object.__setattr__(self, "Gamma", gam)

        S = np.zeros((self.d, self.d), dtype=complex) if self.S is None \
            else np.asarray(self.S, dtype=complex).reshape(self.d, self.d)
        if np.max(np.abs(S - S.conj().T)) > _HERM_TOL:
            raise ValidationError("S must be Hermitian")
        if np.max(np.abs(Pi @ S)) > _HERM_TOL or np.max(np.abs(S @ Pi)) > _HERM_TOL:
            raise ValidationError("S must annihilate the Pi sector")
        object.__setattr__(self, "S", S)

    def gamma_dot(self, zeta):
        """Gamma . zeta for one covector or a batch."""
        z = np.asarray(zeta, dtype=float)
        G = np.stack(self.Gamma) if self.Gamma else np.zeros((0, self.d, self.d))
        if z.ndim == 1:
            return np.einsum("i,iab->ab", z, G)
        return np.einsum("ni,iab->nab", z, G)

    def gamma_squared(self):
        """Gamma^2 = sum_i Gamma^i Gamma^i (identity boundary metric)."""
        g2 = np.zeros((self.d, self.d), dtype=complex)
        for g in self.Gamma:
            g2 += g @ g
        return g2


@dataclass(frozen=True)
class EllipticityVerdict:
    elliptic: bool
    min_eigenvalue: float
    violating_direction: np.ndarray = None


def boundary_directions(p, count=50):
    """Deterministic unit covectors on the boundary cotangent sphere.

    For p = 1 the sphere is just {-1, +1}; repetition fills the count.
    """
    dirs = []
    for i in range(p):
        e = np.zeros(p)
        e[i] = 1.0
        dirs.append(e.copy())
        dirs.append(-e)
    rng = np.random.default_rng(20260417)
    while len(dirs) < count:
        if p == 1:
            dirs.append(dirs[len(dirs) % 2].copy())
        else:
            v = rng.standard_normal(p)
            n = np.linalg.norm(v)
            if n > 1e-3:
                dirs.append(v / n)
    return np.array(dirs)


def strong_ellipticity(data, directions=None):
    """Minimum-eigenvalue test of |zeta| I - i Gamma . zeta over the sphere."""
    p = data.m - 1
    if directions is None:
        directions = boundary_directions(p)
    dirs = np.asarray(directions, dtype=float).reshape(-1, p)
    if dirs.shape[0] < 50:
        raise ValidationError("need at least 50 boundary covectors")
    if np.max(np.abs(np.linalg.norm(dirs, axis=1) - 1.0)) > 1e-12:
        raise ValidationError("covectors must be unit length")
    worst = math.inf
    worst_dir = None
    for z in dirs:
        M = np.eye(data.d) - 1j * data.gamma_dot(z)
        lam = float(np.min(np.linalg.eigvalsh(M)))
        if lam < worst:
            worst, worst_dir = lam, z
        if lam <= 1e-12:
            return EllipticityVerdict(False, lam, z)
    return EllipticityVerdict(True, worst, worst_dir)


def _prefactor(m):
    return (4.0 * math.pi) ** (-(m - 1) / 2.0)


def _assemble(data, m, J):
    d = data.d
    val = _prefactor(m) * 0.25 * (-np.eye(d) - 2.0 * data.Pi + 2.0 * J)
    return 0.5 * (val + val.conj().T)


def a1_quadrature(data, m=None):
    """First boundary coefficient from the Gaussian covector integral.

    (4 pi)^{-(m-1)/2} / 4 * { -I - 2 Pi
        + 2 pi^{-(m-1)/2} int dzeta exp[-|zeta|^2 I - (Gamma . zeta)^2] },
    by product Gauss-Hermite with node doubling to 1e-9.  The factor
    exp(-|zeta|^2) is scalar and splits off exactly; the remaining matrix
    exponent -(Gamma . zeta)^2 is Hermitian positive semidefinite only
    inside the ellipticity cone, and the integral diverges outside it.
    """
    m = data.m if m is None else m
    p = m - 1
    verdict = strong_ellipticity(data)
    if not verdict.elliptic:
        raise DomainError(
            "integral divergent: strong ellipticity violated at direction "
            f"{verdict.violating_direction} (min eigenvalue {verdict.min_eigenvalue:.3e})")
    if not any(np.any(np.abs(g) > 0) for g in data.Gamma):
        return _assemble(data, m, np.eye(data.d))   # exact Dirichlet/Neumann limit

    # near-violation conditioning: |zeta|^2 I + (Gamma.zeta)^2 nearly singular
    dirs = boundary_directions(p)
    cond_min = math.inf
    for z in dirs:
        gz = data.gamma_dot(z)
        M = np.eye(data.d) + gz @ gz
        cond_min = min(cond_min, float(np.min(np.linalg.eigvalsh(M))))
    if cond_min < 1e-3:
        raise ConditioningError(
            f"quadrature ill-conditioned: min eig(|zeta|^2 I + (Gamma.zeta)^2) "
            f"= {cond_min:.3e} < 1e-3 on the unit sphere")

    prev = None
    for n in (16, 32, 64, 128):
        x, w = np.polynomial.hermite.hermgauss(n)
        grids = np.meshgrid(*([x] * p), indexing="ij")
        zeta = np.stack([g.ravel() for g in grids], axis=-1)
        wts = np.ones(zeta.shape[0])
        for g in np.meshgrid(*([w] * p), indexing="ij"):
            wts = wts * g.ravel()
        gz = data.gamma_dot(zeta)
        M = -np.einsum("nab,nbc->nac", gz, gz)      # -(Gamma.zeta)^2, Hermitian PSD
        lam, V = np.linalg.eigh(M)
        expM = np.einsum("nab,nb,ncb->nac", V, np.exp(lam), V.conj())
        J = math.pi ** (-p / 2.0) * np.einsum("n,nac->ac", wts, expM)
        if prev is not None and np.max(np.abs(J - prev)) < 1e-9:
            return _assemble(data, m, J)
        prev = J
    raise NumericError("boundary quadrature did not reach 1e-9")


def a1_abelian(data, m=None):
    """Closed form for a commuting family: 2(I + Gamma^2)^{-1/2} branch."""
    m = data.m if m is None else m
    for i, gi in enumerate(data.Gamma):
        for gj in data.Gamma[i + 1:]:
            if np.max(np.abs(gi @ gj - gj @ gi)) > 1e-12:
                raise ValidationError("Gamma family does not commute")
    g2 = data.gamma_squared()
    lam, V = np.linalg.eigh(np.eye(data.d) + g2)
    if np.min(lam) <= 1e-12:
        raise DomainError(
            f"I + Gamma^2 singular (min eigenvalue {np.min(lam):.3e}); "
            "a1 diverges at the ellipticity boundary")
    J = (V * lam ** -0.5) @ V.conj().T
    return _assemble(data, m, J)


def a1_clifford(data, m=None):
    """Closed form for a Clifford-like family.

    Requires Gamma^i Gamma^j + Gamma^j Gamma^i = 2 delta^{ij} Gamma^2/(m-1);
    then the covector integral collapses to a single radial one with value
    (I + Gamma^2/(m-1))^{-(m-1)/2}.
    """
    m = data.m if m is None else m
    p = m - 1
    g2 = data.gamma_squared()
    for i, gi in enumerate(data.Gamma):
        for j, gj in enumerate(data.Gamma):
            anti = gi @ gj + gj @ gi
            target = 2.0 * g2 / p if i == j else np.zeros_like(g2)
            if np.max(np.abs(anti - target)) > 1e-10:
                raise ValidationError("Gamma family is not Clifford-like")
    lam, V = np.linalg.eigh(np.eye(data.d) + g2 / p)
    if np.min(lam) <= 1e-12:
        raise DomainError(
            f"I + Gamma^2/(m-1) singular (min eigenvalue {np.min(lam):.3e})")
    J = (V * lam ** (-p / 2.0)) @ V.conj().T
    return _assemble(data, m, J)


def smooth_boundary_constants(bc, m, dimV, K=0.0):
    """(b0, b1, b2) of the smooth-boundary trace expansion.

    b1 carries the sign of the boundary condition (- Dirichlet, + Neumann);
    b2 is the extrinsic-curvature term with trace K.
    """
    if bc not in ("dirichlet", "neumann"):
        raise ValidationError("bc must be 'dirichlet' or 'neumann'")
    sign = -1.0 if bc == "dirichlet" else 1.0
    b0 = 0.0
    b1 = sign * (4.0 * math.pi) ** (-(m - 1) / 2.0) * dimV / 4.0
    b2 = (4.0 * math.pi) ** (-m / 2.0) * dimV * K / 3.0
    return b0, b1, b2
