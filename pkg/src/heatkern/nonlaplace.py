"""Leading-symbol machinery for operators whose principal part is not |xi|^2 I.

The class treated here has a covariantly constant leading symbol
A(xi) = a^{mu nu} xi_mu xi_nu whose eigenvalues are exact quadratics
mu_i |xi|^2 with direction-independent slopes and multiplicities; the
eigenprojectors Pi_i(xi) depend on the direction only.  That structure is
detected (and enforced) by sampling: inputs whose eigenvalues genuinely
depend on the direction are rejected as out of class rather than clustered
approximately.

The short-time data available at this level: the weighted volume term A_0,
the pointwise trace u_0, and the endomorphism H that multiplies Q in the
next coefficient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (EllipticityError, NumericError, ResourceError,
                     StructureError, ValidationError)

_CLUSTER_RTOL = 1e-8
_SPREAD_RTOL = 1e-10


@dataclass(frozen=True)
class LeadingSymbol:
    """Constant coefficient array a^{mu nu} of d x d Hermitian blocks."""

    m: int
    d: int
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=complex).reshape(self.m, self.m, self.d, self.d)
        if np.max(np.abs(a - a.transpose(1, 0, 2, 3))) > 1e-12:
            raise ValidationError("a must be symmetric in its base indices")
        if np.max(np.abs(a - a.conj().transpose(0, 1, 3, 2))) > 1e-12:
            raise ValidationError("blocks of a must be Hermitian")
        object.__setattr__(self, "a", a)

    def symbol_matrix(self, xi):
        """A(xi) = a^{mu nu} xi_mu xi_nu, one matrix or a batch."""
        xi = np.asarray(xi, dtype=float)
        if xi.ndim == 1:
            return np.einsum("u,v,uvab->ab", xi, xi, self.a)
        return np.einsum("nu,nv,uvab->nab", xi, xi, self.a)


def laplace_symbol(m, d=1):
    """a^{mu nu} = delta^{mu nu} I."""
    a = np.zeros((m, m, d, d), dtype=complex)
    for mu in range(m):
        a[mu, mu] = np.eye(d)
    return LeadingSymbol(m=m, d=d, a=a)


def one_form_symbol(m, c):
    """A(xi) = |xi|^2 I + c xi (x) xi on the cotangent fiber, d = m."""
    a = np.zeros((m, m, m, m), dtype=complex)
    eye = np.eye(m)
    for mu in range(m):
        for nu in range(m):
            a[mu, nu] = (eye[mu, nu] * eye
                         + 0.5 * c * (np.outer(eye[mu], eye[nu])
                                      + np.outer(eye[nu], eye[mu])))
    return LeadingSymbol(m=m, d=m, a=a)


def default_directions(m, count=24):
    """Deterministic well-spread unit directions: axes plus seeded samples."""
    dirs = []
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        dirs.append(e.copy())
        dirs.append(-e)
    rng = np.random.default_rng(20260416)
    while len(dirs) < count:
        v = rng.standard_normal(m)
        n = np.linalg.norm(v)
        if n > 1e-3:
            dirs.append(v / n)
    return np.array(dirs)


@dataclass(frozen=True)
class SymbolSpectrum:
    """Direction-independent slopes and multiplicities of a leading symbol."""

    symbol: LeadingSymbol
    s: int
    mu: tuple
    mult: tuple

    def projectors(self, direction):
        """Eigenprojectors Pi_1..Pi_s of A(xi-hat) at one unit direction."""
        return self.projectors_batch(np.asarray(direction, dtype=float)[None])[0]

    def projectors_batch(self, directions):
        """(N, s, d, d) array of projectors at unit directions."""
        dirs = np.asarray(directions, dtype=float)
        A = self.symbol.symbol_matrix(dirs)
        w, V = np.linalg.eigh(A)
        d = self.symbol.d
        out = np.zeros((dirs.shape[0], self.s, d, d), dtype=complex)
        mu = np.array(self.mu)
        for n in range(dirs.shape[0]):
            labels = np.argmin(np.abs(w[n][:, None] - mu[None, :]), axis=1)
            if np.max(np.abs(w[n] - mu[labels]) / mu[labels]) > _CLUSTER_RTOL:
                raise StructureError(
                    "eigenvalue off every recorded slope; symbol out of class")
            for i in range(self.s):
                cols = V[n][:, labels == i]
                out[n, i] = cols @ cols.conj().T
        return out


def eigenstructure(sym, directions=None):
    """Detect the slope/multiplicity structure of a leading symbol.

    Samples A over unit directions, clusters eigenvalues per direction at
    relative gap 1e-8, and requires identical multiplicities and slope
    agreement to 1e-10 across all directions.
    """
    if directions is None:
        directions = default_directions(sym.m)
    dirs = np.asarray(directions, dtype=float)
    if dirs.ndim != 2 or dirs.shape[0] < 20 or dirs.shape[1] != sym.m:
        raise ValidationError("need at least 20 unit directions of dimension m")
    norms = np.linalg.norm(dirs, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-12:
        raise ValidationError("directions must be unit vectors")

    w = np.linalg.eigvalsh(sym.symbol_matrix(dirs))
    if np.min(w) <= 1e-12:
        raise EllipticityError(
            f"leading symbol not positive definite: min eigenvalue {np.min(w):.3e}")

    def cluster(vals):
        groups = [[vals[0]]]
        for v in vals[1:]:
            if v - groups[-1][-1] <= _CLUSTER_RTOL * v:
                groups[-1].append(v)
            else:
                groups.append([v])
        return [float(np.mean(g)) for g in groups], [len(g) for g in groups]

    mu0, mult0 = cluster(w[0])
    slopes = [mu0]
    for n in range(1, w.shape[0]):
        mu, mult = cluster(w[n])
        if mult != mult0:
            raise StructureError(
                "eigenvalue multiplicities vary with direction; symbol out of class")
        slopes.append(mu)
    slopes = np.array(slopes)
    mean = slopes.mean(axis=0)
    spread = np.max(np.abs(slopes - mean[None, :]) / mean[None, :])
    if spread > _SPREAD_RTOL:
        raise StructureError(
            f"eigenvalue slopes vary with direction (relative spread {spread:.2e}); "
            "symbol out of class")

    spec = SymbolSpectrum(symbol=sym, s=len(mean),
                          mu=tuple(float(x) for x in mean), mult=tuple(mult0))

    # projector algebra residuals at the sampled directions
    P = spec.projectors_batch(dirs)
    eye = np.eye(sym.d)
    for n in range(dirs.shape[0]):
        if np.max(np.abs(P[n].sum(axis=0) - eye)) > 1e-10:
            raise StructureError("projectors do not resolve the identity")
        for i in range(spec.s):
            if np.max(np.abs(P[n, i] @ P[n, i] - P[n, i])) > 1e-10:
                raise StructureError("projector not idempotent")
            if abs(np.trace(P[n, i]).real - spec.mult[i]) > 1e-10:
                raise StructureError("projector rank differs from multiplicity")
            for j in range(i + 1, spec.s):
                if np.max(np.abs(P[n, i] @ P[n, j])) > 1e-10:
                    raise StructureError("projectors not mutually orthogonal")
    return spec


def a0_coefficient(spec, m, vol):
    """Leading trace coefficient (4 pi)^{-m/2} vol sum_i d_i mu_i^{-m/2}."""
    return ((4.0 * math.pi) ** (-m / 2.0) * vol
            * sum(di * mui ** (-m / 2.0) for di, mui in zip(spec.mult, spec.mu)))


def u0_trace(spec, m, t):
    """Pointwise leading trace sum_i d_i (4 pi t mu_i)^{-m/2}."""
    if t <= 0:
        raise ValidationError("t must be positive")
    return sum(di * (4.0 * math.pi * t * mui) ** (-m / 2.0)
               for di, mui in zip(spec.mult, spec.mu))


def h_endomorphism(sym, spec):
    """H = -(4 pi)^{-m/2} sum_i mu_i^{-m/2} <Pi_i>, Gaussian xi-average.

    The average pi^{-m/2} int e^{-|xi|^2} Pi_i(xi-hat) d xi is taken by
    product Gauss-Hermite quadrature with node doubling to 1e-10; even node
    counts keep the origin (where the direction is undefined) off the grid.
    """
    m, d = sym.m, sym.d
    prev = None
    for n in (16, 32, 64, 128):
        x, w = np.polynomial.hermite.hermgauss(n)
        grids = np.meshgrid(*([x] * m), indexing="ij")
        xi = np.stack([g.ravel() for g in grids], axis=-1)
        wts = np.ones(xi.shape[0])
        for g in np.meshgrid(*([w] * m), indexing="ij"):
            wts = wts * g.ravel()
        dirs = xi / np.linalg.norm(xi, axis=1, keepdims=True)
        P = spec.projectors_batch(dirs)
        avg = np.einsum("n,niab->iab", wts, P) * math.pi ** (-m / 2.0)
        H = -(4.0 * math.pi) ** (-m / 2.0) * sum(
            spec.mu[i] ** (-m / 2.0) * avg[i] for i in range(spec.s))
        if prev is not None and np.max(np.abs(H - prev)) < 1e-10:
            return 0.5 * (H + H.conj().T)
        prev = H
    raise NumericError("Gaussian projector average did not reach 1e-10")


def a2_potential_part(H, Q, vol):
    """Potential channel of the subleading coefficient: vol tr(H Q)."""
    H = np.asarray(H, dtype=complex)
    Q = np.asarray(Q, dtype=complex)
    return float(vol * np.trace(H @ Q).real)


def x_tensor(sym, riemann):
    """X^{mu nu}_{alpha beta} = -1/3 a^{lambda(mu} R^{nu)}_{(alpha|lambda|beta)}."""
    R = np.asarray(riemann, dtype=float)
    m, d = sym.m, sym.d
    X = np.zeros((m, m, m, m, d, d), dtype=complex)
    for mu in range(m):
        for nu in range(m):
            for al in range(m):
                for be in range(m):
                    acc = np.zeros((d, d), dtype=complex)
                    for lam in range(m):
                        acc += sym.a[lam, mu] * 0.5 * (R[nu, al, lam, be] + R[nu, be, lam, al])
                        acc += sym.a[lam, nu] * 0.5 * (R[mu, al, lam, be] + R[mu, be, lam, al])
                    X[mu, nu, al, be] = -acc / 6.0
    return X


def y_tensor(sym, ricci, fiber_curvature=None):
    """Y^mu_alpha = 2/3 a^{mu lambda} R_{lambda alpha} - (1/2){R_{alpha nu}, a^{mu nu}}."""
    ric = np.asarray(ricci, dtype=float)
    m, d = sym.m, sym.d
    Y = (2.0 / 3.0) * np.einsum("ulij,la->uaij", sym.a, ric)
    if fiber_curvature is not None:
        fc = np.asarray(fiber_curvature, dtype=complex).reshape(m, m, d, d)
        Y = Y - 0.5 * (np.einsum("avij,uvjk->uaik", fc, sym.a)
                       + np.einsum("uvij,avjk->uaik", sym.a, fc))
    return Y


_LATTICE_BUDGET = 4_000_000


def torus_oracle(sym, Q=None, t=1e-3, cutoff=None, periods=None):
    """Exact heat trace of a constant-coefficient operator on a flat torus.

    Sums tr exp(-t(A(k) + Q)) over the dual lattice k = 2 pi n / periods,
    growing the per-axis cutoff until the discarded tail (bounded per axis
    through the smallest slope) is below 1e-10.
    """
    if t <= 0:
        raise ValidationError("t must be positive")
    m, d = sym.m, sym.d
    periods = (1.0,) * m if periods is None else tuple(float(p) for p in periods)
    if len(periods) != m or any(p <= 0 for p in periods):
        raise ValidationError("need m positive periods")
    if Q is None:
        Q = np.zeros((d, d), dtype=complex)
    Q = np.asarray(Q, dtype=complex).reshape(d, d)
    if np.max(np.abs(Q - Q.conj().T)) > 1e-12:
        raise ValidationError("Q must be Hermitian")

    spec = eigenstructure(sym)
    mu_min = min(spec.mu)
    qshift = float(np.min(np.linalg.eigvalsh(Q)))

    def tail_bound(N):
        # outside the box, e^{-t mu_min |k|^2 - t qmin} factorizes per axis
        axis_full, axis_tail = [], []
        for L in periods:
            c = t * mu_min * (2.0 * math.pi / L) ** 2
            ns = np.arange(1, N + 1)
            axis_full.append(1.0 + 2.0 * float(np.sum(np.exp(-c * ns ** 2))))
            r = math.exp(-c * N)
            axis_tail.append(2.0 * math.exp(-c * N * (N + 1)) / (1.0 - r) if r < 1 else math.inf)
        total = 0.0
        for j in range(m):
            prod = axis_tail[j]
            for jp in range(m):
                if jp != j:
                    prod *= axis_full[jp]
            total += prod
        return d * math.exp(-t * qshift) * total

    N = int(cutoff) if cutoff is not None else 8
    while tail_bound(N) >= 1e-10:
        N = max(N + 4, int(N * 1.5))
        if (2 * N + 1) ** m > _LATTICE_BUDGET:
            raise ResourceError(
                f"lattice tail bound unreachable within budget (cutoff {N}, "
                f"{(2 * N + 1) ** m} points)")
    if (2 * N + 1) ** m > _LATTICE_BUDGET:
        raise ResourceError(f"lattice of {(2 * N + 1) ** m} points exceeds budget")

    axes = [np.arange(-N, N + 1) * (2.0 * math.pi / L) for L in periods]
    grids = np.meshgrid(*axes, indexing="ij")
    k = np.stack([g.ravel() for g in grids], axis=-1)
    total = 0.0
    for lo in range(0, k.shape[0], 262144):
        kc = k[lo:lo + 262144]
        A = sym.symbol_matrix(kc) + Q[None]
        lam = np.linalg.eigvalsh(A)
        total += float(np.sum(np.exp(-t * lam)))
    return total
