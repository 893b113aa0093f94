"""Jet-space recursion for the diagonal heat-kernel coefficients.

The generator works on one model geometry at a time, in normal coordinates y
about the base point.  The conjugated operator

    L = P^{-1} Delta^{-1/2} F Delta^{1/2} P,
    F f = -g^{-1/2} (d_mu + A_mu) (g^{1/2} g^{mu nu} (d_nu + A_nu) f) + Q f,

is applied mechanically to each Taylor basis element |n> as a polynomial with
matrix coefficients; pairing with <m'| gives the table of matrix elements.
Two simplifications are exact here: the connection one-form in the radial
gauge for a covariantly constant curvature is A_mu(y) = -1/2 R_{mu alpha}
y^alpha, which also makes the parallel-transport factor P identically 1, and
the Van Vleck factor in normal coordinates is Delta^{1/2} = det(g)^{-1/4}.

The recursion itself is

    a_0 = I,     (1 + D/k) a_k = L a_{k-1},

solved order by order with D the Euler (degree-counting) operator, and the
trace coefficients are A_{2k} = (4 pi)^{-m/2} ((-1)^k / k!) vol tr a_k^diag.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .tensorcalc import (
    ModelGeometry,
    PotentialJet,
    SymTensor,
    TaylorSeries,
    _series_pow,
    exponents,
    inner_product,
    multi_indices,
    multiplicity,
)


# ---------------------------------------------------------------------------
# matrix-coefficient polynomials in the normal coordinates
# ---------------------------------------------------------------------------

class _MPoly:
    """Polynomial in y with (d, d) matrix coefficients, truncated at `deg`.

    Keys are per-axis exponent tuples.  All arithmetic drops monomials above
    the truncation degree; within it everything is exact.
    """

    __slots__ = ("m", "d", "deg", "c")

    def __init__(self, m, d, deg, c=None):
        self.m = m
        self.d = d
        self.deg = deg
        self.c = {} if c is None else c

    @classmethod
    def zero(cls, m, d, deg):
        return cls(m, d, deg)

    @classmethod
    def monomial(cls, m, d, deg, expo, block):
        p = cls(m, d, deg)
        if sum(expo) <= deg:
            p.c[tuple(expo)] = np.asarray(block, dtype=complex).reshape(d, d)
        return p

    @classmethod
    def from_radial_series(cls, m, d, deg, series):
        """sum_k series[k] * (|y|^2)^k as a matrix polynomial (times I_d)."""
        from .tensorcalc import _norm2_power
        p = cls(m, d, deg)
        eye = np.eye(d, dtype=complex)
        for k, ck in enumerate(series):
            if 2 * k > deg or ck == 0.0:
                continue
            for expo, wgt in _norm2_power(m, k):
                p._add(expo, ck * wgt * eye)
        return p

    def _add(self, expo, block):
        cur = self.c.get(expo)
        if cur is None:
            self.c[expo] = block.copy()
        else:
            cur += block

    def copy(self):
        return _MPoly(self.m, self.d, self.deg, {k: v.copy() for k, v in self.c.items()})

    def add(self, other):
        out = self.copy()
        for k, v in other.c.items():
            out._add(k, v)
        return out

    def scale(self, s):
        return _MPoly(self.m, self.d, self.deg, {k: v * s for k, v in self.c.items()})

    def mul(self, other):
        """self @ other, coefficientwise matrix product, truncated."""
        out = _MPoly(self.m, self.d, self.deg)
        for ka, va in self.c.items():
            da = sum(ka)
            for kb, vb in other.c.items():
                if da + sum(kb) > self.deg:
                    continue
                ke = tuple(a + b for a, b in zip(ka, kb))
                out._add(ke, va @ vb)
        return out

    def diff(self, axis):
        out = _MPoly(self.m, self.d, self.deg)
        for k, v in self.c.items():
            e = k[axis]
            if e == 0:
                continue
            ke = list(k)
            ke[axis] = e - 1
            out._add(tuple(ke), e * v)
        return out

    def coeff(self, expo):
        v = self.c.get(tuple(expo))
        if v is None:
            return np.zeros((self.d, self.d), dtype=complex)
        return v


# ---------------------------------------------------------------------------
# operator jet
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OperatorJet:
    """Matrix elements <m'|L|n> for m', n <= cutoff on one geometry."""

    m: int
    d: int
    cutoff: int
    table: dict = field(repr=False)
    geometry: ModelGeometry = field(repr=False)
    potential: PotentialJet = field(repr=False)

    def element(self, row, col):
        return self.table[(row, col)]


def _potential_poly(pot, m, d, deg):
    p = _MPoly(m, d, deg)
    for n, jet in enumerate(pot.Q_jets):
        if n > deg:
            break
        ents = jet.entries  # (1, #low, d, d)
        for li, idx in enumerate(multi_indices(m, n)):
            block = ents[0, li]
            if not np.any(block):
                continue
            al = exponents(idx, m)
            f = 1.0
            for e in al:
                f *= math.factorial(e)
            # coefficient of y^alpha is <n|Q>[alpha] / alpha!
            p._add(al, block / f)
    return p


def build_operator_jet(geom, pot, cutoff):
    """Matrix elements of the conjugated operator on the given geometry."""
    if geom.m != pot.m:
        raise ValidationError("geometry and potential dimensions differ")
    if cutoff < 0:
        raise ValidationError("cutoff must be nonnegative")
    if geom.cutoff < cutoff or pot.cutoff < cutoff:
        raise ValidationError(
            f"input jets support order {min(geom.cutoff, pot.cutoff)} < requested {cutoff}")
    m, d = geom.m, pot.d
    deg = cutoff + 2
    nser = deg // 2 + 1

    prof = list(geom.radial_profile) + [0.0] * nser
    if len(geom.radial_profile) < nser and geom.kind == "sphere":
        raise ValidationError("geometry radial profile too short for requested cutoff")
    inv_prof = _series_pow(prof, -1.0, nser)
    # (1 - f)/w and (1 - 1/f)/w enter the rank-one parts of g and g^{-1}
    outer = [-c for c in prof[1:nser]]
    outer_inv = [-c for c in inv_prof[1:nser]]

    S = lambda series: _MPoly.from_radial_series(m, d, deg, series)
    sqrtg = S(_series_pow(prof, (m - 1) / 2.0, nser))
    inv_sqrtg = S(_series_pow(prof, -(m - 1) / 2.0, nser))
    gq = S(_series_pow(prof, (m - 1) / 4.0, nser))          # g^{1/4}
    ginvq = S(_series_pow(prof, -(m - 1) / 4.0, nser))      # g^{-1/4} = Delta^{1/2}
    inv_diag = S(inv_prof)
    outer_inv_poly = S(outer_inv)

    ginv = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            p = _MPoly(m, d, deg)
            if i == j:
                p = p.add(inv_diag)
            e = [0] * m
            e[i] += 1
            e[j] += 1
            yy = _MPoly.monomial(m, d, deg, tuple(e), np.eye(d))
            p = p.add(outer_inv_poly.mul(yy))
            ginv[i][j] = p

    conn = []
    for mu in range(m):
        p = _MPoly(m, d, deg)
        for al in range(m):
            blk = pot.curvature[mu, al]
            if np.any(blk):
                e = [0] * m
                e[al] = 1
                p._add(tuple(e), -0.5 * blk)
        conn.append(p)

    Qp = _potential_poly(pot, m, d, deg)

    def cov(nu, f):
        return f.diff(nu).add(conn[nu].mul(f))

    def apply_L(phi):
        inner = ginvq.mul(phi)
        flux = _MPoly(m, d, deg)
        for mu in range(m):
            s = _MPoly(m, d, deg)
            for nu in range(m):
                s = s.add(ginv[mu][nu].mul(cov(nu, inner)))
            flux = flux.add(cov(mu, sqrtg.mul(s)))
        out = inv_sqrtg.mul(flux).scale(-1.0).add(Qp.mul(inner))
        return gq.mul(out)

    table = {}
    for n in range(cutoff + 1):
        uppers = multi_indices(m, n)
        results = []
        scale = 1.0 / math.factorial(n)
        for U in uppers:
            phi = _MPoly.monomial(m, d, deg, exponents(U, m), scale * np.eye(d))
            results.append(apply_L(phi))
        for mp in range(cutoff + 1):
            lows = multi_indices(m, mp)
            E = np.zeros((len(uppers), len(lows), d, d), dtype=complex)
            for ui, psi in enumerate(results):
                for li, idx in enumerate(lows):
                    al = exponents(idx, m)
                    f = 1.0
                    for e in al:
                        f *= math.factorial(e)
                    E[ui, li] = f * psi.coeff(al)
            table[(mp, n)] = SymTensor(m, n, mp, d, E)

    # sparsity: degree counting makes <m'|L|n> vanish for n > m'+2
    for (mp, n), t in table.items():
        if n > mp + 2 and t.max_abs() > 1e-13:
            raise ValidationError("sparsity violation in operator jet (internal)")

    return OperatorJet(m=m, d=d, cutoff=cutoff, table=table,
                       geometry=geom, potential=pot)


# ---------------------------------------------------------------------------
# the recursion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HmdsCoefficient:
    order: int
    series: TaylorSeries
    diagonal: np.ndarray = field(repr=False)


def dk_inverse(k, f):
    """(1 + D/k)^{-1}: scale order-n component by k/(k+n)."""
    if not isinstance(k, int) or k < 1:
        raise ValidationError("dk_inverse requires integer k >= 1")
    comps = tuple(f.component(n).scale(k / (k + n)) for n in range(f.cutoff + 1))
    return TaylorSeries(f.m, f.d, f.cutoff, comps)


def _apply_jet(jet, series, out_cutoff):
    """L applied to a coefficient series, exact to out_cutoff."""
    comps = []
    for n in range(out_cutoff + 1):
        acc = SymTensor.zeros(jet.m, 0, n, jet.d)
        for n2 in range(min(n + 2, series.cutoff) + 1):
            elem = jet.table[(n, n2)]
            comp = series.component(n2)
            if comp.max_abs() == 0.0 or elem.max_abs() == 0.0:
                continue
            acc = acc + inner_product(elem, comp)
        comps.append(acc)
    return TaylorSeries(jet.m, jet.d, out_cutoff, tuple(comps))


def hmds_coefficients(jet, kmax, cutoff):
    """Solve the recursion; coefficient k is exact to order cutoff + 2(kmax-k)."""
    if kmax < 0 or cutoff < 0:
        raise ValidationError("kmax and cutoff must be nonnegative")
    if cutoff + 2 * kmax > jet.cutoff:
        raise ValidationError(
            f"need jet capacity {cutoff + 2 * kmax}, operator jet has {jet.cutoff}")
    m, d = jet.m, jet.d

    cut0 = cutoff + 2 * kmax
    comps = [SymTensor(m, 0, 0, d, np.eye(d, dtype=complex).reshape(1, 1, d, d))]
    comps += [SymTensor.zeros(m, 0, n, d) for n in range(1, cut0 + 1)]
    series = TaylorSeries(m, d, cut0, tuple(comps))
    out = [HmdsCoefficient(0, series, np.eye(d, dtype=complex))]

    prev = series
    for k in range(1, kmax + 1):
        cutk = cutoff + 2 * (kmax - k)
        rhs = _apply_jet(jet, prev, cutk)
        ak = dk_inverse(k, rhs)
        out.append(HmdsCoefficient(k, ak, ak.component(0).entries[0, 0].copy()))
        prev = ak
    return out


def b_lambda(k, lam, coeffs):
    """Shifted coefficients b_k(lambda) = sum_n C(k,n) (-lambda)^{k-n} a_n."""
    if not isinstance(k, int) or k < 0:
        raise ValidationError("order k must be a nonnegative integer")
    have = {c.order: c for c in coeffs}
    missing = [n for n in range(k + 1) if n not in have]
    if missing:
        raise ValidationError(f"b_lambda needs orders 0..{k}, missing {missing}")
    cut = min(have[n].series.cutoff for n in range(k + 1))
    acc = TaylorSeries.zero(coeffs[0].series.m, coeffs[0].series.d, cut)
    for n in range(k + 1):
        w = math.comb(k, n) * (-lam) ** (k - n)
        acc = acc + have[n].series.truncate(cut).scale(w)
    return acc


# ---------------------------------------------------------------------------
# trace expansion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HeatTraceExpansion:
    """Sum of coefficient * t^exponent terms, optionally with log terms.

    terms is a tuple of (exponent, coefficient) with strictly increasing
    half-integer exponents; log_terms, when present, pairs each exponent with
    the coefficient of t^exponent * log t.
    """

    m: int
    terms: tuple
    log_terms: tuple = ()

    def __post_init__(self):
        ex = [e for e, _ in self.terms]
        if any(b <= a for a, b in zip(ex, ex[1:])):
            raise ValidationError("exponents must be strictly increasing")

    def evaluate(self, t):
        if t <= 0:
            raise ValidationError("t must be positive")
        val = sum(c * t ** e for e, c in self.terms)
        val += sum(c * t ** e * math.log(t) for e, c in self.log_terms)
        return val

    def coefficient(self, exponent):
        for e, c in self.terms:
            if abs(e - exponent) < 1e-12:
                return c
        return 0.0


def trace_expansion(geom, coeffs):
    """Integrated diagonal: A_{2k} = (4 pi)^{-m/2} ((-1)^k/k!) vol tr a_k."""
    if geom.kind not in ("flat", "torus", "sphere"):
        raise ValidationError("trace expansion needs a homogeneous model geometry")
    m = geom.m
    pref = (4.0 * math.pi) ** (-m / 2.0) * geom.volume
    terms = []
    kmax = max(c.order for c in coeffs)
    by_order = {c.order: c for c in coeffs}
    for k in range(kmax + 1):
        c = by_order.get(k)
        if c is None:
            raise ValidationError(f"missing coefficient order {k}")
        tr = np.trace(c.diagonal)
        if abs(tr.imag) > 1e-10 * max(1.0, abs(tr.real)):
            raise ValidationError("coefficient trace is not real")
        A = pref * ((-1.0) ** k / math.factorial(k)) * tr.real
        terms.append(((2 * k - m) / 2.0, A))
        if k < kmax:
            terms.append(((2 * k + 1 - m) / 2.0, 0.0))
    return HeatTraceExpansion(m=m, terms=tuple(terms))
