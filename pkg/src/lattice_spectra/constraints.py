"""Constraints tying the even- and odd-sector spectra together.

The two eigenvalue families of the half-chain pair satisfy

    prod_{m,n} (mu_m - nu_n) = 2^M (-1)^{M(M+1)/2},

independently of the diagonal, plus a ladder of polynomial trace relations.
The product is always accumulated in the log domain with a separate sign
(the raw value reaches 2^M while individual gaps can underflow), and the
same relations run backwards: the two spectra determine the diagonal
uniquely via repeated division of characteristic polynomials.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InconsistentSpectraError
from .hamiltonian import HalfChainDiagonal, SpectrumPair
from .summation import pairwise_sum

__all__ = [
    "SignedLogProduct",
    "signed_log_product",
    "signed_log_product_mp",
    "product_identity_residual",
    "product_identity_residual_mp",
    "expected_sign",
    "trace_identity_residuals",
    "recover_potential",
    "recover_potential_mp",
    "coulomb_energy_discrete",
]

_TIE_TOL = 1e-14


@dataclass(frozen=True)
class SignedLogProduct:
    """A product stored as ln|value| plus its sign (or unit phase)."""

    log_abs: float
    sign: complex

    def reconstruct(self):
        return self.sign * math.exp(self.log_abs)


def _pair_arrays(s, nu=None):
    if nu is not None:
        return np.atleast_1d(np.asarray(s)), np.atleast_1d(np.asarray(nu))
    if isinstance(s, SpectrumPair):
        return s.mu, s.nu
    raise TypeError("expected a SpectrumPair or two eigenvalue sequences")


def signed_log_product(s, nu=None) -> SignedLogProduct:
    """Signed log of prod_{m,n}(mu_m - nu_n) over all cross pairs.

    Real input: sign is exactly +/-1 from the parity of negative gaps.
    Complex input: sign is the accumulated unit phase.  Gaps smaller than
    1e-14 of the largest gap are rejected as degenerate rather than
    silently accepted.
    """
    mu, nu = _pair_arrays(s, nu)
    diff = mu[:, None] - nu[None, :]
    absd = np.abs(diff)
    spread = float(absd.max())
    if spread == 0.0 or float(absd.min()) < _TIE_TOL * spread:
        raise DegenerateInputError(
            "coincident (or nearly coincident) values across the two families"
        )
    log_abs = float(pairwise_sum(np.log(absd).ravel()))
    if np.iscomplexobj(diff):
        phase = complex(np.exp(1j * pairwise_sum(np.angle(diff).ravel())))
        phase /= abs(phase)
        return SignedLogProduct(log_abs, phase)
    n_negative = int(np.count_nonzero(diff < 0))
    return SignedLogProduct(log_abs, -1.0 if n_negative % 2 else 1.0)


def expected_sign(M: int) -> float:
    """(-1)^(M(M+1)/2)."""
    return -1.0 if (M * (M + 1) // 2) % 2 else 1.0


def signed_log_product_mp(mu, nu, precision_bits: int = 160) -> SignedLogProduct:
    """Extended-precision signed log product for real mpf (or float) families.

    Double-precision spectra limit the log product to about eps/min_gap,
    which is the intrinsic accuracy floor once even/odd splittings are tiny
    (strong potentials localize states).  This variant accepts spectra from
    the extended-precision eigensolver and keeps every digit.
    """
    import mpmath

    with mpmath.workprec(precision_bits + 20):
        total = mpmath.mpf(0)
        n_negative = 0
        for m in mu:
            for n in nu:
                d = mpmath.mpf(m) - mpmath.mpf(n) if not isinstance(m, mpmath.mpf) else m - n
                if d == 0:
                    raise DegenerateInputError("coincident values across the two families")
                if d < 0:
                    n_negative += 1
                total += mpmath.log(abs(d))
        return SignedLogProduct(float(total), -1.0 if n_negative % 2 else 1.0)


def product_identity_residual_mp(mu, nu, precision_bits: int = 160) -> float:
    """Extended-precision version of product_identity_residual (real spectra)."""
    slp = signed_log_product_mp(mu, nu, precision_bits)
    M = len(mu)
    log_res = abs(slp.log_abs - M * math.log(2.0))
    return log_res + (0.0 if slp.sign == expected_sign(M) else 1.0)


def product_identity_residual(s, nu=None) -> float:
    """Deviation of the cross-gap product from 2^M (-1)^(M(M+1)/2).

    Returns |ln|prod| - M ln 2| plus a sign mismatch term: 0/1 for real
    spectra (sign is exact there), |phase - expected| for complex ones.
    A residual near zero certifies the identity.
    """
    mu, nu = _pair_arrays(s, nu)
    M = mu.size
    slp = signed_log_product(mu, nu)
    target = expected_sign(M)
    log_res = abs(slp.log_abs - M * math.log(2.0))
    if isinstance(slp.sign, complex):
        return log_res + abs(slp.sign - target)
    return log_res + (0.0 if slp.sign == target else 1.0)


def trace_identity_residuals(b, s: SpectrumPair):
    """Residuals of the five power-sum trace relations between mu and nu.

    With S_k = sum(mu^k) - sum(nu^k) and b_M, b_{M-1} the last diagonal
    entries, the relations are

        S_1 = -2
        S_2 = -4 b_M
        S_3 = -8 - 6 b_M^2                       (M >= 2)
        S_4 = -8 b_{M-1} - 24 b_M - 8 b_M^3      (M >= 2)
        S_5 = -32 - 10 b_{M-1}^2 - 20 b_{M-1} b_M
              - 50 b_M^2 - 10 b_M^4              (M >= 3)

    The k = 3..5 right-hand sides come from corner walks of length k that
    visit sites M-1 and M-2, so they are only valid once those sites exist;
    out-of-range entries are reported as None.

    Returns a list of 5 residuals (identity minus right-hand side), with
    None in positions whose relation does not apply at this M.
    """
    if not isinstance(b, HalfChainDiagonal):
        b = HalfChainDiagonal(b)
    if not b.is_real:
        raise ValueError("trace identities are evaluated for real diagonals")
    if b.M != s.M:
        raise ValueError("diagonal and spectra have mismatched lengths")
    mu, nu = s.mu, s.nu
    M = b.M
    bM = float(b.entries[-1])
    bM1 = float(b.entries[-2]) if M >= 2 else None

    def gap(k):
        return float(pairwise_sum(mu**k) - pairwise_sum(nu**k))

    out = [gap(1) + 2.0, gap(2) + 4.0 * bM, None, None, None]
    if M >= 2:
        out[2] = gap(3) + 8.0 + 6.0 * bM**2
        out[3] = gap(4) + 8.0 * bM1 + 24.0 * bM + 8.0 * bM**3
    if M >= 3:
        out[4] = gap(5) + 32.0 + 10.0 * bM1**2 + 20.0 * bM1 * bM + 50.0 * bM**2 + 10.0 * bM**4
    return out


def coulomb_energy_discrete(s, nu=None) -> float:
    """-sum_{m,n} ln|mu_m - nu_n|, the 2d Coulomb energy of the two families.

    Equals -M ln 2 whenever the product identity holds.  Shares its
    accumulation with signed_log_product, so the two agree exactly.
    """
    return -signed_log_product(s, nu).log_abs


# ---------------------------------------------------------------------------
# Inverse spectral recovery


def _poly_from_roots(roots):
    """Monic coefficients (descending powers) from roots, generic scalar type."""
    one = roots[0] * 0 + 1
    coeffs = [one]
    for r in roots:
        nxt = coeffs + [coeffs[-1] * 0]
        for i in range(len(coeffs)):
            nxt[i + 1] = nxt[i + 1] - r * coeffs[i]
        coeffs = nxt
    return coeffs


def _recover_from_polys(chi_ev, d_top, shift, scale, e2):
    """Walk the division ladder chi_ev -> D_{M-1} -> ... -> D_1 collecting betas.

    The ladder runs in the shifted/scaled variable x = (lambda - shift)/scale,
    where the matrix has off-diagonal -1/scale, so the three-term recursion is
    D_j = (x - beta_j) D_{j-1} - e2 D_{j-2} with e2 = 1/scale^2.  Each step
    divides the current monic polynomial by the next-lower one: the quotient
    is x - beta, and [(x - beta) D_{j-1} - D_j]/e2 is the next polynomial,
    re-monicized to absorb float drift.
    """
    entries_rev = []
    cur, nxt = chi_ev, d_top
    first = True
    while True:
        nxt_sub = nxt[1] if len(nxt) > 1 else cur[1] * 0
        beta = nxt_sub - cur[1]
        val = beta * scale + shift
        if first:
            val = val + 1  # quotient carries the even-sector boundary term b_M - 1
            first = False
        entries_rev.append(val)
        if len(nxt) == 1:
            break
        prod = [nxt[0]] + [nxt[i + 1] - beta * nxt[i] for i in range(len(nxt) - 1)]
        prod.append(-beta * nxt[-1])
        rem = [(prod[i] - cur[i]) / e2 for i in range(len(cur))]
        d_next = rem[2:]
        lead = d_next[0]
        d_next = [c / lead for c in d_next]
        cur, nxt = nxt, d_next
    return entries_rev[::-1]


def _recover_generic(mu, nu, lead_tol):
    M = len(mu)
    if M == 1:
        # even matrix is 1x1: mu_1 = b_1 - 1
        return [mu[0] + 1]
    # Map the merged spectrum onto [-2, 2], the natural interval of a unit
    # off-diagonal tridiagonal matrix; the monomial-coefficient ladder is
    # exponentially better conditioned there than on the raw interval.
    lo, hi = min(mu), max(nu)
    shift = (lo + hi) / 2
    scale = (hi - lo) / 4
    e2 = 1 / scale**2
    chi_ev = _poly_from_roots([(m - shift) / scale for m in mu])
    chi_od = _poly_from_roots([(n - shift) / scale for n in nu])
    # chi'_ev - chi'_od = (2/scale) D_{M-1} in the scaled variable
    d_top = [(e - o) * scale / 2 for e, o in zip(chi_ev[1:], chi_od[1:])]
    lead = d_top[0]
    if abs(lead - 1) > lead_tol:
        raise InconsistentSpectraError(
            f"(chi_ev - chi_od)/2 has leading coefficient {float(lead):.6g}, "
            "expected 1; the families are not the spectra of one half-chain pair"
        )
    d_top = [c / lead for c in d_top]
    return _recover_from_polys(chi_ev, d_top, shift, scale, e2)


def recover_potential(s: SpectrumPair, max_m: int = 16, lead_tol: float = 1e-6) -> HalfChainDiagonal:
    """Unique real diagonal b whose half-chain pair has spectra (mu, nu).

    Forms the monic characteristic polynomials from the two root families,
    takes half their difference (monic of degree M-1), and runs the
    three-term division ladder downward, reading one diagonal entry off
    each quotient.  The ladder runs in extended machine precision
    (long double) to keep its own roundoff below the conditioning floor of
    the rounded input spectra.  Coefficient growth is exponential in M, so
    this path is capped (use recover_potential_mp beyond it).
    """
    if not isinstance(s, SpectrumPair):
        raise TypeError("recover_potential expects a SpectrumPair")
    if s.M > max_m:
        raise ValueError(
            f"M={s.M} exceeds the double-precision cap {max_m}; "
            "use recover_potential_mp with extended precision"
        )
    entries = _recover_generic(
        [np.longdouble(x) for x in s.mu], [np.longdouble(x) for x in s.nu], lead_tol
    )
    return HalfChainDiagonal(np.asarray(entries, dtype=float))


def recover_potential_mp(mu, nu, precision_bits: int, max_m: int = 48, lead_tol: float = 1e-6):
    """Extended-precision inverse recovery; returns a list of mpmath.mpf.

    Inputs may be floats or mpf values; interlacing is validated the same
    way as in the standard path.
    """
    import mpmath

    if len(mu) != len(nu) or len(mu) < 1:
        raise ValueError("mu and nu must have equal length >= 1")
    if len(mu) > max_m:
        raise ValueError(f"M={len(mu)} exceeds the extended-precision cap {max_m}")
    with mpmath.workprec(precision_bits + 20):
        mu_mp = [mpmath.mpf(x) if not isinstance(x, mpmath.mpf) else x for x in mu]
        nu_mp = [mpmath.mpf(x) if not isinstance(x, mpmath.mpf) else x for x in nu]
        for i in range(len(mu_mp) - 1):
            if not (mu_mp[i] < nu_mp[i] < mu_mp[i + 1]):
                raise ValueError("spectra must strictly interlace")
        if not mu_mp[-1] < nu_mp[-1]:
            raise ValueError("spectra must strictly interlace")
        entries = _recover_generic(mu_mp, nu_mp, lead_tol)
        return [+e for e in entries]
