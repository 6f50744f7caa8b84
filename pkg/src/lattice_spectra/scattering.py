"""Half-line scattering for the discrete Schrödinger operator.

For a compactly supported potential the out-wave solution is a pure plane
wave beyond the support, so the Jost function in the variable z = e^{ip} is
a polynomial of degree 2J - 1.  Its coefficients are assembled by running
the regular-solution recursion in exact Laurent-polynomial arithmetic over z
(no sampling/interpolation), which keeps them exact at every potential
magnitude and bit-reproducible.

Convention: F = exp(sigma - i eta), so the scattering phase is
eta = -arg F.  The opposite sign convention is common elsewhere; everything
downstream (quantization, constraint integrals) assumes this one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import GridTooCoarseError, NumericalError

__all__ = [
    "CompactPotential",
    "ConditionReport",
    "JostPolynomial",
    "PhaseTable",
    "regular_solution",
    "jost_solution",
    "wronskian",
    "jost_polynomial",
    "check_conditions",
    "scattering_phase",
]


@dataclass(frozen=True, eq=False)
class CompactPotential:
    """Real half-line potential v_1..v_J with v_J != 0 (J is the true support).

    Trailing zeros are trimmed so the stored length always equals the
    support; the zero potential is represented by an empty array.
    """

    v: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.v, dtype=float).ravel()
        if a.size and not np.all(np.isfinite(a)):
            raise ValueError("potential entries must be finite")
        nz = np.nonzero(a)[0]
        a = a[: nz[-1] + 1] if nz.size else a[:0]
        object.__setattr__(self, "v", a)

    @classmethod
    def zero(cls) -> "CompactPotential":
        return cls(np.empty(0))

    @property
    def J(self) -> int:
        return self.v.size

    def value(self, j: int) -> float:
        """v_j with v_j = 0 beyond the support (1-based site index)."""
        return float(self.v[j - 1]) if 1 <= j <= self.J else 0.0


def _coerce_potential(V) -> CompactPotential:
    if V is None:
        return CompactPotential.zero()
    return V if isinstance(V, CompactPotential) else CompactPotential(V)


def regular_solution(V, lam, jmax: int) -> np.ndarray:
    """Solution phi(0..jmax) with phi(0) = 0, phi(1) = 1.

    phi(j+1) = (v_j + 2 - lam) phi(j) - phi(j-1); works for complex lam.
    phi(j, lam) is a polynomial of degree j - 1 in lam.
    """
    V = _coerce_potential(V)
    if jmax < 1:
        raise ValueError("jmax must be >= 1")
    dtype = complex if isinstance(lam, complex) or np.iscomplexobj(lam) else float
    phi = np.zeros(jmax + 1, dtype=dtype)
    phi[1] = 1.0
    for j in range(1, jmax):
        phi[j + 1] = (V.value(j) + 2.0 - lam) * phi[j] - phi[j - 1]
    return phi


def jost_solution(V, p: float, jmax: int) -> np.ndarray:
    """Out-wave solution f(0..jmax) with f(j) = e^{ipj} exactly for j >= J.

    Extended downward to j = 0 by f(j-1) = (v_j + 2 - lam) f(j) - f(j+1).
    The momentum must be interior: at p = 0 or pi the out-wave degenerates.
    """
    V = _coerce_potential(V)
    if not 0.0 < p < np.pi:
        raise ValueError("momentum must satisfy 0 < p < pi")
    if jmax < V.J + 1:
        raise ValueError("jmax must be at least J + 1")
    lam = 2.0 - 2.0 * math.cos(p)
    f = np.zeros(jmax + 1, dtype=complex)
    j_free = np.arange(V.J, jmax + 1)
    f[V.J:] = np.exp(1j * p * j_free)
    for j in range(V.J, 0, -1):
        f[j - 1] = (V.value(j) + 2.0 - lam) * f[j] - f[j + 1]
    return f


def wronskian(psi1, psi2, j: int):
    """psi1(j) psi2(j+1) - psi1(j+1) psi2(j); j-independent for two solutions."""
    psi1 = np.asarray(psi1)
    psi2 = np.asarray(psi2)
    if not (0 <= j and j + 1 < psi1.size and j + 1 < psi2.size):
        raise IndexError("need both sequences defined at j and j+1")
    return psi1[j] * psi2[j + 1] - psi1[j + 1] * psi2[j]


@dataclass(frozen=True)
class ConditionReport:
    """Checks that the scattering problem has no bound or semi-bound states.

    no_interior_zeros: all polynomial roots satisfy |a_n| > 1 + margin
    (zero-free closed unit disk -> purely continuous spectrum).
    nonzero_band_edges: |F(+/-1)| > margin (no zero at the band edges).
    """

    min_root_abs: float
    value_at_plus1: float
    value_at_minus1: float
    margin: float
    no_interior_zeros: bool
    nonzero_band_edges: bool

    @property
    def passed(self) -> bool:
        return self.no_interior_zeros and self.nonzero_band_edges

    def to_dict(self) -> dict:
        return {
            "min_root_abs": self.min_root_abs,
            "value_at_plus1": self.value_at_plus1,
            "value_at_minus1": self.value_at_minus1,
            "margin": self.margin,
            "no_interior_zeros": self.no_interior_zeros,
            "nonzero_band_edges": self.nonzero_band_edges,
            "passed": self.passed,
        }


@dataclass(frozen=True, eq=False)
class JostPolynomial:
    """F(z) = 1 + sum_{j>=1} c_j z^j with its roots and condition report.

    coeffs are ascending (c_0 = 1); the degree is 2J - 1 exactly because the
    top coefficient equals v_J.  Real coefficients give the conjugation
    symmetry F(e^{-ip}) = conj(F(e^{ip})).
    """

    coeffs: np.ndarray
    roots: np.ndarray
    report: ConditionReport

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        z = np.asarray(z)
        acc = np.zeros_like(z, dtype=complex) if np.iscomplexobj(z) else np.zeros_like(z, dtype=float)
        for c in self.coeffs[::-1]:
            acc = acc * z + c
        return acc

    def derivative(self, z):
        z = np.asarray(z)
        acc = np.zeros_like(z, dtype=complex) if np.iscomplexobj(z) else np.zeros_like(z, dtype=float)
        n = self.degree
        for i, c in enumerate(self.coeffs[:0:-1]):
            acc = acc * z + (n - i) * c
        return acc


def _laurent_regular_coeffs(V: CompactPotential):
    """phi(j) as Laurent polynomials in z at lam = 2 - z - 1/z.

    phi(j) spans exponents [-(j-1), j-1]; the recursion becomes
    phi(j+1) = (v_j + z + 1/z) phi(j) - phi(j-1).  Returns a list indexed by
    j of coefficient arrays aligned so entry t is the coefficient of
    z^(t - (j-1)).
    """
    J = V.J
    polys = [None, np.array([1.0])]  # phi(1) = 1 spans [0, 0]
    for j in range(1, J):
        cur = polys[j]          # spans [-(j-1), j-1], length 2j-1
        up = np.zeros(2 * j + 1)
        up[2:] += cur           # z * phi(j)
        up[:-2] += cur          # z^{-1} * phi(j)
        up[1:-1] += V.value(j) * cur
        if j >= 2:
            up[2:-2] -= polys[j - 1]
        polys.append(up)
    return polys


def _refine_roots(coeffs_asc: np.ndarray, roots: np.ndarray, rel_tol: float = 1e-13,
                  max_iter: int = 80) -> np.ndarray:
    """Aberth refinement pass on companion-matrix seeds."""
    if roots.size == 0:
        return roots
    if roots.size == 1:
        # linear: exact root
        return np.array([-coeffs_asc[0] / coeffs_asc[1]], dtype=complex)
    z = roots.astype(complex)
    desc = coeffs_asc[::-1]
    dcoef = (coeffs_asc[1:] * np.arange(1, coeffs_asc.size))[::-1]
    scale = 1.0 + np.max(np.abs(z))
    for _ in range(max_iter):
        p = np.zeros_like(z)
        for c in desc:
            p = p * z + c
        dp = np.zeros_like(z)
        for c in dcoef:
            dp = dp * z + c
        dp = np.where(dp == 0, 1e-300, dp)
        newton = p / dp
        diffs = z[:, None] - z[None, :]
        np.fill_diagonal(diffs, np.inf)
        repel = np.sum(1.0 / diffs, axis=1)
        denom = 1.0 - newton * repel
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        w = newton / denom
        z = z - w
        if np.max(np.abs(w)) <= rel_tol * scale:
            break
    else:
        raise NumericalError("root refinement for the Jost polynomial did not converge")
    return z


def jost_polynomial(V) -> JostPolynomial:
    """Exact coefficients of F(z) = 1 + sum_j v_j z^j phi(j, 2 - z - 1/z).

    z^j phi(j) spans exponents [1, 2j-1], so the result is a polynomial of
    degree 2J - 1 with constant term exactly 1 and top coefficient v_J.
    Roots come from companion-matrix eigenvalues refined by an Aberth pass;
    the condition report is filled on construction (failing conditions are
    reported, not raised).
    """
    V = _coerce_potential(V)
    J = V.J
    if J == 0:
        coeffs = np.array([1.0])
        roots = np.empty(0, dtype=complex)
        return JostPolynomial(coeffs, roots, check_conditions(coeffs, roots))
    polys = _laurent_regular_coeffs(V)
    coeffs = np.zeros(2 * J)
    coeffs[0] = 1.0
    for j in range(1, J + 1):
        # z^j phi(j): exponent t - (j-1) + j = t + 1 for entry t
        coeffs[1: 2 * j] += V.value(j) * polys[j]
    seeds = np.roots(coeffs[::-1])
    roots = _refine_roots(coeffs, seeds)
    order = np.lexsort((roots.imag, roots.real))
    roots = roots[order]
    return JostPolynomial(coeffs, roots, check_conditions(coeffs, roots))


def check_conditions(F, roots=None, margin: float = 1e-8) -> ConditionReport:
    """Report whether F is zero-free in the closed unit disk and at z = +/-1."""
    if isinstance(F, JostPolynomial):
        coeffs, roots = F.coeffs, F.roots
    else:
        coeffs = np.asarray(F, dtype=float)
        if roots is None:
            raise ValueError("roots are required when passing raw coefficients")
    at_p1 = float(np.sum(coeffs))
    at_m1 = float(np.sum(coeffs * (-1.0) ** np.arange(coeffs.size)))
    min_abs = float(np.min(np.abs(roots))) if roots.size else math.inf
    return ConditionReport(
        min_root_abs=min_abs,
        value_at_plus1=at_p1,
        value_at_minus1=at_m1,
        margin=margin,
        no_interior_zeros=bool(min_abs > 1.0 + margin),
        nonzero_band_edges=bool(abs(at_p1) > margin and abs(at_m1) > margin),
    )


class PhaseTable:
    """Scattering phase eta(p), log-amplitude sigma(p) on a uniform grid over [0, pi].

    eta is unwrapped continuously from eta(0) = 0; with the no-bound-state
    conditions satisfied, eta(pi) returns to 0.  The table also carries a
    sine-series representation of eta (trigonometric interpolation of the
    odd 2pi-periodic extension), which supplies spectrally accurate values
    and derivatives anywhere on the circle.
    """

    def __init__(self, p: np.ndarray, eta: np.ndarray, sigma: np.ndarray,
                 jost: JostPolynomial | None = None):
        p = np.asarray(p, dtype=float)
        eta = np.asarray(eta, dtype=float)
        sigma = np.asarray(sigma, dtype=float)
        if not (p.size == eta.size == sigma.size) or p.size < 17:
            raise ValueError("need matching p/eta/sigma samples (>= 17 points)")
        self.p = p
        self.eta = eta
        self.sigma = sigma
        self.jost = jost

    @classmethod
    def from_eta_samples(cls, eta: np.ndarray) -> "PhaseTable":
        """Synthetic table from eta samples on the uniform [0, pi] grid."""
        eta = np.asarray(eta, dtype=float)
        p = np.linspace(0.0, np.pi, eta.size)
        return cls(p, eta, np.zeros_like(eta), jost=None)

    @property
    def G(self) -> int:
        return self.p.size - 1

    @property
    def amplitude(self) -> np.ndarray:
        return np.exp(self.sigma)

    @cached_property
    def sine_coefficients(self) -> np.ndarray:
        """s_n with eta(p) = sum_n s_n sin(n p), truncated at the noise floor.

        These are the Taylor coefficients of -ln F at the origin (negated),
        so they decay like |a|^{-n} with a the root of F closest to the
        unit circle.
        """
        G = self.G
        x = np.zeros(2 * G)
        x[: G + 1] = self.eta
        x[G + 1:] = -self.eta[G - 1: 0: -1]
        x[0] = 0.0
        F = np.fft.rfft(x)
        s = -F.imag / G  # n = 0..G; s[0] unused, s[G] multiplies sin(G p) = 0 on nodes
        s[0] = 0.0
        mags = np.abs(s)
        top = mags.max()
        if top == 0.0:
            return s[:2]
        # Truncate at the FFT noise floor: an analytic phase has exponentially
        # decaying coefficients, and keeping the noise tail would both slow
        # evaluation and wreck high derivatives (noise scales as n^3 there).
        keep = np.nonzero(mags > 1e-14 * top)[0]
        n_max = max(8, int(keep[-1]) + 4)
        return s[: min(n_max, s.size - 1) + 1]

    def _series(self, q, weight_power: int, func) -> np.ndarray:
        s = self.sine_coefficients
        n = np.arange(s.size, dtype=float)
        w = s * n**weight_power
        q = np.asarray(q, dtype=float)
        return func(np.multiply.outer(q, n)) @ w

    def eta_at(self, q):
        """eta at arbitrary momenta (odd, 2pi-periodic extension).

        With a Jost polynomial attached the value is computed exactly from
        arg F and re-branched against the table; synthetic tables fall back
        to the sine series.
        """
        q = np.asarray(q, dtype=float)
        scalar = q.ndim == 0
        qr = np.atleast_1d(q)
        # reduce to [0, pi] using oddness and periodicity
        qm = np.mod(qr, 2.0 * np.pi)
        flip = qm > np.pi
        qf = np.where(flip, 2.0 * np.pi - qm, qm)
        if self.jost is None:
            vals = self._series(qf, 0, np.sin)
        else:
            w = self.jost(np.exp(1j * qf))
            raw = -np.angle(w)
            approx = np.interp(qf, self.p, self.eta)
            vals = raw + 2.0 * np.pi * np.round((approx - raw) / (2.0 * np.pi))
        vals = np.where(flip, -vals, vals)
        return float(vals[0]) if scalar else vals

    def eta_prime_at(self, q):
        return self._series(q, 1, np.cos)

    def eta_second_at(self, q):
        return -self._series(q, 2, np.sin)

    def eta_third_at(self, q):
        return -self._series(q, 3, np.cos)

    def sigma_at(self, q):
        q = np.asarray(q, dtype=float)
        if self.jost is None:
            return np.zeros_like(q)
        return np.log(np.abs(self.jost(np.exp(1j * q))))

    def delta_at(self, lam):
        """Phase as a function of the spectral parameter, lam = 2 - 2 cos p."""
        lam = np.asarray(lam, dtype=float)
        if np.any(lam < 0.0) or np.any(lam > 4.0):
            raise ValueError("spectral parameter must lie in [0, 4]")
        return self.eta_at(np.arccos(np.clip(1.0 - lam / 2.0, -1.0, 1.0)))

    def to_csv(self, path, schema: str = "phase-table/1") -> None:
        lam = 2.0 - 2.0 * np.cos(self.p)
        lines = [f"# schema: {schema}", "p,eta,sigma,lambda,delta"]
        for i in range(self.p.size):
            lines.append(",".join(repr(float(x)) for x in
                                  (self.p[i], self.eta[i], self.sigma[i], lam[i], self.eta[i])))
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def scattering_phase(F: JostPolynomial, grid_size: int = 4096) -> PhaseTable:
    """Unwrapped phase table of F on p_k = pi k / G, k = 0..G.

    eta = -arg F continued from eta(0) = 0 (F(1) > 0 once the disk is
    zero-free).  Jumps above pi/2 between adjacent samples abort with a
    grid-too-coarse error rather than guessing the branch.
    """
    if not isinstance(F, JostPolynomial):
        raise TypeError("scattering_phase expects a JostPolynomial")
    if not F.report.passed:
        raise ValueError("conditions failed: phase is defined only for "
                         "potentials without bound or semi-bound states")
    if grid_size < 16:
        raise ValueError("grid_size must be >= 16")
    p = np.pi * np.arange(grid_size + 1) / grid_size
    w = F(np.exp(1j * p))
    theta = np.angle(w)
    jumps = np.diff(theta)
    jumps = (jumps + np.pi) % (2.0 * np.pi) - np.pi
    if np.max(np.abs(jumps), initial=0.0) > np.pi / 2.0:
        raise GridTooCoarseError(
            "phase unwrap jump exceeds pi/2; increase grid_size"
        )
    theta_cont = np.concatenate([[theta[0]], theta[0] + np.cumsum(jumps)])
    eta = -theta_cont
    sigma = np.log(np.abs(w))
    return PhaseTable(p, eta, sigma, jost=F)
