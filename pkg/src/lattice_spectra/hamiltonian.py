"""Finite-chain Hamiltonians of the discrete 1d Schrödinger operator.

A chain of N = 2M sites with a reflection-symmetric potential splits into two
half-chain problems: symmetric (even) and antisymmetric (odd) eigenstates are
eigenvectors of M x M symmetric tridiagonal matrices that differ only in the
last diagonal entry, b_M - 1 versus b_M + 1, where b_j = v_j + 2.  The two
matrices differ by twice the rank-one projector onto the last coordinate.

Real spectra are computed by Sturm-sequence bisection (ordered output with
per-eigenvalue brackets, then a Newton polish on the characteristic
polynomial); complex spectra by Aberth-Ehrlich iteration on the same
three-term recursion, never on expanded coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

__all__ = [
    "HalfChainDiagonal",
    "TridiagonalSymmetric",
    "SpectrumPair",
    "EvenChainPotential",
    "build_half_hamiltonians",
    "build_full_hamiltonian",
    "char_poly_eval",
    "char_poly_and_derivative",
    "sturm_count_below",
    "eigenvalues_real",
    "eigenvalues_real_mp",
    "eigenvalues_complex",
    "spectrum_pair",
    "spectrum_pair_mp",
    "gershgorin_interval",
]

_BIG = 1e120  # rescale threshold for recursion values


def _as_finite_1d(x, name):
    a = np.atleast_1d(np.asarray(x))
    if a.ndim != 1 or a.size < 1:
        raise ValueError(f"{name} must be a non-empty 1d sequence")
    if not np.iscomplexobj(a):
        a = a.astype(float)
    if not np.all(np.isfinite(a.real)) or not np.all(np.isfinite(np.imag(a))):
        raise ValueError(f"{name} must contain only finite entries")
    return a


@dataclass(frozen=True, eq=False)
class HalfChainDiagonal:
    """Diagonal b_1..b_M of the half-chain matrices (real or complex)."""

    entries: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "entries", _as_finite_1d(self.entries, "entries"))

    @classmethod
    def from_potential(cls, v):
        """Half-chain potential v_j -> diagonal b_j = v_j + 2."""
        return cls(np.asarray(v) + 2.0)

    @property
    def M(self) -> int:
        return self.entries.size

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.entries)


@dataclass(frozen=True, eq=False)
class TridiagonalSymmetric:
    """Symmetric tridiagonal matrix with constant off-diagonal -1.

    ``parity_tag`` records whether the last diagonal entry carries the
    boundary correction: 'even' means b_M - 1, 'odd' means b_M + 1,
    'plain' means no correction.
    """

    diagonal: np.ndarray
    parity_tag: str = "plain"

    def __post_init__(self):
        object.__setattr__(self, "diagonal", _as_finite_1d(self.diagonal, "diagonal"))
        if self.parity_tag not in ("even", "odd", "plain"):
            raise ValueError(f"unknown parity_tag {self.parity_tag!r}")

    @property
    def M(self) -> int:
        return self.diagonal.size

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.diagonal)

    def to_dense(self) -> np.ndarray:
        d = self.diagonal
        out = np.diag(d)
        if self.M > 1:
            idx = np.arange(self.M - 1)
            out[idx, idx + 1] = -1.0
            out[idx + 1, idx] = -1.0
        return out


@dataclass(frozen=True, eq=False)
class SpectrumPair:
    """Ascending even-sector (mu) and odd-sector (nu) eigenvalue families.

    For a real diagonal the families are simple and strictly interlace:
    mu_1 < nu_1 < mu_2 < ... < nu_M.  Both conditions are enforced here.
    """

    mu: np.ndarray
    nu: np.ndarray

    def __post_init__(self):
        mu = np.asarray(self.mu, dtype=float)
        nu = np.asarray(self.nu, dtype=float)
        if mu.ndim != 1 or nu.ndim != 1 or mu.size != nu.size or mu.size < 1:
            raise ValueError("mu and nu must be 1d sequences of equal length >= 1")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(nu))):
            raise ValueError("spectra must be finite")
        if np.any(np.diff(mu) <= 0) or np.any(np.diff(nu) <= 0):
            raise ValueError("mu and nu must each be strictly ascending")
        if np.any(mu >= nu) or np.any(nu[:-1] >= mu[1:]):
            raise ValueError("spectra must strictly interlace: mu_m < nu_m < mu_{m+1}")
        object.__setattr__(self, "mu", mu)
        object.__setattr__(self, "nu", nu)

    @property
    def M(self) -> int:
        return self.mu.size

    def merged(self) -> np.ndarray:
        """Full-chain spectrum: the two families riffled in ascending order."""
        out = np.empty(2 * self.M)
        out[0::2] = self.mu
        out[1::2] = self.nu
        return out


@dataclass(frozen=True, eq=False)
class EvenChainPotential:
    """Half potential v_1..v_M of a 2M-site chain extended by v_{N+1-j} = v_j."""

    half: np.ndarray

    def __post_init__(self):
        h = _as_finite_1d(self.half, "half")
        if np.iscomplexobj(h):
            raise ValueError("even-chain potential must be real")
        object.__setattr__(self, "half", h)

    @property
    def M(self) -> int:
        return self.half.size

    @property
    def N(self) -> int:
        return 2 * self.half.size

    def full(self) -> np.ndarray:
        return np.concatenate([self.half, self.half[::-1]])


def _coerce_b(b) -> HalfChainDiagonal:
    return b if isinstance(b, HalfChainDiagonal) else HalfChainDiagonal(b)


def build_half_hamiltonians(b):
    """Even/odd half-chain matrices for a diagonal b.

    Returns the pair (even, odd); they differ exactly by 2P in the last
    diagonal entry, P being the rank-one projector onto coordinate M.
    """
    b = _coerce_b(b)
    even = b.entries.copy()
    odd = b.entries.copy()
    even[-1] -= 1.0
    odd[-1] += 1.0
    return (
        TridiagonalSymmetric(even, parity_tag="even"),
        TridiagonalSymmetric(odd, parity_tag="odd"),
    )


def build_full_hamiltonian(V) -> TridiagonalSymmetric:
    """2M x 2M chain Hamiltonian with diagonal v_j + 2 and off-diagonal -1.

    Dirichlet conditions at the virtual sites 0 and 2M+1 are implicit in the
    finite matrix.
    """
    if not isinstance(V, EvenChainPotential):
        V = EvenChainPotential(V)
    return TridiagonalSymmetric(V.full() + 2.0, parity_tag="plain")


def char_poly_eval(T: TridiagonalSymmetric, lam):
    """det(lam*I - T) by the three-term recursion.

    D_j = (lam - d_j) D_{j-1} - D_{j-2} with unit off-diagonal products;
    exact for exact-arithmetic inputs (works with int, Fraction, mpmath).
    """
    d = T.diagonal
    p_prev = 1
    p = lam - d[0]
    for dj in d[1:]:
        p_prev, p = p, (lam - dj) * p - p_prev
    return p


def char_poly_and_derivative(T: TridiagonalSymmetric, lam):
    """(det(lam*I - T), d/dlam det(lam*I - T)) via the differentiated recursion."""
    d = T.diagonal
    p_prev, p = 1, lam - d[0]
    dp_prev, dp = 0, 1
    for dj in d[1:]:
        p_new = (lam - dj) * p - p_prev
        dp_new = p + (lam - dj) * dp - dp_prev
        p_prev, p = p, p_new
        dp_prev, dp = dp, dp_new
    return p, dp


def _newton_ratio_vec(d: np.ndarray, z: np.ndarray):
    """Elementwise p(z)/p'(z) for the characteristic polynomial, with rescaling.

    The recursion values can reach ~4^M; all four running values share any
    rescale factor so the Newton ratio is unaffected.
    """
    p_prev = np.zeros_like(z)
    p = np.ones_like(z)
    dp_prev = np.zeros_like(z)
    dp = np.zeros_like(z)
    for dj in d:
        p_new = (z - dj) * p - p_prev
        dp_new = p + (z - dj) * dp - dp_prev
        p_prev, p = p, p_new
        dp_prev, dp = dp, dp_new
        mags = np.abs(p)
        if np.any(mags > _BIG):
            s = np.where(mags > _BIG, 1.0 / mags, 1.0)
            p = p * s
            p_prev = p_prev * s
            dp = dp * s
            dp_prev = dp_prev * s
    return p, dp


def sturm_count_below(T: TridiagonalSymmetric, x):
    """Number of eigenvalues of T strictly below x (Sylvester inertia count).

    Uses the pivot recursion t_j = (d_j - x) - 1/t_{j-1} of the LDL^T
    factorization of T - x*I; the count of negative pivots equals the count
    of eigenvalues below x.
    """
    if not T.is_real:
        raise ValueError("Sturm counts require a real diagonal")
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    counts = _count_below_vec(T.diagonal, xs)
    return int(counts[0]) if np.isscalar(x) or np.asarray(x).ndim == 0 else counts


def _count_below_vec(d: np.ndarray, xs: np.ndarray) -> np.ndarray:
    t = d[0] - xs
    count = (t < 0).astype(np.int64)
    for dj in d[1:]:
        t = np.where(t == 0.0, 1e-300, t)
        t = (dj - xs) - 1.0 / t
        count += t < 0
    return count


def gershgorin_interval(T: TridiagonalSymmetric):
    """Enclosing interval [min(d) - 2, max(d) + 2] for a real diagonal."""
    d = T.diagonal
    return float(d.min() - 2.0), float(d.max() + 2.0)


def eigenvalues_real(T: TridiagonalSymmetric, tol: float = 1e-13) -> np.ndarray:
    """All M eigenvalues of a real symmetric tridiagonal T, strictly ascending.

    Each eigenvalue is bisected to a bracket of width <= max(tol, 4*eps)
    times the Gershgorin diameter, then polished with two Newton steps on
    the characteristic polynomial.  Deterministic for fixed input and tol.
    """
    if not T.is_real:
        raise ValueError("eigenvalues_real requires a real diagonal")
    d = T.diagonal
    M = d.size
    lo_b, hi_b = gershgorin_interval(T)
    diam = hi_b - lo_b
    width = max(tol, 4.0 * np.finfo(float).eps) * diam

    lo = np.full(M, lo_b)
    hi = np.full(M, hi_b)
    need = np.arange(1, M + 1)
    n_iter = int(np.ceil(np.log2(diam / width))) + 1
    for _ in range(n_iter):
        mid = 0.5 * (lo + hi)
        c = _count_below_vec(d, mid)
        go_left = c >= need
        hi = np.where(go_left, mid, hi)
        lo = np.where(go_left, lo, mid)

    lam = 0.5 * (lo + hi)
    # Newton polish; simple roots, so one step is already near quadratic.
    slack = hi - lo
    for _ in range(2):
        p, dp = _newton_ratio_vec(d, lam)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = p / dp
        cand = lam - step
        ok = np.isfinite(cand) & (cand >= lo - slack) & (cand <= hi + slack)
        lam = np.where(ok, cand, lam)

    lam = np.sort(lam)
    if M > 1 and np.any(np.diff(lam) <= 0):
        # Unreduced tridiagonal matrices have simple spectra; reaching this
        # indicates a solver defect, not an input condition.
        raise NumericalError("bisection produced non-distinct eigenvalues")
    return lam


def eigenvalues_real_mp(T: TridiagonalSymmetric, precision_bits: int):
    """Eigenvalues of a real T refined to `precision_bits` with mpmath.

    Double-precision bisection supplies the seeds; Newton on the exact
    recursion then roughly doubles the correct digits per step.  Returns a
    list of mpmath.mpf in ascending order.
    """
    import mpmath

    if precision_bits < 53:
        raise ValueError("precision_bits must be at least 53")
    seeds = eigenvalues_real(T)
    d = [float(v) for v in T.diagonal]
    n_steps = max(2, int(np.ceil(np.log2(precision_bits / 40.0))) + 1)
    out = []
    with mpmath.workprec(precision_bits + 20):
        d_mp = [mpmath.mpf(v) for v in d]
        for seed in seeds:
            x = mpmath.mpf(float(seed))
            for _ in range(n_steps):
                p, dp = _charpoly_pair_generic(d_mp, x)
                x = x - p / dp
            out.append(+x)
    return out


def _charpoly_pair_generic(diag, lam):
    p_prev, p = 1, lam - diag[0]
    dp_prev, dp = 0, 1
    for dj in diag[1:]:
        p_new = (lam - dj) * p - p_prev
        dp_new = p + (lam - dj) * dp - dp_prev
        p_prev, p = p, p_new
        dp_prev, dp = dp, dp_new
    return p, dp


def eigenvalues_complex(
    T: TridiagonalSymmetric,
    max_m: int = 24,
    tol: float = 1e-13,
    max_iter: int = 160,
) -> np.ndarray:
    """All M roots of the characteristic polynomial for a complex diagonal.

    Simultaneous Aberth-Ehrlich iteration on the recursion-evaluated
    polynomial; the expanded coefficients (which overflow quickly) are never
    formed.  Roots are returned sorted by (real, imag).

    Raises NumericalError with diagnostics if the iteration stalls.
    """
    d = np.asarray(T.diagonal, dtype=complex)
    M = d.size
    if M > max_m:
        raise ValueError(f"M={M} exceeds the configured cap {max_m} for complex spectra")
    if M == 1:
        return d.copy()

    center = d.mean()
    radius = float(np.max(np.abs(d - center))) + 2.0
    angles = 2.0 * np.pi * (np.arange(M) + 0.25) / M + 0.39
    z = center + 1.05 * radius * np.exp(1j * angles)

    scale = 1.0 + float(np.max(np.abs(d))) + radius
    last_step = np.inf
    for it in range(max_iter):
        # collision safeguard: nudge coincident iterates apart
        diffs = z[:, None] - z[None, :]
        np.fill_diagonal(diffs, np.inf)
        too_close = np.abs(diffs) < 1e-14 * scale
        if too_close.any():
            rows = np.unique(np.where(too_close)[0])
            z[rows] += (1e-9 + 1e-9j) * scale * (1 + rows)
            diffs = z[:, None] - z[None, :]
            np.fill_diagonal(diffs, np.inf)

        p, dp = _newton_ratio_vec(d, z)
        dp = np.where(dp == 0, 1e-300, dp)
        newton = p / dp
        repel = np.sum(1.0 / diffs, axis=1)
        denom = 1.0 - newton * repel
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        w = newton / denom
        z = z - w
        last_step = float(np.max(np.abs(w) / (1.0 + np.abs(z))))
        if last_step <= tol:
            break
    else:
        raise NumericalError(
            f"Aberth iteration did not converge after {max_iter} iterations "
            f"(last relative step {last_step:.3e}, M={M})"
        )

    order = np.lexsort((z.imag, z.real))
    return z[order]


def spectrum_pair(b, tol: float = 1e-13) -> SpectrumPair:
    """Even/odd sector spectra of the half-chain pair for a real diagonal b."""
    b = _coerce_b(b)
    if not b.is_real:
        raise ValueError("spectrum_pair requires a real diagonal; "
                         "use eigenvalues_complex for complex ones")
    even, odd = build_half_hamiltonians(b)
    return SpectrumPair(eigenvalues_real(even, tol), eigenvalues_real(odd, tol))


def spectrum_pair_mp(b, precision_bits: int):
    """Extended-precision spectra (mu, nu) as lists of mpmath.mpf."""
    b = _coerce_b(b)
    if not b.is_real:
        raise ValueError("spectrum_pair_mp requires a real diagonal")
    even, odd = build_half_hamiltonians(b)
    return (
        eigenvalues_real_mp(even, precision_bits),
        eigenvalues_real_mp(odd, precision_bits),
    )
