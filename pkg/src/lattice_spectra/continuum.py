"""Finite-size quantization and the continuum constraint on the scattering phase.

All spectral-parameter integrals are evaluated in the momentum variable
(lambda = 2 - 2 cos p): the square-root endpoint singularities of the phase
become analytic and the integrands extend to smooth 2pi-periodic functions,
where the uniform trapezoid rule converges spectrally.

Principal values are handled by subtraction: the integrands are extended to
[0, 2pi) via the reflection symmetry omega(2pi - q) = omega(q) and the
constant (or separable) part of the numerator at the pole is removed, which
is exact because the periodic principal-value resolvent integral

    PV int_0^{2pi} dq / (omega(q) - omega(k))

vanishes for interior k.  What remains is a smooth periodic integrand with
removable points that are filled from spectral derivatives of the phase.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, NumericalError
from .scattering import CompactPotential, JostPolynomial, PhaseTable, jost_polynomial, scattering_phase
from .summation import pairwise_sum

__all__ = [
    "QuadratureGrid",
    "FiniteMSpectrum",
    "ConvergenceRow",
    "ConvergenceStudy",
    "omega",
    "omega_prime",
    "solve_quantization",
    "quantization_asymptotic",
    "s_m_exact",
    "s_m_leading",
    "s_m_subleading",
    "subleading_integral",
    "pv_integral_I",
    "pv_resolvent_epsilon",
    "constraint_residual_phase",
    "constraint_residual_jost",
    "limit_s0",
    "limit_s1",
    "coulomb_energy_continuum",
    "convergence_study",
]

_FILL_TOL = 1e-7  # angular distance below which removable points are filled


@dataclass(frozen=True)
class QuadratureGrid:
    """Uniform periodic grid on [0, 2pi) with an even number of nodes."""

    n_points: int = 4096

    def __post_init__(self):
        if self.n_points < 64 or self.n_points % 2:
            raise ValueError("n_points must be an even integer >= 64")

    @property
    def nodes(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.n_points) / self.n_points

    @property
    def h(self) -> float:
        return 2.0 * np.pi / self.n_points


def _as_grid(grid) -> QuadratureGrid:
    if grid is None:
        return QuadratureGrid()
    if isinstance(grid, QuadratureGrid):
        return grid
    return QuadratureGrid(int(grid))


def omega(p):
    """Dispersion 2 - 2 cos p = 4 sin^2(p/2)."""
    return 2.0 - 2.0 * np.cos(p)


def omega_prime(p):
    return 2.0 * np.sin(p)


def _omega_gap(a, b):
    """omega(a) - omega(b) = 4 sin((a+b)/2) sin((a-b)/2), cancellation-free."""
    return 4.0 * np.sin(0.5 * (a + b)) * np.sin(0.5 * (a - b))


def _log_abs_gap(a, b):
    return math.log(4.0) + np.log(np.abs(np.sin(0.5 * (a + b)))) + np.log(
        np.abs(np.sin(0.5 * (a - b)))
    )


def _near(q, q0, tol=_FILL_TOL):
    d = np.abs(np.mod(q - q0 + np.pi, 2.0 * np.pi) - np.pi)
    return d < tol


@dataclass(frozen=True, eq=False)
class FiniteMSpectrum:
    """Momenta and eigenvalues of the 2M-site even extension of a potential.

    p_l solves (2M+1) p + 2 eta(p) = (2M+1) k_l with k_l = pi l / (2M+1);
    lam_l = omega(p_l).
    """

    M: int
    p: np.ndarray
    lam: np.ndarray
    k: np.ndarray

    def __post_init__(self):
        if np.any(np.diff(self.p) <= 0) or np.any(np.diff(self.lam) <= 0):
            raise ValueError("momenta and eigenvalues must be strictly increasing")


def _support_length(phase: PhaseTable) -> int | None:
    if phase.jost is None:
        return None
    return (phase.jost.degree + 1) // 2


def solve_quantization(M: int, phase: PhaseTable, tol: float = 1e-12,
                       max_iter: int = 80) -> FiniteMSpectrum:
    """Solve (2M+1) p_l + 2 eta(p_l) = pi l for l = 1..2M.

    Safeguarded Newton: each root keeps a sign-change bracket inside (0, pi)
    and falls back to bisection whenever a Newton step leaves it.  The
    residual of the quantization relation is driven below `tol` (absolute).
    """
    J = _support_length(phase)
    if J is not None and M <= J:
        raise ValueError(f"need M > J = {J} so the even extension is free in the middle")
    two_m1 = 2 * M + 1
    probe = np.linspace(0.0, np.pi, 2049)
    slope_min = two_m1 + 2.0 * np.min(phase.eta_prime_at(probe))
    if slope_min <= 0.0:
        raise NumericalError(
            "quantization map is not monotone at this M; increase M "
            f"(min slope {slope_min:.3e})"
        )

    l = np.arange(1, 2 * M + 1, dtype=float)
    k = np.pi * l / two_m1
    target = np.pi * l
    eta_max = float(np.max(np.abs(phase.eta)))
    c = (2.0 * eta_max + 0.5) / two_m1
    lo = np.maximum(k - c, 0.0)
    hi = np.minimum(k + c, np.pi)

    p = np.clip(k - 2.0 * phase.eta_at(k) / two_m1, lo, hi)
    settled = 0
    for _ in range(max_iter):
        f = two_m1 * p + 2.0 * phase.eta_at(p) - target
        hi = np.where(f > 0, np.minimum(hi, p), hi)
        lo = np.where(f <= 0, np.maximum(lo, p), lo)
        if np.max(np.abs(f)) <= tol:
            settled += 1
            if settled >= 3:
                break
        step = f / (two_m1 + 2.0 * phase.eta_prime_at(p))
        cand = p - step
        outside = (cand <= lo) | (cand >= hi)
        p = np.where(outside, 0.5 * (lo + hi), cand)
    else:
        raise NumericalError("quantization solve did not converge")

    return FiniteMSpectrum(M=M, p=p, lam=omega(p), k=k)


def quantization_asymptotic(M: int, phase: PhaseTable, l):
    """Two-term large-M expansion p_l = k_l - 2 eta/(2M+1) + 4 eta eta'/(2M+1)^2."""
    two_m1 = 2 * M + 1
    k = np.pi * np.asarray(l, dtype=float) / two_m1
    e = phase.eta_at(k)
    ep = phase.eta_prime_at(k)
    return k - 2.0 * e / two_m1 + 4.0 * e * ep / two_m1**2


def s_m_exact(spec: FiniteMSpectrum):
    """S_m = sum_n [ln|omega gaps of p| - ln|omega gaps of k|] and their total.

    The total is the finite-M log form of the cross-gap product identity and
    vanishes identically; the computed value measures accumulated roundoff.
    Returns (S, total) with a fixed pairwise reduction order.
    """
    p_odd, p_even = spec.p[0::2], spec.p[1::2]
    k_odd, k_even = spec.k[0::2], spec.k[1::2]
    gaps = np.abs(_omega_gap(p_odd[None, :], p_even[:, None]))
    if gaps.min() < 1e-14 * gaps.max():
        raise DegenerateInputError("coincident eigenvalues across parity sectors")
    term_p = _log_abs_gap(p_odd[None, :], p_even[:, None])
    term_k = _log_abs_gap(k_odd[None, :], k_even[:, None])
    diff = term_p - term_k
    S = np.array([pairwise_sum(diff[m]) for m in range(spec.M)])
    return S, float(pairwise_sum(S))


def _eta_bundle(phase: PhaseTable, q):
    """(eta, eta', eta'') at q, plus omega', omega'' for kernel limits."""
    return phase.eta_at(q), phase.eta_prime_at(q), phase.eta_second_at(q)


def _kernel_R(phase: PhaseTable, k: float, q: np.ndarray) -> np.ndarray:
    """R_k(q) = [G(k) - G(q)] / (omega(q) - omega(k)) with G = omega' eta.

    Removable at q = k and its mirror 2pi - k; both limits equal
    -G'(k)/omega'(k).
    """
    eta_q = phase.eta_at(q)
    Gq = omega_prime(q) * eta_q
    ek, epk, _ = _eta_bundle(phase, k)
    Gk = omega_prime(k) * ek
    denom = _omega_gap(q, k)
    mask = _near(q, k) | _near(q, 2.0 * np.pi - k)
    safe = np.where(mask, 1.0, denom)
    vals = (Gk - Gq) / safe
    if np.any(mask):
        g_prime_k = 2.0 * math.cos(k) * ek + 2.0 * math.sin(k) * epk
        vals = np.where(mask, -g_prime_k / omega_prime(k), vals)
    return vals


def s_m_leading(spec: FiniteMSpectrum, phase: PhaseTable, m: int) -> float:
    """S_m^(0): the leading 1/(2M+1) part of S_m as a discrete sum over k_odd."""
    if not 1 <= m <= spec.M:
        raise ValueError("m must be in 1..M")
    k2m = float(spec.k[2 * m - 1])
    vals = _kernel_R(phase, k2m, spec.k[0::2])
    return 2.0 / (2 * spec.M + 1) * float(pairwise_sum(vals))


def _grid_tables(phase: PhaseTable, grid: QuadratureGrid):
    """Per-(phase, grid) cache of eta, eta' and D = (omega' eta^2)' on the nodes."""
    cache = getattr(phase, "_continuum_cache", None)
    if cache is None:
        cache = {}
        setattr(phase, "_continuum_cache", cache)
    tables = cache.get(grid.n_points)
    if tables is None:
        q = grid.nodes
        eta_q = phase.eta_at(q)
        etap_q = phase.eta_prime_at(q)
        D_q = 2.0 * np.cos(q) * eta_q**2 + 4.0 * np.sin(q) * eta_q * etap_q
        tables = (eta_q, etap_q, D_q)
        cache[grid.n_points] = tables
    return tables


def subleading_integral(phase: PhaseTable, k: float, grid=None) -> float:
    """J(k) = (1/2pi) int_0^{2pi} { [D(q) - D(k)]/(omega(q) - omega(k)) - R_k(q)^2 } dq

    with D = (omega' eta^2)'.  S_m^(1) = J(k_{2m}) / (2M+1).  Both parts are
    removable at q = k and its mirror; fills use spectral derivatives.
    """
    grid = _as_grid(grid)
    q = grid.nodes
    eta_q, etap_q, D_q = _grid_tables(phase, grid)

    ek, epk, eppk = _eta_bundle(phase, k)
    sk, ck = math.sin(k), math.cos(k)
    D_k = 2.0 * ck * ek**2 + 4.0 * sk * ek * epk
    # D'(k) = omega''' eta^2 + 4 omega'' eta eta' + 2 omega' (eta'^2 + eta eta'')
    D_prime_k = -2.0 * sk * ek**2 + 8.0 * ck * ek * epk + 4.0 * sk * (epk**2 + ek * eppk)
    g_prime_k = 2.0 * ck * ek + 2.0 * sk * epk
    wk = omega_prime(k)

    denom = _omega_gap(q, k)
    mask = _near(q, k) | _near(q, 2.0 * np.pi - k)
    safe = np.where(mask, 1.0, denom)
    part1 = (D_q - D_k) / safe
    Gq = omega_prime(q) * eta_q
    Gk = wk * ek
    R = (Gk - Gq) / safe
    if np.any(mask):
        part1 = np.where(mask, D_prime_k / wk, part1)
        R = np.where(mask, -g_prime_k / wk, R)
    integrand = part1 - R**2
    return float(np.sum(integrand)) / grid.n_points


def s_m_subleading(spec: FiniteMSpectrum, phase: PhaseTable, m: int, grid=None) -> float:
    """S_m^(1), the 1/(2M+1)^2 correction, as a momentum integral."""
    if not 1 <= m <= spec.M:
        raise ValueError("m must be in 1..M")
    return subleading_integral(phase, float(spec.k[2 * m - 1]), grid) / (2 * spec.M + 1)


def pv_integral_I(phase: PhaseTable, Lam: float, grid=None) -> float:
    """I(Lam) = PV int_0^4 delta(lam)/(lam - Lam) dlam for Lam in [0, 4].

    Interior points: momentum form (1/2) int_0^{2pi} [G(q) - G(k)] /
    (omega(q) - omega(k)) dq with G = omega' eta; the subtracted resolvent
    integrates to zero, so no principal value is left.  The endpoints are
    ordinary integrals (the phase vanishes there): the integrands collapse
    to eta(q) cot(q/2) and -eta(q) tan(q/2).
    """
    grid = _as_grid(grid)
    if not 0.0 <= Lam <= 4.0:
        raise ValueError("Lam must lie in [0, 4]")
    q = grid.nodes
    eta_q = phase.eta_at(q)
    if Lam == 0.0:
        vals = np.empty_like(q)
        vals[1:] = eta_q[1:] / np.tan(0.5 * q[1:])
        vals[0] = 2.0 * float(phase.eta_prime_at(0.0))
        return 0.5 * grid.h * float(np.sum(vals))
    if Lam == 4.0:
        vals = -eta_q * np.tan(0.5 * q)
        vals[grid.n_points // 2] = 2.0 * float(phase.eta_prime_at(np.pi))
        return 0.5 * grid.h * float(np.sum(vals))
    k = math.acos(1.0 - Lam / 2.0)
    vals = -_kernel_R(phase, k, q)  # [G(q) - G(k)] / (omega(q) - omega(k))
    return 0.5 * grid.h * float(np.sum(vals))


def pv_resolvent_epsilon(k: float, nu: int = 1, n_points: int = 65536,
                         eps: tuple = (0.04, 0.02, 0.01, 0.005)) -> float:
    """PV int_0^{2pi} dq / (omega(q) - omega(k))^nu by contour averaging.

    Averages the two analytic continuations q -> q +/- i eps (an even
    function of eps), then removes the eps^2, eps^4, eps^6 terms by
    Richardson extrapolation over a halving eps sequence.  Vanishing of
    this integral for nu = 1, 2 is what turns the subtracted quadratures
    above into plain trapezoid sums.
    """
    if nu not in (1, 2):
        raise ValueError("nu must be 1 or 2")
    if not 0.0 < k < np.pi:
        raise ValueError("momentum must be interior to (0, pi)")
    q = 2.0 * np.pi * np.arange(n_points) / n_points
    wk = omega(k)
    h = 2.0 * np.pi / n_points

    def value(e: float) -> float:
        up = 2.0 - 2.0 * np.cos(q + 1j * e) - wk
        dn = 2.0 - 2.0 * np.cos(q - 1j * e) - wk
        avg = 0.5 * (up ** (-nu) + dn ** (-nu))
        return h * float(np.sum(avg.real))

    vals = [value(e) for e in eps]
    while len(vals) > 1:
        fac = 4.0 ** (len(eps) - len(vals) + 1)
        vals = [(fac * vals[i + 1] - vals[i]) / (fac - 1.0) for i in range(len(vals) - 1)]
    return vals[0]


def _inner_eta_prime(phase: PhaseTable, grid: QuadratureGrid) -> np.ndarray:
    """inner(k_i) = (1/2) int_0^{2pi} [eta'(q) - eta'(k_i)]/(omega(q) - omega(k_i)) dq

    on the grid nodes k_i (this is PV int_0^4 delta'(lam2)/(lam2 - lam1) in
    momentum form).  Both the diagonal q = k and the mirror q = 2pi - k are
    grid nodes, where the integrand is filled with its limit
    eta''(k)/omega'(k) (at the edges: +/- eta'''/2).
    """
    n = grid.n_points
    q = grid.nodes
    etap = phase.eta_prime_at(q)
    etapp = phase.eta_second_at(q)
    w = omega(q)
    wp = omega_prime(q)

    fill = np.empty(n)
    interior = slice(1, n)
    fill[interior] = etapp[interior] / wp[interior]
    fill[0] = float(phase.eta_third_at(0.0)) / 2.0
    fill[n // 2] = -float(phase.eta_third_at(np.pi)) / 2.0

    inner = np.empty(n)
    chunk = max(1, (1 << 22) // n)
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        rows = slice(start, stop)
        denom = w[None, :] - w[rows, None]
        num = etap[None, :] - etap[rows, None]
        idx = np.arange(start, stop)
        denom[np.arange(stop - start), idx] = 1.0
        mirror = (-idx) % n
        denom[np.arange(stop - start), mirror] = 1.0
        vals = num / denom
        vals[np.arange(stop - start), idx] = fill[idx]
        vals[np.arange(stop - start), mirror] = fill[idx]
        inner[rows] = 0.5 * grid.h * vals.sum(axis=1)
    return inner


def _second_term(phase: PhaseTable, grid: QuadratureGrid) -> float:
    """(1/pi) int_0^4 delta(lam1) PV int_0^4 delta'(lam2)/(lam2 - lam1) dlam2 dlam1."""
    n = grid.n_points
    q = grid.nodes
    inner = _inner_eta_prime(phase, grid)
    weight = phase.eta_at(q) * omega_prime(q)
    # reflection symmetry: rows i and n - i contribute equally; 0 and pi vanish
    total = float(np.sum(weight * inner))
    return grid.h * total / (2.0 * np.pi)


def _first_term_cot(phase: PhaseTable, grid: QuadratureGrid) -> float:
    """int_0^4 delta(lam) (lam-2)/(lam (lam-4)) dlam = int_0^pi eta(q) cot q dq."""
    n = grid.n_points
    q = grid.nodes
    vals = np.empty(n)
    good = np.ones(n, dtype=bool)
    good[0] = good[n // 2] = False
    vals[good] = phase.eta_at(q[good]) / np.tan(q[good])
    vals[0] = float(phase.eta_prime_at(0.0))
    vals[n // 2] = float(phase.eta_prime_at(np.pi))
    return 0.5 * grid.h * float(np.sum(vals))


def constraint_residual_phase(phase: PhaseTable, grid=None) -> float:
    """Residual of the scattering-data constraint in phase form.

    Value of int_0^4 delta (lam-2)/(lam(lam-4)) dlam
    + (1/pi) int int delta(lam1) PV delta'(lam2)/(lam2-lam1); zero for the
    phase of any potential without bound or semi-bound states.  The first
    term is cross-checked internally against its partial-fraction form
    [I(0) + I(4)]/2.
    """
    grid = _as_grid(grid)
    if phase.jost is not None and not phase.jost.report.passed:
        raise ValueError("conditions failed: constraint requires a bound-state-free phase")
    t1 = _first_term_cot(phase, grid)
    t1_pf = 0.5 * (pv_integral_I(phase, 0.0, grid) + pv_integral_I(phase, 4.0, grid))
    if abs(t1 - t1_pf) > 1e-9 * max(1.0, abs(t1)):
        raise NumericalError(
            f"partial-fraction cross-check failed: {t1!r} vs {t1_pf!r}"
        )
    return t1 + _second_term(phase, grid)


def constraint_residual_jost(F: JostPolynomial, grid=None) -> float:
    """Residual of the equivalent constraint in Jost-function form:

    ln F(1) + ln F(-1) + (1/2pi i) oint ln[F(1/z)] (d ln F(z)/dz) dz
    over the unit circle, counter-clockwise.  The log branch is the
    continuous one fixed by ln F at z = 0 being 0, i.e. sigma - i eta on
    the boundary.
    """
    grid = _as_grid(grid)
    if not F.report.passed:
        raise ValueError("conditions failed: ln F must be analytic on the closed disk")
    if F.roots.size and float(np.min(np.abs(np.abs(F.roots) - 1.0))) < 1e-6:
        raise ValueError("a zero of F lies within 1e-6 of the contour")
    phase = scattering_phase(F, grid.n_points // 2)
    theta = grid.nodes
    z = np.exp(1j * theta)
    log_rev = phase.sigma_at(theta) + 1j * phase.eta_at(theta)  # ln F(1/z)
    contour = log_rev * F.derivative(z) * z / F(z)
    total = complex(np.sum(contour)) / grid.n_points
    if abs(total.imag) > 1e-7 * max(1.0, abs(total.real)):
        raise NumericalError(f"contour integral has a spurious imaginary part {total.imag:.3e}")
    boundary = math.log(float(np.sum(F.coeffs))) + math.log(
        float(np.sum(F.coeffs * (-1.0) ** np.arange(F.coeffs.size)))
    )
    return boundary + total.real


def limit_s0(phase: PhaseTable, grid=None) -> float:
    """Limit of sum_m S_m^(0): [I(0) + I(4)] / (2 pi)."""
    grid = _as_grid(grid)
    return (pv_integral_I(phase, 0.0, grid) + pv_integral_I(phase, 4.0, grid)) / (2.0 * np.pi)


def limit_s1(phase: PhaseTable, grid=None) -> float:
    """Limit of sum_m S_m^(1): (1/pi^2) int int delta PV delta'/(lam2 - lam1)."""
    grid = _as_grid(grid)
    return _second_term(phase, grid) / np.pi


def coulomb_energy_continuum(phase: PhaseTable, grid=None) -> float:
    """Residual of the continuum electrostatic identity.

    Evaluates the Coulomb energy of the charge density rho = 2 delta'/pi on
    (0, 4) together with two point charges -1/2 at the band edges, minus its
    asserted value -ln(2)/2.  The log kernel is diagonal in Fourier modes
    (ln|2 sin(x/2)| has cosine coefficients -1/n), so with
    eta = sum_n s_n sin(n p) the three terms reduce exactly to

        self-energy     sum_n n s_n^2
        edge terms      -2 sum_{n even} s_n
        constant        -ln(2)/2,

    no quadrature grid is needed.  The vanishing total charge
    (2/pi)(eta(pi) - eta(0)) is verified first.
    """
    charge = (2.0 / np.pi) * (float(phase.eta[-1]) - float(phase.eta[0]))
    if abs(charge) > 1e-8:
        raise ValueError(f"total charge {charge:.3e} of 2 delta'/pi does not vanish")
    s = phase.sine_coefficients
    n = np.arange(s.size, dtype=float)
    self_energy = float(pairwise_sum(n * s * s))
    edges = -2.0 * float(pairwise_sum(s[2::2]))
    value = self_energy + edges - math.log(2.0) / 2.0
    return value - (-math.log(2.0) / 2.0)


@dataclass(frozen=True)
class ConvergenceRow:
    M: int
    sum_S: float
    sum_S0: float
    sum_S1: float
    limit_s0: float
    limit_s1: float
    residual_EQ: float


@dataclass(frozen=True)
class ConvergenceStudy:
    rows: tuple
    s0_decay_exponent: float
    s1_decay_exponent: float

    def to_csv(self, path, schema: str = "convergence/1") -> None:
        lines = [f"# schema: {schema}", "M,sum_S,sum_S0,sum_S1,limit_s0,limit_s1,residual_EQ"]
        for r in self.rows:
            lines.append(",".join([str(r.M)] + [
                repr(float(x)) for x in
                (r.sum_S, r.sum_S0, r.sum_S1, r.limit_s0, r.limit_s1, r.residual_EQ)
            ]))
        with open(path, "w", newline="") as fh:
            fh.write("\n".join(lines) + "\n")


def _fit_decay_exponent(m_values, deviations) -> float:
    m = np.asarray(m_values, dtype=float)
    d = np.abs(np.asarray(deviations, dtype=float))
    if np.any(d < 1e-15):
        return float("nan")
    slope = np.polyfit(np.log(m), np.log(d), 1)[0]
    return float(-slope)


def convergence_study(V, M_list, grid=None, phase_grid: int = 4096,
                      workers: int = 1) -> ConvergenceStudy:
    """Per-M comparison of the exact S_m sums with their large-M asymptotics.

    For each M: the quantized spectrum, sum S_m (exact; should vanish),
    sum S_m^(0), sum S_m^(1), the two limits, and the constraint residual.
    Fitted decay exponents of |sum S^(i) - limit_i| (expected near 1) are
    attached.  Rows are computed independently and placed by index, so the
    result does not depend on the worker count.
    """
    V = V if isinstance(V, CompactPotential) else CompactPotential(V)
    M_list = [int(m) for m in M_list]
    if sorted(M_list) != M_list or len(set(M_list)) != len(M_list):
        raise ValueError("M_list must be strictly ascending")
    if M_list and M_list[0] <= V.J:
        raise ValueError(f"all M must exceed the support length J = {V.J}")
    grid = _as_grid(grid)
    F = jost_polynomial(V)
    phase = scattering_phase(F, phase_grid)
    lim0 = limit_s0(phase, grid)
    lim1 = limit_s1(phase, grid)
    res_eq = constraint_residual_phase(phase, grid)

    def row(M: int) -> ConvergenceRow:
        spec = solve_quantization(M, phase)
        _, total = s_m_exact(spec)
        k_even = spec.k[1::2]
        k_odd = spec.k[0::2]
        Gk = omega_prime(k_even) * phase.eta_at(k_even)
        Gq = omega_prime(k_odd) * phase.eta_at(k_odd)
        R = (Gk[:, None] - Gq[None, :]) / _omega_gap(k_odd[None, :], k_even[:, None])
        s0 = 2.0 / (2 * M + 1) * float(pairwise_sum(R.sum(axis=1)))
        s1 = float(pairwise_sum(
            np.array([subleading_integral(phase, float(kk), grid) for kk in k_even])
        )) / (2 * M + 1)
        return ConvergenceRow(M, total, s0, s1, lim0, lim1, res_eq)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(row, M_list))
    else:
        rows = [row(M) for M in M_list]

    e0 = _fit_decay_exponent(M_list, [r.sum_S0 - lim0 for r in rows])
    e1 = _fit_decay_exponent(M_list, [r.sum_S1 - lim1 for r in rows])
    return ConvergenceStudy(tuple(rows), e0, e1)
