"""Closed forms for the zero-potential chain and trigonometric product checks.

Everything here is elementary trigonometry; long products are accumulated in
the log domain with separate sign tracking because the factors span many
orders of magnitude by M around 30.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .summation import pairwise_sum

__all__ = [
    "FreeSpectrum",
    "free_spectrum",
    "appendix_g",
    "appendix_pro",
    "cos_product",
    "sine_product_residual",
    "free_product_identity",
]


@dataclass(frozen=True, eq=False)
class FreeSpectrum:
    """Spectrum of the N-site chain at zero potential."""

    N: int
    lam: np.ndarray
    k: np.ndarray

    def psi(self, l: int, j):
        """Eigenvector evaluator psi_l(j) = sin(k_l j)."""
        return np.sin(self.k[l - 1] * np.asarray(j, dtype=float))


def free_spectrum(N: int) -> FreeSpectrum:
    """lam_l = 4 sin^2(pi l / (2(N+1))), k_l = pi l/(N+1), l = 1..N."""
    if N < 1:
        raise ValueError("N must be >= 1")
    l = np.arange(1, N + 1, dtype=float)
    k = np.pi * l / (N + 1)
    lam = 4.0 * np.sin(k / 2.0) ** 2
    return FreeSpectrum(N, lam, k)


def appendix_g(M: int, n: int, alpha: float) -> float:
    """Product over m = 1..2M+1 of the shifted free-gap factors.

    g(alpha) = prod_m [4 sin^2((2m-1)pi/(2(2M+1)) - alpha) - 4 sin^2(n pi/(2M+1))],
    which collapses to 4 cos^2(alpha (2M+1)).  Each factor is evaluated as
    4 sin(A+B) sin(A-B), the stable form of the squared-sine difference.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    m = np.arange(1, 2 * M + 2, dtype=float)
    A = (2.0 * m - 1.0) * np.pi / (2.0 * (2 * M + 1)) - alpha
    B = n * np.pi / (2 * M + 1)
    factors = 4.0 * np.sin(A + B) * np.sin(A - B)
    return float(np.prod(factors))


def appendix_pro(M: int, n: int) -> float:
    """First-M-factor product: equals (-1)^n / cos(pi n / (2M+1)).

    Exactly the first n factors are negative for n = 1..M, which fixes the
    sign of the closed form.
    """
    if not 1 <= n <= M:
        raise ValueError("need 1 <= n <= M")
    m = np.arange(1, M + 1, dtype=float)
    A = (2.0 * m - 1.0) * np.pi / (2.0 * (2 * M + 1))
    B = n * np.pi / (2 * M + 1)
    factors = 4.0 * np.sin(A + B) * np.sin(A - B)
    return float(np.prod(factors))


def cos_product(M: int) -> float:
    """prod_{k=1}^{M} cos(pi k / (2M+1)) = 2^{-M}, accumulated in logs."""
    if M < 1:
        raise ValueError("M must be >= 1")
    k = np.arange(1, M + 1, dtype=float)
    c = np.cos(np.pi * k / (2 * M + 1))  # all positive: angles < pi/2
    return math.exp(float(pairwise_sum(np.log(c))))


def sine_product_residual(n: int, x: float) -> float:
    """|sin(n x) - 2^{n-1} prod_{k=0}^{n-1} sin(x + pi k / n)|."""
    if n < 1:
        raise ValueError("n must be >= 1")
    k = np.arange(n, dtype=float)
    prod = float(np.prod(np.sin(x + np.pi * k / n)))
    return abs(math.sin(n * x) - 2.0 ** (n - 1) * prod)


def free_product_identity(M: int) -> float:
    """Log-domain residual of the free-chain cross-gap product against
    2^M (-1)^(M(M+1)/2).

    The sign is tracked exactly: the factor (m, n) is negative iff m <= n,
    so the parity is that of M(M+1)/2.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    m = np.arange(1, M + 1, dtype=float)
    n = np.arange(1, M + 1, dtype=float)
    A = (2.0 * m - 1.0) * np.pi / (2.0 * (2 * M + 1))
    B = n * np.pi / (2 * M + 1)
    Ap = A[:, None] + B[None, :]
    Am = A[:, None] - B[None, :]
    logs = math.log(4.0) + np.log(np.abs(np.sin(Ap))) + np.log(np.abs(np.sin(Am)))
    log_abs = float(pairwise_sum(logs.ravel()))
    n_negative = int(np.count_nonzero(np.sin(Am) < 0))
    sign = -1.0 if n_negative % 2 else 1.0
    target_sign = -1.0 if (M * (M + 1) // 2) % 2 else 1.0
    return abs(log_abs - M * math.log(2.0)) + (0.0 if sign == target_sign else 1.0)
