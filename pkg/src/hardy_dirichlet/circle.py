"""Hardy space H^q on the unit circle, for polynomials.

The norm of a polynomial is the boundary integral
``(1/2pi) int |f(e^{it})|^q dt``, computed with the trapezoidal rule on a
uniform grid (the integrand is periodic). Values on the grid come from one
FFT of the zero-padded coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arith import MultiplicativeSpec
from .errors import ConfigurationError, DomainError
from .estimates import NormEstimate

__all__ = [
    "CirclePolynomial",
    "QuadratureConfig",
    "circle_norm",
    "blaschke_multiply",
    "default_blaschke_degree",
    "point_lemma_lhs",
    "euler_factor_polynomial",
    "default_m_max",
    "euler_factor_norm",
    "euler_factor_estimate",
]

MIN_GRID = 2**12
TAIL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class CirclePolynomial:
    """f(z) = sum_k c_k z^k, k = 0..d."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size == 0:
            raise DomainError("a circle polynomial needs at least one coefficient")
        if not np.all(np.isfinite(c)):
            raise DomainError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def degree(self) -> int:
        return self.coeffs.size - 1

    def __call__(self, z):
        return np.polyval(self.coeffs[::-1], z)

    def boundary_values(self, M: int) -> np.ndarray:
        """f(e^{2 pi i k / M}) for k = 0..M-1 (aliasing folded when deg >= M)."""
        c = self.coeffs
        if c.size > M:
            folded = np.zeros(M, dtype=np.complex128)
            np.add.at(folded, np.arange(c.size) % M, c)
            c = folded
        return np.fft.ifft(c, n=M) * M


@dataclass(frozen=True)
class QuadratureConfig:
    grid_points: int = MIN_GRID
    refinement: int = 1

    def __post_init__(self):
        if self.grid_points < 1 or self.refinement < 0:
            raise DomainError("grid_points must be positive and refinement non-negative")


def _next_pow2(n: int) -> int:
    return 1 << max(0, (int(n) - 1).bit_length())


def circle_norm(f: CirclePolynomial, q: float, cfg: QuadratureConfig | None = None) -> NormEstimate:
    """||f||_{H^q(T)} by the trapezoidal rule with grid doubling.

    The reported error is the change between the last two grids.
    """
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    cfg = cfg or QuadratureConfig()
    M = _next_pow2(max(cfg.grid_points, 4 * (f.degree + 1)))
    values = []
    for _ in range(cfg.refinement + 1):
        mean = float(np.mean(np.abs(f.boundary_values(M)) ** q))
        values.append(mean ** (1.0 / q))
        M *= 2
    err = abs(values[-1] - values[-2]) if len(values) > 1 else 0.0
    return NormEstimate(values[-1], err, "quadrature", float(q), M // 2)


def default_blaschke_degree(f: CirclePolynomial, w: complex) -> int:
    r = abs(w)
    if r == 0:
        return f.degree + 1
    return min(f.degree + math.ceil(math.log(1e15) / math.log(1.0 / r)), 10**4)


def blaschke_multiply(f: CirclePolynomial, w: complex, out_degree: int | None = None) -> CirclePolynomial:
    """Taylor coefficients of b f through ``out_degree``, b(z) = (z - w)/(1 - conj(w) z).

    b has coefficients -w, then conj(w)^(k-1) (1 - |w|^2) for k >= 1.
    """
    w = complex(w)
    if abs(w) >= 1:
        raise DomainError(f"Blaschke parameter must satisfy |w| < 1, got {w}")
    if out_degree is None:
        out_degree = default_blaschke_degree(f, w)
    if out_degree < f.degree + 1:
        raise DomainError("out_degree must be at least deg(f) + 1")
    k = np.arange(out_degree)
    b = np.empty(out_degree + 1, dtype=np.complex128)
    b[0] = -w
    b[1:] = np.conj(w) ** k * (1 - abs(w) ** 2)
    return CirclePolynomial(np.convolve(f.coeffs, b)[: out_degree + 1])


def point_lemma_lhs(f: CirclePolynomial, q: float) -> float:
    """(|f(0)|^2 + (q/2) |f'(0)|^2)^(1/2)."""
    if not 0 < q <= 2:
        raise DomainError(f"q must lie in (0, 2], got {q}")
    c0 = f.coeffs[0]
    c1 = f.coeffs[1] if f.degree >= 1 else 0.0
    return math.sqrt(abs(c0) ** 2 + 0.5 * q * abs(c1) ** 2)


def default_m_max(spec: MultiplicativeSpec, p: int, tol: float = TAIL_TOL) -> int:
    """Smallest m whose dropped tail C p^{-(1/2-theta)(m+1)} / (1 - p^{-(1/2-theta)}) is below tol."""
    if spec.growth is None:
        if spec.rule == "table" and spec.default == "zero":
            return max(spec.max_table_exponent.get(int(p), 0), 1)
        raise ConfigurationError(f"spec {spec.name!r} has no growth constants; give m_max explicitly")
    C, theta = spec.growth
    rate = 0.5 - theta
    if rate <= 0:
        raise ConfigurationError(f"theta = {theta} >= 1/2: the Euler factor does not converge")
    r = float(p) ** -rate
    # C r^(m+1) / (1 - r) < tol
    m = math.ceil(math.log(tol * (1 - r) / C) / math.log(r)) - 1
    m = max(m, 1)
    while C * r ** (m + 1) / (1 - r) >= tol:
        m += 1
    return m


def euler_factor_polynomial(
    spec: MultiplicativeSpec, p: int, m_max: int, sigma_shift: float = 0.5
) -> CirclePolynomial:
    """sum_{m <= m_max} a(p^m) p^{-m sigma_shift} z^m."""
    m = np.arange(m_max + 1)
    a = np.array([spec.value(p, int(k)) for k in m], dtype=np.complex128)
    return CirclePolynomial(a * float(p) ** (-sigma_shift * m))


def euler_factor_estimate(
    spec: MultiplicativeSpec,
    p: int,
    q: float,
    m_max: int | None = None,
    cfg: QuadratureConfig | None = None,
) -> NormEstimate:
    if m_max is None:
        m_max = default_m_max(spec, p)
    return circle_norm(euler_factor_polynomial(spec, p, m_max), q, cfg)


def euler_factor_norm(
    spec: MultiplicativeSpec,
    p: int,
    q: float,
    m_max: int | None = None,
    cfg: QuadratureConfig | None = None,
) -> float:
    """||sum_m a(p^m) p^{-m/2} z^m||_{H^q(T)} for the truncated factor."""
    return euler_factor_estimate(spec, p, q, m_max, cfg).value
