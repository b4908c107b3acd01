"""Estimators of ||F||_q for Dirichlet polynomials.

``||F||_q^q`` is the mean of ``|BF|^q`` over the polytorus ``T^pi(N)``.
Exact routes exist for q = 2 (Parseval) and even q (Parseval applied to a
convolution power); any q > 0 can be sampled by Monte Carlo or by
randomly shifted lattice rules. Sampling is split into batches, each with
its own RNG stream derived from the seed, so the thread count never
changes a result.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import _kernels
from .arith import FactorTable, MultiplicativeSpec, build_factor_table
from .bohr import MAX_PAIR_PRODUCTS, DirichletPolynomial, convolution_power
from .circle import QuadratureConfig, default_m_max, euler_factor_estimate, euler_factor_polynomial
from .errors import ConfigurationError, DomainError
from .estimates import NormEstimate
from .lattice import cbc_generating_vector, lattice_points, lattice_size

__all__ = [
    "NormEstimate",
    "SamplerConfig",
    "norm_exact_two",
    "norm_exact_even",
    "torus_moments",
    "norm_mc_torus",
    "norm_time_average",
    "norm_euler_product",
    "euler_product_moments",
    "sum_abs2",
    "even_moment_sum",
    "moment_root",
    "weighted_sum_abs2",
]

_EVAL_ROWS = 1 << 21  # target theta entries per evaluation chunk


@dataclass(frozen=True)
class SamplerConfig:
    samples: int = 100_000
    seed: int = 0
    batches: int = 16
    mode: str = "mc"
    threads: int | None = None

    def __post_init__(self):
        if self.mode not in ("mc", "rqmc"):
            raise DomainError(f"mode must be 'mc' or 'rqmc', got {self.mode!r}")
        if self.samples < 1:
            raise DomainError("samples must be positive")
        if self.batches < 8:
            raise DomainError("at least 8 batches are needed for error bars")
        if self.samples < self.batches:
            raise DomainError("samples must be at least the number of batches")
        if not 0 <= self.seed < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")


# --------------------------------------------------------------------------
# exact norms


def sum_abs2(F: DirichletPolynomial) -> int | float:
    """sum |a_n|^2, exact (Python int) for integer polynomials, else correctly rounded."""
    if F.is_exact:
        return sum(a * a for a in (int(x) for x in F.coeffs.tolist()))
    return weighted_sum_abs2(F, 1.0)


def weighted_sum_abs2(F: DirichletPolynomial, w: np.ndarray | float) -> float:
    """fsum of w_n |a_n|^2 with the squares split exactly into two doubles."""
    c = F.complex_coeffs()
    parts = [*_square_parts(c.real), *_square_parts(c.imag)]
    return math.fsum(np.concatenate([p * w for p in parts]))


def _square_parts(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Dekker: x*x == hi + lo exactly, so fsum over the parts is correctly rounded
    hi = x * x
    c = 134217729.0 * x
    xh = c - (c - x)
    xl = x - xh
    lo = ((xh * xh - hi) + 2.0 * xh * xl) + xl * xl
    return hi, lo


def norm_exact_two(F: DirichletPolynomial) -> NormEstimate:
    """||F||_2 = (sum |a_n|^2)^(1/2)."""
    return NormEstimate(moment_root(sum_abs2(F), 2), 0.0, "exact2", 2.0, len(F))


def even_moment_sum(
    F: DirichletPolynomial, k: int, max_pairs: int = MAX_PAIR_PRODUCTS
) -> tuple[int | float, int]:
    """(sum |a_{k,N}(n)|^2, number of terms of F^k); exact for integer F."""
    if k == 1:
        return sum_abs2(F), len(F)
    P = convolution_power(F, k, max_pairs=max_pairs)
    return sum_abs2(P), len(P)


def moment_root(s: int | float, m: int) -> float:
    """s^(1/m), taking care with integers beyond the float range."""
    if isinstance(s, int) and s >= 2**1000:
        return math.exp(math.log(s) / m)
    if m == 2:
        return math.sqrt(s)
    return float(s) ** (1.0 / m)


def norm_exact_even(
    F: DirichletPolynomial, k: int, max_pairs: int = MAX_PAIR_PRODUCTS
) -> NormEstimate:
    """||F||_{2k} = ||F^k||_2^(1/k), with F^k from the Dirichlet convolution power."""
    s, terms = even_moment_sum(F, k, max_pairs)
    return NormEstimate(moment_root(s, 2 * k), 0.0, "exact_even", 2.0 * k, terms)


# --------------------------------------------------------------------------
# torus sampling


def _lift_evaluator(F: DirichletPolynomial, table: FactorTable) -> tuple[int, Callable[[np.ndarray], np.ndarray]]:
    """Dimension pi(N) and a function mapping angle rows to |BF|."""
    N = F.N
    if N:
        table.check(N)
    dim = table.prime_count(N)
    coeffs = F.complex_coeffs()
    ns = F.ns
    rec_cost = N + 8 * dim
    sparse_cost = int(np.sum(table.omega[ns])) + 8 * len(F) if len(F) else 0
    if sparse_cost < rec_cost:
        ptr = np.zeros(len(F) + 1, dtype=np.int64)
        cols, exps = [], []
        for t, n in enumerate(ns.tolist()):
            for p, e in table.factorize(n):
                cols.append(int(table.prime_index[p]))
                exps.append(float(e))
            ptr[t + 1] = len(cols)
        cols_a = np.array(cols, dtype=np.int64)
        exps_a = np.array(exps, dtype=np.float64)

        def evaluate(theta):
            out = np.empty(theta.shape[0])
            _kernels.lift_abs_sparse(theta, ptr, cols_a, exps_a, coeffs, out)
            return out
    else:
        pidx = np.ascontiguousarray(table.prime_index[table.spf[: N + 1]])
        cof = np.ascontiguousarray(table.cofactor[: N + 1])

        def evaluate(theta):
            out = np.empty(theta.shape[0])
            _kernels.lift_abs_recurrence(theta, pidx, cof, ns, coeffs, out)
            return out

    return dim, evaluate


def _chunk_rows(dim: int) -> int:
    return int(min(8192, max(64, _EVAL_ROWS // max(dim, 1))))


def _run_sampler(
    evaluate: Callable[[np.ndarray], np.ndarray],
    dim: int,
    qs: Sequence[float],
    cfg: SamplerConfig,
    weights: Sequence[float],
) -> tuple[np.ndarray, np.ndarray, int]:
    """Per-batch sums of |f|^q; returns (sums[batch, q], counts[batch], total)."""
    qs = np.asarray(qs, dtype=np.float64)
    rows = _chunk_rows(dim)
    nb = cfg.batches

    if cfg.mode == "mc":
        sizes = [len(a) for a in np.array_split(np.arange(cfg.samples), nb)]

        def run(b):
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(b,))))
            acc = np.zeros(qs.size)
            left = sizes[b]
            while left:
                m = min(rows, left)
                v = evaluate(rng.random((m, dim)))
                acc += [np.sum(v**q) for q in qs]
                left -= m
            return acc

    else:
        n = lattice_size(math.ceil(cfg.samples / nb))
        z = cbc_generating_vector(n, tuple(float(w) for w in weights)) if dim else np.zeros(0, np.int64)
        sizes = [n] * nb

        def run(b):
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(cfg.seed, spawn_key=(b,))))
            shift = rng.random(dim)
            acc = np.zeros(qs.size)
            for start in range(0, n, rows):
                v = evaluate(lattice_points(n, z, shift, start, min(n, start + rows)))
                acc += [np.sum(v**q) for q in qs]
            return acc

    threads = cfg.threads or 1
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sums = list(pool.map(run, range(nb)))
    else:
        sums = [run(b) for b in range(nb)]
    counts = np.asarray(sizes, dtype=np.float64)
    return np.asarray(sums), counts, int(counts.sum())


def _estimates_from_sums(
    sums: np.ndarray, counts: np.ndarray, total: int, qs: Sequence[float], cfg: SamplerConfig
) -> list[NormEstimate]:
    out = []
    nb = counts.size
    for i, q in enumerate(qs):
        mean = math.fsum(sums[:, i].tolist()) / total
        batch_means = sums[:, i] / counts
        se_mean = float(np.std(batch_means, ddof=1)) / math.sqrt(nb)
        value = mean ** (1.0 / q) if mean > 0 else 0.0
        se = se_mean * value ** (1.0 - q) / q if value > 0 else 0.0
        out.append(NormEstimate(value, se, cfg.mode, float(q), total, cfg.seed))
    return out


def _prime_weights(table: FactorTable, dim: int) -> list[float]:
    return (1.0 / table.primes[:dim]).tolist()


def torus_moments(
    F: DirichletPolynomial, qs: Sequence[float], cfg: SamplerConfig, table: FactorTable
) -> list[NormEstimate]:
    """Sampled ||F||_q for several q from one shared set of torus points."""
    for q in qs:
        if not q > 0:
            raise DomainError(f"q must be positive, got {q}")
    dim, evaluate = _lift_evaluator(F, table)
    sums, counts, total = _run_sampler(evaluate, dim, qs, cfg, _prime_weights(table, dim))
    return _estimates_from_sums(sums, counts, total, qs, cfg)


def norm_mc_torus(F: DirichletPolynomial, q: float, cfg: SamplerConfig, table: FactorTable) -> NormEstimate:
    """||F||_q as the q-th root of the sampled mean of |BF|^q (mode mc or rqmc)."""
    return torus_moments(F, [q], cfg, table)[0]


# --------------------------------------------------------------------------
# vertical-line time average

_GL_ORDER = 8


def norm_time_average(
    F: DirichletPolynomial, q: float, T: float, panels: int | None = None
) -> NormEstimate:
    """(1/T) int_0^T |F(it)|^q dt by composite Gauss-Legendre, q-th root taken.

    The error column is the change between the averages over [0, T/2] and
    [0, T]; it is a heuristic, not a confidence bound.
    """
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    if not T > 0:
        raise DomainError(f"T must be positive, got {T}")
    if len(F) <= 1:
        value = float(np.abs(F.complex_coeffs()).sum())
        return NormEstimate(value, 0.0, "time_avg", float(q), 0, note="heuristic")
    if panels is None:
        width = 2 * math.pi / (8 * math.log(F.N))
        panels = math.ceil(T / width)
    panels += panels % 2
    h = T / panels
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    logs = np.log(F.ns.astype(np.float64))
    c = F.complex_coeffs()
    half = panels // 2
    first = _kernels.vertical_line_integral(0.0, h, half, x, w, logs, c, float(q))
    second = _kernels.vertical_line_integral(half * h, h, half, x, w, logs, c, float(q))
    full = ((first + second) / T) ** (1.0 / q)
    early = (first / (half * h)) ** (1.0 / q)
    return NormEstimate(full, abs(full - early), "time_avg", float(q), panels * _GL_ORDER, note="heuristic")


# --------------------------------------------------------------------------
# Euler products


def _euler_primes(N: int, table: FactorTable | None) -> list[int]:
    if table is None or table.bound < max(N, 1):
        table = build_factor_table(max(N, 1))
    return table.primes_upto(N).tolist()


def _m_max_for(policy, spec: MultiplicativeSpec, p: int) -> int:
    if policy is None:
        return default_m_max(spec, p)
    if callable(policy):
        return int(policy(p))
    return int(policy)


def _check_condition_a(spec: MultiplicativeSpec) -> None:
    if spec.growth is None:
        raise ConfigurationError(f"spec {spec.name!r} has no growth constants (C, theta)")
    if spec.growth[1] >= 0.25:
        raise ConfigurationError(
            f"theta = {spec.growth[1]} >= 1/4: the prime-power tail bound does not hold"
        )


def norm_euler_product(
    spec: MultiplicativeSpec,
    N: int,
    q: float,
    m_max_policy=None,
    cfg: QuadratureConfig | None = None,
    table: FactorTable | None = None,
) -> NormEstimate:
    """||F_N||_q as the product over p <= N of the Euler factor norms on the circle."""
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    _check_condition_a(spec)
    logs, rel_err, grid = [], 0.0, 0
    for p in _euler_primes(N, table):
        est = euler_factor_estimate(spec, p, q, _m_max_for(m_max_policy, spec, p), cfg)
        if est.value == 0:
            return NormEstimate(0.0, 0.0, "euler_product", float(q), est.samples_or_grid)
        logs.append(math.log(est.value))
        rel_err += est.std_error / est.value
        grid = max(grid, est.samples_or_grid)
    value = math.exp(math.fsum(logs))
    return NormEstimate(value, value * rel_err, "euler_product", float(q), grid)


def euler_product_moments(
    spec: MultiplicativeSpec,
    N: int,
    qs: Sequence[float],
    cfg: SamplerConfig,
    table: FactorTable | None = None,
    m_max_policy=None,
) -> list[NormEstimate]:
    """Sampled ||F_N||_q with the lift prod_p f_p(z_p) of the truncated factors."""
    primes = _euler_primes(N, table)
    polys = [euler_factor_polynomial(spec, p, _m_max_for(m_max_policy, spec, p)).coeffs for p in primes]
    width = max((c.size for c in polys), default=1)
    C = np.zeros((len(primes), width), dtype=np.complex128)
    for i, c in enumerate(polys):
        C[i, : c.size] = c

    def evaluate(theta):
        if not primes:
            return np.ones(theta.shape[0])
        z = np.exp(2j * np.pi * theta)
        acc = np.broadcast_to(C[:, -1], z.shape).copy()
        for m in range(width - 2, -1, -1):
            acc = acc * z + C[:, m]
        with np.errstate(divide="ignore"):
            return np.exp(np.sum(np.log(np.abs(acc)), axis=1))

    weights = [1.0 / p for p in primes]
    sums, counts, total = _run_sampler(evaluate, len(primes), qs, cfg, weights)
    return _estimates_from_sums(sums, counts, total, qs, cfg)
