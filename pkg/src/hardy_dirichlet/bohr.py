"""Dirichlet polynomials and the Bohr lift to the polytorus.

Writing ``n = prod p_j^alpha_j`` turns ``n^{-it}`` into the character
``z^alpha(n)`` on ``T^pi(N)``. Characters are completely multiplicative, so
they are filled in with one multiplication per integer using the
smallest-prime-factor recurrence ``chi(n) = chi(n / spf(n)) * z_spf(n)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .arith import FactorTable, MultiplicativeSpec, multiplicative_values
from .errors import DomainError, ResourceError

__all__ = [
    "DirichletPolynomial",
    "MultiIndex",
    "TorusPoint",
    "multi_index",
    "character_values",
    "lift_eval",
    "apply_T",
    "multiply",
    "convolution_power",
    "partial_sum",
    "euler_product_polynomial",
    "MAX_PAIR_PRODUCTS",
]

# Upper limit on pairwise term products formed by one multiplication.
MAX_PAIR_PRODUCTS = 10**8
_INT64_LIMIT = 2**62


def _is_int_dtype(a: np.ndarray) -> bool:
    return a.dtype.kind in "iu" or a.dtype == object


@dataclass(frozen=True, eq=False)
class DirichletPolynomial:
    """F(s) = sum a_n n^{-s} as parallel arrays of indices and coefficients.

    Integer coefficients are kept in an integer dtype (``int64``, or Python
    ints in an object array when they outgrow it) so that convolution
    powers stay exact. Anything else is stored as ``complex128``.
    """

    ns: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        ns = np.asarray(self.ns, dtype=np.int64).ravel()
        c = np.asarray(self.coeffs).ravel()
        if ns.shape != c.shape:
            raise DomainError("indices and coefficients differ in length")
        if not _is_int_dtype(c):
            c = c.astype(np.complex128)
            if not np.all(np.isfinite(c)):
                raise DomainError("coefficients must be finite")
        elif c.dtype != object:
            c = c.astype(np.int64)
        if ns.size:
            if ns.min() < 1:
                raise DomainError("Dirichlet indices must be positive")
            if np.any(np.diff(ns) <= 0):
                raise DomainError("indices must be strictly increasing (no duplicates)")
        ns = ns.copy()
        c = c.copy()
        ns.setflags(write=False)
        c.setflags(write=False)
        object.__setattr__(self, "ns", ns)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[int, complex]] | Mapping[int, complex]) -> "DirichletPolynomial":
        items = terms.items() if isinstance(terms, Mapping) else terms
        items = sorted((int(n), a) for n, a in items)
        if not items:
            return cls.empty()
        ns, cs = zip(*items)
        if all(isinstance(a, (int, np.integer)) for a in cs):
            arr = np.array(cs, dtype=object)
            if all(abs(int(a)) < _INT64_LIMIT for a in cs):
                arr = arr.astype(np.int64)
        else:
            arr = np.array(cs, dtype=np.complex128)
        return cls(np.array(ns, dtype=np.int64), arr)

    @classmethod
    def from_dense(cls, coeffs: np.ndarray, drop_zeros: bool = True) -> "DirichletPolynomial":
        """From an array indexed by n (entry 0 ignored)."""
        coeffs = np.asarray(coeffs)
        ns = np.arange(coeffs.size, dtype=np.int64)[1:]
        vals = coeffs[1:]
        if drop_zeros:
            keep = vals != 0
            ns, vals = ns[keep], vals[keep]
        return cls(ns, vals)

    @classmethod
    def empty(cls) -> "DirichletPolynomial":
        return cls(np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.complex128))

    @classmethod
    def from_spec(
        cls, spec: MultiplicativeSpec, N: int, table: FactorTable, sigma_shift: float = 0.5
    ) -> "DirichletPolynomial":
        """D_N(s) = sum_{n <= N} a(n) n^{-sigma_shift - s}."""
        vals = multiplicative_values(spec, N, table)
        n = np.arange(vals.size, dtype=np.float64)
        if sigma_shift:
            vals[1:] *= n[1:] ** -sigma_shift
        elif not vals.imag.any() and np.all(vals.real == np.round(vals.real)) and np.abs(vals.real).max() < 2**53:
            # integer-valued a(n) without a shift keeps the exact integer path
            return cls.from_dense(vals.real.astype(np.int64))
        return cls.from_dense(vals)

    @property
    def N(self) -> int:
        return int(self.ns[-1]) if self.ns.size else 0

    @property
    def is_exact(self) -> bool:
        return _is_int_dtype(self.coeffs)

    def __len__(self) -> int:
        return int(self.ns.size)

    def terms(self) -> list[tuple[int, complex]]:
        return list(zip(self.ns.tolist(), self.coeffs.tolist()))

    def coefficient(self, n: int):
        i = np.searchsorted(self.ns, n)
        if i < self.ns.size and self.ns[i] == n:
            return self.coeffs[i]
        return 0

    def complex_coeffs(self) -> np.ndarray:
        return self.coeffs.astype(np.complex128)

    def abs2(self) -> np.ndarray:
        """|a_n|^2 as float64 (Python ints for exact polynomials via :meth:`abs2_exact`)."""
        c = self.complex_coeffs()
        return c.real * c.real + c.imag * c.imag

    def abs2_exact(self) -> list[int]:
        if not self.is_exact:
            raise DomainError("polynomial does not have integer coefficients")
        return [int(a) * int(a) for a in self.coeffs.tolist()]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DirichletPolynomial):
            return NotImplemented
        if not np.array_equal(self.ns, other.ns):
            return False
        if self.is_exact and other.is_exact:
            return self.coeffs.tolist() == other.coeffs.tolist()
        return np.array_equal(self.complex_coeffs(), other.complex_coeffs())

    def __hash__(self):  # pragma: no cover - frozen container, identity hash
        return id(self)

    def to_dict(self) -> dict:
        if self.is_exact:
            terms = [[n, int(a), 0] for n, a in self.terms()]
        else:
            terms = [[n, a.real, a.imag] for n, a in self.terms()]
        return {"N": self.N, "terms": terms}

    @classmethod
    def from_dict(cls, obj: Mapping, table: FactorTable | None = None) -> "DirichletPolynomial":
        """Parse ``{"N", "terms": [[n, re, im], ...]}`` or the generator form
        ``{"spec": <spec>, "N": int, "sigma_shift": 0.5}``."""
        from .arith import build_factor_table, spec_from_dict

        try:
            if "spec" in obj:
                spec = obj["spec"]
                spec = spec_from_dict(spec) if isinstance(spec, Mapping) else None
                if spec is None:
                    from .arith import load_spec

                    spec = load_spec(str(obj["spec"]))
                N = int(obj["N"])
                if table is None or table.bound < N:
                    table = build_factor_table(max(N, 1))
                return cls.from_spec(spec, N, table, float(obj.get("sigma_shift", 0.5)))
            rows = obj["terms"]
            exact = all(
                isinstance(r[1], int) and (len(r) < 3 or r[2] == 0) for r in rows
            )
            terms = [
                (int(r[0]), int(r[1]) if exact else complex(float(r[1]), float(r[2]) if len(r) > 2 else 0.0))
                for r in rows
            ]
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise DomainError(f"malformed polynomial: {exc}") from exc
        ns = [n for n, _ in terms]
        if len(set(ns)) != len(ns):
            raise DomainError("duplicate indices in polynomial file")
        F = cls.from_terms(terms)
        if "N" in obj and F.N > int(obj["N"]):
            raise DomainError(f"term index {F.N} exceeds declared N={obj['N']}")
        return F


@dataclass(frozen=True)
class MultiIndex:
    """Sparse exponent vector ``((j, alpha_j), ...)`` with 1-based prime index j."""

    exponents: tuple[tuple[int, int], ...]

    def value(self, table: FactorTable) -> int:
        return math.prod(int(table.primes[j - 1]) ** a for j, a in self.exponents)


def multi_index(n: int, table: FactorTable) -> MultiIndex:
    return MultiIndex(tuple((int(table.prime_index[p]) + 1, e) for p, e in table.factorize(n)))


@dataclass(frozen=True, eq=False)
class TorusPoint:
    """A point (z_1, ..., z_d) of the polytorus, one coordinate per prime."""

    coords: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.coords, dtype=np.complex128).ravel().copy()
        if z.size and np.max(np.abs(np.abs(z) - 1.0)) > 1e-14:
            raise DomainError("torus coordinates must have modulus 1")
        z.setflags(write=False)
        object.__setattr__(self, "coords", z)

    @classmethod
    def from_angles(cls, theta: np.ndarray) -> "TorusPoint":
        """z_j = exp(2 pi i theta_j)."""
        return cls(np.exp(2j * np.pi * np.asarray(theta, dtype=np.float64)))

    @classmethod
    def random(cls, dim: int, rng: np.random.Generator) -> "TorusPoint":
        return cls.from_angles(rng.random(dim))

    @property
    def dim(self) -> int:
        return int(self.coords.size)


def character_values(point: TorusPoint, N: int, table: FactorTable) -> np.ndarray:
    """chi(n) = z^alpha(n) for n = 0..N (entry 0 unused, set to 0)."""
    need = table.prime_count(N)
    if point.dim < need:
        raise DomainError(f"point has {point.dim} coordinates, need pi({N}) = {need}")
    chi = np.zeros(N + 1, dtype=np.complex128)
    if N >= 1:
        chi[1] = 1.0
    z = point.coords
    cof, pidx = table.cofactor, table.prime_index[table.spf]
    for layer in table.omega_layers(N):
        chi[layer] = chi[cof[layer]] * z[pidx[layer]]
    return chi


def lift_eval(F: DirichletPolynomial, point: TorusPoint, table: FactorTable) -> complex:
    """BF(z) = sum a_n z^alpha(n)."""
    if not len(F):
        return 0j
    chi = character_values(point, F.N, table)
    return complex(np.dot(F.complex_coeffs(), chi[F.ns]))


def apply_T(F: DirichletPolynomial, q: float, table: FactorTable) -> DirichletPolynomial:
    """Composite weighting T_1 ... T_pi(N).

    Terms with a squared prime factor are removed and the rest are scaled
    by (q/2)^(omega(n)/2).
    """
    if not 0 < q <= 2:
        raise DomainError(f"q must lie in (0, 2], got {q}")
    if not len(F):
        return DirichletPolynomial.empty()
    table.check(F.N)
    keep = table.mobius_values[F.ns] != 0
    ns = F.ns[keep]
    # weights and products in extended precision so each coefficient is rounded once
    w = np.longdouble(q / 2.0) ** (table.omega[ns].astype(np.longdouble) / 2)
    c = F.complex_coeffs()[keep]
    out = (c.real * w).astype(np.float64) + 1j * (c.imag * w).astype(np.float64)
    return DirichletPolynomial(ns, out)


def _group_sum(keys: np.ndarray, vals: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    k = keys[order]
    v = vals[order]
    starts = np.concatenate(([0], np.nonzero(np.diff(k))[0] + 1))
    return k[starts], np.add.reduceat(v, starts) if v.size else v


def multiply(
    F: DirichletPolynomial,
    G: DirichletPolynomial,
    max_index: int | None = None,
    max_pairs: int = MAX_PAIR_PRODUCTS,
) -> DirichletPolynomial:
    """Dirichlet product FG, optionally dropping indices above ``max_index``.

    Integer polynomials multiply exactly. The summation order for each
    output coefficient is fixed (stable sort by index), so results are
    reproducible bit for bit.
    """
    if not len(F) or not len(G):
        return DirichletPolynomial.empty()
    pairs = len(F) * len(G)
    if pairs > max_pairs:
        raise ResourceError(f"{pairs} term products exceed the guard {max_pairs}")
    if max_index is None and F.N * G.N >= 2**63:
        raise ResourceError("product indices overflow 64-bit integers")
    if max_index is not None:
        max_index = min(int(max_index), 2**63 - 1)
    exact = F.is_exact and G.is_exact
    if exact:
        bound = max(abs(int(a)) for a in F.coeffs.tolist()) * max(abs(int(a)) for a in G.coeffs.tolist())
        bound *= min(len(F), len(G))
        dtype = np.int64 if bound < _INT64_LIMIT else object
        fc, gc = F.coeffs.astype(dtype), G.coeffs.astype(dtype)
    else:
        fc, gc = F.complex_coeffs(), G.complex_coeffs()
    # chunk over F so the temporaries stay around 2^22 entries
    step = max(1, (1 << 22) // len(G))
    keys_out, vals_out = [], []
    for i in range(0, len(F), step):
        keys = np.multiply.outer(F.ns[i : i + step], G.ns).ravel()
        vals = np.multiply.outer(fc[i : i + step], gc).ravel()
        if max_index is not None:
            # f <= max_index // g avoids overflow in the comparison
            m = np.less_equal.outer(F.ns[i : i + step], max_index // G.ns).ravel()
            keys, vals = keys[m], vals[m]
        if keys.size:
            k, v = _group_sum(keys, vals)
            keys_out.append(k)
            vals_out.append(v)
    if not keys_out:
        return DirichletPolynomial.empty()
    if len(keys_out) == 1:
        k, v = keys_out[0], vals_out[0]
    else:
        k, v = _group_sum(np.concatenate(keys_out), np.concatenate(vals_out))
    nz = v != 0
    return DirichletPolynomial(k[nz], v[nz])


def convolution_power(
    F: DirichletPolynomial, k: int, max_pairs: int = MAX_PAIR_PRODUCTS
) -> DirichletPolynomial:
    """Coefficients a_{k,N}(n) of F^k, i.e. sums over n_1...n_k = n with n_i in supp F."""
    if k < 1 or int(k) != k:
        raise DomainError(f"k must be a positive integer, got {k}")
    if F.N > 1 and k * math.log2(F.N) >= 63:
        raise ResourceError(f"N^k = {F.N}^{k} overflows 64-bit indices")
    out = F
    for _ in range(int(k) - 1):
        out = multiply(out, F, max_pairs=max_pairs)
    return out


def partial_sum(F: DirichletPolynomial, M: int) -> DirichletPolynomial:
    """S_M F: keep the terms with n <= M."""
    keep = F.ns <= M
    return DirichletPolynomial(F.ns[keep], F.coeffs[keep])


def euler_product_polynomial(
    spec: MultiplicativeSpec,
    N: int,
    table: FactorTable,
    max_index: int,
    sigma_shift: float = 0.5,
) -> DirichletPolynomial:
    """Expansion of prod_{p <= N} sum_m a(p^m) p^{-m sigma_shift} p^{-ms}, cut at max_index."""
    out = DirichletPolynomial(np.array([1]), np.array([1.0 + 0j]))
    for p in table.primes_upto(N).tolist():
        ns, cs = [1], [1.0 + 0j]
        pm, m = p, 1
        while pm <= max_index:
            ns.append(pm)
            cs.append(spec.value(p, m) * pm ** -sigma_shift)
            pm *= p
            m += 1
        out = multiply(out, DirichletPolynomial(np.array(ns), np.array(cs)), max_index=max_index)
    return out
