"""Sieves and multiplicative arithmetic.

A :class:`FactorTable` stores the smallest prime factor of every integer up
to a bound. Everything else here (Moebius, divisor counts, evaluation of a
multiplicative function, prime sums) is read off that table.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterator, Mapping

import numpy as np

from .errors import ConfigurationError, DomainError, ResourceError

__all__ = [
    "FactorTable",
    "MultiplicativeSpec",
    "PrimeSumReport",
    "build_factor_table",
    "mobius",
    "divisor_count",
    "eval_a",
    "multiplicative_values",
    "lambda_a",
    "quartic_tail",
    "prime_sum_report",
    "builtin_spec",
    "spec_from_dict",
    "spec_to_dict",
    "load_spec",
    "BUILTIN_SPECS",
]


def _small_primes(limit: int) -> np.ndarray:
    if limit < 2:
        return np.zeros(0, dtype=np.int64)
    is_p = np.ones(limit + 1, dtype=bool)
    is_p[:2] = False
    for i in range(2, math.isqrt(limit) + 1):
        if is_p[i]:
            is_p[i * i :: i] = False
    return np.nonzero(is_p)[0].astype(np.int64)


class FactorTable:
    """Smallest-prime-factor table for 1..bound.

    ``spf[n]`` is the smallest prime dividing ``n`` for ``n >= 2``, and
    ``spf[1] == 1``. The table is immutable once built; the derived arrays
    below are computed lazily on first access.
    """

    def __init__(self, bound: int, spf: np.ndarray):
        self.bound = int(bound)
        spf.setflags(write=False)
        self.spf = spf

    def __repr__(self) -> str:
        return f"FactorTable(bound={self.bound})"

    def check(self, n: int | float) -> None:
        if n > self.bound:
            raise DomainError(f"{n} exceeds the sieve bound {self.bound}")

    @cached_property
    def primes(self) -> np.ndarray:
        n = np.arange(self.bound + 1)
        p = np.nonzero((self.spf == n) & (n >= 2))[0].astype(np.int64)
        p.setflags(write=False)
        return p

    @cached_property
    def prime_index(self) -> np.ndarray:
        """0-based position of each prime in :attr:`primes`; -1 elsewhere."""
        idx = np.full(self.bound + 1, -1, dtype=np.int64)
        idx[self.primes] = np.arange(len(self.primes))
        idx.setflags(write=False)
        return idx

    @cached_property
    def cofactor(self) -> np.ndarray:
        """``n // spf(n)``; the predecessor in the character recurrence."""
        cof = np.arange(self.bound + 1, dtype=np.int64) // np.maximum(self.spf, 1)
        cof.setflags(write=False)
        return cof

    @cached_property
    def _stats(self) -> dict[str, np.ndarray]:
        size = self.bound + 1
        omega = np.zeros(size, dtype=np.int16)
        big_omega = np.zeros(size, dtype=np.int16)
        divisors = np.ones(size, dtype=np.int64)
        squarefree = np.ones(size, dtype=bool)
        for idx, _, e in prime_power_runs(self, self.bound):
            omega[idx] += 1
            big_omega[idx] += e.astype(np.int16)
            divisors[idx] *= e + 1
            squarefree[idx[e > 1]] = False
        mu = np.where(squarefree, 1 - 2 * (omega % 2), 0).astype(np.int8)
        divisors[0] = 0
        mu[0] = 0
        out = {"omega": omega, "big_omega": big_omega, "divisors": divisors, "mobius": mu}
        for arr in out.values():
            arr.setflags(write=False)
        return out

    @property
    def omega(self) -> np.ndarray:
        return self._stats["omega"]

    @property
    def big_omega(self) -> np.ndarray:
        return self._stats["big_omega"]

    @property
    def divisors(self) -> np.ndarray:
        return self._stats["divisors"]

    @property
    def mobius_values(self) -> np.ndarray:
        return self._stats["mobius"]

    def prime_count(self, x: float) -> int:
        """pi(x) for x up to the bound."""
        if x < 2:
            return 0
        self.check(math.floor(x))
        return int(np.searchsorted(self.primes, math.floor(x), side="right"))

    def primes_upto(self, x: float) -> np.ndarray:
        return self.primes[: self.prime_count(x)]

    def factorize(self, n: int) -> list[tuple[int, int]]:
        """Prime factorization of ``n`` as ``[(p, e), ...]`` with ascending p."""
        n = int(n)
        if n < 1:
            raise DomainError(f"n must be a positive integer, got {n}")
        self.check(n)
        out: list[tuple[int, int]] = []
        while n > 1:
            p = int(self.spf[n])
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
        return out

    def omega_layers(self, N: int) -> list[np.ndarray]:
        """Integers 2..N grouped by number of prime factors (with multiplicity).

        Every ``n`` in layer ``k`` has its cofactor ``n // spf(n)`` in an earlier
        layer, so a completely multiplicative function can be filled in one
        vectorised gather per layer.
        """
        self.check(N)
        if N < 2:
            return []
        k = self.big_omega[2 : N + 1]
        order = np.argsort(k, kind="stable") + 2
        counts = np.bincount(k)[1:]
        return [a for a in np.split(order, np.cumsum(counts)[:-1]) if a.size]


def build_factor_table(bound: int) -> FactorTable:
    """Build the smallest-prime-factor table for 1..bound."""
    if isinstance(bound, float) and bound.is_integer():
        bound = int(bound)
    if not isinstance(bound, (int, np.integer)) or bound < 1:
        raise DomainError(f"bound must be a positive integer, got {bound!r}")
    bound = int(bound)
    dtype = np.int32 if bound < 2**31 else np.int64
    try:
        spf = np.arange(bound + 1, dtype=dtype)
    except MemoryError as exc:  # pragma: no cover - depends on the host
        raise ResourceError(f"cannot allocate a sieve of size {bound}") from exc
    # Descending order: the smallest prime writes last and wins.
    for p in _small_primes(math.isqrt(bound))[::-1]:
        spf[p * p :: p] = p
    return FactorTable(bound, spf)


def prime_power_runs(table: FactorTable, N: int) -> Iterator[tuple[np.ndarray, np.ndarray, np.ndarray]]:
    """Yield ``(n, p, e)`` arrays with ``p**e`` exactly dividing ``n`` for 2 <= n <= N.

    Each integer appears once per distinct prime factor, primes in ascending
    order. The loop runs at most log2(N) times.
    """
    table.check(N)
    spf = table.spf
    idx = np.arange(2, N + 1, dtype=np.int64)
    cur = idx.copy()
    while idx.size:
        p = spf[cur].astype(np.int64)
        e = np.ones(idx.size, dtype=np.int64)
        cur //= p
        sub = np.nonzero(cur % p == 0)[0]
        while sub.size:
            e[sub] += 1
            cur[sub] //= p[sub]
            sub = sub[cur[sub] % p[sub] == 0]
        yield idx, p, e
        keep = cur > 1
        idx, cur = idx[keep], cur[keep]


def mobius(n: int, table: FactorTable) -> int:
    fac = table.factorize(n)
    if any(e > 1 for _, e in fac):
        return 0
    return -1 if len(fac) % 2 else 1


def divisor_count(n: int, table: FactorTable) -> int:
    return math.prod(e + 1 for _, e in table.factorize(n))


# --------------------------------------------------------------------------
# Multiplicative functions

_FORMULA_NAMESPACE = {
    name: getattr(math, name)
    for name in ("sqrt", "log", "exp", "cos", "sin", "pi", "e", "floor", "ceil", "comb", "factorial")
}
_FORMULA_NAMESPACE["abs"] = abs
_FORMULA_NAMESPACE["complex"] = complex


def _compile_expr(expr: str) -> Callable[[int, int], complex]:
    try:
        code = compile(expr, "<formula>", "eval")
    except SyntaxError as exc:
        raise ConfigurationError(f"bad formula {expr!r}: {exc}") from exc

    def f(p: int, m: int) -> complex:
        return eval(code, {"__builtins__": {}}, {**_FORMULA_NAMESPACE, "p": p, "m": m})

    return f


@dataclass(frozen=True)
class MultiplicativeSpec:
    """A multiplicative a(n) given by its values a(p^m) on prime powers.

    ``rule`` selects how unspecified prime powers are filled in: ``"one"``
    (a = 1), ``"formula"`` (closed form ``formula(p, m)``) or ``"table"``
    (explicit ``values`` only; missing entries are zero, or an error when
    ``default == "error"``). Explicit ``values`` always take precedence.
    ``growth`` holds the constants (C, theta) with |a(p^m)| <= C p^(theta m).
    """

    name: str
    rule: str = "one"
    values: Mapping[tuple[int, int], complex] = field(default_factory=dict)
    formula: Callable[[int, int], complex] | None = field(default=None, compare=False)
    expr: str | None = None
    growth: tuple[float, float] | None = None
    default: str = "zero"

    def __post_init__(self):
        if self.rule not in ("one", "table", "formula"):
            raise ConfigurationError(f"unknown rule {self.rule!r}")
        if self.rule == "formula" and self.formula is None:
            if self.expr is None:
                raise ConfigurationError("formula rule needs a formula or an expr")
            object.__setattr__(self, "formula", _compile_expr(self.expr))
        if self.default not in ("zero", "error"):
            raise ConfigurationError(f"unknown default {self.default!r}")
        if self.growth is not None:
            C, theta = self.growth
            if not C > 0:
                raise ConfigurationError("growth constant C must be positive")
            object.__setattr__(self, "growth", (float(C), float(theta)))

    def value(self, p: int, m: int) -> complex:
        if m == 0:
            return 1.0 + 0j
        key = (int(p), int(m))
        if key in self.values:
            return complex(self.values[key])
        if self.rule == "one":
            return 1.0 + 0j
        if self.rule == "formula":
            return complex(self.formula(int(p), int(m)))
        if self.default == "error":
            raise ConfigurationError(f"spec {self.name!r} has no value for a({p}^{m})")
        return 0j

    def values_at(self, p: np.ndarray, m: np.ndarray) -> np.ndarray:
        """Vectorised :meth:`value` over arrays of primes and exponents."""
        p = np.asarray(p, dtype=np.int64)
        m = np.asarray(m, dtype=np.int64)
        if self.rule == "one" and not self.values:
            return np.ones(p.shape, dtype=np.complex128)
        pairs = np.stack([p.ravel(), m.ravel()], axis=1)
        uniq, inv = np.unique(pairs, axis=0, return_inverse=True)
        vals = np.array([self.value(int(a), int(b)) for a, b in uniq], dtype=np.complex128)
        return vals[inv.ravel()].reshape(p.shape)

    @cached_property
    def max_table_exponent(self) -> dict[int, int]:
        """Largest m with an explicit value, per prime (table rule support)."""
        out: dict[int, int] = {}
        for (p, m) in self.values:
            out[p] = max(out.get(p, 0), m)
        return out


def eval_a(spec: MultiplicativeSpec, n: int, table: FactorTable) -> complex:
    """a(n) as the product of prime-power values; a(1) = 1."""
    out = 1.0 + 0j
    for p, e in table.factorize(n):
        out *= spec.value(p, e)
    return out


def multiplicative_values(spec: MultiplicativeSpec, N: int, table: FactorTable) -> np.ndarray:
    """Array ``v`` of length N+1 with ``v[n] = a(n)`` (``v[0] = 0``)."""
    N = int(N)
    if N < 1:
        return np.zeros(max(N, 0) + 1, dtype=np.complex128)
    vals = np.ones(N + 1, dtype=np.complex128)
    vals[0] = 0
    for idx, p, e in prime_power_runs(table, N):
        vals[idx] *= spec.values_at(p, e)
    return vals


def _prime_values(spec: MultiplicativeSpec, x: float, table: FactorTable) -> tuple[np.ndarray, np.ndarray]:
    if x >= 2:
        table.check(math.floor(x))
    ps = table.primes_upto(x)
    return ps, spec.values_at(ps, np.ones_like(ps))


def lambda_a(spec: MultiplicativeSpec, x: float, table: FactorTable) -> float:
    """The prime sum sum_{p <= x} |a(p)|^2 / p (correctly rounded summation)."""
    ps, a = _prime_values(spec, x, table)
    return math.fsum(np.abs(a) ** 2 / ps)


def quartic_tail(spec: MultiplicativeSpec, x: float, table: FactorTable) -> float:
    """sum_{p <= x} |a(p)|^4 / p^2."""
    ps, a = _prime_values(spec, x, table)
    return math.fsum(np.abs(a) ** 4 / ps.astype(np.float64) ** 2)


@dataclass(frozen=True)
class PrimeSumReport:
    x: float
    lam: float
    quartic_tail: float


def prime_sum_report(spec: MultiplicativeSpec, x: float, table: FactorTable) -> PrimeSumReport:
    return PrimeSumReport(x, lambda_a(spec, x, table), quartic_tail(spec, x, table))


# --------------------------------------------------------------------------
# Built-in specs and the JSON file format


def _power_spec(theta: float) -> MultiplicativeSpec:
    return MultiplicativeSpec(
        name=f"power:{theta:g}",
        rule="formula",
        formula=lambda p, m, t=theta: float(p) ** (t * m),
        expr=f"p ** ({theta!r} * m)",
        growth=(1.0, theta),
    )


def _chi4(p: int, m: int) -> complex:
    if p == 2:
        return 0.0
    return 1.0 if p % 4 == 1 else (-1.0) ** m


BUILTIN_SPECS: dict[str, Callable[[], MultiplicativeSpec]] = {
    "one": lambda: MultiplicativeSpec("one", "one", growth=(1.0, 0.0)),
    # (m + 1) <= 3.1 * 2**(0.2 m) for all m >= 1
    "divisor": lambda: MultiplicativeSpec(
        "divisor", "formula", formula=lambda p, m: m + 1.0, expr="m + 1", growth=(3.1, 0.2)
    ),
    "mobius": lambda: MultiplicativeSpec(
        "mobius", "formula", formula=lambda p, m: -1.0 if m == 1 else 0.0,
        expr="-1.0 if m == 1 else 0.0", growth=(1.0, 0.0),
    ),
    "liouville": lambda: MultiplicativeSpec(
        "liouville", "formula", formula=lambda p, m: (-1.0) ** m, expr="(-1.0) ** m", growth=(1.0, 0.0)
    ),
    "chi4": lambda: MultiplicativeSpec(
        "chi4", "formula", formula=_chi4,
        expr="0.0 if p == 2 else (1.0 if p % 4 == 1 else (-1.0) ** m)", growth=(1.0, 0.0),
    ),
}


def builtin_spec(name: str) -> MultiplicativeSpec:
    """Look up a built-in spec; ``power:<theta>`` gives a(p^m) = p^(theta m)."""
    if name.startswith("power:"):
        try:
            theta = float(name.split(":", 1)[1])
        except ValueError as exc:
            raise ConfigurationError(f"bad power spec {name!r}") from exc
        return _power_spec(theta)
    try:
        return BUILTIN_SPECS[name]()
    except KeyError:
        known = ", ".join(sorted(BUILTIN_SPECS)) + ", power:<theta>"
        raise ConfigurationError(f"unknown spec {name!r} (known: {known})") from None


def spec_from_dict(obj: Mapping) -> MultiplicativeSpec:
    """Parse the JSON spec format.

    ``{"name": str, "rule": "one"|"table"|"formula", "values": [[p, m, re, im], ...],
    "growth": {"C": real, "theta": real} | null}``; formula specs carry an
    ``"expr"`` in ``p`` and ``m`` (or name a built-in), table specs may set
    ``"default": "zero"|"error"``.
    """
    try:
        name = str(obj["name"])
        rule = obj.get("rule", "table")
        values = {}
        for row in obj.get("values") or []:
            p, m, re = int(row[0]), int(row[1]), float(row[2])
            im = float(row[3]) if len(row) > 3 else 0.0
            values[(p, m)] = complex(re, im)
        growth = obj.get("growth")
        if growth is not None:
            growth = (float(growth["C"]), float(growth["theta"]))
        expr = obj.get("expr")
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ConfigurationError(f"malformed spec: {exc}") from exc
    formula = None
    if rule == "formula" and expr is None:
        base = builtin_spec(name)
        if base.formula is None:
            raise ConfigurationError(f"formula spec {name!r} needs an expr")
        formula, expr = base.formula, base.expr
        growth = growth if growth is not None else base.growth
    return MultiplicativeSpec(
        name=name, rule=rule, values=values, formula=formula, expr=expr,
        growth=growth, default=obj.get("default", "zero"),
    )


def spec_to_dict(spec: MultiplicativeSpec) -> dict:
    out = {
        "name": spec.name,
        "rule": spec.rule,
        "values": [[p, m, v.real, v.imag] for (p, m), v in sorted(spec.values.items())],
        "growth": None if spec.growth is None else {"C": spec.growth[0], "theta": spec.growth[1]},
    }
    if spec.rule == "formula":
        out["expr"] = spec.expr
    if spec.default != "zero":
        out["default"] = spec.default
    return out


def load_spec(name_or_path: str) -> MultiplicativeSpec:
    """A built-in name or a path to a JSON spec file."""
    if name_or_path in BUILTIN_SPECS or name_or_path.startswith("power:"):
        return builtin_spec(name_or_path)
    try:
        with open(name_or_path) as fh:
            obj = json.load(fh)
    except FileNotFoundError:
        raise ConfigurationError(f"no built-in spec or file named {name_or_path!r}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{name_or_path}: invalid JSON ({exc})") from exc
    return spec_from_dict(obj)
