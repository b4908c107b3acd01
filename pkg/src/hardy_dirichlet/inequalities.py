"""Verifiers and growth scans for the norm inequalities.

Verifiers return a :class:`VerdictReport`. Sampled right-hand sides pass
when ``lhs <= rhs + 4 sigma`` (plus a 1e-12 relative rounding allowance);
exact ones are compared directly, with integers where the coefficients
allow it. Scans return a :class:`ScanReport` and never assert a constant.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .arith import FactorTable, MultiplicativeSpec, lambda_a, prime_power_runs
from .bohr import MAX_PAIR_PRODUCTS, DirichletPolynomial, partial_sum
from .circle import CirclePolynomial, QuadratureConfig, circle_norm, point_lemma_lhs
from .errors import DomainError
from .estimates import NormEstimate
from .norms import (
    SamplerConfig,
    even_moment_sum,
    moment_root,
    norm_exact_even,
    norm_exact_two,
    torus_moments,
    weighted_sum_abs2,
)

__all__ = [
    "VerdictReport",
    "ScanReport",
    "SIGMA_RULE",
    "embed_lhs",
    "helson_lhs",
    "upper_even_lhs",
    "verify_embed",
    "verify_helson",
    "verify_upper_even",
    "verify_circle_lemma",
    "verify_condition_b",
    "theorem1_bounds",
    "growth_scan",
    "growth_band_ok",
    "condition_b_check",
    "rama_partial_sum",
    "g_r_at_one",
    "GrReport",
    "quartic_convergence_check",
    "partial_sum_diagnostic",
    "upper_real_scan",
]

SIGMA_RULE = 4.0
ROUNDING = 1e-12
VERDICT_COLUMNS = ("name", "q", "N", "lhs", "rhs", "std_error", "margin", "pass")


@dataclass
class VerdictReport:
    name: str
    lhs: float
    rhs: NormEstimate | float
    margin: float
    passed: bool
    inputs_digest: str
    q: float | None = None
    N: int | None = None
    margin_units: str = "absolute"
    note: str | None = None

    @property
    def rhs_value(self) -> float:
        return self.rhs.value if isinstance(self.rhs, NormEstimate) else float(self.rhs)

    @property
    def std_error(self) -> float:
        return self.rhs.std_error if isinstance(self.rhs, NormEstimate) else 0.0

    def to_dict(self) -> dict:
        out = {
            "name": self.name,
            "q": self.q,
            "N": self.N,
            "lhs": self.lhs,
            "rhs": self.rhs.to_dict() if isinstance(self.rhs, NormEstimate) else self.rhs,
            "margin": self.margin,
            "margin_units": self.margin_units,
            "pass": self.passed,
            "inputs_digest": self.inputs_digest,
        }
        if self.note:
            out["note"] = self.note
        return out

    def csv_row(self) -> dict:
        return {
            "name": self.name, "q": self.q, "N": self.N, "lhs": self.lhs, "rhs": self.rhs_value,
            "std_error": self.std_error, "margin": self.margin, "pass": self.passed,
        }

    def to_csv(self) -> str:
        return _csv(VERDICT_COLUMNS, [self.csv_row()])


@dataclass
class ScanReport:
    kind: str
    spec_name: str | None
    columns: tuple[str, ...]
    rows: list[dict]
    notes: list[str] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "spec": self.spec_name,
            "columns": list(self.columns),
            "rows": self.rows,
            "notes": self.notes,
            "summary": self.summary,
        }

    def to_csv(self) -> str:
        return _csv(self.columns, self.rows)


def _csv(columns, rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n", extrasaction="ignore")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if row.get(k) is None else repr(row[k]) if isinstance(row[k], float) else row[k])
                    for k in columns})
    return buf.getvalue()


def _digest(*parts) -> str:
    def enc(x):
        if isinstance(x, DirichletPolynomial):
            return x.to_dict()
        if isinstance(x, CirclePolynomial):
            return [[c.real, c.imag] for c in x.coeffs.tolist()]
        if isinstance(x, (SamplerConfig, QuadratureConfig)):
            d = asdict(x)
            d.pop("threads", None)
            return d
        if isinstance(x, MultiplicativeSpec):
            from .arith import spec_to_dict

            return spec_to_dict(x)
        return x

    blob = json.dumps([enc(p) for p in parts], sort_keys=True, default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _statistical_verdict(name, lhs, rhs: NormEstimate, digest, q, N, note=None) -> VerdictReport:
    slack = rhs.value + SIGMA_RULE * rhs.std_error + ROUNDING * max(1.0, abs(lhs))
    if rhs.std_error > 0:
        margin, units = (rhs.value - lhs) / rhs.std_error, "sigma"
    else:
        margin, units = rhs.value - lhs, "absolute"
    return VerdictReport(name, lhs, rhs, margin, bool(lhs <= slack), digest, q, N, units, note)


# --------------------------------------------------------------------------
# left-hand sides


def _check_support(F: DirichletPolynomial, table: FactorTable) -> None:
    if len(F):
        table.check(F.N)


def _divisor_weighted_root(F: DirichletPolynomial, keep: np.ndarray, exponent, table: FactorTable) -> float:
    # (sum_{kept n} |a_n|^2 d(n)^exponent)^(1/2), accumulated in extended precision
    w = table.divisors[F.ns[keep]].astype(np.longdouble) ** exponent
    c = F.complex_coeffs()[keep]
    re = c.real.astype(np.longdouble)
    im = c.imag.astype(np.longdouble)
    return float(np.sqrt(np.sum(re * re * w) + np.sum(im * im * w)))


def embed_lhs(F: DirichletPolynomial, q: float, table: FactorTable) -> float:
    """(sum |mu(n)| |a_n|^2 d(n)^(log2 q - 1))^(1/2)."""
    if not 0 < q <= 2:
        raise DomainError(f"q must lie in (0, 2], got {q}")
    _check_support(F, table)
    if not len(F):
        return 0.0
    sq = table.mobius_values[F.ns] != 0
    return _divisor_weighted_root(F, sq, np.log2(np.longdouble(q)) - 1, table)


def helson_lhs(F: DirichletPolynomial, table: FactorTable) -> float:
    """(sum |a_n|^2 / d(n))^(1/2) over the full support."""
    _check_support(F, table)
    if not len(F):
        return 0.0
    return _divisor_weighted_root(F, np.ones(len(F), dtype=bool), np.longdouble(-1), table)


def _upper_even_sum(F: DirichletPolynomial, j: int, table: FactorTable) -> int | float:
    _check_support(F, table)
    if not len(F):
        return 0
    if F.is_exact:
        d = table.divisors[F.ns].tolist()
        return sum(a2 * dn ** (j - 1) for a2, dn in zip(F.abs2_exact(), d))
    return weighted_sum_abs2(F, table.divisors[F.ns].astype(np.float64) ** (j - 1))


def upper_even_lhs(F: DirichletPolynomial, j: int, table: FactorTable) -> float:
    """(sum |a_n|^2 d(n)^(j-1))^(1/2)."""
    return moment_root(_upper_even_sum(F, j, table), 2)


# --------------------------------------------------------------------------
# verifiers


def verify_embed(
    F: DirichletPolynomial,
    q: float,
    cfg: SamplerConfig,
    table: FactorTable,
    rhs: NormEstimate | None = None,
) -> VerdictReport:
    """Squarefree weighted l^2 sum against ||F||_q for 0 < q <= 2.

    At q = 2 the comparison is exact. ``rhs`` may carry a precomputed
    sampled norm at this q (e.g. from :func:`torus_moments`).
    """
    lhs = embed_lhs(F, q, table)
    digest = _digest("embed", F, q, cfg)
    if q == 2:
        exact = norm_exact_two(F)
        return VerdictReport("embed", lhs, exact, exact.value - lhs, bool(lhs <= exact.value), digest, q, F.N)
    if rhs is None:
        rhs = torus_moments(F, [q], cfg, table)[0]
    return _statistical_verdict("embed", lhs, rhs, digest, q, F.N)


def verify_helson(
    F: DirichletPolynomial,
    cfg: SamplerConfig,
    table: FactorTable,
    rhs: NormEstimate | None = None,
) -> VerdictReport:
    """(sum |a_n|^2 / d(n))^(1/2) against ||F||_1."""
    lhs = helson_lhs(F, table)
    if rhs is None:
        rhs = torus_moments(F, [1.0], cfg, table)[0]
    return _statistical_verdict("helson", lhs, rhs, _digest("helson", F, cfg), 1.0, F.N)


def verify_upper_even(
    F: DirichletPolynomial, j: int, table: FactorTable, max_pairs: int = MAX_PAIR_PRODUCTS
) -> VerdictReport:
    """(sum |a_n|^2 d(n)^(j-1))^(1/2) >= ||F||_{2^j}, both sides exact.

    Integer polynomials are decided by comparing S1^(2^(j-1)) with
    sum |a_{k,N}(n)|^2 in integer arithmetic; otherwise a 1e-9 relative
    tolerance applies.
    """
    if j < 1 or int(j) != j:
        raise DomainError(f"j must be a positive integer, got {j}")
    k = 2 ** (int(j) - 1)
    s1 = _upper_even_sum(F, j, table)
    lhs = moment_root(s1, 2)
    digest = _digest("upper-even", F, j)
    s2, terms = even_moment_sum(F, k, max_pairs)
    rhs = NormEstimate(moment_root(s2, 2 * k), 0.0, "exact_even", float(2**j), terms)
    if isinstance(s1, int) and isinstance(s2, int):
        passed = bool(s1**k >= s2)
    elif k == 1:
        passed = bool(lhs >= rhs.value)
    else:
        passed = bool(lhs >= rhs.value * (1 - 1e-9))
    return VerdictReport("upper-even", lhs, rhs, lhs - rhs.value, passed, digest, float(2**j), F.N)


def verify_circle_lemma(f: CirclePolynomial, q: float, cfg: QuadratureConfig | None = None) -> VerdictReport:
    """(|f(0)|^2 + (q/2)|f'(0)|^2)^(1/2) <= ||f||_{H^q(T)}, up to the quadrature error."""
    lhs = point_lemma_lhs(f, q)
    rhs = circle_norm(f, q, cfg)
    slack = rhs.value + rhs.std_error + ROUNDING * max(1.0, lhs)
    return VerdictReport(
        "circle-lemma", lhs, rhs, rhs.value - lhs, bool(lhs <= slack), _digest("circle", f, q, cfg), q, f.degree
    )


# --------------------------------------------------------------------------
# growth-bound shapes and growth scans


def theorem1_bounds(spec: MultiplicativeSpec, N: int, q: float, table: FactorTable) -> tuple[float, float | None]:
    """Bound shapes with unit constants: lower e^(q lam/4); upper by the q-case split."""
    if not q > 0:
        raise DomainError(f"q must be positive, got {q}")
    lam = lambda_a(spec, N, table) if N >= 2 else 0.0
    lower = math.exp(q * lam / 4)
    if q > 1:
        upper = lower
    elif q == 1:
        upper = lam * math.exp(lam / 4)
    else:
        upper = math.exp(lam / 4)
    return lower, upper


def _slope(xs, ys) -> float:
    if len(xs) < 2:
        return 0.0
    return float(np.polyfit(np.asarray(xs, dtype=float), np.asarray(ys, dtype=float), 1)[0])


def _even_pairs(F: DirichletPolynomial, k: int) -> int:
    # |supp F|^k bounds the work of the repeated products
    return len(F) ** k if k > 1 else len(F)


GROWTH_COLUMNS = ("q", "N", "estimate", "std_error", "method", "bound", "ratio")


def growth_scan(
    spec: MultiplicativeSpec,
    q_list: Sequence[float],
    N_list: Sequence[int],
    cfg: SamplerConfig,
    table: FactorTable,
    exact_even_pairs: int = 4 * 10**6,
) -> ScanReport:
    """||D_N||_q against e^(q lam_a(N)/4) over a grid of (q, N).

    q = 2 is exact; even q uses the convolution power while the pair count
    stays under ``exact_even_pairs``; everything else shares one sampled
    run per N.
    """
    rows = []
    for N in sorted(set(int(n) for n in N_list)):
        table.check(N)
        D = DirichletPolynomial.from_spec(spec, N, table)
        lam = lambda_a(spec, N, table) if N >= 2 else 0.0
        est: dict[float, NormEstimate] = {}
        sampled = []
        for q in q_list:
            q = float(q)
            if q == 2:
                est[q] = norm_exact_two(D)
            elif q % 2 == 0 and _even_pairs(D, int(q // 2)) <= exact_even_pairs:
                est[q] = norm_exact_even(D, int(q // 2))
            else:
                sampled.append(q)
        if sampled:
            est.update(zip(sampled, torus_moments(D, sampled, cfg, table)))
        for q, e in est.items():
            bound = math.exp(q * lam / 4)
            rows.append({
                "q": q, "N": N, "estimate": e.value, "std_error": e.std_error,
                "method": e.method, "bound": bound, "ratio": e.value / bound,
            })
    rows.sort(key=lambda r: (r["q"], r["N"]))
    summary = {}
    for q in sorted({r["q"] for r in rows}):
        sel = [r for r in rows if r["q"] == q]
        ratios = [r["ratio"] for r in sel]
        d = np.diff(ratios)
        monotone = bool(len(ratios) > 1 and (np.all(d > 0) or np.all(d < 0)))
        summary[repr(q)] = {
            "min_ratio": min(ratios),
            "max_ratio": max(ratios),
            "band": max(ratios) / min(ratios),
            "slope_log_ratio_vs_log_N": _slope(np.log([r["N"] for r in sel]), np.log(ratios)),
            "monotone": monotone,
        }
    notes = ["ratio = estimate / exp(q lambda_a(N) / 4); implied constants are not asserted"]
    return ScanReport("growth", spec.name, GROWTH_COLUMNS, rows, notes, summary)


def growth_band_ok(summary_q: dict, band: float = 10.0, slope: float = 0.1) -> bool:
    """Ratios within a factor ``band`` and no monotone drift steeper than ``slope``."""
    drifting = summary_q["monotone"] and abs(summary_q["slope_log_ratio_vs_log_N"]) > slope
    return summary_q["band"] <= band and not drifting


# --------------------------------------------------------------------------
# condition (B) and the squarefree sums


def _squarefree_terms(spec: MultiplicativeSpec, r: float, X: int, table: FactorTable) -> np.ndarray:
    """t[n] = |mu(n)| |a(n)|^2 d(n)^r / n for n <= X (t[0] = 0)."""
    X = int(X)
    table.check(X)
    t = np.ones(X + 1)
    t[0] = 0.0
    scale = 2.0**r
    for idx, p, e in prime_power_runs(table, X):
        w = scale * np.abs(spec.values_at(p, np.ones_like(p))) ** 2
        t[idx] *= np.where(e == 1, w, 0.0)
    t[1:] /= np.arange(1, X + 1, dtype=np.float64)
    return t


def rama_partial_sum(spec: MultiplicativeSpec, r: float, x: float, table: FactorTable) -> float:
    """sum_{n <= x} |mu(n)| |a(n)|^2 d(n)^r / n."""
    X = int(math.floor(x))
    if X < 1:
        return 0.0
    return math.fsum(_squarefree_terms(spec, r, X, table)[1:].tolist())


def _prime_log_product(spec: MultiplicativeSpec, r: float, x: float, table: FactorTable) -> float:
    ps = table.primes_upto(x)
    a2 = np.abs(spec.values_at(ps, np.ones_like(ps))) ** 2
    return math.fsum(np.log1p(2.0**r * a2 / ps).tolist())


CONDITION_B_COLUMNS = ("x", "product", "sum", "ratio")


def condition_b_check(
    spec: MultiplicativeSpec, r: float, x_list: Sequence[float], table: FactorTable
) -> ScanReport:
    """prod_{p <= x}(1 + 2^r |a(p)|^2/p) against the squarefree sum, per x."""
    xs = sorted(int(math.floor(x)) for x in x_list)
    rows = []
    if xs:
        t = _squarefree_terms(spec, r, max(xs[-1], 1), table).tolist()
        for x in xs:
            prod = math.exp(_prime_log_product(spec, r, x, table))
            s = math.fsum(t[1 : x + 1])
            rows.append({"x": x, "product": prod, "sum": s, "ratio": prod / s if s else math.inf})
    ratios = [row["ratio"] for row in rows]
    summary = {}
    if ratios:
        summary = {"r": r, "min_ratio": min(ratios), "max_ratio": max(ratios),
                   "spread": max(ratios) / min(ratios)}
    return ScanReport("condition-b", spec.name, CONDITION_B_COLUMNS, rows,
                      ["ratio should stay bounded in x; no constant is asserted"], summary)


def verify_condition_b(
    spec: MultiplicativeSpec, r: float, x_list: Sequence[float], table: FactorTable, band: float = 3.0
) -> VerdictReport:
    """Passes when max/min of product/sum over x_list is at most ``band``."""
    scan = condition_b_check(spec, r, x_list, table)
    spread = scan.summary.get("spread", 1.0)
    return VerdictReport(
        "condition-b", spread, band, band - spread, bool(spread <= band),
        _digest("condition-b", spec, r, sorted(x_list)), None, max(x_list) if x_list else None,
        note=f"r={r}; lhs is the ratio spread across x",
    )


@dataclass(frozen=True)
class GrReport:
    value: float
    log_value: float
    tail_estimate: float
    p_max: int


def g_r_at_one(spec: MultiplicativeSpec, c: float, r: float, p_max: float, table: FactorTable) -> GrReport:
    """prod_{p <= p_max} (1 - 1/p)^(c 2^r) (1 + 2^r |a(p)|^2/p), in log space.

    ``tail_estimate`` bounds the omitted primes through the second-order
    terms (c 2^r + 4^r |a(p)|^4)/(2 p^2), plus the observed first-order
    drift 2^r (|a(p)|^2 - c)/p near p_max.
    """
    if not c > 0:
        raise DomainError("c must be positive")
    ps = table.primes_upto(p_max)
    if not ps.size:
        return GrReport(1.0, 0.0, 0.0, int(p_max))
    a2 = np.abs(spec.values_at(ps, np.ones_like(ps))) ** 2
    s = 2.0**r
    terms = c * s * np.log1p(-1.0 / ps) + np.log1p(s * a2 / ps)
    log_g = math.fsum(terms.tolist())
    P = float(ps[-1])
    top = ps > P / 2
    second = (c * s + s * s * float(np.mean(a2[top] ** 2))) / (2 * P * math.log(P))
    first = s * abs(float(np.mean(a2[top])) - c) * math.log(2)
    return GrReport(math.exp(log_g), log_g, second + first, int(p_max))


def rama_main_term(spec: MultiplicativeSpec, c: float, r: float, x: float, p_max: float, table: FactorTable) -> float:
    """(G_r(1) / Gamma(c 2^r + 1)) (log x)^(c 2^r)."""
    g = g_r_at_one(spec, c, r, p_max, table)
    k = c * 2.0**r
    return math.exp(g.log_value - math.lgamma(k + 1) + k * math.log(math.log(x)))


RAMA_COLUMNS = ("x", "sum", "main_term", "ratio", "coefficient")


def rama_scan(
    spec: MultiplicativeSpec, c: float, r: float, x_list: Sequence[float], table: FactorTable,
    p_max: float | None = None,
) -> ScanReport:
    """Squarefree sums against the predicted main term; coefficient = sum / (log x)^(c 2^r)."""
    rows = []
    k = c * 2.0**r
    for x in sorted(x_list):
        s = rama_partial_sum(spec, r, x, table)
        main = rama_main_term(spec, c, r, x, p_max or table.bound, table)
        rows.append({"x": int(x), "sum": s, "main_term": main, "ratio": s / main,
                     "coefficient": s / math.log(x) ** k})
    g = g_r_at_one(spec, c, r, p_max or table.bound, table)
    summary = {"G_r(1)": g.value, "predicted_coefficient": g.value / math.gamma(k + 1),
               "tail_estimate": g.tail_estimate}
    return ScanReport("rama", spec.name, RAMA_COLUMNS, rows,
                      ["main term omits the O((log x)^(c 2^r - 1)) correction"], summary)


QUARTIC_COLUMNS = ("x", "partial_sum", "increment")


def quartic_convergence_check(spec: MultiplicativeSpec, x_list: Sequence[float], table: FactorTable) -> ScanReport:
    """Partial sums of |a(p)|^4/p^2 at x_list and their increments."""
    xs = sorted(int(math.floor(x)) for x in x_list)
    rows, prev = [], 0.0
    if xs:
        ps = table.primes_upto(xs[-1])
        a4 = np.abs(spec.values_at(ps, np.ones_like(ps))) ** 4 / ps.astype(np.float64) ** 2
        for x in xs:
            k = int(np.searchsorted(ps, x, side="right"))
            s = math.fsum(a4[:k].tolist())
            rows.append({"x": x, "partial_sum": s, "increment": s - prev})
            prev = s
    incs = [row["increment"] for row in rows[1:]]
    shrinking = all(b <= a for a, b in zip(incs, incs[1:]))
    summary = {"converging": bool(shrinking), "last_increment": incs[-1] if incs else None}
    notes = [] if shrinking else ["increments do not shrink: the prime sum looks divergent"]
    return ScanReport("quartic", spec.name, QUARTIC_COLUMNS, rows, notes, summary)


PARTIAL_COLUMNS = ("M", "q", "partial_norm", "full_norm", "ratio")


def partial_sum_diagnostic(
    F: DirichletPolynomial, M_list: Sequence[int], q: float, cfg: SamplerConfig, table: FactorTable
) -> ScanReport:
    """Empirical ||S_M F||_q / ||F||_q from common torus samples; no pass rule."""
    full = torus_moments(F, [q], cfg, table)[0]
    rows = []
    for M in sorted(int(m) for m in M_list):
        part = torus_moments(partial_sum(F, M), [q], cfg, table)[0]
        rows.append({"M": M, "q": q, "partial_norm": part.value, "full_norm": full.value,
                     "ratio": part.value / full.value if full.value else math.nan})
    return ScanReport("partial-sum", None, PARTIAL_COLUMNS, rows, ["diagnostic only"], {})


UPPER_REAL_COLUMNS = ("q", "N", "lhs", "estimate", "std_error", "ratio")


def upper_real_scan(
    F: DirichletPolynomial, q_list: Sequence[float], cfg: SamplerConfig, table: FactorTable
) -> ScanReport:
    """(sum |a_n|^2 d(n)^(log2 q - 1))^(1/2) against sampled ||F||_q for real q > 2."""
    for q in q_list:
        if not q > 2:
            raise DomainError("the real-exponent scan needs q > 2")
    _check_support(F, table)
    ests = torus_moments(F, list(q_list), cfg, table)
    rows = []
    for q, e in zip(q_list, ests):
        d = table.divisors[F.ns].astype(np.float64)
        lhs = math.sqrt(math.fsum(F.abs2() * d ** (math.log2(q) - 1)))
        rows.append({"q": float(q), "N": F.N, "lhs": lhs, "estimate": e.value,
                     "std_error": e.std_error, "ratio": e.value / lhs if lhs else math.nan})
    return ScanReport("upper-real", None, UPPER_REAL_COLUMNS, rows,
                      ["conjectural: the inequality is only known for q = 2^j"], {})
