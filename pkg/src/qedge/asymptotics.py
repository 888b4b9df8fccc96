"""Large-N limits of the success probability and their special-function checks.

The leading-order joint probability admits an even-power series
(N/2)P(x) = sum_r a_r x^(2r) in the scaled spin x = 2j/N, with exact rational
coefficients shipped as a data asset for d in {2, 3, 4, 8}.  Pade acceleration
of that series (directly, or of its term-wise primitive) produces the
limiting success probability p0(d); the same limit follows independently from
the known-states change-point average, an integral of the squared complete
elliptic integral against the qudit overlap measure.  The N >> d >> 1 regime
is governed by Dawson's integral.
"""

from __future__ import annotations

import hashlib
import math
import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np
from scipy.integrate import quad

from .gram import build_gram_unknown
from .discrimination import srm_block

__all__ = [
    "BigRational",
    "CoefficientEstimate",
    "DegeneratePadeError",
    "LimitEstimate",
    "NotTabulatedError",
    "PadeApproximant",
    "RationalCoefficientTable",
    "TABULATED_DIMENSIONS",
    "coefficient_table",
    "dawson",
    "elliptic_k",
    "estimate_low_order_coeffs",
    "large_d_limit",
    "p0_known",
    "p0_via_integral",
    "p0_via_primitive",
    "pade",
]

BigRational = Fraction

TABULATED_DIMENSIONS = (2, 3, 4, 8)

_DATA_FILE = "maclaurin_coefficients.txt"
_DATA_ENV = "QEDGE_DATA_DIR"


class NotTabulatedError(ValueError):
    """No embedded coefficient table for this local dimension.

    `estimate_low_order_coeffs` still gives a numeric low-order estimate for
    any d; only the exact rational data is restricted to d in {2, 3, 4, 8}.
    """


class DegeneratePadeError(ArithmeticError):
    """The Pade matching system is singular at the requested order."""


@dataclass(frozen=True)
class RationalCoefficientTable:
    """Exact series coefficients a_1..a_R for one local dimension."""

    d: int
    coeffs: tuple[Fraction, ...]

    def __len__(self) -> int:
        return len(self.coeffs)

    def series_in_z(self) -> list[Fraction]:
        """Coefficients of sum_r a_r z^r as a plain list [0, a_1, ..., a_R], z = x^2."""
        return [Fraction(0), *self.coeffs]


_TABLE_CACHE: dict[Path, dict[int, RationalCoefficientTable]] = {}


def _data_path() -> Path:
    override = os.environ.get(_DATA_ENV)
    if override:
        return Path(override) / _DATA_FILE
    return Path(resources.files("qedge").joinpath("_data", _DATA_FILE))


def _load_tables() -> dict[int, RationalCoefficientTable]:
    path = _data_path()
    if path in _TABLE_CACHE:
        return _TABLE_CACHE[path]
    text = path.read_text()
    payload_lines = []
    checksum = None
    for line in text.splitlines():
        if line.startswith("# sha256:"):
            checksum = line.split(":", 1)[1].strip()
        elif line.startswith("#") or not line.strip():
            continue
        else:
            payload_lines.append(line)
    payload = "\n".join(payload_lines) + "\n"
    digest = hashlib.sha256(payload.encode()).hexdigest()
    if checksum is None or digest != checksum:
        raise ValueError(f"coefficient asset checksum mismatch ({digest} != {checksum})")
    raw: dict[int, dict[int, Fraction]] = {}
    for line in payload_lines:
        d_str, r_str, num, den = line.split(",")
        raw.setdefault(int(d_str), {})[int(r_str)] = Fraction(int(num), int(den))
    tables: dict[int, RationalCoefficientTable] = {}
    for d, entries in raw.items():
        rs = sorted(entries)
        if rs != list(range(1, len(rs) + 1)):
            raise ValueError(f"coefficient asset rows for d={d} are not contiguous")
        tables[d] = RationalCoefficientTable(d=d, coeffs=tuple(entries[r] for r in rs))
    _TABLE_CACHE[path] = tables
    return tables


def coefficient_table(d: int) -> RationalCoefficientTable:
    """Embedded exact coefficients a_r for d in {2, 3, 4, 8}."""
    tables = _load_tables()
    if d not in tables:
        raise NotTabulatedError(
            f"no embedded coefficients for d={d} (available: {sorted(tables)}); "
            "use estimate_low_order_coeffs for a numeric low-order estimate"
        )
    return tables[d]


@dataclass(frozen=True)
class PadeApproximant:
    """Rational function [n/m] in one variable with exact coefficients.

    ``numer``/``denom`` hold A_0..A_n and B_1..B_m (denominator constant term
    is 1).  ``defects`` lists real denominator roots found in [0, 1 + 1e-6];
    accepted approximants have none.
    """

    order: tuple[int, int]
    numer: tuple[Fraction, ...]
    denom: tuple[Fraction, ...]
    defects: tuple[float, ...] = ()

    def __call__(self, z: float) -> float:
        num = 0.0
        for a in reversed(self.numer):
            num = num * z + float(a)
        den = 0.0
        for b in reversed((Fraction(1), *self.denom)):
            den = den * z + float(b)
        return num / den

    def expansion(self, upto: int) -> list[Fraction]:
        """Maclaurin coefficients of numer/denom through order ``upto``."""
        out: list[Fraction] = []
        for s in range(upto + 1):
            acc = self.numer[s] if s <= self.order[0] else Fraction(0)
            for q in range(1, min(len(self.denom), s) + 1):
                acc -= self.denom[q - 1] * out[s - q]
            out.append(acc)
        return out


def pade(series: list[Fraction], n: int, m: int) -> PadeApproximant:
    """Pade approximant [n/m] of a Maclaurin series, solved in exact rationals.

    ``series`` lists the coefficients of z^0, z^1, ... and must reach order
    n + m.  The re-expansion of the result is checked coefficient by
    coefficient; a singular matching system raises DegeneratePadeError.
    """
    series = [Fraction(c) for c in series]
    if len(series) < n + m + 1:
        raise ValueError(f"series must reach order n+m={n+m}, got {len(series) - 1}")
    if m == 0:
        denom: tuple[Fraction, ...] = ()
        numer = tuple(series[: n + 1])
    else:
        aug = [
            [series[s - q] if s - q >= 0 else Fraction(0) for q in range(1, m + 1)]
            + [-series[s]]
            for s in range(n + 1, n + m + 1)
        ]
        bcoef = _solve_exact(aug)
        if bcoef is None:
            raise DegeneratePadeError(f"singular Pade system at order [{n}/{m}]")
        denom = tuple(bcoef)
        numer = tuple(
            series[s] + sum(denom[q - 1] * series[s - q] for q in range(1, min(m, s) + 1))
            for s in range(n + 1)
        )
    approx = PadeApproximant(order=(n, m), numer=numer, denom=denom,
                             defects=_denominator_roots(denom))
    for ours, theirs in zip(approx.expansion(n + m), series):
        if ours != theirs:
            raise DegeneratePadeError(f"re-expansion mismatch at order [{n}/{m}]")
    return approx


def _solve_exact(aug: list[list[Fraction]]) -> list[Fraction] | None:
    """Gaussian elimination over the rationals; None if singular."""
    size = len(aug)
    for col in range(size):
        piv = next((r for r in range(col, size) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for r in range(size):
            if r != col and aug[r][col] != 0:
                factor = aug[r][col]
                aug[r] = [x - factor * y for x, y in zip(aug[r], aug[col])]
    return [aug[r][size] for r in range(size)]


def _denominator_roots(denom: tuple[Fraction, ...], hi: float = 1.0 + 1e-6) -> tuple[float, ...]:
    """Real roots of 1 + sum B_q z^q inside [0, hi], by sign scan plus polynomial roots."""
    if not denom:
        return ()

    def val(z: float) -> float:
        acc = 0.0
        for b in reversed(denom):
            acc = acc * z + float(b)
        return acc * z + 1.0

    candidates = []
    roots = np.roots([float(b) for b in denom[::-1]] + [1.0])
    for root in roots:
        if abs(root.imag) < 1e-9 and -1e-12 <= root.real <= hi:
            candidates.append(float(root.real))
    grid = np.linspace(0.0, hi, 4097)
    vals = np.array([val(z) for z in grid])
    for i in np.nonzero(vals[:-1] * vals[1:] <= 0)[0]:
        lo, up = float(grid[i]), float(grid[i + 1])
        for _ in range(60):   # bisection
            mid = 0.5 * (lo + up)
            if val(lo) * val(mid) <= 0:
                up = mid
            else:
                lo = mid
        candidates.append(0.5 * (lo + up))
    out: list[float] = []
    for z in sorted(candidates):
        if not out or z - out[-1] > 1e-9:
            out.append(z)
    return tuple(out)


@dataclass(frozen=True)
class LimitEstimate:
    """A limiting-probability estimate with its spread-based error estimate."""

    value: float
    error: float
    order: tuple[int, int]


def _accepted_diagonals(table: RationalCoefficientTable, count: int = 2) -> list[PadeApproximant]:
    """Highest defect-free diagonal approximants [s/s] in z = x^2, descending order."""
    series = table.series_in_z()
    out: list[PadeApproximant] = []
    for s in range(len(table) // 2, 0, -1):
        try:
            approx = pade(series, s, s)
        except DegeneratePadeError:
            continue
        if approx.defects:
            continue
        out.append(approx)
        if len(out) == count:
            break
    if not out:
        raise DegeneratePadeError(f"all diagonal Pade orders defective for d={table.d}")
    return out


def p0_via_integral(d: int) -> LimitEstimate:
    """Limiting success probability as the integral over x in [0,1] of the highest
    accepted diagonal Pade of (N/2)P(x); error = spread to the next accepted order."""
    table = coefficient_table(d)
    accepted = _accepted_diagonals(table, count=2)
    vals = [
        quad(lambda x, a=a: a(x * x), 0.0, 1.0, epsabs=1e-10, epsrel=1e-12, limit=200)[0]
        for a in accepted
    ]
    err = abs(vals[0] - vals[1]) if len(vals) > 1 else float("nan")
    return LimitEstimate(value=vals[0], error=err, order=accepted[0].order)


def p0_via_primitive(d: int) -> LimitEstimate:
    """Limiting success probability as Q(1) for the primitive Q(x) = sum a_r x^(2r+1)/(2r+1),
    evaluated through the highest accepted off-diagonal Pade of Q(x)/x in z = x^2."""
    table = coefficient_table(d)
    gseries = [table.coeffs[r - 1] / (2 * r + 1) for r in range(1, len(table) + 1)]
    # interleaved sequence {Q^{2n-1}_{2n}, Q^{2n+1}_{2n}}: in z these are
    # [n-1/n] and [n/n] of Q/x; descending total order 4n+1, 4n-1, ...
    candidates: list[tuple[int, int]] = []
    for n in range((len(gseries) - 1) // 2, 0, -1):
        candidates.extend([(n, n), (n - 1, n)])
    accepted: list[tuple[tuple[int, int], float]] = []
    for nn, mm in candidates:
        if nn + mm + 1 > len(gseries):
            continue
        try:
            approx = pade(gseries, nn, mm)
        except DegeneratePadeError:
            continue
        if approx.defects:
            continue
        accepted.append(((nn, mm), approx(1.0)))
        if len(accepted) == 2:
            break
    if not accepted:
        raise DegeneratePadeError(f"all primitive-route Pade orders defective for d={d}")
    (order, value) = accepted[0]
    err = abs(value - accepted[1][1]) if len(accepted) > 1 else float("nan")
    # report the order of Q itself ([2n+1/2m] in x)
    return LimitEstimate(value=value, error=err, order=(2 * order[0] + 1, 2 * order[1]))


def elliptic_k(m: float) -> float:
    """Complete elliptic integral K(m), parameter convention, by AGM iteration."""
    if not 0.0 <= m < 1.0:
        raise ValueError(f"parameter must satisfy 0 <= m < 1, got {m}")
    return _elliptic_k_from_complement(1.0 - m)


def _elliptic_k_from_complement(mc: float) -> float:
    """K(1 - mc) from the complementary parameter, stable for tiny mc > 0."""
    a, b = 1.0, math.sqrt(mc)
    for _ in range(60):   # quadratic convergence; the cap guards ulp oscillation
        if abs(a - b) <= 1e-15 * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (a + b)


def p0_known(d: int) -> float:
    """Average limiting success probability when both domain states are known.

    Integral over t = c^2 of 4(1-t)/pi^2 K(t)^2 (d-1)(1-t)^(d-2); substituting
    t = 1 - exp(-s) removes the squared-log endpoint singularity at t = 1.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    prefactor = 4.0 * (d - 1) / math.pi**2

    def integrand(s: float) -> float:
        # complement exp(-s) is exact where 1 - exp(-s) would round to 1
        k = _elliptic_k_from_complement(math.exp(-s))
        return prefactor * k * k * math.exp(-d * s)

    upper = 60.0
    val = quad(integrand, 0.0, upper, epsabs=1e-12, epsrel=1e-12, limit=300)[0]
    return val


_DAWSON_H = 0.25


def dawson(y: float) -> float:
    """Dawson's integral F(y) = exp(-y^2) int_0^y exp(t^2) dt for y >= 0.

    Maclaurin series below y = 1; exponentially accurate odd-point sampling
    (error ~ exp(-(pi/2h)^2), far below 1e-12 at h = 0.25) above.
    """
    if y < 0:
        raise ValueError(f"y must be >= 0, got {y}")
    if y == 0.0:
        return 0.0
    if y <= 1.0:
        term = y
        total = y
        k = 0
        while abs(term) > 1e-18 * abs(total):
            k += 1
            term *= -2.0 * y * y / (2 * k + 1)
            total += term
        return total
    h = _DAWSON_H
    n0 = 2 * round(0.5 * y / h)
    total = 0.0
    for i in range(-40, 41):
        n = n0 + 2 * i + 1
        t = y - n * h
        if abs(t) < 36.0:
            total += math.exp(-t * t) / n
    return total / math.sqrt(math.pi)


def large_d_limit(d: int) -> float:
    """Leading large-d behavior 1 - 1/(2d) of the limiting success probability."""
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    return 1.0 - 1.0 / (2.0 * d)


@dataclass(frozen=True)
class CoefficientEstimate:
    """One numerically estimated series coefficient with an error bar."""

    r: int
    value: float
    error: float


_ESTIMATOR_N = (200, 400, 800, 1600)
_ESTIMATOR_X = (0.05, 0.10, 0.15, 0.20, 0.25, 0.30)


def estimate_low_order_coeffs(d: int, r_max: int = 3) -> list[CoefficientEstimate]:
    """Numeric estimate of a_1..a_r_max from finite-N square-root-measurement blocks.

    Evaluates (N/2) P_lam(x) on a fixed (N, x) grid, Richardson-extrapolates
    in 1/N (full Neville tableau over doubling N), and fits even powers of x
    with one guard term beyond r_max.  Error bars combine the fit's stability
    under dropping the smallest x with the last Richardson correction; they
    widen on extrapolation instability rather than failing silently.
    Accuracy is calibrated on the tabulated dimensions (a_3 within 1 percent)
    but the estimator runs for any d >= 2.
    """
    if d < 2:
        raise ValueError(f"d must be >= 2, got {d}")
    if not 1 <= r_max <= 3:
        raise ValueError(f"r_max must be in 1..3, got {r_max}")
    extrapolated = []
    last_correction = []
    for x in _ESTIMATOR_X:
        ys = []
        for n_val in _ESTIMATOR_N:
            j = round(x * n_val / 2)
            lam = n_val // 2 - j
            block = build_gram_unknown(n_val, d, lam)
            ys.append((n_val / 2) * srm_block(block))
        level = list(ys)
        factor = 2.0
        prev = level[-1]
        while len(level) > 1:
            level = [
                (factor * level[i + 1] - level[i]) / (factor - 1.0)
                for i in range(len(level) - 1)
            ]
            factor *= 2.0
        extrapolated.append(level[0])
        last_correction.append(abs(level[0] - prev))
    z = np.asarray(_ESTIMATOR_X, dtype=float) ** 2
    g = np.asarray(extrapolated) / z

    def fit(zz: np.ndarray, gg: np.ndarray, terms: int) -> np.ndarray:
        scale = zz.max()
        van = np.vander(zz / scale, terms, increasing=True)
        coef, *_ = np.linalg.lstsq(van, gg, rcond=None)
        return coef / scale ** np.arange(terms)

    terms = r_max + 1  # one guard term absorbs the next series order
    full = fit(z, g, terms)
    reduced = fit(z[1:], g[1:], terms)
    out = []
    for r in range(1, r_max + 1):
        spread = abs(full[r - 1] - reduced[r - 1])
        noise = max(last_correction) / z.min()
        out.append(CoefficientEstimate(r=r, value=float(full[r - 1]),
                                       error=float(spread + 1e-3 * noise)))
    return out
