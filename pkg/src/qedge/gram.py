"""Closed-form Gram matrices of the edge-detection hypothesis states.

Every block (irrep lam in the unknown-unknown scenario, particle count
ntilde0 in state |0> in the known-unknown scenario) yields a semiseparable
Gram matrix G[k,k'] = v_k u_k' for k <= k', with the joint priors folded in.
The inverse of the rescaled matrix is tridiagonal, and its entries are known
in closed form; `tridiag_inverse_reference` reproduces them for verification
against dense inversion.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Union

import numpy as np

from .combinatorics import (
    IrrepBlock,
    StringParams,
    hypothesis_range,
    irrep_blocks,
    priors,
    sym_dim,
)

__all__ = [
    "KnownBlock",
    "SemiseparableGram",
    "build_gram_known",
    "build_gram_unknown",
    "dump_gram_csv",
    "known_blocks",
    "rescale_gram",
    "tridiag_inverse_reference",
]


@dataclass(frozen=True)
class KnownBlock:
    """Known-unknown sub-problem after counting ntilde0 particles in |0>.

    ``excitations`` = N - ntilde0 is the number of particles outside |0>
    (equal to n_1 for qubits).  Hypotheses are k in {max(excitations,1)..N}
    with priors binom(excitations+d-2, d-2) / (N d^sym_k).
    """

    params: StringParams
    ntilde0: int
    k_range: range = field(repr=False)
    priors: tuple[float, ...] = field(repr=False)

    @property
    def excitations(self) -> int:
        return self.params.N - self.ntilde0

    @property
    def n1(self) -> int:
        return self.excitations

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(self.k_range)

    def priors_exact(self) -> list[tuple[int, Fraction]]:
        N, d = self.params.N, self.params.d
        mult = math.comb(self.excitations + d - 2, d - 2)
        return [(k, Fraction(mult, N * sym_dim(k, d))) for k in self.k_range]


def known_blocks(params: StringParams) -> list[KnownBlock]:
    """All known-unknown blocks, ntilde0 = 0..N."""
    out = []
    for ntilde0 in range(params.N + 1):
        e = params.N - ntilde0
        k_range = range(max(e, 1), params.N + 1)
        mult = math.comb(e + params.d - 2, params.d - 2)
        pri = tuple(float(Fraction(mult, params.N * sym_dim(k, params.d))) for k in k_range)
        out.append(KnownBlock(params=params, ntilde0=ntilde0, k_range=k_range, priors=pri))
    return out


@dataclass(frozen=True)
class SemiseparableGram:
    """Dense Gram matrix together with its semiseparable generators.

    dense[i, j] = v[i] * u[j] for i <= j (and symmetrically below), where the
    index i runs over the block's hypothesis labels in ascending order.
    """

    block: Union[IrrepBlock, KnownBlock]
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    dense: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.dense.shape[0]

    @property
    def labels(self) -> tuple[int, ...]:
        return self.block.labels

    @property
    def trace(self) -> float:
        return float(np.trace(self.dense))


def _assemble(block, eta: list[Fraction], ratio: list[Fraction]) -> SemiseparableGram:
    """Build generators u = sqrt(eta*ratio), v = sqrt(eta/ratio) and the dense matrix.

    ratio_k is u_k^2 / eta_k; entries v_i u_j are all <= sqrt(eta_i eta_j)
    even when individual generators span a huge dynamic range, so the dense
    matrix is assembled from log-generators if float conversion overflows.
    """
    try:
        u = np.array([math.sqrt(float(e * r)) for e, r in zip(eta, ratio)])
        v = np.array([math.sqrt(float(e / r)) for e, r in zip(eta, ratio)])
        overflow = False
    except OverflowError:
        overflow = True
    if (
        not overflow
        and np.all(np.isfinite(u))
        and np.all(np.isfinite(v))
        and u.min() > 0
        and v.min() > 0
    ):
        upper = np.triu(np.outer(v, u))
        dense = upper + np.triu(upper, 1).T
        return SemiseparableGram(block=block, u=u, v=v, dense=dense)
    # exact-integer logs: log u = (log(eta*ratio))/2, entries exp(lv_i + lu_j)
    lu = np.array(
        [0.5 * (_log_fraction(e) + _log_fraction(r)) for e, r in zip(eta, ratio)]
    )
    lv = np.array(
        [0.5 * (_log_fraction(e) - _log_fraction(r)) for e, r in zip(eta, ratio)]
    )
    upper = np.triu(np.exp(lv[:, None] + lu[None, :]))
    dense = upper + np.triu(upper, 1).T
    with np.errstate(over="ignore", under="ignore"):
        u = np.exp(lu)
        v = np.exp(lv)
    return SemiseparableGram(block=block, u=u, v=v, dense=dense)


def _log_fraction(x: Fraction) -> float:
    return math.log(x.numerator) - math.log(x.denominator)


def build_gram_unknown(N: int, d: int, lam: int) -> SemiseparableGram:
    """Gram matrix of the unknown-unknown block (N, d, lam).

    Entries sqrt(eta^lam_k eta^lam_k') <Omega^lam_k|Omega^lam_k'> with
    generators u_k = sqrt(eta binom(N-k,lam)/binom(k,lam)) and v_k its mirror.
    """
    pri = priors(N, d, lam)
    block = IrrepBlock(
        params=StringParams(N, d),
        lam=lam,
        k_range=hypothesis_range(N, lam),
        priors=tuple(float(p) for _, p in pri),
    )
    eta = [p for _, p in pri]
    ratio = [Fraction(math.comb(N - k, lam), math.comb(k, lam)) for k, _ in pri]
    return _assemble(block, eta, ratio)


def build_gram_known(N: int, d: int, ntilde0: int) -> SemiseparableGram:
    """Gram matrix of the known-unknown block with ntilde0 particles in |0>.

    Entries mult * sqrt(eta_k eta_k') * sqrt(binom(k,e)/binom(k',e)) for
    k <= k', where e = N - ntilde0, mult = binom(e+d-2, d-2) counts the
    aggregated excitation splits and eta_k = 1/(N d^sym_k).  The multiplicity
    is folded into the priors, so the diagonal equals mult/(N d^sym_k) and
    the priors over all blocks sum to 1.
    """
    if not 0 <= ntilde0 <= N:
        raise ValueError(f"ntilde0 must be in 0..N, got {ntilde0}")
    params = StringParams(N, d)
    e = N - ntilde0
    k_range = range(max(e, 1), N + 1)
    mult = math.comb(e + d - 2, d - 2)
    eta = [Fraction(mult, N * sym_dim(k, d)) for k in k_range]
    block = KnownBlock(
        params=params,
        ntilde0=ntilde0,
        k_range=k_range,
        priors=tuple(float(p) for p in eta),
    )
    ratio = [Fraction(1, math.comb(k, e)) for k in k_range]
    return _assemble(block, eta, ratio)


def rescale_gram(g: SemiseparableGram) -> SemiseparableGram:
    """Rescaled matrix G~ = [(N/2)^2 / ((d-1)(2j+1))] G of an unknown-unknown block.

    For d = 2 the prefactor reduces to (N/2)^2/(N-2lam+1).  N times this
    matrix tends to the identity entrywise as N grows at fixed j, and its
    inverse is tridiagonal with the closed-form entries of
    `tridiag_inverse_reference`.
    """
    block = g.block
    if not isinstance(block, IrrepBlock):
        raise ValueError("rescale_gram applies to unknown-unknown blocks only")
    N, d = block.params.N, block.params.d
    pref = (N / 2) ** 2 / ((d - 1) * (2 * block.j + 1))
    s = math.sqrt(pref)
    return SemiseparableGram(block=block, u=g.u * s, v=g.v * s, dense=g.dense * pref)


def tridiag_inverse_reference(N: int, d: int, j: Union[int, float, Fraction]) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form diagonal and super-diagonal of the inverse of `rescale_gram`'s output.

    Sequences are indexed by m = -j..j (diagonal) and m = -j..j-1
    (super-diagonal); both are invariant under index reversal, matching the
    persymmetry of the block.  The prior convention folds a uniform 1/N into
    the Gram entries, which scales the whole inverse by N relative to the
    bare closed forms.
    """
    jf = Fraction(j).limit_denominator(2)
    if 2 * jf != int(2 * jf):
        raise ValueError(f"j must be integer or half-integer, got {j}")
    h = Fraction(N, 2)
    lam = h - jf
    if lam != int(lam) or not 0 <= int(lam) <= N // 2:
        raise ValueError(f"j={j} does not label an irrep of N={N}")
    if int(lam) == 0:
        raise ValueError("lam = 0 block is rank deficient; its rescaled Gram is singular")

    def bfac(m: Fraction) -> Fraction:
        val = (1 + h + jf) / (h * h)
        val *= Fraction(
            _f(h - jf) * _f(h + jf),
            _f(h - jf + d - 2) * _f(h + jf + d - 1),
        )
        val *= Fraction(
            _f(h - m + d - 1) * _f(h + m + d - 1),
            _f(h - m) * _f(h + m),
        )
        return val

    den = (h - jf) * (h + jf + 1)
    ms = [-jf + i for i in range(int(2 * jf) + 1)]
    diag = np.array(
        [float(N * bfac(m) * (jf * (jf + 1) + h * (h + 1) - 2 * m * m) / den) for m in ms]
    )
    sup = np.array(
        [
            -N
            * math.sqrt(float(bfac(m) * bfac(m + 1)))
            * math.sqrt(float((h - m) * (h + m + 1) * (jf - m) * (jf + m + 1)))
            / float(den)
            for m in ms[:-1]
        ]
    )
    return diag, sup


def _f(x: Fraction) -> int:
    if x != int(x) or x < 0:
        raise ValueError(f"factorial argument must be a nonnegative integer, got {x}")
    return math.factorial(int(x))


def dump_gram_csv(g: SemiseparableGram, stream: IO[str]) -> None:
    """Write the dense block as CSV with hypothesis labels as row/col headers."""
    labels = g.labels
    stream.write("k," + ",".join(str(k) for k in labels) + "\n")
    for i, k in enumerate(labels):
        row = ",".join(format(g.dense[i, jj], ".12g") for jj in range(g.order))
        stream.write(f"{k},{row}\n")
