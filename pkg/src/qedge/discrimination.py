"""Per-block and total edge-detection success probabilities.

Both scenarios (unknown-unknown, known-unknown) reduce to pure-state
discrimination on Gram blocks.  The square-root measurement needs no
optimization: its joint success probability on a block is the sum of squared
diagonal entries of sqrt(G).  The optimal value is the block SDP optimum.
Totals sum the joint block values over all outcomes of the first measurement.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .combinatorics import CapacityError, StringParams
from .gram import SemiseparableGram, build_gram_known, build_gram_unknown
from .linalg import SdpSolution, psd_sqrt, solve_discrimination_sdp

__all__ = [
    "CurvePoint",
    "DiscriminationResult",
    "SDP_MAX_PARTICLES",
    "SRM_MAX_PARTICLES",
    "ScenarioSpec",
    "optimal_block",
    "scenario_blocks",
    "srm_block",
    "success_curve",
    "total_success",
]

SDP_MAX_PARTICLES = 64
SRM_MAX_PARTICLES = 1000

_SCENARIOS = ("unknown", "known")
_METHODS = ("srm", "sdp")


@dataclass(frozen=True)
class ScenarioSpec:
    """One curve point request: scenario, string parameters, and method."""

    scenario: str
    params: StringParams
    method: str

    def __post_init__(self) -> None:
        if self.scenario not in _SCENARIOS:
            raise ValueError(f"scenario must be one of {_SCENARIOS}, got {self.scenario!r}")
        if self.method not in _METHODS:
            raise ValueError(f"method must be one of {_METHODS}, got {self.method!r}")


@dataclass
class DiscriminationResult:
    """Joint per-block success probabilities and their total."""

    per_block: dict[int, float]
    total: float
    certificates: Optional[dict[int, SdpSolution]] = field(default=None, repr=False)


def scenario_blocks(scenario: str, params: StringParams) -> list[tuple[int, SemiseparableGram]]:
    """(label, gram) pairs for a scenario.

    Unknown-unknown blocks are labeled by the irrep lam; known-unknown blocks
    by the excitation count n1 = N - ntilde0 for qubits and by ntilde0 for
    d > 2.
    """
    N, d = params.N, params.d
    if scenario == "unknown":
        return [(lam, build_gram_unknown(N, d, lam)) for lam in range(N // 2 + 1)]
    pairs = []
    for ntilde0 in range(N + 1):
        g = build_gram_known(N, d, ntilde0)
        label = g.block.n1 if d == 2 else ntilde0
        pairs.append((label, g))
    return pairs


def _degenerate_label(g: SemiseparableGram) -> bool:
    """Blocks whose states coincide (all pairwise overlaps 1)."""
    block = g.block
    if hasattr(block, "lam"):
        return block.lam == 0
    return block.excitations == 0


def srm_block(g: SemiseparableGram) -> float:
    """Square-root-measurement joint success: sum of squared diagonal entries of sqrt(G)."""
    root = psd_sqrt(g.dense)
    return float(np.sum(np.diag(root) ** 2))


def optimal_block(g: SemiseparableGram, gap_tol: float = 1e-8) -> tuple[float, SdpSolution]:
    """Optimal joint success of one block together with its SDP certificate.

    Identical-states blocks short-circuit to the largest prior.  The reported
    value is floored at the SRM value (itself a feasible POVM), so it never
    drops below the SRM by solver tolerance.
    """
    if _degenerate_label(g):
        eta = np.asarray(g.block.priors)
        k_star = int(np.argmax(eta))
        n = g.order
        primal = [np.zeros((n, n)) for _ in range(n)]
        primal[k_star] = np.eye(n)
        w, v = np.linalg.eigh(g.dense)
        top = v[:, -1:]
        val = float(eta[k_star])
        sol = SdpSolution(primal=primal, dual=val * (top @ top.T), primal_value=val,
                          dual_value=val, gap=0.0, iterations=0, status="converged")
        return val, sol
    root = psd_sqrt(g.dense)
    try:
        sol = solve_discrimination_sdp(root, gap_tol=gap_tol)
    except Exception as exc:  # attach the block label
        raise RuntimeError(f"SDP failed on block {g.block}: {exc}") from exc
    if sol.status == "numericalFailure":
        raise RuntimeError(f"SDP numerical failure on block {g.block}")
    srm_val = float(np.sum(np.diag(root) ** 2))
    if srm_val > sol.primal_value:
        # SRM POVM ([E_k]_ii' = delta_ki delta_ki') is feasible and better here
        n = g.order
        primal = []
        for k in range(n):
            e = np.zeros((n, n))
            e[k, k] = 1.0
            primal.append(e)
        sol = SdpSolution(primal=primal, dual=sol.dual, primal_value=srm_val,
                          dual_value=sol.dual_value, gap=sol.dual_value - srm_val,
                          iterations=sol.iterations, status=sol.status)
    return sol.primal_value, sol


def total_success(
    spec: ScenarioSpec, gap_tol: float = 1e-8, capacity: Optional[int] = None
) -> DiscriminationResult:
    """Total average success probability of the scenario at its spec's method.

    ``capacity`` overrides the default particle-count cap (SDP 64, SRM 1000).
    """
    N = spec.params.N
    cap = capacity if capacity is not None else (
        SRM_MAX_PARTICLES if spec.method == "srm" else SDP_MAX_PARTICLES
    )
    if N > cap:
        raise CapacityError(f"method {spec.method!r} capped at N <= {cap}, got {N}")
    per_block: dict[int, float] = {}
    certificates: dict[int, SdpSolution] = {}
    for label, g in scenario_blocks(spec.scenario, spec.params):
        if spec.method == "srm":
            per_block[label] = srm_block(g)
        else:
            val, sol = optimal_block(g, gap_tol=gap_tol)
            per_block[label] = val
            certificates[label] = sol
    total = float(sum(per_block.values()))
    return DiscriminationResult(
        per_block=per_block,
        total=total,
        certificates=certificates if spec.method == "sdp" else None,
    )


@dataclass(frozen=True)
class CurvePoint:
    """One row of a success-probability sweep.

    ``gap`` is the worst per-block duality gap (0 for SRM rows) and
    ``iterations`` the largest per-block Newton count, for diagnostics.
    """

    N: int
    d: int
    scenario: str
    method: str
    p_success: float
    gap: float
    status: str
    iterations: int = 0


def success_curve(
    scenario: str,
    d: int,
    n_values: list[int],
    method: str,
    gap_tol: float = 1e-8,
    threads: int = 1,
) -> list[CurvePoint]:
    """Success probability for each N in ascending n_values; failures are recorded per row."""
    if sorted(n_values) != list(n_values):
        raise ValueError("n_values must be sorted ascending")

    def one(n: int) -> CurvePoint:
        try:
            res = total_success(ScenarioSpec(scenario, StringParams(n, d), method), gap_tol)
        except Exception as exc:
            return CurvePoint(n, d, scenario, method, float("nan"), float("nan"),
                              f"error:{type(exc).__name__}")
        gap = 0.0
        iterations = 0
        if res.certificates:
            gap = max(sol.gap for sol in res.certificates.values())
            iterations = max(sol.iterations for sol in res.certificates.values())
        return CurvePoint(n, d, scenario, method, res.total, gap, "ok", iterations)

    if threads > 1 and len(n_values) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, n_values))
    return [one(n) for n in n_values]
