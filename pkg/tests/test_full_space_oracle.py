"""End-to-end checks against brute-force computations in the full 2^N space.

The Gram pipeline condenses the effective string states into per-block
matrices.  These tests rebuild the actual density matrices on (C^2)^(x N),
apply the pretty-good measurement (or an independent SDP solver) directly,
and compare totals.  The pretty-good measurement of a direct sum decomposes
blockwise, so the full-space value must equal the summed block values.
"""

import itertools
import math

import numpy as np
import pytest

from qedge import ScenarioSpec, StringParams, total_success


def symmetric_projector(n: int) -> np.ndarray:
    """Projector onto the symmetric subspace of n qubits."""
    dim = 2**n
    proj = np.zeros((dim, dim))
    for perm in itertools.permutations(range(n)):
        mat = np.zeros((dim, dim))
        for idx in range(dim):
            bits = [(idx >> (n - 1 - pos)) & 1 for pos in range(n)]
            permuted = 0
            for pos in range(n):
                permuted = (permuted << 1) | bits[perm[pos]]
            mat[permuted, idx] = 1.0
        proj += mat
    return proj / math.factorial(n)


def effective_state_unknown(n: int, k: int) -> np.ndarray:
    """rho_k = P^sym_(n-k) (x) P^sym_k / (d^sym_(n-k) d^sym_k) for qubits."""
    left = symmetric_projector(n - k) if n - k else np.ones((1, 1))
    right = symmetric_projector(k)
    rho = np.kron(left, right)
    return rho / ((n - k + 1) * (k + 1))


def effective_state_known(n: int, k: int) -> np.ndarray:
    """rho_k = |0..0><0..0| (x) P^sym_k / d^sym_k for qubits."""
    dim_left = 2 ** (n - k)
    left = np.zeros((dim_left, dim_left))
    left[0, 0] = 1.0
    return np.kron(left, symmetric_projector(k)) / (k + 1)


def pgm_success(states: list[np.ndarray], priors: list[float]) -> float:
    """Pretty-good-measurement success probability for weighted mixed states."""
    weighted = [p * s for p, s in zip(priors, states)]
    lam = np.sum(weighted, axis=0)
    w, v = np.linalg.eigh(lam)
    inv_sqrt = (v / np.sqrt(np.where(w > 1e-12 * w[-1], w, np.inf))) @ v.T
    total = 0.0
    for rho in weighted:
        e = inv_sqrt @ rho @ inv_sqrt
        total += float(np.sum(e * rho))
    return total


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_unknown_srm_total_matches_full_space_pgm(n):
    states = [effective_state_unknown(n, k) for k in range(1, n + 1)]
    direct = pgm_success(states, [1.0 / n] * n)
    block = total_success(ScenarioSpec("unknown", StringParams(n, 2), "srm")).total
    assert block == pytest.approx(direct, abs=1e-10)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_known_srm_total_matches_full_space_pgm(n):
    states = [effective_state_known(n, k) for k in range(1, n + 1)]
    direct = pgm_success(states, [1.0 / n] * n)
    block = total_success(ScenarioSpec("known", StringParams(n, 2), "srm")).total
    assert block == pytest.approx(direct, abs=1e-10)


@pytest.mark.parametrize("scenario,n", [("unknown", 3), ("unknown", 4), ("known", 3)])
def test_sdp_total_matches_full_space_solver(scenario, n):
    cp = pytest.importorskip("cvxpy")
    builder = effective_state_unknown if scenario == "unknown" else effective_state_known
    states = [builder(n, k) / n for k in range(1, n + 1)]
    dim = states[0].shape[0]
    povm = [cp.Variable((dim, dim), symmetric=True) for _ in range(n)]
    constraints = [e >> 0 for e in povm]
    constraints.append(cp.sum(povm) == np.eye(dim))
    objective = cp.Maximize(sum(cp.trace(e @ s) for e, s in zip(povm, states)))
    problem = cp.Problem(objective, constraints)
    problem.solve(solver=cp.SCS, eps=1e-9)
    block = total_success(ScenarioSpec(scenario, StringParams(n, 2), "sdp")).total
    assert block == pytest.approx(problem.value, abs=5e-6)
