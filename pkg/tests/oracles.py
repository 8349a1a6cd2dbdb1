"""Brute-force reference implementations used only by the tests."""

import itertools
import math

import numpy as np


def rotations(code, P):
    """All P circular rotations, built from the bit string."""
    bits = format(code, f"0{P}b")
    return [int(bits[-s:] + bits[:-s], 2) if s else code for s in range(P)]


def transitions(code, P):
    bits = format(code, f"0{P}b")
    return sum(bits[i] != bits[i - 1] for i in range(P))


def dual_objective(alpha, y, K):
    Q = np.outer(y, y) * K
    return 0.5 * alpha @ Q @ alpha - alpha.sum()


def qp_oracle(K, y, C):
    """Exact minimum of the SVM dual by enumerating active sets.

    Each coefficient is pinned at 0, pinned at C or left free; the free block
    is solved from its KKT system under the equality constraint. Feasible
    candidates are compared and the smallest objective returned.
    """
    y = np.asarray(y, dtype=float)
    n = y.size
    Q = np.outer(y, y) * K
    best = (math.inf, None)
    for states in itertools.product((0, 1, 2), repeat=n):
        alpha = np.zeros(n)
        free = [i for i, s in enumerate(states) if s == 2]
        bound = [i for i, s in enumerate(states) if s != 2]
        for i in bound:
            alpha[i] = C if states[i] == 1 else 0.0
        if free:
            f = np.array(free)
            b = np.array(bound, dtype=int)
            m = len(f)
            A = np.zeros((m + 1, m + 1))
            A[:m, :m] = Q[np.ix_(f, f)]
            A[:m, m] = y[f]
            A[m, :m] = y[f]
            rhs = np.zeros(m + 1)
            rhs[:m] = 1.0 - (Q[np.ix_(f, b)] @ alpha[b] if b.size else 0.0)
            rhs[m] = -(y[b] @ alpha[b]) if b.size else 0.0
            sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
            if not np.allclose(A @ sol, rhs, atol=1e-9):
                continue
            alpha[f] = sol[:m]
        if abs(y @ alpha) > 1e-9 or alpha.min() < -1e-12 or alpha.max() > C + 1e-12:
            continue
        obj = dual_objective(alpha, y, K)
        if obj < best[0]:
            best = (obj, alpha.copy())
    return best


def log_density_product(x, mu, sigma, prior):
    """log(prior * prod of normal densities), evaluated as a raw product."""
    prod = prior
    for xi, mi, si in zip(x, mu, sigma):
        prod *= math.exp(-((xi - mi) ** 2) / (2 * si * si)) / (math.sqrt(2 * math.pi) * si)
    return math.log(prod)


def numeric_gradient(f, param, step=1e-5):
    grad = np.zeros_like(param)
    it = np.nditer(param, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = param[idx]
        param[idx] = orig + step
        plus = f()
        param[idx] = orig - step
        minus = f()
        param[idx] = orig
        grad[idx] = (plus - minus) / (2 * step)
    return grad
