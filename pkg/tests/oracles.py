"""Independent numerical oracles used by the test suite.

Everything here is deliberately dumb: finite differences, discretized
path lengths, brute-force sums.  The oracles share no code with the
analytic implementations they check.
"""

import numpy as np

from latticeym.groups import exp_map, log_map, orthonormal_basis


def directional_derivative(f, cfg, edge_idx, x, eps=1e-4):
    """Central difference of f(cfg) along exp(t x) applied at one edge."""
    up = cfg.copy()
    dn = cfg.copy()
    up[edge_idx] = exp_map(eps * x) @ cfg[edge_idx]
    dn[edge_idx] = exp_map(-eps * x) @ cfg[edge_idx]
    return (f(up) - f(dn)) / (2.0 * eps)


def second_derivative(f, cfg, edge_idx, x, eps=1e-3):
    """Second central difference of f along exp(t x) at one edge."""
    up = cfg.copy()
    dn = cfg.copy()
    up[edge_idx] = exp_map(eps * x) @ cfg[edge_idx]
    dn[edge_idx] = exp_map(-eps * x) @ cfg[edge_idx]
    return (f(up) - 2.0 * f(cfg) + f(dn)) / eps**2


def mixed_second_derivative(f, cfg, tangent, eps=1e-3):
    """Second difference of f along the multi-edge tangent assignment."""
    up = cfg.copy()
    dn = cfg.copy()
    for i in range(cfg.shape[0]):
        up[i] = exp_map(eps * tangent[i]) @ cfg[i]
        dn[i] = exp_map(-eps * tangent[i]) @ cfg[i]
    return (f(up) - 2.0 * f(cfg) + f(dn)) / eps**2


def path_length(q1, q2, n_subdiv=10**4):
    """Length of the one-parameter path exp(t log(q2 q1*)) q1 by chords."""
    x = log_map(q2 @ q1.conj().T)
    ts = np.linspace(0.0, 1.0, n_subdiv + 1)
    pts = exp_map(ts[:, None, None] * x) @ q1
    chords = np.linalg.norm(np.diff(pts, axis=0), axis=(1, 2))
    return float(chords.sum())


def laplace_beltrami(f, cfg, spec, eps=1e-3):
    """Sum over edges and basis directions of second differences of f."""
    basis = orthonormal_basis(spec)
    total = 0.0
    for i in range(cfg.shape[0]):
        for t in basis:
            total += second_derivative(f, cfg, i, t, eps=eps)
    return total
