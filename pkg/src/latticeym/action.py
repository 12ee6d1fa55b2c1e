"""Wilson action, coupling constants, drift, and the Hessian probe.

The action is ``S(Q) = N beta Re sum_p tr(Q_p)`` over positively oriented
plaquettes, with the 't Hooft normalization (N beta, not beta).  The
sampled measure is proportional to ``exp(S)`` times product Haar measure,
and the Langevin drift is the gradient of S in the bi-invariant metric.

Configurations are flat arrays of shape ``(..., E, n, n)`` in edge-index
order; leading axes are independent batch members.  Negative-orientation
edge matrices are formed on access as conjugate transposes, never stored.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .groups import GroupSpec, adjoint, haar_sample, orthonormal_basis
from .lattice import LatticeSpec, edge_index, plaquette_table, staple_table

__all__ = [
    "CouplingParams",
    "derive_constants",
    "tilde_k",
    "identity_configuration",
    "haar_configuration",
    "plaquette_holonomies",
    "action_value",
    "staple_sums",
    "drift_field",
    "drift_algebra",
    "hessian_quadratic_form",
]


@dataclass(frozen=True)
class CouplingParams:
    """Structure group, inverse-coupling beta, and lattice dimension.

    Derived quantities implement the strong-coupling admissibility
    arithmetic: ``k_s`` is the Bakry-Emery curvature constant (Ricci minus
    the Hessian bound) and ``beta_threshold`` the largest |beta| with
    ``k_s > 0``.  Admissibility is a strict inequality with no epsilon.
    """

    group: GroupSpec
    beta: float
    d: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"dimension must be > 1, got {self.d}")

    @property
    def k_s(self) -> float:
        n = self.group.n
        base = (n + 2) / 4.0 - 1.0 if self.group.kind == "SO" else (n + 2) / 2.0 - 1.0
        return base - 8.0 * n * abs(self.beta) * (self.d - 1)

    @property
    def beta_threshold(self) -> float:
        n, dm1 = self.group.n, self.d - 1
        if self.group.kind == "SO":
            return 1.0 / (32.0 * dm1) - 1.0 / (16.0 * n * dm1)
        return 1.0 / (16.0 * dm1)

    @property
    def admissible(self) -> bool:
        return self.k_s > 0.0


def derive_constants(group: GroupSpec, beta: float, d: int) -> CouplingParams:
    """Bundle (group, beta, d) with the derived curvature constants."""
    return CouplingParams(group, float(beta), int(d))


def tilde_k(params: CouplingParams, a: float) -> float:
    """Contraction constant C_Ric - (4 + 4 sqrt(a)) N |beta| (d - 1).

    ``a > 1`` is the geometric weight base of the distance the constant
    refers to.
    """
    if not a > 1.0:
        raise ValueError(f"weight base must satisfy a > 1, got {a}")
    n = params.group.n
    return params.group.ricci - (4.0 + 4.0 * np.sqrt(a)) * n * abs(params.beta) * (
        params.d - 1
    )


def identity_configuration(group: GroupSpec, lat: LatticeSpec, size=()) -> np.ndarray:
    sz = (size,) if isinstance(size, int) else tuple(size)
    eye = np.eye(group.n, dtype=group.dtype)
    out = np.empty(sz + (lat.n_edges, group.n, group.n), dtype=group.dtype)
    out[...] = eye
    return out


def haar_configuration(
    group: GroupSpec, lat: LatticeSpec, rng: np.random.Generator, size=()
) -> np.ndarray:
    sz = (size,) if isinstance(size, int) else tuple(size)
    return haar_sample(group, rng, size=sz + (lat.n_edges,))


def _gather_signed(cfg: np.ndarray, idx: np.ndarray, sgn: np.ndarray) -> np.ndarray:
    ### signed edge matrices: Q_e for +1, Q_e* for -1; idx indexes the edge axis
    g = cfg[..., idx, :, :]
    return np.where((sgn == 1)[..., None, None], g, adjoint(g))


def plaquette_holonomies(cfg: np.ndarray, lat: LatticeSpec) -> np.ndarray:
    """Ordered products Q_p for all positive plaquettes, shape (..., P, n, n)."""
    idx, sgn = plaquette_table(lat)
    m = _gather_signed(cfg, idx, sgn)
    return m[..., 0, :, :] @ m[..., 1, :, :] @ m[..., 2, :, :] @ m[..., 3, :, :]


def action_value(cfg: np.ndarray, params: CouplingParams, lat: LatticeSpec):
    """S(Q) = N beta Re sum_p tr(Q_p) over positive plaquettes."""
    if lat.d != params.d:
        raise ValueError(f"lattice dimension {lat.d} != params dimension {params.d}")
    hol = plaquette_holonomies(cfg, lat)
    tr = np.trace(hol, axis1=-2, axis2=-1)
    s = np.sum(np.real(tr), axis=-1)
    return params.group.n * params.beta * s


def staple_sums(cfg: np.ndarray, lat: LatticeSpec) -> np.ndarray:
    """Per-edge sum of staple products V_e = sum_{p > e} (three-factor tail).

    The re-rooted holonomy of each plaquette through e is Q_e V_e-term, so
    both the drift and the local Metropolis action difference are linear
    in V_e.  Shape (..., E, n, n).
    """
    idx, sgn = staple_table(lat)
    m = _gather_signed(cfg, idx, sgn)
    st = m[..., 0, :, :] @ m[..., 1, :, :] @ m[..., 2, :, :]
    return np.sum(st, axis=-3)


def drift_field(cfg: np.ndarray, params: CouplingParams, lat: LatticeSpec) -> np.ndarray:
    """Algebra-valued drift factors X_e for every edge, shape (..., E, n, n).

    X_e = -(N beta / 2) sum_{p > e} (Q_p - Q_p*), with the trace part
    removed inside the sum for SU; the tangent drift is X_e Q_e.
    """
    n = params.group.n
    if params.beta == 0.0:
        return np.zeros_like(cfg)
    v = staple_sums(cfg, lat)
    qp = cfg @ v
    a = qp - adjoint(qp)
    if params.group.kind == "SU":
        tr = np.trace(a, axis1=-2, axis2=-1)[..., None, None]
        a = a - (tr / n) * np.eye(n, dtype=complex)
    return (-0.5 * n * params.beta) * a


def drift_algebra(cfg, e, params: CouplingParams, lat: LatticeSpec) -> np.ndarray:
    """Drift factor X_e at a single positive edge (see :func:`drift_field`)."""
    i = edge_index(lat, e)
    n = params.group.n
    idx, sgn = staple_table(lat)
    m = _gather_signed(cfg, idx[i], sgn[i])
    st = m[..., 0, :, :] @ m[..., 1, :, :] @ m[..., 2, :, :]
    qp = cfg[..., i, None, :, :] @ st
    a = np.sum(qp - adjoint(qp), axis=-3)
    if params.group.kind == "SU":
        tr = np.trace(a, axis1=-2, axis2=-1)[..., None, None]
        a = a - (tr / n) * np.eye(n, dtype=complex)
    return (-0.5 * n * params.beta) * a


def hessian_quadratic_form(
    cfg: np.ndarray, v: np.ndarray, params: CouplingParams, lat: LatticeSpec
) -> float:
    """Second derivative of S along the flow exp(t X_e) applied to all edges.

    ``v`` assigns an algebra element to every positive edge, shape
    (E, n, n).  Evaluated by inserting first- and second-derivative
    factors into each plaquette trace: a forward factor differentiates to
    X A, a reversed one to -A X, and the same-position second derivative
    to X^2 A (resp. A X^2).  Satisfies |result| <= 8 (d-1) N |beta| |v|^2.
    """
    if cfg.ndim != 3 or v.shape != cfg.shape:
        raise ValueError("expects a single configuration and a matching tangent")
    idx, sgn = plaquette_table(lat)
    total = 0.0
    for p in range(idx.shape[0]):
        mats = []
        firsts = []
        seconds = []
        for j in range(4):
            q = cfg[idx[p, j]]
            x = v[idx[p, j]]
            if sgn[p, j] == 1:
                a = q
                b = x @ q
                c = x @ x @ q
            else:
                a = adjoint(q)
                b = -a @ x
                c = a @ x @ x
            mats.append(a)
            firsts.append(b)
            seconds.append(c)
        t = 0.0
        for j in range(4):
            w = [mats[0], mats[1], mats[2], mats[3]]
            w[j] = seconds[j]
            t += np.trace(w[0] @ w[1] @ w[2] @ w[3])
        for j in range(4):
            for k in range(j + 1, 4):
                w = [mats[0], mats[1], mats[2], mats[3]]
                w[j] = firsts[j]
                w[k] = firsts[k]
                t += 2.0 * np.trace(w[0] @ w[1] @ w[2] @ w[3])
        total += np.real(t)
    return params.group.n * params.beta * total


def tangent_norm_sq(v: np.ndarray) -> float:
    """|v|^2 = sum_e ||X_e||_F^2, the squared norm the Hessian bound uses."""
    return float(np.sum(np.abs(v) ** 2))


def random_tangent(
    group: GroupSpec, lat: LatticeSpec, rng: np.random.Generator
) -> np.ndarray:
    """Standard Gaussian tangent assignment in basis coordinates."""
    g = rng.standard_normal((lat.n_edges, group.algebra_dim))
    return np.einsum("ea,aij->eij", g, orthonormal_basis(group))
