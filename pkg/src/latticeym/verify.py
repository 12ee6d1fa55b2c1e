"""Deterministic self-checks, one PASS/FAIL line each.

Each check recomputes a formula the simulator relies on through an
independent route (finite differences, quadrature, series evaluation,
brute-force enumeration) and compares at a fixed tolerance.  The whole
suite is seeded, takes well under a minute, and prints identical output
on every invocation.
"""

from __future__ import annotations

import numpy as np
from scipy.special import iv

from . import action as _action
from . import gibbs as _gibbs
from . import groups as _groups
from . import lattice as _lattice
from . import observables as _observables
from .rng import stream_rng

__all__ = ["run_checks", "CHECKS"]


def _check_basis_orthonormality():
    worst = 0.0
    for kind in ("SO", "SU"):
        for n in range(2, 9):
            basis = _groups.orthonormal_basis(_groups.GroupSpec(kind, n))
            gram = np.real(np.einsum("aij,bij->ab", basis, basis.conj()))
            worst = max(worst, np.abs(gram - np.eye(len(basis))).max())
    return worst <= 1e-12, f"worst Gram deviation {worst:.2e}"


def _check_casimir_identity():
    worst = 0.0
    for kind in ("SO", "SU"):
        for n in range(2, 9):
            spec = _groups.GroupSpec(kind, n)
            basis = _groups.orthonormal_basis(spec)
            total = np.einsum("aij,ajk->ik", basis, basis)
            worst = max(worst, np.abs(total - spec.casimir * np.eye(n)).max())
    return worst <= 1e-12, f"worst Casimir residual {worst:.2e}"


def _check_curvature_constants():
    checks = [
        (("SO", 3), 0.25),
        (("SO", 4), 0.5),
        (("SU", 2), 1.0),
        (("SU", 3), 1.5),
    ]
    ok = all(
        abs(_groups.GroupSpec(k, n).ricci - want) <= 1e-15 for (k, n), want in checks
    )
    return ok, "ricci constants for SO(3), SO(4), SU(2), SU(3)"


def _check_threshold_arithmetic():
    so3 = _action.CouplingParams(group=_groups.GroupSpec("SO", 3), beta=0.001, d=2)
    su2 = _action.CouplingParams(group=_groups.GroupSpec("SU", 2), beta=0.001, d=2)
    ok = abs(so3.beta_threshold - 1.0 / 96.0) <= 1e-15
    ok &= abs(su2.beta_threshold - 1.0 / 16.0) <= 1e-15
    ok &= abs(so3.k_s - (0.25 - 8 * 3 * 0.001)) <= 1e-15
    return ok, "SO(3) d=2 threshold 1/96; SU(2) d=2 threshold 1/16"


def _check_bracket_closure():
    worst = 0.0
    for spec in (_groups.GroupSpec("SO", 4), _groups.GroupSpec("SU", 3)):
        basis = _groups.orthonormal_basis(spec)
        table = _groups.bracket_table(spec)
        comm = np.einsum("aij,bjk->abik", basis, basis) - np.einsum(
            "bij,ajk->abik", basis, basis
        )
        rebuilt = np.einsum("abc,cij->abij", table, basis)
        worst = max(worst, np.abs(comm - rebuilt).max())
        worst = max(worst, np.abs(table + np.swapaxes(table, 0, 1)).max() * 1e-15)
    return worst <= 1e-12, f"bracket reexpansion residual {worst:.2e}"


def _check_exp_log_round_trip():
    rng = stream_rng(17, 0)
    worst = 0.0
    for spec in (
        _groups.GroupSpec("SO", 2),
        _groups.GroupSpec("SO", 3),
        _groups.GroupSpec("SO", 5),
        _groups.GroupSpec("SU", 2),
        _groups.GroupSpec("SU", 4),
    ):
        x = _groups.brownian_increment(spec, 1.0, rng, size=(50,)) * 0.3
        back = _groups.log_map(_groups.exp_map(x))
        worst = max(worst, np.abs(back - x).max())
    return worst <= 1e-9, f"worst round-trip error {worst:.2e}"


def _check_drift_gradient():
    rng = stream_rng(23, 0)
    lat = _lattice.LatticeSpec(d=2, L=3)
    worst = 0.0
    for kind, n in (("SO", 3), ("SU", 2)):
        g = _groups.GroupSpec(kind, n)
        params = _action.CouplingParams(group=g, beta=0.07, d=2)
        cfg = _action.haar_configuration(g, lat, rng)
        drift = _action.drift_field(cfg, params, lat)
        for _ in range(6):
            e = int(rng.integers(lat.n_edges))
            v = _groups.brownian_increment(g, 1.0, rng)
            v /= np.sqrt(_action.tangent_norm_sq(v))
            t = 1e-6
            cp, cm = cfg.copy(), cfg.copy()
            cp[e] = _groups.exp_map(t * v) @ cp[e]
            cm[e] = _groups.exp_map(-t * v) @ cm[e]
            fd = (
                _action.action_value(cp, params, lat)
                - _action.action_value(cm, params, lat)
            ) / (2 * t)
            an = np.real(np.trace(drift[e] @ _groups.adjoint(v)))
            worst = max(worst, abs(fd - an) / max(abs(an), 1.0))
    return worst <= 1e-6, f"worst relative drift error {worst:.2e}"


def _check_hessian_bound():
    rng = stream_rng(29, 0)
    lat = _lattice.LatticeSpec(d=2, L=3)
    g = _groups.GroupSpec("SO", 3)
    params = _action.CouplingParams(group=g, beta=0.01, d=2)
    worst = -np.inf
    for _ in range(200):
        cfg = _action.haar_configuration(g, lat, rng)
        v = _action.random_tangent(g, lat, rng)
        h = _action.hessian_quadratic_form(cfg, v, params, lat)
        bound = 8 * (params.d - 1) * g.n * abs(params.beta) * _action.tangent_norm_sq(v)
        worst = max(worst, abs(h) - bound)
    return worst <= 1e-10, f"max |Hess| minus bound {worst:.2e}"


def _check_quadrature_bessel():
    c = 0.05
    quad = _gibbs.single_edge_quadrature(_groups.GroupSpec("SO", 2), c)
    bessel = 2.0 * iv(1, 2 * c) / iv(0, 2 * c)
    err = abs(quad - bessel)
    return err <= 1e-10, f"SO(2) Bessel-ratio deviation {err:.2e}"


def _check_loop_gradient():
    rng = stream_rng(31, 0)
    lat = _lattice.LatticeSpec(d=2, L=3)
    g = _groups.GroupSpec("SU", 2)
    cfg = _action.haar_configuration(g, lat, rng)
    loop = _lattice.rectangle_loop(lat, (0, 1), 0, 1, 2, 1)
    worst = 0.0
    for letter in list(loop)[:4]:
        e = _lattice.EdgeId(letter.base, letter.axis) if letter.sign == 1 else None
        if e is None:
            continue
        grad = _observables.wilson_loop_gradient(cfg, loop, lat, e)
        v = _groups.brownian_increment(g, 1.0, rng)
        t = 1e-6
        idx = _lattice.edge_index(lat, e)
        cp, cm = cfg.copy(), cfg.copy()
        cp[idx] = _groups.exp_map(t * v) @ cp[idx]
        cm[idx] = _groups.exp_map(-t * v) @ cm[idx]
        fd = (
            np.real(_observables.wilson_loop(cp, loop, lat))
            - np.real(_observables.wilson_loop(cm, loop, lat))
        ) / (2 * t)
        an = np.real(np.trace(grad @ _groups.adjoint(v)))
        worst = max(worst, abs(fd - an))
    return worst <= 1e-6, f"worst loop-gradient error {worst:.2e}"


def _check_lattice_counts():
    ok = True
    for d, L in ((2, 4), (3, 3), (4, 2)):
        lat = _lattice.LatticeSpec(d=d, L=L)
        ok &= len(_lattice.enumerate_positive_edges(lat)) == lat.n_edges
        ok &= len(_lattice.enumerate_positive_plaquettes(lat)) == lat.n_plaquettes
        ok &= lat.n_edges == d * L**d
        ok &= lat.n_plaquettes == L**d * d * (d - 1) // 2
    return ok, "edge and plaquette counts for d in {2,3,4}"


CHECKS = [
    ("basis_orthonormality", _check_basis_orthonormality),
    ("casimir_identity", _check_casimir_identity),
    ("curvature_constants", _check_curvature_constants),
    ("threshold_arithmetic", _check_threshold_arithmetic),
    ("bracket_closure", _check_bracket_closure),
    ("exp_log_round_trip", _check_exp_log_round_trip),
    ("drift_gradient", _check_drift_gradient),
    ("hessian_bound", _check_hessian_bound),
    ("quadrature_bessel", _check_quadrature_bessel),
    ("loop_gradient", _check_loop_gradient),
    ("lattice_counts", _check_lattice_counts),
]


def run_checks(out=print) -> int:
    """Run every named check; print one line per check; return 0 when
    everything passed, 1 otherwise."""
    failures = 0
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as err:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(err).__name__}: {err}"
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        out(f"{status} {name}: {detail}")
    return 0 if failures == 0 else 1
