"""Wilson loops and their algebra-valued gradients.

A loop evaluates to the trace of the ordered product of its edge
matrices, a reversed letter contributing the conjugate transpose.  The
gradient at an edge is the algebra element X with
d/dt Re W(exp(t v) Q_e, ...) |_0 = <X, v>; it is assembled from one
prefix/suffix split per occurrence of the edge and projected to the
algebra, which for SU includes the traceless correction.
"""

from __future__ import annotations

import numpy as np

from .groups import adjoint, project_to_algebra, GroupSpec
from .lattice import EdgeId, LatticeSpec, edge_index

__all__ = [
    "wilson_loop",
    "wilson_loop_gradient",
]


def _letter_matrices(cfg: np.ndarray, word, lat: LatticeSpec) -> list[np.ndarray]:
    mats = []
    for letter in word:
        m = cfg[..., edge_index(lat, letter), :, :]
        mats.append(m if letter.sign == 1 else adjoint(m))
    return mats


def wilson_loop(cfg: np.ndarray, loop, lat: LatticeSpec) -> np.ndarray:
    """Trace of the ordered edge-matrix product along ``loop``.

    ``loop`` is any iterable of edge letters (a plaquette or a loop
    word).  Batched over leading axes of ``cfg``; complex for SU, real
    for SO.
    """
    mats = _letter_matrices(cfg, loop, lat)
    prod = mats[0]
    for m in mats[1:]:
        prod = prod @ m
    return np.trace(prod, axis1=-2, axis2=-1)


def wilson_loop_gradient(
    cfg: np.ndarray, loop, lat: LatticeSpec, e: EdgeId
) -> np.ndarray:
    """Algebra-valued gradient of Re W at the positive edge ``e``.

    For each forward occurrence, with the word split as A . e . B, the
    derivative along v inserts v after A, giving Re tr(v Q_e B A); a
    backward occurrence contributes -Re tr(v B A Q_e*).  The
    representing algebra element is the projection of the conjugate
    transpose of the accumulated matrix.  Zero when ``e`` does not
    appear in the loop.
    """
    if e.sign != 1:
        raise ValueError("gradient is indexed by positive edges")
    word = list(loop)
    mats = _letter_matrices(cfg, word, lat)
    n = cfg.shape[-1]
    target = edge_index(lat, e)
    acc = np.zeros(cfg.shape[:-3] + (n, n), dtype=cfg.dtype)
    eye = np.eye(n, dtype=cfg.dtype)
    found = False
    for i, letter in enumerate(word):
        if edge_index(lat, letter) != target:
            continue
        found = True
        ### cyclic product of everything after the occurrence, wrapping
        ### around to everything before it
        suffix = eye
        for m in mats[i + 1 :] + mats[:i]:
            suffix = suffix @ m
        if letter.sign == 1:
            acc = acc + mats[i] @ suffix
        else:
            acc = acc - suffix @ mats[i]
    if not found:
        return acc
    spec = GroupSpec("SU" if np.iscomplexobj(cfg) else "SO", n)
    return project_to_algebra(spec, adjoint(acc))
