"""Matrix Lie group kernels for SO(N) and SU(N).

Exact linear-algebra building blocks used by the lattice samplers:
orthonormal algebra bases, projections, exponential/logarithm maps, Haar
sampling, algebra-valued Gaussian increments, bi-invariant distances,
structure constants, and re-unitarization.

Conventions
-----------
The inner product is ``<X, Y> = Re tr(X Y*)`` with ``Y*`` the conjugate
transpose; on the algebras (skew matrices) this equals ``-Re tr(X Y)``.
Basis elements are orthonormal in this inner product.  The basis squares
sum to the Casimir identity ``sum_a v_a^2 = c_g I``, which fixes the
constant returned by :attr:`GroupSpec.casimir`.

All array operations accept stacked inputs of shape ``(..., n, n)`` and
broadcast over the leading axes.  SO matrices are float64, SU matrices
complex128; the group kind of a bare matrix argument is inferred from its
dtype where a ``GroupSpec`` is not passed.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = [
    "GroupSpec",
    "LogDomainError",
    "orthonormal_basis",
    "project_to_algebra",
    "exp_map",
    "log_map",
    "haar_sample",
    "brownian_increment",
    "geodesic_distance",
    "bracket_table",
    "reunitarize",
]

_SMALL_ANGLE = 1e-4
_CUT_LOCUS_TOL = 1e-6


class LogDomainError(ValueError):
    """Raised when a matrix logarithm is requested at or beyond the cut locus."""


@dataclass(frozen=True)
class GroupSpec:
    """Structure group of the lattice field: SO(n) or SU(n).

    Parameters
    ----------
    kind : {"SO", "SU"}
        Family of the group.
    n : int
        Matrix size, at least 2.
    """

    kind: str
    n: int

    def __post_init__(self) -> None:
        if self.kind not in ("SO", "SU"):
            raise ValueError(f"kind must be 'SO' or 'SU', got {self.kind!r}")
        if int(self.n) < 2:
            raise ValueError(f"matrix size must be >= 2, got {self.n}")

    @property
    def algebra_dim(self) -> int:
        """Real dimension of the Lie algebra."""
        n = self.n
        return n * (n - 1) // 2 if self.kind == "SO" else n * n - 1

    @property
    def casimir(self) -> float:
        """Constant c_g with sum_a v_a^2 = c_g I over an orthonormal basis."""
        n = self.n
        return -(n - 1) / 2.0 if self.kind == "SO" else -(n * n - 1) / float(n)

    @property
    def ricci(self) -> float:
        """Ricci curvature constant of the bi-invariant metric, alpha(n+2)/4 - 1."""
        alpha = 1.0 if self.kind == "SO" else 2.0
        return alpha * (self.n + 2) / 4.0 - 1.0

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(np.float64) if self.kind == "SO" else np.dtype(np.complex128)

    def identity(self) -> np.ndarray:
        return np.eye(self.n, dtype=self.dtype)


def adjoint(m: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the trailing two axes."""
    return np.conjugate(np.swapaxes(m, -1, -2))


@functools.lru_cache(maxsize=None)
def orthonormal_basis(spec: GroupSpec) -> np.ndarray:
    """Orthonormal basis of the Lie algebra, stacked as shape (dim, n, n).

    For so(n) the basis is ``E_kn = (e_kn - e_nk)/sqrt(2)`` over index pairs
    k < n in lexicographic order.  For su(n) the diagonal elements
    ``D_k = i/sqrt(k + k^2) (-k e_{k+1,k+1} + sum_{i<=k} e_ii)`` come first,
    followed by ``E_kn`` and ``F_kn = i(e_kn + e_nk)/sqrt(2)`` per pair.
    The returned array is read-only; callers needing to mutate must copy.
    """
    n = spec.n
    rt2 = np.sqrt(2.0)
    mats = []
    if spec.kind == "SO":
        for k in range(n):
            for m in range(k + 1, n):
                e = np.zeros((n, n))
                e[k, m] = 1.0 / rt2
                e[m, k] = -1.0 / rt2
                mats.append(e)
    else:
        for k in range(1, n):
            e = np.zeros((n, n), dtype=complex)
            for i in range(k):
                e[i, i] = 1j / np.sqrt(k + k * k)
            e[k, k] = -k * 1j / np.sqrt(k + k * k)
            mats.append(e)
        for k in range(n):
            for m in range(k + 1, n):
                e = np.zeros((n, n), dtype=complex)
                e[k, m] = 1.0 / rt2
                e[m, k] = -1.0 / rt2
                mats.append(e)
                f = np.zeros((n, n), dtype=complex)
                f[k, m] = 1j / rt2
                f[m, k] = 1j / rt2
                mats.append(f)
    out = np.stack(mats)
    out.setflags(write=False)
    return out


def project_to_algebra(spec: GroupSpec, m: np.ndarray) -> np.ndarray:
    """Orthogonal projection of a matrix onto the Lie algebra.

    The residual ``m - p(m)`` is orthogonal to every algebra element under
    ``Re tr(X Y*)``.  For so(n) this is the antisymmetric part of the real
    part; for su(n) the skew-Hermitian part with its trace removed.
    """
    m = np.asarray(m)
    if spec.kind == "SO":
        r = np.real(m)
        return (r - np.swapaxes(r, -1, -2)) / 2.0
    a = (m - adjoint(m)) / 2.0
    tr = np.trace(a, axis1=-2, axis2=-1)[..., None, None]
    eye = np.eye(spec.n, dtype=complex)
    return a - (tr / spec.n) * eye


def _sinc_like(theta: np.ndarray, theta2: np.ndarray) -> np.ndarray:
    ### sin(t)/t with a series branch; theta2 = theta**2 avoids a recompute
    small = theta < _SMALL_ANGLE
    safe = np.where(small, 1.0, theta)
    return np.where(small, 1.0 - theta2 / 6.0 * (1.0 - theta2 / 20.0), np.sin(safe) / safe)


def _versine_like(theta: np.ndarray, theta2: np.ndarray) -> np.ndarray:
    ### (1 - cos t)/t^2 with a series branch
    small = theta < _SMALL_ANGLE
    safe2 = np.where(small, 1.0, theta2)
    return np.where(small, 0.5 * (1.0 - theta2 / 12.0 * (1.0 - theta2 / 30.0)), (1.0 - np.cos(theta)) / safe2)


def _exp_skew_generic(x: np.ndarray) -> np.ndarray:
    ### i*x is Hermitian for skew-Hermitian x; batched eigh is exact and unitary
    h = 1j * x.astype(complex)
    w, v = np.linalg.eigh(h)
    q = np.matmul(v * np.exp(-1j * w)[..., None, :], adjoint(v))
    return q


def exp_map(x: np.ndarray) -> np.ndarray:
    """Matrix exponential of an algebra element; lands on the group exactly.

    Closed forms are used for real 2x2/3x3 skew matrices and traceless 2x2
    skew-Hermitian ones; other sizes go through an eigendecomposition of
    the Hermitian matrix i*x.  Accepts stacks of shape (..., n, n).
    """
    x = np.asarray(x)
    n = x.shape[-1]
    real = not np.iscomplexobj(x)
    if real and n == 2:
        th = x[..., 1, 0]
        c, s = np.cos(th), np.sin(th)
        return np.stack(
            [np.stack([c, -s], axis=-1), np.stack([s, c], axis=-1)], axis=-2
        )
    if real and n == 3:
        w1 = x[..., 2, 1]
        w2 = x[..., 0, 2]
        w3 = x[..., 1, 0]
        th2 = w1 * w1 + w2 * w2 + w3 * w3
        th = np.sqrt(th2)
        a = _sinc_like(th, th2)[..., None, None]
        b = _versine_like(th, th2)[..., None, None]
        eye = np.broadcast_to(np.eye(3), x.shape)
        return eye + a * x + b * np.matmul(x, x)
    if not real and n == 2:
        tr = np.trace(x, axis1=-2, axis2=-1)
        if np.max(np.abs(tr), initial=0.0) <= 1e-12:
            th2 = np.imag(x[..., 0, 0]) ** 2 + np.abs(x[..., 0, 1]) ** 2
            th = np.sqrt(th2)
            c = np.cos(th)[..., None, None]
            s = _sinc_like(th, th2)[..., None, None]
            eye = np.broadcast_to(np.eye(2, dtype=complex), x.shape)
            return c * eye + s * x
    q = _exp_skew_generic(x)
    return np.real(q) if real else q


def log_map(q: np.ndarray) -> np.ndarray:
    """Principal matrix logarithm of a group element, as an algebra element.

    Inverse of :func:`exp_map` whenever the eigenangles of the argument lie
    strictly inside (-pi, pi).  Raises :class:`LogDomainError` at the cut
    locus (an eigenangle within 1e-6 of pi) and, for SU, for elements whose
    principal logarithm is not traceless (eigenangle branch winding), which
    cannot be represented in the algebra.
    """
    q = np.asarray(q)
    real = not np.iscomplexobj(q)
    lead = q.shape[:-2]
    n = q.shape[-1]
    flat = q.reshape((-1, n, n))
    out = np.empty(flat.shape, dtype=complex)
    for i, m in enumerate(flat):
        t, z = scipy.linalg.schur(m.astype(complex), output="complex")
        theta = np.angle(np.diagonal(t))
        if np.any(np.abs(theta) >= np.pi - _CUT_LOCUS_TOL):
            raise LogDomainError("eigenangle within 1e-6 of the cut locus at pi")
        if not real and abs(theta.sum()) > 1e-8:
            raise LogDomainError(
                "principal logarithm has nonzero trace (branch winding); "
                "no algebra representative on the principal branch"
            )
        out[i] = (z * (1j * theta)[None, :]) @ z.conj().T
    x = out.reshape(lead + (n, n))
    kind = "SO" if real else "SU"
    return project_to_algebra(GroupSpec(kind, n), x)


def haar_sample(spec: GroupSpec, rng: np.random.Generator, size=()) -> np.ndarray:
    """Haar-distributed group elements of shape ``size + (n, n)``.

    QR of a Ginibre matrix with the R-diagonal phase absorbed into Q, then
    a determinant fix on the last column (sign flip for SO, phase for SU).
    Both corrections are right multiplications by fixed-subgroup elements,
    so bi-invariance of the law is preserved.
    """
    n = spec.n
    sz = (size,) if isinstance(size, int) else tuple(size)
    a = rng.standard_normal(sz + (n, n))
    if spec.kind == "SU":
        a = (a + 1j * rng.standard_normal(sz + (n, n))) / np.sqrt(2.0)
    q, r = np.linalg.qr(a)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (d / np.abs(d))[..., None, :]
    det = np.linalg.det(q)
    if spec.kind == "SO":
        q[..., :, -1] *= np.where(det < 0.0, -1.0, 1.0)[..., None]
    else:
        q[..., :, -1] *= np.conjugate(det)[..., None]
    return q


def brownian_increment(
    spec: GroupSpec, h: float, rng: np.random.Generator, size=()
) -> np.ndarray:
    """Algebra-valued Gaussian increment sqrt(h) * sum_a g_a v_a.

    The coefficients g_a are independent standard normals, so for fixed
    X, Y in the algebra, Cov(<B, X>, <B, Y>) = h <X, Y>.
    """
    if h <= 0:
        raise ValueError(f"h must be positive, got {h}")
    sz = (size,) if isinstance(size, int) else tuple(size)
    g = rng.standard_normal(sz + (spec.algebra_dim,))
    basis = orthonormal_basis(spec)
    return np.sqrt(h) * np.einsum("...a,aij->...ij", g, basis)


def _relative_angles_sq(q1: np.ndarray, q2: np.ndarray):
    """Sum of squared eigenangles of q2 q1^{-1} plus the largest |angle|."""
    r = np.matmul(q2, adjoint(q1))
    n = r.shape[-1]
    real = not np.iscomplexobj(r)
    if real and n == 2:
        th = np.abs(np.arctan2(r[..., 1, 0], r[..., 0, 0]))
        return 2.0 * th * th, th
    if real and n == 3:
        s1 = (r[..., 2, 1] - r[..., 1, 2]) / 2.0
        s2 = (r[..., 0, 2] - r[..., 2, 0]) / 2.0
        s3 = (r[..., 1, 0] - r[..., 0, 1]) / 2.0
        s = np.sqrt(s1 * s1 + s2 * s2 + s3 * s3)
        c = (np.trace(r, axis1=-2, axis2=-1) - 1.0) / 2.0
        th = np.arctan2(s, c)
        return 2.0 * th * th, th
    if not real and n == 2:
        c = np.real(np.trace(r, axis1=-2, axis2=-1)) / 2.0
        s = np.linalg.norm(r - adjoint(r), axis=(-2, -1)) / (2.0 * np.sqrt(2.0))
        th = np.arctan2(s, c)
        return 2.0 * th * th, th
    theta = np.angle(np.linalg.eigvals(r.astype(complex)))
    return np.sum(theta * theta, axis=-1), np.max(np.abs(theta), axis=-1)


def geodesic_distance(q1: np.ndarray, q2: np.ndarray) -> np.ndarray:
    """Bi-invariant Riemannian distance ||log(q2 q1^{-1})||_F.

    Both arguments must be group elements (the inverse is taken as the
    conjugate transpose).  Broadcasts over stacked inputs.  Raises
    :class:`LogDomainError` if any relative rotation has an eigenangle
    within 1e-6 of pi.
    """
    sq, thmax = _relative_angles_sq(np.asarray(q1), np.asarray(q2))
    if np.any(thmax >= np.pi - _CUT_LOCUS_TOL):
        raise LogDomainError("relative rotation within 1e-6 of the cut locus")
    return np.sqrt(sq)


@functools.lru_cache(maxsize=None)
def bracket_table(spec: GroupSpec) -> np.ndarray:
    """Structure constants c[a, b, c] with [v_a, v_b] = sum_c c[a,b,c] v_c.

    Computed by expanding each commutator in the orthonormal basis; exact
    up to floating-point arithmetic on half-integer surd entries.
    """
    basis = orthonormal_basis(spec)
    comm = np.einsum("aij,bjk->abik", basis, basis) - np.einsum(
        "bij,ajk->abik", basis, basis
    )
    ### <[v_a, v_b], v_c> = -Re tr([v_a, v_b] v_c) on the algebra
    table = -np.real(np.einsum("abij,cji->abc", comm, basis))
    table.setflags(write=False)
    return table


def reunitarize(q: np.ndarray) -> np.ndarray:
    """Nearest group element in Frobenius norm, with determinant corrected to 1.

    Polar factor via SVD; for SO a sign flip on the least-significant
    singular direction repairs a negative determinant, for SU the residual
    determinant phase is spread evenly across columns.  Rejects inputs with
    ``||q q* - I||_F >= 0.5`` as too far from the group.
    """
    q = np.asarray(q)
    n = q.shape[-1]
    gram = np.matmul(q, adjoint(q)) - np.eye(n, dtype=q.dtype)
    drift = np.linalg.norm(gram, axis=(-2, -1))
    if np.any(drift >= 0.5):
        raise ValueError(
            f"input too far from the group: max ||qq* - I||_F = {np.max(drift):.3g}"
        )
    u, _, vh = np.linalg.svd(q)
    if np.iscomplexobj(q):
        r = np.matmul(u, vh)
        phase = np.angle(np.linalg.det(r))
        r = r * np.exp(-1j * phase / n)[..., None, None]
        return r
    det = np.linalg.det(np.matmul(u, vh))
    u = u.copy()
    u[..., :, -1] *= np.where(det < 0.0, -1.0, 1.0)[..., None]
    return np.matmul(u, vh)
