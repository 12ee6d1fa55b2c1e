"""Periodic lattice geometry: edges, plaquettes, loops, and index tables.

The lattice is Z^d modulo L in every coordinate.  Vertices are d-tuples;
an edge is identified by the base vertex of its positive representative,
the axis it runs along, and a traversal sign.  Positive edges are ordered
vertex-major (lexicographic base vertex), axis-minor, which fixes the flat
array layout used by configurations.

Plaquette words follow the positively-oriented convention: for axes
mu < nu at base x the word starts with the edge from x to x + e_nu,
because x + e_nu is the lexicographically second-smallest vertex of the
square (the later axis is the less significant coordinate).  On wrapping
squares the same pattern is anchored at the base representative.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "LatticeSpec",
    "EdgeId",
    "Plaquette",
    "LoopWord",
    "enumerate_positive_edges",
    "enumerate_positive_plaquettes",
    "plaquettes_starting_at",
    "edge_norm",
    "reduce_loop",
    "edge_index",
    "edge_endpoints",
    "plaquette_at",
    "rectangle_loop",
    "translate_word",
    "plaquette_table",
    "staple_table",
]


@dataclass(frozen=True)
class LatticeSpec:
    """Periodic lattice Z^d mod L."""

    d: int
    L: int

    def __post_init__(self) -> None:
        if self.d < 2:
            raise ValueError(f"dimension must be > 1, got {self.d}")
        if self.L < 2:
            raise ValueError(f"side length must be >= 2, got {self.L}")

    @property
    def n_vertices(self) -> int:
        return self.L**self.d

    @property
    def n_edges(self) -> int:
        return self.d * self.L**self.d

    @property
    def n_plaquettes(self) -> int:
        return self.L**self.d * self.d * (self.d - 1) // 2


@dataclass(frozen=True)
class EdgeId:
    """Directed lattice edge.

    ``base`` and ``axis`` name the positive representative (the unit step
    from ``base`` in direction ``axis``); ``sign`` is +1 when traversed
    that way and -1 for the reverse traversal.
    """

    base: tuple
    axis: int
    sign: int = 1

    def reversed(self) -> "EdgeId":
        return EdgeId(self.base, self.axis, -self.sign)


@dataclass(frozen=True)
class Plaquette:
    """Closed word of four signed edges bounding a unit square."""

    word: tuple

    def __iter__(self):
        return iter(self.word)


@dataclass(frozen=True)
class LoopWord:
    """Cyclically reduced closed path in canonical rotation."""

    edges: tuple

    def __iter__(self):
        return iter(self.edges)

    def __len__(self):
        return len(self.edges)


def _shift(v: tuple, axis: int, delta: int, L: int) -> tuple:
    t = list(v)
    t[axis] = (t[axis] + delta) % L
    return tuple(t)


def _norm_vertex(v: Iterable[int], L: int) -> tuple:
    return tuple(int(c) % L for c in v)


def _vertices(spec: LatticeSpec):
    ### lexicographic order; first coordinate most significant
    for rank in range(spec.n_vertices):
        base = []
        r = rank
        for _ in range(spec.d):
            base.append(r % spec.L)
            r //= spec.L
        yield tuple(reversed(base))


def edge_endpoints(spec: LatticeSpec, e: EdgeId):
    """(start, end) vertices of the traversal, mod L."""
    tail = _norm_vertex(e.base, spec.L)
    tip = _shift(tail, e.axis, +1, spec.L)
    return (tail, tip) if e.sign > 0 else (tip, tail)


def edge_index(spec: LatticeSpec, e: EdgeId) -> int:
    """Dense index of the positive representative: vertex-major, axis-minor."""
    base = _norm_vertex(e.base, spec.L)
    rank = 0
    for c in base:
        rank = rank * spec.L + c
    return rank * spec.d + e.axis


def enumerate_positive_edges(spec: LatticeSpec) -> list:
    """All positive edges in index order (d * L^d of them)."""
    return [
        EdgeId(base, axis, 1) for base in _vertices(spec) for axis in range(spec.d)
    ]


def plaquette_at(spec: LatticeSpec, x: tuple, mu: int, nu: int) -> Plaquette:
    """Positively oriented plaquette word of the (mu, nu) square at base x.

    Requires mu < nu.  The word runs x -> x+e_nu -> x+e_nu+e_mu -> x+e_mu -> x,
    so the third and fourth edges are negatively oriented.
    """
    if not 0 <= mu < nu < spec.d:
        raise ValueError(f"need 0 <= mu < nu < d, got mu={mu}, nu={nu}")
    x = _norm_vertex(x, spec.L)
    return Plaquette(
        (
            EdgeId(x, nu, 1),
            EdgeId(_shift(x, nu, 1, spec.L), mu, 1),
            EdgeId(_shift(x, mu, 1, spec.L), nu, -1),
            EdgeId(x, mu, -1),
        )
    )


def enumerate_positive_plaquettes(spec: LatticeSpec) -> list:
    """All positively oriented plaquettes, base-vertex-major, axis-pair-minor."""
    out = []
    for x in _vertices(spec):
        for mu in range(spec.d):
            for nu in range(mu + 1, spec.d):
                out.append(plaquette_at(spec, x, mu, nu))
    return out


def _reverse_word(word: Sequence[EdgeId]) -> tuple:
    return tuple(e.reversed() for e in reversed(list(word)))


def plaquettes_starting_at(spec: LatticeSpec, e: EdgeId) -> list:
    """The 2(d-1) plaquette words re-rooted to begin with the positive edge e.

    Each unit square containing e is traversed in the unique direction that
    crosses e forward, and the word is rotated to start there, matching the
    trace re-rooting used by the drift formula.
    """
    if e.sign != 1:
        raise ValueError("plaquettes_starting_at expects a positive edge")
    x = _norm_vertex(e.base, spec.L)
    a = e.axis
    target = EdgeId(x, a, 1)
    out = []
    for b in range(spec.d):
        if b == a:
            continue
        for base in (x, _shift(x, b, -1, spec.L)):
            p = plaquette_at(spec, base, min(a, b), max(a, b))
            for word in (p.word, _reverse_word(p.word)):
                if target in word:
                    k = word.index(target)
                    out.append(Plaquette(word[k:] + word[:k]))
                    break
            else:
                raise AssertionError("edge not found on its own square")
    return out


def edge_norm(spec: LatticeSpec, e: EdgeId) -> int:
    """min over the edge's endpoints of the periodic graph distance to 0."""
    u, v = edge_endpoints(spec, e)

    def dist(w):
        return sum(min(c % spec.L, spec.L - c % spec.L) for c in w)

    return min(dist(u), dist(v))


def _is_closed(spec: LatticeSpec, word: Sequence[EdgeId]) -> bool:
    ends = [edge_endpoints(spec, e) for e in word]
    return all(ends[i][1] == ends[(i + 1) % len(ends)][0] for i in range(len(ends)))


def reduce_loop(spec: LatticeSpec, word: Sequence[EdgeId]) -> LoopWord:
    """Cyclically reduce a closed path and canonicalize its rotation.

    Adjacent inverse pairs are cancelled, including across the wrap-around,
    and the surviving word is rotated to its lexicographically minimal
    position so equal loops compare equal.  Raises ValueError for an open
    path or a word that reduces to nothing.
    """
    edges = [EdgeId(_norm_vertex(e.base, spec.L), e.axis, e.sign) for e in word]
    if not edges:
        raise ValueError("empty word is not a loop")
    for e in edges:
        if not 0 <= e.axis < spec.d or e.sign not in (1, -1):
            raise ValueError(f"invalid edge {e}")
    if not _is_closed(spec, edges):
        raise ValueError("word is not a closed path")

    stack: list = []
    for e in edges:
        if stack and stack[-1] == e.reversed():
            stack.pop()
        else:
            stack.append(e)
    while len(stack) >= 2 and stack[0] == stack[-1].reversed():
        stack = stack[1:-1]
    if not stack:
        raise ValueError("word reduces to the empty loop")

    def key(seq):
        return tuple((f.base, f.axis, f.sign) for f in seq)

    rotations = [tuple(stack[k:] + stack[:k]) for k in range(len(stack))]
    best = min(rotations, key=key)
    return LoopWord(best)


def rectangle_loop(
    spec: LatticeSpec, x: tuple, mu: int, nu: int, a: int = 1, b: int = 1
) -> LoopWord:
    """Rectangle loop of side a along mu and side b along nu, based at x."""
    if mu == nu:
        raise ValueError("rectangle needs two distinct axes")
    x = _norm_vertex(x, spec.L)
    word = []
    for k in range(a):
        word.append(EdgeId(_shift(x, mu, k, spec.L), mu, 1))
    corner = _shift(x, mu, a, spec.L)
    for k in range(b):
        word.append(EdgeId(_shift(corner, nu, k, spec.L), nu, 1))
    far = _shift(corner, nu, b, spec.L)
    for k in range(1, a + 1):
        word.append(EdgeId(_shift(far, mu, -k, spec.L), mu, -1))
    top = _shift(far, mu, -a, spec.L)
    for k in range(1, b + 1):
        word.append(EdgeId(_shift(top, nu, -k, spec.L), nu, -1))
    return reduce_loop(spec, word)


def translate_word(spec: LatticeSpec, word, shift: Sequence[int]):
    """Translate every edge base by a lattice vector (mod L)."""
    moved = tuple(
        EdgeId(
            tuple((c + int(s)) % spec.L for c, s in zip(e.base, shift)),
            e.axis,
            e.sign,
        )
        for e in word
    )
    if isinstance(word, Plaquette):
        return Plaquette(moved)
    if isinstance(word, LoopWord):
        return LoopWord(moved)
    return moved


@functools.lru_cache(maxsize=None)
def plaquette_table(spec: LatticeSpec):
    """(indices, signs) arrays of shape (P, 4) for the canonical plaquettes."""
    plaqs = enumerate_positive_plaquettes(spec)
    idx = np.empty((len(plaqs), 4), dtype=np.int64)
    sgn = np.empty((len(plaqs), 4), dtype=np.int64)
    for i, p in enumerate(plaqs):
        for j, e in enumerate(p.word):
            idx[i, j] = edge_index(spec, e)
            sgn[i, j] = e.sign
    idx.setflags(write=False)
    sgn.setflags(write=False)
    return idx, sgn


@functools.lru_cache(maxsize=None)
def staple_table(spec: LatticeSpec):
    """(indices, signs) arrays of shape (E, 2(d-1), 3) for drift staples.

    Row e lists, for each plaquette word p starting at edge e, the three
    factors following e, so the re-rooted holonomy is Q_e times the staple
    product.
    """
    edges = enumerate_positive_edges(spec)
    n_stap = 2 * (spec.d - 1)
    idx = np.empty((len(edges), n_stap, 3), dtype=np.int64)
    sgn = np.empty((len(edges), n_stap, 3), dtype=np.int64)
    for e in edges:
        i = edge_index(spec, e)
        for s, p in enumerate(plaquettes_starting_at(spec, e)):
            rest = p.word[1:]
            for j, f in enumerate(rest):
                idx[i, s, j] = edge_index(spec, f)
                sgn[i, s, j] = f.sign
    idx.setflags(write=False)
    sgn.setflags(write=False)
    return idx, sgn
