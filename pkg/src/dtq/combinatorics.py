"""Exact counting and exact-uniform sampling of bounded-depth trees.

Counting.  Four families, all arbitrary-precision integers:

* ``count_shapes(d)``          -- shapes of depth <= d: S(0)=1, S(d)=S(d-1)^2+1.
* ``count_structures(d, v)``   -- internal-labeled, leaf-open, non-redundant
                                  trees on v usable variables:
                                  C(0,v)=1, C(d,v)=1+v*C(d-1,v-1)^2.
* ``count_labeled(d, v)``      -- fully labeled trees:
                                  F(0,v)=2, F(d,v)=2+v*F(d-1,v-1)^2.
* ``count_min_depth_shapes``   -- shapes whose every leaf is deeper than h.

Counts depend on the number of usable variables only, never on which ones
they are: relabeling is a bijection, and descending one level always removes
exactly one variable.  That collapses the memo tables to O(d) entries per
query.

Sampling.  The recursive method: at every node draw an exactly uniform
integer below the relevant count and use it to decide leaf-vs-internal (and,
for labeled trees, the leaf bit), then pick the root variable uniformly among
the path-unused ones and recurse.  The acceptance probability telescopes, so
each tree of the class comes out with probability exactly 1/total.  No
floating point is involved anywhere.
"""

from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np

from .trees import (
    OPEN,
    DecisionTree,
    Leaf,
    Query,
    Shape,
    SHAPE_LEAF,
    Structure,
)

#: Counts stay fast (megabit integers at worst) up to this depth.
MAX_COUNT_DEPTH = 20


class Model(enum.Enum):
    """The four random-tree distributions."""

    SHAPE_UNIFORM = "shape-uniform"
    STRUCTURE_TWO_STAGE = "structure-two-stage"
    FULL_UNIFORM = "full-uniform"
    COMPLETE = "complete"


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------

class RandomStream:
    """Deterministic bit source with derived substreams.

    Backed by the Philox counter-based generator, keyed by
    ``SeedSequence(seed, spawn_key=path)``.  ``substream(i)`` extends the
    path, so the stream for (seed, i) is a pure function of those two values:
    parallel and serial consumers see identical bits.

    Bits are served least-significant-first out of 64-bit words, so a
    consumer that asks for k bits always advances the stream by exactly k
    bits regardless of word boundaries.
    """

    def __init__(self, seed: int, path: tuple[int, ...] = ()):
        self.seed = seed
        self.path = tuple(path)
        ss = np.random.SeedSequence(seed, spawn_key=self.path)
        self._gen = np.random.Generator(np.random.Philox(ss))
        self._buf = 0
        self._nbits = 0

    def substream(self, index: int) -> "RandomStream":
        return RandomStream(self.seed, self.path + (index,))

    def _refill(self, need: int) -> None:
        words = max(4, -(-need // 64))
        raw = self._gen.integers(0, 2**64 - 1, size=words, dtype=np.uint64,
                                 endpoint=True)
        # Fix the byte order so the folded integer is platform-independent.
        chunk = int.from_bytes(np.asarray(raw, dtype="<u8").tobytes(), "little")
        self._buf |= chunk << self._nbits
        self._nbits += 64 * words

    def bits(self, k: int) -> int:
        if k < 0:
            raise ValueError("bit count must be >= 0")
        if k == 0:
            return 0
        if self._nbits < k:
            self._refill(k - self._nbits)
        out = self._buf & ((1 << k) - 1)
        self._buf >>= k
        self._nbits -= k
        return out

    def bit(self) -> int:
        return self.bits(1)

    def uniform_below(self, bound: int) -> int:
        """Exactly uniform integer in [0, bound), by rejection on raw bits."""
        if bound < 1:
            raise ValueError(f"bound must be >= 1, got {bound}")
        if bound == 1:
            return 0
        k = (bound - 1).bit_length()
        while True:
            r = self.bits(k)
            if r < bound:
                return r


def uniform_below(bound: int, rng: RandomStream) -> int:
    return rng.uniform_below(bound)


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------

def _require_depth(d: int) -> None:
    if d < 0:
        raise ValueError("depth must be >= 0")
    if d > MAX_COUNT_DEPTH:
        # counts grow doubly exponentially; beyond this the integers are huge
        raise ValueError(f"depth {d} exceeds supported maximum {MAX_COUNT_DEPTH}")


@lru_cache(maxsize=None)
def count_shapes(d: int) -> int:
    """Number of full binary tree shapes of depth <= d."""
    _require_depth(d)
    if d == 0:
        return 1
    return count_shapes(d - 1) ** 2 + 1


def _require_enough_vars(d: int, v: int) -> None:
    _require_depth(d)
    if v < d:
        raise ValueError(f"need v >= d for a depth-{d} non-redundant path, got v={v}")


@lru_cache(maxsize=None)
def count_structures(d: int, v: int) -> int:
    """Non-redundant internal-labeled trees of depth <= d on v variables."""
    _require_enough_vars(d, v)
    if d == 0:
        return 1
    return 1 + v * count_structures(d - 1, v - 1) ** 2


@lru_cache(maxsize=None)
def count_labeled(d: int, v: int) -> int:
    """Non-redundant fully labeled trees of depth <= d on v variables."""
    _require_enough_vars(d, v)
    if d == 0:
        return 2
    return 2 + v * count_labeled(d - 1, v - 1) ** 2


@lru_cache(maxsize=None)
def count_min_depth_shapes(d: int, h: int) -> int:
    """Shapes of depth <= d in which every leaf has depth > h.

    Dividing by ``count_shapes(d)`` gives the exact probability that a
    uniform shape has no shallow leaf.  For h < 0 the constraint is empty.
    """
    _require_depth(d)
    if h < 0:
        return count_shapes(d)
    if d == 0:
        # The lone leaf sits at depth 0 <= h.
        return 0
    return count_min_depth_shapes(d - 1, h - 1) ** 2


@lru_cache(maxsize=None)
def leaf_count_profile(d: int, v: int) -> tuple[tuple[int, int], ...]:
    """Structure counts broken down by number of leaves.

    Returns sorted (L, count) pairs: count structures of depth <= d on v
    variables having exactly L leaves.  The generating polynomial satisfies
    P(0,v) = y and P(d,v) = y + v * P(d-1,v-1)^2, so evaluating at y=1
    recovers count_structures and at y=2 recovers count_labeled.
    """
    _require_enough_vars(d, v)
    if d == 0:
        return ((1, 1),)
    inner = dict(leaf_count_profile(d - 1, v - 1))
    out: dict[int, int] = {1: 1}
    for l1, c1 in inner.items():
        for l2, c2 in inner.items():
            out[l1 + l2] = out.get(l1 + l2, 0) + v * c1 * c2
    return tuple(sorted(out.items()))


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _pick_var(avail: list[int], rng: RandomStream) -> tuple[int, int]:
    i = rng.uniform_below(len(avail))
    var = avail[i]
    avail[i] = avail[-1]
    avail.pop()
    return var, i


def _unpick_var(avail: list[int], var: int, i: int) -> None:
    # Exact undo of _pick_var, so sibling subtrees see the identical list.
    avail.append(var)
    avail[i], avail[-1] = avail[-1], avail[i]


def sample_shape(d: int, rng: RandomStream) -> Shape:
    """Exactly uniform shape of depth <= d."""
    if d < 0:
        raise ValueError("depth must be >= 0")
    if d == 0 or rng.uniform_below(count_shapes(d)) == 0:
        return SHAPE_LEAF
    return Shape((sample_shape(d - 1, rng), sample_shape(d - 1, rng)))


def sample_structure(d: int, n: int, rng: RandomStream) -> Structure:
    """Exactly uniform non-redundant structure of depth <= d on n variables."""
    _require_enough_vars(d, n)
    avail = list(range(n))

    def build(budget: int) -> Structure:
        if budget == 0 or rng.uniform_below(count_structures(budget, len(avail))) == 0:
            return OPEN
        var, i = _pick_var(avail, rng)
        left = build(budget - 1)
        right = build(budget - 1)
        _unpick_var(avail, var, i)
        return Query(var, left, right)

    return build(d)


def sample_labeled(d: int, n: int, rng: RandomStream) -> DecisionTree:
    """Exactly uniform fully labeled non-redundant tree of depth <= d."""
    _require_enough_vars(d, n)
    avail = list(range(n))

    def build(budget: int) -> DecisionTree:
        if budget == 0:
            return Leaf(rng.bit())
        r = rng.uniform_below(count_labeled(budget, len(avail)))
        if r < 2:
            return Leaf(r)
        var, i = _pick_var(avail, rng)
        left = build(budget - 1)
        right = build(budget - 1)
        _unpick_var(avail, var, i)
        return Query(var, left, right)

    return build(d)


def label_shape(shape: Shape, n: int, rng: RandomStream) -> DecisionTree:
    """Label a shape: per-node uniform variable among the path-unused ones,
    then a uniform bit at each leaf.  Single depth-first pass, on0 first.
    """
    if depth_of_shape(shape) > n:
        raise ValueError("not enough variables to label this shape")
    avail = list(range(n))

    def build(u: Shape) -> DecisionTree:
        if u.children is None:
            return Leaf(rng.bit())
        var, i = _pick_var(avail, rng)
        left = build(u.children[0])
        right = build(u.children[1])
        _unpick_var(avail, var, i)
        return Query(var, left, right)

    return build(shape)


def depth_of_shape(shape: Shape) -> int:
    if shape.children is None:
        return 0
    return 1 + max(depth_of_shape(shape.children[0]),
                   depth_of_shape(shape.children[1]))


def assign_uniform_bits(structure: Structure, rng: RandomStream) -> DecisionTree:
    """Close every open leaf with an independent fair bit (depth-first)."""
    if isinstance(structure, Query):
        left = assign_uniform_bits(structure.on0, rng)
        right = assign_uniform_bits(structure.on1, rng)
        return Query(structure.var, left, right)
    return Leaf(rng.bit())


def sample(model: Model, d: int, n: int, rng: RandomStream) -> DecisionTree:
    """Draw one tree from the given model; exact distribution, no floats."""
    _require_enough_vars(d, n)
    if model is Model.FULL_UNIFORM:
        return sample_labeled(d, n, rng)
    if model is Model.STRUCTURE_TWO_STAGE:
        return assign_uniform_bits(sample_structure(d, n, rng), rng)
    if model is Model.SHAPE_UNIFORM:
        return label_shape(sample_shape(d, rng), n, rng)
    if model is Model.COMPLETE:
        shape = SHAPE_LEAF
        for _ in range(d):
            shape = Shape((shape, shape))
        return label_shape(shape, n, rng)
    raise ValueError(f"unknown model: {model!r}")
