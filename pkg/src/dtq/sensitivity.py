"""Exact average sensitivity, three ways.

* brute force over a packed truth table (capped at 24 variables),
* a structural decomposition that never enumerates inputs,
* an exhaustive sweep over every leaf assignment of a structure.

All three return exact dyadic rationals and agree wherever their domains
overlap; the test suite leans on that agreement as its main oracle.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .dyadic import ONE, ZERO, Dyadic
from .trees import (
    DecisionTree,
    Leaf,
    OpenLeaf,
    Query,
    Structure,
    TreeNode,
    leaf_profile,
    variables_of,
)

#: Largest variable count for packed-truth-table work (2^24 bits per table).
BRUTE_FORCE_CAP = 24

#: Partial assignment threaded through the structural traversal.
PathContext = dict


@dataclass(frozen=True)
class TruthTable:
    """Packed function table: bit x of ``bits`` is f(x), variable 0 is the
    least-significant bit of the input index x."""

    n: int
    bits: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("variable count must be >= 0")
        if self.n > BRUTE_FORCE_CAP:
            raise ValueError(
                f"truth tables support at most {BRUTE_FORCE_CAP} variables, got {self.n}"
            )
        if not 0 <= self.bits < (1 << (1 << self.n)):
            raise ValueError("table has bits outside the 2^n input range")

    def value(self, x: int) -> int:
        return (self.bits >> x) & 1


@lru_cache(maxsize=None)
def _high_mask(n: int, i: int) -> int:
    """Mask over all 2^n input indices x with x_i = 1."""
    if not 0 <= i < n:
        raise ValueError(f"variable {i} out of range for n={n}")
    period = 1 << (i + 1)
    unit = ((1 << (1 << i)) - 1) << (1 << i)
    tile = ((1 << (1 << n)) - 1) // ((1 << period) - 1)
    return unit * tile


def truth_table(tree: DecisionTree, n: int) -> TruthTable:
    """Tabulate the tree's function over all 2^n inputs."""
    if n > BRUTE_FORCE_CAP:
        raise ValueError(
            f"n={n} exceeds the brute-force cap of {BRUTE_FORCE_CAP} variables"
        )
    full = (1 << (1 << n)) - 1

    def build(u: DecisionTree) -> int:
        if isinstance(u, Leaf):
            return full if u.value else 0
        if isinstance(u, OpenLeaf):
            raise ValueError("cannot tabulate a structure with open leaves")
        hi = _high_mask(n, u.var)
        return (build(u.on0) & (full ^ hi)) | (build(u.on1) & hi)

    return TruthTable(n, build(tree))


def avg_sensitivity_bruteforce(tt: TruthTable) -> Dyadic:
    """Exact 2^-n sum over inputs and coordinates of |f(x) - f(x^i)|.

    Each disagreeing cube edge contributes to two (input, coordinate) pairs,
    so the sum is twice the edge count.
    """
    if tt.n == 0:
        return ZERO
    full = (1 << (1 << tt.n)) - 1
    edges = 0
    for i in range(tt.n):
        lo = full ^ _high_mask(tt.n, i)
        edges += ((tt.bits ^ (tt.bits >> (1 << i))) & lo).bit_count()
    return Dyadic(2 * edges, tt.n)


def disagreement_probability(a: DecisionTree, b: DecisionTree,
                             ctx: "PathContext | None" = None) -> Dyadic:
    """Pr over uniform unfixed variables that a and b evaluate differently.

    ``ctx`` pins variables already queried higher up; it is mutated during
    the traversal and restored before returning.  Variables occurring in both
    trees are resolved consistently because the first branch on a variable
    records it in ctx and every later occurrence follows the recorded bit.
    """
    if ctx is None:
        ctx = {}

    def walk(u: DecisionTree, w: DecisionTree) -> Dyadic:
        if u is w:
            return ZERO
        if isinstance(u, Query):
            fixed = ctx.get(u.var)
            if fixed is not None:
                return walk(u.on1 if fixed else u.on0, w)
            ctx[u.var] = 0
            p0 = walk(u.on0, w)
            ctx[u.var] = 1
            p1 = walk(u.on1, w)
            del ctx[u.var]
            return (p0 + p1).half()
        if isinstance(w, Query):
            return walk(w, u)
        return ONE if u.value != w.value else ZERO

    return walk(a, b)


def avg_sensitivity_structural(tree: DecisionTree) -> Dyadic:
    """Exact average sensitivity without touching the 2^n input space.

    Flipping bit i of x reroutes the walk only at the unique node on x's
    path that queries i, so each internal node u contributes
    Pr[reach u] * Pr[subtrees disagree] = 2^-depth(u) * D(on0, on1).
    Non-redundancy keeps the path variables out of both subtrees, which is
    why D is taken with an empty context.
    """
    total = ZERO

    def walk(u: DecisionTree, k: int) -> None:
        nonlocal total
        if isinstance(u, Query):
            d = disagreement_probability(u.on0, u.on1)
            if d.num:
                total = total + d * Dyadic(1, k)
            walk(u.on0, k + 1)
            walk(u.on1, k + 1)

    walk(tree, 0)
    return total


def _relabel(tree: DecisionTree, remap: dict) -> DecisionTree:
    if isinstance(tree, Query):
        return Query(remap[tree.var],
                     _relabel(tree.on0, remap),
                     _relabel(tree.on1, remap))
    return tree


def avg_sensitivity_auto(tree: DecisionTree) -> Dyadic:
    """Pick the cheaper exact method for this tree.

    Unqueried variables have zero influence and renaming is
    influence-preserving, so the tree is first compressed onto its queried
    variables; the packed-table route then covers most desk-scale trees,
    with the structural route as the fallback.
    """
    used = sorted(variables_of(tree))
    if len(used) <= BRUTE_FORCE_CAP:
        remap = {v: i for i, v in enumerate(used)}
        return avg_sensitivity_bruteforce(truth_table(_relabel(tree, remap), len(used)))
    return avg_sensitivity_structural(tree)


# ---------------------------------------------------------------------------
# structure-level expectations
# ---------------------------------------------------------------------------

def expected_path_length(s: "Structure | DecisionTree") -> Dyadic:
    """Mean number of queries on a uniform input: sum of d(l) * 2^-d(l)."""
    total = ZERO
    for d in leaf_profile(s).depths:
        if d:
            total = total + Dyadic(d, d)
    return total


def expected_sensitivity_over_leaves(s: "Structure | DecisionTree") -> Dyadic:
    """Mean of avg sensitivity over all leaf assignments of the structure.

    Exactly half the expected path length: a uniform input plus uniform leaf
    bits make each queried coordinate sensitive with probability 1/2.
    """
    return expected_path_length(s).half()


def _compressed_leaf_regions(structure: "Structure | DecisionTree") -> tuple[int, list[int]]:
    """Leaf reach-sets as bitmasks over the queried-variable subcube.

    Returns (m, masks): m distinct variables after compression, and one mask
    per leaf in depth-first order; the masks partition the 2^m cube.
    """
    used = sorted(variables_of(structure))
    m = len(used)
    if m > BRUTE_FORCE_CAP:
        raise ValueError(f"structure queries {m} variables, cap is {BRUTE_FORCE_CAP}")
    remap = {v: i for i, v in enumerate(used)}
    full = (1 << (1 << m)) - 1
    masks: list[int] = []

    def walk(u: TreeNode, mask: int) -> None:
        if isinstance(u, Query):
            hi = _high_mask(m, remap[u.var])
            walk(u.on0, mask & (full ^ hi))
            walk(u.on1, mask & hi)
        else:
            masks.append(mask)

    walk(structure, full)
    return m, masks


def mean_sensitivity_over_assignments(structure: Structure) -> Dyadic:
    """Exhaustive mean of avg sensitivity over all 2^L leaf assignments.

    Visits every assignment in Gray-code order, maintaining the number of
    disagreeing cube edges incrementally: an edge disagrees iff its two
    endpoint leaves carry different bits, so only the pairwise edge counts
    between leaf regions are needed and each step costs O(L).
    """
    m, masks = _compressed_leaf_regions(structure)
    L = len(masks)
    full = (1 << (1 << m)) - 1

    pair_edges = [[0] * L for _ in range(L)]
    for i in range(m):
        shift = 1 << i
        lo = full ^ _high_mask(m, i)
        low_parts = [mk & lo for mk in masks]
        shifted = [mk >> shift for mk in masks]
        for j in range(L):
            row = pair_edges[j]
            lp = low_parts[j]
            for k in range(L):
                if k != j and lp:
                    row[k] += (lp & shifted[k]).bit_count()
    # symmetric count of cube edges with one endpoint in each region
    for j in range(L):
        for k in range(j + 1, L):
            w = pair_edges[j][k] + pair_edges[k][j]
            pair_edges[j][k] = pair_edges[k][j] = w

    z = [0] * L
    disagree = 0
    total = 0
    for step in range(1 << L):
        if step:
            j = (step & -step).bit_length() - 1
            old = z[j]
            z[j] ^= 1
            row = pair_edges[j]
            delta = 0
            for k in range(L):
                if k != j:
                    delta += row[k] if z[k] == old else -row[k]
            disagree += delta
        total += disagree
    # mean = 2 * (total / 2^L) / 2^m
    return Dyadic(2 * total, L + m)
