"""Decision-tree data model: shapes, structures, labeled trees, codecs.

Three levels of labeling share one recursive skeleton:

* ``Shape`` — no labels at all, just the full-binary branching pattern.
* Structure — internal nodes carry variable indices, leaves are open.
* Decision tree — internal nodes carry variables, leaves carry output bits.

Structures and decision trees are built from ``Query`` nodes whose terminals
are ``OpenLeaf`` or ``Leaf`` respectively.  All nodes are frozen dataclasses,
so trees are immutable, hashable and safe to share.

Leaf order is fixed everywhere as depth-first with the on0 subtree before the
on1 subtree; ``LeafAssignment`` bit vectors are indexed in that order.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterator, Union

from .dyadic import Dyadic


class TreeFormatError(ValueError):
    """Raised when tree text cannot be parsed; carries a location hint."""


# ---------------------------------------------------------------------------
# node types
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Shape:
    """Unlabeled full binary tree; ``children is None`` marks a leaf."""

    children: "tuple[Shape, Shape] | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.children is None


SHAPE_LEAF = Shape()


@dataclass(frozen=True)
class Leaf:
    value: int

    def __post_init__(self) -> None:
        if self.value not in (0, 1):
            raise ValueError(f"leaf value must be 0 or 1, got {self.value!r}")


@dataclass(frozen=True)
class OpenLeaf:
    """Terminal of a structure: position exists, output bit not chosen yet."""


OPEN = OpenLeaf()


@dataclass(frozen=True)
class Query:
    """Internal node: test variable ``var``, branch to on0/on1."""

    var: int
    on0: "TreeNode"
    on1: "TreeNode"


DecisionTree = Union[Leaf, Query]
Structure = Union[OpenLeaf, Query]
TreeNode = Union[Leaf, OpenLeaf, Query]


@dataclass(frozen=True)
class LeafAssignment:
    """Output bits for a structure's leaves, in depth-first on0-first order."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bad = [b for b in self.bits if b not in (0, 1)]
        if bad:
            raise ValueError(f"assignment bits must be 0 or 1, got {bad[0]!r}")

    def __len__(self) -> int:
        return len(self.bits)


@dataclass(frozen=True)
class LeafProfile:
    """Multiset of leaf depths, stored sorted ascending."""

    depths: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "depths", tuple(sorted(self.depths)))

    @property
    def leaf_count(self) -> int:
        return len(self.depths)

    @property
    def min_depth(self) -> int:
        return self.depths[0]

    @property
    def max_depth(self) -> int:
        return self.depths[-1]

    def kraft_sum(self) -> Dyadic:
        """Sum of 2^-depth over leaves; exactly 1 for full binary trees."""
        total = Dyadic(0)
        for depth_ in self.depths:
            total = total + Dyadic(1, depth_)
        return total


# ---------------------------------------------------------------------------
# basic walks
# ---------------------------------------------------------------------------

def depth(node: "TreeNode | Shape") -> int:
    if isinstance(node, Shape):
        if node.children is None:
            return 0
        return 1 + max(depth(node.children[0]), depth(node.children[1]))
    if isinstance(node, Query):
        return 1 + max(depth(node.on0), depth(node.on1))
    return 0


def leaf_count(node: "TreeNode | Shape") -> int:
    if isinstance(node, Shape):
        if node.children is None:
            return 1
        return leaf_count(node.children[0]) + leaf_count(node.children[1])
    if isinstance(node, Query):
        return leaf_count(node.on0) + leaf_count(node.on1)
    return 1


def leaves(node: TreeNode) -> Iterator[TreeNode]:
    """Terminals in depth-first on0-first order."""
    if isinstance(node, Query):
        yield from leaves(node.on0)
        yield from leaves(node.on1)
    else:
        yield node


def variables_of(node: TreeNode) -> set[int]:
    """All variable indices queried anywhere in the tree."""
    out: set[int] = set()

    def walk(u: TreeNode) -> None:
        if isinstance(u, Query):
            out.add(u.var)
            walk(u.on0)
            walk(u.on1)

    walk(node)
    return out


def shape_of(node: TreeNode) -> Shape:
    if isinstance(node, Query):
        return Shape((shape_of(node.on0), shape_of(node.on1)))
    return SHAPE_LEAF


def structure_of(tree: DecisionTree) -> Structure:
    """Forget the leaf bits, keeping internal labels."""
    if isinstance(tree, Query):
        return Query(tree.var, structure_of(tree.on0), structure_of(tree.on1))
    return OPEN


def leaf_depths(node: "TreeNode | Shape") -> tuple[int, ...]:
    """Leaf depths in depth-first on0-first order (not sorted)."""
    depths: list[int] = []

    def walk(u: "TreeNode | Shape", k: int) -> None:
        if isinstance(u, Shape):
            if u.children is None:
                depths.append(k)
            else:
                walk(u.children[0], k + 1)
                walk(u.children[1], k + 1)
        elif isinstance(u, Query):
            walk(u.on0, k + 1)
            walk(u.on1, k + 1)
        else:
            depths.append(k)

    walk(node, 0)
    return tuple(depths)


def leaf_profile(node: "TreeNode | Shape") -> LeafProfile:
    return LeafProfile(leaf_depths(node))


def min_leaf_depth(node: "TreeNode | Shape") -> int:
    if isinstance(node, Shape):
        if node.children is None:
            return 0
        return 1 + min(min_leaf_depth(node.children[0]),
                       min_leaf_depth(node.children[1]))
    if isinstance(node, Query):
        return 1 + min(min_leaf_depth(node.on0), min_leaf_depth(node.on1))
    return 0


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def trace(tree: DecisionTree, x) -> tuple[int, int]:
    """Follow ``x`` from the root; return (leaf value, queries made)."""
    queries = 0
    node = tree
    while isinstance(node, Query):
        if node.var >= len(x):
            raise ValueError(
                f"input has {len(x)} bits but tree queries variable {node.var}"
            )
        node = node.on1 if x[node.var] else node.on0
        queries += 1
    if isinstance(node, OpenLeaf):
        raise ValueError("cannot evaluate a structure with open leaves")
    return node.value, queries


def evaluate(tree: DecisionTree, x) -> int:
    return trace(tree, x)[0]


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

def validate(node: "TreeNode", n: int, d: int) -> list[str]:
    """Collect every invariant violation; an empty list means the tree is ok.

    Checks: no variable repeated on any root-to-leaf path, all variable
    indices below ``n``, and depth at most ``d``.
    """
    violations: list[str] = []

    def walk(u: TreeNode, k: int, on_path: set[int]) -> int:
        if not isinstance(u, Query):
            return k
        if u.var in on_path:
            violations.append(f"variable {u.var} repeated on path")
        if not (0 <= u.var < n):
            violations.append(f"variable {u.var} out of range for n={n}")
        on_path.add(u.var)
        deepest = max(walk(u.on0, k + 1, on_path), walk(u.on1, k + 1, on_path))
        on_path.discard(u.var)
        return deepest

    deepest = walk(node, 0, set())
    if deepest > d:
        violations.append(f"depth {deepest} exceeds bound d={d}")
    return violations


# ---------------------------------------------------------------------------
# structure <-> tree
# ---------------------------------------------------------------------------

def assemble(structure: Structure, assignment: LeafAssignment) -> DecisionTree:
    """Close a structure's leaves with the given bits (depth-first order)."""
    bits = assignment.bits
    pos = 0

    def build(u: Structure) -> DecisionTree:
        nonlocal pos
        if isinstance(u, Query):
            left = build(u.on0)
            right = build(u.on1)
            return Query(u.var, left, right)
        pos += 1
        return Leaf(bits[pos - 1])

    if leaf_count(structure) != len(bits):
        raise ValueError(
            f"assignment has {len(bits)} bits for a structure with "
            f"{leaf_count(structure)} leaves"
        )
    return build(structure)


def disassemble(tree: DecisionTree) -> tuple[Structure, LeafAssignment]:
    bits = [leaf.value for leaf in leaves(tree)]  # type: ignore[union-attr]
    return structure_of(tree), LeafAssignment(tuple(bits))


def flip_leaf(tree: DecisionTree, index: int) -> DecisionTree:
    """New tree with the ``index``-th leaf (depth-first order) inverted.

    Subtrees on the other side of the flipped path are shared, not copied.
    """
    pos = 0

    def walk(u: DecisionTree) -> DecisionTree:
        nonlocal pos
        if isinstance(u, Leaf):
            pos += 1
            if pos - 1 == index:
                return Leaf(1 - u.value)
            return u
        left = walk(u.on0)
        right = walk(u.on1)
        if left is u.on0 and right is u.on1:
            return u
        return Query(u.var, left, right)

    total = leaf_count(tree)
    if not (0 <= index < total):
        raise ValueError(f"leaf index {index} out of range for {total} leaves")
    return walk(tree)


# ---------------------------------------------------------------------------
# text codec
# ---------------------------------------------------------------------------

def serialize(tree: DecisionTree) -> str:
    """Canonical one-line text form: leaves {"leaf":b}, nodes {"var":k,...}."""

    def to_obj(u: DecisionTree) -> dict:
        if isinstance(u, Leaf):
            return {"leaf": u.value}
        if isinstance(u, OpenLeaf):
            raise ValueError("cannot serialize a structure with open leaves")
        return {"var": u.var, "on0": to_obj(u.on0), "on1": to_obj(u.on1)}

    return json.dumps(to_obj(tree), separators=(",", ":"))


def parse(text: str) -> DecisionTree:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(f"invalid tree text at position {exc.pos}: {exc.msg}") from None

    def from_obj(o, path: str) -> DecisionTree:
        if not isinstance(o, dict):
            raise TreeFormatError(f"expected an object at {path}, got {type(o).__name__}")
        if "leaf" in o:
            if set(o) != {"leaf"}:
                raise TreeFormatError(f"unexpected fields in leaf at {path}: {sorted(set(o) - {'leaf'})}")
            if o["leaf"] not in (0, 1):
                raise TreeFormatError(f"leaf value at {path} must be 0 or 1, got {o['leaf']!r}")
            return Leaf(o["leaf"])
        if set(o) != {"var", "on0", "on1"}:
            raise TreeFormatError(
                f"node at {path} must have exactly var/on0/on1, got {sorted(o)}"
            )
        var = o["var"]
        if not isinstance(var, int) or isinstance(var, bool) or var < 0:
            raise TreeFormatError(f"var at {path} must be a nonnegative integer, got {var!r}")
        return Query(
            var,
            from_obj(o["on0"], path + ".on0"),
            from_obj(o["on1"], path + ".on1"),
        )

    return from_obj(obj, "$")


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def complete_shape(d: int) -> Shape:
    if d < 0:
        raise ValueError("depth must be >= 0")
    shape = SHAPE_LEAF
    for _ in range(d):
        shape = Shape((shape, shape))
    return shape


def complete_structure(d: int, order: "tuple[int, ...] | None" = None) -> Structure:
    """Complete depth-d structure querying ``order[k]`` at depth k everywhere.

    The default order is 0..d-1, which is non-redundant because each level
    uses a fresh variable.
    """
    if order is None:
        order = tuple(range(d))
    if len(order) != d:
        raise ValueError(f"order must list {d} variables, got {len(order)}")
    node: Structure = OPEN
    for var in reversed(order):
        node = Query(var, node, node)
    return node


def gated_and_tree(n: int, alpha: int) -> DecisionTree:
    """Tree for "alpha if x0 else AND(x1..x_{n-1})"; leaf depths 1,2,..,n-1,n,n.

    Flipping the depth-1 leaf (alpha) moves the output on half of all inputs,
    which makes this family a near-tightness witness for the one-leaf
    sensitivity bound.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    node: DecisionTree = Leaf(1)
    for var in range(n - 1, 0, -1):
        node = Query(var, Leaf(0), node)
    return Query(0, node, Leaf(alpha))
