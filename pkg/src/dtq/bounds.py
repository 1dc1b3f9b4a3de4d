"""Closed-form bounds: query lower bound, concentration tails, Lipschitz
constants, shallow-leaf tails, and their assembled two-term combinations.

Tail values can be far below double-precision range (exponents like -2^50),
so every tail is carried as a ``BoundValue`` holding both the raw double
(possibly underflowed to 0.0) and the exact-ish base-2 logarithm computed in
log space.  Values above 1 are vacuous as probabilities; ``clamped`` reports
them as 1 while ``raw`` keeps the unclamped number.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dyadic import ZERO, Dyadic
from .trees import LeafProfile

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class BoundValue:
    """A nonnegative bound with an underflow-proof log2 companion.

    ``log2`` is None only when the value is exactly zero.  ``in_range``
    records whether the parameters satisfy the precondition under which the
    formula is actually a guarantee; out-of-range values are still computed.
    """

    raw: float
    log2: "float | None"
    in_range: bool = True

    @property
    def clamped(self) -> float:
        return min(self.raw, 1.0)


def _from_log2(log2: float, in_range: bool = True) -> BoundValue:
    if log2 < -1100.0:
        raw = 0.0
    elif log2 > 1024.0:
        raw = math.inf
    else:
        raw = 2.0 ** log2
    return BoundValue(raw, log2, in_range)


def _log2_add(a: "float | None", b: "float | None") -> "float | None":
    """log2(2^a + 2^b) without leaving log space."""
    if a is None:
        return b
    if b is None:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log2(1.0 + 2.0 ** (lo - hi))


# ---------------------------------------------------------------------------
# individual bounds
# ---------------------------------------------------------------------------

def quantum_query_lower_bound(s_bar: float, epsilon: float) -> float:
    """Lower bound (1/2)(1-2*epsilon)^2 * s_bar on the quantum query count
    of any algorithm computing the function with failure probability at most
    epsilon; at epsilon = 1/3 this is s_bar / 18."""
    if not 0.0 <= epsilon <= 0.5:
        raise ValueError(f"epsilon must be in [0, 1/2], got {epsilon}")
    if isinstance(s_bar, Dyadic):
        s_bar = float(s_bar)
    if s_bar < 0.0:
        raise ValueError(f"average sensitivity must be >= 0, got {s_bar}")
    return 0.5 * (1.0 - 2.0 * epsilon) ** 2 * s_bar


def mcdiarmid_tail(L: int, eta: float, delta: float) -> BoundValue:
    """Bounded-differences tail exp(-2*delta^2 / (L*eta^2)).

    Bounds the probability that a function of L independent bits, moved by
    at most eta per bit, falls delta below its mean.  eta=0 means the
    function is constant: the tail is 0 for delta > 0 and 1 for delta = 0.
    """
    if L < 1:
        raise ValueError(f"L must be >= 1, got {L}")
    if eta < 0.0 or delta < 0.0:
        raise ValueError("eta and delta must be >= 0")
    if delta == 0.0:
        return BoundValue(1.0, 0.0)
    if eta == 0.0:
        return BoundValue(0.0, None)
    exponent_nat = -2.0 * delta * delta / (float(L) * eta * eta)
    return _from_log2(exponent_nat / _LN2)


def lipschitz_bound(profile: LeafProfile) -> Dyadic:
    """Largest possible change of avg sensitivity from rewriting one leaf:
    max over leaves of d(l) * 2^(1-d(l)), exactly."""
    best = ZERO
    for d in set(profile.depths):
        if d:
            candidate = Dyadic(d, d - 1)
            if candidate > best:
                best = candidate
    return best


def lipschitz_for_min_depth(d: int, min_depth: float) -> float:
    """Worst-case Lipschitz constant over depth-<=d trees whose every leaf
    is at depth >= min_depth.

    x * 2^(1-x) peaks at x in {1, 2} and decreases beyond, so the max over
    [min_depth, d] sits at the left end once min_depth >= 2.
    """
    if d < 0:
        raise ValueError("depth must be >= 0")
    if not 0 <= min_depth <= d:
        raise ValueError(f"min_depth must be in [0, {d}], got {min_depth}")
    if d == 0:
        return 0.0
    m = max(min_depth, 1.0)
    if m < 2.0 <= d:
        m = 2.0
    return m * 2.0 ** (1.0 - m)


def leaf_depth_tail(d: int, h: float) -> BoundValue:
    """Tail 2^(1 - 2^(d-h-2)) on the probability that a uniform shape of
    depth <= d has some leaf at depth <= h.

    The guarantee needs h <= d - log2(d) - 2; outside that window the value
    is still returned but flagged.
    """
    if d < 0:
        raise ValueError("depth must be >= 0")
    in_range = d >= 1 and h <= d - math.log2(d) - 2.0
    inner = d - h - 2.0
    if inner == int(inner):
        # keep the doubly exponential exponent exact while it is an integer
        exponent = 1 - (1 << int(inner)) if inner >= 0 else 1.0 - 2.0 ** inner
    else:
        exponent = 1.0 - 2.0 ** inner
    try:
        log2 = float(exponent)
    except OverflowError:
        log2 = -math.inf
    return _from_log2(log2, in_range)


def assembled_concentration(d: int, delta: float) -> BoundValue:
    """The bounded-differences tail after substituting L = 2^d leaves and
    the min-depth-2d/3 Lipschitz constant: exp(-(9/8) * 2^(d/3) * delta^2 / d^2)."""
    if d < 1:
        raise ValueError("depth must be >= 1")
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    exponent_nat = -1.125 * 2.0 ** (d / 3.0) * delta * delta / (d * d)
    return _from_log2(exponent_nat / _LN2)


@dataclass(frozen=True)
class TailBreakdown:
    """A two-term tail bound with its pieces and the threshold it guards."""

    threshold: float
    leaf_term: BoundValue
    concentration_term: BoundValue
    total: BoundValue


def typical_sensitivity_tail(d: int, epsilon: float) -> TailBreakdown:
    """Bound 2^(1-2^(d/3-2)) + exp(-2^(d/3-3)*epsilon^2) on the probability
    that a random depth-<=d tree has avg sensitivity below (1-epsilon)*d/3.

    The first term pays for shapes with a leaf shallower than 2d/3, the
    second for concentration of the leaf-bit average on the remaining
    shapes.  d/3 is taken as a real number, so d need not be divisible by 3.
    The leaf term is a guarantee only once 2d/3 <= d - log2(d) - 2 (roughly
    d >= 21); below that the assembled value is reported but flagged.
    """
    if d < 0:
        raise ValueError("depth must be >= 0")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    leaf = leaf_depth_tail(d, 2.0 * d / 3.0)
    if d >= 1:
        conc = assembled_concentration(d, epsilon * d / 3.0)
    else:
        conc = BoundValue(1.0, 0.0)
    total_log2 = _log2_add(leaf.log2, conc.log2)
    total = _from_log2(total_log2, leaf.in_range) if total_log2 is not None \
        else BoundValue(0.0, None, leaf.in_range)
    threshold = (1.0 - epsilon) * d / 3.0
    return TailBreakdown(threshold, leaf, conc, total)


def speedup_constant(epsilon: float) -> float:
    """Constant (1-epsilon)/54 such that a typical depth-d tree needs at
    least that fraction of d quantum queries: chain the query lower bound
    s_bar/18 with the typical-sensitivity threshold (1-epsilon)*d/3."""
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must be in (0, 1), got {epsilon}")
    return (1.0 - epsilon) / 54.0


#: Shallow-leaf cutoff h = d - LOOSE_C * log2(d) used by loose_tail.  c=2
#: keeps h inside the guaranteed window for every d >= 4 and makes both
#: terms decay like 2^(-poly(d)); larger c weakens the concentration term
#: below usefulness at desk-scale depths.
LOOSE_C = 2


def loose_tail(d: int, c: int = LOOSE_C, eps0: float = 0.5) -> TailBreakdown:
    """Simpler two-term tail on Pr[avg sensitivity < roughly d/2 - O(log d)].

    Uses the cutoff h = d - c*log2(d): the leaf term is leaf_depth_tail(d, h)
    and the concentration term is the bounded-differences tail with L = 2^d,
    eta = (h+1)*2^(-h) and delta = eps0*(h+1)/2, which simplifies to
    exp(-(eps0^2/2) * 2^(2h-d)).  The guarded threshold is
    (1-eps0)*(h+1)/2.
    """
    if d < 4:
        raise ValueError(f"need d >= 4, got {d}")
    if c < 1:
        raise ValueError("c must be >= 1")
    if not 0.0 < eps0 < 1.0:
        raise ValueError(f"eps0 must be in (0, 1), got {eps0}")
    h = d - c * math.log2(d)
    leaf = leaf_depth_tail(d, h)
    exponent_nat = -(eps0 * eps0 / 2.0) * 2.0 ** (2.0 * h - d)
    conc = _from_log2(exponent_nat / _LN2, leaf.in_range)
    total_log2 = _log2_add(leaf.log2, conc.log2)
    total = _from_log2(total_log2, leaf.in_range)
    threshold = (1.0 - eps0) * (h + 1.0) / 2.0
    return TailBreakdown(threshold, leaf, conc, total)
