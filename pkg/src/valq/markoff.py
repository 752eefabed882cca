"""Markoff triples, the region tree, and the refined quadratic irrationalities.

Solutions of x^2 + y^2 + z^2 = 3xyz are arranged as regions of the trivalent
tree: a region with neighbors a (upper left) and b (upper right) spawns a
left child between a and itself and a right child between itself and b, with
Markoff numbers 3*a*m - b and 3*m*b - a.  The orientation is anchored by the
classical picture: 194 sits between 13 and 5, 433 between 5 and 29.

Each region m with ordered neighbors (a, b) carries two quadratic numbers of
discriminant 9m^2 - 4, distinguished by which congruence a*k = b or b*k = a
(mod m) picks the residue k; they are the two non-real-conjugate classes the
experiments track.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from . import numerics
from .errors import DomainError
from .heckeval import val
from .quadratic import QuadIrr, make


class MarkoffNode:
    """A region of the Markoff tree; ``b`` is on the right of ``a``."""

    __slots__ = ("m", "left_region", "right_region", "path", "_children")

    def __init__(self, m, left_region, right_region, path):
        self.m = m
        self.left_region = left_region
        self.right_region = right_region
        self.path = path
        self._children = None

    @property
    def a(self) -> int:
        return self.left_region.m if self.left_region else 1

    @property
    def b(self) -> int:
        return self.right_region.m if self.right_region else 1

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.a, self.b, self.m)

    def children(self) -> tuple["MarkoffNode", "MarkoffNode"]:
        if self.m in (1, 2):
            raise DomainError("the boundary regions 1 and 2 have no child rule")
        if self._children is None:
            left = MarkoffNode(3 * self.a * self.m - self.b, self.left_region, self,
                               self.path + "L")
            right = MarkoffNode(3 * self.m * self.b - self.a, self, self.right_region,
                                self.path + "R")
            self._children = (left, right)
        return self._children

    def __repr__(self):
        return f"MarkoffNode(m={self.m}, a={self.a}, b={self.b}, path={self.path!r})"


def tree(depth: int) -> list[MarkoffNode]:
    """All regions to the given generation: 1, 2, then the child tree of 5.

    depth 0 is just [1, 2, 5]; each extra level doubles the frontier.
    Nodes are keyed by their path, so correctness does not rest on the
    uniqueness conjecture for Markoff numbers.
    """
    if depth < 0:
        raise DomainError("depth must be >= 0")
    one = MarkoffNode(1, None, None, "1")
    two = MarkoffNode(2, None, None, "2")
    root = MarkoffNode(5, one, two, "")
    nodes = [one, two, root]
    frontier = [root]
    for _ in range(depth):
        nxt = []
        for node in frontier:
            nxt.extend(node.children())
        nodes.extend(nxt)
        frontier = nxt
    return nodes


def _check_triple(a, b, m):
    if a * a + b * b + m * m != 3 * a * b * m:
        raise DomainError(f"({a},{b},{m}) is not a Markoff triple")


@dataclass(frozen=True)
class MarkoffTheta:
    """The refined pair of irrationalities attached to one region."""

    m: int
    k1: int
    k2: int
    theta1: QuadIrr
    theta2: QuadIrr

    @property
    def disc(self) -> int:
        return 9 * self.m * self.m - 4

    def hurwitz_constant(self, p: int):
        """L = sqrt(9 - 4/m^2) < 3."""
        c = numerics.context(p)
        return c.sqrt(c.sub(numerics.real(9, p), Fraction(4, self.m * self.m)))


def _theta_from_k(m: int, k: int) -> QuadIrr:
    # (-3m + 2k + sqrt(9m^2-4)) / (2m), i.e. the form (m, 3m-2k, (k^2-3mk+1)/m)
    num = k * k - 3 * m * k + 1
    if num % m:
        raise DomainError(f"residue {k} is not admissible mod {m}")
    return make(m, 3 * m - 2 * k, num // m)


def theta(node: MarkoffNode) -> MarkoffTheta:
    """Both refined irrationalities of a region, with least non-negative k."""
    a, b, m = node.triple
    _check_triple(a, b, m)
    if m == 1:
        k1 = k2 = 0
    else:
        k1 = (pow(a, -1, m) * b) % m
        k2 = (pow(b, -1, m) * a) % m
    return MarkoffTheta(m=m, k1=k1, k2=k2,
                        theta1=_theta_from_k(m, k1),
                        theta2=_theta_from_k(m, k2))


def neighbor_sequences(node: MarkoffNode, K: int) -> tuple[list[MarkoffNode], list[MarkoffNode]]:
    """First K regions adjacent to ``node`` down its left and right edges.

    For a generic region these are the left child followed by that child's
    right-child chain (and mirrored on the right).  The boundary regions are
    special: region 1 only has the right sequence 2, 5, 13, 34, ... and
    region 2 only has the left sequence 1, 5, 29, 169, ...
    """
    if K < 1:
        raise DomainError("K must be >= 1")
    if node.m == 1:
        two = MarkoffNode(2, None, None, "2")
        root = MarkoffNode(5, node, two, "")
        seq = [two, root]
        cur = root
        while len(seq) < K:
            cur = cur.children()[0]
            seq.append(cur)
        return [], seq[:K]
    if node.m == 2:
        one = MarkoffNode(1, None, None, "1")
        root = MarkoffNode(5, one, node, "")
        seq = [one, root]
        cur = root
        while len(seq) < K:
            cur = cur.children()[1]
            seq.append(cur)
        return seq[:K], []
    left_chain = []
    cur = node.children()[0]
    while len(left_chain) < K:
        left_chain.append(cur)
        cur = cur.children()[1]
    right_chain = []
    cur = node.children()[1]
    while len(right_chain) < K:
        right_chain.append(cur)
        cur = cur.children()[0]
    return left_chain, right_chain


@dataclass
class ObservationRow:
    index: int
    node: MarkoffNode
    thetas: MarkoffTheta
    val1: object
    val2: object
    real1: bool
    real2: bool
    im1_positive: bool
    im2_negative: bool


@dataclass
class BetweennessRow:
    child: MarkoffNode
    ok_re: tuple[bool, bool]
    ok_im: tuple[bool, bool]
    exceptional: bool


@dataclass
class NeighborLimitRow:
    node: MarkoffNode
    side: str
    values: list
    deltas: list


@dataclass
class MarkoffReport:
    p_target: int
    rows: list[ObservationRow]
    betweenness: list[BetweennessRow]
    neighbor_limits: list[NeighborLimitRow]
    real_tol: float


def observation_report(depth: int, p_target: int, neighbor_K: int = 0,
                       neighbor_m: int = 5, top: int | None = None) -> MarkoffReport:
    """Per-region values and the empirical flags the experiments look at.

    Realness/sign/betweenness are reported, not asserted: they are open
    observations, and a violation shows up as a False flag in the output.
    ``top`` keeps only the regions with the smallest Markoff numbers.
    """
    nodes = sorted(tree(depth), key=lambda nd: nd.m)
    if top is not None:
        nodes = nodes[:top]
    real_tol = 2.0 ** (-(p_target - 4))
    vals: dict[str, tuple] = {}
    rows = []
    for i, node in enumerate(nodes, start=1):
        th = theta(node)
        v1 = val(th.theta1, p_target).value
        v2 = val(th.theta2, p_target).value
        vals[node.path] = (v1, v2)
        rows.append(ObservationRow(
            index=i, node=node, thetas=th, val1=v1, val2=v2,
            real1=abs(float(v1.imag)) < real_tol,
            real2=abs(float(v2.imag)) < real_tol,
            im1_positive=float(v1.imag) > 0,
            im2_negative=float(v2.imag) < 0,
        ))
    betweenness = []
    for node in nodes:
        if node.m in (1, 2) or node.left_region is None:
            continue
        pa, pb = node.left_region.path, node.right_region.path
        if pa not in vals or pb not in vals or node.path not in vals:
            continue
        va, vb = vals[pa], vals[pb]
        vc = vals[node.path]
        exceptional = {node.left_region.m, node.right_region.m} == {1, 2}
        ok_re = tuple(_between(float(vc[j].real), float(va[j].real), float(vb[j].real))
                      for j in (0, 1))
        ok_im = tuple(_between(float(vc[j].imag), float(va[j].imag), float(vb[j].imag))
                      for j in (0, 1))
        betweenness.append(BetweennessRow(child=node, ok_re=ok_re, ok_im=ok_im,
                                          exceptional=exceptional))
    neighbor_limits = []
    if neighbor_K:
        target = next((nd for nd in nodes if nd.m == neighbor_m), None)
        if target is None:
            raise DomainError(f"no region with m={neighbor_m} at this depth")
        th0 = theta(target)
        lims = (val(th0.theta1, p_target).value, val(th0.theta2, p_target).value)
        nL, nR = neighbor_sequences(target, neighbor_K)
        for side, chain, j in (("R", nR, 0), ("L", nL, 1)):
            if not chain:
                continue
            values = []
            deltas = []
            for nd in chain:
                v = val(getattr(theta(nd), f"theta{j + 1}"), p_target).value
                values.append(v)
                deltas.append(abs(complex(v) - complex(lims[j])))
            neighbor_limits.append(NeighborLimitRow(node=target, side=side,
                                                    values=values, deltas=deltas))
    return MarkoffReport(p_target=p_target, rows=rows, betweenness=betweenness,
                         neighbor_limits=neighbor_limits, real_tol=real_tol)


def _between(x: float, lo: float, hi: float) -> bool:
    if lo > hi:
        lo, hi = hi, lo
    return lo <= x <= hi
