"""Exact rational polytopes: H-representations, vertex enumeration,
capacities, the bundled region catalog, and the four-variable transfer
operation that turns information/rank inequalities into rate bounds for
the vamos network.

All arithmetic uses :class:`fractions.Fraction`; no floating point ever
enters a region computation, so enumerated vertex sets can be compared
for exact equality against the cataloged expectations.

Vertex enumeration solves every m-subset of the inequality system
exactly and keeps the feasible solutions.  With at most 13 inequalities
in dimension at most 4 that is a few hundred small linear solves, which
beats fancier incremental methods on simplicity and determinism.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

Rat = Fraction


class UnboundedPolyhedronError(ValueError):
    pass


@dataclass(frozen=True)
class HalfSpace:
    """One inequality  coeffs . r <= bound.

    An all-zero coefficient row is only legal as a tautology (bound >= 0);
    with a negative bound it would be a bare contradiction, which is
    rejected rather than carried around.
    """

    coeffs: tuple[Fraction, ...]
    bound: Fraction

    def __post_init__(self) -> None:
        if self.bound < 0 and not any(self.coeffs):
            raise ValueError("contradictory halfspace: 0 <= negative bound")

    @property
    def tautological(self) -> bool:
        return not any(self.coeffs) and self.bound >= 0


@dataclass(frozen=True)
class HRep:
    dim: int
    halfspaces: tuple[HalfSpace, ...]

    def __post_init__(self) -> None:
        for hs in self.halfspaces:
            if len(hs.coeffs) != self.dim:
                raise ValueError("halfspace dimension mismatch")


@dataclass(frozen=True)
class VRep:
    """Vertex list, lexicographically sorted, no duplicates."""

    vertices: tuple[tuple[Fraction, ...], ...]

    def __len__(self) -> int:
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)


def halfspace(coeffs: Sequence, bound) -> HalfSpace:
    return HalfSpace(tuple(Fraction(c) for c in coeffs), Fraction(bound))


def hrep(dim: int, rows: Iterable[tuple[Sequence, object]]) -> HRep:
    return HRep(dim, tuple(halfspace(c, b) for c, b in rows))


def vrep(points: Iterable[Sequence]) -> VRep:
    pts = {tuple(Fraction(x) for x in p) for p in points}
    return VRep(tuple(sorted(pts)))


# ---------------------------------------------------------------------------
# exact rational Gaussian elimination helpers


def _solve_square(rows: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]):
    """Unique solution of a square system, or None when singular."""
    n = len(rows)
    aug = [list(rows[i]) + [rhs[i]] for i in range(n)]
    for col in range(n):
        pivot = next((i for i in range(col, n) if aug[i][col] != 0), None)
        if pivot is None:
            return None
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for i in range(n):
            if i != col and aug[i][col] != 0:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return tuple(aug[i][n] for i in range(n))


def _frac_rank(rows: Iterable[Sequence[Fraction]]) -> int:
    work = [list(r) for r in rows]
    rank = 0
    if not work:
        return 0
    ncols = len(work[0])
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(work)) if work[i][col] != 0), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        pv = work[rank][col]
        work[rank] = [x / pv for x in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][col] != 0:
                f = work[i][col]
                work[i] = [x - f * y for x, y in zip(work[i], work[rank])]
        rank += 1
        if rank == len(work):
            break
    return rank


def _frac_nullspace(rows: Sequence[Sequence[Fraction]], ncols: int):
    """Basis of {v : rows . v = 0} over the rationals."""
    work = [list(r) for r in rows]
    pivots: list[int] = []
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(work)) if work[i][col] != 0), None)
        if pivot is None:
            continue
        work[r], work[pivot] = work[pivot], work[r]
        pv = work[r][col]
        work[r] = [x / pv for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][col] != 0:
                f = work[i][col]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        pivots.append(col)
        r += 1
        if r == len(work):
            break
    basis = []
    pivot_set = set(pivots)
    for fc in range(ncols):
        if fc in pivot_set:
            continue
        v = [Fraction(0)] * ncols
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -work[i][fc]
        basis.append(tuple(v))
    return basis


# ---------------------------------------------------------------------------
# core polytope operations


def contains(h: HRep, point: Sequence) -> bool:
    """Exact membership: every inequality satisfied, no tolerance."""
    pt = tuple(Fraction(x) for x in point)
    if len(pt) != h.dim:
        raise ValueError(f"point has dimension {len(pt)}, expected {h.dim}")
    return all(
        sum(c * x for c, x in zip(hs.coeffs, pt)) <= hs.bound for hs in h.halfspaces
    )


def ensure_bounded(h: HRep) -> None:
    """Raise UnboundedPolyhedronError unless the recession cone is {0}.

    The cone {d : A d <= 0} is nonzero exactly when A is rank deficient
    (it then contains a line) or some rank-(m-1) subset of rows leaves a
    one-dimensional nullspace whose direction satisfies all inequalities;
    checking those finitely many candidate extreme rays is complete.
    """
    m = h.dim
    if m == 0:
        return
    rows = [hs.coeffs for hs in h.halfspaces]
    if _frac_rank(rows) < m:
        raise UnboundedPolyhedronError("constraint matrix is rank deficient")
    for subset in combinations(range(len(rows)), m - 1):
        sub = [rows[i] for i in subset]
        if _frac_rank(sub) != m - 1:
            continue
        null = _frac_nullspace(sub, m)
        if len(null) != 1:
            continue
        d = null[0]
        for direction in (d, tuple(-x for x in d)):
            if all(sum(c * x for c, x in zip(r, direction)) <= 0 for r in rows):
                raise UnboundedPolyhedronError(
                    f"unbounded along direction {tuple(map(str, direction))}"
                )


def enumerate_vertices(h: HRep) -> VRep:
    """All extreme points of a bounded H-representation.

    Every m-subset of inequalities with an invertible coefficient matrix
    is solved exactly; solutions satisfying the full system are kept,
    deduplicated and sorted.  An empty polytope yields an empty VRep; an
    unbounded system raises.
    """
    ensure_bounded(h)
    m = h.dim
    hs = h.halfspaces
    found: set[tuple[Fraction, ...]] = set()
    for subset in combinations(range(len(hs)), m):
        sol = _solve_square([hs[i].coeffs for i in subset], [hs[i].bound for i in subset])
        if sol is None:
            continue
        if sol in found:
            continue
        if contains(h, sol):
            found.add(sol)
    return VRep(tuple(sorted(found)))


def tight_constraints(h: HRep, point: Sequence) -> list[int]:
    pt = tuple(Fraction(x) for x in point)
    return [
        i
        for i, hs in enumerate(h.halfspaces)
        if sum(c * x for c, x in zip(hs.coeffs, pt)) == hs.bound
    ]


def is_extreme(h: HRep, point: Sequence) -> bool:
    """A feasible point is extreme iff its tight constraints have full rank."""
    if not contains(h, point):
        return False
    tights = tight_constraints(h, point)
    return _frac_rank([h.halfspaces[i].coeffs for i in tights]) == h.dim


def uniform_capacity(h: HRep) -> Fraction:
    """Largest t with t*(1,...,1) inside the region.

    Requires the region to contain the origin, which every rate region
    here does.  Along the diagonal each inequality with positive
    coefficient sum s caps t at bound/s; the minimum cap is exact.
    """
    origin = (Fraction(0),) * h.dim
    if not contains(h, origin):
        raise ValueError("region does not contain the origin")
    caps = []
    for hs in h.halfspaces:
        s = sum(hs.coeffs)
        if s > 0:
            caps.append(hs.bound / s)
    if not caps:
        raise UnboundedPolyhedronError("diagonal direction is unbounded")
    return min(caps)


def average_capacity(h: HRep) -> Fraction:
    """Maximum coordinate mean over the polytope (attained at a vertex)."""
    verts = enumerate_vertices(h)
    if not len(verts):
        raise ValueError("empty polytope has no average capacity")
    m = h.dim
    return max(sum(v) / m for v in verts)


# ---------------------------------------------------------------------------
# bundled region catalog

REGION_CLASSES = (
    "routing",
    "coding",
    "linear-even",
    "linear-odd",
    "linear",
    "shannon-outer",
    "zy-outer",
)


def _neg(m: int, i: int) -> tuple[int, ...]:
    return tuple(-1 if j == i else 0 for j in range(m))


def _nonneg(m: int) -> list[tuple[tuple[int, ...], int]]:
    return [(_neg(m, i), 0) for i in range(m)]


_GB_CODING_PLANES = _nonneg(4) + [
    ((0, 1, 0, 0), 1),
    ((0, 0, 1, 0), 1),
    ((1, 1, 1, 0), 2),
    ((0, 1, 1, 1), 2),
    ((1, 1, 1, 1), 3),
]

_GB_CODING_VERTS = [
    (0, 0, 0, 0), (0, 0, 0, 2), (2, 0, 0, 0), (0, 1, 0, 0),
    (0, 0, 1, 0), (2, 0, 0, 1), (1, 0, 0, 2), (0, 0, 1, 1),
    (1, 1, 0, 0), (1, 0, 1, 1), (1, 1, 0, 1), (0, 1, 1, 0),
    (0, 1, 0, 1), (1, 0, 1, 0),
]

_GB_ROUTING_PLANES = _GB_CODING_PLANES + [((0, 1, 1, 0), 1)]
_GB_ROUTING_VERTS = [v for v in _GB_CODING_VERTS if v != (0, 1, 1, 0)]

_FANO_CODING_PLANES = _nonneg(3) + [
    ((1, 0, 0), 1),
    ((0, 0, 1), 1),
    ((0, 1, 1), 2),
    ((1, 1, 0), 2),
]
_FANO_CODING_VERTS = [
    (0, 0, 0), (0, 0, 1), (1, 0, 0), (0, 2, 0),
    (0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1),
]

_FANO_ODD_PLANES = _nonneg(3) + [
    ((1, 0, 0), 1),
    ((0, 0, 1), 1),
    ((1, 2, 2), 4),
    ((2, 1, 2), 4),
    ((2, 2, 1), 4),
]
_FANO_ODD_VERTS = [
    (0, 0, 0), (0, 0, 1), (1, 0, 0), (0, 2, 0),
    (0, 1, 1), (1, 0, 1), (1, 1, 0),
    (Fraction(2, 3), Fraction(2, 3), 1),
    (1, Fraction(2, 3), Fraction(2, 3)),
    (Fraction(4, 5), Fraction(4, 5), Fraction(4, 5)),
]

_FANO_ROUTING_PLANES = _nonneg(3) + [
    ((1, 0, 0), 1),
    ((0, 0, 1), 1),
    ((1, 1, 1), 2),
]
_FANO_ROUTING_VERTS = [v for v in _FANO_CODING_VERTS if v != (1, 1, 1)]

_NONFANO_CODING_PLANES = _nonneg(3) + [
    ((1, 0, 0), 1),
    ((0, 1, 0), 1),
    ((0, 0, 1), 1),
]
_NONFANO_CODING_VERTS = [
    (0, 0, 0), (0, 0, 1), (1, 0, 0), (0, 1, 0),
    (0, 1, 1), (1, 0, 1), (1, 1, 0), (1, 1, 1),
]

_NONFANO_EVEN_PLANES = _NONFANO_CODING_PLANES + [((1, 1, 1), Fraction(5, 2))]
_NONFANO_EVEN_VERTS = [v for v in _NONFANO_CODING_VERTS if v != (1, 1, 1)] + [
    (1, 1, Fraction(1, 2)),
    (1, Fraction(1, 2), 1),
    (Fraction(1, 2), 1, 1),
]

_NONFANO_ROUTING_PLANES = _nonneg(3) + [((1, 1, 1), 1)]
_NONFANO_ROUTING_VERTS = [(0, 0, 0), (0, 0, 1), (1, 0, 0), (0, 1, 0)]

_VAMOS_ROUTING_PLANES = _nonneg(4) + [
    ((2, 1, 0, 2), 2),
    ((1, 1, 1, 2), 2),
]
_VAMOS_ROUTING_VERTS = [
    (0, 0, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1),
    (1, 0, 1, 0), (0, 2, 0, 0), (0, 0, 2, 0),
]

_VAMOS_SHANNON_PLANES = _nonneg(4) + [
    ((1, 0, 0, 0), 1),
    ((0, 0, 0, 1), 1),
    ((0, 1, 1, 0), 2),
    ((1, 1, 0, 0), 2),
    ((0, 0, 1, 1), 2),
]
_VAMOS_SHANNON_VERTS = [
    (0, 2, 0, 1), (0, 2, 0, 0), (1, 1, 1, 0), (1, 1, 0, 0),
    (1, 1, 0, 1), (1, 0, 0, 1), (0, 0, 0, 1), (0, 0, 0, 0),
    (1, 0, 0, 0), (1, 0, 1, 1), (0, 0, 1, 1), (0, 1, 1, 1),
    (1, 0, 2, 0), (0, 0, 2, 0), (1, 1, 1, 1),
]

_VAMOS_LINEAR_PLANES = _VAMOS_SHANNON_PLANES + [((1, 2, 2, 1), 5)]
_VAMOS_LINEAR_VERTS = [
    (0, 0, 2, 0), (0, 0, 1, 1), (1, 0, 1, 1), (1, 0, 0, 0),
    (0, 0, 0, 0), (0, 0, 0, 1), (1, 0, 0, 1), (1, 1, 0, 1),
    (1, 1, 0, 0), (0, 2, 0, 0),
    (1, 1, Fraction(1, 2), 1), (1, Fraction(1, 2), 1, 1),
    (0, 2, 0, 1), (1, 1, 1, 0), (0, 1, 1, 1), (1, 0, 2, 0),
]

_VAMOS_ZY_PLANES = _VAMOS_SHANNON_PLANES + [
    ((4, 4, 2, 1), 10),
    ((2, 2, 4, 4), 11),
    ((1, 2, 4, 5), 11),
    ((5, 6, 6, 5), 20),
]


@dataclass(frozen=True)
class RegionSpec:
    dim: int
    planes: tuple
    expected: tuple | None  # None: no cataloged vertex list


_CATALOG: dict[tuple[str, str], RegionSpec] = {
    ("gbutterfly", "coding"): RegionSpec(4, tuple(_GB_CODING_PLANES), tuple(_GB_CODING_VERTS)),
    ("gbutterfly", "routing"): RegionSpec(4, tuple(_GB_ROUTING_PLANES), tuple(_GB_ROUTING_VERTS)),
    ("fano", "coding"): RegionSpec(3, tuple(_FANO_CODING_PLANES), tuple(_FANO_CODING_VERTS)),
    ("fano", "linear-odd"): RegionSpec(3, tuple(_FANO_ODD_PLANES), tuple(_FANO_ODD_VERTS)),
    ("fano", "routing"): RegionSpec(3, tuple(_FANO_ROUTING_PLANES), tuple(_FANO_ROUTING_VERTS)),
    ("nonfano", "coding"): RegionSpec(3, tuple(_NONFANO_CODING_PLANES), tuple(_NONFANO_CODING_VERTS)),
    ("nonfano", "linear-even"): RegionSpec(3, tuple(_NONFANO_EVEN_PLANES), tuple(_NONFANO_EVEN_VERTS)),
    ("nonfano", "routing"): RegionSpec(3, tuple(_NONFANO_ROUTING_PLANES), tuple(_NONFANO_ROUTING_VERTS)),
    ("vamos", "routing"): RegionSpec(4, tuple(_VAMOS_ROUTING_PLANES), tuple(_VAMOS_ROUTING_VERTS)),
    ("vamos", "shannon-outer"): RegionSpec(4, tuple(_VAMOS_SHANNON_PLANES), tuple(_VAMOS_SHANNON_VERTS)),
    ("vamos", "linear"): RegionSpec(4, tuple(_VAMOS_LINEAR_PLANES), tuple(_VAMOS_LINEAR_VERTS)),
    ("vamos", "zy-outer"): RegionSpec(4, tuple(_VAMOS_ZY_PLANES), None),
}

# The general nonlinear region coincides with a linear class on three of
# the networks, so those class names are accepted as aliases.
_ALIASES: dict[tuple[str, str], str] = {
    ("gbutterfly", "linear"): "coding",
    ("fano", "linear-even"): "coding",
    ("nonfano", "linear-odd"): "coding",
}


def canonical_class(network: str, region_class: str) -> str:
    """Resolve class aliases, e.g. (fano, linear-even) -> coding."""
    resolved = _ALIASES.get((network, region_class), region_class)
    if (network, resolved) not in _CATALOG:
        raise KeyError(f"no region cataloged for network={network!r} class={region_class!r}")
    return resolved


def region_classes(network: str) -> tuple[str, ...]:
    canonical = [cls for (net, cls) in _CATALOG if net == network]
    aliases = [cls for (net, cls) in _ALIASES if net == network]
    if not canonical:
        raise KeyError(f"unknown network {network!r}")
    return tuple(canonical + aliases)


def builtin_region(network: str, region_class: str) -> tuple[HRep, VRep]:
    """The cataloged H-representation and expected vertex list.

    The expected VRep is empty for (vamos, zy-outer), where no reference
    vertex list is cataloged.
    """
    key = (network, _ALIASES.get((network, region_class), region_class))
    if key not in _CATALOG:
        raise KeyError(f"no region cataloged for network={network!r} class={region_class!r}")
    spec = _CATALOG[key]
    h = hrep(spec.dim, spec.planes)
    expected = vrep(spec.expected) if spec.expected is not None else VRep(())
    return h, expected


# ---------------------------------------------------------------------------
# transfer of four-variable inequalities to vamos rate bounds


@dataclass(frozen=True)
class TransferCoefficients:
    """Coefficients a1..a10 of a four-variable inequality of the shape

        a1 I(A;B) <= a2 I(A;B|C) + a3 I(A;C|B) + a4 I(B;C|A)
                   + a5 I(A;B|D) + a6 I(A;D|B) + a7 I(B;D|A)
                   + a8 I(C;D)   + a9 I(C;D|A) + a10 I(C;D|B).
    """

    a: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        if len(self.a) != 10:
            raise ValueError("exactly ten coefficients required")


def transfer_coefficients(values: Sequence) -> TransferCoefficients:
    return TransferCoefficients(tuple(Fraction(v) for v in values))


INGLETON_COEFFS = transfer_coefficients([1, 1, 0, 0, 1, 0, 0, 1, 0, 0])
ZHANG_YEUNG_COEFFS = transfer_coefficients([1, 2, 1, 1, 1, 0, 0, 1, 0, 0])
ZHANG_YEUNG_SWAPPED_COEFFS = transfer_coefficients([1, 1, 0, 0, 2, 1, 1, 1, 0, 0])


@dataclass(frozen=True)
class VamosBound:
    """Entropy bound induced on the vamos message/edge variables.

    lhs:  message_coeffs . (H(a),H(b),H(c),H(d)) + cy_coeff*I(c;y)
          + bx_coeff*I(b;x)
    rhs:  edge_coeffs . (H(w),H(x),H(y),H(z))

    When both slack coefficients are nonnegative (``reducible``) the
    slack terms can be dropped and substituting H(msg)=k, H(edge)=n
    yields the rate bound  rate_coeffs . k <= n_coeff * n.
    """

    message_coeffs: tuple[Fraction, Fraction, Fraction, Fraction]
    cy_coeff: Fraction
    bx_coeff: Fraction
    edge_coeffs: tuple[Fraction, Fraction, Fraction, Fraction]
    reducible: bool
    rate_coeffs: tuple[Fraction, Fraction, Fraction, Fraction] | None
    n_coeff: Fraction | None

    def rate_halfspace(self) -> HalfSpace:
        if not self.reducible:
            raise ValueError("bound is not reducible to a rate bound")
        assert self.rate_coeffs is not None and self.n_coeff is not None
        return HalfSpace(self.rate_coeffs, self.n_coeff)


def transfer_vamos(c: TransferCoefficients) -> VamosBound:
    (a1, a2, a3, a4, a5, a6, a7, a8, a9, a10) = c.a
    message = (
        a2 + a3 + a4,
        a2 + a3 + a8 + a9 + a10,
        a5 + a7 + a8 + a9 + a10,
        a5 + a6 + a7,
    )
    cy = a2 - a1 - a7
    bx = a4 + a7 - a10
    edge = (
        a5 + a6 + a7 + a8 + a9 + a10,
        a2 + a3 + a4 + a7,
        -a1 + a2 + a5 + a9,
        a3 + a8 + a10,
    )
    reducible = a2 >= a1 + a7 and a4 + a7 >= a10
    if reducible:
        rate_coeffs = message
        n_coeff = (
            -a1 + 2 * a2 + 2 * a3 + a4 + 2 * a5 + a6
            + 2 * a7 + 2 * a8 + 2 * a9 + 2 * a10
        )
    else:
        rate_coeffs = None
        n_coeff = None
    return VamosBound(message, cy, bx, edge, reducible, rate_coeffs, n_coeff)


# ---------------------------------------------------------------------------
# textual formats


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_fraction(s: str) -> Fraction:
    try:
        return Fraction(s.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"cannot parse rational {s!r}") from exc


def parse_hrep(text: str) -> HRep:
    """One inequality per line: ``c1 c2 ... cm <= b``.

    Entries are integers or p/q rationals; ``#`` starts a comment and
    blank lines are ignored.  All rows must share one dimension.
    """
    rows: list[tuple[list[Fraction], Fraction]] = []
    dim: int | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "<=" not in line:
            raise ValueError(f"line {lineno}: missing '<='")
        lhs, _, rhs = line.partition("<=")
        coeffs = [parse_fraction(tok) for tok in lhs.split()]
        if not coeffs:
            raise ValueError(f"line {lineno}: no coefficients")
        bound = parse_fraction(rhs)
        if dim is None:
            dim = len(coeffs)
        elif dim != len(coeffs):
            raise ValueError(f"line {lineno}: expected {dim} coefficients")
        rows.append((coeffs, bound))
    if dim is None:
        raise ValueError("empty H-representation")
    return hrep(dim, rows)


def hrep_to_text(h: HRep) -> str:
    lines = [
        " ".join(frac_str(c) for c in hs.coeffs) + " <= " + frac_str(hs.bound)
        for hs in h.halfspaces
    ]
    return "\n".join(lines) + "\n"


def vrep_to_text(v: VRep) -> str:
    return "\n".join(" ".join(frac_str(x) for x in vert) for vert in v.vertices) + "\n"
