"""Linear rank inequality expressions and violation search.

An expression is a rational combination of atoms ``H(S|T)`` and
``I(S;T|U)`` over named variables.  Evaluated on a subspace assignment
(entropy of a variable set = dimension of the subspace join), an
inequality stored in slack orientation ``RHS - LHS >= 0`` is violated
exactly when its value is negative.

Four inequalities are bundled: ``ingleton`` and ``zhang-yeung`` (valid
for subspace ranks over every field), and two characteristic-dependent
inequalities, ``oddLRI`` (valid over odd characteristic, and over any
field in ambient dimension <= 2) and ``evenLRI`` (the mirror claim for
even characteristic).  Violation search supports three modes:

- ``catalog``: try the bundled counterexample assignments;
- ``exhaustive``: scan every assignment of enumerated subspaces to the
  expression's variables, in lexicographic order, returning the first
  violator;
- ``sample``: seeded uniform sampling with a reproducible generator
  (see :class:`SplitMix64`; the i-th draw depends only on seed and i,
  so runs are reproducible across implementations and chunk sizes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .ff import PrimeField, PrimeFieldMatrix, mat_rank, mat_stack, mat
from .subspace import (
    SubspaceAssignment,
    SubspaceLattice,
    entropy,
    lattice,
    subspace_span,
)

DEFAULT_BUDGET = 2_000_000
DEFAULT_SAMPLES = 100_000

INEQUALITY_IDS = ("ingleton", "zhang-yeung", "oddLRI", "evenLRI")


# ---------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class HAtom:
    """H(S | T); T may be empty."""

    subset: frozenset[str]
    given: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.subset:
            raise ValueError("H() needs at least one variable")

    def variables(self) -> frozenset[str]:
        return self.subset | self.given


@dataclass(frozen=True)
class IAtom:
    """I(S ; T | U); U may be empty."""

    left: frozenset[str]
    right: frozenset[str]
    given: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        if not self.left or not self.right:
            raise ValueError("I(;) needs variables on both sides")

    def variables(self) -> frozenset[str]:
        return self.left | self.right | self.given


Atom = HAtom | IAtom


@dataclass(frozen=True)
class EntropyExpression:
    terms: tuple[tuple[Fraction, Atom], ...]

    def variables(self) -> frozenset[str]:
        out: frozenset[str] = frozenset()
        for _, atom in self.terms:
            out |= atom.variables()
        return out


def h(coeff, *subset: str, given: Sequence[str] = ()) -> tuple[Fraction, HAtom]:
    return Fraction(coeff), HAtom(frozenset(subset), frozenset(given))


def i(coeff, left: Sequence[str], right: Sequence[str], given: Sequence[str] = ()) -> tuple[Fraction, IAtom]:
    return Fraction(coeff), IAtom(frozenset(left), frozenset(right), frozenset(given))


def expression(terms: Iterable[tuple[Fraction, Atom]]) -> EntropyExpression:
    return EntropyExpression(tuple((Fraction(c), a) for c, a in terms))


def canonicalize(expr: EntropyExpression) -> dict[frozenset[str], Fraction]:
    """Expand every atom into joint entropies H(subset) and merge.

    Uses H(S|T) = H(S+T) - H(T) and
    I(S;T|U) = H(S+U) + H(T+U) - H(S+T+U) - H(U); the empty subset has
    entropy zero and is dropped.  Zero coefficients are removed.
    """
    acc: dict[frozenset[str], Fraction] = {}

    def add(subset: frozenset[str], coeff: Fraction) -> None:
        if not subset:
            return
        acc[subset] = acc.get(subset, Fraction(0)) + coeff

    for coeff, atom in expr.terms:
        if isinstance(atom, HAtom):
            add(atom.subset | atom.given, coeff)
            add(atom.given, -coeff)
        else:
            add(atom.left | atom.given, coeff)
            add(atom.right | atom.given, coeff)
            add(atom.left | atom.right | atom.given, -coeff)
            add(atom.given, -coeff)
    return {k: v for k, v in acc.items() if v != 0}


def evaluate(expr: EntropyExpression, assign: SubspaceAssignment) -> Fraction:
    """Exact value of the expression on a subspace assignment."""
    missing = expr.variables() - set(assign.spaces)
    if missing:
        raise KeyError(f"assignment lacks variables {sorted(missing)}")
    total = Fraction(0)
    for subset, coeff in canonicalize(expr).items():
        total += coeff * entropy(assign, subset)
    return total


def evaluate_atoms(expr: EntropyExpression, assign: SubspaceAssignment) -> Fraction:
    """Term-by-term evaluation (no canonicalization); test oracle."""

    def joint(s: frozenset[str]) -> int:
        return entropy(assign, s)

    total = Fraction(0)
    for coeff, atom in expr.terms:
        if isinstance(atom, HAtom):
            value = joint(atom.subset | atom.given) - joint(atom.given)
        else:
            value = (
                joint(atom.left | atom.given)
                + joint(atom.right | atom.given)
                - joint(atom.left | atom.right | atom.given)
                - joint(atom.given)
            )
        total += coeff * value
    return total


# ---------------------------------------------------------------------------
# bundled inequalities (slack orientation: RHS - LHS, nonnegative iff valid)

_INGLETON = expression([
    i(-1, ["A"], ["B"]),
    i(1, ["A"], ["B"], given=["C"]),
    i(1, ["A"], ["B"], given=["D"]),
    i(1, ["C"], ["D"]),
])

_ZHANG_YEUNG = expression([
    i(-1, ["A"], ["B"]),
    i(2, ["A"], ["B"], given=["C"]),
    i(1, ["A"], ["C"], given=["B"]),
    i(1, ["B"], ["C"], given=["A"]),
    i(1, ["A"], ["B"], given=["D"]),
    i(1, ["C"], ["D"]),
])

_ODD_LRI = expression([
    h(-2, "A"), h(-1, "B"), h(-2, "C"),
    h(1, "W"), h(1, "X"), h(1, "Y"), h(1, "Z"),
    h(2, "A", given=["Z", "Y"]),
    h(1, "B", given=["X", "Z"]),
    h(2, "C", given=["A", "X"]),
    h(3, "X", given=["W", "Y"]),
    h(3, "Z", given=["W", "C"]),
    h(5, "W", given=["A", "B"]),
    h(5, "Y", given=["B", "C"]),
    h(5, "A"), h(5, "B"), h(5, "C"), h(-5, "A", "B", "C"),
])

_EVEN_LRI = expression([
    h(-2, "A"), h(-3, "B"), h(-2, "C"),
    h(1, "W"), h(1, "X"), h(1, "Y"), h(3, "Z"),
    h(2, "A", given=["Y", "Z"]),
    h(3, "B", given=["X", "Z"]),
    h(1, "C", given=["W", "Z"]),
    h(2, "W", given=["A", "B"]),
    h(4, "X", given=["A", "C"]),
    h(3, "Y", given=["B", "C"]),
    h(6, "Z", given=["A", "B", "C"]),
    h(1, "C", given=["W", "X", "Y"]),
    h(7, "A"), h(7, "B"), h(7, "C"), h(-7, "A", "B", "C"),
])

# Balanced variant of oddLRI: each unconditioned edge entropy H(E)
# tightens to the mutual information of E with the other variables, and
# each H(E|...) tightens accordingly.  Kept for reference; it carries no
# validity claim of its own in this package.
_ODD_LRI_BALANCED = expression([
    h(-2, "A"), h(-1, "B"), h(-2, "C"),
    i(1, ["W"], ["A", "B", "C", "X", "Y", "Z"]),
    i(1, ["X"], ["A", "B", "C", "W", "Y", "Z"]),
    i(1, ["Y"], ["A", "B", "C", "W", "X", "Z"]),
    i(1, ["Z"], ["A", "B", "C", "W", "X", "Y"]),
    h(2, "A", given=["Z", "Y"]),
    h(1, "B", given=["X", "Z"]),
    h(2, "C", given=["A", "X"]),
    i(3, ["X"], ["A", "B", "C", "Z"], given=["W", "Y"]),
    i(3, ["Z"], ["A", "B", "X", "Y"], given=["W", "C"]),
    i(5, ["W"], ["C", "X", "Y", "Z"], given=["A", "B"]),
    i(5, ["Y"], ["A", "W", "X", "Z"], given=["B", "C"]),
    h(5, "A"), h(5, "B"), h(5, "C"), h(-5, "A", "B", "C"),
])

_BUILTINS = {
    "ingleton": _INGLETON,
    "zhang-yeung": _ZHANG_YEUNG,
    "oddLRI": _ODD_LRI,
    "evenLRI": _EVEN_LRI,
    "oddLRI-balanced": _ODD_LRI_BALANCED,
}


def builtin_inequality(ineq_id: str) -> EntropyExpression:
    """A bundled inequality as a slack expression (RHS - LHS >= 0)."""
    if ineq_id not in _BUILTINS:
        raise KeyError(f"unknown inequality {ineq_id!r}")
    return _BUILTINS[ineq_id]


def expected_violation(ineq_id: str, characteristic_class: str, dim: int) -> bool:
    """Whether a violating subspace assignment is claimed to exist.

    ``oddLRI`` can only fail over even characteristic in ambient
    dimension >= 3; ``evenLRI`` only over odd characteristic in
    dimension >= 3; the other two hold for subspace ranks everywhere.
    """
    if ineq_id == "oddLRI":
        return characteristic_class == "even" and dim >= 3
    if ineq_id == "evenLRI":
        return characteristic_class == "odd" and dim >= 3
    if ineq_id in ("ingleton", "zhang-yeung", "oddLRI-balanced"):
        return False
    raise KeyError(f"unknown inequality {ineq_id!r}")


def coordinate_assignment(q: int, d: int) -> SubspaceAssignment:
    """The seven-variable coordinate assignment in GF(q)^d (d >= 3):
    A, B, C are the first three axes; W, X, Y are the pairwise sums;
    Z is the sum of all three.  This single assignment witnesses the
    characteristic-dependent failures of both bundled LRIs (oddLRI over
    even characteristic, evenLRI over odd characteristic)."""
    if d < 3:
        raise ValueError("coordinate assignment needs ambient dimension >= 3")

    def vec(*ones: int) -> list[int]:
        return [1 if j in ones else 0 for j in range(d)]

    spans = {
        "A": [vec(0)],
        "B": [vec(1)],
        "C": [vec(2)],
        "W": [vec(0, 1)],
        "X": [vec(0, 2)],
        "Y": [vec(1, 2)],
        "Z": [vec(0, 1, 2)],
    }
    return SubspaceAssignment(
        PrimeField(q), d, {k: subspace_span(q, d, v) for k, v in spans.items()}
    )


def catalog_assignments(q: int, d: int) -> list[SubspaceAssignment]:
    if d >= 3:
        return [coordinate_assignment(q, d)]
    return []


# ---------------------------------------------------------------------------
# reproducible sampling


MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """The splitmix sequence: the i-th output (1-based) is
    mix(seed + i * 0x9E3779B97F4A7C15) with the standard two-round
    multiplicative mixer, so any output can be computed directly."""

    def __init__(self, seed: int):
        self.seed = seed & MASK64
        self.calls = 0

    def next_uint64(self) -> int:
        self.calls += 1
        return _mix64((self.seed + self.calls * _GAMMA) & MASK64)

    def next_below(self, bound: int) -> int:
        return self.next_uint64() % bound


def _splitmix_block(seed: int, start_call: int, count: int) -> np.ndarray:
    """Outputs for call numbers start_call .. start_call+count-1."""
    calls = np.arange(start_call, start_call + count, dtype=np.uint64)
    z = (np.uint64(seed & MASK64) + calls * np.uint64(_GAMMA)).astype(np.uint64)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


# ---------------------------------------------------------------------------
# violation search


@dataclass(frozen=True)
class SearchOutcome:
    witness: SubspaceAssignment | None
    checked: int
    min_slack: Fraction | None


def _integer_plan(expr: EntropyExpression, variables: Sequence[str]):
    """Canonical form as integer weights over variable-position tuples."""
    canon = canonicalize(expr)
    denom = math.lcm(*(c.denominator for c in canon.values())) if canon else 1
    position = {v: k for k, v in enumerate(variables)}
    plan = []
    for subset, coeff in canon.items():
        weight = int(coeff * denom)
        plan.append((weight, tuple(sorted(position[v] for v in subset))))
    return plan, denom


def _slack_block(plan, denom, lat: SubspaceLattice, index_columns: list[np.ndarray]):
    """Vector of slack values (scaled by denom) for a block of assignments."""
    jt = np.asarray(lat.join_table, dtype=np.int32)
    dims = np.asarray(lat.dims, dtype=np.int64)
    n = index_columns[0].shape[0] if index_columns else 1
    slack = np.zeros(n, dtype=np.int64)
    for weight, positions in plan:
        acc = index_columns[positions[0]]
        for p in positions[1:]:
            acc = jt[acc, index_columns[p]]
        slack += weight * dims[acc]
    return slack


def _assignment_from_indices(
    lat: SubspaceLattice, variables: Sequence[str], indices: Sequence[int]
) -> SubspaceAssignment:
    spaces = {v: lat.spaces[int(j)] for v, j in zip(variables, indices)}
    return SubspaceAssignment(PrimeField(lat.q), lat.d, spaces)


def search_violation_detailed(
    expr: EntropyExpression,
    q: int,
    d: int,
    mode: str = "catalog",
    seed: int = 0,
    samples: int = DEFAULT_SAMPLES,
    budget: int = DEFAULT_BUDGET,
    chunk: int = 1 << 21,
) -> SearchOutcome:
    """Search for an assignment with negative slack; see module docs.

    Exhaustive mode scans assignments in lexicographic order over the
    expression's variables sorted by name, each ranging over the
    deterministic subspace enumeration, and returns the first (hence
    lexicographically smallest) violator.  Sample mode draws variable
    indices from the splitmix sequence: trial t (0-based) uses calls
    t*nvars+1 .. t*nvars+nvars, in sorted variable order.
    """
    variables = sorted(expr.variables())
    if mode == "catalog":
        best: Fraction | None = None
        checked = 0
        for assign in catalog_assignments(q, d):
            if not set(variables) <= set(assign.spaces):
                continue
            checked += 1
            slack = evaluate(expr, assign)
            best = slack if best is None else min(best, slack)
            if slack < 0:
                return SearchOutcome(assign, checked, best)
        return SearchOutcome(None, checked, best)

    lat = lattice(q, d)
    size = len(lat)
    nvars = len(variables)
    plan, denom = _integer_plan(expr, variables)

    if mode == "exhaustive":
        total = size**nvars
        if total > budget:
            raise ValueError(
                f"{size}^{nvars} = {total} assignments exceed the budget {budget}"
            )
        min_slack: int | None = None
        start = 0
        while start < total:
            stop = min(start + chunk, total)
            block = np.arange(start, stop, dtype=np.int64)
            cols = [
                ((block // (size ** (nvars - 1 - k))) % size).astype(np.int64)
                for k in range(nvars)
            ]
            slack = _slack_block(plan, denom, lat, cols)
            block_min = int(slack.min()) if slack.size else 0
            min_slack = block_min if min_slack is None else min(min_slack, block_min)
            bad = np.nonzero(slack < 0)[0]
            if bad.size:
                g = start + int(bad[0])
                indices = [(g // (size ** (nvars - 1 - k))) % size for k in range(nvars)]
                return SearchOutcome(
                    _assignment_from_indices(lat, variables, indices),
                    g + 1,
                    Fraction(min_slack, denom),
                )
            start = stop
        return SearchOutcome(
            None, total, None if min_slack is None else Fraction(min_slack, denom)
        )

    if mode == "sample":
        min_slack = None
        done = 0
        while done < samples:
            count = min(chunk // max(nvars, 1), samples - done)
            raw = _splitmix_block(seed, done * nvars + 1, count * nvars)
            idx = (raw % np.uint64(size)).astype(np.int64).reshape(count, nvars)
            cols = [idx[:, k] for k in range(nvars)]
            slack = _slack_block(plan, denom, lat, cols)
            block_min = int(slack.min()) if slack.size else 0
            min_slack = block_min if min_slack is None else min(min_slack, block_min)
            bad = np.nonzero(slack < 0)[0]
            if bad.size:
                t = int(bad[0])
                return SearchOutcome(
                    _assignment_from_indices(lat, variables, idx[t]),
                    done + t + 1,
                    Fraction(min_slack, denom),
                )
            done += count
        return SearchOutcome(
            None, samples, None if min_slack is None else Fraction(min_slack, denom)
        )

    raise ValueError(f"unknown mode {mode!r}; expected catalog, exhaustive or sample")


def search_violation(
    expr: EntropyExpression,
    q: int,
    d: int,
    mode: str = "catalog",
    seed: int = 0,
    samples: int = DEFAULT_SAMPLES,
    budget: int = DEFAULT_BUDGET,
) -> SubspaceAssignment | None:
    """Violating assignment (slack < 0) or None; see the detailed variant."""
    return search_violation_detailed(
        expr, q, d, mode=mode, seed=seed, samples=samples, budget=budget
    ).witness


# ---------------------------------------------------------------------------
# rank-sum lemma checker


@dataclass(frozen=True)
class RankLemmaInstance:
    """Data for the rank-sum bound: for a k x k matrix M, an r x k
    matrix N and distinct scalars l_1..l_t,

        sum_i rank([M - l_i I; N]) >= (t - 1) k + rank(N).
    """

    m_matrix: PrimeFieldMatrix
    n_matrix: PrimeFieldMatrix
    lambdas: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.m_matrix.rows != self.m_matrix.cols:
            raise ValueError("M must be square")
        if self.n_matrix.cols != self.m_matrix.cols:
            raise ValueError("N must have as many columns as M")
        if self.n_matrix.field != self.m_matrix.field:
            raise ValueError("M and N must share a field")
        p = self.m_matrix.field.p
        reduced = [l % p for l in self.lambdas]
        if len(set(reduced)) != len(reduced):
            raise ValueError("scalars must be distinct in the field")


@dataclass(frozen=True)
class RankSumResult:
    lhs: int
    rhs: int
    holds: bool


def check_rank_sum_lemma(inst: RankLemmaInstance) -> RankSumResult:
    fld = inst.m_matrix.field
    k = inst.m_matrix.rows
    lhs = 0
    for lam in inst.lambdas:
        shifted = mat(
            fld,
            [
                [(x - (lam if r == c else 0)) % fld.p for c, x in enumerate(row)]
                for r, row in enumerate(inst.m_matrix.entries)
            ],
            cols=k,
        )
        lhs += mat_rank(mat_stack(shifted, inst.n_matrix))
    rhs = (len(inst.lambdas) - 1) * k + mat_rank(inst.n_matrix)
    return RankSumResult(lhs, rhs, lhs >= rhs)


# ---------------------------------------------------------------------------
# expression files


def _format_atom(atom: Atom) -> str:
    def s(fs: frozenset[str]) -> str:
        return ",".join(sorted(fs))

    if isinstance(atom, HAtom):
        return f"H({s(atom.subset)}|{s(atom.given)})" if atom.given else f"H({s(atom.subset)})"
    body = f"{s(atom.left)};{s(atom.right)}"
    return f"I({body}|{s(atom.given)})" if atom.given else f"I({body})"


def expression_to_text(expr: EntropyExpression) -> str:
    """Serialize a slack expression: negative terms become the LHS."""
    lhs_lines = []
    rhs_lines = []
    for coeff, atom in expr.terms:
        if coeff < 0:
            lhs_lines.append(f"{_frac(-coeff)} * {_format_atom(atom)}")
        elif coeff > 0:
            rhs_lines.append(f"{_frac(coeff)} * {_format_atom(atom)}")
    return "\n".join(["LHS:", *lhs_lines, "RHS:", *rhs_lines]) + "\n"


def _frac(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def parse_expression(text: str) -> EntropyExpression:
    """Parse the LHS:/RHS: expression format into slack orientation."""
    import re

    side = None
    terms: list[tuple[Fraction, Atom]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line == "LHS:":
            side = -1
            continue
        if line == "RHS:":
            side = 1
            continue
        if side is None:
            raise ValueError(f"line {lineno}: term before LHS:/RHS: section")
        m = re.fullmatch(
            r"([+-]?\d+(?:/\d+)?)\s*\*\s*([HI])\(([^)]*)\)", line
        )
        if not m:
            raise ValueError(f"line {lineno}: cannot parse {raw.strip()!r}")
        coeff = Fraction(m.group(1)) * side
        kind, body = m.group(2), m.group(3)
        cond_parts = body.split("|")
        given = frozenset(v.strip() for v in cond_parts[1].split(",") if v.strip()) if len(cond_parts) > 1 else frozenset()
        head = cond_parts[0]
        if kind == "H":
            subset = frozenset(v.strip() for v in head.split(",") if v.strip())
            terms.append((coeff, HAtom(subset, given)))
        else:
            halves = head.split(";")
            if len(halves) != 2:
                raise ValueError(f"line {lineno}: I-atom needs two sides")
            left = frozenset(v.strip() for v in halves[0].split(",") if v.strip())
            right = frozenset(v.strip() for v in halves[1].split(",") if v.strip())
            terms.append((coeff, IAtom(left, right, given)))
    return EntropyExpression(tuple(terms))
