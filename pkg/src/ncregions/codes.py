"""Fractional codes on networks: representation, evaluation, verification.

A (k_1,...,k_m, n) fractional code assigns every coded edge a function
from its tail node's available symbols (attached messages first, in
network message order, then in-edge symbol blocks, in network edge
order) to n alphabet symbols.  Linear codes store a matrix per edge;
table codes store a full lookup table per edge and work over arbitrary
alphabets.

Two independent verification routes exist on purpose:

- :func:`verify_solution` is algebraic: it composes edge matrices into
  global transfer matrices from the full message vector and asks a row
  space question per demand.
- :func:`verify_solution_exhaustive` is operational: it enumerates every
  message assignment, pushes symbols through the edge functions, and
  checks each receiver's inputs determine its demands (or match its
  decoder tables).  It is the brute-force oracle for the algebraic path
  and the only route for nonlinear table codes.

Bundled with the four networks is the catalog of achieving codes for
the cataloged regions, each tagged with the field characteristic class
(``even``, ``odd`` or ``any``) it is claimed for.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ff import (
    GF2,
    GF3,
    PrimeField,
    PrimeFieldMatrix,
    mat,
    mat_mul,
    mat_nullspace,
    mat_stack,
    mat_vec,
    mat_zeros,
    rowspace_contains,
    solve,
)
from .netmodel import Network, builtin_network, topological_order

DEFAULT_ENUMERATION_GUARD = 2**20


class GuardExceededError(ValueError):
    pass


class CoefficientUnavailableError(ValueError):
    """A rational coefficient has no image in the requested field."""


@dataclass(frozen=True)
class RateSpec:
    """Message dimensions k_i (symbols per message) and edge dimension n."""

    message_dims: dict[str, int]
    edge_dim: int

    def __post_init__(self) -> None:
        if self.edge_dim < 1:
            raise ValueError("edge dimension n must be at least 1")
        for msg, k in self.message_dims.items():
            if k < 0:
                raise ValueError(f"negative dimension for message {msg}")

    @property
    def total_message_width(self) -> int:
        return sum(self.message_dims.values())


def rate_spec(net: Network, dims: Mapping[str, int], edge_dim: int) -> RateSpec:
    """Normalize dims to cover every network message, in network order."""
    unknown = set(dims) - set(net.messages)
    if unknown:
        raise ValueError(f"dims mention unknown messages {sorted(unknown)}")
    return RateSpec({m: int(dims.get(m, 0)) for m in net.messages}, int(edge_dim))


@dataclass(frozen=True)
class LinearCode:
    network: str
    field: PrimeField
    rates: RateSpec
    edge_functions: dict[str, PrimeFieldMatrix]
    decoders: dict[tuple[str, str], PrimeFieldMatrix] = dc_field(default_factory=dict)


@dataclass(frozen=True)
class TableCode:
    """Lookup-table code over an arbitrary alphabet {0, ..., A-1}.

    ``edge_tables[label][i]`` is the output tuple for input index i,
    where input tuples are indexed lexicographically with the first
    symbol most significant.  Decoder tables are indexed the same way
    over the receiver's input symbols.
    """

    network: str
    alphabet: int
    rates: RateSpec
    edge_tables: dict[str, tuple[tuple[int, ...], ...]]
    decoder_tables: dict[tuple[str, str], tuple[tuple[int, ...], ...]] = dc_field(
        default_factory=dict
    )

    def __post_init__(self) -> None:
        if self.alphabet < 2:
            raise ValueError("alphabet size must be at least 2")


Code = LinearCode | TableCode


@dataclass(frozen=True)
class DemandStatus:
    receiver: str
    message: str
    ok: bool
    reason: str | None = None
    witness: dict[str, tuple[int, ...]] | None = None


@dataclass(frozen=True)
class VerificationReport:
    valid: bool
    statuses: tuple[DemandStatus, ...]
    rate_vector: dict[str, Fraction]
    assignments_checked: int | None = None

    def first_failure(self) -> DemandStatus | None:
        for st in self.statuses:
            if not st.ok:
                return st
        return None


@dataclass(frozen=True)
class EvaluationResult:
    edges: dict[str, tuple[int, ...]]
    decoded: dict[tuple[str, str], tuple[int, ...]]


# ---------------------------------------------------------------------------
# symbol layout


def node_symbols(net: Network, node: str) -> list[tuple[str, str]]:
    """Available input symbols at a node as (kind, name) pairs.

    Attached messages come first (kind ``m``, network message order),
    then in-edges (kind ``e``, named by edge id, network edge order).
    """
    syms = [("m", m) for m in net.attached(node)]
    syms += [("e", e.id) for e in net.in_edges(node)]
    return syms


def _symbol_width(net: Network, rates: RateSpec, kind: str, name: str) -> int:
    if kind == "m":
        return rates.message_dims[name]
    return rates.edge_dim


def node_input_width(net: Network, rates: RateSpec, node: str) -> int:
    return sum(_symbol_width(net, rates, k, n) for k, n in node_symbols(net, node))


def _message_offsets(net: Network, rates: RateSpec) -> dict[str, int]:
    offsets = {}
    pos = 0
    for m in net.messages:
        offsets[m] = pos
        pos += rates.message_dims[m]
    return offsets


def _edges_in_evaluation_order(net: Network):
    """Edges sorted so every edge's inputs are computed before it."""
    position = {node: i for i, node in enumerate(topological_order(net))}
    indexed = list(enumerate(net.edges))
    indexed.sort(key=lambda pair: (position[pair[1].tail], pair[0]))
    return [edge for _, edge in indexed]


def _selector(fld: PrimeField, total: int, offset: int, width: int) -> PrimeFieldMatrix:
    rows = [[1 if j == offset + i else 0 for j in range(total)] for i in range(width)]
    return mat(fld, rows, cols=total)


def validate_code(net: Network, code: Code) -> None:
    if code.network != net.name:
        raise ValueError(f"code is for network {code.network!r}, not {net.name!r}")
    if set(code.rates.message_dims) != set(net.messages):
        raise ValueError("rate spec does not cover the network messages")
    n = code.rates.edge_dim
    functions = code.edge_functions if isinstance(code, LinearCode) else code.edge_tables
    for label in net.coded_labels():
        if label not in functions:
            raise ValueError(f"no function for coded edge {label!r}")
    for edge in net.edges:
        if not edge.coded:
            tail_syms = node_symbols(net, edge.tail)
            if len(tail_syms) != 1 or tail_syms[0][0] != "e":
                raise ValueError(f"copy edge {edge.id} tail is not a pure relay node")
    for label, fn in functions.items():
        edge = net.edge_by_id(net.named_edges.get(label, label))
        width = node_input_width(net, code.rates, edge.tail)
        if isinstance(code, LinearCode):
            if fn.rows != n or fn.cols != width:
                raise ValueError(
                    f"edge {label!r} matrix is {fn.rows}x{fn.cols}, expected {n}x{width}"
                )
            if fn.field != code.field:
                raise ValueError(f"edge {label!r} matrix is over the wrong field")
        else:
            if len(fn) != code.alphabet**width:
                raise ValueError(f"edge {label!r} table has wrong domain size")
            if any(len(out) != n for out in fn):
                raise ValueError(f"edge {label!r} table has wrong output width")


# ---------------------------------------------------------------------------
# algebraic verification


def _global_edge_matrices(net: Network, code: LinearCode) -> dict[str, PrimeFieldMatrix]:
    """Matrix from the full message vector to each edge's symbols."""
    fld = code.field
    rates = code.rates
    total = rates.total_message_width
    offsets = _message_offsets(net, rates)
    matrices: dict[str, PrimeFieldMatrix] = {}
    for edge in _edges_in_evaluation_order(net):
        if edge.coded:
            blocks = []
            for kind, name in node_symbols(net, edge.tail):
                if kind == "m":
                    blocks.append(_selector(fld, total, offsets[name], rates.message_dims[name]))
                else:
                    blocks.append(matrices[name])
            inputs = mat_stack(*blocks) if blocks else mat_zeros(fld, 0, total)
            matrices[edge.id] = mat_mul(code.edge_functions[edge.label], inputs)
        else:
            feeder = net.in_edges(edge.tail)[0]
            matrices[edge.id] = matrices[feeder.id]
    return matrices


def _receiver_matrix(
    net: Network, code: LinearCode, node: str, edge_mats: dict[str, PrimeFieldMatrix]
) -> PrimeFieldMatrix:
    fld = code.field
    rates = code.rates
    total = rates.total_message_width
    offsets = _message_offsets(net, rates)
    blocks = []
    for kind, name in node_symbols(net, node):
        if kind == "m":
            blocks.append(_selector(fld, total, offsets[name], rates.message_dims[name]))
        else:
            blocks.append(edge_mats[name])
    return mat_stack(*blocks) if blocks else mat_zeros(fld, 0, total)


def _split_assignment(net: Network, rates: RateSpec, vector: Sequence[int]) -> dict[str, tuple[int, ...]]:
    out = {}
    pos = 0
    for m in net.messages:
        k = rates.message_dims[m]
        out[m] = tuple(vector[pos : pos + k])
        pos += k
    return out


def _algebraic_witness(
    net: Network, code: LinearCode, t_matrix: PrimeFieldMatrix, sel: PrimeFieldMatrix
) -> dict[str, tuple[int, ...]] | None:
    """A message assignment indistinguishable from zero at the receiver
    but with a nonzero demanded message, when one exists."""
    kernel = mat_nullspace(t_matrix)
    for row in kernel.entries:
        if any(mat_vec(sel, row)):
            return _split_assignment(net, code.rates, row)
    return None


def synthesize_decoder(
    t_matrix: PrimeFieldMatrix, sel: PrimeFieldMatrix
) -> PrimeFieldMatrix | None:
    """Solve D . T = sel row by row; None when no decoder exists."""
    decoder_rows = []
    t_t = mat(
        t_matrix.field,
        [t_matrix.column(j) for j in range(t_matrix.cols)],
        cols=t_matrix.rows,
    )
    for i in range(sel.rows):
        x = solve(t_t, sel.row(i))
        if x is None:
            return None
        decoder_rows.append(x)
    return mat(t_matrix.field, decoder_rows, cols=t_matrix.rows)


def verify_solution(net: Network, code: LinearCode) -> VerificationReport:
    """Algebraic, witness-free verification of a linear code.

    A demand (r, m) passes iff the selector rows of m lie in the row
    space of r's input transfer matrix; a supplied decoder must in
    addition reproduce the selector exactly.
    """
    if not isinstance(code, LinearCode):
        raise TypeError("verify_solution handles linear codes; use the exhaustive verifier")
    validate_code(net, code)
    fld = code.field
    rates = code.rates
    total = rates.total_message_width
    offsets = _message_offsets(net, rates)
    edge_mats = _global_edge_matrices(net, code)
    statuses = []
    for node, msg in net.demands:
        t_matrix = _receiver_matrix(net, code, node, edge_mats)
        sel = _selector(fld, total, offsets[msg], rates.message_dims[msg])
        ok = rowspace_contains(t_matrix, sel)
        reason = None
        witness = None
        if not ok:
            reason = "demand is not a function of the receiver inputs"
            witness = _algebraic_witness(net, code, t_matrix, sel)
        elif (node, msg) in code.decoders:
            product = mat_mul(code.decoders[(node, msg)], t_matrix)
            if product != sel:
                ok = False
                reason = "supplied decoder does not reproduce the demand"
                for j in range(total):
                    if product.column(j) != sel.column(j):
                        unit = [0] * total
                        unit[j] = 1
                        witness = _split_assignment(net, rates, unit)
                        break
        statuses.append(DemandStatus(node, msg, ok, reason, witness))
    return VerificationReport(
        valid=all(s.ok for s in statuses),
        statuses=tuple(statuses),
        rate_vector=rate_vector(code),
    )


# ---------------------------------------------------------------------------
# exhaustive verification (brute force over all message assignments)


def _alphabet_size(code: Code) -> int:
    return code.field.p if isinstance(code, LinearCode) else code.alphabet


def _radix_key(block: np.ndarray, base: int) -> np.ndarray:
    n_rows, width = block.shape
    if width == 0:
        return np.zeros(n_rows, dtype=np.int64)
    if base**width >= 2**62:
        raise GuardExceededError("input block too wide for exhaustive keying")
    radix = np.array([base ** (width - 1 - i) for i in range(width)], dtype=np.int64)
    return block.astype(np.int64) @ radix


def _enumerate_assignments(total: int, base: int) -> np.ndarray:
    count = base**total
    idx = np.arange(count, dtype=np.int64)
    out = np.empty((count, total), dtype=np.int16)
    for j in range(total):
        out[:, j] = (idx // base ** (total - 1 - j)) % base
    return out


def _edge_value_arrays(
    net: Network, code: Code, assignments: np.ndarray, offsets: dict[str, int]
) -> dict[str, np.ndarray]:
    rates = code.rates
    base = _alphabet_size(code)
    values: dict[str, np.ndarray] = {}

    def input_block(node: str) -> np.ndarray:
        blocks = []
        for kind, name in node_symbols(net, node):
            if kind == "m":
                k = rates.message_dims[name]
                blocks.append(assignments[:, offsets[name] : offsets[name] + k])
            else:
                blocks.append(values[name])
        if not blocks:
            return np.zeros((assignments.shape[0], 0), dtype=np.int16)
        return np.hstack(blocks)

    for edge in _edges_in_evaluation_order(net):
        if not edge.coded:
            feeder = net.in_edges(edge.tail)[0]
            values[edge.id] = values[feeder.id]
            continue
        block = input_block(edge.tail)
        if isinstance(code, LinearCode):
            fn = code.edge_functions[edge.label]
            weights = np.array(fn.entries, dtype=np.int64).reshape(fn.rows, fn.cols)
            values[edge.id] = ((block.astype(np.int64) @ weights.T) % base).astype(np.int16)
        else:
            table = np.array(code.edge_tables[edge.label], dtype=np.int16).reshape(
                base ** block.shape[1], rates.edge_dim
            )
            values[edge.id] = table[_radix_key(block, base)]
    return values


def verify_solution_exhaustive(
    net: Network, code: Code, guard: int = DEFAULT_ENUMERATION_GUARD
) -> VerificationReport:
    """Brute-force verification over all |A|^K message assignments.

    Without stored decoders, a demand passes iff no two assignments give
    the receiver identical inputs but different demanded values; with
    decoders, the decoder output must equal the message everywhere.  On
    failure the witness is the lexicographically smallest assignment
    that conflicts with an earlier one (or fails its decoder).
    """
    validate_code(net, code)
    rates = code.rates
    base = _alphabet_size(code)
    total = rates.total_message_width
    count = base**total
    if count > guard:
        raise GuardExceededError(
            f"{base}^{total} assignments exceed the enumeration guard {guard}"
        )
    offsets = _message_offsets(net, rates)
    assignments = _enumerate_assignments(total, base)
    edge_values = _edge_value_arrays(net, code, assignments, offsets)

    decoders: dict[tuple[str, str], object] = {}
    if isinstance(code, LinearCode):
        decoders = dict(code.decoders)
    else:
        decoders = dict(code.decoder_tables)

    statuses = []
    for node, msg in net.demands:
        blocks = []
        for kind, name in node_symbols(net, node):
            if kind == "m":
                k = rates.message_dims[name]
                blocks.append(assignments[:, offsets[name] : offsets[name] + k])
            else:
                blocks.append(edge_values[name])
        inputs = (
            np.hstack(blocks)
            if blocks
            else np.zeros((count, 0), dtype=np.int16)
        )
        k = rates.message_dims[msg]
        msg_block = assignments[:, offsets[msg] : offsets[msg] + k]
        fail_index: int | None = None
        reason = None

        if (node, msg) in decoders and k > 0:
            dec = decoders[(node, msg)]
            if isinstance(code, LinearCode):
                weights = np.array(dec.entries, dtype=np.int64).reshape(dec.rows, dec.cols)
                decoded = (inputs.astype(np.int64) @ weights.T) % base
            else:
                table = np.array(dec, dtype=np.int16).reshape(
                    base ** inputs.shape[1], k
                )
                decoded = table[_radix_key(inputs, base)]
            bad = np.nonzero((decoded != msg_block).any(axis=1))[0]
            if bad.size:
                fail_index = int(bad[0])
                reason = "decoder output differs from the message"
        elif k > 0:
            key = _radix_key(inputs, base)
            mkey = _radix_key(msg_block, base)
            order = np.argsort(key, kind="stable")
            sorted_key = key[order]
            group_start = np.empty(count, dtype=bool)
            group_start[0] = True
            group_start[1:] = sorted_key[1:] != sorted_key[:-1]
            group_id = np.cumsum(group_start) - 1
            first_of_group = order[np.flatnonzero(group_start)]
            reference = mkey[first_of_group][group_id]
            mismatch = mkey[order] != reference
            if mismatch.any():
                fail_index = int(order[mismatch].min())
                reason = "two assignments share receiver inputs but differ in the demand"

        if fail_index is None:
            statuses.append(DemandStatus(node, msg, True))
        else:
            witness = _split_assignment(
                net, rates, [int(x) for x in assignments[fail_index]]
            )
            statuses.append(DemandStatus(node, msg, False, reason, witness))

    return VerificationReport(
        valid=all(s.ok for s in statuses),
        statuses=tuple(statuses),
        rate_vector=rate_vector(code),
        assignments_checked=count,
    )


# ---------------------------------------------------------------------------
# single-assignment evaluation


def evaluate_code(
    net: Network, code: Code, assignment: Mapping[str, Sequence[int]]
) -> EvaluationResult:
    """Push one message assignment through the network.

    Returns the symbols on every coded edge plus decoded outputs for
    each demand: stored decoders are applied where present, and for
    linear codes a decoder is synthesized from the transfer matrices
    when the demand is decodable.
    """
    validate_code(net, code)
    rates = code.rates
    base = _alphabet_size(code)
    values: dict[str, tuple[int, ...]] = {}

    normalized: dict[str, tuple[int, ...]] = {}
    for m in net.messages:
        k = rates.message_dims[m]
        vec = tuple(int(x) % base for x in assignment.get(m, ()))
        if len(vec) != k:
            raise ValueError(f"message {m} needs {k} symbols, got {len(vec)}")
        normalized[m] = vec

    def node_vector(node: str) -> tuple[int, ...]:
        out: list[int] = []
        for kind, name in node_symbols(net, node):
            out.extend(normalized[name] if kind == "m" else values[name])
        return tuple(out)

    for edge in _edges_in_evaluation_order(net):
        if not edge.coded:
            values[edge.id] = values[net.in_edges(edge.tail)[0].id]
            continue
        vec = node_vector(edge.tail)
        if isinstance(code, LinearCode):
            values[edge.id] = mat_vec(code.edge_functions[edge.label], vec)
        else:
            index = 0
            for s in vec:
                index = index * base + s
            values[edge.id] = code.edge_tables[edge.label][index]

    decoded: dict[tuple[str, str], tuple[int, ...]] = {}
    if isinstance(code, LinearCode):
        edge_mats = _global_edge_matrices(net, code)
        offsets = _message_offsets(net, rates)
        total = rates.total_message_width
        for node, msg in net.demands:
            vec = node_vector(node)
            if (node, msg) in code.decoders:
                decoded[(node, msg)] = mat_vec(code.decoders[(node, msg)], vec)
                continue
            t_matrix = _receiver_matrix(net, code, node, edge_mats)
            sel = _selector(code.field, total, offsets[msg], rates.message_dims[msg])
            dec = synthesize_decoder(t_matrix, sel)
            if dec is not None:
                decoded[(node, msg)] = mat_vec(dec, vec)
    else:
        for (node, msg), table in code.decoder_tables.items():
            vec = node_vector(node)
            index = 0
            for s in vec:
                index = index * base + s
            decoded[(node, msg)] = table[index]

    edge_out = {
        e.label: values[e.id] for e in net.edges if e.coded
    }
    return EvaluationResult(edges=edge_out, decoded=decoded)


# ---------------------------------------------------------------------------
# routing detection, concatenation, rates


def _is_routing_matrix(m: PrimeFieldMatrix) -> bool:
    for row in m.entries:
        nonzero = [x for x in row if x]
        if nonzero and (len(nonzero) != 1 or nonzero[0] != 1):
            return False
    return True


def _is_routing_table(table, in_width: int, out_width: int, base: int) -> bool:
    candidates: list[set] = [set(range(in_width)) | {"zero"} for _ in range(out_width)]
    for index, out in enumerate(table):
        digits = []
        rem = index
        for _ in range(in_width):
            digits.append(rem % base)
            rem //= base
        digits.reverse()
        for j in range(out_width):
            keep = set()
            for c in candidates[j]:
                if c == "zero":
                    if out[j] == 0:
                        keep.add(c)
                elif digits[c] == out[j]:
                    keep.add(c)
            candidates[j] = keep
            if not keep:
                return False
    return True


def is_routing(code: Code, net: Network | None = None) -> bool:
    """True iff every output coordinate of every edge and decoder
    function copies a single input coordinate (or is identically zero)."""
    if isinstance(code, LinearCode):
        functions = list(code.edge_functions.values()) + list(code.decoders.values())
        return all(_is_routing_matrix(m) for m in functions)
    net = net or builtin_network(code.network)
    base = code.alphabet
    for label, table in code.edge_tables.items():
        edge = net.edge_by_id(net.named_edges.get(label, label))
        width = node_input_width(net, code.rates, edge.tail)
        if not _is_routing_table(table, width, code.rates.edge_dim, base):
            return False
    for (node, msg), table in code.decoder_tables.items():
        width = node_input_width(net, code.rates, node)
        if not _is_routing_table(table, width, code.rates.message_dims[msg], base):
            return False
    return True


def rate_vector(code: Code) -> dict[str, Fraction]:
    """Exact per-message rates k_i / n, in network message order."""
    n = code.rates.edge_dim
    return {m: Fraction(k, n) for m, k in code.rates.message_dims.items()}


def concatenate_codes(
    codes: Sequence[LinearCode], net: Network | None = None
) -> LinearCode:
    """Time sharing: block-diagonal combination of codes on one network.

    Message and edge dimensions add; every block computes exactly what
    its component code computed, so validity is preserved.
    """
    if not codes:
        raise ValueError("nothing to concatenate")
    first = codes[0]
    net = net or builtin_network(first.network)
    for c in codes:
        if c.network != first.network:
            raise ValueError("codes are for different networks")
        if c.field != first.field:
            raise ValueError("codes are over different fields")
        validate_code(net, c)

    fld = first.field
    total_dims = {
        m: sum(c.rates.message_dims[m] for c in codes) for m in net.messages
    }
    total_n = sum(c.rates.edge_dim for c in codes)
    combined_rates = rate_spec(net, total_dims, total_n)

    def combined_width(kind: str, name: str) -> int:
        return total_dims[name] if kind == "m" else total_n

    def component_width(code: LinearCode, kind: str, name: str) -> int:
        return code.rates.message_dims[name] if kind == "m" else code.rates.edge_dim

    def combine(symbols, matrices, out_rows_per_code) -> PrimeFieldMatrix:
        total_cols = sum(combined_width(k, n) for k, n in symbols)
        total_rows = sum(out_rows_per_code)
        grid = [[0] * total_cols for _ in range(total_rows)]
        row_base = 0
        for j, code in enumerate(codes):
            m = matrices[j]
            col_base = 0
            local = 0
            for kind, name in symbols:
                pre = sum(component_width(codes[jj], kind, name) for jj in range(j))
                w = component_width(code, kind, name)
                for r in range(out_rows_per_code[j]):
                    for cc in range(w):
                        grid[row_base + r][col_base + pre + cc] = m.entries[r][local + cc]
                local += w
                col_base += combined_width(kind, name)
            row_base += out_rows_per_code[j]
        return mat(fld, grid, cols=total_cols)

    edge_functions = {}
    for label in net.coded_labels():
        edge = net.edge_by_id(net.named_edges[label])
        symbols = node_symbols(net, edge.tail)
        edge_functions[label] = combine(
            symbols,
            [c.edge_functions[label] for c in codes],
            [c.rates.edge_dim for c in codes],
        )

    decoders = {}
    shared_keys = set(codes[0].decoders)
    for c in codes[1:]:
        shared_keys &= set(c.decoders)
    for node, msg in shared_keys:
        symbols = node_symbols(net, node)
        decoders[(node, msg)] = combine(
            symbols,
            [c.decoders[(node, msg)] for c in codes],
            [c.rates.message_dims[msg] for c in codes],
        )

    return LinearCode(first.network, fld, combined_rates, edge_functions, decoders)


def zero_fix(net: Network, code: LinearCode, zero_messages: Iterable[str]) -> LinearCode:
    """Fix some messages to rate zero, keeping everything else.

    Dropping a message deletes its columns from every edge and decoder
    matrix (and the rows of its own decoders); a valid code stays valid
    because the deleted inputs were free to be zero all along.
    """
    zero = set(zero_messages)
    unknown = zero - set(net.messages)
    if unknown:
        raise ValueError(f"unknown messages {sorted(unknown)}")
    rates = code.rates
    new_rates = rate_spec(
        net,
        {m: (0 if m in zero else k) for m, k in rates.message_dims.items()},
        rates.edge_dim,
    )

    def surviving_columns(node: str) -> list[int]:
        cols = []
        pos = 0
        for kind, name in node_symbols(net, node):
            width = _symbol_width(net, rates, kind, name)
            if not (kind == "m" and name in zero):
                cols.extend(range(pos, pos + width))
            pos += width
        return cols

    edge_functions = {}
    for label, m in code.edge_functions.items():
        edge = net.edge_by_id(net.named_edges[label])
        cols = surviving_columns(edge.tail)
        rows = [[r[c] for c in cols] for r in m.entries]
        edge_functions[label] = mat(code.field, rows, cols=len(cols))
    decoders = {}
    for (node, msg), m in code.decoders.items():
        cols = surviving_columns(node)
        source_rows = () if msg in zero else m.entries
        rows = [[r[c] for c in cols] for r in source_rows]
        decoders[(node, msg)] = mat(code.field, rows, cols=len(cols))
    return LinearCode(code.network, code.field, new_rates, edge_functions, decoders)


def to_table_code(net: Network, code: LinearCode) -> TableCode:
    """Tabulate a linear code (used to exercise the table-code path)."""
    validate_code(net, code)
    base = code.field.p
    rates = code.rates

    def tabulate(matrix: PrimeFieldMatrix) -> tuple[tuple[int, ...], ...]:
        width = matrix.cols
        rows = []
        for index in range(base**width):
            digits = []
            rem = index
            for _ in range(width):
                digits.append(rem % base)
                rem //= base
            digits.reverse()
            rows.append(mat_vec(matrix, digits))
        return tuple(rows)

    edge_tables = {label: tabulate(m) for label, m in code.edge_functions.items()}
    decoder_tables = {key: tabulate(m) for key, m in code.decoders.items()}
    return TableCode(code.network, base, rates, edge_tables, decoder_tables)


# ---------------------------------------------------------------------------
# formula mini-language for transcribing codes

_TERM_RE = re.compile(r"^([+-]?)(\d+(?:/\d+)?)?\*?([a-z])(\d+)?$")


def _parse_terms(formula: str):
    compact = formula.replace(" ", "")
    if compact in ("0", "+0", "-0"):
        return []
    pieces = re.findall(r"[+-]?[^+-]+", compact)
    terms = []
    for piece in pieces:
        m = _TERM_RE.match(piece)
        if not m:
            raise ValueError(f"cannot parse term {piece!r} in {formula!r}")
        sign, coeff, symbol, comp = m.groups()
        value = Fraction(coeff) if coeff else Fraction(1)
        if sign == "-":
            value = -value
        terms.append((value, symbol, int(comp) - 1 if comp else None))
    return terms


def _coeff_in_field(fld: PrimeField, value: Fraction) -> int:
    den = value.denominator % fld.p
    if den == 0:
        raise CoefficientUnavailableError(
            f"coefficient {value} has no image in GF({fld.p})"
        )
    return (value.numerator % fld.p) * fld.inv(den) % fld.p


def formulas_to_matrix(
    fld: PrimeField,
    formulas: Sequence[str],
    symbols: Sequence[tuple[str, int]],
) -> PrimeFieldMatrix:
    """Rows from textual linear forms like ``a1+b1``, ``w2-2w3-c2``.

    ``symbols`` lists (name, width) pairs in input-layout order; a bare
    name like ``c`` refers to the single component of a width-1 symbol.
    """
    offsets = {}
    pos = 0
    for name, width in symbols:
        if name in offsets:
            raise ValueError(f"duplicate symbol {name!r} in layout")
        offsets[name] = (pos, width)
        pos += width
    rows = []
    for formula in formulas:
        row = [0] * pos
        for value, name, comp in _parse_terms(formula):
            if name not in offsets:
                raise ValueError(f"unknown symbol {name!r} in {formula!r}")
            start, width = offsets[name]
            if comp is None:
                if width != 1:
                    raise ValueError(
                        f"symbol {name!r} has width {width}; use an index in {formula!r}"
                    )
                comp = 0
            if not 0 <= comp < width:
                raise ValueError(f"component {name}{comp + 1} out of range in {formula!r}")
            row[start + comp] = (row[start + comp] + _coeff_in_field(fld, value)) % fld.p
        rows.append(row)
    return mat(fld, rows, cols=pos)


def _tail_symbol_layout(net: Network, rates: RateSpec, node: str) -> list[tuple[str, int]]:
    layout = []
    for kind, name in node_symbols(net, node):
        if kind == "m":
            layout.append((name, rates.message_dims[name]))
        else:
            label = net.edge_by_id(name).label
            layout.append((label, rates.edge_dim))
    return layout


def build_code(
    net: Network,
    fld: PrimeField,
    dims: Mapping[str, int],
    edge_dim: int,
    edge_formulas: Mapping[str, Sequence[str]],
    decoder_formulas: Mapping[tuple[str, str], Sequence[str]] | None = None,
) -> LinearCode:
    """Assemble a linear code from per-edge output formulas.

    Formulas reference the symbols available at the edge's tail (or the
    receiver, for decoders) by label.  Decoders whose coefficients do
    not exist in ``fld`` (for example 1/2 in characteristic 2) are
    silently dropped; the row-space check still governs verification.
    """
    rates = rate_spec(net, dims, edge_dim)
    functions = {}
    for label in net.coded_labels():
        if label not in edge_formulas:
            raise ValueError(f"missing formulas for edge {label!r}")
        formulas = list(edge_formulas[label])
        if len(formulas) != edge_dim:
            raise ValueError(f"edge {label!r} needs {edge_dim} output formulas")
        edge = net.edge_by_id(net.named_edges[label])
        layout = _tail_symbol_layout(net, rates, edge.tail)
        functions[label] = formulas_to_matrix(fld, formulas, layout)
    decoders = {}
    for (node, msg), formulas in (decoder_formulas or {}).items():
        layout = _tail_symbol_layout(net, rates, node)
        try:
            decoders[(node, msg)] = formulas_to_matrix(fld, list(formulas), layout)
        except CoefficientUnavailableError:
            continue
    return LinearCode(net.name, fld, rates, functions, decoders)


# ---------------------------------------------------------------------------
# bundled code catalog


@dataclass(frozen=True)
class BuiltinCodeSpec:
    label: str
    characteristic: str  # even | odd | any
    region_classes: frozenset[str]
    dims: tuple[tuple[str, int], ...]
    edge_dim: int
    edges: tuple[tuple[str, tuple[str, ...]], ...]
    decoders: tuple[tuple[tuple[str, str], tuple[str, ...]], ...] = ()


@dataclass(frozen=True)
class BuiltinCode:
    label: str
    characteristic: str
    region_classes: frozenset[str]
    code: LinearCode


def _spec(label, char, classes, dims, n, edges, decoders=()):
    return BuiltinCodeSpec(
        label,
        char,
        frozenset(classes),
        tuple(dims.items()),
        n,
        tuple((k, tuple(v)) for k, v in edges.items()),
        tuple((k, tuple(v)) for k, v in decoders),
    )


_GB = [
    _spec("(2,0,0,1)", "any", {"coding", "routing"}, {"a": 2, "d": 1}, 1,
          {"x": ["a1"], "u": ["a2"], "v": ["0"], "y": ["u1"], "z": ["d1"]}),
    _spec("(1,0,0,2)", "any", {"coding", "routing"}, {"a": 1, "d": 2}, 1,
          {"x": ["a1"], "u": ["0"], "v": ["d1"], "y": ["v1"], "z": ["d2"]}),
    _spec("(1,0,1,1)", "any", {"coding", "routing"}, {"a": 1, "c": 1, "d": 1}, 1,
          {"x": ["a1"], "u": ["0"], "v": ["c1"], "y": ["v1"], "z": ["d1"]}),
    _spec("(1,1,0,1)", "any", {"coding", "routing"}, {"a": 1, "b": 1, "d": 1}, 1,
          {"x": ["a1"], "u": ["b1"], "v": ["0"], "y": ["u1"], "z": ["d1"]}),
    _spec("(0,1,1,0)", "any", {"coding"}, {"b": 1, "c": 1}, 1,
          {"x": ["b1"], "u": ["b1"], "v": ["c1"], "y": ["u1+v1"], "z": ["c1"]},
          decoders=[(("R5", "c"), ["y1-x1"]), (("R6", "b"), ["y1-z1"])]),
    _spec("(1/2,1/2,1/2,1/2)", "any", {"coding", "routing"},
          {"a": 1, "b": 1, "c": 1, "d": 1}, 2,
          {"x": ["0", "a1"], "u": ["b1", "0"], "v": ["0", "c1"],
           "y": ["u1", "v2"], "z": ["d1", "0"]}),
    _spec("(2/3,2/3,2/3,2/3)", "any", {"coding"},
          {"a": 2, "b": 2, "c": 2, "d": 2}, 3,
          {"x": ["a1", "a2", "b2"], "u": ["b1", "b2", "0"], "v": ["c1", "c2", "0"],
           "y": ["v1", "u1", "u2+v2"], "z": ["d1", "d2", "c2"]}),
]

_FANO = [
    _spec("(0,1,1)", "any", {"coding", "linear-odd", "routing"}, {"b": 1, "c": 1}, 1,
          {"w": ["b1"], "y": ["c1"], "x": ["y1"], "z": ["w1"]}),
    _spec("(1,0,1)", "any", {"coding", "linear-odd", "routing"}, {"a": 1, "c": 1}, 1,
          {"w": ["a1"], "y": ["c1"], "x": ["y1"], "z": ["w1"]}),
    _spec("(1,1,0)", "any", {"coding", "linear-odd", "routing"}, {"a": 1, "b": 1}, 1,
          {"w": ["a1"], "y": ["b1"], "x": ["y1"], "z": ["w1"]}),
    _spec("(0,2,0)", "any", {"coding", "linear-odd", "routing"}, {"b": 2}, 1,
          {"w": ["b2"], "y": ["b1"], "x": ["y1"], "z": ["w1"]}),
    _spec("(1,1,1)", "even", {"coding"}, {"a": 1, "b": 1, "c": 1}, 1,
          {"w": ["a1+b1"], "y": ["b1+c1"], "x": ["w1+y1"], "z": ["w1+c1"]}),
    _spec("(1,2/3,2/3)", "odd", {"linear-odd"}, {"a": 3, "b": 2, "c": 2}, 3,
          {"w": ["a1+b1", "a2+b2", "a3"],
           "y": ["b1+c1", "b2+c2", "b1"],
           "x": ["w1-y1", "w2-y2", "w2"],
           "z": ["w1-c1", "w2+c2", "w3"]}),
    _spec("(2/3,2/3,1)", "odd", {"linear-odd"}, {"a": 2, "b": 2, "c": 3}, 3,
          {"w": ["a1+b1", "a2+b2", "b2"],
           "y": ["b1+c1", "b2+c2", "c3"],
           "x": ["w1-y1", "w2-y2", "y3"],
           "z": ["w1-c1", "w2-2w3-c2", "c1"]}),
    _spec("(4/5,4/5,4/5)", "odd", {"linear-odd"}, {"a": 4, "b": 4, "c": 4}, 5,
          {"w": ["a1+b1", "a2+b2", "a3+b3", "a4+b4", "b1+b4"],
           "y": ["c1-b1", "c2-b2", "c3+b3", "c4+b4", "b2"],
           "x": ["w1+y1", "w2+y2", "y3-w3", "y4-w4", "w3"],
           "z": ["w1+c1", "w2+c2", "w3+c3", "w4+c4", "w5+c4"]}),
]

_NONFANO = [
    _spec("(1,1,1)", "odd", {"coding"}, {"a": 1, "b": 1, "c": 1}, 1,
          {"w": ["a1+b1"], "x": ["a1+c1"], "y": ["b1+c1"], "z": ["a1+b1+c1"]},
          decoders=[(("R12", "c"), ["z1-w1"]),
                    (("R13", "b"), ["z1-x1"]),
                    (("R14", "a"), ["z1-y1"]),
                    (("R15", "c"), ["1/2*x1+1/2*y1-1/2*w1"])]),
    _spec("(1,1,1/2)", "any", {"coding", "linear-even"}, {"a": 2, "b": 2, "c": 1}, 2,
          {"w": ["a1", "b1"], "x": ["a1+c1", "a2"],
           "y": ["b1+c1", "b2"], "z": ["a1+b1+c1", "a2+b2"]}),
    _spec("(1,1/2,1)", "any", {"coding", "linear-even"}, {"a": 2, "b": 1, "c": 2}, 2,
          {"w": ["a1+b1", "a2"], "x": ["a1", "c1"],
           "y": ["b1+c1", "c2"], "z": ["a1+b1+c1", "a2+c2"]}),
    _spec("(1/2,1,1)", "any", {"coding", "linear-even"}, {"a": 1, "b": 2, "c": 2}, 2,
          {"w": ["a1+b1", "b2"], "x": ["a1+c1", "c2"],
           "y": ["c1", "b1"], "z": ["a1+b1+c1", "b2+c2"]}),
    _spec("(0,0,1)", "any", {"coding", "linear-even", "routing"}, {"c": 1}, 1,
          {"w": ["0"], "x": ["0"], "y": ["c1"], "z": ["c1"]}),
    _spec("(1,0,0)", "any", {"coding", "linear-even", "routing"}, {"a": 1}, 1,
          {"w": ["0"], "x": ["0"], "y": ["0"], "z": ["a1"]}),
    _spec("(0,1,0)", "any", {"coding", "linear-even", "routing"}, {"b": 1}, 1,
          {"w": ["0"], "x": ["0"], "y": ["0"], "z": ["b1"]}),
]

_VAMOS = [
    _spec("(0,0,0,0)", "any", {"routing", "linear"}, {}, 1,
          {"w": ["0"], "x": ["0"], "y": ["0"], "z": ["0"]}),
    _spec("(1,0,0,0)", "any", {"routing", "linear"}, {"a": 1}, 1,
          {"w": ["0"], "x": ["a1"], "y": ["a1"], "z": ["a1"]}),
    _spec("(0,0,0,1)", "any", {"routing", "linear"}, {"d": 1}, 1,
          {"w": ["d1"], "x": ["d1"], "y": ["d1"], "z": ["d1"]}),
    _spec("(1,0,1,0)", "any", {"routing", "linear"}, {"a": 1, "c": 1}, 1,
          {"w": ["c1"], "x": ["a1"], "y": ["a1"], "z": ["a1"]}),
    _spec("(0,2,0,0)", "any", {"routing", "linear"}, {"b": 2}, 1,
          {"w": ["b1"], "x": ["b1"], "y": ["b2"], "z": ["b2"]}),
    _spec("(0,0,2,0)", "any", {"routing", "linear"}, {"c": 2}, 1,
          {"w": ["c1"], "x": ["c1"], "y": ["c2"], "z": ["c2"]}),
    _spec("(1,1,1,0)", "any", {"linear"}, {"a": 1, "b": 1, "c": 1}, 1,
          {"w": ["a1+c1"], "x": ["a1"], "y": ["a1+b1"], "z": ["a1+b1"]}),
    _spec("(0,1,1,1)", "any", {"linear"}, {"b": 1, "c": 1, "d": 1}, 1,
          {"w": ["b1+d1"], "x": ["b1+d1"], "y": ["b1+c1+d1"], "z": ["c1"]}),
    _spec("(1,0,2,0)", "any", {"linear"}, {"a": 1, "c": 2}, 1,
          {"w": ["c1"], "x": ["a1"], "y": ["a1+c2"], "z": ["a1+c2"]}),
    _spec("(0,2,0,1)", "any", {"linear"}, {"b": 2, "d": 1}, 1,
          {"w": ["b1+d1"], "x": ["b1+d1"], "y": ["b2+d1"], "z": ["b2+d1"]}),
    _spec("(1,1,1/2,1)", "any", {"linear"}, {"a": 2, "b": 2, "c": 1, "d": 2}, 2,
          {"w": ["b2+d1", "c1+d2"],
           "x": ["a1+d1", "a2+b2+c1+d2"],
           "y": ["a1+b1+d1", "a2+d2"],
           "z": ["a1+b1", "a2+c1"]}),
    _spec("(1,1/2,1,1)", "any", {"linear"}, {"a": 2, "b": 1, "c": 2, "d": 2}, 2,
          {"w": ["c1+d1", "b1+d2"],
           "x": ["a1+c1+d1", "a2+d2"],
           "y": ["a1+d1", "a2+b1+c2+d2"],
           "z": ["a1+c2", "a2+b1"]}),
]

_CODE_SPECS: dict[str, list[BuiltinCodeSpec]] = {
    "gbutterfly": _GB,
    "fano": _FANO,
    "nonfano": _NONFANO,
    "vamos": _VAMOS,
}

_DEFAULT_FIELD = {"even": GF2, "odd": GF3, "any": GF2}


def builtin_code_specs(net_id: str) -> list[BuiltinCodeSpec]:
    if net_id not in _CODE_SPECS:
        raise KeyError(f"no bundled codes for network {net_id!r}")
    return list(_CODE_SPECS[net_id])


def instantiate_builtin(
    net: Network, spec: BuiltinCodeSpec, fld: PrimeField | None = None
) -> BuiltinCode:
    fld = fld or _DEFAULT_FIELD[spec.characteristic]
    code = build_code(
        net,
        fld,
        dict(spec.dims),
        spec.edge_dim,
        {label: list(f) for label, f in spec.edges},
        {key: list(f) for key, f in spec.decoders},
    )
    return BuiltinCode(spec.label, spec.characteristic, spec.region_classes, code)


def builtin_codes(net_id: str, fld: PrimeField | None = None) -> list[BuiltinCode]:
    """Every bundled code for a network.

    With ``fld`` omitted, each code is instantiated over a default field
    of its claimed characteristic class (GF(2) for ``even``/``any``,
    GF(3) for ``odd``); pass a field to override.
    """
    net = builtin_network(net_id)
    return [instantiate_builtin(net, s, fld) for s in builtin_code_specs(net_id)]


# ---------------------------------------------------------------------------
# code files

_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"


def _structural_inputs(net: Network, rates: RateSpec, node: str) -> list[tuple[str, int]]:
    return _tail_symbol_layout(net, rates, node)


def code_to_json(net: Network, code: Code) -> dict:
    validate_code(net, code)
    rates = code.rates
    doc: dict = {
        "network": code.network,
        "message_dims": dict(rates.message_dims),
        "edge_dim": rates.edge_dim,
    }
    if isinstance(code, LinearCode):
        doc["field"] = {"modulus": code.field.p}
        edges = {}
        for label, m in code.edge_functions.items():
            edge = net.edge_by_id(net.named_edges[label])
            layout = _structural_inputs(net, rates, edge.tail)
            edges[label] = {
                "inputs": [name for name, _ in layout],
                "matrix": [list(row) for row in m.entries],
            }
        doc["edges"] = edges
        if code.decoders:
            doc["decoders"] = {
                f"{node}/{msg}": {
                    "inputs": [name for name, _ in _structural_inputs(net, rates, node)],
                    "matrix": [list(row) for row in m.entries],
                }
                for (node, msg), m in code.decoders.items()
            }
    else:
        doc["alphabet"] = code.alphabet
        edges = {}
        for label, table in code.edge_tables.items():
            edge = net.edge_by_id(net.named_edges[label])
            layout = _structural_inputs(net, rates, edge.tail)
            edges[label] = {
                "inputs": [name for name, _ in layout],
                "table": ["".join(_DIGITS[s] for s in out) for out in table],
            }
        doc["edges"] = edges
        if code.decoder_tables:
            doc["decoders"] = {
                f"{node}/{msg}": {
                    "inputs": [name for name, _ in _structural_inputs(net, rates, node)],
                    "table": ["".join(_DIGITS[s] for s in out) for out in table],
                }
                for (node, msg), table in code.decoder_tables.items()
            }
    return doc


def _permute_columns(
    matrix_rows: list[list[int]],
    listed: list[tuple[str, int]],
    structural: list[tuple[str, int]],
) -> list[list[int]]:
    if [name for name, _ in listed] == [name for name, _ in structural]:
        return matrix_rows
    if sorted(listed) != sorted(structural):
        raise ValueError(
            f"listed inputs {[n for n, _ in listed]} do not match the node's "
            f"available symbols {[n for n, _ in structural]}"
        )
    listed_offsets = {}
    pos = 0
    for name, width in listed:
        listed_offsets[name] = pos
        pos += width
    out = []
    for row in matrix_rows:
        new_row = []
        for name, width in structural:
            start = listed_offsets[name]
            new_row.extend(row[start : start + width])
        out.append(new_row)
    return out


def code_from_json(
    doc: dict, net: Network | None = None, base_dir: str | Path | None = None
) -> tuple[Network, Code]:
    """Materialize a code (and its network) from the JSON document."""
    if net is None:
        if "network_file" in doc:
            from .netmodel import parse_network

            net_path = Path(doc["network_file"])
            if base_dir is not None and not net_path.is_absolute():
                net_path = Path(base_dir) / net_path
            net = parse_network(net_path.read_text(), name=doc.get("network", "custom"))
        else:
            net = builtin_network(doc["network"])
    rates = rate_spec(net, doc["message_dims"], doc["edge_dim"])
    n = rates.edge_dim

    def width_of(name: str) -> int:
        if name in net.messages:
            return rates.message_dims[name]
        return n

    def layout_from_names(names: list[str]) -> list[tuple[str, int]]:
        return [(name, width_of(name)) for name in names]

    is_linear = "field" in doc
    if is_linear:
        fspec = doc["field"]
        if "modulus" in fspec:
            fld = PrimeField(int(fspec["modulus"]))
        elif fspec.get("characteristic") in ("even", "odd"):
            fld = GF2 if fspec["characteristic"] == "even" else GF3
        else:
            raise ValueError("field must give a modulus or a characteristic")
        functions = {}
        for label, entry in doc["edges"].items():
            if label not in net.named_edges:
                raise ValueError(f"unknown edge label {label!r}")
            edge = net.edge_by_id(net.named_edges[label])
            structural = _structural_inputs(net, rates, edge.tail)
            listed = layout_from_names(entry["inputs"])
            rows = _permute_columns(
                [list(r) for r in entry["matrix"]], listed, structural
            )
            functions[label] = mat(fld, rows, cols=sum(w for _, w in structural))
        decoders = {}
        for key, entry in (doc.get("decoders") or {}).items():
            node, _, msg = key.partition("/")
            structural = _structural_inputs(net, rates, node)
            listed = layout_from_names(entry["inputs"])
            rows = _permute_columns(
                [list(r) for r in entry["matrix"]], listed, structural
            )
            decoders[(node, msg)] = mat(fld, rows, cols=sum(w for _, w in structural))
        code: Code = LinearCode(net.name, fld, rates, functions, decoders)
    else:
        alphabet = int(doc["alphabet"])

        def parse_table(entry, structural):
            # Table domains cannot be column-permuted after the fact, so
            # the listed inputs must already be in structural order.
            if list(entry["inputs"]) != [name for name, _ in structural]:
                raise ValueError(
                    f"table inputs {entry['inputs']} must be listed in the node's "
                    f"input order {[name for name, _ in structural]}"
                )
            return tuple(
                tuple(_DIGITS.index(ch) for ch in line) for line in entry["table"]
            )

        tables = {}
        for label, entry in doc["edges"].items():
            if label not in net.named_edges:
                raise ValueError(f"unknown edge label {label!r}")
            edge = net.edge_by_id(net.named_edges[label])
            tables[label] = parse_table(entry, _structural_inputs(net, rates, edge.tail))
        decoder_tables = {}
        for key, entry in (doc.get("decoders") or {}).items():
            node, _, msg = key.partition("/")
            decoder_tables[(node, msg)] = parse_table(
                entry, _structural_inputs(net, rates, node)
            )
        code = TableCode(net.name, alphabet, rates, tables, decoder_tables)
    validate_code(net, code)
    return net, code


def write_code_file(path: str | Path, net: Network, code: Code) -> None:
    Path(path).write_text(json.dumps(code_to_json(net, code), indent=2, sort_keys=True) + "\n")


def read_code_file(path: str | Path, net: Network | None = None) -> tuple[Network, Code]:
    path = Path(path)
    doc = json.loads(path.read_text())
    return code_from_json(doc, net, base_dir=path.parent)
