"""ncregions: exact rate-region computations for network coding.

Submodules:

- :mod:`ncregions.ff` — linear algebra over prime fields GF(p);
- :mod:`ncregions.netmodel` — the network abstraction and the four
  bundled networks (gbutterfly, fano, nonfano, vamos);
- :mod:`ncregions.codes` — fractional codes, verification (algebraic
  and exhaustive), time sharing, and the bundled achieving codes;
- :mod:`ncregions.rateregion` — exact rational polytopes, vertex
  enumeration, capacities, the region catalog and the four-variable
  transfer operation;
- :mod:`ncregions.subspace` — the subspace lattice of GF(q)^d;
- :mod:`ncregions.rankineq` — linear rank inequalities, evaluation on
  subspace assignments, and violation search;
- :mod:`ncregions.cli` — the command-line interface.
"""

__version__ = "0.1.0"
