"""Desk-scale verification tools for random coverings of the circle.

Subpackages:

* :mod:`circlecover.arith` — exact fixed-point circle arithmetic, continued
  fractions, Bohr-set counts.
* :mod:`circlecover.sequences` — lacunary / polynomial / prime-power sequence
  machinery, gcd sums, local counting.
* :mod:`circlecover.coverset` — random arcs, uncovered-set tracking, Shepp
  series classification.
* :mod:`circlecover.tree` — colored dyadic-tree percolation runs.
* :mod:`circlecover.limsupdim` — box counts and dimension estimates for
  shrinking-target limsup sets.
* :mod:`circlecover.cassels` — inhomogeneous two-form products and the random
  model bridging them to coverings.
* :mod:`circlecover.cli` — the `circlecover` command.
"""

__version__ = "0.1.0"

__all__ = ["__version__"]
