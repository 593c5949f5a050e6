"""kstab: exact-arithmetic K-stability computations.

A library and CLI that replays volume integrals, Zariski chamber
decompositions, toric intersection numbers, flag functionals, GIT weights
and invariant-ring dimensions as a machine-checked regression suite of
exact rational values.
"""

__version__ = "0.1.0"
