"""Exact engine for correlation tensors of a super residue recursion.

Two independent solvers (a residue recursion and a constraint recursion)
produce the same coefficient tensors from local curve data; an operator
module verifies the underlying mode algebra; a zoo supplies example curves.
"""

__version__ = "0.1.0"
