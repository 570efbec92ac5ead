"""Simulation of RSOS anyonic chains embedded in qubit registers.

Exact constrained-basis diagonalization, a dense statevector engine, the
Temperley-Lieb / braid operator construction, a brick-wall Euler-Cartan
variational circuit with analytic gradients, and anyonic diagnostics.
"""

__version__ = "0.1.0"
