"""Dyadic paracontrolled calculus on the flat periodic torus.

Subpackages: grids (transforms, heat semigroup, Duhamel inversion), dyadic
(Littlewood-Paley blocks and regularity estimation), paraproducts (Bony
calculus), correctors (commutator/corrector operators and the gain harness),
words (alphabet and paracontrolled-system combinatorics), refdata (mollified
noise and reference-data evaluation), solver (quasilinear gPAM fixed point),
cli (command-line entry point).
"""

__version__ = "0.1.0"
