"""Authentication schemes over non-commutative matrix rings.

Two identification protocols built on polynomial evaluation in M_d(Z_q):
a two-pass hash-based challenge-response scheme and a k-round
bit-challenge zero-knowledge scheme, plus a brute-force oracle for the
underlying symmetrical decomposition problem and an experiment harness
for the completeness / soundness / zero-knowledge claims at desk scale.
"""

__version__ = "0.1.0"
