"""klab: a desk-scale algorithmic-information laboratory.

Anytime upper approximations of plain, prefix-free and conditional Kolmogorov
complexity over a small bit-cell universal machine, plus the star-operator,
Solovay's alpha function, the P/V composition machine and axiom auditors.
"""

__version__ = "0.1.0"
