"""Numerical tolerances shared across the package.

All values are absolute numbers used in relative comparisons as noted.
"""

#: residual orthogonality after a least-squares solve, relative to ||y|| * ||phi_j||
TAU_ORTH = 1e-8

#: rank test for QR: smallest |R_ii| relative to the largest column norm
TAU_RANK = 1e-10

#: relative tolerance for extreme eigenvalues of small Gram matrices
TAU_EIG = 1e-9

#: r^n == y - y^n consistency check, relative to ||y||
TAU_RESIDUAL_IDENTITY = 1e-9

#: default relative residual tolerance for the pursuit stopping rule
DEFAULT_RESIDUAL_TOL = 1e-6

#: default per-trial recovery tolerance in experiments
DEFAULT_RECOVERY_TOL = 1e-4

#: largest number of k-subsets rip_exhaustive will enumerate
EXHAUSTIVE_SUBSET_LIMIT = 2_000_000
