"""
The Robertson-Schroedinger relation for initial and final energy
=================================================================

For rho_p = p|+><+| + (1-p)|-><-| the product of the two energy variances
bounds the squared covariance plus the squared imaginary correlation. Pure
states sit exactly on the bound.
"""
import math

import numpy as np

from kdqlab.figures import rsur_rows
from kdqlab.protocol import DriveParams

drive = DriveParams.dimensionless()
header, rows = rsur_rows(drive, 11 * math.pi / 15, np.linspace(0, 1, 11))
print("   p    <W>/w    lhs     rhs")
for p, _, mean, lhs, rhs in rows:
    print(f"{p:4.1f}  {mean:+.4f}  {lhs:.4f}  {rhs:.4f}")
