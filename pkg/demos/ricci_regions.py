"""Where the extrinsic Ricci flow with three principal curvatures is hyperbolic.

Prints a coarse character map over (sigma_1, sigma_3) with sigma_2 = 0:
'#' strictly hyperbolic, '+' hyperbolic, '.' not hyperbolic.  The strict
region should coincide with the negative sign of the cubic discriminant.
"""
import numpy as np

from egflow import hyperbolicity_map
from egflow.flows import ricci_discriminant_n3

s1, s3, codes, extra = hyperbolicity_map("ricci_ex", 3, (-3, 3, 61), (-3, 3, 25), 0.0)
glyph = {2: "#", 1: "+", 0: "."}
print("sigma_3 down, sigma_1 across")
for j in range(len(s3) - 1, -1, -1):
    print(f"{s3[j]:5.2f} " + "".join(glyph[c] for c in codes[:, j]))
print(f"cells where eigenvalues and discriminant disagree: {extra['disagreements']}")

D, label = ricci_discriminant_n3([6.0, 11.0, 6.0])
print(f"curvatures 1, 2, 3: D = {D:g} ({label})")
