"""Print B1, B2, C1 and C2 for a few model geometries.

Run with ``python demos/constants_table.py``.
"""
import math

from isosobolev import (compute_constants, euclidean_geometry, is_p_hyperbolic, product_model,
                        profile_from_geometry, sobolev_best_constant)

GEOMETRIES = {"R^3": euclidean_geometry(3), "R^4": euclidean_geometry(4),
              "R x S^2 (k=3)": product_model(1, 3, 2 * math.pi),
              "R^2 x T^2 (k=4)": product_model(2, 4, 1.0)}


def main():
    print(f"{'geometry':<24}{'p':>5}{'B1':>14}{'B2':>14}{'C1':>14}{'C2':>14}")
    for label, g in GEOMETRIES.items():
        pr = profile_from_geometry(g)
        for p in (1.5, 2.0):
            if not is_p_hyperbolic(pr, p).hyperbolic:
                continue
            c = compute_constants(pr, p, g)
            print(f"{label:<24}{p:>5}{c.B1:>14.8f}{c.B2:>14.8f}{c.C1:>14.8f}{c.C2:>14.8f}")
    # the Euclidean C1 is the sharp Sobolev constant
    print("S(3, 2) =", sobolev_best_constant(3, 2.0))


if __name__ == "__main__":
    main()
