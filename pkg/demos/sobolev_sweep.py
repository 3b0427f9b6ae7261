"""Sweep radial test functions and compare the best quotient with C1.

On R^N the Talenti family approaches the sharp constant; on the product
model random functions stay well below C1.
"""
import math

from isosobolev import (euclidean_geometry, product_model, profile_from_geometry,
                        sobolev_quotient_sweep)


def main(budget=40):
    for label, g, family in [("R^3", euclidean_geometry(3), "talenti"),
                             ("R^3", euclidean_geometry(3), "random"),
                             ("R x S^2", product_model(1, 3, 2 * math.pi), "random")]:
        pr = profile_from_geometry(g)
        best, rep = sobolev_quotient_sweep(pr, g, 2.0, family, budget=budget, seed=0)
        print(f"{label:<12}{family:<10} best {best:.6f}  C1 {rep['C1']:.6f}"
              f"  ratio {best / rep['C1']:.4f}  all pass {rep['all_pass']}")


if __name__ == "__main__":
    main()
