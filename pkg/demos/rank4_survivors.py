"""Covering radii of the eight rank-2 lattices M left after the positivity tests at rank 4."""

from k3lattice.dsl import lattice
from k3lattice.lattice import twist
from k3lattice.vectors import covering_radius_sq

SURVIVORS = ["[-2,1,-4]", "[-2,0,-4]", "[-2,1,-6]", "[-2,0,-6]",
             "[-2,0,-8]", "[-2,1,-10]", "[-2,1,-14]", "[-2,1,-22]"]


def main():
    for text in SURVIVORS:
        r = covering_radius_sq(twist(lattice(text), -1))
        verdict = "zero entropy" if r.value_sq <= 2 else "needs another argument"
        print(f"U + {text:12s} R^2 = {str(r.value_sq):8s} {verdict}")


if __name__ == "__main__":
    main()
