"""Critical sublattices of U + A1(k) and the zero-entropy sublattices for k = 2."""

from k3lattice import entropy
from k3lattice.dsl import gram_expr, lattice, to_string


def main():
    for k in (2, 3, 4, 5, 7, 9, 13, 25):
        cr = entropy.critical_sublattice(lattice(f"U + A1({k})"))
        print(f"U + A1({k}): index {cr.index}, rule {cr.certificate.get('rule')}")
    cr = entropy.critical_sublattice(lattice("U + A1(2)"))
    print("basis for k = 2:", [list(v) for v in cr.basis.vectors])
    for b in entropy.zero_entropy_sublattice_bases(cr):
        sub = b.lattice()
        print(f"  index {b.index}: {to_string(gram_expr([list(r) for r in sub.gram]))} (det {sub.det})")


if __name__ == "__main__":
    main()
