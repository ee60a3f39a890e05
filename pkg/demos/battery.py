"""Run every entropy test on a few lattices and print the verdicts with their certificates."""

import sys

from k3lattice import pipeline
from k3lattice.dsl import lattice
from k3lattice.tables import default_tables

EXAMPLES = ["U + E8(3) + A2", "U + [-2,0,-34]", "U + A1 + [-40]", "U + A1(2) + A1(4)", "U + A1(5)"]


def main(argv):
    tables = default_tables()
    cfg = pipeline.PipelineConfig(prior="appendix")
    for text in argv or EXAMPLES:
        print(text)
        for v in pipeline.appendix_verdicts(lattice(text), tables, cfg):
            print(f"  {v.test_name:16s} {v.status}")


if __name__ == "__main__":
    main(sys.argv[1:])
