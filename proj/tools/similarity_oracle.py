#!/usr/bin/env python3
"""Pairwise cosine similarities of an embedding file, one row per class.

Output: header line with the class order, then one line per class with
%.17g values. Independent of the C++ code; used as a test oracle.
"""
import math
import sys


def main(src, dst):
    names, vecs = [], []
    with open(src) as f:
        for line in f:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            names.append(parts[0].lower())
            vecs.append([float(x) for x in parts[1:]])
    with open(dst, "w") as out:
        out.write(" ".join(names) + "\n")
        for a in vecs:
            row = []
            for b in vecs:
                dot = math.fsum(x * y for x, y in zip(a, b))
                na = math.sqrt(math.fsum(x * x for x in a))
                nb = math.sqrt(math.fsum(y * y for y in b))
                row.append("%.17g" % (dot / (na * nb)))
            out.write(" ".join(row) + "\n")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
