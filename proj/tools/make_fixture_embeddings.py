#!/usr/bin/env python3
"""Writes data/embeddings_fixture.txt: 22 classes, 50 dimensions.

Each vector mixes the centroids of the scene types whose inventory lists
the class with a class-specific direction, so classes that share rooms are
more similar to each other. Seeded; rerunning reproduces the file.
"""
import sys

import numpy as np

DIM = 50
INVENTORIES = {
    "kitchen": ["bowl", "garbagecan", "houseplant", "sink", "book",
                "toaster", "microwave", "fridge", "coffeemachine"],
    "living_room": ["laptop", "television", "lamp", "houseplant", "garbagecan",
                    "book", "bowl", "sofa", "pillow"],
    "bedroom": ["lamp", "book", "alarmclock", "laptop", "houseplant",
                "bed", "dresser", "pillow", "mirror"],
    "bathroom": ["sink", "towel", "garbagecan", "houseplant",
                 "toilet", "bathtub", "mirror", "soapbottle"],
}
CLASSES = ["bowl", "garbagecan", "houseplant", "laptop", "television", "lamp",
           "book", "alarmclock", "sink", "towel", "toaster", "microwave",
           "fridge", "coffeemachine", "pillow", "sofa", "bed", "dresser",
           "toilet", "bathtub", "mirror", "soapbottle"]


def main(path):
    rng = np.random.default_rng(20240521)
    centroids = {room: rng.standard_normal(DIM) for room in INVENTORIES}
    lines = ["# synthetic word-embedding fixture: token followed by %d floats" % DIM]
    for cls in CLASSES:
        rooms = [room for room, inv in INVENTORIES.items() if cls in inv]
        vec = sum(centroids[r] for r in rooms) / len(rooms)
        vec = vec + 0.9 * rng.standard_normal(DIM)
        lines.append(cls + " " + " ".join("%.6f" % v for v in vec))
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/embeddings_fixture.txt")
