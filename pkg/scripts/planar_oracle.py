"""Compare flip triangulations of random planar sets with the brute-force Delaunay oracle."""
import argparse
from collections import Counter

from flipmesh.genex import flip_triangulate, random_planar_set
from flipmesh.verify import PlanarTriangulation, compare_triangulations, empty_circumdisk_check, planar_delaunay_bruteforce


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sets", type=int, default=200)
    ap.add_argument("--max-points", type=int, default=12)
    args = ap.parse_args()
    tally = Counter()
    for seed in range(args.sets):
        P, boundary = random_planar_set(seed, args.max_points)
        m, report = flip_triangulate(P, boundary)
        mine = PlanarTriangulation(P, m.faces())
        oracle = planar_delaunay_bruteforce(P, boundary)
        diff = compare_triangulations(mine, oracle)
        tally["sets"] += 1
        tally["flips"] += len(report.flips)
        tally["circumdisk_failures"] += not empty_circumdisk_check(mine).ok
        tally["identical"] += diff.empty
        tally["concyclic_regions"] += sum(r.concyclic for r in diff.regions)
        tally["hard_mismatches"] += len(diff.hard_mismatches)
        if diff.hard_mismatches:
            print(f"seed {seed}: hard mismatch on vertices {[r.vertices for r in diff.hard_mismatches]}")
    for k, v in tally.items():
        print(f"{k:20s} {v}")


if __name__ == "__main__":
    main()
