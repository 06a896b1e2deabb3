"""Build pi/8-flat patches, delaunayify them and check projection and embedding."""
import argparse
import math

from flipmesh.flipper import delaunayify
from flipmesh.genex import flat_patch
from flipmesh.verify import is_embedded, projection_injective


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--patches", type=int, default=20)
    ap.add_argument("--side", type=int, default=7)
    args = ap.parse_args()
    print("seed  max_angle_deg  noise      flips  injective  embedded")
    for seed in range(args.patches):
        fp = flat_patch(seed, side=args.side)
        r = delaunayify(fp.mesh)
        print(f"{seed:4d}  {math.degrees(fp.max_triple_angle):13.3f}  {fp.noise:.3e}  {len(r.flips):5d}  "
              f"{projection_injective(fp.mesh, fp.plane)!s:9s}  {is_embedded(fp.mesh).ok}")


if __name__ == "__main__":
    main()
