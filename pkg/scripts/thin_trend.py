"""Thin-triangle fraction of the subdivided-edge construction as n grows."""
import argparse
import json

from flipmesh.genex import ThinExampleSpec, thin_example
from flipmesh.mesh import SurfaceMesh


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[1, 5, 10, 20, 50, 100])
    ap.add_argument("--eps", type=float, default=0.05)
    ap.add_argument("--scalene", action="store_true", help="use a scalene base triangle instead of the equilateral one")
    args = ap.parse_args()
    kw = {}
    if args.scalene:
        kw["base"] = SurfaceMesh([(0, 0, 0), (1, 0, 0), (0.3, 0.8, 0)], [(0, 1, 2)])
    for n in args.n:
        r = thin_example(ThinExampleSpec(n=n, epsilon=args.eps, **kw)).report
        keep = ("n", "thin_fraction", "min_angle_deg", "flips", "delaunay", "strict", "embedded")
        print(json.dumps({k: r[k] for k in keep}))


if __name__ == "__main__":
    main()
