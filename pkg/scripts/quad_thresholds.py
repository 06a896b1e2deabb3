"""How the flipped-diagonal deficit and the area gap scale with the fold of a cocircular quad.

Residual grows linearly in the fold angle, the deficit quadratically and the
area gap quartically, so fixed linear residual thresholds cannot separate
near-equality from coplanarity at small folds.
"""
import argparse
import math

import numpy as np

from flipmesh import geom
from flipmesh.geom import EdgeQuad


def folded(phi: float) -> EdgeQuad:
    ang = np.array([0.3, 1.9, 3.4, 4.9])
    a, b, c, d = np.column_stack([np.cos(ang), np.sin(ang), np.zeros(4)])
    axis = (d - b) / np.linalg.norm(d - b)
    v = c - b
    c = b + v * math.cos(phi) + np.cross(axis, v) * math.sin(phi) + axis * (axis @ v) * (1 - math.cos(phi))
    return EdgeQuad(tuple(a), tuple(b), tuple(c), tuple(d))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--decades", type=int, default=8)
    args = ap.parse_args()
    print("fold        residual/L  flipped_deficit  flipped_class  area_gap/L^2")
    for phi in np.logspace(-args.decades, 0, 2 * args.decades + 1):
        q = folded(float(phi))
        L = geom.bbox_diagonal(q)
        st = geom.classify_edge(q.flipped())
        cmp = geom.area_pair_inequality(q)
        print(f"{phi:.3e}   {geom.coplanarity_residual(*q) / L:.3e}   {math.pi - st.measured_sum:.3e}        "
              f"{st.kind.value:12s}   {(cmp.rhs - cmp.lhs) / L**2:.3e}")


if __name__ == "__main__":
    main()
