"""M0 for a weight-k eigenform by the limit, residue, scaled and Laurent routes.

Usage: python3 demos/main_term_routes.py [k ...]
"""

import math
import sys

from rsmoment import mainterm as M
from rsmoment.modforms import hecke_eigenforms
from rsmoment.specialfn import PrecisionContext


def main(weights):
    ctx = PrecisionContext(30)
    for k in weights:
        g = hecke_eigenforms(k, max(800, k * k), ctx)[0]
        lim = M.m0_by_limit(k, g, ctx).re
        res = M.m0_by_residue(k, g, M.TorusContour(), ctx).re
        sc = M.m0_scaled_residue(k, g, M.TorusContour(), ctx).re
        lr = M.laurent_polynomials(k, g, None, ctx)
        print(f"k={k}")
        print(f"  limit     {float(lim):.12g}")
        print(f"  residue   {float(res):.12g}")
        print(f"  scaled    {float(sc):.12g}   |scaled - residue|/sqrt(k) = {abs(float(sc - res)) / math.sqrt(k):.4g}")
        print(f"  laurent   {float(lr.main_value):.12g}")
        for j, p in enumerate(lr.p_polys):
            print(f"  P_{j}(x) = " + " + ".join(f"{float(c):.6g} x^{i}" for i, c in enumerate(p)))


if __name__ == "__main__":
    main([int(a) for a in sys.argv[1:]] or [12, 16])
