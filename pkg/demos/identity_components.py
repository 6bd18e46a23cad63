"""Both sides of the second-moment identity at one weight, component by component.

Usage: python3 demos/identity_components.py [k] [step] [t_max]
Each run takes a few minutes at the default quadrature settings.
"""

import sys

from rsmoment.moments import IdentitySettings, normalised_inner_product_direct, verify_identity
from rsmoment.modforms import hecke_eigenforms
from rsmoment.specialfn import PrecisionContext


def main(k=16, step=0.2, t_max=24.0):
    ctx = PrecisionContext(30)
    rep = verify_identity(k, 0, (), ctx, settings=IdentitySettings(30, step, t_max))
    print(f"k={k}  step={step}  t_max={t_max}")
    for name, v in rep.lhs_components.items():
        print(f"  lhs {name:16s} {v: .10g}")
    for name, v in rep.rhs_components.items():
        print(f"  rhs {name:16s} {v: .10g}")
    print(f"  lhs total  {rep.lhs_total: .10g}")
    print(f"  rhs total  {rep.rhs_total: .10g}")
    print(f"  margin {rep.margin:.6g}  allowed {rep.allowed:.6g}  verdict {rep.verdict}")
    g = hecke_eigenforms(k, 800, ctx)[0]
    print(f"  lhs by fundamental-domain quadrature {normalised_inner_product_direct(g, ctx): .10g}")


if __name__ == "__main__":
    args = sys.argv[1:]
    main(int(args[0]) if args else 16, *(float(a) for a in args[1:3]))
