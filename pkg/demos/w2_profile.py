"""W2 against its double-pole approximation as a function of X = k/(4 pi^2 n).

Usage: python3 demos/w2_profile.py
"""

import math

from rsmoment.mainterm import w2_double_pole, w2_integral

FOUR_PI2 = 4 * math.pi**2

print(f"{'X':>10} {'W2':>14} {'double pole':>14} {'log^2 X':>12}")
for x in (1.0, 1.1, 1.5, 2.0, 3.0, 10.0, 1e2, 1e4, 1e6):
    w2 = float(w2_integral([1], FOUR_PI2 * x)[0] ** 2)
    print(f"{x:>10g} {w2:>14.6g} {w2_double_pole(1, FOUR_PI2 * x):>14.6g} {math.log(x) ** 2:>12.6g}")
