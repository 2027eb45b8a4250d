"""PDE VVIX for Set II over the grid-refinement ladder, next to the strip value.

The finest row takes a few minutes.
"""

import time

from hestonvvix.model import PRESETS, VIX_TENOR
from hestonvvix.pde import TABLE2_LADDER, pde_vvix
from hestonvvix.replication import default_vix_option_grid, vvix_by_replication


def main(set_name="set2", k1=10.0):
    p = PRESETS[set_name]
    grid = default_vix_option_grid(k1)
    print(f"{set_name}, lowest VIX strike {k1:g}")
    print(f"single replication: {vvix_by_replication(p, VIX_TENOR, None, grid).points:.2f}")
    for n, m, l_ in TABLE2_LADDER:
        start = time.perf_counter()
        value = pde_vvix(p, None, 100.0, M=m, L=l_, N=n, vix_grid=grid).points
        print(f"N={n:3d} M={m:3d} L={l_:3d}  {value:8.2f}  ({time.perf_counter() - start:.1f}s)")


if __name__ == "__main__":
    main()
