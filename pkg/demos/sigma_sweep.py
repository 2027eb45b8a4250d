"""VVIX against vol-of-vol for Set III: the simple closed form keeps rising while the log contract and the strip level off."""

import numpy as np

from hestonvvix.errors import NoKStar
from hestonvvix.model import PRESETS, VIX_TENOR
from hestonvvix.replication import default_vix_option_grid, vvix_by_replication
from hestonvvix.vix import vvix_log_contract, vvix_simple


def main(set_name="set3", k1=10.0):
    base = PRESETS[set_name]
    grid = default_vix_option_grid(k1)
    print(f"{'sigma':>6} {'simple':>8} {'log':>8} {'strip':>8}")
    for s in np.arange(0.25, 3.01, 0.25):
        p = base.replace(sigma=float(s))
        try:
            strip = vvix_by_replication(p, VIX_TENOR, None, grid).points
        except NoKStar:
            strip = float("nan")
        print(f"{s:6.2f} {vvix_simple(p, VIX_TENOR).points:8.1f} "
              f"{vvix_log_contract(p, VIX_TENOR).points:8.1f} {strip:8.1f}")


if __name__ == "__main__":
    main()
