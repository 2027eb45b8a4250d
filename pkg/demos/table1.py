"""Print F_VIX and the three VVIX measures for the six parameter presets."""

from hestonvvix.model import PRESETS, VIX_TENOR
from hestonvvix.replication import default_vix_option_grid, vvix_by_replication
from hestonvvix.vix import vix_future, vvix_log_contract, vvix_simple


def main():
    print(f"{'set':5} {'F_VIX':>7} {'log':>8} {'K1=5':>8} {'K1=10':>8} {'simple':>8}")
    for name, p in PRESETS.items():
        rep = [vvix_by_replication(p, VIX_TENOR, None, default_vix_option_grid(k)).points for k in (5, 10)]
        print(f"{name:5} {vix_future(p, VIX_TENOR).points:7.3f} {vvix_log_contract(p, VIX_TENOR).points:8.2f} "
              f"{rep[0]:8.2f} {rep[1]:8.2f} {vvix_simple(p, VIX_TENOR).points:8.2f}")


if __name__ == "__main__":
    main()
