"""Calibrate to synthetic Set IV quotes, then again with sigma pinned by a VVIX level."""

import logging

from hestonvvix.calibration import CalibrationSpec, VvixMode, calibrate, synthetic_quotes
from hestonvvix.model import PRESETS


def show(label, p):
    print(f"{label:>12}: v0={p.v0:.5f} kappa={p.kappa:.4f} theta={p.theta:.5f} rho={p.rho:.4f} sigma={p.sigma:.4f}")


def main():
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    truth = PRESETS["set4"]
    quotes = synthetic_quotes(truth)
    show("truth", truth)
    show("free fit", calibrate(CalibrationSpec(quotes)).params)
    show("VVIX 150", calibrate(CalibrationSpec(quotes, vvix_mode=VvixMode.solve(150.0))).params)


if __name__ == "__main__":
    main()
