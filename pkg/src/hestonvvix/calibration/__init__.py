"""Heston calibration to vanilla quotes, with optional VVIX anchoring."""

from .calibrate import (
    BOUNDS,
    PARAM_NAMES,
    CalibrationResult,
    CalibrationSpec,
    OptimizerSettings,
    VvixMode,
    calibrate,
    spec_summary,
    vvix_diagnostics,
)
from .pricing import black_price, bs_vega, heston_call_prices, heston_cf, heston_vanilla_price, implied_vol
from .quotes import (
    QuoteFormatError,
    VanillaQuote,
    format_quotes_csv,
    parse_quotes_csv,
    read_quotes_csv,
    synthetic_quotes,
    write_quotes_csv,
)
from .weights import WeightScheme, build_weights

__all__ = [
    "BOUNDS",
    "PARAM_NAMES",
    "CalibrationResult",
    "CalibrationSpec",
    "OptimizerSettings",
    "QuoteFormatError",
    "VanillaQuote",
    "VvixMode",
    "WeightScheme",
    "black_price",
    "bs_vega",
    "build_weights",
    "calibrate",
    "format_quotes_csv",
    "heston_call_prices",
    "heston_cf",
    "heston_vanilla_price",
    "implied_vol",
    "parse_quotes_csv",
    "read_quotes_csv",
    "spec_summary",
    "synthetic_quotes",
    "vvix_diagnostics",
    "write_quotes_csv",
]
