"""Special functions, quadrature, parity regression and splines."""

from .quadrature import QuadratureSpec, integrate
from .regression import ParityRegression, solve_parity_regression
from .special import log_bessel_iv, ncx2_cdf, ncx2_logpdf, ncx2_pdf, ncx2_pdf_edgeworth, ncx2_quantile, ncx2_sample
from .spline import Spline2D, spline2d_eval, spline2d_fit

__all__ = [
    "ParityRegression",
    "QuadratureSpec",
    "Spline2D",
    "integrate",
    "log_bessel_iv",
    "ncx2_cdf",
    "ncx2_logpdf",
    "ncx2_pdf",
    "ncx2_pdf_edgeworth",
    "ncx2_quantile",
    "ncx2_sample",
    "solve_parity_regression",
    "spline2d_eval",
    "spline2d_fit",
]
