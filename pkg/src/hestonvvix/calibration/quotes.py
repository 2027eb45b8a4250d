"""Vanilla option quotes and their CSV form.

CSV columns: ``maturity,strike,type,price,impliedVol,discount``. ``type`` is
``C``/``call`` or ``P``/``put``; ``price`` is the discounted premium,
``discount`` the discount factor B(0, T) (1 if blank); ``impliedVol`` may be
blank.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DomainError
from ..model import HestonParams, MarketConvention
from .pricing import heston_vanilla_price, implied_vol

CSV_COLUMNS = ("maturity", "strike", "type", "price", "impliedVol", "discount")


class QuoteFormatError(DomainError):
    """A quote file is malformed; the message names the row and column."""


@dataclass(frozen=True)
class VanillaQuote:
    maturity: float
    strike: float
    is_call: bool
    price: float
    implied_vol: float | None = None
    discount: float = 1.0
    discounted: bool = True

    def __post_init__(self):
        if not self.maturity > 0:
            raise DomainError(f"maturity must be > 0, got {self.maturity}")
        if not self.strike > 0:
            raise DomainError(f"strike must be > 0, got {self.strike}")
        if not self.price >= 0:
            raise DomainError(f"price must be >= 0, got {self.price}")
        if not 0 < self.discount <= 1.5:
            raise DomainError(f"discount factor {self.discount} is implausible")
        if self.implied_vol is not None and not self.implied_vol > 0:
            raise DomainError(f"implied vol must be > 0, got {self.implied_vol}")

    @property
    def undiscounted_price(self) -> float:
        return self.price / self.discount if self.discounted else self.price

    def check_bounds(self, forward: float) -> None:
        """Raise unless the undiscounted price lies above its intrinsic value."""
        intrinsic = max(forward - self.strike, 0.0) if self.is_call else max(self.strike - forward, 0.0)
        if self.undiscounted_price < intrinsic - 1e-10 * max(forward, self.strike):
            raise DomainError(f"quote {self} lies below intrinsic value {intrinsic:.6g}")


def _parse_type(text: str) -> bool:
    t = text.strip().lower()
    if t in ("c", "call"):
        return True
    if t in ("p", "put"):
        return False
    raise ValueError(f"option type must be C/call or P/put, got {text!r}")


def parse_quotes_csv(text: str, source: str = "<string>") -> list[VanillaQuote]:
    reader = csv.DictReader(io.StringIO(text))
    header = tuple(h.strip() for h in (reader.fieldnames or ()))
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise QuoteFormatError(f"{source}: header is missing column(s) {', '.join(missing)}")
    quotes = []
    for row_no, row in enumerate(reader, start=2):
        row = {k.strip(): (v or "").strip() for k, v in row.items() if k is not None}
        values = {}
        for col in CSV_COLUMNS:
            raw = row.get(col, "")
            try:
                if col == "type":
                    values[col] = _parse_type(raw)
                elif col in ("impliedVol", "discount") and raw == "":
                    values[col] = None
                else:
                    values[col] = float(raw)
                    if not math.isfinite(values[col]):
                        raise ValueError("not finite")
            except ValueError as exc:
                raise QuoteFormatError(f"{source}: row {row_no}, column '{col}': {exc} ({raw!r})") from None
        try:
            quotes.append(VanillaQuote(
                maturity=values["maturity"],
                strike=values["strike"],
                is_call=values["type"],
                price=values["price"],
                implied_vol=values["impliedVol"],
                discount=1.0 if values["discount"] is None else values["discount"],
            ))
        except DomainError as exc:
            raise QuoteFormatError(f"{source}: row {row_no}: {exc}") from None
    if not quotes:
        raise QuoteFormatError(f"{source}: no quotes")
    return quotes


def read_quotes_csv(path) -> list[VanillaQuote]:
    path = Path(path)
    return parse_quotes_csv(path.read_text(), str(path))


def format_quotes_csv(quotes) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for q in quotes:
        price = q.price if q.discounted else q.price * q.discount
        w.writerow([
            repr(q.maturity), repr(q.strike), "C" if q.is_call else "P", repr(price),
            "" if q.implied_vol is None else repr(q.implied_vol), repr(q.discount),
        ])
    return buf.getvalue()


def write_quotes_csv(quotes, path) -> None:
    Path(path).write_text(format_quotes_csv(quotes))


def synthetic_quotes(
    params: HestonParams,
    conv: MarketConvention | None = None,
    spot: float = 100.0,
    maturities=(1 / 12, 2 / 12, 3 / 12, 6 / 12, 1.0),
    n_strikes: int = 15,
    width: float = 2.0,
    vol_scale: float | None = None,
) -> list[VanillaQuote]:
    """Model quotes: OTM options at F exp(z s sqrt(T)), z uniform on [-width, width].

    ``s`` defaults to sqrt(theta). Implied vols are attached so that every
    weight scheme applies.
    """
    conv = conv or MarketConvention()
    s = math.sqrt(params.theta) if vol_scale is None else vol_scale
    quotes = []
    for T in maturities:
        fwd = float(conv.forward(spot, T))
        disc = math.exp(-conv.r * T)
        strikes = fwd * np.exp(np.linspace(-width, width, n_strikes) * s * math.sqrt(T))
        calls = heston_vanilla_price(params, conv, strikes, T, True, spot)
        for K, c in zip(strikes, np.atleast_1d(calls)):
            is_call = K >= fwd
            price = c if is_call else c - fwd + K
            iv = implied_vol(price, fwd, K, T, is_call)
            quotes.append(VanillaQuote(T, float(K), bool(is_call), float(price * disc), iv, disc))
    return quotes
