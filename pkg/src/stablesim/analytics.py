"""Solvency and liquidity metrics computed from balance-sheet inputs.

All functions are pure and stateless. Ratios are reported at fixed
precision: leverage at 1e-4 (so 500 == 5.00%), the supplementary
leverage ratio and liquidity fractions in micro units, and weighted
maturities in micro-days.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .instruments import PortfolioState
from .money import MICRO, Amount, frac_of, mul_div

RATIO_SCALE = 10_000  # leverage ratio precision: 1e-4

SLR_BASE_BOUND = 30_000   # 3% in micro
SLR_GSIB_BOUND = 50_000   # 3% + 2% surcharge


class AnalyticsError(Exception):
    pass


class NonPositiveAssets(AnalyticsError):
    pass


class NonPositiveDenominator(AnalyticsError):
    pass


class CapitalBand(Enum):
    WELL = "well_capitalized"
    ADEQUATE = "adequately_capitalized"
    UNDER = "undercapitalized"
    SIGNIFICANT = "significantly_undercapitalized"
    CRITICAL = "critically_undercapitalized"


# Lower edges are inclusive: "at least 4%" is adequate, "at least 5%" well.
_BAND_FLOORS = (
    (500, CapitalBand.WELL),
    (400, CapitalBand.ADEQUATE),
    (300, CapitalBand.UNDER),
    (200, CapitalBand.SIGNIFICANT),
)


@dataclass(frozen=True)
class LeverageReport:
    ratio: int  # 1e-4 units
    band: CapitalBand


@dataclass(frozen=True)
class SlrReport:
    slr: int             # micro
    lower_bound: int     # micro
    headroom_assets: Amount


@dataclass(frozen=True)
class LiquidityReport:
    dla_frac: int    # micro
    wla_frac: int    # micro
    wam_days: int    # micro-days
    wal_days: int    # micro-days


def classify_fdicia(ratio: int) -> CapitalBand:
    """Band for a leverage ratio given in 1e-4 units (400 == 4%)."""
    for floor, band in _BAND_FLOORS:
        if ratio >= floor:
            return band
    return CapitalBand.CRITICAL


def leverage_ratio(assets: Amount, coins_outstanding: Amount) -> LeverageReport:
    """(assets - coins) / assets at 1e-4 precision, with its band."""
    if assets <= 0:
        raise NonPositiveAssets(f"assets must be positive, got {assets}")
    ratio = mul_div(assets - coins_outstanding, RATIO_SCALE, assets)
    return LeverageReport(ratio=ratio, band=classify_fdicia(ratio))


def slr(capital: Amount, assets: Amount, exposures: Amount, gsib: bool,
        bound_override: int | None = None) -> SlrReport:
    """Supplementary leverage ratio and the asset headroom to its bound.

    headroom is the largest extra unweighted asset amount that keeps
    capital / (assets + exposures + headroom) at or above the bound,
    floored at zero.
    """
    denom = assets + exposures
    if denom <= 0:
        raise NonPositiveDenominator(f"assets + exposures must be positive, got {denom}")
    bound = bound_override if bound_override is not None else (
        SLR_GSIB_BOUND if gsib else SLR_BASE_BOUND)
    ratio = mul_div(capital, MICRO, denom)
    headroom = max(0, capital * MICRO // bound - denom)
    return SlrReport(slr=ratio, lower_bound=bound, headroom_assets=headroom)


def portfolio_holdings(portfolio: PortfolioState, today: int) -> list[tuple[Amount, int, int]]:
    """(value, days to maturity, days to final life) per holding.

    Deposits are demand money (one day); overnight repo counts as
    daily-liquid; bills run to their maturity date.
    """
    holdings: list[tuple[Amount, int, int]] = []
    if portfolio.deposits > 0:
        holdings.append((portfolio.deposits, 1, 1))
    for pos in portfolio.repos:
        days = max(1, pos.second_leg_day - today)
        holdings.append((pos.principal, days, days))
    for bill in portfolio.bills:
        days = max(1, bill.maturity_day - today)
        holdings.append((bill.value(), days, days))
    return holdings


def liquidity_metrics(portfolio: PortfolioState, today: int) -> LiquidityReport:
    holdings = portfolio_holdings(portfolio, today)
    total = sum(v for v, _, _ in holdings)
    if total <= 0:
        return LiquidityReport(0, 0, 0, 0)
    daily = sum(v for v, m, _ in holdings if m <= 1)
    weekly = sum(v for v, m, _ in holdings if m <= 5)
    wam = mul_div(sum(v * m for v, m, _ in holdings), MICRO, total)
    wal = mul_div(sum(v * life for v, _, life in holdings), MICRO, total)
    return LiquidityReport(
        dla_frac=frac_of(daily, total),
        wla_frac=frac_of(weekly, total),
        wam_days=wam,
        wal_days=wal,
    )


ANALYTICS_FIELDS = ("day", "agent", "ratio", "band", "slr", "headroom",
                    "dla", "wla", "wam", "wal")


def analytics_row(day: int, agent: str,
                  leverage: LeverageReport | None = None,
                  slr_report: SlrReport | None = None,
                  liquidity: LiquidityReport | None = None) -> dict:
    """One report row per agent per day; inapplicable fields stay empty."""
    return {
        "day": day,
        "agent": agent,
        "ratio": leverage.ratio if leverage else "",
        "band": leverage.band.value if leverage else "",
        "slr": slr_report.slr if slr_report else "",
        "headroom": slr_report.headroom_assets if slr_report else "",
        "dla": liquidity.dla_frac if liquidity else "",
        "wla": liquidity.wla_frac if liquidity else "",
        "wam": liquidity.wam_days if liquidity else "",
        "wal": liquidity.wal_days if liquidity else "",
    }
