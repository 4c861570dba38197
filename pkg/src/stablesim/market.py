"""Dealer-intermediated secondary Treasury market.

Sales route through a dealer chain (two dealers by default). Each
cleared dollar is reserved against the absorbing dealer's recorded
assets at trade date and settles T+1: the dealers keep a retention
slice on their books, the remainder passes through to ultimate buyers,
and buyers pay sellers from deposit accounts so aggregate bank deposits
are conserved. Daily capacity per dealer is the tightest of three
limits: supplementary-leverage-ratio headroom, the reserves the dealer
can access for settlement, and what its own cash can fund of the
retention slice. The standing repo facility lifts the reserve limit by
letting the dealer borrow reserves against Treasuries, but every draw
grows recorded assets, so leverage headroom still caps the fill at
(headroom + reserve_access) / 2 once reserves run short.

Volume accounting decomposes each submitted sale into seller volume,
dealer retention, inter-dealer volume and buyer volume; gross volume is
their chained sum. Price impact is linear in the flow that exceeds
capacity, capped at a maximum dislocation, with long off-the-run paper
at least as impacted as bills; under a flight-to-safety flag bill
prices never fall and may rise.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import analytics
from .instruments import RepoRegistry, mark_treasuries
from .ledger import AgentId, DurationClass, FED, LedgerWorld, Posting, reserves_key
from .money import MICRO, Amount, mul_div, mul_frac


class MarketError(Exception):
    pass


@dataclass
class DealerChain:
    dealers: list
    retention_frac: int = 335_648  # micro; dealers keep ~one third of seller flow

    def __post_init__(self):
        if len(self.dealers) < 1:
            raise MarketError("chain needs at least one dealer")
        if not (0 <= self.retention_frac < MICRO):
            raise MarketError("retention fraction must lie in [0, 1)")


@dataclass(frozen=True)
class VolumeDecomposition:
    seller: Amount
    retention: Amount
    interdealer: Amount
    buyer: Amount
    gross: Amount


def decompose(seller: Amount, retention: Amount) -> VolumeDecomposition:
    """Chain identity: interdealer = buyer = seller - retention."""
    if retention > seller:
        raise MarketError("retention cannot exceed seller volume")
    passed = seller - retention
    return VolumeDecomposition(
        seller=seller, retention=retention,
        interdealer=passed, buyer=passed,
        gross=seller + passed + passed,
    )


@dataclass
class MarketParams:
    depth: Amount
    impact_coeff_long: int = 15_000     # micro decline at excess == depth
    impact_coeff_bill: int = 5_000
    max_dislocation: int = 50_000        # 5%
    retention_frac: int = 335_648
    flight_to_safety: bool = False
    bill_safety_lift: int = 0            # micro rise at excess == depth
    replacement_frac: int = 0            # micro share of a funding gap re-financed
    offload_frac: int = 250_000          # micro share of retained inventory sold on per day
    eslr_capacity_add: Amount = 0
    eslr_reform: bool = False
    srf_enabled: bool = False
    slr_bound_override: int | None = None

    def __post_init__(self):
        if self.impact_coeff_long < self.impact_coeff_bill:
            raise MarketError("long-duration impact must be at least bill impact")
        if self.depth <= 0:
            raise MarketError("market depth must be positive")


@dataclass
class DealerBook:
    """Recorded-assets state used for the leverage constraint.

    base_assets is the dealer's balance sheet outside the simulation;
    on top of it sit inventory growth above the opening position,
    reserves drawn from the standing facility, and same-day clearing
    reservations that settle tomorrow.
    """

    agent: AgentId
    capital: Amount
    base_assets: Amount
    exposures: Amount = 0
    gsib: bool = True
    reserve_access: Amount = 0           # per-day settlement reserves
    inventory_baseline: Amount = 0       # opening treasuries value
    reserved_today: Amount = 0
    ra_used_today: Amount = 0
    srf_outstanding: Amount = 0

    def recorded_assets(self, world: LedgerWorld) -> Amount:
        inventory = world.tbill_value(self.agent)
        growth = max(0, inventory - self.inventory_baseline)
        reserves = world.sheet(self.agent).asset(reserves_key())
        return self.base_assets + growth + reserves + self.reserved_today

    def slr_report(self, world: LedgerWorld, bound_override: int | None = None) -> analytics.SlrReport:
        return analytics.slr(self.capital, self.recorded_assets(world),
                             self.exposures, self.gsib, bound_override)

    def headroom(self, world: LedgerWorld, bound_override: int | None = None) -> Amount:
        return self.slr_report(world, bound_override).headroom_assets


def draw_srf(world: LedgerWorld, book: DealerBook, amount: Amount) -> None:
    """Borrow reserves from the central bank against Treasuries.

    The drawn reserves land on the dealer's book (recorded assets grow
    by the draw) with a matching repo liability to the central bank;
    nothing nets, so leverage headroom falls one-for-one.
    """
    dealer = book.agent
    world.post([
        Posting(FED, "A", f"srf@{dealer.key}", amount),
        Posting(dealer, "L", f"srf@{FED.key}", amount),
        Posting(dealer, "A", reserves_key(), amount),
        Posting(FED, "L", f"reserves@{dealer.key}", amount),
    ], event="srf_draw", dealer=dealer.key, amount=amount)
    book.srf_outstanding += amount


@dataclass
class SaleOrder:
    order_id: int
    seller: AgentId
    duration: DurationClass
    remaining: Amount
    submitted_day: int
    purpose: str = "sale"


@dataclass(frozen=True)
class FillReport:
    order_id: int
    seller: AgentId
    duration: DurationClass
    requested: Amount
    filled: Amount
    unfilled: Amount
    price: int
    decomposition: VolumeDecomposition | None


@dataclass
class PendingSettlement:
    settle_day: int
    seller: AgentId
    dealer: AgentId
    duration: DurationClass
    value: Amount  # trade value at clearing; re-priced at settlement


class Market:
    """Per-scenario market state: order queue, dealer books, prices."""

    def __init__(self, params: MarketParams, chain: DealerChain,
                 books: dict, buyer: AgentId):
        self.params = params
        self.chain = chain
        self.books = books  # dealer key -> DealerBook
        self.buyer = buyer
        self._next_order = 0
        self.carryover: list[SaleOrder] = []
        self.pending: list[PendingSettlement] = []
        self.day_excess: dict[DurationClass, Amount] = {d: 0 for d in DurationClass}
        self.day_fills: dict[DurationClass, Amount] = {d: 0 for d in DurationClass}
        self.day_submitted: dict[DurationClass, Amount] = {d: 0 for d in DurationClass}
        self.day_srf_draws: Amount = 0
        self.gross_volume: Amount = 0
        self.seller_volume: Amount = 0

    # -- capacity ---------------------------------------------------------

    def _dealer_available(self, world: LedgerWorld, book: DealerBook) -> Amount:
        bound = self.params.slr_bound_override
        headroom = book.headroom(world, bound)
        if self.params.eslr_reform and self.params.eslr_capacity_add > 0:
            share = self.params.eslr_capacity_add // len(self.books)
            headroom += share
        ra_left = max(0, book.reserve_access - book.ra_used_today)
        if self.params.srf_enabled:
            cap = headroom if ra_left >= headroom else (headroom + ra_left) // 2
        else:
            cap = min(headroom, ra_left)
        if self.params.retention_frac > 0:
            bank = world.bank_of(book.agent)
            deposits = world.sheet(book.agent).asset(f"deposit@{bank.key}")
            affordable = deposits * MICRO // self.params.retention_frac
            cap = min(cap, affordable)
        return max(0, cap)

    def capacity(self, world: LedgerWorld) -> Amount:
        """Fill volume the dealer sector can absorb right now."""
        return sum(self._dealer_available(world, self.books[k])
                   for k in sorted(self.books))

    # -- clearing ------------------------------------------------------------

    def submit_sale(self, world: LedgerWorld, seller: AgentId, amount: Amount,
                    duration: DurationClass, purpose: str = "sale",
                    first_submission: bool = True) -> FillReport:
        """Clear one order against today's remaining dealer capacity.

        The fill is allocated across dealers pro rata by available
        capacity (largest remainder, ties by dealer id). The unfilled
        remainder is queued and resubmitted ahead of new orders on the
        next clearing day. Volume decomposition is reported on first
        submission only, so resubmitted remainders are not double
        counted in gross volume.
        """
        order = SaleOrder(self._next_order, seller, duration, amount,
                          world.day, purpose)
        self._next_order += 1
        avail = {}
        for key in sorted(self.books):
            avail[key] = self._dealer_available(world, self.books[key])
        total_avail = sum(avail.values())
        fill = min(amount, total_avail)
        allocations = _prorate(fill, avail)
        for key, alloc in allocations.items():
            if alloc == 0:
                continue
            book = self.books[key]
            ra_part = min(alloc, max(0, book.reserve_access - book.ra_used_today))
            draw = alloc - ra_part
            if draw > 0:
                if not self.params.srf_enabled:
                    raise MarketError("allocation beyond reserve access without SRF")
                draw_srf(world, book, draw)
                self.day_srf_draws += draw
            book.ra_used_today += ra_part
            book.reserved_today += alloc
            self.pending.append(PendingSettlement(
                settle_day=world.day + 1, seller=seller, dealer=book.agent,
                duration=duration, value=alloc))
        unfilled = amount - fill
        decomposition = None
        if first_submission:
            retention = mul_frac(amount, self.params.retention_frac)
            decomposition = decompose(amount, retention)
            self.gross_volume += decomposition.gross
            self.seller_volume += amount
            self.day_submitted[duration] += amount
        if unfilled > 0:
            order.remaining = unfilled
            self.carryover.append(order)
        self.day_excess[duration] += unfilled
        self.day_fills[duration] += fill
        world.emit("sale_cleared", order_id=order.order_id, seller=seller.key,
                   duration=duration.value, requested=amount, filled=fill,
                   unfilled=unfilled, purpose=purpose,
                   first_submission=first_submission)
        return FillReport(order.order_id, seller, duration, amount, fill,
                          unfilled, world.price(duration), decomposition)

    def resubmit_carryover(self, world: LedgerWorld) -> list[FillReport]:
        queued, self.carryover = self.carryover, []
        reports = []
        for order in queued:
            reports.append(self.submit_sale(
                world, order.seller, order.remaining, order.duration,
                purpose=order.purpose, first_submission=False))
        return reports

    # -- funding gaps -----------------------------------------------------------

    def funding_gap_liquidation(self, world: LedgerWorld, gap: Amount,
                                borrower: AgentId,
                                collateral_mix: dict | None = None) -> list[FillReport]:
        """A declined repo roll forces the borrower to refinance or sell.

        The replacement fraction finds funding off-market; the residual
        is sold with the collateral's duration composition, propagating
        stress to the long end.
        """
        replaced = mul_frac(gap, self.params.replacement_frac)
        residual = gap - replaced
        world.emit("funding_gap", borrower=borrower.key, gap=gap,
                   replaced=replaced, residual=residual)
        if residual <= 0:
            return []
        mix = collateral_mix or {DurationClass.LONG: 750_000, DurationClass.BILL: 250_000}
        reports = []
        classes = sorted(mix, key=lambda d: d.value)
        allotted = 0
        for i, duration in enumerate(classes):
            if i == len(classes) - 1:
                part = residual - allotted
            else:
                part = mul_frac(residual, mix[duration])
            allotted += part
            if part > 0:
                reports.append(self.submit_sale(world, borrower, part, duration,
                                                purpose="funding_gap"))
        return reports

    # -- settlement, impact, offload -------------------------------------------

    def settle_due(self, world: LedgerWorld, registry: RepoRegistry) -> dict:
        """Run T+1 settlement for yesterday's fills.

        The retention slice lands on the dealer's book against its own
        deposits; the pass-through goes straight to the ultimate buyer,
        who pays the seller. Returns deposit proceeds per seller key.
        """
        due = [p for p in self.pending if p.settle_day <= world.day]
        self.pending = [p for p in self.pending if p.settle_day > world.day]
        proceeds: dict[str, list] = {}
        for p in due:
            book = self.books[p.dealer.key]
            book.reserved_today = max(0, book.reserved_today - p.value)
            price = world.price(p.duration)
            face = mul_div(p.value, MICRO, price)
            face = min(face, registry.free_face(world, p.seller, p.duration))
            got = 0
            if face > 0:
                retention_face = mul_frac(face, self.params.retention_frac)
                got += self._deliver(world, p.seller, p.dealer, p.duration,
                                     retention_face, price)
                got += self._deliver(world, p.seller, self.buyer, p.duration,
                                     face - retention_face, price)
            entry = proceeds.setdefault(p.seller.key, [0, 0])
            entry[0] += got
            entry[1] += p.value
            if got:
                world.emit("sale_settled", seller=p.seller.key, dealer=p.dealer.key,
                           duration=p.duration.value, proceeds=got)
        return {k: (v[0], v[1]) for k, v in proceeds.items()}

    def _deliver(self, world: LedgerWorld, seller: AgentId, payer: AgentId,
                 duration: DurationClass, face: Amount, price: int) -> Amount:
        """Delivery versus payment, scaled down if the payer is short of cash."""
        if face <= 0:
            return 0
        value = mul_frac(face, price)
        paid = self._pay_capped(world, payer, seller, value)
        if paid <= 0:
            return 0
        if paid < value:
            face = mul_div(paid, MICRO, price)
            if face <= 0:
                return paid
        world.transfer_tbill(seller, payer, duration, face=face)
        return paid

    @staticmethod
    def _pay_capped(world: LedgerWorld, payer: AgentId, payee: AgentId,
                    value: Amount) -> Amount:
        from .ledger import Instrument, InstrumentKind

        bank = world.bank_of(payer)
        have = world.sheet(payer).asset(f"deposit@{bank.key}")
        pay = min(value, have)
        if pay > 0:
            world.post_transfer(payer, payee, Instrument(InstrumentKind.DEPOSIT), pay)
        return pay

    def price_impact(self, excess_flow: Amount, duration: DurationClass) -> int:
        """Fraction decline (micro) for flow beyond capacity.

        Negative values mean a price rise (bills under flight to
        safety).
        """
        if excess_flow <= 0:
            return 0
        if duration is DurationClass.BILL and self.params.flight_to_safety:
            return -mul_div(excess_flow, self.params.bill_safety_lift, self.params.depth)
        coeff = (self.params.impact_coeff_long if duration is DurationClass.LONG
                 else self.params.impact_coeff_bill)
        decline = mul_div(excess_flow, coeff, self.params.depth)
        return min(decline, self.params.max_dislocation)

    def apply_day_impact(self, world: LedgerWorld, registry: RepoRegistry) -> dict:
        """Mark both duration classes off today's excess flow."""
        ticks = {}
        for duration in sorted(DurationClass, key=lambda d: d.value):
            decline = self.price_impact(self.day_excess[duration], duration)
            ticks[duration] = -decline
            if decline != 0:
                mark_treasuries(world, registry, -decline, duration)
        return ticks

    def offload_inventory(self, world: LedgerWorld, registry: RepoRegistry) -> Amount:
        """Dealers distribute retained inventory on to ultimate buyers."""
        frac = self.params.offload_frac
        if frac <= 0:
            return 0
        sold = 0
        for key in sorted(self.books):
            book = self.books[key]
            growth = world.tbill_value(book.agent) - book.inventory_baseline
            if growth <= 0:
                continue
            target = mul_frac(growth, frac)
            for duration in sorted(DurationClass, key=lambda d: d.value):
                if target <= 0:
                    break
                free_face = registry.free_face(world, book.agent, duration)
                if free_face <= 0:
                    continue
                price = world.price(duration)
                face = min(free_face, mul_div(target, MICRO, price))
                if face <= 0:
                    continue
                value = mul_frac(face, price)
                paid = self._pay_capped(world, self.buyer, book.agent, value)
                if paid <= 0:
                    continue
                world.transfer_tbill(book.agent, self.buyer, duration, face=face)
                sold += value
                target -= value
        return sold

    def begin_day(self) -> None:
        for key in sorted(self.books):
            self.books[key].ra_used_today = 0
        self.day_excess = {d: 0 for d in DurationClass}
        self.day_fills = {d: 0 for d in DurationClass}
        self.day_submitted = {d: 0 for d in DurationClass}
        self.day_srf_draws = 0


def _prorate(total: Amount, shares: dict) -> dict:
    """Integer pro-rata split by share weight, largest remainder first."""
    weight = sum(shares.values())
    out = {k: 0 for k in shares}
    if total <= 0 or weight <= 0:
        return out
    remainders = []
    assigned = 0
    for key in sorted(shares):
        exact = total * shares[key]
        base = exact // weight
        base = min(base, shares[key])
        out[key] = base
        assigned += base
        remainders.append((-(exact % weight), key))
    leftover = total - assigned
    for _, key in sorted(remainders):
        if leftover <= 0:
            break
        room = shares[key] - out[key]
        take = min(room, leftover)
        out[key] += take
        leftover -= take
    return out
