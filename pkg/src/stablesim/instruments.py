"""Backing-asset instruments: Treasury bills, collateralized repo
lending with haircuts, and the one-period progression of a backing
portfolio (interest on securities and deposits plus capital gain or
loss on the securities book).

Repo follows secured-financing bookkeeping: the borrower keeps pledged
Treasuries on its balance sheet and the lender books a collateralized
loan. Collateral is tracked as encumbered face per duration class and
is re-valued whenever class prices move. Default recovery is
principal-protected up to the haircut; beyond it the lender's loss per
unit of principal is the excess decline scaled down by the
collateral-to-principal ratio: loss = principal * (decline - haircut)
/ (1 + haircut), rounded half to even once.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .ledger import AgentId, DurationClass, LedgerWorld, Posting
from .money import MICRO, Amount, ceil_div, mul_div, mul_frac

GENIUS_MAX_BILL_DAYS = 93


class InstrumentError(Exception):
    pass


class InsufficientCollateral(InstrumentError):
    pass


class InsufficientCash(InstrumentError):
    pass


class WrongDay(InstrumentError):
    pass


class IneligibleBill(InstrumentError):
    pass


@dataclass(frozen=True)
class TreasuryBill:
    face: Amount
    maturity_day: int
    market_price: int = MICRO  # fraction of face, micro units
    on_the_run: bool = True

    def __post_init__(self):
        if self.market_price <= 0:
            raise InstrumentError("bill price must be positive")

    def value(self) -> Amount:
        return mul_frac(self.face, self.market_price)


def check_genius_eligible(bill: TreasuryBill, purchase_day: int) -> None:
    """Compliant issuers may only buy bills maturing within 93 days."""
    if bill.maturity_day - purchase_day > GENIUS_MAX_BILL_DAYS:
        raise IneligibleBill(
            f"bill matures in {bill.maturity_day - purchase_day} days, "
            f"limit is {GENIUS_MAX_BILL_DAYS}")


@dataclass
class RepoPosition:
    repo_id: int
    lender: AgentId
    borrower: AgentId
    principal: Amount
    haircut: int              # micro fraction of principal
    rate: int                 # simple interest, micro per day
    open_day: int
    second_leg_day: int
    collateral: dict = field(default_factory=dict)  # DurationClass -> face

    @property
    def term_days(self) -> int:
        return self.second_leg_day - self.open_day

    @property
    def overnight(self) -> bool:
        return self.term_days == 1

    def interest(self) -> Amount:
        return mul_frac(self.principal, self.rate * self.term_days)

    def collateral_value(self, world: LedgerWorld) -> Amount:
        return sum(mul_frac(face, world.price(d)) for d, face in self.collateral.items())


@dataclass(frozen=True)
class SettlementOutcome:
    performed: bool
    loss: Amount
    cash_to_lender: Amount
    collateral_released: bool


def default_loss(principal: Amount, haircut: int, decline: int) -> Amount:
    """Lender loss on a defaulted repo liquidation.

    Zero for any decline up to the haircut; beyond it the shortfall is
    principal * (decline - haircut) / (1 + haircut).
    """
    if decline <= haircut:
        return 0
    return mul_div(principal, decline - haircut, MICRO + haircut)


class RepoRegistry:
    """Open repo positions plus per-agent collateral encumbrance."""

    def __init__(self):
        self._next_id = 0
        self.positions: dict[int, RepoPosition] = {}
        self.encumbered: dict[tuple[str, DurationClass], int] = {}

    def open_positions(self) -> list[RepoPosition]:
        return [self.positions[i] for i in sorted(self.positions)]

    def by_lender(self, lender: AgentId) -> list[RepoPosition]:
        return [p for p in self.open_positions() if p.lender == lender]

    def encumbered_face(self, agent: AgentId, duration: DurationClass) -> int:
        return self.encumbered.get((agent.key, duration), 0)

    def free_face(self, world: LedgerWorld, agent: AgentId, duration: DurationClass) -> int:
        return world.face_of(agent, duration) - self.encumbered_face(agent, duration)

    def free_value(self, world: LedgerWorld, agent: AgentId) -> Amount:
        return sum(mul_frac(self.free_face(world, agent, d), world.price(d))
                   for d in DurationClass)

    def _encumber(self, agent: AgentId, duration: DurationClass, face: int) -> None:
        key = (agent.key, duration)
        self.encumbered[key] = self.encumbered.get(key, 0) + face
        if self.encumbered[key] == 0:
            del self.encumbered[key]

    def total_principal(self, lender: AgentId) -> Amount:
        return sum(p.principal for p in self.by_lender(lender))


def required_collateral(principal: Amount, haircut: int) -> Amount:
    """Market value the borrower must pledge: principal * (1 + haircut)."""
    return ceil_div(principal * (MICRO + haircut), MICRO)


def open_reverse_repo(world: LedgerWorld, registry: RepoRegistry,
                      lender: AgentId, borrower: AgentId, principal: Amount,
                      haircut: int, rate: int, term: int = 1,
                      collateral_mix: dict | None = None) -> RepoPosition:
    """First leg: cash moves lender -> borrower against pledged Treasuries.

    collateral_mix maps duration class to a micro fraction of the
    required value; the borrower's pledged collateral defaults to 75%
    long off-the-run, 25% bills.
    """
    if term < 1:
        raise InstrumentError("term must be at least one day")
    faces = _size_collateral(world, registry, borrower, principal, haircut, collateral_mix)
    lender_deposits = world.sheet(lender).asset(f"deposit@{world.bank_of(lender).key}")
    if lender_deposits < principal:
        raise InsufficientCash(f"{lender} holds {lender_deposits}, needs {principal}")

    from .ledger import Instrument, InstrumentKind

    world.post_transfer(lender, borrower, Instrument(InstrumentKind.DEPOSIT), principal)
    world.post([
        Posting(lender, "A", f"repo@{borrower.key}", principal),
        Posting(borrower, "L", f"repo@{lender.key}", principal),
    ], event="repo_open", lender=lender.key, borrower=borrower.key,
        principal=principal, haircut=haircut,
        collateral={d.value: f for d, f in sorted(faces.items(), key=lambda kv: kv[0].value)})
    pos = RepoPosition(
        repo_id=registry._next_id, lender=lender, borrower=borrower,
        principal=principal, haircut=haircut, rate=rate,
        open_day=world.day, second_leg_day=world.day + term,
        collateral={d: f for d, f in faces.items() if f},
    )
    registry._next_id += 1
    registry.positions[pos.repo_id] = pos
    for duration, face in pos.collateral.items():
        registry._encumber(borrower, duration, face)
    return pos


def close_or_default_repo(world: LedgerWorld, registry: RepoRegistry,
                          pos: RepoPosition, counterparty_performs: bool,
                          market_decline: int = 0) -> SettlementOutcome:
    """Second leg: repayment with interest, or seizure and liquidation.

    On default the lender takes the pledged collateral and recovers its
    first-leg cash up to the haircut cushion; the reported loss follows
    default_loss and the collateral moves to the lender's book at the
    seized market value.
    """
    if world.day != pos.second_leg_day:
        raise WrongDay(f"second leg is day {pos.second_leg_day}, today is {world.day}")
    if pos.repo_id not in registry.positions:
        raise InstrumentError("position already settled")

    from .ledger import Instrument, InstrumentKind

    if counterparty_performs:
        owed = pos.principal + pos.interest()
        world.post_transfer(pos.borrower, pos.lender, Instrument(InstrumentKind.DEPOSIT), owed)
        world.post([
            Posting(pos.lender, "A", f"repo@{pos.borrower.key}", -pos.principal),
            Posting(pos.borrower, "L", f"repo@{pos.lender.key}", -pos.principal),
        ], event="repo_close", lender=pos.lender.key, borrower=pos.borrower.key,
            principal=pos.principal, interest=owed - pos.principal)
        self_release(registry, pos)
        del registry.positions[pos.repo_id]
        return SettlementOutcome(True, 0, owed, True)

    loss = default_loss(pos.principal, pos.haircut, market_decline)
    world.post([
        Posting(pos.lender, "A", f"repo@{pos.borrower.key}", -pos.principal),
        Posting(pos.borrower, "L", f"repo@{pos.lender.key}", -pos.principal),
    ], event="repo_default", lender=pos.lender.key, borrower=pos.borrower.key,
        principal=pos.principal, decline=market_decline, loss=loss)
    self_release(registry, pos)
    for duration in sorted(pos.collateral, key=lambda d: d.value):
        world.transfer_tbill(pos.borrower, pos.lender, duration, face=pos.collateral[duration])
    del registry.positions[pos.repo_id]
    return SettlementOutcome(False, loss, pos.principal - loss, False)


def self_release(registry: RepoRegistry, pos: RepoPosition) -> None:
    for duration, face in pos.collateral.items():
        registry._encumber(pos.borrower, duration, -face)


def roll_repo(world: LedgerWorld, registry: RepoRegistry, pos: RepoPosition,
              new_rate: int) -> RepoPosition:
    """Close the maturing position at par and reopen overnight.

    Only interest changes hands: the closing and opening principal legs
    between the same parties net to zero, so the ledger sees a single
    interest payment while the position record is replaced with
    re-marked collateral. On any failure the old position and its
    encumbrance are left intact.
    """
    if world.day != pos.second_leg_day:
        raise WrongDay(f"second leg is day {pos.second_leg_day}, today is {world.day}")
    if pos.repo_id not in registry.positions:
        raise InstrumentError("position already settled")
    mix = {}
    total = pos.collateral_value(world)
    if total > 0:
        for duration, face in pos.collateral.items():
            mix[duration] = mul_div(mul_frac(face, world.price(duration)), MICRO, total)
    self_release(registry, pos)
    try:
        new_collateral = _size_collateral(world, registry, pos.borrower,
                                          pos.principal, pos.haircut, mix or None)
        from .ledger import Instrument, InstrumentKind

        interest = pos.interest()
        if interest:
            world.post_transfer(pos.borrower, pos.lender,
                                Instrument(InstrumentKind.DEPOSIT), interest)
    except Exception:
        for duration, face in pos.collateral.items():
            registry._encumber(pos.borrower, duration, face)
        raise
    del registry.positions[pos.repo_id]
    world.emit("repo_roll", lender=pos.lender.key, borrower=pos.borrower.key,
               principal=pos.principal, rate=new_rate, interest=interest)
    new = RepoPosition(
        repo_id=registry._next_id, lender=pos.lender, borrower=pos.borrower,
        principal=pos.principal, haircut=pos.haircut, rate=new_rate,
        open_day=world.day, second_leg_day=world.day + 1,
        collateral=new_collateral,
    )
    registry._next_id += 1
    registry.positions[new.repo_id] = new
    for duration, face in new.collateral.items():
        registry._encumber(pos.borrower, duration, face)
    return new


def _size_collateral(world: LedgerWorld, registry: RepoRegistry, borrower: AgentId,
                     principal: Amount, haircut: int, mix: dict | None) -> dict:
    mix = mix or {DurationClass.LONG: 750_000, DurationClass.BILL: 250_000}
    need = required_collateral(principal, haircut)
    faces: dict[DurationClass, int] = {}
    pledged = 0
    classes = sorted(mix, key=lambda d: d.value)
    for i, duration in enumerate(classes):
        target = need - pledged if i == len(classes) - 1 else mul_frac(need, mix[duration])
        price = world.price(duration)
        face = min(ceil_div(target * MICRO, price),
                   registry.free_face(world, borrower, duration))
        faces[duration] = face
        pledged += mul_frac(face, price)
    if pledged < need:
        raise InsufficientCollateral(f"{borrower} pledges {pledged}, needs {need}")
    return {d: f for d, f in faces.items() if f}


def mark_treasuries(world: LedgerWorld, registry: RepoRegistry, price_tick: int,
                    duration: DurationClass | None = None) -> list[dict]:
    """Apply a multiplicative price tick and re-margin term repos.

    Returns the margin-call events emitted (one per under-margined term
    position). Daily re-margining with a halved haircut threshold
    stands in for intraday margin cycles the day-grain clock cannot
    express.
    """
    classes = [duration] if duration is not None else list(DurationClass)
    for d in sorted(classes, key=lambda c: c.value):
        new_price = mul_frac(world.price(d), MICRO + price_tick)
        world.remark_tbills(d, new_price)
    if price_tick != 0:
        world.emit("mark", tick=price_tick,
                   classes=[d.value for d in sorted(classes, key=lambda c: c.value)])
    calls = []
    for pos in registry.open_positions():
        if pos.overnight:
            continue
        threshold = mul_frac(pos.principal, MICRO + pos.haircut // 2)
        value = pos.collateral_value(world)
        if value < threshold:
            shortfall = threshold - value
            event = {"repo_id": pos.repo_id, "borrower": pos.borrower.key,
                     "collateral_value": value, "threshold": threshold,
                     "shortfall": shortfall}
            world.emit("margin_call", **event)
            calls.append(event)
            _top_up_collateral(world, registry, pos, shortfall)
    return calls


def _top_up_collateral(world: LedgerWorld, registry: RepoRegistry,
                       pos: RepoPosition, shortfall: Amount) -> None:
    for duration in sorted(DurationClass, key=lambda d: d.value):
        if shortfall <= 0:
            return
        free = registry.free_face(world, pos.borrower, duration)
        if free <= 0:
            continue
        price = world.price(duration)
        face = min(free, ceil_div(shortfall * MICRO, price))
        pos.collateral[duration] = pos.collateral.get(duration, 0) + face
        registry._encumber(pos.borrower, duration, face)
        shortfall -= mul_frac(face, price)


@dataclass
class PortfolioState:
    """Issuer backing book: securities at (face, price), deposits, rates.

    treasuries and total are derived so the one-period progression can
    be checked exactly: value(t+1) - value(t) decomposes into interest
    on securities, capital gain, interest on deposits, and net deposit
    flow.
    """

    treasury_face: Amount
    treasury_price: int
    deposits: Amount
    rate_treasury: int      # micro per period
    rate_deposit: int       # micro per period
    repo_principal: Amount = 0
    bills: list = field(default_factory=list)
    repos: list = field(default_factory=list)

    @property
    def treasuries(self) -> Amount:
        return mul_frac(self.treasury_face, self.treasury_price)

    @property
    def total(self) -> Amount:
        return self.treasuries + self.deposits + self.repo_principal


def step_portfolio(p: PortfolioState, price_delta: int, deposit_flow: Amount) -> PortfolioState:
    """Advance the portfolio one period.

    Rates are the ones fixed at the start of the period. price_delta is
    an absolute move of the price level in micro units (a fraction of
    face), so sequential moves compose additively; interest accrues
    into deposits.
    """
    new_price = p.treasury_price + price_delta
    if new_price <= 0:
        raise InstrumentError("price delta drives the securities price non-positive")
    interest_t = mul_frac(p.treasuries, p.rate_treasury)
    interest_d = mul_frac(p.deposits, p.rate_deposit)
    return PortfolioState(
        treasury_face=p.treasury_face,
        treasury_price=new_price,
        deposits=p.deposits + deposit_flow + interest_t + interest_d,
        rate_treasury=p.rate_treasury,
        rate_deposit=p.rate_deposit,
        repo_principal=p.repo_principal,
        bills=list(p.bills),
        repos=list(p.repos),
    )
