"""Redemption, minting and par-maintenance state machines.

A redemption request escrows nothing up front: the holder keeps the
coins until the paying leg runs, then coins burn and deposits move in
one atomic batch, so a request that stalls in the queue leaves balance
sheets untouched. Funding is committed at planning time from three
sources in order of cost: the issuer's own deposits, outright bill
sales (T+1 through the dealer market), and declining to roll maturing
repo (same-day cash from the borrower, who is left with a funding gap).
Sale and non-rollover cash is pooled per issuer and drawn first-in
first-out; a request backed purely by deposits is therefore never
blocked by market conditions.

Par policy: a rigorously fixed regime stands ready to buy below par and
mint above; a corridor acts only outside its band; best effort never
intervenes in the open market. Intervention purchases are ordinary
redemptions at par initiated by the issuer against the largest holders.

The standing-repo-facility leg lets a dealer borrow reserves against
its Treasuries, growing its recorded assets by the draw, so leverage
headroom, not the facility, remains the binding constraint.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .instruments import (InstrumentError, RepoRegistry, close_or_default_repo,
                          open_reverse_repo, roll_repo)
from .ledger import (AgentId, DurationClass, Instrument, InstrumentKind,
                     InsufficientPosition, LedgerWorld, coin_key, deposit_key)
from .market import DealerBook, draw_srf
from .money import MICRO, PAR, Amount, mul_frac


class SettlementError(Exception):
    pass


class IneligibleRedeemer(SettlementError):
    pass


class MintDeclined(SettlementError):
    pass


class SlrBound(SettlementError):
    pass


class Disabled(SettlementError):
    pass


@dataclass(frozen=True)
class LegFailed(SettlementError):
    leg: str
    cause: str

    def __str__(self) -> str:
        return f"leg {self.leg} failed: {self.cause}"


class AccessMode(Enum):
    DIRECT = "direct"
    INTERMEDIATED = "intermediated"


class Route(Enum):
    DIRECT = "direct"
    VIA_INTERMEDIARY = "via_intermediary"


class Funding(Enum):
    FROM_DEPOSITS = "from_deposits"
    SELL_TREASURIES = "sell_treasuries"
    REPO_NON_ROLLOVER = "repo_non_rollover"


class ParMode(Enum):
    RIGOROUS_FIXED = "rigorous_fixed"
    CORRIDOR = "corridor"
    BEST_EFFORT = "best_effort"


@dataclass(frozen=True)
class ParPolicy:
    mode: ParMode
    corridor_width: int = 0  # micro

    def __post_init__(self):
        if self.mode is ParMode.CORRIDOR and self.corridor_width <= 0:
            raise SettlementError("corridor width must be positive")


@dataclass(frozen=True)
class RedemptionRequest:
    request_id: int
    holder: AgentId
    issuer: AgentId
    amount: Amount
    submitted_day: int
    route: Route = Route.DIRECT

    def __post_init__(self):
        if self.amount <= 0:
            raise SettlementError("redemption amount must be positive")


class LegAction(Enum):
    USE_DEPOSITS = "use_deposits"
    PLACE_SALE = "place_sale"
    AWAIT_PROCEEDS = "await_proceeds"
    DECLINE_ROLL = "decline_roll"
    PAY_AND_BURN = "pay_and_burn"
    MOVE_DEPOSIT = "move_deposit"
    BUY_BILLS = "buy_bills"
    CREDIT_COINS = "credit_coins"


@dataclass(frozen=True)
class Leg:
    offset: int
    action: LegAction
    amount: Amount


@dataclass(frozen=True)
class SettlementPlan:
    issuer: AgentId
    beneficiary: AgentId
    amount: Amount
    funding: Funding
    legs: tuple
    created_day: int

    @property
    def horizon(self) -> int:
        return max((leg.offset for leg in self.legs), default=0)


@dataclass(frozen=True)
class IssuerAction:
    kind: str       # "buy" or "mint"
    amount: Amount
    pin_target: int  # price the action defends, micro


def intervene(policy: ParPolicy, secondary_price: int, world: LedgerWorld,
              issuer: AgentId) -> list:
    """Open-market actions the par policy requires at this price.

    The supply response is proportional: the issuer offers to retire
    (or create) the deviation's share of coins outstanding, measured
    from par for the fixed regime and from the corridor edge otherwise.
    """
    coins = world.sheet(issuer).liability(coin_key(issuer))
    deviation = PAR - secondary_price
    if policy.mode is ParMode.BEST_EFFORT or coins <= 0:
        return []
    if policy.mode is ParMode.RIGOROUS_FIXED:
        if deviation > 0:
            return [IssuerAction("buy", mul_frac(coins, deviation), PAR)]
        if deviation < 0:
            return [IssuerAction("mint", mul_frac(coins, -deviation), PAR)]
        return []
    width = policy.corridor_width
    if deviation > width:
        return [IssuerAction("buy", mul_frac(coins, deviation - width), PAR - width)]
    if -deviation > width:
        return [IssuerAction("mint", mul_frac(coins, -deviation - width), PAR + width)]
    return []


def srf_leg(dealer: AgentId, amount: Amount, world: LedgerWorld, book: DealerBook,
            enabled: bool, bound_override: int | None = None) -> None:
    """Borrow reserves from the central bank against Treasuries held.

    The draw grows the dealer's recorded assets, so it must fit inside
    current leverage headroom; the facility cannot manufacture
    balance-sheet room.
    """
    if not enabled:
        raise Disabled("standing repo facility is not enabled")
    if world.tbill_value(dealer) < amount:
        raise SettlementError(f"{dealer} holds insufficient Treasuries for the draw")
    headroom = book.headroom(world, bound_override)
    if headroom < amount:
        raise SlrBound(f"draw {amount} exceeds leverage headroom {headroom}")
    draw_srf(world, book, amount)


# ---------------------------------------------------------------------------
# Issuer-side settlement engine
# ---------------------------------------------------------------------------


@dataclass
class OpenRequest:
    request: RedemptionRequest
    plan: SettlementPlan | None = None
    from_deposits: Amount = 0
    from_pool: Amount = 0
    horizon: int = 0
    paid: Amount = 0
    deposits_used: Amount = 0
    pool_used: Amount = 0
    completed_day: int | None = None
    is_intervention: bool = False
    counted_delayed: bool = False

    @property
    def planned(self) -> bool:
        return self.plan is not None

    @property
    def completed(self) -> bool:
        return self.completed_day is not None

    @property
    def remaining(self) -> Amount:
        return self.request.amount - self.paid


@dataclass
class MintOrder:
    buyer: AgentId
    issuer: AgentId
    amount: Amount
    submitted_day: int
    invest_frac: int = 0
    is_intervention: bool = False
    completed_day: int | None = None


@dataclass
class IssuerBook:
    agent: AgentId
    policy: ParPolicy
    access_mode: AccessMode
    eligible: set = field(default_factory=set)
    chain: str = "main"
    mint_invest_frac: int = 0
    operating_cost_per_day: Amount = 0
    genius_compliant: bool = True
    requests: list = field(default_factory=list)
    mints: list = field(default_factory=list)
    # funding trackers
    pool: Amount = 0
    earmarked: Amount = 0
    inflight_orders: Amount = 0
    in_transit: Amount = 0
    nonroll_pending: Amount = 0
    # daily metrics
    day_requested: Amount = 0
    day_completed: Amount = 0
    day_minted: Amount = 0
    day_int_buy_completed: Amount = 0
    day_int_mint_completed: Amount = 0
    pin_target: int = 1_000_000
    total_requested: Amount = 0
    total_completed: Amount = 0
    total_minted: Amount = 0
    delayed_total: Amount = 0
    max_delay_days: int = 0
    insolvency_day: int | None = None


@dataclass(frozen=True)
class SaleInstruction:
    issuer: AgentId
    amount: Amount
    duration: DurationClass


@dataclass(frozen=True)
class GapInstruction:
    borrower: AgentId
    amount: Amount


class SettlementEngine:
    """Drives every issuer's redemption queue one day at a time.

    Owns planning, repo rollovers, the proceeds pool and the payout
    pass; market clearing and price updates stay outside.
    """

    def __init__(self, world: LedgerWorld, registry: RepoRegistry,
                 issuers: dict, treasury_rate: int = 0,
                 repo_roll_rate: int = 0, negative_carry_refusal: bool = True):
        self.world = world
        self.registry = registry
        self.issuers = issuers  # issuer key -> IssuerBook
        self.treasury_rate = treasury_rate
        self.repo_roll_rate = repo_roll_rate
        self.negative_carry_refusal = negative_carry_refusal
        self._next_request = 0

    # -- intake -----------------------------------------------------------

    def begin_day(self) -> None:
        for key in sorted(self.issuers):
            book = self.issuers[key]
            book.day_requested = 0
            book.day_completed = 0
            book.day_minted = 0
            book.day_int_buy_completed = 0
            book.day_int_mint_completed = 0
            book.pin_target = PAR

    def coins_outstanding(self, issuer: AgentId) -> Amount:
        return self.world.sheet(issuer).liability(coin_key(issuer))

    def deposits_of(self, agent: AgentId) -> Amount:
        bank = self.world.bank_of(agent)
        return self.world.sheet(agent).asset(deposit_key(bank))

    def submit_redemption(self, book: IssuerBook, holder: AgentId, amount: Amount,
                          route: Route, is_intervention: bool = False) -> OpenRequest:
        """Queue a redemption request; coins stay with the holder until paid."""
        if (book.access_mode is AccessMode.INTERMEDIATED
                and route is Route.DIRECT
                and not is_intervention
                and holder.key not in book.eligible):
            raise IneligibleRedeemer(
                f"{holder} is not on {book.agent}'s direct-redemption list")
        req = RedemptionRequest(self._next_request, holder, book.agent,
                                amount, self.world.day, route)
        self._next_request += 1
        record = OpenRequest(request=req, is_intervention=is_intervention)
        book.requests.append(record)
        book.day_requested += amount
        book.total_requested += amount
        self.world.emit("redemption_request", request_id=req.request_id,
                        issuer=book.agent.key, holder=holder.key, amount=amount,
                        route=route.value, intervention=is_intervention)
        return record

    def submit_mint(self, book: IssuerBook, buyer: AgentId, amount: Amount,
                    secondary_price: int, is_intervention: bool = False) -> MintOrder:
        plan_mint(buyer, amount, self.world, book, secondary_price,
                  self.treasury_rate, self.negative_carry_refusal)
        order = MintOrder(buyer=buyer, issuer=book.agent, amount=amount,
                          submitted_day=self.world.day,
                          invest_frac=book.mint_invest_frac,
                          is_intervention=is_intervention)
        book.mints.append(order)
        self.world.emit("mint_request", issuer=book.agent.key, buyer=buyer.key,
                        amount=amount, intervention=is_intervention)
        return order

    def execute_plan(self, plan: SettlementPlan) -> tuple:
        """Adopt a prepared plan, commit its funding and run today's legs.

        Returns the queued request record plus the sale instructions its
        PLACE_SALE legs require; the caller routes those to the market.
        A plan whose legs all settle today (deposit- or non-rollover-
        funded) completes inside this call once the cash is present.
        """
        book = self.issuers[plan.issuer.key]
        req = RedemptionRequest(self._next_request, plan.beneficiary, plan.issuer,
                                plan.amount, self.world.day)
        self._next_request += 1
        record = OpenRequest(request=req, plan=plan, horizon=plan.horizon)
        instructions: list[SaleInstruction] = []
        for leg in plan.legs:
            if leg.action is LegAction.USE_DEPOSITS:
                record.from_deposits += leg.amount
                book.earmarked += leg.amount
            elif leg.action is LegAction.PLACE_SALE:
                record.from_pool += leg.amount
                book.inflight_orders += leg.amount
                instructions.append(SaleInstruction(book.agent, leg.amount,
                                                    DurationClass.BILL))
            elif leg.action is LegAction.DECLINE_ROLL:
                record.from_pool += leg.amount
                book.nonroll_pending += leg.amount
        book.requests.append(record)
        book.day_requested += plan.amount
        book.total_requested += plan.amount
        self.world.emit("plan_adopted", request_id=req.request_id,
                        issuer=book.agent.key, funding=plan.funding.value,
                        horizon=plan.horizon)
        if not instructions and book.nonroll_pending == 0:
            self._try_pay(book, record)
        return record, instructions

    # -- planning -----------------------------------------------------------

    def plan_pending(self, suspended_chains: set) -> list:
        """Commit funding for unplanned requests; returns sale instructions.

        Also tops up any shortfall between committed pool needs and the
        cash actually in flight (sales can settle short when prices fall
        between clearing and settlement).
        """
        instructions: list[SaleInstruction] = []
        for key in sorted(self.issuers):
            book = self.issuers[key]
            if book.chain in suspended_chains:
                continue
            for record in book.requests:
                if record.planned or record.completed:
                    continue
                instructions += self._plan_one(book, record)
            shortfall = self._pool_shortfall(book)
            if shortfall > 0:
                instructions += self._commit_extra(book, shortfall)
        return instructions

    def _spare_deposits(self, book: IssuerBook) -> Amount:
        return max(0, self.deposits_of(book.agent) - book.earmarked - book.pool)

    def _free_sellable(self, book: IssuerBook) -> Amount:
        held = self.world.tbill_value(book.agent)
        return max(0, held - book.inflight_orders - book.in_transit)

    def _free_nonroll(self, book: IssuerBook) -> Amount:
        principal = self.registry.total_principal(book.agent)
        return max(0, principal - book.nonroll_pending)

    def _plan_one(self, book: IssuerBook, record: OpenRequest) -> list:
        amount = record.request.amount
        d = min(amount, self._spare_deposits(book))
        remaining = amount - d
        s = min(remaining, self._free_sellable(book))
        remaining -= s
        n = min(remaining, self._free_nonroll(book))
        remaining -= n
        if remaining > 0:
            # plan regardless of solvency; uncollectable needs leave the
            # request queued and show up as delay
            n += remaining
        if n > 0:
            funding = Funding.REPO_NON_ROLLOVER
        elif s > 0:
            funding = Funding.SELL_TREASURIES
        else:
            funding = Funding.FROM_DEPOSITS
        legs = []
        if d:
            legs.append(Leg(0, LegAction.USE_DEPOSITS, d))
        if s:
            legs.append(Leg(0, LegAction.PLACE_SALE, s))
            legs.append(Leg(1, LegAction.AWAIT_PROCEEDS, s))
        if n:
            legs.append(Leg(0, LegAction.DECLINE_ROLL, n))
        horizon = 1 if s > 0 else 0
        legs.append(Leg(horizon, LegAction.PAY_AND_BURN, amount))
        record.plan = SettlementPlan(
            issuer=book.agent, beneficiary=record.request.holder, amount=amount,
            funding=funding, legs=tuple(legs), created_day=self.world.day)
        record.from_deposits = d
        record.from_pool = s + n
        record.horizon = horizon
        book.earmarked += d
        book.nonroll_pending += n
        self.world.emit("plan_created", request_id=record.request.request_id,
                        issuer=book.agent.key, funding=funding.value,
                        from_deposits=d, from_sales=s, from_nonroll=n,
                        horizon=horizon)
        out = []
        if s > 0:
            book.inflight_orders += s
            out.append(SaleInstruction(book.agent, s, DurationClass.BILL))
        return out

    def _pool_shortfall(self, book: IssuerBook) -> Amount:
        needs = sum(r.from_pool - r.pool_used for r in book.requests
                    if r.planned and not r.completed)
        coverage = book.pool + book.inflight_orders + book.in_transit + book.nonroll_pending
        return max(0, needs - coverage)

    def _commit_extra(self, book: IssuerBook, shortfall: Amount) -> list:
        out = []
        s = min(shortfall, self._free_sellable(book))
        if s > 0:
            book.inflight_orders += s
            out.append(SaleInstruction(book.agent, s, DurationClass.BILL))
            shortfall -= s
        if shortfall > 0:
            n = min(shortfall, self._free_nonroll(book))
            book.nonroll_pending += n
        return out

    # -- market feedback ------------------------------------------------------

    def note_fill(self, issuer_key: str, filled: Amount) -> None:
        book = self.issuers.get(issuer_key)
        if book is None or filled <= 0:
            return
        take = min(filled, book.inflight_orders)
        book.inflight_orders -= take
        book.in_transit += take

    def credit_proceeds(self, settlements: dict) -> None:
        """settlements: seller key -> (cash received, value expected)."""
        for key in sorted(settlements):
            book = self.issuers.get(key)
            if book is None:
                continue
            got, expected = settlements[key]
            book.pool += got
            book.in_transit = max(0, book.in_transit - expected)

    # -- repo rollovers -----------------------------------------------------------

    def process_repo_legs(self, suspended_chains: set) -> list:
        """Roll every maturing repo except principal committed to funding.

        Returns the funding gaps pushed onto borrowers by declined
        rolls. Interest always lands in the lender's spare deposits;
        declined principal lands in the proceeds pool.
        """
        gaps: list[GapInstruction] = []
        due = [p for p in self.registry.open_positions()
               if p.second_leg_day == self.world.day]
        for pos in due:
            book = self.issuers.get(pos.lender.key)
            if book is None:
                self._roll_safe(pos)
                continue
            need = book.nonroll_pending
            if need <= 0:
                self._roll_safe(pos)
                continue
            decline = min(need, pos.principal)
            keep = pos.principal - decline
            try:
                close_or_default_repo(self.world, self.registry, pos, True)
            except InsufficientPosition as err:
                self.world.emit("leg_failed", leg="repo_second_leg", cause=str(err),
                                repo_id=pos.repo_id)
                pos.second_leg_day += 1
                continue
            book.pool += decline
            book.nonroll_pending -= decline
            if keep > 0:
                # re-lend the undeclined balance overnight
                try:
                    open_reverse_repo(self.world, self.registry, pos.lender,
                                      pos.borrower, keep, pos.haircut,
                                      self.repo_roll_rate, term=1)
                except (InsufficientPosition, InstrumentError) as err:
                    self.world.emit("leg_failed", leg="repo_relend", cause=str(err),
                                    repo_id=pos.repo_id)
            gaps.append(GapInstruction(pos.borrower, decline))
        return gaps

    def _roll_safe(self, pos) -> None:
        try:
            roll_repo(self.world, self.registry, pos, self.repo_roll_rate)
        except (InsufficientPosition, InstrumentError) as err:
            self.world.emit("leg_failed", leg="repo_roll", cause=str(err),
                            repo_id=pos.repo_id)
            pos.second_leg_day += 1

    # -- payout -----------------------------------------------------------------

    def payout_pass(self, suspended_chains: set) -> None:
        """Pay funded requests, oldest first, in partial chunks.

        The deposit slice of a request is earmarked at planning and is
        always payable; the pool slice pays as sale and non-rollover
        cash arrives (spare un-earmarked cash may cover settlement
        shortfalls). Each chunk burns the holder's coins and moves
        deposits in one atomic posting pair.
        """
        for key in sorted(self.issuers):
            book = self.issuers[key]
            if book.chain in suspended_chains:
                continue
            for record in book.requests:
                if record.completed or not record.planned:
                    continue
                self._try_pay(book, record)

    def _try_pay(self, book: IssuerBook, record: OpenRequest) -> None:
        world = self.world
        req = record.request
        deposit_left = record.from_deposits - record.deposits_used
        pool_left = record.from_pool - record.pool_used
        pool_avail = book.pool + self._spare_deposits(book)
        pool_chunk = min(pool_left, pool_avail)
        chunk = deposit_left + pool_chunk
        chunk = min(chunk, record.remaining)
        balance = self.deposits_of(book.agent)
        chunk = min(chunk, balance)
        holder_coins = world.sheet(req.holder).asset(coin_key(book.agent))
        chunk = min(chunk, holder_coins)
        if chunk <= 0:
            return
        world.post_transfer(req.holder, book.agent,
                            Instrument(InstrumentKind.STABLECOIN, issuer=book.agent),
                            chunk)
        world.post_transfer(book.agent, req.holder,
                            Instrument(InstrumentKind.DEPOSIT), chunk)
        deposit_part = min(chunk, deposit_left)
        pool_part = chunk - deposit_part
        record.deposits_used += deposit_part
        record.pool_used += pool_part
        record.paid += chunk
        book.earmarked = max(0, book.earmarked - deposit_part)
        book.pool = max(0, book.pool - pool_part)
        book.day_completed += chunk
        book.total_completed += chunk
        if record.is_intervention:
            book.day_int_buy_completed += chunk
        if record.remaining == 0:
            record.completed_day = world.day
            delay = world.day - req.submitted_day - record.horizon
            if delay > 0:
                book.max_delay_days = max(book.max_delay_days, delay)
                if not record.counted_delayed:
                    record.counted_delayed = True
                    book.delayed_total += req.amount
            world.emit("redemption_completed", request_id=req.request_id,
                       issuer=book.agent.key, holder=req.holder.key,
                       amount=req.amount, delay_days=max(0, delay))
        else:
            world.emit("redemption_partial", request_id=req.request_id,
                       issuer=book.agent.key, paid=chunk,
                       remaining=record.remaining)

    def mint_pass(self, suspended_chains: set, treasury_seller: AgentId) -> None:
        """Settle queued mints: deposits in, coins out, optional bill buy."""
        world = self.world
        for key in sorted(self.issuers):
            book = self.issuers[key]
            if book.chain in suspended_chains:
                continue
            for order in book.mints:
                if order.completed_day is not None:
                    continue
                buyer_funds = self.deposits_of(order.buyer)
                if buyer_funds < order.amount:
                    world.emit("leg_failed", leg="mint_deposit",
                               cause="buyer lacks deposits", issuer=key)
                    continue
                world.post_transfer(order.buyer, book.agent,
                                    Instrument(InstrumentKind.DEPOSIT), order.amount)
                world.post_transfer(book.agent, order.buyer,
                                    Instrument(InstrumentKind.STABLECOIN, issuer=book.agent),
                                    order.amount)
                invest = mul_frac(order.amount, order.invest_frac)
                if invest > 0:
                    self._buy_bills(book, treasury_seller, invest)
                order.completed_day = world.day
                book.day_minted += order.amount
                book.total_minted += order.amount
                if order.is_intervention:
                    book.day_int_mint_completed += order.amount
                world.emit("mint_completed", issuer=key, buyer=order.buyer.key,
                           amount=order.amount)

    def _buy_bills(self, book: IssuerBook, seller: AgentId, value: Amount) -> None:
        world = self.world
        free = self.registry.free_face(world, seller, DurationClass.BILL)
        price = world.price(DurationClass.BILL)
        face = min(free, value * MICRO // price)
        if face <= 0:
            return
        actual = mul_frac(face, price)
        world.post_transfer(book.agent, seller, Instrument(InstrumentKind.DEPOSIT), actual)
        world.transfer_tbill(seller, book.agent, DurationClass.BILL, face=face)

    # -- daily metrics ------------------------------------------------------------

    def overdue_amount(self, book: IssuerBook) -> Amount:
        """Open request volume older than its plan horizon."""
        day = self.world.day
        return sum(r.remaining for r in book.requests
                   if not r.completed and day - r.request.submitted_day > r.horizon)

    def queue_age(self, book: IssuerBook) -> int:
        day = self.world.day
        ages = [day - r.request.submitted_day - r.horizon
                for r in book.requests if not r.completed]
        overdue = [a for a in ages if a > 0]
        return max(overdue) if overdue else 0

    def sweep_delay_flags(self) -> None:
        """Count still-open requests as delayed once they pass their horizon."""
        day = self.world.day
        for key in sorted(self.issuers):
            book = self.issuers[key]
            for record in book.requests:
                if record.completed or record.counted_delayed or not record.planned:
                    continue
                if day - record.request.submitted_day > record.horizon:
                    record.counted_delayed = True
                    book.delayed_total += record.request.amount
                    book.max_delay_days = max(
                        book.max_delay_days,
                        day - record.request.submitted_day - record.horizon)
                    self.world.emit("queue_delayed",
                                    request_id=record.request.request_id,
                                    issuer=key,
                                    age=day - record.request.submitted_day)


def plan_mint(buyer: AgentId, amount: Amount, world: LedgerWorld, book: IssuerBook,
              secondary_price: int, treasury_rate: int,
              negative_carry_refusal: bool) -> SettlementPlan:
    """Validate and lay out a mint; aggregate deposits are unchanged by it."""
    if amount <= 0:
        raise SettlementError("mint amount must be positive")
    if negative_carry_refusal and treasury_rate <= 0:
        raise MintDeclined("negative carry: securities yield nothing to invest in")
    if book.policy.mode is ParMode.BEST_EFFORT and secondary_price < PAR:
        raise MintDeclined("below par on the secondary market")
    legs = [Leg(0, LegAction.MOVE_DEPOSIT, amount)]
    invest = mul_frac(amount, book.mint_invest_frac)
    if invest > 0:
        legs.append(Leg(0, LegAction.BUY_BILLS, invest))
    legs.append(Leg(0, LegAction.CREDIT_COINS, amount))
    return SettlementPlan(issuer=book.agent, beneficiary=buyer, amount=amount,
                          funding=Funding.FROM_DEPOSITS, legs=tuple(legs),
                          created_day=world.day)


def plan_redemption(issuer: AgentId, req: RedemptionRequest, world: LedgerWorld,
                    registry: RepoRegistry, book: IssuerBook) -> SettlementPlan:
    """Stand-alone planning of a single request against current resources.

    Chooses deposits if they cover the amount, bill sales next, and repo
    non-rollover last; mixed funding is labeled by its slowest source.
    """
    if (book.access_mode is AccessMode.INTERMEDIATED
            and req.route is Route.DIRECT
            and req.holder.key not in book.eligible):
        raise IneligibleRedeemer(f"{req.holder} may not redeem directly")
    bank = world.bank_of(issuer)
    deposits = max(0, world.sheet(issuer).asset(deposit_key(bank)) - book.earmarked - book.pool)
    d = min(req.amount, deposits)
    remaining = req.amount - d
    sellable = max(0, world.tbill_value(issuer) - book.inflight_orders - book.in_transit)
    s = min(remaining, sellable)
    remaining -= s
    n = remaining
    legs = []
    if d:
        legs.append(Leg(0, LegAction.USE_DEPOSITS, d))
    if s:
        legs.append(Leg(0, LegAction.PLACE_SALE, s))
        legs.append(Leg(1, LegAction.AWAIT_PROCEEDS, s))
    if n:
        legs.append(Leg(0, LegAction.DECLINE_ROLL, n))
    horizon = 1 if s else 0
    legs.append(Leg(horizon, LegAction.PAY_AND_BURN, req.amount))
    if n > 0:
        funding = Funding.REPO_NON_ROLLOVER
    elif s > 0:
        funding = Funding.SELL_TREASURIES
    else:
        funding = Funding.FROM_DEPOSITS
    return SettlementPlan(issuer=issuer, beneficiary=req.holder, amount=req.amount,
                          funding=funding, legs=tuple(legs), created_day=world.day)
