"""Scenario execution: world construction, the daily loop, outputs.

The daily phase order is frozen for reproducibility:

  1. shocks and scheduled corrective burns
  2. accruals (securities and deposit interest, operating cost)
  3. redemption demand and request intake
  4. mint demand
  5. par-policy intervention
  6. planning (funding committed, sale instructions produced)
  7. settlement legs due: T+1 sale settlement, dealer offload, repo
     second legs with declines, payout of funded requests
  8. market clearing (carryover first, then today's orders, then
     funding-gap liquidations) and price impact on marks
  9. mint settlement, payout drain, delay sweep
 10. secondary price update per issuer
 11. analytics, audit, row emission

Identical configuration and seed give byte-identical outputs: agents
are canonicalized by name, every iteration is over sorted keys, the
only randomness is the fixed SplitMix64 stream, and all emitted
numbers are integers.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import itertools
import json
from dataclasses import dataclass, field

from . import analytics
from .config import ScenarioConfig, ValidationError
from .dynamics import (AccessKind, ConfidenceState, InterventionResult, ShockState,
                       apply_shock, redemption_demand, run_corrective_burns,
                       update_secondary_price)
from .instruments import PortfolioState, RepoRegistry, TreasuryBill
from .ledger import (FED, AgentId, AgentKind, DurationClass, Instrument,
                     InstrumentKind, LedgerWorld, Posting, coin_key, deposit_key,
                     reserves_key)
from .market import DealerBook, DealerChain, Market, MarketParams
from .money import BP, MICRO, PAR, Amount, mul_frac
from .rng import SplitMix64
from .settlement import (AccessMode, IssuerBook, MintDeclined, Route,
                         SettlementEngine)


class AuditFailure(Exception):
    def __init__(self, day: int, report):
        self.day = day
        self.report = report
        fails = "; ".join(f"{c.name}@{c.agent}: {c.detail}" for c in report.failures())
        super().__init__(f"audit failed on day {day}: {fails}")


DAILY_FIELDS = ("day", "agent", "kind", "price", "coins", "requested",
                "completed", "delayed", "overdue", "capacity", "slr",
                "headroom", "ratio", "band", "dla", "wla", "wam", "wal")
MARKET_FIELDS = ("day", "class", "price", "submitted", "fills", "unfilled",
                 "capacity", "srf_draws")


@dataclass
class RunOutput:
    daily_rows: list
    market_rows: list
    analytics_rows: list
    summary: dict
    events: list

    def daily_csv(self) -> str:
        return _csv(DAILY_FIELDS, self.daily_rows)

    def market_csv(self) -> str:
        return _csv(MARKET_FIELDS, self.market_rows)

    def analytics_csv(self) -> str:
        return _csv(analytics.ANALYTICS_FIELDS, self.analytics_rows)

    def summary_json(self) -> str:
        return json.dumps(self.summary, sort_keys=True, indent=2) + "\n"

    def events_jsonl(self) -> str:
        return "".join(json.dumps(e, sort_keys=True, separators=(",", ":")) + "\n"
                       for e in self.events)

    def write(self, out_dir) -> None:
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "daily.csv").write_text(self.daily_csv())
        (out / "market.csv").write_text(self.market_csv())
        (out / "analytics.csv").write_text(self.analytics_csv())
        (out / "summary.json").write_text(self.summary_json())
        (out / "events.jsonl").write_text(self.events_jsonl())


def _csv(fields, rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


@dataclass
class Scenario:
    """Everything a run owns; built fresh per scenario point."""

    config: ScenarioConfig
    world: LedgerWorld
    registry: RepoRegistry
    market: Market
    settle: SettlementEngine
    agent_of: dict
    issuer_cfg: dict
    run_models: dict
    confidence: dict
    shock_state: ShockState
    rng: SplitMix64
    shock_info: dict
    mint_buyer: AgentId
    unserved_today: dict = field(default_factory=dict)
    int_buy_requested: dict = field(default_factory=dict)
    committed_coins: dict = field(default_factory=dict)  # (holder, issuer) -> amount


def _endow_deposits(world: LedgerWorld, agent: AgentId, amount: Amount) -> None:
    """Create a deposit funded by reserves, backed by an outside claim."""
    if amount <= 0:
        return
    bank = world.bank_of(agent)
    world.post([
        Posting(FED, "A", "govt", amount),
        Posting(FED, "L", f"reserves@{bank.key}", amount),
        Posting(bank, "A", reserves_key(), amount),
        Posting(bank, "L", f"deposit@{agent.key}", amount),
        Posting(agent, "A", deposit_key(bank), amount),
    ])


def _endow_coins(world: LedgerWorld, issuer: AgentId, holder: AgentId,
                 amount: Amount) -> None:
    if amount <= 0:
        return
    world.post([
        Posting(issuer, "L", coin_key(issuer), amount),
        Posting(holder, "A", coin_key(issuer), amount),
    ])


def _exogenous_deposit_credit(world: LedgerWorld, agent: AgentId, amount: Amount) -> None:
    """Income arriving from outside the modeled sectors (e.g. coupon interest)."""
    _endow_deposits(world, agent, amount)


def build_scenario(config: ScenarioConfig) -> Scenario:
    from .instruments import open_reverse_repo

    world = LedgerWorld()
    world.add_agent(FED)

    agent_of: dict[str, AgentId] = {}
    for i, name in enumerate(config.banks):
        agent = AgentId(AgentKind.BANK, i)
        world.add_agent(agent)
        agent_of[name] = agent

    def register(kind: AgentKind, entries) -> list:
        out = []
        for i, entry in enumerate(entries):
            agent = AgentId(kind, i)
            world.add_agent(agent, bank=agent_of[entry.bank])
            agent_of[entry.name] = agent
            out.append(agent)
        return out

    issuer_agents = register(AgentKind.ISSUER, config.issuers)
    dealer_agents = register(AgentKind.BROKER_DEALER, config.dealers)
    register(AgentKind.INTERMEDIARY, config.intermediaries)
    holder_agents = register(AgentKind.HOLDER, config.holders)
    buyer_agents = register(AgentKind.TREASURY_BUYER, config.treasury_buyers)

    registry = RepoRegistry()

    for cfg, agent in zip(config.dealers, dealer_agents):
        _endow_deposits(world, agent, cfg.deposits)
        if cfg.treasuries_bill:
            world.grant_tbill(agent, DurationClass.BILL, cfg.treasuries_bill)
        if cfg.treasuries_long:
            world.grant_tbill(agent, DurationClass.LONG, cfg.treasuries_long)
    for cfg, agent in zip(config.treasury_buyers, buyer_agents):
        _endow_deposits(world, agent, cfg.deposits)
        if cfg.treasuries_bill:
            world.grant_tbill(agent, DurationClass.BILL, cfg.treasuries_bill)
        if cfg.treasuries_long:
            world.grant_tbill(agent, DurationClass.LONG, cfg.treasuries_long)
    for cfg in config.intermediaries:
        _endow_deposits(world, agent_of[cfg.name], cfg.deposits)
    for cfg in config.holders:
        _endow_deposits(world, agent_of[cfg.name], cfg.deposits)

    issuer_books: dict[str, IssuerBook] = {}
    issuer_cfg: dict[str, object] = {}
    for cfg, agent in zip(config.issuers, issuer_agents):
        _endow_deposits(world, agent, cfg.allocation["deposits"] + cfg.allocation["repo"])
        if cfg.allocation["bills"]:
            world.grant_tbill(agent, DurationClass.BILL, cfg.allocation["bills"])
        for holder_cfg in config.holders + config.intermediaries:
            held = holder_cfg.coins.get(cfg.name, 0)
            if held:
                _endow_coins(world, agent, agent_of[holder_cfg.name], held)
        eligible = {agent_of[i.name].key for i in config.intermediaries}
        issuer_books[agent.key] = IssuerBook(
            agent=agent, policy=config.policies.par_policy,
            access_mode=config.policies.access_mode, eligible=eligible,
            chain=cfg.chain, mint_invest_frac=cfg.mint_invest_frac,
            operating_cost_per_day=cfg.operating_cost_per_day,
            genius_compliant=cfg.genius_compliant)
        issuer_cfg[agent.key] = cfg
        principal = cfg.allocation["repo"]
        if principal > 0:
            if not dealer_agents:
                raise ValidationError("repo allocation needs at least one dealer")
            share, extra = divmod(principal, len(dealer_agents))
            for k, dealer in enumerate(dealer_agents):
                amount = share + (1 if k < extra else 0)
                if amount > 0:
                    open_reverse_repo(world, registry, agent, dealer, amount,
                                      config.rates.haircut,
                                      config.rates.repo_rate_daily, term=1)

    books: dict[str, DealerBook] = {}
    for cfg, agent in zip(config.dealers, dealer_agents):
        books[agent.key] = DealerBook(
            agent=agent, capital=cfg.capital, base_assets=cfg.base_assets,
            exposures=cfg.exposures, gsib=cfg.gsib,
            reserve_access=cfg.reserve_access,
            inventory_baseline=world.tbill_value(agent))

    bound_override = (config.policies.slr_bound_bp * BP
                      if config.policies.slr_bound_bp is not None else None)
    params = MarketParams(
        depth=config.market.depth,
        impact_coeff_long=config.market.impact_coeff_long,
        impact_coeff_bill=config.market.impact_coeff_bill,
        max_dislocation=config.market.max_dislocation_bp * BP,
        retention_frac=config.market.retention_frac,
        flight_to_safety=config.market.flight_to_safety,
        bill_safety_lift=config.market.bill_safety_lift,
        replacement_frac=config.market.replacement_frac,
        offload_frac=config.market.offload_frac,
        eslr_capacity_add=config.market.eslr_capacity_add,
        eslr_reform=config.policies.eslr_reform,
        srf_enabled=config.policies.srf_enabled,
        slr_bound_override=bound_override,
    )
    market = Market(params, DealerChain(dealer_agents, config.market.retention_frac),
                    books, buyer_agents[0])
    settle = SettlementEngine(
        world, registry, issuer_books,
        treasury_rate=config.rates.treasury_rate_daily,
        repo_roll_rate=config.rates.repo_rate_daily,
        negative_carry_refusal=config.policies.negative_carry_refusal)

    run_models = {key: config.run_model.build() for key in sorted(issuer_books)}
    confidence = {key: ConfidenceState() for key in sorted(issuer_books)}
    shock_info = {}
    for cfg, agent in zip(config.issuers, issuer_agents):
        target = holder_agents[0] if holder_agents else buyer_agents[0]
        shock_info[agent.key] = {"agent": agent, "chain": cfg.chain,
                                 "mint_target": target}

    report = world.audit()
    if not report.ok:
        raise AuditFailure(-1, report)
    return Scenario(
        config=config, world=world, registry=registry, market=market,
        settle=settle, agent_of=agent_of, issuer_cfg=issuer_cfg,
        run_models=run_models, confidence=confidence,
        shock_state=ShockState(), rng=SplitMix64(config.seed),
        shock_info=shock_info, mint_buyer=buyer_agents[0])


# ---------------------------------------------------------------------------
# Daily helpers
# ---------------------------------------------------------------------------


def _available_coins(scn: Scenario, holder: AgentId, issuer: AgentId) -> Amount:
    held = scn.world.sheet(holder).asset(coin_key(issuer))
    committed = scn.committed_coins.get((holder.key, issuer.key), 0)
    return max(0, held - committed)


def _commit_coins(scn: Scenario, holder: AgentId, issuer: AgentId, amount: Amount) -> None:
    key = (holder.key, issuer.key)
    scn.committed_coins[key] = scn.committed_coins.get(key, 0) + amount


def _release_completed_commitments(scn: Scenario) -> None:
    """Rebuild the committed-coin index from still-open requests."""
    fresh: dict = {}
    for key in sorted(scn.settle.issuers):
        book = scn.settle.issuers[key]
        for record in book.requests:
            if record.completed:
                continue
            k = (record.request.holder.key, key)
            fresh[k] = fresh.get(k, 0) + record.remaining
    scn.committed_coins = fresh


def _coin_holders(scn: Scenario, issuer: AgentId) -> list:
    out = []
    for agent_key in sorted(scn.world.agents):
        meta = scn.world.meta[agent_key]
        if meta["kind"] in (AgentKind.HOLDER, AgentKind.INTERMEDIARY,
                            AgentKind.TREASURY_BUYER):
            agent = AgentId(meta["kind"], meta["index"])
            if _available_coins(scn, agent, issuer) > 0:
                out.append(agent)
    return out


def _route_demand(scn: Scenario, book: IssuerBook, demand: Amount,
                  suspended: set) -> None:
    """Turn demand into redemption requests per the access mode."""
    if demand <= 0:
        return
    issuer = book.agent
    key = issuer.key
    world = scn.world
    if book.chain in suspended:
        # intent exists but nothing can move on-chain; it queues
        remaining = demand
        for holder in _coin_holders(scn, issuer):
            if remaining <= 0:
                break
            slice_ = min(remaining, _available_coins(scn, holder, issuer))
            if slice_ <= 0:
                continue
            record = scn.settle.submit_redemption(
                book, holder, slice_,
                Route.DIRECT if book.access_mode is AccessMode.DIRECT
                else Route.VIA_INTERMEDIARY)
            _commit_coins(scn, holder, issuer, slice_)
            remaining -= slice_
        scn.unserved_today[key] = scn.unserved_today.get(key, 0) + demand
        return
    if book.access_mode is AccessMode.DIRECT:
        remaining = demand
        for holder in _coin_holders(scn, issuer):
            if remaining <= 0:
                break
            slice_ = min(remaining, _available_coins(scn, holder, issuer))
            if slice_ <= 0:
                continue
            scn.settle.submit_redemption(book, holder, slice_, Route.DIRECT)
            _commit_coins(scn, holder, issuer, slice_)
            remaining -= slice_
        if remaining > 0:
            scn.unserved_today[key] = scn.unserved_today.get(key, 0) + remaining
        return
    # intermediated: the market maker buys at the secondary price, then
    # either redeems at par or warehouses the coins
    price = scn.confidence[key].secondary_price
    intermediaries = [a for a in world.agent_ids()
                      if a.kind is AgentKind.INTERMEDIARY]
    remaining = demand
    for im in intermediaries:
        if remaining <= 0:
            break
        im_bank = world.bank_of(im)
        funds = world.sheet(im).asset(deposit_key(im_bank))
        afford = funds * MICRO // price if price > 0 else 0
        budget = min(remaining, afford)
        if budget <= 0:
            continue
        bought = 0
        for holder in _coin_holders(scn, issuer):
            if holder.kind is AgentKind.INTERMEDIARY:
                continue
            slice_ = min(budget - bought, _available_coins(scn, holder, issuer))
            if slice_ <= 0:
                continue
            world.post_transfer(im, holder, Instrument(InstrumentKind.DEPOSIT),
                                mul_frac(slice_, price))
            world.post_transfer(holder, im,
                                Instrument(InstrumentKind.STABLECOIN, issuer=issuer),
                                slice_)
            bought += slice_
            if bought >= budget:
                break
        if bought > 0 and scn.config.policies.intermediary_mode == "redeem":
            scn.settle.submit_redemption(book, im, bought, Route.DIRECT)
            _commit_coins(scn, im, issuer, bought)
        elif bought > 0:
            world.emit("warehoused", intermediary=im.key, issuer=key, amount=bought)
        remaining -= bought
    if remaining > 0:
        scn.unserved_today[key] = scn.unserved_today.get(key, 0) + remaining


def _run_intervention(scn: Scenario, book: IssuerBook, suspended: set) -> None:
    from .settlement import intervene

    key = book.agent.key
    if book.chain in suspended:
        return
    conf = scn.confidence[key]
    actions = intervene(book.policy, conf.secondary_price, scn.world, book.agent)
    for action in actions:
        if action.kind == "buy":
            placed = 0
            for holder in _coin_holders(scn, book.agent):
                if placed >= action.amount:
                    break
                slice_ = min(action.amount - placed,
                             _available_coins(scn, holder, book.agent))
                if slice_ <= 0:
                    continue
                scn.settle.submit_redemption(book, holder, slice_, Route.DIRECT,
                                             is_intervention=True)
                _commit_coins(scn, holder, book.agent, slice_)
                placed += slice_
            scn.int_buy_requested[key] = scn.int_buy_requested.get(key, 0) + placed
            book.pin_target = action.pin_target
            scn.world.emit("intervention", issuer=key, kind="buy",
                           requested=action.amount, placed=placed,
                           target=action.pin_target)
        else:
            try:
                scn.settle.submit_mint(book, scn.mint_buyer, action.amount,
                                       conf.secondary_price, is_intervention=True)
                book.pin_target = action.pin_target
                scn.world.emit("intervention", issuer=key, kind="mint",
                               requested=action.amount, target=action.pin_target)
            except MintDeclined as err:
                scn.world.emit("intervention_declined", issuer=key, cause=str(err))


def _fed_bill_purchase(scn: Scenario, issuer: AgentId, value: Amount) -> Amount:
    """Issuer reserve access: bills monetized at the central bank, same day."""
    world = scn.world
    price = world.price(DurationClass.BILL)
    free = scn.registry.free_face(world, issuer, DurationClass.BILL)
    face = min(free, value * MICRO // price)
    if face <= 0:
        return 0
    moved = world.transfer_tbill(issuer, FED, DurationClass.BILL, face=face)
    _exogenous_deposit_credit(world, issuer, moved)
    world.emit("reserve_access_sale", issuer=issuer.key, proceeds=moved)
    return moved


def _accrue(scn: Scenario) -> None:
    rates = scn.config.rates
    world = scn.world
    for key in sorted(scn.settle.issuers):
        book = scn.settle.issuers[key]
        agent = book.agent
        bank = world.bank_of(agent)
        # both legs accrue on start-of-day balances; rates were fixed at
        # the period open, so nothing compounds within the day
        opening_deposits = world.sheet(agent).asset(deposit_key(bank))
        if rates.treasury_rate_daily > 0:
            interest = mul_frac(world.tbill_value(agent), rates.treasury_rate_daily)
            if interest > 0:
                _exogenous_deposit_credit(world, agent, interest)
        if rates.deposit_rate_daily > 0:
            interest = mul_frac(opening_deposits, rates.deposit_rate_daily)
            if interest > 0:
                world.post([
                    Posting(bank, "L", f"deposit@{agent.key}", interest),
                    Posting(agent, "A", deposit_key(bank), interest),
                ])
        cost = book.operating_cost_per_day
        if cost > 0:
            bank = world.bank_of(agent)
            balance = world.sheet(agent).asset(deposit_key(bank))
            paid = min(cost, balance)
            if paid > 0:
                world.post([
                    Posting(agent, "A", deposit_key(bank), -paid),
                    Posting(bank, "L", f"deposit@{agent.key}", -paid),
                ], event="operating_cost", issuer=key, amount=paid)


def _issuer_portfolio(scn: Scenario, book: IssuerBook) -> PortfolioState:
    world = scn.world
    agent = book.agent
    cfg = scn.issuer_cfg[agent.key]
    bank = world.bank_of(agent)
    bills = []
    face = world.face_of(agent, DurationClass.BILL)
    if face > 0:
        bills.append(TreasuryBill(face=face,
                                  maturity_day=cfg.bill_maturity_days,
                                  market_price=world.price(DurationClass.BILL)))
    face_long = world.face_of(agent, DurationClass.LONG)
    if face_long > 0:
        bills.append(TreasuryBill(face=face_long, maturity_day=365 * 5,
                                  market_price=world.price(DurationClass.LONG)))
    return PortfolioState(
        treasury_face=face + face_long,
        treasury_price=world.price(DurationClass.BILL),
        deposits=world.sheet(agent).asset(deposit_key(bank)),
        rate_treasury=scn.config.rates.treasury_rate_daily,
        rate_deposit=scn.config.rates.deposit_rate_daily,
        repo_principal=scn.registry.total_principal(agent),
        bills=bills,
        repos=scn.registry.by_lender(agent),
    )


# ---------------------------------------------------------------------------
# The run
# ---------------------------------------------------------------------------


def run(config: ScenarioConfig, on_day_end=None) -> RunOutput:
    """Execute the scenario; on_day_end(scenario, day) is a test hook
    called after each day's audit."""
    scn = build_scenario(config)
    world = scn.world
    daily_rows: list[dict] = []
    market_rows: list[dict] = []
    analytics_rows: list[dict] = []
    shocks_by_day: dict[int, list] = {}
    for spec in config.shocks:
        shocks_by_day.setdefault(spec.day, []).append(spec)
    peak_dev: dict[str, int] = {k: 0 for k in sorted(scn.settle.issuers)}
    peak_txn: dict[str, int] = {k: 0 for k in sorted(scn.settle.issuers)}
    srf_total = 0
    capacity_day0 = None

    for day in range(config.horizon_days):
        world.day = day
        scn.market.begin_day()
        scn.settle.begin_day()
        scn.unserved_today = {}
        scn.int_buy_requested = {}

        # 1. shocks
        for spec in shocks_by_day.get(day, []):
            apply_shock(spec, world, scn.shock_state, scn.shock_info, scn.rng,
                        config.price_model)
        run_corrective_burns(world, scn.shock_state)
        suspended = scn.shock_state.suspended_chains(day)

        # 2. accruals
        _accrue(scn)

        # 3. demand
        _release_completed_commitments(scn)
        for key in sorted(scn.settle.issuers):
            book = scn.settle.issuers[key]
            model = scn.run_models[key]
            conf = scn.confidence[key]
            conf = ConfidenceState(secondary_price=conf.secondary_price,
                                   pending_delay_age=scn.settle.queue_age(book),
                                   last_shock=conf.last_shock)
            scn.confidence[key] = conf
            prior = model.sensitivity_state
            coins = scn.settle.coins_outstanding(book.agent)
            demand = redemption_demand(model, conf, coins)
            if model.sensitivity_state is not prior:
                world.emit("regime_flip", issuer=key,
                           state=model.sensitivity_state.value)
            _route_demand(scn, book, demand, suspended)

        # 4. mint demand
        if config.mint_daily_rate > 0:
            for key in sorted(scn.settle.issuers):
                book = scn.settle.issuers[key]
                if book.chain in suspended:
                    continue
                coins = scn.settle.coins_outstanding(book.agent)
                amount = mul_frac(coins, config.mint_daily_rate)
                if amount > 0:
                    try:
                        scn.settle.submit_mint(book, scn.mint_buyer, amount,
                                               scn.confidence[key].secondary_price)
                    except MintDeclined as err:
                        world.emit("mint_declined", issuer=key, cause=str(err))

        # 5. intervention
        for key in sorted(scn.settle.issuers):
            _run_intervention(scn, scn.settle.issuers[key], suspended)

        # 6. planning
        instructions = scn.settle.plan_pending(suspended)
        if config.policies.issuer_reserve_access:
            # bills monetize at the central bank instead of the dealer market
            for instr in instructions:
                proceeds = _fed_bill_purchase(scn, instr.issuer, instr.amount)
                book = scn.settle.issuers[instr.issuer.key]
                book.inflight_orders = max(0, book.inflight_orders - instr.amount)
                book.pool += proceeds
            instructions = []

        # 7. settlement legs due
        settlements = scn.market.settle_due(world, scn.registry)
        scn.settle.credit_proceeds(settlements)
        scn.market.offload_inventory(world, scn.registry)
        gaps = scn.settle.process_repo_legs(suspended)
        scn.settle.payout_pass(suspended)

        # 8. market clearing
        capacity_now = scn.market.capacity(world)
        if capacity_day0 is None:
            capacity_day0 = capacity_now
        dealer_capacity = {k: scn.market._dealer_available(world, scn.market.books[k])
                           for k in sorted(scn.market.books)}
        reports = scn.market.resubmit_carryover(world)
        for instr in instructions:
            reports.append(scn.market.submit_sale(world, instr.issuer, instr.amount,
                                                  instr.duration,
                                                  purpose="redemption"))
        for gap in gaps:
            reports += scn.market.funding_gap_liquidation(world, gap.amount,
                                                          gap.borrower)
        for report in reports:
            scn.settle.note_fill(report.seller.key, report.filled)
        scn.market.apply_day_impact(world, scn.registry)
        srf_total += scn.market.day_srf_draws

        # 9. mint settlement and payout drain
        scn.settle.mint_pass(suspended, scn.mint_buyer)
        scn.settle.payout_pass(suspended)
        scn.settle.sweep_delay_flags()

        # 10. price update
        for key in sorted(scn.settle.issuers):
            book = scn.settle.issuers[key]
            conf = scn.confidence[key]
            coins = scn.settle.coins_outstanding(book.agent)
            overdue = scn.settle.overdue_amount(book) + scn.unserved_today.get(key, 0)
            shock_eff = scn.shock_state.price_effects.pop(key, 0)
            completed = book.day_int_buy_completed + book.day_int_mint_completed
            requested = max(scn.int_buy_requested.get(key, 0), completed)
            intervention = InterventionResult(
                requested=requested, completed=completed,
                pin_target=book.pin_target)
            access = (AccessKind.DIRECT
                      if book.access_mode is AccessMode.DIRECT
                      else AccessKind.INTERMEDIATED)
            conf = update_secondary_price(conf, overdue, coins, shock_eff, access,
                                          intervention=intervention,
                                          params=config.price_model)
            if shock_eff:
                conf = dataclasses.replace(
                    conf, last_shock=scn.shock_state.last_shock.get(key))
            scn.confidence[key] = conf
            dev = abs(PAR - conf.secondary_price)
            peak_dev[key] = max(peak_dev[key], dev)
            peak_txn[key] = max(peak_txn[key],
                                book.day_completed + book.day_minted)

        # 11. analytics, audit, emission
        report = world.audit()
        if not report.ok:
            raise AuditFailure(day, report)
        for key in sorted(scn.settle.issuers):
            book = scn.settle.issuers[key]
            agent = book.agent
            cfg = scn.issuer_cfg[key]
            sheet = world.sheet(agent)
            assets = sheet.total_assets()
            if cfg.count_excess_collateral:
                assets += sum(max(0, p.collateral_value(world) - p.principal)
                              for p in scn.registry.by_lender(agent))
            coins = scn.settle.coins_outstanding(agent)
            lev = analytics.leverage_ratio(assets, coins) if assets > 0 else None
            liq = analytics.liquidity_metrics(_issuer_portfolio(scn, book), day)
            if sheet.equity < 0 and book.insolvency_day is None:
                book.insolvency_day = day
                world.emit("insolvent", issuer=key, equity=sheet.equity)
            analytics_rows.append(analytics.analytics_row(
                day, cfg.name, leverage=lev, liquidity=liq))
            daily_rows.append({
                "day": day, "agent": cfg.name, "kind": "issuer",
                "price": scn.confidence[key].secondary_price,
                "coins": coins,
                "requested": book.day_requested,
                "completed": book.day_completed,
                "delayed": book.delayed_total,
                "overdue": scn.settle.overdue_amount(book),
                "capacity": "",
                "slr": "", "headroom": "",
                "ratio": lev.ratio if lev else "",
                "band": lev.band.value if lev else "",
                "dla": liq.dla_frac, "wla": liq.wla_frac,
                "wam": liq.wam_days, "wal": liq.wal_days,
            })
        name_of = {scn.agent_of[c.name].key: c.name for c in config.dealers}
        for dealer_key in sorted(scn.market.books):
            book = scn.market.books[dealer_key]
            slr_rep = book.slr_report(world, scn.market.params.slr_bound_override)
            name = name_of[dealer_key]
            analytics_rows.append(analytics.analytics_row(
                day, name, slr_report=slr_rep))
            daily_rows.append({
                "day": day, "agent": name, "kind": "dealer",
                "price": "", "coins": "", "requested": "", "completed": "",
                "delayed": "", "overdue": "",
                "capacity": dealer_capacity[dealer_key],
                "slr": slr_rep.slr, "headroom": slr_rep.headroom_assets,
                "ratio": "", "band": "", "dla": "", "wla": "", "wam": "", "wal": "",
            })
        for duration in sorted(DurationClass, key=lambda d: d.value):
            market_rows.append({
                "day": day, "class": duration.value,
                "price": world.price(duration),
                "submitted": scn.market.day_submitted[duration],
                "fills": scn.market.day_fills[duration],
                "unfilled": scn.market.day_excess[duration],
                "capacity": capacity_now,
                "srf_draws": scn.market.day_srf_draws,
            })
        if on_day_end is not None:
            on_day_end(scn, day)

    summary = _summarize(scn, peak_dev, peak_txn, srf_total, capacity_day0 or 0)
    daily_rows.sort(key=lambda r: (r["day"], r["agent"]))
    analytics_rows.sort(key=lambda r: (r["day"], r["agent"]))
    return RunOutput(daily_rows=daily_rows, market_rows=market_rows,
                     analytics_rows=analytics_rows, summary=summary,
                     events=list(world.events))


def _summarize(scn: Scenario, peak_dev: dict, peak_txn: dict, srf_total: Amount,
               capacity_day0: Amount) -> dict:
    from .money import mul_div

    config = scn.config
    world = scn.world
    canonical = json.dumps(config.canonical_dict(), sort_keys=True,
                           separators=(",", ":"))
    issuers = {}
    for key in sorted(scn.settle.issuers):
        book = scn.settle.issuers[key]
        cfg = scn.issuer_cfg[key]
        incentive = None
        if config.attack_cost:
            # diagnostic only: peak daily transacted value per unit of
            # attack cost, in micro units
            incentive = mul_div(peak_txn[key], MICRO, config.attack_cost)
        issuers[cfg.name] = {
            "peak_deviation_bp": peak_dev[key] // BP,
            "max_delay_days": book.max_delay_days,
            "insolvency_day": book.insolvency_day,
            "requested_total": book.total_requested,
            "completed_total": book.total_completed,
            "delayed_total": book.delayed_total,
            "minted_total": book.total_minted,
            "final_coins": scn.settle.coins_outstanding(book.agent),
            "final_price": scn.confidence[key].secondary_price,
            "final_equity": world.sheet(book.agent).equity,
            "attack_incentive_ratio": incentive,
        }
    return {
        "schema": "stablesim.summary/1",
        "seed": config.seed,
        "horizon_days": config.horizon_days,
        "unit_scale": config.unit_scale,
        "config_sha256": hashlib.sha256(canonical.encode()).hexdigest(),
        "issuers": issuers,
        "market": {
            "seller_volume": scn.market.seller_volume,
            "gross_volume": scn.market.gross_volume,
            "srf_draws_total": srf_total,
            "capacity_day0": capacity_day0,
            "final_price_bill": world.price(DurationClass.BILL),
            "final_price_long": world.price(DurationClass.LONG),
        },
    }


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    index: int
    overrides: dict
    summary: dict | None
    error: str | None


@dataclass
class SweepReport:
    points: list

    def matrix_rows(self) -> list:
        rows = []
        for point in self.points:
            row = {"point": point.index,
                   "params": json.dumps(point.overrides, sort_keys=True),
                   "status": "ok" if point.error is None else "error",
                   "error": point.error or ""}
            if point.summary:
                market = point.summary["market"]
                row["capacity_day0"] = market["capacity_day0"]
                row["gross_volume"] = market["gross_volume"]
                row["srf_draws_total"] = market["srf_draws_total"]
                peak = max((v["peak_deviation_bp"]
                            for v in point.summary["issuers"].values()), default=0)
                delayed = sum(v["delayed_total"]
                              for v in point.summary["issuers"].values())
                row["peak_deviation_bp"] = peak
                row["delayed_total"] = delayed
            else:
                row.update({"capacity_day0": "", "gross_volume": "",
                            "srf_draws_total": "", "peak_deviation_bp": "",
                            "delayed_total": ""})
            rows.append(row)
        return rows

    def matrix_csv(self) -> str:
        fields = ("point", "params", "status", "error", "capacity_day0",
                  "gross_volume", "srf_draws_total", "peak_deviation_bp",
                  "delayed_total")
        return _csv(fields, self.matrix_rows())


def _set_path(raw: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = raw
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def sweep(raw_config: dict, grid: dict, out_dir=None) -> SweepReport:
    """Run the Cartesian product of grid values over a base config.

    Each point is an independent run of the overridden configuration;
    failures are recorded per point without aborting the sweep. An
    empty grid runs the baseline once.
    """
    from .config import parse_config

    keys = sorted(grid)
    values = [grid[k] for k in keys]
    combos = list(itertools.product(*values)) if keys else [()]
    points = []
    for index, combo in enumerate(combos):
        overrides = dict(zip(keys, combo))
        raw = json.loads(json.dumps(raw_config))
        for dotted, value in overrides.items():
            _set_path(raw, dotted, value)
        try:
            output = run(parse_config(raw))
            points.append(SweepPoint(index, overrides, output.summary, None))
            if out_dir is not None:
                from pathlib import Path

                output.write(Path(out_dir) / f"point_{index:03d}")
        except Exception as err:  # per-point isolation is the contract
            points.append(SweepPoint(index, overrides, None,
                                     f"{type(err).__name__}: {err}"))
    report = SweepReport(points)
    if out_dir is not None:
        from pathlib import Path

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "matrix.csv").write_text(report.matrix_csv())
    return report
