"""Double-entry balance-sheet substrate for every agent in a simulation.

Each agent carries an asset map, a liability map and a stored equity
figure that the posting engine maintains; all mutation goes through
``LedgerWorld.post`` (or the higher-level ``post_transfer``), which
validates every leg before applying any of them, so a failed posting
leaves the world byte-identical.

Inside-money instruments (reserves, deposits, stablecoins, repo and
SRF claims) always appear on exactly two balance sheets with equal
amounts. Treasuries and the central bank's government claim are
outside assets with no matching liability. Treasury positions are
tracked as face amounts per duration class in ``tbill_face``; the
balance-sheet entry carries the market value at the current class
price and is re-derived on every mark.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field
from enum import Enum


class LedgerError(Exception):
    pass


class UnknownAgent(LedgerError):
    pass


class InsufficientPosition(LedgerError):
    def __init__(self, agent: str, key: str, have: int, need: int):
        super().__init__(f"{agent} holds {have} of {key}, needs {need}")
        self.agent = agent
        self.key = key
        self.have = have
        self.need = need


class AgentKind(Enum):
    FED = "fed"
    BANK = "bank"
    BROKER_DEALER = "dealer"
    ISSUER = "issuer"
    INTERMEDIARY = "intermediary"
    HOLDER = "holder"
    TREASURY_BUYER = "buyer"


@dataclass(frozen=True, order=True)
class AgentId:
    kind: AgentKind = field(compare=False)
    index: int = field(compare=False)
    key: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "key", f"{self.kind.value}:{self.index}")

    def __str__(self) -> str:
        return self.key


FED = AgentId(AgentKind.FED, 0)


class DurationClass(Enum):
    BILL = "bill"
    LONG = "long"


class InstrumentKind(Enum):
    RESERVES = "reserves"
    DEPOSIT = "deposit"
    TBILL = "tbill"
    STABLECOIN = "coin"
    REPO_LOAN = "repo"
    SRF_LOAN = "srf"
    GOVT = "govt"


@dataclass(frozen=True)
class Instrument:
    kind: InstrumentKind
    counterparty: AgentId | None = None
    duration: DurationClass | None = None
    issuer: AgentId | None = None

    @property
    def key(self) -> str:
        if self.kind is InstrumentKind.TBILL:
            return f"tbill/{self.duration.value}"
        if self.kind is InstrumentKind.STABLECOIN:
            return f"coin@{self.issuer.key}"
        if self.kind is InstrumentKind.GOVT:
            return "govt"
        return f"{self.kind.value}@{self.counterparty.key}"


def reserves_key() -> str:
    return f"reserves@{FED.key}"


def deposit_key(bank: AgentId) -> str:
    return f"deposit@{bank.key}"


def tbill_key(duration: DurationClass) -> str:
    return f"tbill/{duration.value}"


def coin_key(issuer: AgentId) -> str:
    return f"coin@{issuer.key}"


@dataclass
class BalanceSheet:
    assets: dict = field(default_factory=dict)
    liabilities: dict = field(default_factory=dict)
    equity: int = 0

    def asset(self, key: str) -> int:
        return self.assets.get(key, 0)

    def liability(self, key: str) -> int:
        return self.liabilities.get(key, 0)

    def total_assets(self) -> int:
        return sum(self.assets.values())

    def total_liabilities(self) -> int:
        return sum(self.liabilities.values())


@dataclass(frozen=True)
class Posting:
    """One balance-sheet leg: side is 'A' (asset) or 'L' (liability)."""

    agent: AgentId
    side: str
    key: str
    delta: int


@dataclass(frozen=True)
class AuditCheck:
    name: str
    passed: bool
    agent: str | None = None
    detail: str = ""


@dataclass(frozen=True)
class AuditReport:
    checks: tuple

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if not c.passed]


@dataclass(frozen=True)
class WorldSnapshot:
    """Immutable copy of world state with a canonical JSON rendering."""

    data: dict

    def to_json(self) -> str:
        return json.dumps(self.data, sort_keys=True, separators=(",", ":"))

    def agent(self, key: str) -> dict:
        for entry in self.data["agents"]:
            if entry["id"] == key:
                return entry
        raise KeyError(key)


class LedgerWorld:
    """Holds every balance sheet plus the clock, price table and event log.

    Single-threaded by design: one scenario owns one world. Snapshots
    are plain immutable data safe to share.
    """

    def __init__(self):
        self.day = 0
        self.seq = 0
        self.agents: dict[str, BalanceSheet] = {}
        self.meta: dict[str, dict] = {}
        self.tbill_prices: dict[DurationClass, int] = {
            DurationClass.BILL: 1_000_000,
            DurationClass.LONG: 1_000_000,
        }
        self.tbill_face: dict[tuple[str, DurationClass], int] = {}
        self.events: list[dict] = []

    # -- registration ----------------------------------------------------

    def add_agent(self, agent: AgentId, bank: AgentId | None = None) -> None:
        if agent.key in self.agents:
            raise LedgerError(f"agent {agent} already registered")
        if bank is not None and bank.key not in self.agents:
            raise UnknownAgent(f"bank {bank} not registered")
        self.agents[agent.key] = BalanceSheet()
        self.meta[agent.key] = {"kind": agent.kind, "index": agent.index, "bank": bank}

    def has_agent(self, agent: AgentId) -> bool:
        return agent.key in self.agents

    def sheet(self, agent: AgentId) -> BalanceSheet:
        try:
            return self.agents[agent.key]
        except KeyError:
            raise UnknownAgent(f"unknown agent {agent}") from None

    def bank_of(self, agent: AgentId) -> AgentId:
        bank = self.meta[agent.key]["bank"]
        if bank is None:
            raise LedgerError(f"{agent} has no deposit bank")
        return bank

    def agent_ids(self) -> list[AgentId]:
        ids = [AgentId(m["kind"], m["index"]) for m in self.meta.values()]
        return sorted(ids, key=lambda a: a.key)

    # -- event log ---------------------------------------------------------

    def emit(self, event_type: str, **fields) -> None:
        record = {"day": self.day, "seq": self.seq, "type": event_type}
        record.update(fields)
        self.events.append(record)
        self.seq += 1

    # -- posting engine ----------------------------------------------------

    def post(self, postings: list[Posting], event: str | None = None, **event_fields) -> None:
        """Apply a batch of legs atomically.

        All legs are validated first: agents must exist and no position
        may go negative. Only then are balances and stored equity
        updated, so an error cannot leave a half-applied batch.
        """
        staged: dict[tuple[str, str, str], int] = {}
        for p in postings:
            if p.agent.key not in self.agents:
                raise UnknownAgent(f"unknown agent {p.agent}")
            k = (p.agent.key, p.side, p.key)
            staged[k] = staged.get(k, 0) + p.delta
        for (agent_key, side, key), delta in staged.items():
            book = self.agents[agent_key]
            current = book.asset(key) if side == "A" else book.liability(key)
            if current + delta < 0:
                raise InsufficientPosition(agent_key, key, current, -delta)
        for (agent_key, side, key), delta in staged.items():
            if delta == 0:
                continue
            book = self.agents[agent_key]
            positions = book.assets if side == "A" else book.liabilities
            new = positions.get(key, 0) + delta
            if new == 0:
                positions.pop(key, None)
            else:
                positions[key] = new
            book.equity += delta if side == "A" else -delta
        if event is not None:
            self.emit(event, **event_fields)

    # -- generic transfer ---------------------------------------------------

    def post_transfer(self, frm: AgentId, to: AgentId, instrument: Instrument, amount: int) -> None:
        """Move one instrument between two agents with all implied legs.

        Deposits settle through the banking layer: a cross-bank move
        debits the payer's bank of reserves and credits the payee's,
        re-keying the central bank's reserve liability, so aggregate
        deposits and reserves are conserved by construction. Stablecoin
        moves to/from the issuing agent burn/mint the liability.
        A zero-amount transfer leaves the world untouched.
        """
        if amount < 0:
            raise LedgerError("transfer amount must be non-negative")
        if frm.key not in self.agents:
            raise UnknownAgent(f"unknown agent {frm}")
        if to.key not in self.agents:
            raise UnknownAgent(f"unknown agent {to}")
        if amount == 0 or frm == to:
            return
        kind = instrument.kind
        if kind is InstrumentKind.DEPOSIT:
            self._transfer_deposit(frm, to, amount)
        elif kind is InstrumentKind.RESERVES:
            self._transfer_reserves(frm, to, amount)
        elif kind is InstrumentKind.TBILL:
            self.transfer_tbill(frm, to, instrument.duration, value=amount)
        elif kind is InstrumentKind.STABLECOIN:
            self._transfer_coin(frm, to, instrument.issuer, amount)
        else:
            raise LedgerError(f"transfer not defined for {kind}")

    def _transfer_deposit(self, frm: AgentId, to: AgentId, amount: int) -> None:
        bank_f = self.bank_of(frm)
        bank_t = self.bank_of(to)
        legs = [
            Posting(frm, "A", deposit_key(bank_f), -amount),
            Posting(bank_f, "L", f"deposit@{frm.key}", -amount),
            Posting(bank_t, "L", f"deposit@{to.key}", amount),
            Posting(to, "A", deposit_key(bank_t), amount),
        ]
        if bank_f != bank_t:
            legs += [
                Posting(bank_f, "A", reserves_key(), -amount),
                Posting(FED, "L", f"reserves@{bank_f.key}", -amount),
                Posting(FED, "L", f"reserves@{bank_t.key}", amount),
                Posting(bank_t, "A", reserves_key(), amount),
            ]
        self.post(legs, event="transfer", instrument="deposit",
                  src=frm.key, dst=to.key, amount=amount)

    def _transfer_reserves(self, frm: AgentId, to: AgentId, amount: int) -> None:
        legs = [
            Posting(frm, "A", reserves_key(), -amount),
            Posting(FED, "L", f"reserves@{frm.key}", -amount),
            Posting(FED, "L", f"reserves@{to.key}", amount),
            Posting(to, "A", reserves_key(), amount),
        ]
        self.post(legs, event="transfer", instrument="reserves",
                  src=frm.key, dst=to.key, amount=amount)

    def _transfer_coin(self, frm: AgentId, to: AgentId, issuer: AgentId, amount: int) -> None:
        key = coin_key(issuer)
        if frm == issuer:
            legs = [
                Posting(issuer, "L", key, amount),
                Posting(to, "A", key, amount),
            ]
            label = "mint"
        elif to == issuer:
            legs = [
                Posting(frm, "A", key, -amount),
                Posting(issuer, "L", key, -amount),
            ]
            label = "burn"
        else:
            legs = [
                Posting(frm, "A", key, -amount),
                Posting(to, "A", key, amount),
            ]
            label = "transfer"
        self.post(legs, event=label, instrument=key, src=frm.key, dst=to.key, amount=amount)

    # -- treasuries ----------------------------------------------------------

    def price(self, duration: DurationClass) -> int:
        return self.tbill_prices[duration]

    def tbill_value(self, agent: AgentId, duration: DurationClass | None = None) -> int:
        if duration is not None:
            return self.sheet(agent).asset(tbill_key(duration))
        return sum(self.sheet(agent).asset(tbill_key(d)) for d in DurationClass)

    def face_of(self, agent: AgentId, duration: DurationClass) -> int:
        return self.tbill_face.get((agent.key, duration), 0)

    def grant_tbill(self, agent: AgentId, duration: DurationClass, face: int) -> None:
        """Endow an agent with Treasuries (world construction only)."""
        from .money import mul_frac

        value = mul_frac(face, self.price(duration))
        self.post([Posting(agent, "A", tbill_key(duration), value)])
        key = (agent.key, duration)
        self.tbill_face[key] = self.tbill_face.get(key, 0) + face

    def transfer_tbill(self, frm: AgentId, to: AgentId, duration: DurationClass,
                       face: int | None = None, value: int | None = None) -> int:
        """Move Treasuries by face; returns the market value moved.

        Callers may size the trade in market value instead; the face is
        then derived at the current class price.
        """
        from .money import MICRO, mul_div, mul_frac

        price = self.price(duration)
        if face is None:
            face = mul_div(value, MICRO, price)
        face = min(face, self.face_of(frm, duration))
        moved_value = mul_frac(face, price)
        held_value = self.sheet(frm).asset(tbill_key(duration))
        moved_value = min(moved_value, held_value)
        if face <= 0:
            return 0
        self.post([
            Posting(frm, "A", tbill_key(duration), -moved_value),
            Posting(to, "A", tbill_key(duration), moved_value),
        ], event="transfer", instrument=tbill_key(duration),
            src=frm.key, dst=to.key, amount=moved_value, face=face)
        self.tbill_face[(frm.key, duration)] -= face
        if self.tbill_face[(frm.key, duration)] == 0:
            del self.tbill_face[(frm.key, duration)]
        key_to = (to.key, duration)
        self.tbill_face[key_to] = self.tbill_face.get(key_to, 0) + face
        return moved_value

    def remark_tbills(self, duration: DurationClass, new_price: int) -> None:
        """Set a class price and re-derive every position's market value."""
        from .money import mul_frac

        if new_price <= 0:
            raise LedgerError("treasury price must stay positive")
        self.tbill_prices[duration] = new_price
        key = tbill_key(duration)
        entries = sorted(self.tbill_face.items(), key=lambda kv: (kv[0][0], kv[0][1].value))
        for (agent_key, dur), face in entries:
            if dur is not duration:
                continue
            book = self.agents[agent_key]
            old_value = book.asset(key)
            new_value = mul_frac(face, new_price)
            delta = new_value - old_value
            if delta == 0:
                continue
            if new_value == 0:
                book.assets.pop(key, None)
            else:
                book.assets[key] = new_value
            book.equity += delta

    # -- audit & snapshot -----------------------------------------------------

    def audit(self) -> AuditReport:
        checks = []
        checks.append(self._check_double_entry())
        checks.append(self._check_reserve_conservation())
        checks.append(self._check_deposit_matching())
        checks.append(self._check_claim_matching())
        return AuditReport(checks=tuple(checks))

    def _check_double_entry(self) -> AuditCheck:
        for key in sorted(self.agents):
            book = self.agents[key]
            if book.equity != book.total_assets() - book.total_liabilities():
                return AuditCheck("double_entry", False, key,
                                  f"equity {book.equity} != assets-liabilities "
                                  f"{book.total_assets() - book.total_liabilities()}")
        return AuditCheck("double_entry", True)

    def _check_reserve_conservation(self) -> AuditCheck:
        rkey = reserves_key()
        held = sum(b.asset(rkey) for b in self.agents.values())
        fed = self.agents.get(FED.key)
        owed = sum(v for k, v in fed.liabilities.items() if k.startswith("reserves@")) if fed else 0
        if held != owed:
            return AuditCheck("reserve_conservation", False, FED.key,
                              f"reserve assets {held} != central bank liability {owed}")
        return AuditCheck("reserve_conservation", True)

    def _check_deposit_matching(self) -> AuditCheck:
        for key in sorted(self.agents):
            meta = self.meta[key]
            book = self.agents[key]
            if meta["kind"] is AgentKind.BANK:
                continue
            for akey, amount in sorted(book.assets.items()):
                if not akey.startswith("deposit@"):
                    continue
                bank_key = akey.split("@", 1)[1]
                bank = self.agents.get(bank_key)
                if bank is None or self.meta[bank_key]["kind"] is not AgentKind.BANK:
                    return AuditCheck("deposit_matching", False, key,
                                      f"deposit asset at non-bank {bank_key}")
                if bank.liability(f"deposit@{key}") != amount:
                    return AuditCheck("deposit_matching", False, key,
                                      f"deposit {amount} at {bank_key} has liability "
                                      f"{bank.liability(f'deposit@{key}')}")
        for key in sorted(self.agents):
            if self.meta[key]["kind"] is not AgentKind.BANK:
                continue
            for lkey, amount in sorted(self.agents[key].liabilities.items()):
                if not lkey.startswith("deposit@"):
                    continue
                holder_key = lkey.split("@", 1)[1]
                holder = self.agents.get(holder_key)
                if holder is None or holder.asset(f"deposit@{key}") != amount:
                    return AuditCheck("deposit_matching", False, key,
                                      f"orphan deposit liability to {holder_key}")
        return AuditCheck("deposit_matching", True)

    def _check_claim_matching(self) -> AuditCheck:
        """Stablecoin, repo and SRF claims must pair off exactly."""
        coin_assets: dict[str, int] = {}
        coin_liabs: dict[str, int] = {}
        for key in sorted(self.agents):
            book = self.agents[key]
            for akey, amount in book.assets.items():
                if akey.startswith("coin@"):
                    coin_assets[akey] = coin_assets.get(akey, 0) + amount
                elif akey.startswith(("repo@", "srf@")):
                    kind, cpty = akey.split("@", 1)
                    other = self.agents.get(cpty)
                    if other is None or other.liability(f"{kind}@{key}") != amount:
                        return AuditCheck("claim_matching", False, key,
                                          f"unmatched {akey} claim of {amount}")
            for lkey, amount in book.liabilities.items():
                if lkey.startswith("coin@"):
                    coin_liabs[lkey] = coin_liabs.get(lkey, 0) + amount
                elif lkey.startswith(("repo@", "srf@")):
                    kind, cpty = lkey.split("@", 1)
                    other = self.agents.get(cpty)
                    if other is None or other.asset(f"{kind}@{key}") != amount:
                        return AuditCheck("claim_matching", False, key,
                                          f"unmatched {lkey} obligation of {amount}")
        for ckey in sorted(set(coin_assets) | set(coin_liabs)):
            if coin_assets.get(ckey, 0) != coin_liabs.get(ckey, 0):
                return AuditCheck("claim_matching", False, ckey.split("@", 1)[1],
                                  f"coins held {coin_assets.get(ckey, 0)} != "
                                  f"coins outstanding {coin_liabs.get(ckey, 0)}")
        return AuditCheck("claim_matching", True)

    def snapshot(self) -> WorldSnapshot:
        agents = []
        for key in sorted(self.agents):
            book = self.agents[key]
            agents.append({
                "id": key,
                "kind": self.meta[key]["kind"].value,
                "assets": [{"instrument": k, "amount": v}
                           for k, v in sorted(book.assets.items())],
                "liabilities": [{"instrument": k, "amount": v}
                                for k, v in sorted(book.liabilities.items())],
                "equity": book.equity,
            })
        data = {
            "schema": "stablesim.world/1",
            "clock": {"day": self.day, "seq": self.seq},
            "prices": {d.value: p for d, p in sorted(self.tbill_prices.items(), key=lambda kv: kv[0].value)},
            "faces": [{"agent": a, "class": d.value, "face": f}
                      for (a, d), f in sorted(self.tbill_face.items(), key=lambda kv: (kv[0][0], kv[0][1].value))],
            "agents": agents,
        }
        return WorldSnapshot(data=copy.deepcopy(data))


def post_transfer(world: LedgerWorld, frm: AgentId, to: AgentId,
                  instrument: Instrument, amount: int) -> LedgerWorld:
    world.post_transfer(frm, to, instrument, amount)
    return world


def audit(world: LedgerWorld) -> AuditReport:
    return world.audit()


def snapshot(world: LedgerWorld) -> WorldSnapshot:
    return world.snapshot()
