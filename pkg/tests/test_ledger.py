import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stablesim.ledger import (FED, AgentId, AgentKind, DurationClass, Instrument,
                              InstrumentKind, InsufficientPosition, LedgerWorld,
                              Posting, UnknownAgent, coin_key, deposit_key,
                              reserves_key)

BANK_A = AgentId(AgentKind.BANK, 0)
BANK_B = AgentId(AgentKind.BANK, 1)
ISSUER = AgentId(AgentKind.ISSUER, 0)
HOLDER = AgentId(AgentKind.HOLDER, 0)


def endow_deposit(world, agent, amount):
    bank = world.bank_of(agent)
    world.post([
        Posting(FED, "A", "govt", amount),
        Posting(FED, "L", f"reserves@{bank.key}", amount),
        Posting(bank, "A", reserves_key(), amount),
        Posting(bank, "L", f"deposit@{agent.key}", amount),
        Posting(agent, "A", deposit_key(bank), amount),
    ])


def two_bank_world():
    world = LedgerWorld()
    world.add_agent(FED)
    world.add_agent(BANK_A)
    world.add_agent(BANK_B)
    world.add_agent(ISSUER, bank=BANK_B)
    world.add_agent(HOLDER, bank=BANK_A)
    endow_deposit(world, HOLDER, 5_000_00)
    endow_deposit(world, ISSUER, 1_000_00)
    return world


def deposit_total(world):
    return sum(v for key in sorted(world.agents)
               for k, v in world.agents[key].liabilities.items()
               if k.startswith("deposit@"))


def test_zero_transfer_leaves_world_unchanged():
    world = two_bank_world()
    before = world.snapshot().to_json()
    world.post_transfer(HOLDER, ISSUER, Instrument(InstrumentKind.DEPOSIT), 0)
    assert world.snapshot().to_json() == before


def test_reserve_transfer_conserves_central_bank_liability():
    world = two_bank_world()
    total_before = world.sheet(FED).total_liabilities()
    world.post_transfer(BANK_A, BANK_B, Instrument(InstrumentKind.RESERVES), 100_00)
    assert world.sheet(BANK_A).asset(reserves_key()) == 5_000_00 - 100_00
    assert world.sheet(BANK_B).asset(reserves_key()) == 1_000_00 + 100_00
    assert world.sheet(FED).total_liabilities() == total_before
    assert world.audit().ok


def test_interbank_deposit_payment_replays_cross_bank_flow():
    # holder at bank A pays issuer at bank B: reserves follow the deposit
    world = two_bank_world()
    deposits_before = deposit_total(world)
    world.post_transfer(HOLDER, ISSUER, Instrument(InstrumentKind.DEPOSIT), 1_000_00)
    assert world.sheet(HOLDER).asset(deposit_key(BANK_A)) == 4_000_00
    assert world.sheet(ISSUER).asset(deposit_key(BANK_B)) == 2_000_00
    assert world.sheet(BANK_A).asset(reserves_key()) == 4_000_00
    assert world.sheet(BANK_B).asset(reserves_key()) == 2_000_00
    assert deposit_total(world) == deposits_before
    assert world.audit().ok


def test_insufficient_deposit_is_atomic():
    world = two_bank_world()
    before = world.snapshot().to_json()
    with pytest.raises(InsufficientPosition):
        world.post_transfer(ISSUER, HOLDER, Instrument(InstrumentKind.DEPOSIT),
                            99_999_00)
    assert world.snapshot().to_json() == before


def test_unknown_agent():
    world = two_bank_world()
    ghost = AgentId(AgentKind.HOLDER, 9)
    with pytest.raises(UnknownAgent):
        world.post_transfer(ghost, ISSUER, Instrument(InstrumentKind.DEPOSIT), 1)


def test_coin_mint_transfer_burn_cycle():
    world = two_bank_world()
    coin = Instrument(InstrumentKind.STABLECOIN, issuer=ISSUER)
    world.post_transfer(ISSUER, HOLDER, coin, 500_00)
    assert world.sheet(ISSUER).liability(coin_key(ISSUER)) == 500_00
    assert world.sheet(HOLDER).asset(coin_key(ISSUER)) == 500_00
    world.post_transfer(HOLDER, ISSUER, coin, 200_00)
    assert world.sheet(ISSUER).liability(coin_key(ISSUER)) == 300_00
    assert world.audit().ok


def test_fresh_world_audit_passes():
    report = two_bank_world().audit()
    assert report.ok
    assert [c.name for c in report.checks] == [
        "double_entry", "reserve_conservation", "deposit_matching",
        "claim_matching"]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3),
                          st.integers(0, 400_00)), max_size=30))
def test_random_transfer_sequences_keep_audit_green(moves):
    world = two_bank_world()
    coin = Instrument(InstrumentKind.STABLECOIN, issuer=ISSUER)
    world.post_transfer(ISSUER, HOLDER, coin, 2_000_00)
    agents = [HOLDER, ISSUER, BANK_A, BANK_B]
    for a, b, amount in moves:
        frm, to = agents[a], agents[b]
        try:
            if frm.kind is AgentKind.BANK or to.kind is AgentKind.BANK:
                if frm.kind is AgentKind.BANK and to.kind is AgentKind.BANK:
                    world.post_transfer(frm, to, Instrument(InstrumentKind.RESERVES),
                                        amount)
                continue
            world.post_transfer(frm, to, Instrument(InstrumentKind.DEPOSIT), amount)
        except InsufficientPosition:
            pass
        assert world.audit().ok


def test_corrupted_deposit_fails_matching_and_names_agent():
    world = two_bank_world()
    world.sheet(BANK_A).liabilities[f"deposit@{HOLDER.key}"] -= 1_00
    report = world.audit()
    failed = {c.name: c for c in report.checks if not c.passed}
    assert "deposit_matching" in failed
    assert failed["deposit_matching"].agent in (HOLDER.key, BANK_A.key)


def test_corrupted_position_fails_double_entry():
    world = two_bank_world()
    world.sheet(HOLDER).assets[deposit_key(BANK_A)] += 7
    report = world.audit()
    assert not report.ok
    assert any(c.name == "double_entry" and c.agent == HOLDER.key
               for c in report.failures())


def test_snapshot_is_immutable_and_byte_stable():
    world = two_bank_world()
    snap1 = world.snapshot()
    snap2 = world.snapshot()
    assert snap1.to_json() == snap2.to_json()
    equity_before = snap1.agent(HOLDER.key)["equity"]
    world.post_transfer(HOLDER, ISSUER, Instrument(InstrumentKind.DEPOSIT), 100_00)
    assert snap1.agent(HOLDER.key)["equity"] == equity_before
    assert snap1.to_json() != world.snapshot().to_json()


def test_tbill_grant_transfer_and_mark():
    world = two_bank_world()
    world.grant_tbill(ISSUER, DurationClass.BILL, 10_000_00)
    assert world.tbill_value(ISSUER, DurationClass.BILL) == 10_000_00
    world.remark_tbills(DurationClass.BILL, 990_000)
    assert world.tbill_value(ISSUER, DurationClass.BILL) == 9_900_00
    assert world.audit().ok
    moved = world.transfer_tbill(ISSUER, HOLDER, DurationClass.BILL, face=4_000_00)
    assert moved == 3_960_00
    assert world.face_of(HOLDER, DurationClass.BILL) == 4_000_00
    assert world.audit().ok
