"""Search the demo actions for crossings, then extract and verify a nesting
witness from the tower action."""

from pathlib import Path

from critreg.cli import read_action
from critreg.dynamics import (
    NonConradian,
    centralizer_obstruction,
    conradian_diagnostic,
    extract_nesting_witness,
    find_crossed_pair,
)
from critreg.regularity import verify_nesting_witness

HERE = Path(__file__).resolve().parent


def main():
    for name in ("crossed.action", "nested.action"):
        af = read_action(str(HERE / name))
        action = af.action()
        verdict = conradian_diagnostic(action)
        if isinstance(verdict, NonConradian):
            chain = verdict.witness
            print(f"{name}: two-chain {chain.J1} ({chain.g1}) and {chain.J2} ({chain.g2})")
        else:
            print(f"{name}: no crossing up to word length {verdict.budget}")
        ping = find_crossed_pair(action, "ping")
        if ping is not None:
            print(f"  ping pair {ping.f}, {ping.g} on [{ping.a}, {ping.b}]")

    af = read_action(str(HERE / "tower3.action"))
    c = af.generators[af.equivariant[0]]
    tower = af.action()
    print(f"tower3: centralizer obstruction {centralizer_obstruction(c, tower)}")
    w = extract_nesting_witness(tower, 2, c)
    rep = verify_nesting_witness(w, 30, 1e-6)
    print(f"extracted (2,1)-nesting accepted: {rep.accepted}, partial sum {rep.partial_sum:.6f}")


if __name__ == "__main__":
    main()
