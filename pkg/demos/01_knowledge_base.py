"""Build a small knowledge base, chain a few rules, and close a class.

The library keeps three boxes: terminological axioms (T-Box),
timestamped facts (A-Box), and Horn rules over known individuals
(R-Box).  Membership is three-valued until a class is explicitly
closed; closing fixes the extension so that absence means false.
"""

from ontoflux.io import parse_ontology
from ontoflux.kb import (
    EntityName,
    Truth,
    close_class,
    entailed_members,
    is_member,
    saturate,
)

DOCUMENT = """
namespace shop

class shop:Order
class shop:RushOrder
class shop:Customer
property shop:placed_by

subclass shop:RushOrder shop:Order
domain shop:placed_by shop:Order
range shop:placed_by shop:Customer

assert RushOrder(o1) @ 0.5
assert placed_by(o2, carol) @ 1.0
rule r1: Order(x), placed_by(x, y) -> Customer(y)
"""


def main() -> None:
    kb = parse_ontology(DOCUMENT)
    order = EntityName("shop", "Order")
    customer = EntityName("shop", "Customer")
    carol = EntityName("i", "carol")

    print("asserted facts:")
    for atom, at in sorted(kb.abox.items(), key=lambda kv: kv[1]):
        print(f"  {atom} @ {at}")

    # forward chaining: the subclass axiom lifts o1 into Order, the
    # domain axiom lifts o2, and then rule r1 fires on (o2, carol)
    derived = saturate(kb) - set(kb.abox)
    print("\nderived facts:")
    for atom in sorted(derived, key=str):
        print(f"  {atom}")

    print("\nOrder members:", sorted(n.local for n in entailed_members(kb, order)))

    # open world: an individual we never mentioned is unknown, not false
    ghost = EntityName("i", "ghost")
    print("\nbefore closing Customer:")
    print("  carol in Customer:", is_member(kb, carol, customer))
    print("  ghost in Customer:", is_member(kb, ghost, customer))

    kb = close_class(kb, customer, now=2.0)
    print("after closing Customer at t=2.0:")
    print("  carol in Customer:", is_member(kb, carol, customer))
    print("  ghost in Customer:", is_member(kb, ghost, customer))
    assert is_member(kb, ghost, customer) is Truth.FALSE


if __name__ == "__main__":
    main()
