"""Repairs of an inconsistent database and the exact certainty check."""

# %% A database with one conflicting block
from cqa import parse_database, render_database, repairs, solutions
from cqa.oracle import certain, counterexample_repair, minimal_repairs
from cqa.queries import Q2

db = parse_database("""
R1(a; b)
R2(b; a)
R2(b; c)   # same key as the fact above
""")
print(render_database(db))
print("blocks:", [len(b) for b in db.blocks])

# %% Every repair keeps one fact per block
for r in repairs(db):
    facts = sorted(str(f) for f in r)
    print(facts, "solutions:", len(solutions(r.facts, Q2)))

# %% The query holds in one repair but not the other
print("certain:", certain(db, Q2))
print("falsifying repair:", [str(f) for f in counterexample_repair(db, Q2)])
print("repairs with fewest solutions:", len(minimal_repairs(db, Q2)))
