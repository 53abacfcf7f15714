"""Running the k-set fixpoint and reading its derivation trace."""

# %%
from cqa import parse_database
from cqa.fixpoint import run_cqk, trace
from cqa.queries import Q2

db = parse_database("R1(a; b)\nR2(b; a)\nR2(b; c)")
res = run_cqk(db, Q2, k=2)
print("accepted:", res.accepted, "rounds:", res.table.rounds)

# %% Round 0 holds the sets that already satisfy the query; later rounds
# add a set once some block cannot be extended without hitting the table.
for round_no, steps in enumerate(trace(res.table)):
    for d in steps:
        how = d.witness.label(db) if d.witness else "satisfies q"
        print(round_no, sorted(str(f) for f in d.kset), "via", how)

# %% The empty set is never reached, which matches the falsifying repair
# that keeps R2(b; c).
print("empty set round:", res.empty_set_round)
