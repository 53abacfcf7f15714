"""The pair fixpoint for path queries, checked against the k-set fixpoint."""

# %%
from cqa.fixpoint import run_cqk
from cqa.generators import gen_random, profile_for
from cqa.oracle import certain
from cqa.path import run_n_fixpoint
from cqa.queries import Q2_PATH

rows = []
for seed in range(30):
    db = gen_random(profile_for(Q2_PATH, n_blocks=7, domain_size=4, seed=seed,
                                plant=Q2_PATH, n_plant=seed % 2))
    pairs, _ = run_n_fixpoint(db, Q2_PATH)
    rows.append((seed, len(db), pairs, run_cqk(db, Q2_PATH, 6).accepted, certain(db, Q2_PATH)))

print("seed facts pairs kset oracle")
for row in rows:
    print(*row)
print("all agree:", all(r[2] == r[3] == r[4] for r in rows))

# %% The table itself: (constant, prefix length) pairs and their rounds
ok, table = run_n_fixpoint(db, Q2_PATH)
print("\n".join(table.render()[:10]))
