"""Deciding q4 by bipartite matching, and building q4 databases from graphs."""

# %%
from cqa.generators import gen_dn, random_q4_db
from cqa.matching import (build_solution_graph, certain_q4, hopcroft_karp, parse_bipartite,
                          q4_bipartite, reduce_sbm, render_bipartite)
from cqa.oracle import certain
from cqa.queries import Q4

db = gen_dn(4)
inst, comps = q4_bipartite(db)
print(f"{len(inst.left)} blocks vs {len(inst.right)} triangles -> certain:", certain_q4(db))

# %% Agreement with the exact oracle on random databases
agree = sum(certain_q4(d) == certain(d, Q4) for d in map(random_q4_db, range(100)))
print("agreement on 100 random databases:", agree)

# %% From a bipartite graph to a database
g = parse_bipartite("""
left s1
left s2
left s3
right t1
right t2
right t3
edge s1 t1
edge s1 t2
edge s2 t2
edge s2 t3
edge s3 t1
edge s3 t3
""")
print(render_bipartite(g))
red = reduce_sbm(g)
print("matching:", hopcroft_karp(g))
print("database facts:", len(red.db), "certain:", certain_q4(red.db))
print("solution graph components:", [len(c) for c in build_solution_graph(red.db).components()])
