"""Moving the D4 hardness from q4 to the self-join-free query q5."""

# %%
from cqa import render_database
from cqa.fixpoint import run_cqk
from cqa.generators import gen_dn, q4_to_q5
from cqa.oracle import certain
from cqa.queries import Q5

d = q4_to_q5(gen_dn(4))
print(render_database(d).splitlines()[:6], "...")
print("facts:", len(d), "blocks:", len(d.blocks))
print("certain:", certain(d, Q5))
print("fixpoint with k=2 accepts:", run_cqk(d, Q5, 2).accepted)
