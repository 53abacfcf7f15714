"""The Dn family: certain for q4, yet missed by the fixpoint at k = n - 2."""

# %%
import time

from cqa.core import count_repairs
from cqa.fixpoint import run_cqk, run_cqk_plus
from cqa.generators import dn_instance, is_k_obstruction, obstruction_for_blocks
from cqa.matching import build_solution_graph
from cqa.oracle import certain
from cqa.queries import Q4

for n in (4, 5):
    inst = dn_instance(n)
    db = inst.db
    t0 = time.perf_counter()
    ok = certain(db, Q4)
    print(f"D{n}: {len(db)} facts, {len(db.blocks)} blocks, {count_repairs(db)} repairs, "
          f"certain={ok} ({time.perf_counter() - t0:.3f}s)")
    print("   triangles:", len(build_solution_graph(db).triangles()))
    print("   extended fixpoint k=%d:" % (n - 2), run_cqk_plus(db, Q4, n - 2).accepted)
    print("   plain fixpoint    k=%d:" % (n - 2), run_cqk(db, Q4, n - 2).accepted)

# %% An obstruction set: a partial repair the extended fixpoint never derives
inst = dn_instance(4)
blocks = list(inst.db.block_index)[:2]
w = obstruction_for_blocks(inst, blocks)
print([inst.name(f) for f in sorted(w)], "obstruction:", is_k_obstruction(w, inst))
