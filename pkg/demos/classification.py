"""Complexity verdicts from attack graphs and from the path automaton."""

# %% Self-join-free queries
from cqa.path import build_automaton, counterexample_word, factor_condition, prefix_condition
from cqa.queries import Q1, Q2, Q2_PATH, Q3, Q3_PATH, Q5
from cqa.sjf import build_attack_graph, classify

for name, q in [("q1", Q1), ("q2", Q2), ("q3", Q3), ("q5", Q5)]:
    c = classify(q)
    edges = {f"{a.relation}->{b.relation}": kind for (a, b), kind in c.graph.edges.items()}
    print(f"{name:3} {c.verdict.value:14} {edges}")

print(build_attack_graph(Q2).to_dot())

# %% Path queries: words and their automata
for name, q in [("q2'", Q2_PATH), ("q3'", Q3_PATH)]:
    aut = build_automaton(q)
    print(name, "".join(aut.word), "epsilon moves:", sorted(aut.epsilon))
    print("  factor:", factor_condition(q), " prefix:", prefix_condition(q))
    bad = counterexample_word(q)
    if bad:
        print("  accepted word without the query as a factor:", " ".join(bad))
