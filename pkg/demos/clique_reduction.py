"""Deciding k-clique by asking for the Principal's optimal coalition."""
from msbgame import clique_reduction
from msbgame.instances import complete_graph_edges

graphs = {
    "K4": (4, complete_graph_edges(4)),
    "C4": (4, [(0, 1), (1, 2), (2, 3), (3, 0)]),
    "bowtie": (5, [(0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (2, 4)]),
}
for name, (nv, edges) in graphs.items():
    for k in range(2, nv + 1):
        v = clique_reduction(nv, edges, k)
        print(f"{name:<7} k={k}  clique={str(v.has_clique):<5}  W*={v.w_star:.6f}  target={v.w_max:.6f}")
