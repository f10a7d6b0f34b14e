"""
Lattice labeling against segment-test labeling
==============================================

The grid labeler evaluates the ball radius once per lattice point (G^2 N
kernel evaluations).  The K-nearest-neighbour adjacency labeler samples m
points on each of N k segments (N k m N evaluations).  This script times
both on subsamples of Iris and prints the operation counts beside the
medians.
"""
from svcgrid import load_iris
from svcgrid.evaluation import bench_labeling, bench_summary, format_table

repeats = 5
iris = load_iris()

# with q = 1200 a 10-flower ball is tiny, so the coarse lattices can miss it entirely
results = bench_labeling(iris, n_ladder=(10, 75, 150), g_ladder=(5, 13, 26, 40), repeats=repeats)
rows = [[s["method"], s["n"], s["g"] or "-", s["op_count"], s["n_clusters"], f"{s['wall_time'] * 1e3:.2f}",
         f"{s['relative_time']:.2f}"] for s in bench_summary(results)]
print(format_table(["method", "n", "g", "ops", "clusters", "median ms", "vs grid"], rows))

# operation counts grow as G^2 N for the grid and N^2 for the adjacency labelers
ops = {(r.method, r.n, r.g): r.op_count for r in results}
print("grid ops, G 13 -> 26:", ops["grid", 150, 26] / ops["grid", 150, 13])
print("knn-adj ops, N 75 -> 150:", ops["knn_adj", 150, 0] / ops["knn_adj", 75, 0])
