"""
Clustering Iris with the grid labeler
=====================================

Fit a Gaussian ball on the correspondence-analysis plane of the Iris
measurements, label it on a 13 x 13 lattice and compare the clusters with
the species.
"""
import sys
from pathlib import Path

from svcgrid import PRESETS, SvcParams, find_svc_model, load_iris
from svcgrid.evaluation import class_distribution, precision
from svcgrid.plot import save_svg

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_output")
out.mkdir(exist_ok=True)

# 150 flowers, 4 measurements; the row names carry the species tag (1, 2, 3)
iris = load_iris()
print(iris.rows, "rows,", iris.cols, "columns:", ", ".join(iris.col_names))

# the preset: nu = 0.7, q = 1200, G = 13, k = 1, COA plane (cx = cy = 0)
params = SvcParams(**PRESETS["iris-fig2"])
result = find_svc_model(iris, params)
print(result.summary())

# majority-species precision; unclassified points count against it
report = precision(result.assignment, iris.class_tags)
print(report.to_text())
print(class_distribution(result.assignment, iris.class_tags).to_text())

# the lattice itself: 0 outside the ball, otherwise the region id
print(result.grid_labeling.num_points.T[::-1])

# more voting lattice points per flower
for k in (1, 2, 3):
    rep = precision(result.relabel(k=k).assignment, iris.class_tags)
    print(f"k={k}: precision {rep.overall_precision:.3f}, unclassified {rep.unclassified}")

# the same ball, labeled by segment tests instead of the lattice; with nu = 0.7
# most flowers lie outside the ball, so many segments between them leave it
print(f"bounded support vectors: {len(result.model.bsv_indices)} of {iris.rows}")
for labeler, k in (("knn_adj", 3), ("mst_adj", 1)):
    other = result.relabel(labeler, k=k)
    print(f"{labeler}: {other.n_clusters} clusters, {other.assignment.unclassified} unclustered")

result.save(out / "iris.json")
save_svg(result, out / "iris.svg")
print("wrote", out / "iris.json", "and", out / "iris.svg")
