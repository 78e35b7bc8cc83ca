"""Project clustered label embeddings to 2D and splat a signed value heatmap.

Three well-separated Gaussian clusters in 25 dimensions come out as three
distinct blobs in the unit square; each cluster is assigned a signed value
and the heatmap renders as three colored regions (shown here as ASCII art).
"""

import numpy as np

from biaslens.fixtures import cluster_embeddings
from biaslens.projection import project, rasterize_heatmap

table, membership = cluster_embeddings(clusters=3, per_cluster=30, seed=42)
labels = sorted(table.vectors)

projection = project(labels, table, seed=17)
print(f"projected {len(projection.points)} labels; subset hash {projection.subset_hash}")

# mean pairwise distances: within clusters vs between clusters
low = np.array([projection.points[label] for label in labels])
intra, inter = [], []
for i in range(len(labels)):
    for j in range(i + 1, len(labels)):
        d = float(np.linalg.norm(low[i] - low[j]))
        (intra if membership[labels[i]] == membership[labels[j]] else inter).append(d)
print(f"mean intra-cluster distance {np.mean(intra):.3f}, inter {np.mean(inter):.3f}")

# one signed value per cluster: -1, 0, +1
values = {label: float(membership[label] - 1) for label in labels}
grid = rasterize_heatmap(projection, values, bandwidth=0.05, width=60, height=30)

print("\nsigned heatmap (o = negative, # = positive):")
peak = np.abs(grid.intensities).max() + 1e-12
for row in grid.intensities[::-1]:  # print with y increasing upward
    chars = []
    for v in row:
        if abs(v) / peak < 0.05:
            chars.append(" ")
        else:
            chars.append("#" if v > 0 else "o")
    print("".join(chars))
