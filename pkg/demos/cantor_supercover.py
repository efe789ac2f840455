"""Supercover the middle-thirds Cantor set and inspect the label sums.

Run with ``python demos/cantor_supercover.py``.
"""
import math

from frostman_kit.covering import near_optimal_cover, supercover_bounded, supercover_geometric
from frostman_kit.gauge import as_gauge
from frostman_kit.geometry import is_supercovering
from frostman_kit.measures import cantor_cloud

ALPHA = math.log(2) / math.log(3)
EPS = 0.1

cloud = cantor_cloud(6)
print(f"Cantor level 6: {len(cloud)} points, resolution {cloud.resolution:.2e}")

# a cheap epsilon-cover gives the premeasure budget a
base = near_optimal_cover(cloud, EPS, ALPHA, seed=0, iterations=100, pad=cloud.resolution)
a = 1.5 * math.fsum(as_gauge(ALPHA)(base.radii))
print(f"near-optimal cover: {len(base)} balls, budget a = {a:.4f}")

fam, rep = supercover_geometric(cloud, ALPHA, EPS, a, seed=0)
print(f"geometric: {len(fam)} balls in {fam.label_count} labels, q = {rep.decay_ratio_q:.4f}")
print(f"  supercovering: {is_supercovering(cloud, fam)[0]}")
for j, s in enumerate(rep.per_label_sums[:6], start=1):
    print(f"  label {j}: sum {s:.3e}  bound {rep.constants['C'] * rep.decay_ratio_q ** j * a:.3e}")

fam, rep = supercover_bounded(cloud, ALPHA, EPS, a, seed=0)
print(f"bounded: {len(fam)} balls in {fam.label_count} labels, max label sum {max(rep.per_label_sums):.3e}")
print(f"  supercovering: {is_supercovering(cloud, fam)[0]}")
