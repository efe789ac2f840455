"""Riesz energy of Cantor approximations on either side of the dimension.

Below log 2 / log 3 the energies settle; above it they keep growing.
"""
import math

from frostman_kit.measures import energy_integral, generate_example

DIM = math.log(2) / math.log(3)

print("level  " + "  ".join(f"s={s:.3f}" for s in (DIM - 0.15, DIM - 0.08, DIM + 0.08, DIM + 0.15)))
for level in range(3, 10):
    mu = generate_example("cantor", level=level)
    row = [energy_integral(mu, s) for s in (DIM - 0.15, DIM - 0.08, DIM + 0.08, DIM + 0.15)]
    print(f"{level:5d}  " + "  ".join(f"{v:9.3f}" for v in row))
