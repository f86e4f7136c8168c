#!/usr/bin/env python3
"""Regenerate the shipped reference configs in configs/.

The diagnostics pair (stretch 3, axes at pi/4) feeds the domain and
basic-set audits, its degree-2 symmetric lift the irreducible SL(3)
diagnostics, a block-triangular embedding the reducible negative control,
and an asymmetric long-period pair (per-letter periods 5.5 and 5.5*phi)
the counting/zeta surrogates near the convergence abscissa.
"""

import math
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from anosovlab import gallery as ga
from anosovlab import groups as gr

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"

GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


def mat_line(m: np.ndarray) -> str:
    return " ".join(repr(float(x)) for x in m.ravel())


def write(name: str, text: str) -> None:
    path = CONFIGS / name
    path.write_text(text, encoding="ascii")
    print("wrote", path)


def diag_pair() -> gr.GeneratorSet:
    return ga.schottky_sl2(3.0).gens


def zeta_pair() -> gr.GeneratorSet:
    c0 = 5.5
    g1 = np.diag([math.exp(c0), math.exp(-c0)])
    c, s = math.cos(math.pi / 4), math.sin(math.pi / 4)
    rot = np.array([[c, -s], [s, c]])
    g2 = rot @ np.diag([math.exp(c0 * GOLDEN), math.exp(-c0 * GOLDEN)]) @ rot.T
    gens = gr.generator_set(["a", "b"], [g1, g2])
    ga.certify_ping_pong(gens)  # refuse to ship an uncertified pair
    return gens


def main() -> None:
    CONFIGS.mkdir(exist_ok=True)
    base = diag_pair()
    sym3 = ga.symmetric_power(base, 3)
    barbot = ga.barbot_block(base)
    zeta = zeta_pair()

    write("schottky_sl2.cfg", f"""\
# Reference Schottky pair in SL(2,R): diagonal stretch 3 and its conjugate
# by a quarter-turn rotation; certified ping-pong.
[run]
dimension = 2
presentation = free
seed = 7

[generators]
labels = a b
a = {mat_line(base.mats[0].a)}
b = {mat_line(base.mats[1].a)}

[words]
radius = 8
class_radius = 14

[atlas]
depth = 6

[count]
grid_points = 120
""")

    write("schottky_sym3.cfg", f"""\
# Degree-2 symmetric-power lift of the reference pair: the irreducible
# SL(3,R) example driving the basic-set diagnostics.
[run]
dimension = 3
presentation = free
seed = 7

[generators]
labels = a b
a = {mat_line(sym3.mats[0].a)}
b = {mat_line(sym3.mats[1].a)}

[words]
radius = 6
class_radius = 8

[atlas]
depth = 6

[audit]
t_grid = 0.0 2.0 4.0 6.0 8.0 10.0
delta_grid = {" ".join(repr(float(x)) for x in np.geomspace(0.5, 2.0, 8))}
eps_grid = {" ".join(repr(float(x)) for x in np.geomspace(0.5, 2.0, 8))}
chart_radius = 2.0
refine_levels = 5
slnic_eps = 2.0
slnic_d0 = 1.0
ball_radius = 3
properness_radius = 6
n_basic_points = 50
""")

    write("barbot_control.cfg", f"""\
# Reducible block-triangular embedding of the reference pair into SL(3,R):
# the negative control for the irreducibility-sensitive probes.
[run]
dimension = 3
presentation = free
seed = 7

[generators]
labels = a b
a = {mat_line(barbot.mats[0].a)}
b = {mat_line(barbot.mats[1].a)}

[words]
radius = 6
class_radius = 8

[atlas]
depth = 6

[audit]
t_grid = 0.0 2.0 4.0 6.0 8.0 10.0
delta_grid = {" ".join(repr(float(x)) for x in np.geomspace(0.5, 2.0, 8))}
eps_grid = {" ".join(repr(float(x)) for x in np.geomspace(0.5, 2.0, 8))}
chart_radius = 2.0
refine_levels = 5
slnic_eps = 2.0
slnic_d0 = 1.0
ball_radius = 3
properness_radius = 6
n_basic_points = 50
""")

    write("zeta_long.cfg", f"""\
# Asymmetric long-period pair (per-letter periods 5.5 and 5.5*golden):
# pushes the enumerable truncation deep enough that the pole-compensated
# product stabilizes at s = h + 0.05.
[run]
dimension = 2
presentation = free
seed = 7

[generators]
labels = a b
a = {mat_line(zeta.mats[0].a)}
b = {mat_line(zeta.mats[1].a)}

[words]
radius = 8
class_radius = 14

[count]
grid_points = 140

[zeta]
im_max = 20.0
im_points = 81
re_offset = 0.1
pole_offset = 0.05
""")

    write("geometry.cfg", """\
# Geometry gallery checks need no generators: signature and sample counts
# for the pseudo-Riemannian and Hilbert cross-checks.
[run]
dimension = 3
seed = 7

[geometry]
p = 2
q = 1
dimension = 3
samples = 1000
""")


if __name__ == "__main__":
    main()
