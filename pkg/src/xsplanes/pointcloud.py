"""Magnified scatter extraction, reference plane meshes and file output.

Magnified clouds keep the output triples whose chosen coordinate u
satisfies ``2**k * u <= 1`` and stretch that coordinate by ``2**k``. The
test runs on raw words (``o <= 2**(64-k)``), so it is exact.
"""

import os
from dataclasses import dataclass

import numpy as np

from xsplanes import _kernels
from xsplanes.f2word import MASK64, WIDTH

AXES = ("x", "y", "z")
DEFAULT_STREAMS = 64
MAX_TRIPLES = 1 << 40
WRAP_JUMP = 0.5


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True)
class MagnifySpec:
    k: int
    axis: str = "x"

    def __post_init__(self):
        if not 0 <= self.k <= 63:
            raise ValueError(f"magnification exponent must be in [0, 63], got {self.k}")
        if self.axis not in AXES:
            raise ValueError(f"axis must be one of {AXES}, got {self.axis!r}")

    @property
    def factor(self):
        return 1 << self.k

    @property
    def limit(self):
        """Largest raw word passing the keep rule."""
        return min(1 << (WIDTH - self.k), MASK64)

    @property
    def axis_index(self):
        return AXES.index(self.axis)


@dataclass
class MagnifiedCloud:
    raw: np.ndarray  # (count, 3) uint64 words, unmagnified
    consumed: int  # triples drawn, all streams together
    spec: MagnifySpec

    def unit_points(self):
        """Points in [0,1]^3 with the chosen axis multiplied by 2**k."""
        pts = self.raw.astype(np.float64) * 2.0**-WIDTH
        pts[:, self.spec.axis_index] *= float(self.spec.factor)
        return pts


def extract_magnified(gen_spec, seed, spec, target, streams=DEFAULT_STREAMS):
    """Collect ``target`` magnified points from ``streams`` interleaved instances.

    Instances are seeded with :func:`xsplanes.generators.lane_seeds` and
    visited round-robin one triple at a time; ``streams=1`` is a single
    plain stream seeded with ``seed``.
    """
    if target < 1:
        raise ValueError("target must be >= 1")
    lanes = gen_spec.lane_arrays(seed, streams)
    max_rounds = -(-MAX_TRIPLES // streams)
    limit = np.uint64(spec.limit)
    if gen_spec.params is None:
        raw, consumed = _kernels.ctl_magnify(lanes[0], spec.axis_index, limit, target, max_rounds)
    else:
        p = gen_spec.params
        raw, consumed = _kernels.xs_magnify(lanes[0], lanes[1], p.a, p.b, p.c,
                                            spec.axis_index, limit, target, max_rounds)
    if len(raw) < target:
        raise CapacityError(f"only {len(raw)} of {target} points after {consumed} triples")
    return MagnifiedCloud(raw=raw, consumed=int(consumed), spec=spec)


@dataclass
class PlaneMesh:
    """Polyline strips of z = sx*(1+2**a)*x + sy*y mod 1 over [0, x_max] x [0, 1].

    Strip vertices are ``(x, y, z)`` with the true (unmagnified) x.
    """

    a: int
    signs: tuple
    x_max: float
    strips: list

    @property
    def name(self):
        sx, sy = ("p" if s == 1 else "m" for s in self.signs)
        return f"plane_{sx}{sy}_a{self.a}"


def parse_sign_pair(text):
    text = text.strip()
    if len(text) != 2 or not set(text) <= {"+", "-"}:
        raise ValueError(f"sign pattern must be two of '+'/'-', got {text!r}")
    return tuple(1 if ch == "+" else -1 for ch in text)


def mesh_z(x, y, a, signs):
    sx, sy = signs
    return np.mod(sx * (1.0 + 2.0**a) * x + sy * y, 1.0)


def _split(line):
    jumps = np.nonzero(np.abs(np.diff(line[:, 2])) > WRAP_JUMP)[0] + 1
    return [part for part in np.split(line, jumps) if len(part) > 1]


def plane_mesh(a, signs, x_max, grid):
    """Wireframe for one plane: grid lines in both directions, cut at wraps."""
    if grid < 2:
        raise ValueError("grid must be >= 2")
    signs = tuple(signs)
    xs = np.linspace(0.0, x_max, grid)
    ys = np.linspace(0.0, 1.0, grid)
    strips = []
    for x in xs:
        line = np.column_stack([np.full(grid, x), ys, mesh_z(x, ys, a, signs)])
        strips.extend(_split(line))
    for y in ys:
        line = np.column_stack([xs, np.full(grid, y), mesh_z(xs, y, a, signs)])
        strips.extend(_split(line))
    return PlaneMesh(a=a, signs=signs, x_max=x_max, strips=strips)


def _fmt(v):
    return format(float(v), ".17g")


def _write(path, text):
    try:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def points_csv(points):
    lines = ["x,y,z"]
    lines += [f"{_fmt(x)},{_fmt(y)},{_fmt(z)}" for x, y, z in points]
    return "\n".join(lines) + "\n"


def mesh_csv(mesh):
    """``x,y,z`` rows in the magnified frame (x / x_max); a blank line ends each strip."""
    blocks = []
    for strip in mesh.strips:
        blocks.append("\n".join(f"{_fmt(x / mesh.x_max)},{_fmt(y)},{_fmt(z)}"
                                for x, y, z in strip))
    return "x,y,z\n" + "\n\n".join(blocks) + ("\n" if blocks else "")


def plot_script(point_file, mesh_files, title="xorshift128+ output triples"):
    """A gnuplot script drawing the scatter and every mesh on one set of axes."""
    parts = []
    if point_file:
        parts.append(f"'{point_file}' every ::1 using 1:2:3 with dots lc rgb '#1f3b73' title 'points'")
    for f in mesh_files:
        parts.append(f"'{f}' every ::1 using 1:2:3 with lines lw 0.5 title '{f[:-4]}'")
    lines = [
        "# gnuplot -p plot.gp",
        "set datafile separator ','",
        f"set title '{title}'",
        "set xrange [0:1]",
        "set yrange [0:1]",
        "set zrange [0:1]",
        "set xlabel 'x (magnified)'",
        "set ylabel 'y'",
        "set zlabel 'z'",
        "set view 60, 30",
    ]
    if parts:
        lines.append("splot " + ", \\\n      ".join(parts))
    return "\n".join(lines) + "\n"


def emit_artifacts(points, meshes, out_dir, formats=("csv", "plotscript"), point_name="points.csv"):
    """Write the point CSV, one CSV per mesh and a plot script; return the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    point_file = None
    mesh_files = []
    if "csv" in formats:
        if points is not None:
            point_file = point_name
            paths.append(_write(os.path.join(out_dir, point_name), points_csv(points)))
        for mesh in meshes:
            fname = mesh.name + ".csv"
            mesh_files.append(fname)
            paths.append(_write(os.path.join(out_dir, fname), mesh_csv(mesh)))
    if "plotscript" in formats:
        paths.append(_write(os.path.join(out_dir, "plot.gp"), plot_script(point_file, mesh_files)))
    return paths


def read_points_csv(path):
    """Inverse of :func:`points_csv`; blank lines are skipped."""
    with open(path) as fh:
        header = fh.readline().strip()
        if header != "x,y,z":
            raise ValueError(f"{path}: unexpected header {header!r}")
        rows = [tuple(float(v) for v in line.split(",")) for line in fh if line.strip()]
    return np.array(rows, dtype=np.float64).reshape(-1, 3)
