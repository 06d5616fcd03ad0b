import math
import os
from fractions import Fraction

import numpy as np
import pytest

from xsplanes import pointcloud as pc
from xsplanes.generators import ControlGenerator, GenSpec, XorShift128Plus, XsParams

P1 = GenSpec(XsParams(23, 17, 26))
CONTROL = GenSpec(None)


def test_magnify_limits():
    assert pc.MagnifySpec(0).limit == 2**64 - 1
    assert pc.MagnifySpec(22).limit == 2**42
    with pytest.raises(ValueError):
        pc.MagnifySpec(64)
    with pytest.raises(ValueError):
        pc.MagnifySpec(3, "w")


@pytest.mark.parametrize("gen", [P1, CONTROL])
def test_no_magnification_keeps_every_triple(gen):
    cloud = pc.extract_magnified(gen, 7, pc.MagnifySpec(0), 500, streams=1)
    assert cloud.consumed == 500
    g = gen.make(7)
    want = g.fill(1500).reshape(-1, 3)
    assert np.array_equal(cloud.raw, want)


def test_single_stream_matches_filter_loop():
    spec = pc.MagnifySpec(6, "y")
    cloud = pc.extract_magnified(P1, 3, spec, 200, streams=1)
    words = XorShift128Plus(P1.params, 3).fill(3 * cloud.consumed).reshape(-1, 3)
    kept = words[words[:, 1] <= np.uint64(spec.limit)]
    assert np.array_equal(cloud.raw, kept)
    assert words[-1, 1] <= spec.limit  # stopped on the last kept triple


def test_interleaved_streams_match_per_stream_loops():
    spec = pc.MagnifySpec(4)
    streams = 5
    cloud = pc.extract_magnified(P1, 11, spec, 300, streams=streams)
    lanes = P1.lane_arrays(11, streams)
    gens = [XorShift128Plus(P1.params, state=(int(lanes[0][j]), int(lanes[1][j]))) for j in range(streams)]
    kept = []
    for i in range(cloud.consumed):
        x, y, z = (gens[i % streams].next_u64() for _ in range(3))
        if x <= spec.limit:
            kept.append([x, y, z])
    assert cloud.raw.tolist() == kept


@pytest.mark.parametrize("gen", [P1, CONTROL])
def test_acceptance_rate(gen):
    k, target = 8, 4000
    cloud = pc.extract_magnified(gen, 2, pc.MagnifySpec(k), target)
    p = 2.0**-k
    # consumed is negative binomial; 4 sigma on its mean
    sd = math.sqrt(target * (1 - p)) / p
    assert abs(cloud.consumed - target / p) <= 4 * sd


def test_unit_points_range():
    cloud = pc.extract_magnified(P1, 1, pc.MagnifySpec(10, "z"), 1000)
    pts = cloud.unit_points()
    assert pts.min() >= 0 and pts.max() <= 1
    assert np.allclose(pts[:, 2], cloud.raw[:, 2].astype(float) * 2.0**-54)


def test_capacity(monkeypatch):
    monkeypatch.setattr(pc, "MAX_TRIPLES", 1000)
    with pytest.raises(pc.CapacityError):
        pc.extract_magnified(CONTROL, 0, pc.MagnifySpec(40), 10)


def test_mesh_example():
    assert pc.mesh_z(2.0**-23, 0.0, 23, (1, 1)) == 2.0**-23
    assert pc.mesh_z(0.0, 0.25, 23, (1, -1)) == 0.75


def test_mesh_points_on_plane():
    mesh = pc.plane_mesh(23, (-1, 1), 2.0**-22, 17)
    for strip in mesh.strips:
        for x, y, z in strip:
            want = (-(1 + 2**23) * Fraction(x) + Fraction(y)) % 1
            assert abs(Fraction(z) - want) < Fraction(1, 10**9)


def test_mesh_strips_are_continuous():
    mesh = pc.plane_mesh(23, (1, 1), 2.0**-22, 65)
    assert mesh.name == "plane_pp_a23"
    assert mesh.strips
    for strip in mesh.strips:
        assert np.all(np.abs(np.diff(strip[:, 2])) <= pc.WRAP_JUMP)


def test_parse_sign_pair():
    assert pc.parse_sign_pair("+-") == (1, -1)
    with pytest.raises(ValueError):
        pc.parse_sign_pair("+")


def test_empty_point_csv_is_header_only(tmp_path):
    paths = pc.emit_artifacts(np.zeros((0, 3)), [], tmp_path)
    assert open(paths[0]).read() == "x,y,z\n"
    assert pc.read_points_csv(paths[0]).shape == (0, 3)


def test_csv_round_trip_exact(tmp_path):
    cloud = pc.extract_magnified(P1, 5, pc.MagnifySpec(3), 100)
    pts = cloud.unit_points()
    path = pc.emit_artifacts(pts, [], tmp_path)[0]
    assert np.array_equal(pc.read_points_csv(path), pts)


def test_artifact_set_and_determinism(tmp_path):
    meshes = [pc.plane_mesh(23, s, 2.0**-22, 9) for s in ((1, 1), (1, -1), (-1, 1), (-1, -1))]
    pts = pc.extract_magnified(P1, 5, pc.MagnifySpec(3), 50).unit_points()
    first = pc.emit_artifacts(pts, meshes, tmp_path / "a")
    second = pc.emit_artifacts(pts, meshes, tmp_path / "b")
    assert len(first) == 1 + 4 + 1
    for p, q in zip(first, second):
        assert open(p, "rb").read() == open(q, "rb").read()
    script = open(first[-1]).read()
    assert "points.csv" in script and "plane_mm_a23.csv" in script


def test_write_error_names_path(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError, match="file"):
        pc.emit_artifacts(np.zeros((1, 3)), [], os.path.join(blocker, "sub"))


def test_control_generator_words():
    cloud = pc.extract_magnified(CONTROL, 9, pc.MagnifySpec(0), 4, streams=1)
    assert cloud.raw.ravel().tolist() == ControlGenerator(9).fill(12).tolist()
