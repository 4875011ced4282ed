"""File format round-trips and parse error reporting."""

import numpy as np
import pytest

from ttckit import (
    CameraIntrinsics,
    GridSpec,
    InvalidInput,
    Scenario,
    SceneObject,
    TrackObservation,
    collision_map,
    preset_approach_45deg,
    orientation_error_sweep,
    simulate,
)
from ttckit.fileio import (
    TRACKS_HEADER,
    jsonify,
    read_json,
    read_scenario,
    read_tracks_csv,
    truth_document,
    write_collision_map_csv,
    write_json,
    write_scenario,
    write_sensitivity_csv,
    write_tracks_csv,
)


def sample_tracks():
    t1 = TrackObservation(
        frames=(0, 1, 2),
        positions=np.array([[10.0, 20.0], [11.5, 19.25], [13.0625, 18.5]]),
    )
    t2 = TrackObservation(
        frames=(3, 4), positions=np.array([[-5.0, 0.125], [-4.0, 0.25]])
    )
    return [t1, t2]


def sample_scenario():
    intr = CameraIntrinsics(
        focal_px=700.0, principal_point=(320.0, 240.0), image_size=(640, 480)
    )
    objects = (
        SceneObject("a", np.array([[1.0, 0.5, 20.0], [1.2, 0.4, 21.0]]), np.array([0.1, 0.0, -1.5])),
        SceneObject("b", np.array([[-2.0, 0.2, 24.0]]), np.array([-0.45, 0.05, -1.8])),
    )
    return Scenario(
        intrinsics=intr,
        objects=objects,
        camera_velocity=np.array([0.0, 0.0, 0.25]),
        frame_count=9,
        pixel_noise_sigma=0.3,
        rng_seed=17,
    )


class TestTracksCsv:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "tracks.csv"
        tracks = sample_tracks()
        write_tracks_csv(path, tracks, ids=["a-0", "b-1"])
        ids, back = read_tracks_csv(path)
        assert ids == ["a-0", "b-1"]
        for orig, read in zip(tracks, back):
            assert read.frames == orig.frames
            assert np.array_equal(read.positions, orig.positions)  # repr round-trip

    def test_default_numeric_ids_and_none_skipped(self, tmp_path):
        path = tmp_path / "tracks.csv"
        tracks = [sample_tracks()[0], None, sample_tracks()[1]]
        write_tracks_csv(path, tracks)
        ids, back = read_tracks_csv(path)
        assert ids == ["0", "2"]
        assert len(back) == 2

    def test_id_count_mismatch(self, tmp_path):
        with pytest.raises(InvalidInput):
            write_tracks_csv(tmp_path / "t.csv", sample_tracks(), ids=["only-one"])

    def test_comma_in_id_rejected(self, tmp_path):
        with pytest.raises(InvalidInput):
            write_tracks_csv(tmp_path / "t.csv", sample_tracks(), ids=["a,b", "c"])

    def test_header_checked(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("wrong,header,entirely\n")
        with pytest.raises(InvalidInput, match="line 1"):
            read_tracks_csv(path)

    def test_field_count_reported_with_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(f"{TRACKS_HEADER}\nx,0,1.0\n")
        with pytest.raises(InvalidInput, match="line 2"):
            read_tracks_csv(path)

    def test_bad_number_reported_with_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(f"{TRACKS_HEADER}\nx,0,1.0,2.0\nx,one,1.0,2.0\n")
        with pytest.raises(InvalidInput, match="line 3"):
            read_tracks_csv(path)

    def test_non_finite_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(f"{TRACKS_HEADER}\nx,0,inf,2.0\n")
        with pytest.raises(InvalidInput, match="line 2"):
            read_tracks_csv(path)

    def test_non_increasing_frames_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(f"{TRACKS_HEADER}\nx,1,1.0,2.0\nx,1,1.5,2.0\n")
        with pytest.raises(InvalidInput, match="track 'x'"):
            read_tracks_csv(path)

    def test_frame_gap_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(f"{TRACKS_HEADER}\nx,0,1.0,2.0\nx,2,1.5,2.0\n")
        with pytest.raises(InvalidInput, match="track 'x'"):
            read_tracks_csv(path)

    def test_interleaved_rows_group_by_id(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text(
            f"{TRACKS_HEADER}\n"
            "b,0,1.0,1.0\n"
            "a,5,2.0,2.0\n"
            "b,1,1.5,1.0\n"
            "a,6,2.5,2.0\n"
        )
        ids, tracks = read_tracks_csv(path)
        assert ids == ["b", "a"]  # first-appearance order
        assert tracks[1].frames == (5, 6)

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text(f"{TRACKS_HEADER}\n\nx,0,1.0,2.0\n\nx,1,2.0,3.0\n")
        ids, tracks = read_tracks_csv(path)
        assert ids == ["x"]
        assert len(tracks[0]) == 2

    def test_byte_identical_rewrites(self, tmp_path):
        p1, p2 = tmp_path / "1.csv", tmp_path / "2.csv"
        write_tracks_csv(p1, sample_tracks())
        write_tracks_csv(p2, sample_tracks())
        assert p1.read_bytes() == p2.read_bytes()
        assert p1.read_bytes().endswith(b"\n")
        assert b"\r" not in p1.read_bytes()


class TestScenarioJson:
    def test_round_trip(self, tmp_path):
        path = tmp_path / "scene.json"
        scenario = sample_scenario()
        write_scenario(path, scenario)
        back = read_scenario(path)
        assert back.intrinsics.focal_px == scenario.intrinsics.focal_px
        assert back.intrinsics.principal_point == scenario.intrinsics.principal_point
        assert back.intrinsics.image_size == scenario.intrinsics.image_size
        assert back.frame_count == scenario.frame_count
        assert back.pixel_noise_sigma == scenario.pixel_noise_sigma
        assert back.rng_seed == scenario.rng_seed
        assert np.array_equal(back.camera_velocity, scenario.camera_velocity)
        assert len(back.objects) == 2
        for bo, so in zip(back.objects, scenario.objects):
            assert bo.object_id == so.object_id
            assert np.array_equal(bo.points, so.points)
            assert np.array_equal(bo.velocity, so.velocity)

    def test_round_trip_simulates_identically(self, tmp_path):
        path = tmp_path / "scene.json"
        scenario = sample_scenario()
        write_scenario(path, scenario)
        tracks_a, _ = simulate(scenario)
        tracks_b, _ = simulate(read_scenario(path))
        for a, b in zip(tracks_a, tracks_b):
            assert np.array_equal(a.positions, b.positions)

    def test_byte_identical_and_sorted(self, tmp_path):
        p1, p2 = tmp_path / "1.json", tmp_path / "2.json"
        write_scenario(p1, sample_scenario())
        write_scenario(p2, sample_scenario())
        data = p1.read_bytes()
        assert data == p2.read_bytes()
        assert data.endswith(b"\n")
        assert b"\r" not in data
        text = data.decode()
        assert text.index('"camera_velocity"') < text.index('"frame_count"')

    def test_missing_file(self, tmp_path):
        with pytest.raises(InvalidInput):
            read_scenario(tmp_path / "nope.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(InvalidInput):
            read_scenario(path)

    def test_wrong_schema(self, tmp_path):
        path = tmp_path / "bad.json"
        write_json(path, {"schema": 2})
        with pytest.raises(InvalidInput, match="schema"):
            read_scenario(path)

    def test_missing_field_named(self, tmp_path):
        path = tmp_path / "bad.json"
        write_json(
            path,
            {
                "schema": 1,
                "intrinsics": {"focal_px": 700.0, "principal_point": [320.0, 240.0]},
                "objects": [{"id": "a", "points": [[0.0, 0.0, 5.0]]}],
                "frame_count": 4,
            },
        )
        with pytest.raises(InvalidInput, match="velocity"):
            read_scenario(path)

    def test_bad_intrinsics_reported(self, tmp_path):
        path = tmp_path / "bad.json"
        write_json(
            path,
            {
                "schema": 1,
                "intrinsics": {"focal_px": -1.0, "principal_point": [320.0, 240.0]},
                "objects": [],
                "frame_count": 4,
            },
        )
        with pytest.raises(InvalidInput):
            read_scenario(path)


class TestJsonHelpers:
    def test_jsonify_numpy(self):
        doc = jsonify(
            {
                "arr": np.array([[1.0, 2.0]]),
                "scalar": np.float64(3.5),
                "int": np.int64(7),
                "flag": np.bool_(True),
                "nested": (np.int32(1), [np.float32(0.5)]),
            }
        )
        assert doc == {
            "arr": [[1.0, 2.0]],
            "scalar": 3.5,
            "int": 7,
            "flag": True,
            "nested": [1, [0.5]],
        }

    def test_write_json_rejects_nan(self, tmp_path):
        with pytest.raises(ValueError):
            write_json(tmp_path / "bad.json", {"x": float("nan")})

    def test_read_back(self, tmp_path):
        path = tmp_path / "doc.json"
        write_json(path, {"b": 1, "a": [1, 2]})
        assert read_json(path) == {"a": [1, 2], "b": 1}


class TestTruthDocument:
    def test_document_shape(self, tmp_path):
        scenario = sample_scenario()
        tracks, truth = simulate(scenario)
        ids = [f"t{i}" for i in range(len(tracks))]
        doc = truth_document(truth, ids)
        assert doc["schema"] == 1
        assert doc["frame_count"] == scenario.frame_count
        assert len(doc["points"]) == len(tracks)
        first = doc["points"][0]
        assert first["track_id"] == "t0"
        assert first["object_id"] == "a"
        assert first["label"] == "Approaching"
        # document must be writable as JSON (no NaN, numpy gone)
        write_json(tmp_path / "truth.json", doc)

    def test_constant_bearing_nulls(self, tmp_path):
        intr = CameraIntrinsics(focal_px=700.0, principal_point=(320.0, 240.0))
        obj = SceneObject("s", np.array([[0.0, 0.0, 10.0]]), np.zeros(3))
        scenario = Scenario(
            intrinsics=intr, objects=(obj,), camera_velocity=np.zeros(3), frame_count=3
        )
        _, truth = simulate(scenario)
        doc = truth_document(truth, ["s-0"])
        pt = doc["points"][0]
        assert pt["epipole"] is None and pt["k0"] is None and pt["H"] is None
        write_json(tmp_path / "truth.json", doc)
        assert read_json(tmp_path / "truth.json")["points"][0]["k0"] is None

    def test_id_count_mismatch(self):
        _, truth = simulate(sample_scenario())
        with pytest.raises(InvalidInput):
            truth_document(truth, ["too-few"])


class TestGridCsvWriters:
    def test_collision_map_golden(self, tmp_path):
        intr = CameraIntrinsics(focal_px=800.0, principal_point=(320.0, 240.0))
        obj = SceneObject("w", np.array([[3.0, 0.0, 30.0]]), np.array([0.0, 0.0, -1.0]))
        scenario = Scenario(
            intrinsics=intr, objects=(obj,), camera_velocity=np.zeros(3), frame_count=40
        )
        cmap = collision_map(scenario, GridSpec(0.0, 0.0, 1, 1), collision_radius=2.0)
        path = tmp_path / "map.csv"
        write_collision_map_csv(path, cmap)
        assert path.read_text() == (
            "dv_lateral,dv_forward,min_ttc_frames,miss_distance_m,collision\n"
            "0.0,0.0,30.0,3.0,0\n"
        )

    def test_collision_map_inf_nan_cells(self, tmp_path):
        intr = CameraIntrinsics(focal_px=800.0, principal_point=(320.0, 240.0))
        scenario = Scenario(
            intrinsics=intr, objects=(), camera_velocity=np.zeros(3), frame_count=10
        )
        cmap = collision_map(scenario, GridSpec(0.0, 0.0, 1, 1))
        path = tmp_path / "map.csv"
        write_collision_map_csv(path, cmap)
        assert path.read_text().splitlines()[1] == "0.0,0.0,inf,nan,0"

    def test_collision_map_row_order(self, tmp_path):
        intr = CameraIntrinsics(focal_px=800.0, principal_point=(320.0, 240.0))
        obj = SceneObject("w", np.array([[0.0, 0.0, 30.0]]), np.zeros(3))
        scenario = Scenario(
            intrinsics=intr,
            objects=(obj,),
            camera_velocity=np.array([0.0, 0.0, 1.0]),
            frame_count=40,
        )
        cmap = collision_map(scenario, GridSpec(1.0, 1.0, 3, 3))
        path = tmp_path / "map.csv"
        write_collision_map_csv(path, cmap)
        rows = [line.split(",")[:2] for line in path.read_text().splitlines()[1:]]
        # forward-major: dv_forward constant within each block of 3
        assert [r[1] for r in rows] == ["-1.0"] * 3 + ["0.0"] * 3 + ["1.0"] * 3
        assert [r[0] for r in rows[:3]] == ["-1.0", "0.0", "1.0"]

    def test_sensitivity_csv_shape(self, tmp_path):
        table = orientation_error_sweep(
            preset_approach_45deg(10.0), [20.0, 40.0], trials=10, rng_seed=2
        )
        path = tmp_path / "sens.csv"
        write_sensitivity_csv(path, table)
        lines = path.read_text().splitlines()
        assert lines[0] == (
            "z_m,stereo_depth_error_m,stereo_heading_error_deg,"
            "plane_heading_error_deg,ttc_error_frames,degenerate_trials"
        )
        assert len(lines) == 3
        assert lines[1].startswith("20.0,")
        assert lines[1].endswith(",0")  # degenerate count is an int
