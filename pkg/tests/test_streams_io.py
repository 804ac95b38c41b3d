import numpy as np
import pytest

from imuchain.errors import InvalidInputError
from imuchain.io import read_imu_log, write_csv, write_imu_log
from imuchain.streams import ImuStream


def make_stream(imu_id, rng, n=40, t0=0.0):
    times = t0 + np.sort(rng.uniform(0.0, 2.0, n))
    return ImuStream(imu_id, times, rng.normal(size=(n, 3)), rng.normal(size=(n, 3)))


def test_stream_validation():
    times = np.array([0.0, 0.1, 0.2])
    data = np.zeros((3, 3))
    with pytest.raises(InvalidInputError):
        ImuStream("x", times[::-1].copy(), data, data)
    with pytest.raises(InvalidInputError):
        ImuStream("x", times, np.zeros((2, 3)), data)
    with pytest.raises(InvalidInputError):
        ImuStream("x", times, np.zeros((3, 2)), data)


def test_stream_slice_time(rng):
    s = make_stream("a", rng, n=100)
    cut = s.slice_time(0.5, 1.5)
    assert len(cut) > 0
    assert cut.times.min() >= 0.5
    assert cut.times.max() <= 1.5
    np.testing.assert_array_equal(
        cut.gyro, s.gyro[(s.times >= 0.5) & (s.times <= 1.5)]
    )


def test_log_round_trip_byte_exact(tmp_path, rng):
    streams = {s.imu_id: s for s in (make_stream("a", rng), make_stream("b", rng))}
    first = tmp_path / "log1.jsonl"
    second = tmp_path / "log2.jsonl"
    write_imu_log(first, streams)
    back = read_imu_log(first)
    write_imu_log(second, back)
    assert first.read_bytes() == second.read_bytes()
    for imu_id, s in streams.items():
        np.testing.assert_array_equal(back[imu_id].times, s.times)
        np.testing.assert_array_equal(back[imu_id].gyro, s.gyro)
        np.testing.assert_array_equal(back[imu_id].accel, s.accel)


def test_log_lines_sorted_by_time(tmp_path, rng):
    streams = [make_stream("a", rng, t0=0.0), make_stream("b", rng, t0=0.01)]
    path = tmp_path / "log.jsonl"
    write_imu_log(path, streams)
    import json

    times = [json.loads(line)["t"] for line in path.read_text().splitlines()]
    assert times == sorted(times)


def test_read_rejects_bad_line(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text(
        '{"imu_id": "a", "t": 0.0, "gyro": [0,0,0], "accel": [0,0,9.8]}\n'
        "not json\n"
    )
    with pytest.raises(InvalidInputError, match="line 2"):
        read_imu_log(path)


def test_read_rejects_wrong_vector_length(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"imu_id": "a", "t": 0.0, "gyro": [0,0], "accel": [0,0,9.8]}\n')
    with pytest.raises(InvalidInputError, match="line 1"):
        read_imu_log(path)


def test_read_rejects_missing_key(tmp_path):
    path = tmp_path / "bad.jsonl"
    path.write_text('{"imu_id": "a", "t": 0.0, "gyro": [0,0,0]}\n')
    with pytest.raises(InvalidInputError):
        read_imu_log(path)


def test_write_csv_shortest_repr(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, ["a", "b"], [[0.1, 1.0 / 3.0]])
    text = path.read_text()
    assert text.splitlines()[0] == "a,b"
    assert text.splitlines()[1] == "0.1,0.3333333333333333"
