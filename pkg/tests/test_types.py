"""Core containers: trajectories, behavior labels, histograms, RNG streams."""

import numpy as np
import pytest

from stylebc.types import (Dataset, RngStream, Trajectory,
                           behavior_from_checkpoints, behavior_of, histogram)


def make_traj(tid=0, n=3, checkpoints=(), success=False):
    states = np.zeros((n + 1, 2))
    states[:, 0] = np.arange(n + 1)
    actions = np.ones((n, 2)) * 0.1
    return Trajectory(id=tid, states=states, actions=actions,
                      checkpoints=tuple(checkpoints), success=success)


class TestTrajectory:
    def test_lengths_must_agree(self):
        with pytest.raises(ValueError):
            Trajectory(id=0, states=np.zeros((5, 2)), actions=np.zeros((3, 2)),
                       checkpoints=(), success=False)

    def test_needs_at_least_one_step(self):
        with pytest.raises(ValueError):
            Trajectory(id=0, states=np.zeros((1, 2)), actions=np.zeros((0, 2)),
                       checkpoints=(), success=False)

    def test_success_must_match_checkpoints(self):
        # success means the visit list ends at the goal index
        with pytest.raises(ValueError):
            make_traj(checkpoints=(3, 0), success=False)
        with pytest.raises(ValueError):
            make_traj(checkpoints=(3,), success=True)
        make_traj(checkpoints=(3, 0), success=True)
        make_traj(checkpoints=(), success=False)

    def test_non_finite_states_rejected(self):
        states = np.zeros((3, 2))
        states[1, 0] = np.nan
        with pytest.raises(ValueError):
            Trajectory(id=0, states=states, actions=np.zeros((2, 2)),
                       checkpoints=(), success=False)

    def test_length_is_action_count(self):
        assert make_traj(n=7).length == 7


class TestBehaviorLabels:
    def test_goal_only(self):
        assert behavior_from_checkpoints((0,)) == "0"

    def test_digit_concatenation(self):
        # checkpoint indices concatenate in visit order, goal last
        assert behavior_from_checkpoints((6, 4, 1, 0)) == "6410"
        assert behavior_from_checkpoints((7, 4, 2, 0)) == "7420"

    def test_fail_when_not_reaching_goal(self):
        assert behavior_from_checkpoints(()) == "FAIL"
        assert behavior_from_checkpoints((6, 4)) == "FAIL"

    def test_goal_must_be_last(self):
        # a goal index followed by more visits never happens in the env,
        # but the labeler treats any non-goal-terminated list as failure
        assert behavior_from_checkpoints((0, 3)) == "FAIL"

    def test_wide_indices_get_delimiters(self):
        label = behavior_from_checkpoints((12, 3, 0))
        assert "12" in label and label.count("-") >= 1

    def test_behavior_of_matches_checkpoints(self):
        t = make_traj(checkpoints=(6, 4, 1, 0), success=True)
        assert behavior_of(t) == "6410"


class TestHistogram:
    def test_normalizes_to_one(self):
        h = histogram(["a", "b", "a", "a"])
        assert h == {"a": 0.75, "b": 0.25}
        assert abs(sum(h.values()) - 1.0) < 1e-12

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            histogram([])

    def test_keys_sorted(self):
        h = histogram(["b", "a", "c"])
        assert list(h) == sorted(h)


class TestDataset:
    def test_ids_must_be_contiguous(self):
        with pytest.raises(ValueError):
            Dataset(trajectories=[make_traj(tid=0), make_traj(tid=2)])

    def test_behavior_histogram(self):
        ds = Dataset(trajectories=[
            make_traj(tid=0, checkpoints=(1, 0), success=True),
            make_traj(tid=1, checkpoints=(1, 0), success=True),
            make_traj(tid=2, checkpoints=(2, 0), success=True),
            make_traj(tid=3),
        ])
        assert ds.behavior_histogram() == {"10": 0.5, "20": 0.25, "FAIL": 0.25}

    def test_lengths(self):
        ds = Dataset(trajectories=[make_traj(tid=0, n=3),
                                   make_traj(tid=1, n=5)])
        assert ds.lengths().tolist() == [3, 5]


class TestRngStream:
    def test_same_name_same_draws(self):
        a = RngStream(7, "x").generator().random(4)
        b = RngStream(7, "x").generator().random(4)
        assert np.array_equal(a, b)

    def test_different_names_decorrelate(self):
        a = RngStream(7, "x").generator().random(4)
        b = RngStream(7, "y").generator().random(4)
        assert not np.array_equal(a, b)

    def test_different_seeds_decorrelate(self):
        a = RngStream(7, "x").generator().random(4)
        b = RngStream(8, "x").generator().random(4)
        assert not np.array_equal(a, b)

    def test_derive_is_stable_and_distinct(self):
        root = RngStream(3, "root")
        a = root.derive("child").generator().random(4)
        b = root.derive("child").generator().random(4)
        c = root.derive("other").generator().random(4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)
