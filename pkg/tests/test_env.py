"""Simulator dynamics: clip-and-slide collision, detection, variants."""

import numpy as np
import pytest
from scipy import stats

from stylebc.env import (CONTACT_EPS, STEP_SIZE, Env, EnvConfig, EnvState,
                         clamp_action, move_positions, variant_config)
from stylebc.maze import load_bundled, parse_maze
from stylebc.types import RngStream

CORRIDOR = parse_maze("#####\n#G..#\n#####")
MEDIUM = load_bundled("medium_maze")


def state_at(x, y):
    return EnvState(position=np.array([x, y], dtype=np.float64))


class TestClampAction:
    def test_clamps_to_unit_box(self):
        assert np.array_equal(clamp_action([2.0, 0.0]), [1.0, 0.0])
        assert np.array_equal(clamp_action([-3.0, 0.5]), [-1.0, 0.5])

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            clamp_action([np.nan, 0.0])
        with pytest.raises(ValueError):
            clamp_action([np.inf, 0.0])


class TestMovePositions:
    def test_free_space_translation(self):
        pos, contact = move_positions(
            CORRIDOR, np.array([[1.5, 1.5]]), np.array([[0.25, 0.1]]))
        assert np.allclose(pos[0], [1.75, 1.6])
        assert not contact[0]

    def test_crossing_into_free_cell(self):
        pos, contact = move_positions(
            CORRIDOR, np.array([[1.9, 1.5]]), np.array([[0.25, 0.0]]))
        assert pos[0, 0] == pytest.approx(2.15)
        assert not contact[0]

    def test_clip_at_wall_face(self):
        # cell (1,3) is the last free cell; x = 4 is a wall face
        pos, contact = move_positions(
            CORRIDOR, np.array([[3.9, 1.5]]), np.array([[0.25, 0.0]]))
        assert pos[0, 0] == pytest.approx(4.0 - CONTACT_EPS)
        assert contact[0]

    def test_slide_preserves_free_axis(self):
        # y is blocked below (wall row 0 occupies y < 1): x keeps moving
        pos, contact = move_positions(
            CORRIDOR, np.array([[1.5, 1.1]]), np.array([[0.25, -0.25]]))
        assert pos[0, 0] == pytest.approx(1.75)
        assert pos[0, 1] == pytest.approx(1.0 + CONTACT_EPS)
        assert contact[0]

    def test_leftward_clip(self):
        pos, contact = move_positions(
            CORRIDOR, np.array([[1.1, 1.5]]), np.array([[-0.25, 0.0]]))
        assert pos[0, 0] == pytest.approx(1.0 + CONTACT_EPS)
        assert contact[0]

    def test_landing_exactly_on_left_face_stays_inside(self):
        pos, contact = move_positions(
            CORRIDOR, np.array([[2.25, 1.5]]), np.array([[-0.25, 0.0]]))
        assert pos[0, 0] == pytest.approx(2.0)
        assert not contact[0]

    def test_never_ends_inside_wall(self):
        gen = np.random.default_rng(5)
        pos = np.array([[5.5, 9.5]] * 64)
        for _ in range(400):
            disp = gen.uniform(-STEP_SIZE, STEP_SIZE, (64, 2))
            pos, _ = move_positions(MEDIUM, pos, disp)
            rows = np.floor(pos[:, 1]).astype(int)
            cols = np.floor(pos[:, 0]).astype(int)
            assert not MEDIUM.blocked[rows, cols].any()


class TestStep:
    def test_plain_step_scales_by_step_size(self):
        env = Env(CORRIDOR, EnvConfig())
        s = state_at(2.5, 1.5)
        env.step(s, [1.0, 0.0])
        assert np.allclose(s.position, [2.75, 1.5])
        assert s.steps == 1 and not s.done

    def test_action_clamped_before_scaling(self):
        env = Env(CORRIDOR, EnvConfig())
        s = state_at(2.5, 1.5)
        env.step(s, [4.0, 0.0])
        assert s.position[0] == pytest.approx(2.75)

    def test_goal_detection_ends_episode(self):
        env = Env(CORRIDOR, EnvConfig())
        s = state_at(2.1, 1.5)
        env.step(s, [-1.0, 0.0])  # lands 0.35 from the goal center
        assert s.visited == [0]
        assert s.done

    def test_step_after_done_raises(self):
        env = Env(CORRIDOR, EnvConfig())
        s = state_at(2.1, 1.5)
        env.step(s, [-1.0, 0.0])
        with pytest.raises(RuntimeError):
            env.step(s, [0.0, 0.0])

    def test_max_steps_truncates(self):
        env = Env(CORRIDOR, EnvConfig(max_steps=5))
        s = state_at(3.5, 1.5)
        for _ in range(5):
            env.step(s, [1.0, 0.0])
        assert s.done and s.steps == 5 and s.visited == []

    def test_door_detection_ascending_and_once(self):
        maze = parse_maze("######\n#G12S#\n######")
        env = Env(maze, EnvConfig())
        s = state_at(3.0, 1.5)  # exactly 0.5 from both door centers
        env.step(s, [0.0, 0.0])
        assert s.visited == [1, 2]
        env.step(s, [0.0, 0.0])
        assert s.visited == [1, 2]  # no duplicates

    def test_visited_grows_monotonically(self):
        env = Env(MEDIUM, variant_config("noise-transi"))
        gen = np.random.default_rng(3)
        for ep in range(20):
            s = env.reset(gen)
            seen = []
            while not s.done:
                env.step(s, gen.uniform(-1, 1, 2), gen)
                assert s.visited[:len(seen)] == seen
                seen = list(s.visited)
            assert len(set(s.visited)) == len(s.visited)
            if s.visited:
                assert 0 not in s.visited[:-1]


class TestInitModes:
    def test_fixed_starts_at_start_center(self):
        env = Env(MEDIUM, EnvConfig())
        s = env.reset(np.random.default_rng(0))
        assert np.allclose(s.position, [5.5, 9.5])
        assert s.steps == 0 and not s.done and s.visited == []

    def test_pseudo_random_stays_in_disc_and_free(self):
        env = Env(MEDIUM, variant_config("pseudo-r-init"))
        gen = np.random.default_rng(1)
        center = MEDIUM.cell_center(MEDIUM.start)
        for _ in range(500):
            s = env.reset(gen)
            assert np.linalg.norm(s.position - center) <= 1.0
            r, c = MEDIUM.cell_of(s.position)
            assert not MEDIUM.blocked[r, c]

    def test_fully_random_uniform_over_free_cells(self):
        env = Env(MEDIUM, variant_config("r-init"))
        gen = np.random.default_rng(2)
        free = MEDIUM.free_cells()
        counts = {cell: 0 for cell in free}
        n = 100 * len(free)
        for _ in range(n):
            s = env.reset(gen)
            counts[MEDIUM.cell_of(s.position)] += 1
        exp = n / len(free)
        chi2 = sum((c - exp) ** 2 / exp for c in counts.values())
        crit = stats.chi2.ppf(0.999, df=len(free) - 1)
        assert chi2 < crit, f"chi2 {chi2:.1f} >= {crit:.1f}"

    def test_fully_random_spreads_within_cell(self):
        env = Env(MEDIUM, variant_config("r-init"))
        gen = np.random.default_rng(3)
        fracs = np.array([env.reset(gen).position % 1.0 for _ in range(2000)])
        assert np.all(np.abs(fracs.mean(axis=0) - 0.5) < 0.03)


class TestNoise:
    def test_sigma_of_displacement(self):
        cfg = variant_config("noise-transi")
        assert cfg.transition_noise_sigma == 0.05
        env = Env(CORRIDOR, EnvConfig(transition_noise_sigma=0.05,
                                      max_steps=10**9, goal_radius=0.01))
        gen = np.random.default_rng(4)
        s = state_at(2.5, 1.5)
        deltas = []
        for _ in range(4000):
            before = s.position.copy()
            env.step(s, [0.0, 0.0], gen)
            deltas.append(s.position - before)
            s.position = np.array([2.5, 1.5])  # rehome to avoid walls
            s.done = False
        sd = np.asarray(deltas).std()
        assert abs(sd - 0.05) < 0.005

    def test_same_seed_reproduces(self):
        env = Env(MEDIUM, variant_config("noise-transi"))
        out = []
        for _ in range(2):
            gen = RngStream(9, "env-test").generator()
            s = env.reset(gen)
            for _ in range(50):
                env.step(s, [0.3, -0.8], gen)
            out.append(s.position.copy())
        assert np.array_equal(out[0], out[1])


class TestSticky:
    def make_env(self, **kw):
        return Env(CORRIDOR, EnvConfig(sticky_walls=True, stick_steps=3, **kw))

    def test_contact_freezes_following_steps(self):
        env = self.make_env()
        s = state_at(3.9, 1.5)
        env.step(s, [1.0, 0.0])  # hits the wall, still slides this step
        assert s.position[0] == pytest.approx(4.0 - CONTACT_EPS)
        assert s.stuck_remaining == 3
        for _ in range(3):
            before = s.position.copy()
            env.step(s, [-1.0, 0.0])
            assert np.array_equal(s.position, before)
        env.step(s, [-1.0, 0.0])  # unstuck again
        assert s.position[0] == pytest.approx(4.0 - CONTACT_EPS - 0.25)

    def test_no_rng_consumed_while_stuck(self):
        env = Env(CORRIDOR, EnvConfig(sticky_walls=True, stick_steps=2,
                                      transition_noise_sigma=0.05))
        gen = np.random.default_rng(6)
        s = state_at(3.9, 1.5)
        env.step(s, [1.0, 0.0], gen)
        assert s.stuck_remaining == 2
        before = gen.bit_generator.state["state"]["state"]
        env.step(s, [0.0, 0.0], gen)
        assert gen.bit_generator.state["state"]["state"] == before

    def test_steps_still_count_while_stuck(self):
        env = self.make_env(max_steps=4)
        s = state_at(3.9, 1.5)
        for _ in range(4):
            env.step(s, [1.0, 0.0])
        assert s.done and s.steps == 4


class TestVariants:
    def test_names_and_fields(self):
        assert variant_config("deterministic") == EnvConfig(seed=0)
        assert variant_config("r-init").init_mode == "fully_random"
        assert variant_config("pseudo-r-init").init_mode == "pseudo_random"
        assert variant_config("sticky").sticky_walls
        with pytest.raises(KeyError):
            variant_config("windy")

    def test_overrides_win(self):
        cfg = variant_config("noise-transi", max_steps=7)
        assert cfg.max_steps == 7 and cfg.transition_noise_sigma == 0.05

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EnvConfig(init_mode="teleport")
        with pytest.raises(ValueError):
            EnvConfig(max_steps=0)
        with pytest.raises(ValueError):
            EnvConfig(transition_noise_sigma=-0.1)


class TestRollout:
    # corridor with a start cell away from the goal
    SCORRIDOR = parse_maze("#####\n#G.S#\n#####")

    class GoRight:
        def act(self, pos, z, gen):
            return np.array([1.0, 0.0])

    class GoLeft:
        def act(self, pos, z, gen):
            return np.array([-1.0, 0.0])

    def test_rollout_success_label(self):
        env = Env(self.SCORRIDOR, EnvConfig())
        traj = env.rollout(self.GoLeft(), None, RngStream(0, "r"), traj_id=3)
        assert traj.success and traj.checkpoints[-1] == 0
        assert traj.id == 3
        assert len(traj.states) == len(traj.actions) + 1

    def test_rollout_failure_label(self):
        env = Env(self.SCORRIDOR, EnvConfig(max_steps=10))
        traj = env.rollout(self.GoRight(), None, RngStream(0, "r"))
        assert not traj.success and traj.length == 10

    def test_rollout_deterministic_per_stream(self):
        env = Env(MEDIUM, variant_config("noise-transi"))
        a = env.rollout(self.GoRight(), None, RngStream(5, "ep"))
        b = env.rollout(self.GoRight(), None, RngStream(5, "ep"))
        assert np.array_equal(a.states, b.states)

    def test_rollout_records_clamped_actions(self):
        env = Env(self.SCORRIDOR, EnvConfig(max_steps=3))

        class Wild:
            def act(self, pos, z, gen):
                return np.array([5.0, 0.0])

        traj = env.rollout(Wild(), None, RngStream(0, "r"))
        assert np.all(traj.actions <= 1.0)
