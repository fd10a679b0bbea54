"""Generation, histogram metrics, density grids, property control."""

import numpy as np
import pytest

from stylebc.env import Env, EnvConfig
from stylebc.evaluation import (
    EvalConfig,
    FixedStyle,
    Property,
    UniformCodebook,
    ZeroStyle,
    behavior_histogram,
    conditioned_styles,
    control_report,
    density,
    evaluate,
    generate,
    l1_distance,
    register_metric,
    style_indices_used,
    style_source_for,
    success_rate,
    visitation,
)
from stylebc.maze import load_bundled, parse_maze
from stylebc.neural import ArchConfig, Model
from stylebc.similarity import DissimilarityMatrix
from stylebc.types import Dataset, RngStream, Trajectory

CORRIDOR = parse_maze("#######\n#G...S#\n#######")
MEDIUM = load_bundled("medium_maze")


def toy_model(n_styles=4, seed=0) -> Model:
    arch = ArchConfig(n_styles=n_styles, d_z=4, hidden=16, num_hidden=2)
    return Model.init(arch, RngStream(seed, "toy"))


def toy_trajectory(i, states, checkpoints=(0,), success=True) -> Trajectory:
    states = np.asarray(states, dtype=np.float64)
    return Trajectory(id=i, states=states,
                      actions=np.zeros((len(states) - 1, 2)),
                      checkpoints=checkpoints, success=success)


def rand_hist(g, labels):
    k = int(g.integers(1, len(labels) + 1))
    chosen = g.choice(labels, size=k, replace=False)
    w = g.random(k)
    w = w / w.sum()
    return {str(l): float(v) for l, v in zip(chosen, w)}


class TestL1:

    def test_hand_values(self):
        assert l1_distance({"a": 0.5, "b": 0.5}, {"a": 1.0}) == pytest.approx(1.0)
        assert l1_distance({"a": 1.0}, {"b": 1.0}) == pytest.approx(2.0)
        assert l1_distance({}, {}) == 0.0

    def test_metric_laws_on_random_histograms(self):
        g = np.random.default_rng(0)
        labels = [str(i) for i in range(8)]
        for _ in range(3000):
            a, b, c = (rand_hist(g, labels) for _ in range(3))
            dab = l1_distance(a, b)
            assert 0.0 <= dab <= 2.0 + 1e-12
            assert dab == pytest.approx(l1_distance(b, a), abs=1e-15)
            assert l1_distance(a, a) == 0.0
            assert l1_distance(a, c) <= dab + l1_distance(b, c) + 1e-12

    def test_disjoint_supports_hit_the_upper_bound(self):
        g = np.random.default_rng(1)
        for _ in range(200):
            a = rand_hist(g, ["a", "b", "c"])
            b = rand_hist(g, ["x", "y"])
            assert l1_distance(a, b) == pytest.approx(2.0, abs=1e-12)


class TestDensity:

    def toy(self):
        t0 = toy_trajectory(0, [[1.5, 1.5], [2.5, 1.5]])
        t1 = toy_trajectory(1, [[3.5, 1.5], [3.6, 1.5], [3.7, 1.5]])
        ds = Dataset(trajectories=[t0, t1], meta={})
        nu = DissimilarityMatrix(nu=1.0 - np.eye(2), pad_length=3)
        return ds, nu

    def test_hand_binned_masses(self):
        ds, nu = self.toy()
        maze = parse_maze("#####\n#G.S#\n#####")
        grid = density(ds, nu, beta=0.0, ref=0, maze=maze, resolution=5)
        want = np.zeros((5, 5))
        want[2, 1] = want[2, 2] = 0.25  # traj 0: 1/(2*2) per state
        want[2, 3] = 0.5  # traj 1: 3 states, 1/(2*3) each, one cell
        np.testing.assert_allclose(grid.masses, want, atol=1e-12)

    def test_beta_zero_mass_is_one_at_all_resolutions(self):
        ds, nu = self.toy()
        maze = parse_maze("#####\n#G.S#\n#####")
        for res in (16, 64, 256):
            grid = density(ds, nu, beta=0.0, ref=1, maze=maze, resolution=res)
            assert abs(grid.total_mass - 1.0) < 1e-9

    def test_reference_weighting_discounts_dissimilar_mass(self):
        ds, nu = self.toy()
        maze = parse_maze("#####\n#G.S#\n#####")
        grid = density(ds, nu, beta=2.0, ref=0, maze=maze, resolution=5)
        assert grid.masses[2, 1] == pytest.approx(0.25)  # own traj, nu=0
        assert grid.masses[2, 3] == pytest.approx(0.5 * np.exp(-2.0))
        assert grid.total_mass < 1.0

    def test_reference_out_of_range(self):
        ds, nu = self.toy()
        maze = parse_maze("#####\n#G.S#\n#####")
        with pytest.raises(IndexError):
            density(ds, nu, beta=0.0, ref=2, maze=maze)

    def test_visitation_mass_is_one(self):
        trajs = [toy_trajectory(0, [[1.5, 1.5], [2.5, 1.5], [3.5, 1.5]]),
                 toy_trajectory(1, [[3.5, 1.5], [3.6, 1.5]])]
        grid = visitation(trajs, parse_maze("#####\n#G.S#\n#####"), 8)
        assert grid.total_mass == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(ValueError, match="empty"):
            visitation([], parse_maze("#####\n#G.S#\n#####"))


class TestStyleSources:

    def test_zero_style(self):
        src = ZeroStyle(4)
        idx, z = src.sample(np.random.default_rng(0))
        assert idx == -1
        assert np.array_equal(z, np.zeros(4))

    def test_fixed_style_returns_its_row(self):
        m = toy_model()
        src = FixedStyle(m, 2)
        idx, z = src.sample(np.random.default_rng(0))
        assert idx == 2
        assert np.array_equal(z, m.codebook[2])
        with pytest.raises(IndexError):
            FixedStyle(m, 4)

    def test_uniform_codebook_is_uniform(self):
        m = toy_model(n_styles=10)
        src = UniformCodebook(m)
        idx = style_indices_used(m, CORRIDOR, EnvConfig(), src, 4000, 0)
        counts = np.bincount(idx, minlength=10) / 4000
        assert np.all(np.abs(counts - 0.1) < 0.02)

    def test_uniform_codebook_respects_a_support_subset(self):
        m = toy_model(n_styles=10)
        src = UniformCodebook(m, indices=[2, 5, 7])
        idx = set(style_indices_used(m, CORRIDOR, EnvConfig(), src, 300, 1))
        assert idx == {2, 5, 7}
        with pytest.raises(ValueError, match="empty"):
            UniformCodebook(m, indices=[])

    def test_source_for_algorithm(self):
        m = toy_model()
        assert isinstance(style_source_for("bc", m), ZeroStyle)
        assert isinstance(style_source_for("zbc", m), UniformCodebook)
        assert isinstance(style_source_for("wzbc", m), UniformCodebook)


class GreedyPolicy:
    """model.forward wrapper with the act() protocol of Env.rollout."""

    def __init__(self, model, greedy=True):
        self.model = model
        self.greedy = greedy

    def act(self, position, z, gen):
        mean, log_std = self.model.forward(position, z)
        if self.greedy:
            return mean
        return mean + np.exp(log_std) * gen.normal(0.0, 1.0, 2)


class TestGenerate:

    def test_deterministic_per_call(self):
        m = toy_model()
        cfg = EnvConfig(max_steps=40)
        a = generate(m, CORRIDOR, cfg, UniformCodebook(m), 6, seed=3)
        b = generate(m, CORRIDOR, cfg, UniformCodebook(m), 6, seed=3)
        for ta, tb in zip(a, b):
            assert np.array_equal(ta.states, tb.states)
            assert ta.checkpoints == tb.checkpoints

    @pytest.mark.parametrize("variant,greedy", [
        ("deterministic", True),
        ("noise-transi", True),
        ("noise-transi", False),
        ("sticky", True),
    ])
    def test_single_rollout_matches_env_rollout_bitwise(self, variant, greedy):
        from stylebc.env import variant_config
        m = toy_model()
        cfg = variant_config(variant)
        cfg = EnvConfig(init_mode=cfg.init_mode,
                        transition_noise_sigma=cfg.transition_noise_sigma,
                        sticky_walls=cfg.sticky_walls, max_steps=50)
        src = FixedStyle(m, 1)
        got = generate(m, MEDIUM, cfg, src, 1, seed=7, greedy=greedy)[0]
        ep = RngStream(7, "eval").derive("ep:0")
        _, z = src.sample(ep.derive("style").generator())
        want = Env(MEDIUM, cfg).rollout(GreedyPolicy(m, greedy), z, ep)
        assert np.array_equal(got.states, want.states)
        assert np.array_equal(got.actions, want.actions)
        assert got.checkpoints == want.checkpoints
        assert got.success == want.success

    def test_actions_stay_in_the_box(self):
        m = toy_model(seed=5)
        trajs = generate(m, CORRIDOR, EnvConfig(max_steps=30),
                         UniformCodebook(m), 5, seed=0)
        for t in trajs:
            assert np.all(np.abs(t.actions) <= 1.0)


class TestEvaluate:

    def test_metrics_shape_and_ranges(self):
        m = toy_model(n_styles=3)
        ds = Dataset(trajectories=[
            toy_trajectory(i, [[5.5, 1.5], [4.5, 1.5]]) for i in range(3)],
            meta={})
        cfg = EvalConfig(n_rollouts=6, seeds=(0, 1),
                         env=EnvConfig(max_steps=25))
        metrics, det = evaluate(m, ds, CORRIDOR, cfg, "zbc", details=True)
        assert metrics["seeds"] == [0, 1]
        assert len(metrics["l1"]["per_seed"]) == 2
        assert all(0.0 <= v <= 2.0 for v in metrics["l1"]["per_seed"])
        assert 0.0 <= metrics["success_rate"]["mean"] <= 1.0
        assert set(det) == {"reference_hist", "per_seed_hists", "trajectories"}
        assert len(det["trajectories"]) == 2
        assert len(det["trajectories"][0]) == 6

    def test_histogram_helpers(self):
        trajs = [toy_trajectory(0, [[1.5, 1.5], [2.5, 1.5]], (4, 0), True),
                 toy_trajectory(1, [[1.5, 1.5], [2.5, 1.5]], (4, 0), True),
                 toy_trajectory(2, [[1.5, 1.5], [2.5, 1.5]], (), False)]
        assert behavior_histogram(trajs) == {
            "40": pytest.approx(2 / 3), "FAIL": pytest.approx(1 / 3)}
        assert success_rate(trajs) == pytest.approx(2 / 3)


class TestPropertyControl:

    def lengths_dataset(self):
        trajs = [toy_trajectory(i, [[5.5, 1.5]] * (n + 1))
                 for i, n in enumerate((4, 8, 12))]
        return Dataset(trajectories=trajs, meta={})

    def test_property_validation(self):
        with pytest.raises(KeyError):
            Property("speed", 0, 1)
        with pytest.raises(ValueError):
            Property("length", 5, 4)

    def test_length_property_filters(self):
        ds = self.lengths_dataset()
        prop = Property("length", 6, 20)
        assert [prop.satisfied(t) for t in ds] == [False, True, True]

    def test_behavior_property(self):
        t = toy_trajectory(0, [[1.5, 1.5], [2.5, 1.5]], (4, 0), True)
        assert Property("behavior", "40", "40").satisfied(t)
        assert not Property("behavior", "41", "49").satisfied(t)

    def test_custom_metric_registration(self):
        register_metric("n_states", lambda t: len(t.states))
        t = toy_trajectory(0, [[1.5, 1.5], [2.5, 1.5]])
        assert Property("n_states", 2, 2).satisfied(t)

    def test_conditioned_styles_enumerates_matching_ids(self):
        ds = self.lengths_dataset()
        m = toy_model(n_styles=3)
        src = conditioned_styles(ds, m, Property("length", 6, 20))
        assert src.indices.tolist() == [1, 2]
        with pytest.raises(ValueError, match="unsatisfiable"):
            conditioned_styles(ds, m, Property("length", 100, 200))

    def test_control_report_structure(self):
        ds = self.lengths_dataset()
        m = toy_model(n_styles=3)
        cfg = EvalConfig(n_rollouts=5, seeds=(0, 1),
                         env=EnvConfig(max_steps=20))
        rep = control_report(m, ds, Property("length", 6, 20), CORRIDOR, cfg)
        assert rep["n_restricted"] == 2
        assert rep["property"] == {"metric": "length", "min": 6, "max": 20}
        assert len(rep["per_seed"]) == 2
        for row in rep["per_seed"]:
            assert set(row) >= {"seed", "free_hist", "controlled_hist",
                                "free_l1", "controlled_l1",
                                "controlled_lengths"}
            assert len(row["controlled_lengths"]) == 5
