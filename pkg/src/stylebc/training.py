"""BC, ZBC and WZBC trainers over one loop skeleton.

All three algorithms minimize the weighted Gaussian negative
log-likelihood; they differ only in how each batch element picks its
style and weight:

  bc    zero style vector, weight 1
  zbc   own style z_i, weight 1
  wzbc  with probability p a relabeled style z_j (j != i, consumed
        under stop-gradient) weighted by exp(-beta * nu[i][j]),
        otherwise the diagonal (z_i, weight 1)

The batch sampler consumes an identical RNG draw pattern for every
algorithm (index, coin, relabel, timestep vectors each step), so runs
with the same seed share initialization and (i, t) sequences exactly.
Weights are used raw, never renormalized per batch.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .neural import Adam, ArchConfig, Model
from .similarity import DissimilarityMatrix, dissimilarity_matrix
from .types import Dataset, RngStream

ALGORITHMS = ("bc", "zbc", "wzbc")


@dataclass(frozen=True)
class TrainConfig:
    algorithm: str = "zbc"
    steps: int = 100_000
    batch_size: int = 16
    beta: float = 10.0
    relabel_prob: float = 0.8
    seed: int = 0
    eval_every: int = 1000

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if self.steps < 0 or self.batch_size < 1 or self.eval_every < 1:
            raise ValueError("bad steps/batch_size/eval_every")
        if not 0.0 <= self.relabel_prob <= 1.0:
            raise ValueError("relabel_prob must be in [0, 1]")
        if self.beta < 0:
            raise ValueError("beta must be >= 0")


@dataclass
class TrainReport:
    config: dict
    loss_curve: list = field(default_factory=list)  # (step, loss) pairs
    wall_clock_s: float = 0.0
    final_loss: float = float("nan")
    checkpoint_path: str | None = None


@dataclass(frozen=True)
class Batch:
    S: np.ndarray  # (B, 2) states
    A: np.ndarray  # (B, 2) actions
    data_idx: np.ndarray  # i per element
    style_idx: np.ndarray  # j per element
    w: np.ndarray
    stop_grad: np.ndarray
    zero_style: bool


class _Transitions:
    """Dataset flattened for O(1) batched (i, t) gathers."""

    def __init__(self, dataset: Dataset):
        self.lengths = np.array([t.length for t in dataset], dtype=np.int64)
        self.offsets = np.concatenate([[0], np.cumsum(self.lengths)[:-1]])
        self.S = np.concatenate([t.states[:-1] for t in dataset])
        self.A = np.concatenate([t.actions for t in dataset])


def _draw(gen, data: _Transitions, cfg: TrainConfig, nu):
    """One batch of indices/weights; fixed draw pattern for all algorithms."""
    n = len(data.lengths)
    B = cfg.batch_size
    i = np.minimum((gen.random(B) * n).astype(np.int64), n - 1)
    coin = gen.random(B)
    j_raw = np.minimum((gen.random(B) * max(n - 1, 1)).astype(np.int64),
                       max(n - 2, 0))
    t_u = gen.random(B)
    p = cfg.relabel_prob if (cfg.algorithm == "wzbc" and n > 1) else 0.0
    relabel = coin < p
    j = i.copy()
    j[relabel] = j_raw[relabel] + (j_raw[relabel] >= i[relabel])
    t = np.minimum((t_u * data.lengths[i]).astype(np.int64),
                   data.lengths[i] - 1)
    if cfg.algorithm == "wzbc" and nu is not None:
        w = np.exp(-cfg.beta * nu[i, j])
    else:
        # bc/zbc, or a one-trajectory dataset where nothing can relabel
        w = np.ones(B)
    flat = data.offsets[i] + t
    return Batch(S=data.S[flat], A=data.A[flat], data_idx=i, style_idx=j,
                 w=w, stop_grad=relabel, zero_style=cfg.algorithm == "bc")


def sample_batch(dataset: Dataset, cfg: TrainConfig,
                 nu: DissimilarityMatrix | None, rng) -> Batch:
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    numat = nu.nu if isinstance(nu, DissimilarityMatrix) else nu
    if cfg.algorithm == "wzbc" and numat is None and len(dataset) > 1:
        raise ValueError("wzbc needs a dissimilarity matrix")
    return _draw(gen, _Transitions(dataset), cfg, numat)


# global-norm gradient ceiling; NLL batches containing hard junction
# samples otherwise jolt the parameters late in training
CLIP_NORM = 10.0

# base rate with a linear anneal to a tenth over the run; at a constant
# rate the batch noise keeps parameter velocity high to the last step
# and the returned model is a per-step lottery
LR = 1e-3
LR_END_FRAC = 0.1


def lr_at(step: int, total: int) -> float:
    frac = step / max(total, 1)
    return LR * (1.0 - (1.0 - LR_END_FRAC) * frac)


def train_step(model: Model, opt: Adam, batch: Batch,
               grad_buf: Model | None = None) -> float:
    loss, grad = model.weighted_nll_and_grad(
        batch.S, batch.style_idx, batch.A, batch.w, batch.stop_grad,
        zero_style=batch.zero_style, grad_out=grad_buf)
    norm = float(np.linalg.norm(grad))
    if norm > CLIP_NORM:
        grad *= CLIP_NORM / norm
    opt.step(model.params, grad)
    return loss


def train(dataset: Dataset, cfg: TrainConfig,
          nu: DissimilarityMatrix | None = None,
          arch: ArchConfig | None = None,
          callback=None) -> tuple[Model, TrainReport]:
    """Full run; deterministic given (dataset, cfg.seed)."""
    n = len(dataset)
    if arch is None:
        # standardize state inputs so position and style enter the first
        # layer at comparable scale; the constants ride in the arch so
        # checkpoints stay self-contained
        allS = np.concatenate([np.asarray(t.states) for t in dataset])
        center = allS.mean(axis=0)
        scale = np.maximum(allS.std(axis=0), 1e-6)
        arch = ArchConfig(n_styles=n, in_center=tuple(center),
                          in_scale=tuple(scale))
    if cfg.algorithm == "wzbc" and nu is None:
        nu = dissimilarity_matrix(dataset) if n > 1 else None
    numat = nu.nu if isinstance(nu, DissimilarityMatrix) else nu
    root = RngStream(cfg.seed, "train")
    model = Model.init(arch, root.derive("init"))
    opt = Adam(model.params.size)
    gen = root.derive("batches").generator()
    data = _Transitions(dataset)
    report = TrainReport(config={
        "algorithm": cfg.algorithm, "steps": cfg.steps,
        "batch_size": cfg.batch_size, "beta": cfg.beta,
        "relabel_prob": cfg.relabel_prob, "seed": cfg.seed,
    })
    t0 = time.perf_counter()
    loss = float("nan")
    grad_buf = Model(arch, np.zeros_like(model.params))
    for step in range(1, cfg.steps + 1):
        batch = _draw(gen, data, cfg, numat)
        opt.lr = lr_at(step, cfg.steps)
        try:
            loss = train_step(model, opt, batch, grad_buf)
        except RuntimeError as e:
            raise RuntimeError(f"step {step}: {e}") from e
        if step == 1 or step % cfg.eval_every == 0 or step == cfg.steps:
            report.loss_curve.append((step, float(loss)))
            if callback is not None and step % cfg.eval_every == 0:
                callback(step, model)
    report.wall_clock_s = time.perf_counter() - t0
    report.final_loss = float(loss)
    return model, report
