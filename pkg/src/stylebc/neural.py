"""Hand-rolled numpy stack for the style-conditioned Gaussian policy.

One flat float64 parameter vector holds, in order: the MLP weights and
biases (input layer, hidden layers, output head), the two global
log-std entries, then the style codebook row-major.  Named views into
the vector are used everywhere, so the optimizer works on the single
flat array.  The backward pass is hand-derived for this fixed graph;
the only composite loss is the weighted Gaussian negative
log-likelihood used by all three trainers.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass

import numpy as np

from .types import RngStream

LOG_STD_MIN = -3.0
LOG_STD_MAX = 2.0
LOG_2PI = float(np.log(2.0 * np.pi))
CKPT_MAGIC = b"SWRCK1"

# merge scale for skip connections; the relu and carry branches are
# positively correlated, so 1/sqrt(2) still lets variance grow with
# depth.  0.6 keeps every pre-activation variance inside [0.5, 2] for
# depth 10 at init (measured, 10 seeds x 8k unit-Gaussian inputs).
SKIP_SCALE = 0.6


@dataclass(frozen=True)
class ArchConfig:
    n_styles: int
    d_state: int = 2
    d_z: int = 10
    hidden: int = 128
    num_hidden: int = 10
    skip_every: int = 2
    # fixed affine input transform (s - in_center) / in_scale applied to
    # the state half of the input; empty tuples mean identity.  Kept in
    # the arch so a checkpoint carries its own normalization constants.
    in_center: tuple = ()
    in_scale: tuple = ()

    def __post_init__(self):
        if self.n_styles < 1 or self.num_hidden < 1 or self.hidden < 1:
            raise ValueError("sizes must be >= 1")
        if self.d_z < 1 or self.d_state < 1:
            raise ValueError("dims must be >= 1")
        object.__setattr__(self, "in_center",
                           tuple(float(v) for v in self.in_center))
        object.__setattr__(self, "in_scale",
                           tuple(float(v) for v in self.in_scale))
        if len(self.in_center) not in (0, self.d_state):
            raise ValueError("in_center length must match d_state")
        if len(self.in_scale) not in (0, self.d_state):
            raise ValueError("in_scale length must match d_state")
        if any(v <= 0 for v in self.in_scale):
            raise ValueError("in_scale entries must be positive")

    @property
    def d_in(self) -> int:
        return self.d_state + self.d_z

    def merges_at(self, k: int) -> bool:
        s = self.skip_every
        return s > 0 and k >= s and k % s == 0


def _layout(arch: ArchConfig) -> list[tuple[str, tuple[int, ...]]]:
    out = []
    fan = arch.d_in
    for k in range(arch.num_hidden):
        out.append((f"w{k}", (arch.hidden, fan)))
        out.append((f"b{k}", (arch.hidden,)))
        fan = arch.hidden
    out.append(("w_out", (arch.d_state, arch.hidden)))
    out.append(("b_out", (arch.d_state,)))
    out.append(("log_std", (arch.d_state,)))
    out.append(("codebook", (arch.n_styles, arch.d_z)))
    return out


def n_params(arch: ArchConfig) -> int:
    return sum(int(np.prod(shape)) for _, shape in _layout(arch))


class Model:
    """MLP policy plus style codebook over one flat parameter vector."""

    def __init__(self, arch: ArchConfig, params: np.ndarray):
        params = np.asarray(params, dtype=np.float64)
        if params.shape != (n_params(arch),):
            raise ValueError("parameter vector has wrong size")
        self.arch = arch
        self.params = params
        self._views = {}
        off = 0
        for name, shape in _layout(arch):
            size = int(np.prod(shape))
            self._views[name] = params[off:off + size].reshape(shape)
            off += size

    def view(self, name: str) -> np.ndarray:
        return self._views[name]

    @property
    def codebook(self) -> np.ndarray:
        return self._views["codebook"]

    @property
    def log_std(self) -> np.ndarray:
        return np.clip(self._views["log_std"], LOG_STD_MIN, LOG_STD_MAX)

    @classmethod
    def init(cls, arch: ArchConfig, rng) -> "Model":
        gen = rng.generator() if isinstance(rng, RngStream) else rng
        model = cls(arch, np.zeros(n_params(arch)))
        for k in range(arch.num_hidden):
            w = model.view(f"w{k}")
            gain = 1.0 if k == 0 else np.sqrt(2.0)
            w[:] = gen.normal(0.0, gain / np.sqrt(w.shape[1]), w.shape)
        w = model.view("w_out")
        w[:] = gen.normal(0.0, 1.0 / np.sqrt(w.shape[1]), w.shape)
        model.codebook[:] = gen.normal(0.0, 1.0, model.codebook.shape)
        return model

    def copy(self) -> "Model":
        return Model(self.arch, self.params.copy())

    def _standardize(self, S2: np.ndarray) -> np.ndarray:
        arch = self.arch
        if arch.in_center:
            S2 = S2 - np.asarray(arch.in_center)
        if arch.in_scale:
            S2 = S2 / np.asarray(arch.in_scale)
        return S2

    # ---- forward -----------------------------------------------------

    def _forward(self, X: np.ndarray, cache: bool):
        arch = self.arch
        pre = []
        hs = []
        cur = X
        for k in range(arch.num_hidden):
            a = cur @ self.view(f"w{k}").T + self.view(f"b{k}")
            r = np.maximum(a, 0.0)
            h = (r + hs[k - arch.skip_every]) * SKIP_SCALE if arch.merges_at(k) else r
            if cache:
                pre.append(a)
            hs.append(h)
            cur = h
        mean = cur @ self.view("w_out").T + self.view("b_out")
        return (mean, pre, hs) if cache else (mean, None, None)

    def forward(self, S, Z):
        """Batched (or single) action mean and the clamped log-std."""
        S = np.asarray(S, dtype=np.float64)
        Z = np.asarray(Z, dtype=np.float64)
        single = S.ndim == 1
        S2 = S.reshape(-1, self.arch.d_state)
        Z2 = Z.reshape(-1, self.arch.d_z)
        if Z2.shape[0] == 1 and S2.shape[0] > 1:
            Z2 = np.broadcast_to(Z2, (S2.shape[0], self.arch.d_z))
        if S2.shape[0] != Z2.shape[0]:
            raise ValueError("state/style batch mismatch")
        X = np.concatenate([self._standardize(S2), Z2], axis=1)
        mean, _, _ = self._forward(X, cache=False)
        return (mean[0] if single else mean), self.log_std

    def log_prob(self, S, Z, A):
        """Diagonal-Gaussian log density of actions A under (S, Z)."""
        mean, log_std = self.forward(S, Z)
        A = np.asarray(A, dtype=np.float64)
        single = A.ndim == 1
        A2 = A.reshape(-1, self.arch.d_state)
        m2 = mean.reshape(-1, self.arch.d_state)
        inv_var = np.exp(-2.0 * log_std)
        lp = (-0.5 * ((A2 - m2) ** 2 * inv_var).sum(axis=1)
              - log_std.sum() - 0.5 * self.arch.d_state * LOG_2PI)
        return float(lp[0]) if single else lp

    # ---- loss + hand-derived backward --------------------------------

    def weighted_nll_and_grad(self, S, style_idx, A, w, stop_grad,
                              zero_style: bool = False,
                              grad_out: "Model | None" = None):
        """loss = -mean_b w_b log pi(a_b | s_b, z_{j_b}) and its gradient.

        style_idx selects codebook rows; rows flagged in stop_grad are
        consumed as constants (their codebook gradient stays zero).
        With zero_style the style input is a fixed zero vector and the
        codebook is not involved at all.  grad_out, when given, is a
        same-arch Model whose vector receives the gradient in place
        (saves an allocation per step).  Returns (loss, flat gradient
        aligned with self.params).
        """
        arch = self.arch
        S = np.asarray(S, dtype=np.float64).reshape(-1, arch.d_state)
        A = np.asarray(A, dtype=np.float64).reshape(-1, arch.d_state)
        style_idx = np.asarray(style_idx, dtype=np.int64).reshape(-1)
        w = np.asarray(w, dtype=np.float64).reshape(-1)
        stop_grad = np.asarray(stop_grad, dtype=bool).reshape(-1)
        B = S.shape[0]
        Z = np.zeros((B, arch.d_z)) if zero_style else self.codebook[style_idx]
        X = np.concatenate([self._standardize(S), Z], axis=1)
        mean, pre, hs = self._forward(X, cache=True)

        raw_ls = self._views["log_std"]
        ls = np.clip(raw_ls, LOG_STD_MIN, LOG_STD_MAX)
        inv_var = np.exp(-2.0 * ls)
        diff = A - mean
        lp = (-0.5 * (diff ** 2 * inv_var).sum(axis=1)
              - ls.sum() - 0.5 * arch.d_state * LOG_2PI)
        loss = -(w * lp).mean()
        if not np.isfinite(loss):
            raise RuntimeError(
                f"divergence: non-finite loss (|mean|max="
                f"{np.abs(mean).max():.3e}, log_std={ls})")

        if grad_out is None:
            gm = Model(arch, np.zeros_like(self.params))
        else:
            gm = grad_out
            gm.params.fill(0.0)
        grad = gm.params

        coef = w / B  # d loss / d lp_b = -coef_b
        # d lp / d mean = diff * inv_var, so d loss / d mean:
        gmean = -coef[:, None] * diff * inv_var
        # d lp / d ls_d = diff_d^2 * inv_var_d - 1
        gls = -(coef[:, None] * (diff ** 2 * inv_var - 1.0)).sum(axis=0)
        gls[(raw_ls <= LOG_STD_MIN) | (raw_ls >= LOG_STD_MAX)] = 0.0
        gm.view("log_std")[:] = gls

        gm.view("w_out")[:] = gmean.T @ hs[-1]
        gm.view("b_out")[:] = gmean.sum(axis=0)
        gh = [None] * arch.num_hidden
        gh[-1] = gmean @ self.view("w_out")
        gx = None
        for k in range(arch.num_hidden - 1, -1, -1):
            g = gh[k]
            if arch.merges_at(k):
                gskip = g * SKIP_SCALE
                prev = gh[k - arch.skip_every]
                gh[k - arch.skip_every] = gskip if prev is None else prev + gskip
                g = gskip
            ga = g * (pre[k] > 0.0)
            inp = hs[k - 1] if k > 0 else X
            gm.view(f"w{k}")[:] = ga.T @ inp
            gm.view(f"b{k}")[:] = ga.sum(axis=0)
            back = ga @ self.view(f"w{k}")
            if k > 0:
                gh[k - 1] = back if gh[k - 1] is None else gh[k - 1] + back
            else:
                gx = back
        if not zero_style:
            gz = gx[:, arch.d_state:]
            live = ~stop_grad
            np.add.at(gm.view("codebook"), style_idx[live], gz[live])
        return loss, grad


class Adam:
    """Adaptive-moment optimizer over one flat parameter vector."""

    def __init__(self, size: int, lr: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self._buf = np.empty(size)
        self.t = 0

    def step(self, params: np.ndarray, grads: np.ndarray):
        # grads @ grads is non-negative termwise, so inf/nan anywhere
        # surfaces in the reduction; cheaper than an isfinite pass
        if not np.isfinite(grads @ grads):
            raise RuntimeError("divergence: non-finite gradients")
        self.t += 1
        m, v, buf = self.m, self.v, self._buf
        m *= self.beta1
        np.multiply(grads, 1.0 - self.beta1, out=buf)
        m += buf
        v *= self.beta2
        np.multiply(grads, grads, out=buf)
        buf *= 1.0 - self.beta2
        v += buf
        # update = lr * mhat / (sqrt(vhat) + eps) with the bias
        # corrections folded into the step size and eps
        bc2 = np.sqrt(1.0 - self.beta2 ** self.t)
        alpha = self.lr * bc2 / (1.0 - self.beta1 ** self.t)
        np.sqrt(v, out=buf)
        buf += self.eps * bc2
        np.divide(m, buf, out=buf)
        buf *= alpha
        params -= buf


def save_checkpoint(path, model: Model):
    blob = json.dumps(asdict(model.arch), sort_keys=True).encode()
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<QQQ", model.arch.n_styles, model.arch.d_z,
                             len(blob)))
        fh.write(blob)
        fh.write(np.ascontiguousarray(model.params).tobytes())


def load_checkpoint(path) -> Model:
    with open(path, "rb") as fh:
        magic = fh.read(len(CKPT_MAGIC))
        if magic != CKPT_MAGIC:
            raise ValueError(f"not a checkpoint: bad magic {magic!r}")
        n_styles, d_z, blob_len = struct.unpack("<QQQ", fh.read(24))
        arch = ArchConfig(**json.loads(fh.read(blob_len)))
        if arch.n_styles != n_styles or arch.d_z != d_z:
            raise ValueError("checkpoint header disagrees with arch blob")
        params = np.frombuffer(fh.read(8 * n_params(arch)), dtype="<f8")
        if params.size != n_params(arch):
            raise ValueError("truncated checkpoint")
    return Model(arch, params.copy())
