"""Speaker-listener agents trained with REINFORCE.

Every agent owns one object encoder and two recurrent heads: a sender
LSTM that emits tokens, and a receiver LSTM that reads a message and
scores candidates by dot product. Forward and backward passes are written
out by hand in float64 numpy so gradients can be checked against finite
differences.

Parameter groups
----------------
``enc_*``        two-layer feedforward encoder (one-hot factors -> hidden)
``embedding``    token embedding shared by both heads
``snd_*``        sender LSTM cell and hidden -> vocabulary projection
``rcv_*``        receiver LSTM cell
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .world import GameBatch, reward

EOS = 0
CHECKPOINT_VERSION = 1

ENCODER_KEYS = ("enc_W1", "enc_b1", "enc_W2", "enc_b2")
EMBED_KEYS = ("embedding",)
SENDER_KEYS = ("snd_Wx", "snd_Wh", "snd_b", "snd_Wout", "snd_bout")
RECEIVER_KEYS = ("rcv_Wx", "rcv_Wh", "rcv_b")
SENDER_TRAINABLE = ENCODER_KEYS + EMBED_KEYS + SENDER_KEYS
RECEIVER_TRAINABLE = ENCODER_KEYS + EMBED_KEYS + RECEIVER_KEYS


@dataclass(frozen=True)
class AgentConfig:
    vocab: int = 20
    max_len: int = 5
    embed_dim: int = 32
    hidden: int = 64
    encoder_hidden: int = 64
    cardinalities: tuple[int, int, int] = (5, 8, 5)
    init_scale: float = 0.5

    @property
    def n_features(self) -> int:
        return int(sum(self.cardinalities))


@dataclass(frozen=True)
class OptimizerConfig:
    lr: float = 1.0
    clip_norm: float = 5.0
    entropy_switch_steps: int = 1_000_000


def init_params(cfg: AgentConfig, rng: np.random.Generator) -> dict[str, np.ndarray]:
    H, E, V = cfg.hidden, cfg.embed_dim, cfg.vocab
    shapes = {
        "enc_W1": (cfg.n_features, cfg.encoder_hidden),
        "enc_b1": (cfg.encoder_hidden,),
        "enc_W2": (cfg.encoder_hidden, H),
        "enc_b2": (H,),
        "embedding": (V, E),
        "snd_Wx": (E, 4 * H),
        "snd_Wh": (H, 4 * H),
        "snd_b": (4 * H,),
        "snd_Wout": (H, V),
        "snd_bout": (V,),
        "rcv_Wx": (E, 4 * H),
        "rcv_Wh": (H, 4 * H),
        "rcv_b": (4 * H,),
    }
    s = cfg.init_scale
    return {k: rng.uniform(-s, s, size=shape) for k, shape in shapes.items()}


@dataclass
class Agent:
    params: dict[str, np.ndarray]
    sender_steps: int = 0

    @classmethod
    def create(cls, cfg: AgentConfig, rng: np.random.Generator) -> "Agent":
        return cls(init_params(cfg, rng))

    def copy(self) -> "Agent":
        return Agent({k: v.copy() for k, v in self.params.items()}, self.sender_steps)


# -- small numerics ---------------------------------------------------------

def _sigmoid(x):
    return 0.5 * (1.0 + np.tanh(0.5 * x))


def _log_softmax(x):
    z = x - x.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def _sample_rows(probs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(probs, axis=-1)
    r = rng.random(probs.shape[0]) * cdf[:, -1]
    return np.minimum((cdf <= r[:, None]).sum(axis=-1), probs.shape[-1] - 1)


def one_hot_objects(objs: np.ndarray, cardinalities) -> np.ndarray:
    objs = np.asarray(objs).reshape(-1, 3)
    offsets = np.concatenate([[0], np.cumsum(cardinalities)[:-1]])
    x = np.zeros((objs.shape[0], int(sum(cardinalities))))
    rows = np.arange(objs.shape[0])
    for j in range(3):
        x[rows, offsets[j] + objs[:, j]] = 1.0
    return x


# -- encoder ----------------------------------------------------------------

def encoder_forward(params, objs, cardinalities):
    x = one_hot_objects(objs, cardinalities)
    h1 = np.tanh(x @ params["enc_W1"] + params["enc_b1"])
    u = h1 @ params["enc_W2"] + params["enc_b2"]
    return u, (x, h1)


def encoder_backward(params, cache, du, grads):
    x, h1 = cache
    grads["enc_W2"] += h1.T @ du
    grads["enc_b2"] += du.sum(0)
    da1 = (du @ params["enc_W2"].T) * (1.0 - h1 * h1)
    grads["enc_W1"] += x.T @ da1
    grads["enc_b1"] += da1.sum(0)


def encode(params, obj, cardinalities=(5, 8, 5)) -> np.ndarray:
    """Embedding of a single object (or a stack of objects)."""
    objs = np.asarray(obj)
    u, _ = encoder_forward(params, objs, cardinalities)
    return u[0] if objs.ndim == 1 else u


# -- LSTM cell --------------------------------------------------------------

def _lstm_step(x, h, c, Wx, Wh, b):
    H = h.shape[1]
    a = x @ Wx + h @ Wh + b
    gates = _sigmoid(a[:, :3 * H])
    i, f, o = gates[:, :H], gates[:, H:2 * H], gates[:, 2 * H:]
    g = np.tanh(a[:, 3 * H:])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    h_new = o * tc
    return h_new, c_new, (x, h, c, i, f, o, g, tc)


def _lstm_step_backward(cache, dh, dc, Wx, Wh, gWx, gWh, gb):
    x, h_prev, c_prev, i, f, o, g, tc = cache
    do = dh * tc
    dc = dc + dh * o * (1.0 - tc * tc)
    da = np.concatenate([
        dc * g * i * (1.0 - i),
        dc * c_prev * f * (1.0 - f),
        do * o * (1.0 - o),
        dc * i * (1.0 - g * g),
    ], axis=1)
    gWx += x.T @ da
    gWh += h_prev.T @ da
    gb += da.sum(0)
    return da @ Wx.T, da @ Wh.T, dc * f


# -- sender -----------------------------------------------------------------

@dataclass
class SenderOutput:
    """Batched sender rollout.

    ``tokens`` is padded with EOS past each message's end; ``log_probs`` and
    ``step_entropy`` are zero on padded steps.
    """

    tokens: np.ndarray  # (B, L) int
    lengths: np.ndarray  # (B,)
    log_probs: np.ndarray  # (B, L)
    step_entropy: np.ndarray  # (B, L)
    probs: np.ndarray  # (B, L, V)
    mask: np.ndarray  # (B, L)
    cache: list = field(default_factory=list, repr=False)

    @property
    def entropy(self) -> np.ndarray:
        return self.step_entropy.sum(axis=1)

    def message(self, b: int) -> list[int]:
        return self.tokens[b, : self.lengths[b]].tolist()


def sender_forward(params, u, max_len: int, rng: np.random.Generator | None = None,
                   tokens: np.ndarray | None = None) -> SenderOutput:
    """Roll out the sender from hidden state ``u``.

    Samples tokens with ``rng``, or replays ``tokens`` when given (used to
    recompute a fixed trajectory).
    """
    u = np.atleast_2d(u)
    B = u.shape[0]
    E = params["embedding"].shape[1]
    h, c = u, np.zeros_like(u)
    x = np.zeros((B, E))
    out_tokens = np.zeros((B, max_len), dtype=np.int64)
    logps = np.zeros((B, max_len))
    ents = np.zeros((B, max_len))
    probs_all = np.zeros((B, max_len, params["embedding"].shape[0]))
    mask = np.zeros((B, max_len))
    finished = np.zeros(B, dtype=bool)
    cache = []
    for t in range(max_len):
        h, c, step_cache = _lstm_step(x, h, c, params["snd_Wx"], params["snd_Wh"], params["snd_b"])
        logits = h @ params["snd_Wout"] + params["snd_bout"]
        logp = _log_softmax(logits)
        p = np.exp(logp)
        if tokens is None:
            tok = _sample_rows(p, rng)
        else:
            tok = np.asarray(tokens)[:, t].astype(np.int64)
        active = ~finished
        tok = np.where(active, tok, EOS)
        mask[:, t] = active
        out_tokens[:, t] = tok
        logps[:, t] = np.where(active, logp[np.arange(B), tok], 0.0)
        ents[:, t] = np.where(active, -(p * logp).sum(axis=1), 0.0)
        probs_all[:, t] = p
        cache.append((step_cache, h, p, logp))
        finished |= tok == EOS
        x = params["embedding"][tok]
    lengths = mask.sum(axis=1).astype(np.int64)
    return SenderOutput(out_tokens, lengths, logps, ents, probs_all, mask, cache)


def sender_backward(params, out: SenderOutput, coef_logp, coef_ent, grads):
    """Accumulate d/dparams of sum_b [coef_logp_b * sum_t logp + coef_ent_b * H_b].

    Returns the gradient with respect to the initial hidden state ``u``.
    """
    B, L = out.tokens.shape
    rows = np.arange(B)
    dh_next = np.zeros((B, params["snd_Wh"].shape[0]))
    dc_next = np.zeros_like(dh_next)
    for t in reversed(range(L)):
        step_cache, h, p, logp = out.cache[t]
        m = out.mask[:, t]
        ent = out.step_entropy[:, t]
        onehot = np.zeros_like(p)
        onehot[rows, out.tokens[:, t]] = 1.0
        dlogits = (m * coef_logp)[:, None] * (onehot - p)
        dlogits += (m * coef_ent)[:, None] * (-p * (logp + ent[:, None]))
        grads["snd_Wout"] += h.T @ dlogits
        grads["snd_bout"] += dlogits.sum(0)
        dh = dh_next + dlogits @ params["snd_Wout"].T
        dx, dh_next, dc_next = _lstm_step_backward(
            step_cache, dh, dc_next, params["snd_Wx"], params["snd_Wh"],
            grads["snd_Wx"], grads["snd_Wh"], grads["snd_b"])
        if t > 0:
            np.add.at(grads["embedding"], out.tokens[:, t - 1], dx)
    return dh_next


# -- receiver ---------------------------------------------------------------

@dataclass
class ReceiverOutput:
    choice: np.ndarray  # (B,)
    log_prob: np.ndarray  # (B,)
    distribution: np.ndarray  # (B, X)
    z: np.ndarray  # (B, H)
    cache: tuple = field(default=(), repr=False)


def receiver_forward(params, tokens, lengths, cand_emb, rng: np.random.Generator | None = None,
                     choice: np.ndarray | None = None) -> ReceiverOutput:
    """Read messages, then pick among candidate embeddings ``(B, X, H)``."""
    tokens = np.atleast_2d(tokens)
    lengths = np.atleast_1d(lengths)
    cand_emb = np.asarray(cand_emb)
    if cand_emb.ndim == 2:
        cand_emb = cand_emb[None]
    B = tokens.shape[0]
    H = params["rcv_Wh"].shape[0]
    T = int(lengths.max())
    h, c = np.zeros((B, H)), np.zeros((B, H))
    hs, steps = [], []
    for t in range(T):
        x = params["embedding"][tokens[:, t]]
        h, c, step_cache = _lstm_step(x, h, c, params["rcv_Wx"], params["rcv_Wh"], params["rcv_b"])
        hs.append(h)
        steps.append(step_cache)
    rows = np.arange(B)
    z = np.stack(hs)[lengths - 1, rows]
    scores = np.einsum("bh,bxh->bx", z, cand_emb)
    logp = _log_softmax(scores)
    p = np.exp(logp)
    if choice is None:
        choice = _sample_rows(p, rng)
    choice = np.asarray(choice, dtype=np.int64)
    return ReceiverOutput(choice, logp[rows, choice], p, z, (tokens[:, :T], lengths, steps, cand_emb))


def receiver_backward(params, out: ReceiverOutput, coef, grads):
    """Accumulate d/dparams of sum_b coef_b * log p(choice_b); returns d/d(cand_emb)."""
    tokens, lengths, steps, cand_emb = out.cache
    B, T = tokens.shape
    rows = np.arange(B)
    onehot = np.zeros_like(out.distribution)
    onehot[rows, out.choice] = 1.0
    dscores = coef[:, None] * (onehot - out.distribution)
    dz = np.einsum("bx,bxh->bh", dscores, cand_emb)
    dU = dscores[:, :, None] * out.z[:, None, :]
    dh = np.zeros_like(dz)
    dc = np.zeros_like(dz)
    for t in reversed(range(T)):
        dh = dh + np.where((lengths - 1 == t)[:, None], dz, 0.0)
        dx, dh, dc = _lstm_step_backward(steps[t], dh, dc, params["rcv_Wx"], params["rcv_Wh"],
                                         grads["rcv_Wx"], grads["rcv_Wh"], grads["rcv_b"])
        np.add.at(grads["embedding"], tokens[:, t], dx)
    return dU


# -- objective --------------------------------------------------------------

@dataclass
class LossTerms:
    reward: np.ndarray
    baseline: float
    sender_logprob_sum: np.ndarray
    receiver_logprob: np.ndarray
    entropy: np.ndarray
    alpha: float

    @property
    def advantage(self) -> np.ndarray:
        return self.reward - self.baseline


def compute_losses(sender_out: SenderOutput, receiver_out: ReceiverOutput, R, b: float,
                   alpha: float) -> tuple[LossTerms, float]:
    """Per-game terms and the batch-mean objective to maximize.

    ``J = (R - b) * (sum_t log pi_S + log pi_L) + alpha * H_S``
    """
    R = np.asarray(R, dtype=float)
    terms = LossTerms(R, float(b), sender_out.log_probs.sum(axis=1), receiver_out.log_prob,
                      sender_out.entropy, float(alpha))
    J = terms.advantage * (terms.sender_logprob_sum + terms.receiver_logprob) + alpha * terms.entropy
    return terms, float(J.mean())


def entropy_coefficient(speaker_steps: int, R, b, switch_steps: int = 1_000_000) -> float:
    """Entropy weight: ``0.1 - |R - b| * 0.1`` early on, then 0.01.

    For a minibatch the mean absolute advantage is used.
    """
    if speaker_steps >= switch_steps:
        return 0.01
    return 0.1 - float(np.mean(np.abs(np.asarray(R, dtype=float) - b))) * 0.1


@dataclass
class Rollout:
    """Everything sampled in one minibatch, enough to recompute the objective."""

    games: GameBatch
    sender_out: SenderOutput
    receiver_out: ReceiverOutput
    rewards: np.ndarray
    baseline: float
    alpha: float
    encoder_caches: tuple = field(default=(), repr=False)


def play(sender: Agent, receiver: Agent, games: GameBatch, cfg: AgentConfig,
         rng: np.random.Generator, speaker_steps: int | None = None,
         switch_steps: int = 1_000_000) -> Rollout:
    card = cfg.cardinalities
    u_t, s_enc = encoder_forward(sender.params, games.targets, card)
    s_out = sender_forward(sender.params, u_t, cfg.max_len, rng)
    B, X = games.target_index.shape[0], games.candidates.shape[1]
    U, r_enc = encoder_forward(receiver.params, games.candidates.reshape(-1, 3), card)
    r_out = receiver_forward(receiver.params, s_out.tokens, s_out.lengths, U.reshape(B, X, -1), rng)
    R = reward(r_out.choice, games.target_index)
    b = float(R.mean())
    steps = sender.sender_steps if speaker_steps is None else speaker_steps
    alpha = entropy_coefficient(steps, R, b, switch_steps)
    return Rollout(games, s_out, r_out, R, b, alpha, (s_enc, r_enc))


def _backprop(sender_params, receiver_params, rollout: Rollout):
    s_out, r_out = rollout.sender_out, rollout.receiver_out
    s_enc, r_enc = rollout.encoder_caches
    B, X = rollout.games.candidates.shape[:2]
    adv = (rollout.rewards - rollout.baseline) / B
    gs = {k: np.zeros_like(v) for k, v in sender_params.items()}
    gr = {k: np.zeros_like(v) for k, v in receiver_params.items()}
    du = sender_backward(sender_params, s_out, adv, np.full(B, rollout.alpha / B), gs)
    encoder_backward(sender_params, s_enc, du, gs)
    dU = receiver_backward(receiver_params, r_out, adv, gr)
    encoder_backward(receiver_params, r_enc, dU.reshape(B * X, -1), gr)
    return gs, gr


def replay(sender_params, receiver_params, rollout: Rollout, cfg: AgentConfig) -> Rollout:
    """Recompute a rollout under new parameters, keeping its tokens, choices and rewards."""
    games, card = rollout.games, cfg.cardinalities
    B, X = games.candidates.shape[:2]
    u_t, s_enc = encoder_forward(sender_params, games.targets, card)
    s_out = sender_forward(sender_params, u_t, cfg.max_len, tokens=rollout.sender_out.tokens)
    U, r_enc = encoder_forward(receiver_params, games.candidates.reshape(-1, 3), card)
    r_out = receiver_forward(receiver_params, s_out.tokens, s_out.lengths, U.reshape(B, X, -1),
                             choice=rollout.receiver_out.choice)
    return Rollout(games, s_out, r_out, rollout.rewards, rollout.baseline, rollout.alpha, (s_enc, r_enc))


def objective(sender_params, receiver_params, rollout: Rollout, cfg: AgentConfig) -> float:
    r = replay(sender_params, receiver_params, rollout, cfg)
    return compute_losses(r.sender_out, r.receiver_out, r.rewards, r.baseline, r.alpha)[1]


def objective_and_grads(sender_params, receiver_params, rollout: Rollout, cfg: AgentConfig):
    """Batch-mean objective J for a fixed trajectory and its exact gradients.

    The message tokens and receiver choice are replayed from ``rollout``;
    rewards, baseline and entropy weight are held constant.
    Returns ``(J, grads_sender, grads_receiver)``.
    """
    r = replay(sender_params, receiver_params, rollout, cfg)
    _, J = compute_losses(r.sender_out, r.receiver_out, r.rewards, r.baseline, r.alpha)
    gs, gr = _backprop(sender_params, receiver_params, r)
    return J, gs, gr


def _sgd_step(agent: Agent, grads, keys, opt: OptimizerConfig) -> float:
    norm = float(np.sqrt(sum(float((grads[k] ** 2).sum()) for k in keys)))
    if not np.isfinite(norm):
        bad = [k for k in keys if not np.all(np.isfinite(grads[k]))]
        raise FloatingPointError(f"non-finite gradient in {bad}")
    scale = opt.lr * min(1.0, opt.clip_norm / norm) if norm > 0 else 0.0
    for k in keys:
        # gradients are of J; ascending J == descending -J
        agent.params[k] += scale * grads[k]
    return norm


def apply_update(sender: Agent, receiver: Agent, rollout: Rollout, cfg: AgentConfig,
                 opt: OptimizerConfig) -> tuple[float, float]:
    """One REINFORCE step on a played minibatch.

    The sender updates its encoder, embedding and sender head; the receiver
    updates its encoder, embedding and receiver head. Returns the two
    pre-clipping gradient norms.
    """
    if sender is receiver:
        raise ValueError("an agent cannot play against itself")
    gs, gr = _backprop(sender.params, receiver.params, rollout)
    ns = _sgd_step(sender, gs, SENDER_TRAINABLE, opt)
    nr = _sgd_step(receiver, gr, RECEIVER_TRAINABLE, opt)
    sender.sender_steps += len(rollout.rewards)
    return ns, nr


# -- checkpoints ------------------------------------------------------------

def save_params(params: dict[str, np.ndarray], path: str | Path) -> None:
    buf = io.BytesIO()
    np.savez(buf, __version__=np.array(CHECKPOINT_VERSION), **params)
    Path(path).write_bytes(buf.getvalue())


def load_params(path: str | Path) -> dict[str, np.ndarray]:
    with np.load(path) as data:
        version = int(data["__version__"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        return {k: data[k].copy() for k in data.files if k != "__version__"}
