"""Two agents learning meaning functions by REINFORCE through RSA / sRSA.

Each agent owns a one-hidden-layer MLP mapping a (scaled) CIELAB vector to
``V`` word scores. Pragmatic agents squash the scores with a sigmoid into a
meaning function and reason on it with the recursion; the RL baseline uses
the raw scores with a softmax for both roles.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import metrics
from .autodiff import GradTape
from .color import MunsellChart, meaning_distribution, perceptual_similarity
from .errors import NonFiniteGradient
from .game import Endpoint, RecursionConfig, Start, StructuredGame, run_recursion
from .metrics import EfficiencyPoint

log = logging.getLogger(__name__)

VARIANTS = ("rsa", "srsa", "rl")
LAB_SCALE = 100.0


@dataclass
class MlpParams:
    W1: np.ndarray  # [hidden, 3]
    b1: np.ndarray  # [hidden]
    W2: np.ndarray  # [V, hidden]
    b2: np.ndarray  # [V]
    output: str = "sigmoid"  # or "linear"

    NAMES = ("W1", "b1", "W2", "b2")

    @classmethod
    def init(cls, rng, vocab: int, hidden: int = 25, output: str = "sigmoid",
             scale: float = 0.5) -> "MlpParams":
        u = lambda *shape: rng.uniform(-scale, scale, size=shape)
        return cls(u(hidden, 3), u(hidden), u(vocab, hidden), u(vocab), output)

    @classmethod
    def zeros(cls, vocab: int, hidden: int = 25, output: str = "sigmoid") -> "MlpParams":
        return cls(np.zeros((hidden, 3)), np.zeros(hidden), np.zeros((vocab, hidden)),
                   np.zeros(vocab), output)

    @property
    def vocab(self) -> int:
        return self.W2.shape[0]

    def arrays(self) -> list:
        return [self.W1, self.b1, self.W2, self.b2]

    def with_arrays(self, arrays) -> "MlpParams":
        return MlpParams(*[np.array(a, dtype=float) for a in arrays], output=self.output)

    def flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self.arrays()])

    def from_flat(self, vec) -> "MlpParams":
        out, i = [], 0
        for a in self.arrays():
            out.append(np.asarray(vec[i:i + a.size], dtype=float).reshape(a.shape))
            i += a.size
        return self.with_arrays(out)

    def to_json(self) -> dict:
        return {"output": self.output, **{k: getattr(self, k).tolist() for k in self.NAMES}}

    @classmethod
    def from_json(cls, obj) -> "MlpParams":
        return cls(*[np.array(obj[k], dtype=float) for k in cls.NAMES], output=obj["output"])


@dataclass(frozen=True)
class TrainConfig:
    variant: str = "srsa"
    depth: int = 2
    alpha: float = 5.0
    context_size: int = 5
    lr: float = 0.001
    updates: int = 10000
    batch: int = 100
    vocab: int = 100
    hidden: int = 25
    init_scale: float = 0.5
    aggregate: str = "sum"  # how per-game gradients combine over a batch: "sum" or "mean"
    with_replacement: bool = False  # allow repeated chips within a context
    seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if not 0 <= self.depth <= 5:
            raise ValueError("depth must be in [0, 5]")
        for name in ("alpha", "context_size", "updates", "batch", "vocab", "hidden"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lr < 0:
            raise ValueError("lr must be non-negative")
        if self.aggregate not in ("sum", "mean"):
            raise ValueError("aggregate must be 'sum' or 'mean'")

    @property
    def output(self) -> str:
        return "linear" if self.variant == "rl" else "sigmoid"


# --- forward passes on the tape ------------------------------------------------

def _scores(tape, leaves, labs):
    W1, b1, W2, b2 = leaves
    hidden = tape.relu(tape.affine(labs / LAB_SCALE, W1, b1))
    return tape.affine(hidden, W2, b2)


def mlp_forward(params: MlpParams, lab, tape: GradTape | None = None):
    """Network outputs for one or more CIELAB vectors, plus the tape used."""
    tape = GradTape() if tape is None else tape
    leaves = [tape.leaf(a) for a in params.arrays()]
    out = _scores(tape, leaves, np.asarray(lab, dtype=float))
    if params.output == "sigmoid":
        out = tape.sigmoid(out)
    return out.value, tape, leaves, out


def _agent_policy(tape, leaves, labs, sims, variant, depth, alpha):
    """Log sender [B, n, V] (over words) and log listener [B, n, V] (over meanings)."""
    scores = _scores(tape, leaves, labs)
    if variant == "rl":
        return tape.log_normalize(scores, axis=2), tape.log_normalize(scores, axis=1)
    n = labs.shape[-2]
    log_prior = np.full((1, n, 1), -np.log(n))

    def speak(logL):
        if variant == "srsa":
            utility = tape.log(tape.matmul_left(sims, tape.exp(logL)))
        else:
            utility = logL
        return tape.log_normalize(tape.scale(utility, alpha), axis=2)

    def listen(logS):
        return tape.log_normalize(tape.add(logS, log_prior), axis=1)

    logL = tape.log_normalize(tape.add(tape.log_sigmoid(scores), log_prior), axis=1)
    if depth == 0:
        return speak(logL), logL
    for _ in range(depth):
        logS = speak(logL)
        logL = listen(logS)
    return logS, logL


@dataclass
class Policy:
    log_sender: np.ndarray    # [B, n, V], normalised over words
    log_listener: np.ndarray  # [B, n, V], normalised over context meanings
    tape: GradTape = field(repr=False)
    leaves: list = field(repr=False)
    sender_var: object = field(repr=False)
    listener_var: object = field(repr=False)


def agent_policy(params: MlpParams, labs, sims, cfg: TrainConfig) -> Policy:
    labs = np.asarray(labs, dtype=float)
    sims = np.asarray(sims, dtype=float)
    tape = GradTape()
    leaves = [tape.leaf(a) for a in params.arrays()]
    s, l = _agent_policy(tape, leaves, labs, sims, cfg.variant, cfg.depth, cfg.alpha)
    return Policy(s.value, l.value, tape, leaves, s, l)


def pragmatic_policy(speaker_params, listener_params, labs, sims, cfg: TrainConfig):
    """Speaker's S_t(w|m, C) and listener's L_t(m|w, C) on batched contexts."""
    return agent_policy(speaker_params, labs, sims, cfg), agent_policy(listener_params, labs, sims, cfg)


def rl_baseline_policy(speaker_params, listener_params, labs, cfg: TrainConfig | None = None):
    cfg = replace(cfg or TrainConfig(), variant="rl")
    labs = np.asarray(labs, dtype=float)
    dummy = np.zeros(labs.shape[:-1] + (labs.shape[-2],))
    return agent_policy(speaker_params, labs, dummy, cfg), agent_policy(listener_params, labs, dummy, cfg)


# --- games ----------------------------------------------------------------------

@dataclass
class EpisodeBatch:
    contexts: np.ndarray  # [B, n] chip indices into the chart
    speaker: np.ndarray   # [B] 0 -> agent A speaks, 1 -> agent B speaks
    targets: np.ndarray   # [B] index into the context
    words: np.ndarray     # [B]
    guesses: np.ndarray   # [B]
    rewards: np.ndarray   # [B] in {0, 1}


def sample_contexts(rng, n_chips: int, batch: int, size: int, with_replacement: bool = False) -> np.ndarray:
    """``batch`` rows of ``size`` chip indices, distinct unless ``with_replacement``."""
    if with_replacement:
        return rng.integers(0, n_chips, (batch, size))
    return np.argsort(rng.random((batch, n_chips)), axis=1)[:, :size]


def _sample_rows(rng, logp):
    """One categorical draw per row of ``logp`` [B, K]."""
    cdf = np.cumsum(np.exp(logp), axis=1)
    u = rng.random(len(logp))[:, None] * cdf[:, -1:]
    return np.minimum((cdf < u).sum(axis=1), logp.shape[1] - 1)


class _Env:
    def __init__(self, chart: MunsellChart, sim=None):
        self.labs = chart.labs
        self.sim = perceptual_similarity(chart) if sim is None else sim

    def context_arrays(self, contexts):
        return self.labs[contexts], self.sim[contexts[:, :, None], contexts[:, None, :]]


def play_batch(agent_a: MlpParams, agent_b: MlpParams, cfg: TrainConfig, rng, env) -> tuple:
    """Play ``cfg.batch`` games; returns the batch and each agent's policy."""
    ctx = sample_contexts(rng, len(env.labs), cfg.batch, cfg.context_size, cfg.with_replacement)
    speaker = rng.integers(0, 2, size=cfg.batch)
    targets = rng.integers(0, cfg.context_size, size=cfg.batch)
    labs, sims = env.context_arrays(ctx)
    pol_a = agent_policy(agent_a, labs, sims, cfg)
    pol_b = agent_policy(agent_b, labs, sims, cfg)
    rows = np.arange(cfg.batch)
    a_speaks = (speaker == 0)[:, None]
    log_s = np.where(a_speaks, pol_a.log_sender[rows, targets], pol_b.log_sender[rows, targets])
    words = _sample_rows(rng, log_s)
    log_l = np.where(a_speaks, pol_b.log_listener[rows, :, words], pol_a.log_listener[rows, :, words])
    guesses = _sample_rows(rng, log_l)
    rewards = (guesses == targets).astype(float)
    batch = EpisodeBatch(ctx, speaker, targets, words, guesses, rewards)
    return batch, pol_a, pol_b


def reinforce_gradient(policy: Policy, batch: EpisodeBatch, agent: int, aggregate: str = "sum") -> list:
    """Sum (or mean) over games of r * grad log pi, for agent 0 (A) or 1 (B).

    In games where the agent speaks the action is (target -> word), otherwise
    (word -> guess).
    """
    tape = policy.tape
    rows = np.arange(len(batch.rewards))
    B = len(rows) if aggregate == "mean" else 1
    speaks = batch.speaker == agent
    s_sel = tape.take(policy.sender_var, (rows, batch.targets, batch.words))
    l_sel = tape.take(policy.listener_var, (rows, batch.guesses, batch.words))
    objective = tape.add(tape.weighted_sum(s_sel, batch.rewards * speaks / B),
                         tape.weighted_sum(l_sel, batch.rewards * ~speaks / B))
    return tape.gradient(objective, policy.leaves)


def reinforce_update(params: MlpParams, grads, lr: float) -> MlpParams:
    """Gradient ascent step params + lr * grads; non-finite gradients abort the step."""
    if not all(np.all(np.isfinite(g)) for g in grads):
        raise NonFiniteGradient("non-finite REINFORCE gradient")
    return params.with_arrays([a + lr * g for a, g in zip(params.arrays(), grads)])


@dataclass
class TrainResult:
    config: TrainConfig
    agent_a: MlpParams
    agent_b: MlpParams
    rewards: np.ndarray  # mean reward per update
    skipped: int = 0


def train(cfg: TrainConfig, chart: MunsellChart, sim=None, progress=None) -> TrainResult:
    """Run ``cfg.updates`` batches of self-play; deterministic per ``cfg.seed``."""
    rng = np.random.default_rng(cfg.seed)
    env = _Env(chart, sim)
    a = MlpParams.init(rng, cfg.vocab, cfg.hidden, cfg.output, cfg.init_scale)
    b = MlpParams.init(rng, cfg.vocab, cfg.hidden, cfg.output, cfg.init_scale)
    rewards = np.zeros(cfg.updates)
    skipped = 0
    for step in range(cfg.updates):
        batch, pol_a, pol_b = play_batch(a, b, cfg, rng, env)
        rewards[step] = batch.rewards.mean()
        if cfg.lr > 0 and batch.rewards.any():
            try:
                a_new = reinforce_update(a, reinforce_gradient(pol_a, batch, 0, cfg.aggregate), cfg.lr)
                b_new = reinforce_update(b, reinforce_gradient(pol_b, batch, 1, cfg.aggregate), cfg.lr)
            except NonFiniteGradient:
                log.warning("seed %d update %d: non-finite gradient, update skipped", cfg.seed, step)
                skipped += 1
            else:
                a, b = a_new, b_new
        if progress is not None:
            progress(step, rewards[step])
    return TrainResult(cfg, a, b, rewards, skipped)


# --- evaluation on the full chart ----------------------------------------------

def chart_outputs(params: MlpParams, chart: MunsellChart) -> np.ndarray:
    return mlp_forward(params, chart.labs)[0]


def agent_sender(params: MlpParams, chart: MunsellChart, cfg: TrainConfig, sim=None):
    """Sender over the whole chart used as context."""
    out = chart_outputs(params, chart)
    if cfg.variant == "rl":
        logits = out - out.max(axis=1, keepdims=True)
        return np.exp(logits) / np.exp(logits).sum(axis=1, keepdims=True)
    sim = perceptual_similarity(chart) if sim is None else sim
    game = StructuredGame.uniform(np.clip(out, 0.0, 1.0), sim, chart.ids)
    rc = RecursionConfig(variant=cfg.variant, alpha=cfg.alpha, depth=cfg.depth,
                         endpoint=Endpoint.FINAL_LISTENER, start=Start.LITERAL_LISTENER)
    return run_recursion(game, rc).sender


def meaning_fn_sender(params: MlpParams, chart: MunsellChart, cfg: TrainConfig) -> np.ndarray:
    """Network outputs normalised per chip (softmax for the linear baseline)."""
    out = chart_outputs(params, chart)
    if cfg.variant == "rl":
        e = np.exp(out - out.max(axis=1, keepdims=True))
        return e / e.sum(axis=1, keepdims=True)
    return out / out.sum(axis=1, keepdims=True)


def evaluate(params: MlpParams, chart: MunsellChart, cfg: TrainConfig, meanings=None, sim=None,
             label: str = "") -> tuple[EfficiencyPoint, EfficiencyPoint]:
    meanings = meaning_distribution(chart) if meanings is None else meanings
    sim = perceptual_similarity(chart) if sim is None else sim
    prior = np.full(len(chart), 1.0 / len(chart))
    agent = metrics.efficiency_point(agent_sender(params, chart, cfg, sim), prior, meanings, sim,
                                     label=f"{label}agent")
    mfn = metrics.efficiency_point(meaning_fn_sender(params, chart, cfg), prior, meanings, sim,
                                   label=f"{label}meaning_fn")
    return agent, mfn


def config_dict(cfg: TrainConfig) -> dict:
    return asdict(cfg)
