"""Structured signaling games and the RSA / sRSA recursions.

A game holds a context of ``n`` meanings, a meaning function over ``k``
words, a shared similarity matrix and a prior over the context. Senders are
``[n, k]`` row-stochastic matrices S(w|m); listeners are ``[k, n]``
row-stochastic matrices L(m|w). All recursion steps run on log-probabilities.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import logsumexp

from .errors import AllZeroMeaningFunction, InvalidGame, NegativeDistortion

_TOL = 1e-12


class Kind(enum.Enum):
    SENDER = "sender"
    LISTENER = "listener"


class Variant(enum.Enum):
    RSA = "rsa"
    SRSA = "srsa"

    @classmethod
    def parse(cls, value) -> "Variant":
        return value if isinstance(value, cls) else cls(str(value).lower())


class Endpoint(enum.Enum):
    FINAL_SENDER = "final_sender"
    FINAL_LISTENER = "final_listener"


class Start(enum.Enum):
    LITERAL_LISTENER = "literal_listener"
    LITERAL_SENDER = "literal_sender"


LIMIT = "limit"


@dataclass(frozen=True)
class StructuredGame:
    context: tuple
    meaning_fn: np.ndarray
    similarity: np.ndarray
    prior: np.ndarray

    def __post_init__(self):
        mf = np.asarray(self.meaning_fn, dtype=float)
        z = np.asarray(self.similarity, dtype=float)
        p = np.asarray(self.prior, dtype=float)
        object.__setattr__(self, "context", tuple(self.context))
        object.__setattr__(self, "meaning_fn", mf)
        object.__setattr__(self, "similarity", z)
        object.__setattr__(self, "prior", p)
        n = len(self.context)
        if n < 1:
            raise InvalidGame("context must contain at least one meaning")
        if mf.ndim != 2 or mf.shape[0] != n or mf.shape[1] < 1:
            raise InvalidGame(f"meaning_fn must be [{n} x k], got {mf.shape}")
        if z.shape != (n, n):
            raise InvalidGame(f"similarity must be [{n} x {n}], got {z.shape}")
        if p.shape != (n,):
            raise InvalidGame(f"prior must have length {n}, got {p.shape}")
        if not np.all(np.isfinite(mf)) or mf.min() < 0 or mf.max() > 1:
            raise InvalidGame("meaning_fn entries must lie in [0, 1]")
        if not np.any(mf > 0):
            raise AllZeroMeaningFunction("every meaning_fn entry is zero")
        if np.any(mf.max(axis=1) <= 0):
            bad = np.flatnonzero(mf.max(axis=1) <= 0).tolist()
            raise InvalidGame(f"meaning_fn rows {bad} have no positive entry")
        if (not np.all(np.isfinite(z)) or z.min() < 0 or z.max() > 1
                or np.abs(z - z.T).max() > _TOL
                or np.abs(np.diag(z) - 1).max() > _TOL):
            raise InvalidGame("similarity must be symmetric, unit-diagonal, in [0, 1]")
        if p.min() < 0 or abs(p.sum() - 1) > _TOL:
            raise InvalidGame("prior must be non-negative and sum to 1")

    @property
    def n(self) -> int:
        return len(self.context)

    @property
    def n_words(self) -> int:
        return self.meaning_fn.shape[1]

    @classmethod
    def uniform(cls, meaning_fn, similarity=None, context=None) -> "StructuredGame":
        """Game with a uniform prior; identity similarity when none is given."""
        mf = np.asarray(meaning_fn, dtype=float)
        n = mf.shape[0]
        if similarity is None:
            similarity = np.eye(n)
        if context is None:
            context = range(n)
        return cls(tuple(context), mf, np.asarray(similarity, float), np.full(n, 1.0 / n))

    def permuted(self, order) -> "StructuredGame":
        order = np.asarray(order)
        return StructuredGame(
            tuple(self.context[i] for i in order),
            self.meaning_fn[order],
            self.similarity[np.ix_(order, order)],
            self.prior[order],
        )

    def to_json(self) -> dict:
        return {
            "context": [c if isinstance(c, (int, str)) else int(c) for c in self.context],
            "meaning_fn": self.meaning_fn.tolist(),
            "similarity": self.similarity.tolist(),
            "prior": self.prior.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "StructuredGame":
        missing = [k for k in ("context", "meaning_fn", "similarity", "prior") if k not in obj]
        if missing:
            raise InvalidGame(f"game JSON missing keys: {missing}")
        return cls(tuple(obj["context"]), np.array(obj["meaning_fn"], float),
                   np.array(obj["similarity"], float), np.array(obj["prior"], float))


def load_game(path) -> tuple[StructuredGame, dict]:
    """Read a game JSON file; returns the game and the raw object (for labels)."""
    obj = json.loads(Path(path).read_text())
    return StructuredGame.from_json(obj), obj


@dataclass(frozen=True)
class ConditionalDistribution:
    """Row-stochastic matrix stored as log-probabilities.

    ``flagged[i]`` marks rows whose normaliser was zero and which were
    replaced by a uniform row.
    """

    kind: Kind
    logp: np.ndarray
    flagged: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.flagged is None:
            object.__setattr__(self, "flagged", np.zeros(self.logp.shape[0], dtype=bool))

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.logp)

    @property
    def shape(self):
        return self.logp.shape

    def with_flags(self, flags) -> "ConditionalDistribution":
        return ConditionalDistribution(self.kind, self.logp, np.asarray(flags, bool))

    @classmethod
    def from_probs(cls, kind: Kind, probs) -> "ConditionalDistribution":
        probs = np.asarray(probs, dtype=float)
        with np.errstate(divide="ignore"):
            return _normalize_rows(kind, np.log(probs))


def _normalize_rows(kind: Kind, logits: np.ndarray) -> ConditionalDistribution:
    with np.errstate(invalid="ignore"):
        norm = logsumexp(logits, axis=1, keepdims=True)
    dead = ~np.isfinite(norm[:, 0])
    out = logits - np.where(dead[:, None], 0.0, norm)
    if dead.any():
        out[dead] = -np.log(logits.shape[1])
    return ConditionalDistribution(kind, out, dead)


def literal_listener(game: StructuredGame) -> ConditionalDistribution:
    """L0(m|w) proportional to meaning_fn(m, w) * prior(m)."""
    if not np.any(game.meaning_fn > 0):
        raise AllZeroMeaningFunction("every meaning_fn entry is zero")
    with np.errstate(divide="ignore"):
        logits = np.log(game.meaning_fn.T) + np.log(game.prior)[None, :]
    return _normalize_rows(Kind.LISTENER, logits)


def _log_expected_similarity(listener_logp: np.ndarray, similarity: np.ndarray) -> np.ndarray:
    """log sum_m' Z[m, m'] L(m'|w), returned as [n, k]."""
    shift = listener_logp.max(axis=1, keepdims=True)
    mass = similarity @ np.exp(listener_logp - shift).T
    with np.errstate(divide="ignore"):
        return np.log(mass) + shift.T


def sender_step(listener: ConditionalDistribution, game: StructuredGame, variant,
                alpha: float, log_domain: bool = True) -> ConditionalDistribution:
    """Softmax-rational sender against ``listener``.

    RSA: S(w|m) ~ L(m|w)^alpha.  sRSA: S(w|m) ~ (sum_m' Z[m,m'] L(m'|w))^alpha.
    Words whose listener row is flagged cannot be chosen.
    """
    if listener.kind is not Kind.LISTENER:
        raise TypeError("sender_step expects a listener")
    variant = Variant.parse(variant)
    if not log_domain:
        return _sender_step_linear(listener, game, variant, alpha)
    if variant is Variant.RSA:
        utility = listener.logp.T.copy()
    else:
        utility = _log_expected_similarity(listener.logp, game.similarity)
    logits = alpha * utility
    logits[:, listener.flagged] = -np.inf
    return _normalize_rows(Kind.SENDER, logits)


def _sender_step_linear(listener, game, variant, alpha):
    # reference path for tests; underflows for large alpha / deep recursions
    probs = listener.probs
    base = probs.T if variant is Variant.RSA else game.similarity @ probs.T
    unnorm = base ** alpha
    unnorm[:, listener.flagged] = 0.0
    z = unnorm.sum(axis=1, keepdims=True)
    dead = z[:, 0] <= 0
    out = np.where(dead[:, None], 1.0 / unnorm.shape[1], unnorm / np.where(dead[:, None], 1, z))
    return ConditionalDistribution.from_probs(Kind.SENDER, out).with_flags(dead)


def listener_step(sender: ConditionalDistribution, game: StructuredGame) -> ConditionalDistribution:
    """Bayesian listener L(m|w) ~ S(w|m) p(m)."""
    if sender.kind is not Kind.SENDER:
        raise TypeError("listener_step expects a sender")
    with np.errstate(divide="ignore"):
        logits = sender.logp.T + np.log(game.prior)[None, :]
    return _normalize_rows(Kind.LISTENER, logits)


def literal_sender(game: StructuredGame) -> ConditionalDistribution:
    """S0(w|m) proportional to meaning_fn rows (naming counts)."""
    with np.errstate(divide="ignore"):
        return _normalize_rows(Kind.SENDER, np.log(game.meaning_fn))


@dataclass(frozen=True)
class RecursionConfig:
    variant: Variant = Variant.SRSA
    alpha: float = 5.0
    depth: object = 1
    endpoint: Endpoint = Endpoint.FINAL_SENDER
    start: Start = Start.LITERAL_LISTENER
    limit_tol: float = 1e-10
    limit_max_iters: int = 1000

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant.parse(self.variant))
        object.__setattr__(self, "endpoint", Endpoint(self.endpoint))
        object.__setattr__(self, "start", Start(self.start))
        if not self.alpha > 0:
            raise ValueError("alpha must be positive")
        if not self.limit_tol > 0:
            raise ValueError("limit_tol must be positive")
        if self.limit_max_iters < 1:
            raise ValueError("limit_max_iters must be >= 1")
        if self.depth != LIMIT and (int(self.depth) != self.depth or self.depth < 0):
            raise ValueError(f"depth must be a non-negative integer or {LIMIT!r}")

    @property
    def is_limit(self) -> bool:
        return self.depth == LIMIT


@dataclass(frozen=True)
class RecursionResult:
    sender: ConditionalDistribution
    listener: ConditionalDistribution
    iters: int
    converged: bool
    status: str  # "fixed_depth", "converged", "cycle" or "max_iters"


def _sender_chain(game: StructuredGame, cfg: RecursionConfig):
    """Yield (sender, listener-it-answered, bayes-listener-of-sender) per depth.

    Literal-listener start yields depth 1, 2, ...; literal-sender start
    yields depth 0, 1, ... (depth 0 answers its own Bayes inverse).
    """
    if cfg.start is Start.LITERAL_LISTENER:
        answered = literal_listener(game)
        sender = sender_step(answered, game, cfg.variant, cfg.alpha)
    else:
        sender = literal_sender(game)
        answered = None
    while True:
        bayes = listener_step(sender, game)
        yield sender, (bayes if answered is None else answered), bayes
        answered = bayes
        sender = sender_step(bayes, game, cfg.variant, cfg.alpha)


def _pick(cfg, sender, answered, bayes):
    listener = answered if cfg.endpoint is Endpoint.FINAL_SENDER else bayes
    return sender, listener


def run_recursion(game: StructuredGame, cfg: RecursionConfig) -> RecursionResult:
    """Run the recursion to ``cfg.depth`` (or to its limit).

    Pairing: literal-listener start, depth 0 gives (S1, L0); depth d gives
    (S_d, L_{d-1}) for FINAL_SENDER and (S_d, L_d) for FINAL_LISTENER.
    Literal-sender start, depth d gives S_d with the listener it answered
    (FINAL_SENDER) or its Bayes inverse (FINAL_LISTENER).
    """
    chain = _sender_chain(game, cfg)
    if not cfg.is_limit:
        depth = int(cfg.depth)
        if cfg.start is Start.LITERAL_LISTENER and depth == 0:
            sender, _, _ = next(chain)
            return RecursionResult(sender, literal_listener(game), 0, True, "fixed_depth")
        first = 1 if cfg.start is Start.LITERAL_LISTENER else 0
        for t, state in enumerate(chain, start=first):
            if t == depth:
                return RecursionResult(*_pick(cfg, *state), depth, True, "fixed_depth")

    history = []
    status = "max_iters"
    for it, state in enumerate(chain, start=1):
        history.append(state)
        if len(history) > 3:
            history.pop(0)
        if len(history) >= 2:
            d1 = _distance(history[-1], history[-2])
            if d1 < cfg.limit_tol:
                status = "converged"
                break
            if len(history) >= 3 and _distance(history[-1], history[-3]) < cfg.limit_tol:
                status = "cycle"
                break
        if it >= cfg.limit_max_iters:
            break
    return RecursionResult(*_pick(cfg, *history[-1]), it, status == "converged", status)


def _distance(a, b) -> float:
    return max(float(np.abs(a[0].probs - b[0].probs).max()),
               float(np.abs(a[2].probs - b[2].probs).max()))


def sim_surprisal(listener: ConditionalDistribution, game: StructuredGame, m: int, w: int) -> float:
    """-log sum_m' Z[m, m'] L(m'|w), in nats (inf when the mass is zero)."""
    mass = float(game.similarity[m] @ listener.probs[w])
    return np.inf if mass <= 0 else -np.log(mass)


def similarity_from_distortion(d, beta: float) -> np.ndarray:
    """Z = exp(-beta * d) for a symmetric, zero-diagonal distortion matrix."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise NegativeDistortion("distortion entries must be non-negative")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distortion must be square")
    if np.abs(d - d.T).max() > _TOL or np.abs(np.diag(d)).max() > _TOL:
        raise ValueError("distortion must be symmetric with zero diagonal")
    z = np.exp(-beta * d)
    np.fill_diagonal(z, 1.0)
    return z
