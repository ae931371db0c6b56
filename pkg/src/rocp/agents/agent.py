"""Actor-critic agents.

One class covers the three update families (deterministic actor with one
critic, deterministic actor with twin critics and delayed updates, and the
entropy-regularised stochastic actor) with or without recurrent trunks.
In the recurrent case every actor and critic, and each target copy, owns a
stacked RNN that is unrolled over ``o_t || a_{t-1}``; with ``share_rnn`` one
online trunk and one target trunk serve all heads and only the critic
losses reach the trunk.

Parameter sets are named ``<net>.rnn`` / ``<net>.head`` (plus ``trunk``,
``trunk_targ`` and ``log_alpha``).
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from ..nn import (NumericError, ParamSet, RecurrentHidden, RnnCellKind, Tape, Tensor,
                  adam_step, advance, backward, init_mlp, init_rnn, mlp_forward, polyak_update,
                  rnn_unroll, save_paramsets, load_paramsets)
from ..replay import PaddedBatch, TransitionBatch
from .config import AgentConfig
from . import functional as F


@dataclass
class _View:
    """Update inputs laid out as (lead..., feature) with lead = (M,) or (T, B)."""

    act: np.ndarray
    rew: np.ndarray
    done: np.ndarray
    weight: np.ndarray           # sums to one over real entries
    obs: np.ndarray | None = None
    next_obs: np.ndarray | None = None
    inputs: np.ndarray | None = None  # (T+1, B, obs+act) for recurrent nets

    @property
    def lead(self) -> tuple:
        return self.rew.shape[:-1]


class _UpdateContext:
    """Per-update cache so each trunk is unrolled at most once."""

    def __init__(self, agent: "Agent", view: _View):
        self.agent = agent
        self.view = view
        self.tape = Tape()
        self.nograd = Tape(record=False)
        self._cache = {}

    def features(self, rnn: ParamSet | None, grad: bool = True):
        """(current, next) features; current is differentiable when ``grad``."""
        v = self.view
        if rnn is None:
            return Tensor(v.obs), Tensor(v.next_obs)
        key = id(rnn)
        if key not in self._cache:
            tape = self.tape if grad else self.nograd
            seq = rnn_unroll(Tensor(v.inputs), self.agent.kind, rnn, tape)
            T = seq.shape[0] - 1
            self._cache[key] = (tape.index(seq, slice(0, T)), Tensor(seq.data[1:]))
        return self._cache[key]

    def counts(self) -> Counter:
        return self.tape.counts + self.nograd.counts


class Agent:
    def __init__(self, obs_dim: int, act_dim: int, config: AgentConfig | None = None,
                 seed=0):
        self.config = cfg = config or AgentConfig()
        self.obs_dim, self.act_dim = obs_dim, act_dim
        self.family = cfg.family
        self.recurrent = cfg.recurrent
        self.share = cfg.share_rnn
        if self.share and not (self.recurrent and self.family == "sac"):
            raise ValueError("share_rnn is only defined for the recurrent SAC agent")
        self.kind = RnnCellKind.parse(cfg.cell)
        self.n_critics = 1 if self.family == "ddpg" else 2
        self.target_entropy = -float(act_dim) if cfg.target_entropy is None else cfg.target_entropy
        ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        init_ss, noise_ss = ss.spawn(2)
        init_rng = np.random.Generator(np.random.Philox(init_ss))
        self._noise_key = int(noise_ss.generate_state(1, dtype=np.uint64)[0])
        self.params: dict[str, ParamSet] = {}
        self._build(init_rng)
        self.updates = 0
        self.last_counts: Counter = Counter()
        self.grad_log: dict | None = None
        self._policy = self.make_policy()

    # -- construction -----------------------------------------------------

    @property
    def critic_names(self) -> list[str]:
        return [f"q{i + 1}" for i in range(self.n_critics)]

    @property
    def has_target_actor(self) -> bool:
        return self.family != "sac"

    @property
    def feature_dim(self) -> int:
        return self.config.rnn_hidden if self.recurrent else self.obs_dim

    def _build(self, rng):
        cfg = self.config
        hidden = (cfg.mlp_hidden, cfg.mlp_hidden)
        rnn_in = self.obs_dim + self.act_dim
        actor_out = self.act_dim * (2 if self.family == "sac" else 1)
        if self.share:
            self.params["trunk"] = init_rnn(rng, self.kind, rnn_in, cfg.rnn_hidden, cfg.rnn_layers)
        nets = ["actor"] + self.critic_names
        for name in nets:
            if self.recurrent and not self.share:
                self.params[f"{name}.rnn"] = init_rnn(rng, self.kind, rnn_in, cfg.rnn_hidden,
                                                      cfg.rnn_layers)
            d_in = self.feature_dim + (0 if name == "actor" else self.act_dim)
            d_out = actor_out if name == "actor" else 1
            self.params[f"{name}.head"] = init_mlp(rng, d_in, d_out, hidden)
        for name in nets:
            if name == "actor" and not self.has_target_actor:
                continue
            for part in ("rnn", "head"):
                key = f"{name}.{part}"
                if key in self.params:
                    self.params[f"{name}_targ.{part}"] = self.params[key].clone()
        if self.share:
            self.params["trunk_targ"] = self.params["trunk"].clone()
        if self.family == "sac":
            la = ParamSet()
            la.add("log_alpha", np.array([np.log(cfg.alpha_init)]))
            self.params["log_alpha"] = la

    def rnn(self, net: str) -> ParamSet | None:
        """Trunk feeding ``net`` (e.g. ``q1`` or ``q1_targ``), None when feed-forward."""
        if not self.recurrent:
            return None
        if self.share:
            return self.params["trunk_targ" if net.endswith("_targ") else "trunk"]
        return self.params[f"{net}.rnn"]

    def head(self, net: str) -> ParamSet:
        return self.params[f"{net}.head"]

    @property
    def alpha(self) -> float:
        if self.family != "sac":
            return 0.0
        return float(np.exp(self.params["log_alpha"]["log_alpha"].data[0]))

    def paramsets_of(self, net: str) -> list[str]:
        names = [f"{net}.rnn", f"{net}.head"]
        return [n for n in names if n in self.params]

    # -- network evaluation -------------------------------------------------

    def _actor_out(self, feat: Tensor, tape: Tape, net: str = "actor", params=None):
        p = self.head(net) if params is None else params
        return mlp_forward(feat, p, tape)

    def _deterministic_action(self, out: Tensor, tape: Tape) -> Tensor:
        if self.family == "sac":
            return tape.tanh(tape.index(out, (Ellipsis, slice(0, self.act_dim))))
        return tape.tanh(out)

    def _gaussian(self, out: Tensor, tape: Tape):
        A = self.act_dim
        mean = tape.index(out, (Ellipsis, slice(0, A)))
        log_std = tape.clip(tape.index(out, (Ellipsis, slice(A, 2 * A))),
                            self.config.log_std_min, self.config.log_std_max)
        return mean, log_std

    def _q(self, feat: Tensor, act: Tensor, tape: Tape, net: str, params=None) -> Tensor:
        p = self.head(net) if params is None else params
        return mlp_forward(tape.concat([feat, act], axis=-1), p, tape)

    # -- batches --------------------------------------------------------------

    def _view(self, batch) -> _View:
        if self.recurrent:
            if not isinstance(batch, PaddedBatch):
                raise TypeError("recurrent agents update from PaddedBatch")
            obs = batch.obs.transpose(1, 0, 2)
            act = batch.act.transpose(1, 0, 2)
            mask = batch.mask.T[..., None]
            total = mask.sum()
            if total == 0:
                raise ValueError("batch has no unmasked timesteps")
            return _View(act=act[1:], rew=batch.rew.T[..., None], done=batch.done.T[..., None],
                         weight=mask / total, inputs=np.concatenate([obs, act], axis=-1))
        if not isinstance(batch, TransitionBatch):
            raise TypeError("feed-forward agents update from TransitionBatch")
        M = len(batch)
        return _View(act=batch.act, rew=batch.rew[:, None], done=batch.done[:, None],
                     weight=np.full((M, 1), 1.0 / M), obs=batch.obs, next_obs=batch.next_obs)

    # -- targets ----------------------------------------------------------------

    def _draw_noise(self, lead: tuple) -> np.ndarray | None:
        # A fresh stream per update, filled time-major: padding only appends
        # draws and never shifts the ones used by real timesteps.
        rng = np.random.Generator(np.random.Philox(key=self._noise_key, counter=self.updates))
        if self.family == "sac":
            return rng.standard_normal(lead + (2, self.act_dim))
        if self.family == "td3":
            return rng.standard_normal(lead + (self.act_dim,))
        return None

    def _next_action(self, ctx: _UpdateContext, noise):
        """(a', log pi(a'|h')) for the target, no gradient."""
        ng = ctx.nograd
        if self.family == "sac":
            _, nxt = ctx.features(self.rnn("actor"))
            out = self._actor_out(Tensor(nxt.data), ng)
            mean, log_std = self._gaussian(out, ng)
            a, logp = F.squashed_gaussian(mean, log_std, ng, noise=noise[..., 1, :])
            return a.data, logp.data
        _, nxt = ctx.features(self.rnn("actor_targ"), grad=False)
        mu = self._deterministic_action(self._actor_out(nxt, ng, "actor_targ"), ng).data
        if self.family == "td3":
            mu = F.smoothed_target_action(mu, noise, self.config.target_noise, self.config.noise_clip)
        return mu, None

    def _target(self, ctx: _UpdateContext, noise) -> np.ndarray:
        v, ng, g = ctx.view, ctx.nograd, self.config.gamma
        a_next, logp_next = self._next_action(ctx, noise)
        qs = []
        for name in self.critic_names:
            _, nxt = ctx.features(self.rnn(f"{name}_targ"), grad=False)
            qs.append(self._q(nxt, Tensor(a_next), ng, f"{name}_targ").data)
        if self.family == "ddpg":
            return F.ddpg_target(v.rew, v.done, qs[0], g)
        if self.family == "td3":
            return F.clipped_double_q_target(v.rew, v.done, qs[0], qs[1], g)
        return F.soft_target(v.rew, v.done, qs[0], qs[1], logp_next, self.alpha, g)

    def td_target(self, batch, noise=None) -> np.ndarray:
        """Bellman targets for ``batch`` (shape (M,) or (T, B)); no parameter change."""
        ctx = _UpdateContext(self, self._view(batch))
        if noise is None:
            noise = self._draw_noise(ctx.view.lead)
        return self._target(ctx, noise)[..., 0]

    # -- update -------------------------------------------------------------------

    def _step(self, names: list[str]) -> None:
        for n in names:
            ps = self.params[n]
            if self.grad_log is not None:
                for k, t in ps.items():
                    self.grad_log[f"{n}/{k}"] = t.grad.copy()
            adam_step(ps, self.config.lr)

    def _check(self, value: float, what: str) -> float:
        if not np.isfinite(value):
            raise NumericError(f"update {self.updates}: non-finite {what} ({value})")
        return value

    def critic_losses(self, ctx: _UpdateContext, y: np.ndarray) -> list[Tensor]:
        tape, v = ctx.tape, ctx.view
        losses = []
        for name in self.critic_names:
            cur, _ = ctx.features(self.rnn(name))
            q = self._q(cur, Tensor(v.act), tape, name)
            err = tape.shift(q, -y)
            losses.append(tape.sum(tape.mul(tape.square(err), Tensor(v.weight))))
        return losses

    def critic_loss_fn(self, batch, noise=None):
        """``f(tape) -> summed critic loss`` with targets held fixed; for
        gradient checks against the online critic parameters."""
        view = self._view(batch)
        if noise is None:
            noise = self._draw_noise(view.lead)
        y = self._target(_UpdateContext(self, view), noise)

        def f(tape: Tape) -> Tensor:
            ctx = _UpdateContext(self, view)
            ctx.tape = tape
            losses = self.critic_losses(ctx, y)
            return losses[0] if len(losses) == 1 else tape.add(*losses)

        return f

    def update(self, batch, update_index: int | None = None) -> dict:
        """One gradient step on critics (and, when due, actor, temperature,
        targets).  Returns scalar diagnostics."""
        self.updates += 1
        k = self.updates if update_index is None else update_index
        ctx = _UpdateContext(self, self._view(batch))
        v = ctx.view
        noise = self._draw_noise(v.lead)
        y = self._target(ctx, noise)
        self._check(float(np.sum(y * v.weight)), "target")

        # critics
        losses = self.critic_losses(ctx, y)
        critic_loss = self._check(sum(l.item() for l in losses), "critic loss")
        critic_sets = [n for c in self.critic_names for n in self.paramsets_of(c)]
        if self.share:
            # each critic loss is swept back through the shared trunk on its own
            for l in losses:
                backward(ctx.tape, l)
            critic_sets = ["trunk"] + critic_sets
        else:
            backward(ctx.tape, losses[0] if len(losses) == 1 else ctx.tape.add(*losses))
        self._step(critic_sets)

        stats = {"critic_loss": critic_loss, "actor_obj": float("nan"), "alpha": self.alpha}
        actor_due = self.family != "td3" or k % self.config.policy_delay == 0
        if actor_due:
            stats.update(self._actor_step(ctx, noise))
            self._sync_targets()
        self.last_counts = ctx.counts()
        return stats

    def _actor_step(self, ctx: _UpdateContext, noise) -> dict:
        tape, v = ctx.tape, ctx.view
        cur, _ = ctx.features(self.rnn("actor"))
        if self.share:
            cur = tape.detach(cur)
        out = self._actor_out(cur, tape)
        q_feats = [tape.detach(ctx.features(self.rnn(c))[0]) for c in self.critic_names]
        w = Tensor(v.weight)
        out_stats = {}
        if self.family == "sac":
            mean, log_std = self._gaussian(out, tape)
            a, logp = F.squashed_gaussian(mean, log_std, tape, noise=noise[..., 0, :])
            q1 = self._q(q_feats[0], a, tape, "q1", self.head("q1").frozen())
            q2 = self._q(q_feats[1], a, tape, "q2", self.head("q2").frozen())
            alpha = self.alpha
            per = tape.sub(tape.scale(logp, alpha), tape.minimum(q1, q2))
            loss = tape.sum(tape.mul(per, w))
            out_stats["actor_obj"] = -self._check(loss.item(), "actor loss")
            backward(tape, loss)
            self._step(self.paramsets_of("actor"))
            if self.config.auto_alpha:
                la = self.params["log_alpha"]["log_alpha"]
                la.grad = la.grad + F.alpha_gradient(logp.data, self.target_entropy, v.weight)
                self._step(["log_alpha"])
            out_stats["alpha"] = self.alpha
        else:
            a = self._deterministic_action(out, tape)
            q = self._q(q_feats[0], a, tape, "q1", self.head("q1").frozen())
            obj = tape.sum(tape.mul(q, w))
            out_stats["actor_obj"] = self._check(obj.item(), "actor objective")
            backward(tape, tape.neg(obj))
            self._step(self.paramsets_of("actor"))
        return out_stats

    def _sync_targets(self) -> None:
        rho = self.config.polyak
        for name in list(self.params):
            if name.endswith("_targ") or "_targ." in name:
                online = name.replace("_targ", "")
                polyak_update(self.params[name], self.params[online], rho)

    # -- diagnostics ------------------------------------------------------------------

    def critic_values(self, batch) -> tuple[list[np.ndarray], np.ndarray]:
        """Online critic values Q_i(h_t, a_t) and their weights (mask)."""
        ctx = _UpdateContext(self, self._view(batch))
        ctx.tape = ctx.nograd
        qs = []
        for name in self.critic_names:
            cur, _ = ctx.features(self.rnn(name), grad=False)
            qs.append(self._q(cur, Tensor(ctx.view.act), ctx.nograd, name).data[..., 0])
        return qs, ctx.view.weight[..., 0] > 0

    # -- acting ---------------------------------------------------------------------------

    def make_policy(self, record_states: bool = False) -> "Policy":
        return Policy(self, record_states)

    def reset(self) -> None:
        self._policy.reset()

    def act(self, observation, prev_action, deterministic: bool, rng=None) -> np.ndarray:
        return self._policy.act(observation, prev_action, deterministic, rng)

    # -- persistence ------------------------------------------------------------------------

    def save(self, path) -> None:
        save_paramsets(path, self.params)

    def load(self, path) -> None:
        load_paramsets(path, self.params)


class Policy:
    """Acting handle with its own recurrent state; parameters are shared
    with the agent, so it always acts with the latest weights."""

    def __init__(self, agent: Agent, record_states: bool = False):
        self.agent = agent
        self.record_states = record_states
        self.states: list[np.ndarray] = []
        self.reset()

    def reset(self) -> None:
        ag = self.agent
        self.hidden = RecurrentHidden.zeros(ag.kind, 1, ag.config.rnn_hidden, ag.config.rnn_layers) \
            if ag.recurrent else None
        self.states = []

    def act(self, observation, prev_action, deterministic: bool, rng=None) -> np.ndarray:
        ag = self.agent
        obs = np.asarray(observation, dtype=np.float64).reshape(-1)
        if obs.shape[0] != ag.obs_dim:
            raise ValueError(f"observation dim {obs.shape[0]} != {ag.obs_dim}")
        if ag.recurrent:
            prev = np.zeros(ag.act_dim) if prev_action is None else np.asarray(prev_action, float).reshape(-1)
            x = np.concatenate([obs, prev])[None, :]
            feat = advance(ag.kind, x, self.hidden, ag.rnn("actor"))
            if self.record_states:
                top = self.hidden.c[-1] if self.hidden.c is not None else self.hidden.h[-1]
                self.states.append(top[0].copy())
        else:
            feat = obs[None, :]
        ng = Tape(record=False)
        out = ag._actor_out(Tensor(feat), ng)
        if ag.family == "sac":
            mean, log_std = ag._gaussian(out, ng)
            if deterministic:
                return np.tanh(mean.data[0])
            return np.tanh(mean.data[0] + np.exp(log_std.data[0]) * rng.standard_normal(ag.act_dim))
        mu = np.tanh(out.data[0])
        if deterministic:
            return mu
        return np.clip(mu + ag.config.action_noise * rng.standard_normal(ag.act_dim), -1.0, 1.0)


class DDPG(Agent):
    ALGO = "ddpg"


class TD3(Agent):
    ALGO = "td3"


class SAC(Agent):
    ALGO = "sac"


class RDPG(Agent):
    ALGO = "rdpg"


class RTD3(Agent):
    ALGO = "rtd3"


class RSAC(Agent):
    ALGO = "rsac"


class RSACShare(Agent):
    ALGO = "rsac-share"


_CLASSES = {c.ALGO: c for c in (DDPG, TD3, SAC, RDPG, RTD3, RSAC, RSACShare)}


def make_agent(algo: str, obs_dim: int, act_dim: int, config: AgentConfig | None = None,
               seed=0, **overrides) -> Agent:
    import dataclasses
    cfg = dataclasses.replace(config, algo=algo) if config is not None else AgentConfig(algo=algo)
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return _CLASSES[cfg.algo](obs_dim, act_dim, cfg, seed)


# functional entry points ---------------------------------------------------


def act(agent: Agent, observation, prev_action, deterministic: bool, rng=None) -> np.ndarray:
    return agent.act(observation, prev_action, deterministic, rng)


def _require(agent: Agent, family: str | None, recurrent: bool, share: bool = False):
    if recurrent != agent.recurrent or (family and agent.family != family) or share != agent.share:
        raise TypeError(f"{type(agent).__name__} does not support this update")


def ddpg_update(agent: Agent, batch: TransitionBatch) -> tuple[float, float]:
    _require(agent, "ddpg", False)
    s = agent.update(batch)
    return s["critic_loss"], s["actor_obj"]


def td3_update(agent: Agent, batch: TransitionBatch, update_index: int) -> dict:
    _require(agent, "td3", False)
    return agent.update(batch, update_index)


def sac_update(agent: Agent, batch: TransitionBatch) -> dict:
    _require(agent, "sac", False)
    return agent.update(batch)


def recurrent_update(agent: Agent, padded: PaddedBatch, update_index: int | None = None) -> dict:
    _require(agent, None, True)
    return agent.update(padded, update_index)


def rsac_share_update(agent: Agent, padded: PaddedBatch) -> dict:
    _require(agent, "sac", True, share=True)
    return agent.update(padded)
