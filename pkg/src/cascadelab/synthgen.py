"""Synthetic friendship graphs and labeled cascades in the ingestion file format."""
from __future__ import annotations

import configparser
import heapq
import math
from dataclasses import dataclass, fields, replace
from importlib import resources

import numpy as np

from .model import (CascadeDataset, CascadeError, FriendshipStore, InteractionRecord, LABELS,
                    PostRecord)

BASE_EPOCH = 1_500_000_000


class InvalidParams(CascadeError, ValueError):
    pass


@dataclass(frozen=True)
class SpreadParams:
    direct_rate: float = 10.0   # direct interactions per hour at t=0
    decay: float = 120.0        # minutes; direct rate decays as exp(-t/decay)
    friend_prob: float = 0.05   # chance a friend of an interactor follows within the hour
    via_prob: float = 0.5       # chance an induced interaction records its inducer
    like_frac: float = 0.3      # fraction of interactions that are untimed likes
    horizon: int = 2880         # minutes

    def __post_init__(self):
        for name in ("friend_prob", "via_prob", "like_frac"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise InvalidParams(f"{name} must lie in [0, 1]")
        if self.direct_rate <= 0 or self.decay <= 0 or self.horizon <= 0:
            raise InvalidParams("direct_rate, decay and horizon must be positive")


def load_presets(path=None) -> dict:
    """{preset: {label: SpreadParams}} from an INI file; sections are ``preset.label``.

    Keys must be SpreadParams field names. Also holds a [dataset] section.
    """
    parser = configparser.ConfigParser()
    if path is None:
        parser.read_string(resources.files("cascadelab").joinpath("presets.ini").read_text())
    else:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    allowed = {f.name: f.type for f in fields(SpreadParams)}
    presets: dict = {}
    for section in parser.sections():
        if "." not in section:
            continue
        preset, label = section.split(".", 1)
        if label not in LABELS:
            raise InvalidParams(f"[{section}]: unknown label {label!r}")
        kw = {}
        for key, raw in parser.items(section):
            if key not in allowed:
                raise InvalidParams(f"[{section}]: unknown key {key!r}")
            kw[key] = int(raw) if key == "horizon" else float(raw)
        presets.setdefault(preset, {})[label] = SpreadParams(**kw)
    return presets


def dataset_settings(path=None) -> dict:
    parser = configparser.ConfigParser()
    if path is None:
        parser.read_string(resources.files("cascadelab").joinpath("presets.ini").read_text())
    else:
        parser.read(path)
    sec = parser["dataset"] if parser.has_section("dataset") else {}
    return {"n_users": int(sec.get("n_users", 2000)), "attach": int(sec.get("attach", 3)),
            "pages_per_class": int(sec.get("pages_per_class", 20))}


def gen_friendship_graph(n: int, m: int, seed: int) -> FriendshipStore:
    """Preferential attachment: clique on m+1 users, then each new user links to m
    distinct existing users chosen proportionally to degree."""
    if not 1 <= m < n:
        raise InvalidParams(f"need 1 <= m < n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    names = [f"u{i}" for i in range(n)]
    edges = [(a, b) for a in range(m + 1) for b in range(a + 1, m + 1)]
    # each endpoint appears once per incident edge: sampling from it is degree-proportional
    ends = [v for e in edges for v in e]
    for new in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(ends[int(rng.integers(len(ends)))])
        for t in sorted(targets):
            edges.append((t, new))
            ends += (t, new)
    return FriendshipStore((names[a], names[b]) for a, b in edges)


def gen_cascade(friends: FriendshipStore, seed_page: str, params: SpreadParams, rng_seed,
                post_id: str = "p0", label: str = "science", created_at: int = BASE_EPOCH,
                users=None):
    """Discrete-event spread of one post, minute resolution.

    Direct arrivals follow a Poisson process with rate
    ``direct_rate/60 * exp(-t/decay)`` per minute, each picking a random user.
    Every interactor's not-yet-active friends independently follow with
    probability ``friend_prob``, 1-60 minutes later. An induced interaction
    names its inducer (``via_user_id``) with probability ``via_prob`` when the
    inducer's own interaction is visible (not a like). A ``like_frac`` share of
    interactions are likes and carry no timestamp. Nothing happens after
    ``horizon`` minutes.
    """
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)
    if users is None:
        users = sorted(friends.users())
    post = PostRecord(post_id, seed_page, label, int(created_at))
    H = params.horizon

    # inverse-transform sampling of the decaying Poisson process
    rate0 = params.direct_rate / 60.0
    total = rate0 * params.decay * (1.0 - math.exp(-H / params.decay))
    queue = []  # (minute, tiebreak, user, inducer)
    for _ in range(rng.poisson(total)):
        u = rng.random()
        t = -params.decay * math.log(1.0 - u * (1.0 - math.exp(-H / params.decay)))
        who = users[int(rng.integers(len(users)))] if users else None
        if who is not None:
            heapq.heappush(queue, (int(t), len(queue), who, None))

    active: dict[str, bool] = {}  # user -> interaction visible to friends
    out = []
    tie = 10**9
    while queue:
        minute, _, user, inducer = heapq.heappop(queue)
        if user in active or minute > H:
            continue
        is_like = rng.random() < params.like_frac
        kind = "like" if is_like else ("comment" if rng.random() < 0.5 else "reshare")
        via = None
        if inducer is not None and active.get(inducer) and rng.random() < params.via_prob:
            via = inducer
        active[user] = not is_like
        ts = None if is_like else created_at + 60 * minute
        out.append(InteractionRecord(post_id, user, kind, ts, via))
        if params.friend_prob > 0:
            for f in sorted(friends.neighbors(user)):
                if f in active or rng.random() >= params.friend_prob:
                    continue
                later = minute + int(rng.integers(1, 61))
                if later <= H:
                    tie += 1
                    heapq.heappush(queue, (later, tie, f, user))
    return post, out


def gen_dataset(preset: str, n_per_class: int, seed: int, presets=None, settings=None,
                friends: FriendshipStore = None) -> CascadeDataset:
    """Labeled cascades from the named preset over one shared friendship graph."""
    if n_per_class < 10:
        raise InvalidParams("n_per_class must be at least 10")
    presets = presets or load_presets()
    if preset not in presets:
        raise InvalidParams(f"unknown preset {preset!r}; have {sorted(presets)}")
    settings = settings or dataset_settings()
    ss = np.random.SeedSequence(seed)
    graph_seed, *post_seeds = ss.spawn(1 + 2 * n_per_class)
    if friends is None:
        friends = gen_friendship_graph(settings["n_users"], settings["attach"],
                                       graph_seed.generate_state(1)[0])
    users = sorted(friends.users())
    posts, interactions = [], []
    width = len(str(2 * n_per_class))
    for j in range(2 * n_per_class):
        label = LABELS[j % 2]
        params = presets[preset][label]
        rng = np.random.default_rng(post_seeds[j])
        page = f"{label[:3]}-page{int(rng.integers(settings['pages_per_class']))}"
        post, inter = gen_cascade(friends, page, params, rng, post_id=f"post{j:0{width}d}",
                                  label=label, created_at=BASE_EPOCH + 3600 * j, users=users)
        posts.append(post)
        interactions.extend(inter)
    return CascadeDataset(posts, interactions, friends)


def with_overrides(params: SpreadParams, **kw) -> SpreadParams:
    return replace(params, **kw)
