"""Policy-gradient fine-tuning of a trained tagger.

The tagger is treated as a policy over label sequences: per token it
factorises into independent picks for the n, c and u heads.  Fine-tuning
samples sequences, scores each decoded tree against the gold tree by
bracketing F1, subtracts the reward of a frozen copy of the starting model
(the baseline), standardises that advantage with running statistics, and
takes small ascent steps on advantage-weighted log-likelihood plus an
entropy bonus.  Embedding tables stay frozen so the fine-tuned model keeps
the supervised lexical representations.

Optionally, Gaussian noise is added to the logits during sampling; its
scale adapts multiplicatively towards a target amount of induced
distribution change.
"""

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .encodings import EncodedSentence, NComponent, TagLabel, decode
from .metrics import bracket_score, corpus_bracket_score
from .tagger import MAIN_TASKS, predict_greedy


@dataclass
class PGConfig:
    samples: int = 8
    learning_rate: float = 0.0005
    entropy_coef: float = 0.01        # strength of the exploration bonus
    burn_in: int = 1000               # advantages seen before standardising
    frozen: tuple = ("E_word", "E_pos")
    epochs: int = 10
    noise_enabled: bool = False
    noise_std: float = 0.1            # initial logit-noise stddev
    noise_target: float = 0.5         # desired induced action divergence
    noise_adapt: float = 1.05         # multiplicative adaptation step
    noise_batch: int = 8              # sentences between noise adaptations
    seed: int = 29

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("need at least one sample per sentence")
        if self.entropy_coef < 0 or self.learning_rate < 0:
            raise ValueError("coefficients must be >= 0")


class AdvantageTracker:
    """Running mean/stddev of raw advantages (Welford).

    standardize() is the identity until `burn_in` observations have been
    recorded; the stddev is floored at 1e-8.
    """

    STD_FLOOR = 1e-8

    def __init__(self, burn_in=1000):
        self.burn_in = burn_in
        self.count = 0
        self.mean = 0.0
        self._m2 = 0.0

    def update(self, x):
        self.count += 1
        delta = x - self.mean
        self.mean += delta / self.count
        self._m2 += delta * (x - self.mean)

    @property
    def std(self):
        if self.count == 0:
            return self.STD_FLOOR
        return max(math.sqrt(self._m2 / self.count), self.STD_FLOOR)

    def standardize(self, x):
        if self.count < self.burn_in:
            return x
        return (x - self.mean) / self.std


@dataclass
class NoiseState:
    std: float = 0.1
    target: float = 0.5
    adapt: float = 1.05
    history: list = field(default_factory=list)  # measured divergences

    @classmethod
    def from_config(cls, config):
        return cls(config.noise_std, config.noise_target, config.noise_adapt)


def _sample_with_cache(policy, sentence, rng, noise_std=0.0):
    """Sample one label sequence; keeps the forward cache for gradients.

    Every head is sampled per token except the final token's n and c,
    which are forced to the dummy and contribute no log-probability (its u
    is still a real decision).  Returns (encoded, logprob, cache, picks)
    where picks maps task -> (T,) sampled ids.
    """
    cache = policy.forward(sentence, noise_std=noise_std, noise_rng=rng)
    T = len(sentence)
    picks = {}
    logprob = 0.0
    for name in MAIN_TASKS:
        p = cache["probs"][name]
        cum = p.cumsum(axis=1)
        draws = rng.random((T, 1))
        ids = (draws > cum).sum(axis=1)
        np.clip(ids, 0, p.shape[1] - 1, out=ids)
        picks[name] = ids
    rows = np.arange(T)
    for name in MAIN_TASKS:
        p = cache["probs"][name][rows, picks[name]]
        if name == "u":
            logprob += float(np.log(p).sum())
        else:
            logprob += float(np.log(p[:-1]).sum()) if T > 1 else 0.0

    labels = []
    id2lab = policy.vocab.task_labels
    for t in range(T):
        u = id2lab["u"][picks["u"][t]]
        u = "" if u == "NONE" else u
        if t == T - 1:
            labels.append(TagLabel.dummy(u))
            continue
        n = NComponent.from_token(id2lab["n"][picks["n"][t]])
        labels.append(TagLabel(n, id2lab["c"][picks["c"][t]], u))
    encoded = EncodedSentence(sentence, labels, policy.scheme)
    return encoded, logprob, cache, picks


def sample_sequence(policy, sentence, rng, noise_std=0.0):
    """Sample a label sequence from the policy.

    Returns (EncodedSentence, total log-probability of the sampled
    decisions).
    """
    encoded, logprob, _, _ = _sample_with_cache(policy, sentence, rng, noise_std)
    return encoded, logprob


def tree_reward(sampled, gold_tree):
    """Bracketing F1 of the decoded sample against the gold tree, in [0,1]."""
    return bracket_score(gold_tree, decode(sampled)).f1


def _entropy_dlogits(p):
    """Gradient of the per-row entropy H = -sum p log p wrt the logits."""
    logp = np.log(np.clip(p, 1e-300, None))
    H = -(p * logp).sum(axis=1, keepdims=True)
    return -p * (logp + H)


def estimate_policy_gradient(
    policy,
    sentence,
    reward_fn,
    n_samples,
    rng,
    entropy_coef=0.0,
    baseline_reward=0.0,
    tracker=None,
    noise_std=0.0,
):
    """Ascent-direction parameter gradients from sampled sequences.

    For each sample: advantage = reward_fn(sequence) - baseline_reward,
    standardised through `tracker` when given; the gradient accumulates
    advantage * grad log-prob of the sampled decisions plus entropy_coef *
    grad entropy of the (possibly noise-perturbed) policy.  The final
    token's n and c decisions are forced and therefore excluded from both
    terms.  Gradients and stats are averaged over samples.
    """
    grads = None
    rewards = []
    advantages = []
    standardized = []
    entropies = []
    for _ in range(n_samples):
        encoded, _, cache, picks = _sample_with_cache(policy, sentence, rng, noise_std)
        reward = reward_fn(encoded)
        adv = reward - baseline_reward
        if tracker is not None:
            tracker.update(adv)
            adv_hat = tracker.standardize(adv)
        else:
            adv_hat = adv
        rewards.append(reward)
        advantages.append(adv)
        standardized.append(adv_hat)

        dlogits = {}
        total_entropy = 0.0
        T = len(sentence)
        rows = np.arange(T)
        for name in MAIN_TASKS:
            p = cache["probs"][name]
            d = -p.copy()
            d[rows, picks[name]] += 1.0
            d *= adv_hat
            ent_d = _entropy_dlogits(p)
            logp = np.log(np.clip(p, 1e-300, None))
            ent_rows = -(p * logp).sum(axis=1)
            if name != "u":
                d[-1, :] = 0.0
                ent_d[-1, :] = 0.0
                ent_rows = ent_rows[:-1]
            total_entropy += float(ent_rows.sum())
            dlogits[name] = d + entropy_coef * ent_d
        entropies.append(total_entropy)

        sample_grads = policy.backward(cache, dlogits)
        if grads is None:
            grads = sample_grads
        else:
            for k in grads:
                grads[k] += sample_grads[k]
    for k in grads:
        grads[k] /= n_samples
    stats = {
        "reward": float(np.mean(rewards)),
        "advantage": float(np.mean(advantages)),
        "standardized": float(np.mean(standardized)),
        "entropy": float(np.mean(entropies)),
    }
    return grads, stats


def pg_update(policy, baseline, sentence, gold_tree, config, tracker, rng, noise_std=0.0):
    """One fine-tuning step on a single sentence.

    The baseline reward is the frozen model's greedy tree score, computed
    once per sentence.  Parameters named in config.frozen are left
    untouched.  Returns per-sentence stats.
    """
    baseline_reward = tree_reward(predict_greedy(baseline, sentence), gold_tree)
    grads, stats = estimate_policy_gradient(
        policy,
        sentence,
        lambda encoded: tree_reward(encoded, gold_tree),
        config.samples,
        rng,
        entropy_coef=config.entropy_coef,
        baseline_reward=baseline_reward,
        tracker=tracker,
        noise_std=noise_std,
    )
    for name, g in grads.items():
        if name in config.frozen:
            continue
        if not np.isfinite(g).all():
            raise RuntimeError("non-finite policy gradient for %r" % name)
        policy.params[name] += config.learning_rate * g
    stats["baseline"] = baseline_reward
    return stats


def action_divergence(policy, sentences, noise_std, rng):
    """Mean absolute difference between noisy and clean probability
    vectors over all tokens and heads of `sentences`."""
    diffs = []
    for sentence in sentences:
        clean = policy.forward(sentence)
        noisy = policy.forward(sentence, noise_std=noise_std, noise_rng=rng)
        for name in policy.tasks:
            diffs.append(np.abs(noisy["probs"][name] - clean["probs"][name]).mean())
    return float(np.mean(diffs))


def adapt_noise(policy, state, sentences, rng):
    """Adapt the noise scale after a batch.

    Measures the induced action divergence at the current stddev; grows
    the stddev by the adaptation factor when the divergence falls short of
    the target, shrinks it otherwise.  Returns the new stddev.
    """
    d = action_divergence(policy, sentences, state.std, rng)
    state.history.append(d)
    if d < state.target:
        state.std *= state.adapt
    else:
        state.std /= state.adapt
    return state.std


def finetune_pg(policy, train, config, dev=None, log_path=None, baseline=None):
    """Fine-tune `policy` on (Sentence, gold Tree) pairs.

    A frozen clone of the incoming policy serves as the baseline for every
    update (pass `baseline` to supply the frozen model yourself).  Per
    epoch the corpus is visited in a seeded shuffled order; when `dev` is
    given its bracketing F1 is evaluated after each epoch.  A TSV log
    (epoch, mean reward, mean baseline, mean standardized advantage,
    entropy, dev F1, noise stddev) is written to `log_path` when provided.
    Returns (policy, log rows).
    """
    if baseline is None:
        baseline = policy.clone()
    tracker = AdvantageTracker(config.burn_in)
    rng = np.random.default_rng(config.seed)
    noise = NoiseState.from_config(config) if config.noise_enabled else None
    order = np.arange(len(train))
    rows = []
    for epoch in range(config.epochs):
        rng.shuffle(order)
        stats_acc = {"reward": [], "baseline": [], "standardized": [], "entropy": []}
        pending = []
        for i in order:
            sentence, gold_tree = train[i]
            std = noise.std if noise is not None else 0.0
            stats = pg_update(policy, baseline, sentence, gold_tree, config, tracker, rng, std)
            for key in stats_acc:
                stats_acc[key].append(stats[key])
            if noise is not None:
                pending.append(sentence)
                if len(pending) >= config.noise_batch:
                    adapt_noise(policy, noise, pending, rng)
                    pending = []
        if noise is not None and pending:
            adapt_noise(policy, noise, pending, rng)
        row = {
            "epoch": epoch,
            "reward": float(np.mean(stats_acc["reward"])),
            "baseline": float(np.mean(stats_acc["baseline"])),
            "standardized": float(np.mean(stats_acc["standardized"])),
            "entropy": float(np.mean(stats_acc["entropy"])),
            "dev_f1": "",
            "noise_std": noise.std if noise is not None else 0.0,
        }
        if dev is not None:
            gold = [tree for _, tree in dev]
            predicted = [decode(predict_greedy(policy, s)) for s, _ in dev]
            row["dev_f1"] = corpus_bracket_score(gold, predicted).f1
        rows.append(row)
    if log_path:
        with open(log_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), delimiter="\t")
            writer.writeheader()
            writer.writerows(rows)
    return policy, rows
