"""Multi-task sequence tagger.

One shared contextual encoder feeds independent softmax heads: the three
main tasks predict a label's n, c and u parts, and any auxiliary tracks
get their own heads whose losses are down-weighted.  The encoder is a
windowed feedforward layer (word and POS embeddings of the surrounding
tokens, concatenated, through one tanh layer); anything producing a hidden
vector per token could replace it without touching the heads.

All tensors are float64 numpy arrays and every gradient is written out by
hand, which keeps the whole model checkable against finite differences.
"""

import copy
import json
from dataclasses import dataclass

import numpy as np

from .encodings import DYNAMIC, EncodedSentence, NComponent, TagLabel, decode
from . import metrics

MAIN_TASKS = ("n", "c", "u")

OOV = "<oov>"
BOS = "<bos>"
EOS = "<eos>"

_CHECKPOINT_VERSION = 1


class Vocabularies:
    """Token/POS/label id maps shared between training and inference."""

    def __init__(self, word2id, pos2id, tasks):
        self.word2id = word2id
        self.pos2id = pos2id
        self.tasks = tasks  # task name -> label -> id
        self.task_labels = {
            name: [lab for lab, _ in sorted(table.items(), key=lambda kv: kv[1])]
            for name, table in tasks.items()
        }

    @classmethod
    def build(cls, corpus):
        """corpus: list of (Sentence, EncodedSentence, {aux name: AuxTrack})."""
        words, pos = set(), set()
        labels = {name: set() for name in MAIN_TASKS}
        aux_names = sorted(corpus[0][2].keys()) if corpus else []
        for name in aux_names:
            labels[name] = set()
        for sentence, encoded, aux in corpus:
            words.update(sentence.words)
            pos.update(sentence.pos)
            for lab in encoded.labels:
                labels["n"].add(lab.n.token())
                labels["c"].add(lab.c)
                labels["u"].add(lab.u if lab.u else "NONE")
            if sorted(aux.keys()) != aux_names:
                raise ValueError("inconsistent auxiliary tracks across corpus")
            for name in aux_names:
                labels[name].update(aux[name].values)

        def index(items, reserved):
            table = {tok: i for i, tok in enumerate(reserved)}
            for tok in sorted(items - set(reserved)):
                table[tok] = len(table)
            return table

        word2id = index(words, (OOV, BOS, EOS))
        pos2id = index(pos, (OOV, BOS, EOS))
        tasks = {name: index(vals, ()) for name, vals in labels.items()}
        return cls(word2id, pos2id, tasks)

    @property
    def aux_tasks(self):
        return tuple(name for name in self.tasks if name not in MAIN_TASKS)

    def word_ids(self, words):
        oov = self.word2id[OOV]
        return np.array([self.word2id.get(w, oov) for w in words], dtype=np.int64)

    def pos_ids(self, pos):
        oov = self.pos2id[OOV]
        return np.array([self.pos2id.get(p, oov) for p in pos], dtype=np.int64)

    def label_ids(self, task, tokens):
        table = self.tasks[task]
        return np.array([table[tok] for tok in tokens], dtype=np.int64)


def featurize(sentence, vocab, r):
    """Window id matrices for a sentence.

    Returns (word_windows, pos_windows), both (T, 2r+1) int arrays holding
    the ids of positions t-r..t+r with BOS/EOS ids outside the sentence.
    """
    T = len(sentence)
    wids = vocab.word_ids(sentence.words)
    pids = vocab.pos_ids(sentence.pos)
    word_win = np.empty((T, 2 * r + 1), dtype=np.int64)
    pos_win = np.empty((T, 2 * r + 1), dtype=np.int64)
    for off in range(-r, r + 1):
        col = off + r
        for t in range(T):
            s = t + off
            if s < 0:
                word_win[t, col] = vocab.word2id[BOS]
                pos_win[t, col] = vocab.pos2id[BOS]
            elif s >= T:
                word_win[t, col] = vocab.word2id[EOS]
                pos_win[t, col] = vocab.pos2id[EOS]
            else:
                word_win[t, col] = wids[s]
                pos_win[t, col] = pids[s]
    return word_win, pos_win


def _softmax(logits):
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


class TaggerModel:
    """Shared encoder plus per-task affine heads.

    Reading operations (forward, predict) are safe to call concurrently;
    parameter updates must stay single-writer.
    """

    def __init__(self, vocab, config, scheme, rng=None):
        self.vocab = vocab
        self.config = config
        self.scheme = scheme
        self.history = []
        if rng is None:
            rng = np.random.default_rng(config.seed)
        W = 2 * config.window + 1
        d_in = W * (config.word_dim + config.pos_dim)
        H = config.hidden_dim

        def glorot(n_in, n_out):
            bound = np.sqrt(6.0 / (n_in + n_out))
            return rng.uniform(-bound, bound, size=(n_in, n_out))

        self.params = {
            "E_word": rng.uniform(-0.1, 0.1, size=(len(vocab.word2id), config.word_dim)),
            "E_pos": rng.uniform(-0.1, 0.1, size=(len(vocab.pos2id), config.pos_dim)),
            "W1": glorot(d_in, H),
            "b1": np.zeros(H),
        }
        for name, table in vocab.tasks.items():
            self.params["W_" + name] = glorot(H, len(table))
            self.params["b_" + name] = np.zeros(len(table))

    @property
    def tasks(self):
        return tuple(self.vocab.tasks.keys())

    def clone(self):
        other = copy.copy(self)
        other.params = {k: v.copy() for k, v in self.params.items()}
        other.history = list(self.history)
        return other

    def windows(self, sentence):
        return featurize(sentence, self.vocab, self.config.window)

    def input_vectors(self, sentence):
        """Per-token encoder input: concatenated window embeddings."""
        word_win, pos_win = self.windows(sentence)
        T = len(sentence)
        xw = self.params["E_word"][word_win].reshape(T, -1)
        xp = self.params["E_pos"][pos_win].reshape(T, -1)
        return np.concatenate([xw, xp], axis=1)

    def forward(self, sentence, train=False, dropout_rng=None, noise_std=0.0, noise_rng=None):
        """Run the network; returns a cache used for backward().

        With train=True, inverted dropout is applied to the hidden layer.
        noise_std > 0 perturbs every head's logits with Gaussian noise
        before the softmax (one draw per forward pass).
        """
        word_win, pos_win = self.windows(sentence)
        T = len(sentence)
        xw = self.params["E_word"][word_win].reshape(T, -1)
        xp = self.params["E_pos"][pos_win].reshape(T, -1)
        X = np.concatenate([xw, xp], axis=1)
        h_raw = np.tanh(X @ self.params["W1"] + self.params["b1"])
        if not np.isfinite(h_raw).all():
            raise RuntimeError("non-finite hidden activations: check W1/b1/embeddings")
        mask = None
        h = h_raw
        if train and self.config.dropout > 0:
            keep = 1.0 - self.config.dropout
            mask = (dropout_rng.random(h_raw.shape) < keep) / keep
            h = h_raw * mask
        logits = {}
        probs = {}
        for name in self.tasks:
            z = h @ self.params["W_" + name] + self.params["b_" + name]
            if noise_std > 0:
                z = z + noise_rng.normal(0.0, noise_std, size=z.shape)
            if not np.isfinite(z).all():
                raise RuntimeError("non-finite logits in head %r" % name)
            logits[name] = z
            probs[name] = _softmax(z)
        return {
            "word_win": word_win,
            "pos_win": pos_win,
            "X": X,
            "h_raw": h_raw,
            "h": h,
            "mask": mask,
            "logits": logits,
            "probs": probs,
        }

    def backward(self, cache, dlogits):
        """Propagate per-head logit gradients back to every parameter.

        dlogits maps task name -> (T, k) array; missing heads contribute
        nothing.  Returns a gradient dict keyed like self.params.
        """
        grads = {k: np.zeros_like(v) for k, v in self.params.items()}
        dh = np.zeros_like(cache["h"])
        for name, dz in dlogits.items():
            grads["W_" + name] += cache["h"].T @ dz
            grads["b_" + name] += dz.sum(axis=0)
            dh += dz @ self.params["W_" + name].T
        if cache["mask"] is not None:
            dh = dh * cache["mask"]
        dpre = dh * (1.0 - cache["h_raw"] ** 2)
        grads["W1"] += cache["X"].T @ dpre
        grads["b1"] += dpre.sum(axis=0)
        dX = dpre @ self.params["W1"].T
        W = cache["word_win"].shape[1]
        wd = self.config.word_dim
        dxw = dX[:, : W * wd].reshape(-1, W, wd)
        dxp = dX[:, W * wd :].reshape(-1, W, self.config.pos_dim)
        np.add.at(grads["E_word"], cache["word_win"], dxw)
        np.add.at(grads["E_pos"], cache["pos_win"], dxp)
        return grads


@dataclass
class TrainConfig:
    learning_rate: float = 0.2
    momentum: float = 0.9
    decay: float = 0.05          # lr_e = lr / (1 + decay * epoch)
    epochs: int = 100
    batch_size: int = 8
    aux_weight: float = 0.1      # weight of auxiliary-task losses
    window: int = 2              # context radius r
    dropout: float = 0.5
    seed: int = 13
    word_dim: int = 100
    pos_dim: int = 20
    hidden_dim: int = 128
    distance_cap: int = None     # optional clip for distance aux labels

    def __post_init__(self):
        if self.aux_weight < 0:
            raise ValueError("aux_weight must be >= 0")


def _cap_distances(aux, cap):
    from .auxtracks import DISTANCE, PAD, AuxTrack

    capped = {}
    for name, track in aux.items():
        if name == DISTANCE:
            values = [
                v if v == PAD or int(v) <= cap else str(cap) for v in track.values
            ]
            capped[name] = AuxTrack(name, values)
        else:
            capped[name] = track
    return capped


def _gold_ids(vocab, encoded, aux):
    gold = {
        "n": vocab.label_ids("n", encoded.n_tokens()),
        "c": vocab.label_ids("c", [lab.c for lab in encoded.labels]),
        "u": vocab.label_ids("u", [lab.u if lab.u else "NONE" for lab in encoded.labels]),
    }
    for name in vocab.aux_tasks:
        gold[name] = vocab.label_ids(name, aux[name].values)
    return gold


def task_losses(model, cache, gold):
    """Cross-entropy (summed over tokens) and its logit gradient per task."""
    losses = {}
    dlogits = {}
    T = cache["h"].shape[0]
    rows = np.arange(T)
    for name, ids in gold.items():
        p = cache["probs"][name]
        losses[name] = float(-np.log(p[rows, ids]).sum())
        d = p.copy()
        d[rows, ids] -= 1.0
        dlogits[name] = d
    return losses, dlogits


def mtl_loss(model, corpus, beta=None):
    """Mean per-token loss over a corpus, split into components.

    Returns (total, components) where components maps each task to its
    per-token mean cross-entropy and total equals
    components[n] + components[c] + components[u] + beta * sum(aux).
    """
    if beta is None:
        beta = model.config.aux_weight
    sums = {name: 0.0 for name in model.tasks}
    tokens = 0
    for sentence, encoded, aux in corpus:
        cache = model.forward(sentence)
        losses, _ = task_losses(model, cache, _gold_ids(model.vocab, encoded, aux))
        for name, value in losses.items():
            sums[name] += value
        tokens += len(sentence)
    components = {name: value / tokens for name, value in sums.items()}
    total = sum(components[name] for name in MAIN_TASKS)
    total += beta * sum(components[name] for name in model.vocab.aux_tasks)
    return total, components


def train_mtl(corpus, config, dev=None):
    """Train a tagger on (Sentence, EncodedSentence, aux dict) triples.

    Mini-batch SGD with momentum on the summed cross-entropy of all heads
    (auxiliary heads weighted by config.aux_weight), normalised per token,
    with the learning rate decayed linearly in the epoch count.  When
    `dev` (a list of (Sentence, gold Tree) pairs) is given, each epoch's
    greedy predictions are decoded and scored, and the parameters with the
    best dev bracketing F1 are returned.
    """
    if not corpus:
        raise ValueError("empty training corpus")
    if config.distance_cap is not None:
        corpus = [(s, e, _cap_distances(aux, config.distance_cap)) for s, e, aux in corpus]
    vocab = Vocabularies.build(corpus)
    scheme = corpus[0][1].scheme
    seeds = np.random.SeedSequence(config.seed).spawn(3)
    model = TaggerModel(vocab, config, scheme, rng=np.random.default_rng(seeds[0]))
    shuffle_rng = np.random.default_rng(seeds[1])
    dropout_rng = np.random.default_rng(seeds[2])

    gold = [_gold_ids(vocab, encoded, aux) for _, encoded, aux in corpus]
    beta = config.aux_weight
    velocity = {k: np.zeros_like(v) for k, v in model.params.items()}
    best_f1 = -1.0
    best_params = None
    order = np.arange(len(corpus))

    for epoch in range(config.epochs):
        lr = config.learning_rate / (1.0 + config.decay * epoch)
        shuffle_rng.shuffle(order)
        epoch_loss = 0.0
        epoch_tokens = 0
        for start in range(0, len(order), config.batch_size):
            batch = order[start : start + config.batch_size]
            grads = {k: np.zeros_like(v) for k, v in model.params.items()}
            batch_tokens = sum(len(corpus[i][0]) for i in batch)
            for i in batch:
                sentence = corpus[i][0]
                cache = model.forward(sentence, train=True, dropout_rng=dropout_rng)
                losses, dlogits = task_losses(model, cache, gold[i])
                for name in dlogits:
                    w = 1.0 if name in MAIN_TASKS else beta
                    dlogits[name] *= w / batch_tokens
                    epoch_loss += w * losses[name]
                for k, g in model.backward(cache, dlogits).items():
                    grads[k] += g
            for k in model.params:
                velocity[k] = config.momentum * velocity[k] - lr * grads[k]
                model.params[k] += velocity[k]
            epoch_tokens += batch_tokens
        mean_loss = epoch_loss / epoch_tokens
        if not np.isfinite(mean_loss):
            raise RuntimeError("training diverged at epoch %d (loss=%r)" % (epoch, mean_loss))
        record = {"epoch": epoch, "loss": mean_loss, "lr": lr}
        if dev is not None:
            f1 = _dev_f1(model, dev)
            record["dev_f1"] = f1
            if f1 > best_f1:
                best_f1 = f1
                best_params = {k: v.copy() for k, v in model.params.items()}
        model.history.append(record)

    if best_params is not None:
        model.params = best_params
    return model


def _dev_f1(model, dev):
    score = metrics.BracketScore(0, 0, 0)
    for sentence, gold_tree in dev:
        predicted = decode(predict_greedy(model, sentence))
        score = score + metrics.bracket_score(gold_tree, predicted)
    return score.f1


def predict_greedy(model, sentence):
    """Argmax labels per token and task; the last token's n and c are
    forced to the dummy so the output always decodes."""
    cache = model.forward(sentence)
    T = len(sentence)
    picks = {
        name: [model.vocab.task_labels[name][i] for i in cache["probs"][name].argmax(axis=1)]
        for name in MAIN_TASKS
    }
    labels = []
    for t in range(T):
        u = picks["u"][t]
        u = "" if u == "NONE" else u
        if t == T - 1:
            labels.append(TagLabel.dummy(u))
            continue
        # interior dummies are legal input to decode(), keep them as-is
        n = NComponent.from_token(picks["n"][t])
        labels.append(TagLabel(n, picks["c"][t], u))
    return EncodedSentence(sentence, labels, model.scheme if model.scheme else DYNAMIC)


def predict_corpus(model, sentences, batch_size=128):
    """Greedy predictions for many sentences, in input order.

    batch_size only controls chunking; results are independent of it.
    """
    out = []
    for start in range(0, len(sentences), batch_size):
        for sentence in sentences[start : start + batch_size]:
            out.append(predict_greedy(model, sentence))
    return out


# ---------------------------------------------------------------------------
# Checkpointing.

def save_model(path, model):
    """Write a versioned .npz checkpoint (parameters + vocab + config)."""
    names = sorted(model.params.keys())
    meta = {
        "version": _CHECKPOINT_VERSION,
        "scheme": model.scheme,
        "param_names": names,
        "word2id": model.vocab.word2id,
        "pos2id": model.vocab.pos2id,
        "tasks": model.vocab.tasks,
        "config": {
            k: v for k, v in model.config.__dict__.items()
        },
    }
    arrays = {"param_%d" % i: model.params[name] for i, name in enumerate(names)}
    np.savez(path, meta=np.array(json.dumps(meta)), **arrays)


def load_model(path):
    with np.load(path) as data:
        meta = json.loads(str(data["meta"]))
        if meta["version"] != _CHECKPOINT_VERSION:
            raise ValueError("unsupported checkpoint version %r" % meta["version"])
        params = {
            name: data["param_%d" % i] for i, name in enumerate(meta["param_names"])
        }
    vocab = Vocabularies(meta["word2id"], meta["pos2id"], meta["tasks"])
    config = TrainConfig(**meta["config"])
    model = TaggerModel.__new__(TaggerModel)
    model.vocab = vocab
    model.config = config
    model.scheme = meta["scheme"]
    model.params = params
    model.history = []
    return model
