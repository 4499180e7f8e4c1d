"""Synthetic labeled corpora shaped like short social posts.

Used for scale/runtime checks and end-to-end smoke tests. These are not a
stand-in for the real tweet corpus: accuracies on them mean nothing.
"""
from __future__ import annotations

import numpy as np

from sentimon.corpus import Label, LabeledDocument

_SYLLABLES = ["ka", "lo", "mi", "ne", "su", "ta", "ri", "po", "ve", "zu", "an", "el", "or", "ix"]


def _word(k: int) -> str:
    parts = []
    k += 1
    while k:
        k, r = divmod(k, len(_SYLLABLES))
        parts.append(_SYLLABLES[r])
    return "".join(parts)


def tweet_corpus(n_docs: int = 27_481, vocab_size: int = 20_000, seed: int = 0,
                 signal: float = 0.12, class_probs=(0.28, 0.40, 0.32)) -> list[LabeledDocument]:
    """Zipfian background words plus a share of class-indicative words."""
    rng = np.random.default_rng(seed)
    words = [_word(k) for k in range(vocab_size)]
    ranks = np.arange(1, vocab_size + 1)
    background = 1.0 / ranks
    background /= background.sum()
    # each class owns a disjoint slice of mid-frequency words
    per_class = min(1000, (vocab_size - 50) // 3)
    if per_class < 1:
        raise ValueError("vocab_size too small")
    owned = rng.permutation(np.arange(50, 50 + 3 * per_class)).reshape(3, per_class)
    extras = [" http://t.co/x", " @someone", "!!!", " #tag", ""]
    labels = rng.choice(3, size=n_docs, p=class_probs)
    lengths = rng.integers(3, 20, size=n_docs)
    total = int(lengths.sum())
    is_signal = rng.random(total) < signal
    bg = rng.choice(vocab_size, size=total, p=background)
    sig_rank = np.minimum(rng.zipf(1.3, size=total), per_class) - 1
    extra = rng.integers(len(extras), size=n_docs)
    docs = []
    pos = 0
    for i, (lab, length) in enumerate(zip(labels.tolist(), lengths.tolist())):
        picks = [words[owned[lab][sig_rank[k]]] if is_signal[k] else words[bg[k]]
                 for k in range(pos, pos + length)]
        pos += length
        text = " ".join(picks) + extras[extra[i]]
        docs.append(LabeledDocument(f"id{i:06d}", text, Label(lab)))
    return docs
