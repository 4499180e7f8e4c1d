"""Versioned, checksummed model artifacts.

An artifact is two lines of UTF-8 text:

1. a JSON header ``{"created_unix_seconds", "magic": "SSTM", "model_kind",
   "payload_sha256", "schema_version": 1}``;
2. the payload, canonical JSON (sorted keys, no insignificant whitespace)
   holding the preprocessing config and stopwords, the vocabulary as
   ``[term, index, df]`` triples, the idf table, ``n_docs`` and the
   classifier parameters.

Floats are written with Python's shortest round-trip repr, so a loaded
model predicts bit-for-bit like the saved one. Absent-class naive Bayes
priors are ``-Infinity``.
"""
from __future__ import annotations

import hashlib
import json
import os

import numpy as np

from ..errors import CorruptArtifact, SchemaError, VersionMismatch
from ..features import Vocabulary, TfIdfModel
from ..preprocess import PreprocessConfig
from .bundle import NB, ModelBundle
from .linear import LinearModel
from .naive_bayes import NaiveBayesModel

MAGIC = "SSTM"
SCHEMA_VERSION = 1


def _canonical(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=True,
                      allow_nan=True).encode("ascii")


def _floats(arr) -> list:
    return np.asarray(arr, dtype=np.float64).tolist()


def _payload(bundle: ModelBundle) -> dict:
    pre = bundle.preprocess
    vocab = bundle.tfidf.vocabulary
    clf = bundle.classifier
    if isinstance(clf, NaiveBayesModel):
        classifier = {
            "type": NB,
            "alpha": clf.alpha,
            "class_log_prior": _floats(clf.class_log_prior),
            "feature_log_prob": _floats(clf.feature_log_prob),
        }
    else:
        classifier = {
            "type": clf.kind,
            "c_value": clf.c_value,
            "weights": _floats(clf.weights),
            "bias": _floats(clf.bias),
            "objective": clf.objective,
            "n_iter": clf.n_iter,
        }
    return {
        "preprocess": {
            "strip_urls": pre.strip_urls,
            "strip_mentions": pre.strip_mentions,
            "lowercase": pre.lowercase,
            "strip_stopwords": pre.strip_stopwords,
            "min_token_len": pre.min_token_len,
            "stopwords": sorted(pre.stopword_list),
        },
        "features": {
            "weighting": bundle.weighting,
            "n_docs": bundle.tfidf.n_docs,
            "max_features": vocab.max_features,
            "sublinear_tf": bundle.tfidf.sublinear_tf,
            "vocabulary": [[term, i, df] for i, (term, df)
                           in enumerate(zip(vocab.terms, vocab.document_frequency))],
            "idf": _floats(bundle.tfidf.idf),
        },
        "classifier": classifier,
    }


def model_version(kind: str, digest: str) -> str:
    return f"{kind}-{digest[:12]}"


def default_created() -> int:
    """``SOURCE_DATE_EPOCH`` when set, else 0, keeping artifacts reproducible."""
    return int(os.environ.get("SOURCE_DATE_EPOCH", "0"))


def dumps_model(bundle: ModelBundle, created: int | None = None) -> bytes:
    payload = _canonical(_payload(bundle))
    header = {
        "magic": MAGIC,
        "schema_version": SCHEMA_VERSION,
        "model_kind": bundle.kind,
        "created_unix_seconds": default_created() if created is None else int(created),
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    return _canonical(header) + b"\n" + payload + b"\n"


def save_model(bundle: ModelBundle, sink, created: int | None = None) -> str:
    """Write ``bundle`` to a path or binary stream; returns the model version."""
    data = dumps_model(bundle, created)
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            fh.write(data)
    else:
        sink.write(data)
    header = json.loads(data.split(b"\n", 1)[0])
    return model_version(header["model_kind"], header["payload_sha256"])


def read_header(data: bytes) -> dict:
    head, sep, _ = data.partition(b"\n")
    if not sep:
        raise SchemaError("artifact has no header line")
    try:
        header = json.loads(head)
    except ValueError as exc:
        raise SchemaError(f"unreadable header: {exc}") from exc
    if not isinstance(header, dict) or header.get("magic") != MAGIC:
        raise SchemaError("not a model artifact (bad magic)")
    missing = {"schema_version", "model_kind", "created_unix_seconds", "payload_sha256"} - header.keys()
    if missing:
        raise SchemaError(f"header lacks {sorted(missing)}")
    if header["schema_version"] != SCHEMA_VERSION:
        raise VersionMismatch(
            f"artifact schema_version {header['schema_version']!r}, this build reads {SCHEMA_VERSION}")
    return header


def loads_model(data: bytes) -> ModelBundle:
    header = read_header(data)
    payload = data.partition(b"\n")[2]
    if payload.endswith(b"\n"):
        payload = payload[:-1]
    if hashlib.sha256(payload).hexdigest() != header["payload_sha256"]:
        raise CorruptArtifact("payload checksum does not match the header")
    try:
        body = json.loads(payload)
        bundle = _bundle_from_payload(body)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed payload: {exc}") from exc
    if bundle.kind != header["model_kind"]:
        raise SchemaError(f"header says {header['model_kind']!r}, payload holds {bundle.kind!r}")
    return ModelBundle(bundle.preprocess, bundle.tfidf, bundle.classifier, bundle.weighting,
                       model_version(header["model_kind"], header["payload_sha256"]))


def load_model(source) -> ModelBundle:
    if isinstance(source, (bytes, bytearray)):
        return loads_model(bytes(source))
    if isinstance(source, (str, os.PathLike)):
        with open(source, "rb") as fh:
            return loads_model(fh.read())
    return loads_model(source.read())


def _bundle_from_payload(body: dict) -> ModelBundle:
    p = body["preprocess"]
    pre = PreprocessConfig(
        strip_urls=bool(p["strip_urls"]),
        strip_mentions=bool(p["strip_mentions"]),
        lowercase=bool(p["lowercase"]),
        strip_stopwords=bool(p["strip_stopwords"]),
        stopword_list=frozenset(p["stopwords"]),
        min_token_len=int(p["min_token_len"]),
    )
    f = body["features"]
    triples = sorted(f["vocabulary"], key=lambda t: t[1])
    if [t[1] for t in triples] != list(range(len(triples))):
        raise ValueError("vocabulary indices are not dense")
    vocab = Vocabulary(tuple(t[0] for t in triples), tuple(int(t[2]) for t in triples),
                       int(f["max_features"]))
    tfidf = TfIdfModel(vocab, np.array(f["idf"], dtype=np.float64), int(f["n_docs"]),
                       bool(f["sublinear_tf"]))
    c = body["classifier"]
    dim = len(vocab)
    if c["type"] == NB:
        table = np.array(c["feature_log_prob"], dtype=np.float64)
        model = NaiveBayesModel(np.array(c["class_log_prior"], dtype=np.float64), table, float(c["alpha"]))
    else:
        table = np.array(c["weights"], dtype=np.float64)
        model = LinearModel(table, np.array(c["bias"], dtype=np.float64), c["type"],
                            float(c["c_value"]), float(c["objective"]), int(c["n_iter"]))
    if table.shape != (3, dim):
        raise ValueError(f"classifier table has shape {table.shape}, expected (3, {dim})")
    return ModelBundle(pre, tfidf, model, f["weighting"])
