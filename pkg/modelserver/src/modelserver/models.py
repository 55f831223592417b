"""Served model implementations.

A served model owns a vocabulary (symbol list in id order), a context
length limit, and one operation: raw next-token logits for a batch of
contexts, row order preserved. The server never samples or warps; all
stochasticity stays on the client side.
"""

from __future__ import annotations

import json

import numpy as np

__all__ = ["ServedModel", "UniformStub", "FileStub", "load_model", "DEFAULT_VOCAB"]

# Protocol default: three specials, the 20 canonical amino acids, X.
DEFAULT_VOCAB = ["<pad>", "<bos>", "<eos>"] + list("ACDEFGHIKLMNPQRSTVWY") + ["X"]

DEFAULT_MAX_CONTEXT = 4096


class ServedModel:
    """Base class: name, vocabulary, context limit, logits."""

    name: str = "model"
    vocab: list
    max_context: int = DEFAULT_MAX_CONTEXT

    def logits(self, contexts: list) -> list:
        raise NotImplementedError


class UniformStub(ServedModel):
    """All-zero logits: uniform after the client's softmax."""

    def __init__(self, vocab: list | None = None):
        self.name = "stub:uniform"
        self.vocab = list(vocab) if vocab else list(DEFAULT_VOCAB)

    def logits(self, contexts: list) -> list:
        row = [0.0] * len(self.vocab)
        return [list(row) for _ in contexts]


class FileStub(ServedModel):
    """Logits looked up from a JSON table keyed by a context suffix.

    File schema: {"vocab": [...], "window": n, "default": [...],
    "entries": [{"context": [ids], "logits": [...]}]}. The last ``window``
    tokens of the request context select the row; ``default`` covers
    misses.
    """

    def __init__(self, path: str, vocab: list | None = None):
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        self.name = f"stub:file={path}"
        self.vocab = list(vocab) if vocab else list(
            payload.get("vocab", DEFAULT_VOCAB)
        )
        self.window = int(payload.get("window", 0))
        self._rows = {
            tuple(int(t) for t in entry["context"]): [
                float(v) for v in entry["logits"]
            ]
            for entry in payload.get("entries", [])
        }
        default = payload.get("default")
        self._default = None if default is None else [float(v) for v in default]
        width = len(self.vocab)
        for key, row in self._rows.items():
            if len(row) != width:
                raise ValueError(f"logit row for {key} has width {len(row)}")
        if self._default is not None and len(self._default) != width:
            raise ValueError("default logit row width mismatch")

    def _row(self, context: list) -> list:
        key = tuple(context[-self.window :]) if self.window else ()
        row = self._rows.get(key, self._default)
        if row is None:
            raise KeyError(f"no logits for context suffix {key}")
        return row

    def logits(self, contexts: list) -> list:
        return [list(self._row(c)) for c in contexts]


class CausalLMAdapter(ServedModel):
    """Hub-loaded causal language model in deterministic eval mode.

    Requires the ``hf`` extra (transformers + torch). The tokenizer's
    vocabulary order defines the manifest unless one is supplied.
    """

    def __init__(self, hub_id: str, vocab: list | None = None):
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self._torch = torch
        self.name = hub_id
        self._tokenizer = AutoTokenizer.from_pretrained(hub_id)
        self._model = AutoModelForCausalLM.from_pretrained(hub_id)
        self._model.eval()
        if vocab:
            self.vocab = list(vocab)
        else:
            inverse = {i: s for s, i in self._tokenizer.get_vocab().items()}
            self.vocab = [inverse[i] for i in range(len(inverse))]
        self.max_context = int(
            getattr(self._model.config, "max_position_embeddings",
                    DEFAULT_MAX_CONTEXT)
        )

    def logits(self, contexts: list) -> list:
        torch = self._torch
        rows = []
        with torch.no_grad():
            for context in contexts:
                if context:
                    ids = torch.tensor([list(context)], dtype=torch.long)
                    out = self._model(input_ids=ids).logits[0, -1, :]
                else:
                    bos = self._tokenizer.bos_token_id or 0
                    ids = torch.tensor([[bos]], dtype=torch.long)
                    out = self._model(input_ids=ids).logits[0, -1, :]
                rows.append([float(v) for v in out.double().tolist()])
        return rows


def load_model(spec: str, vocab: list | None = None) -> ServedModel:
    """Build a served model from a CLI spec.

    Forms: ``stub:uniform``, ``stub:file=<logits.json>``, or a hub id.
    """
    if spec == "stub:uniform":
        return UniformStub(vocab=vocab)
    if spec.startswith("stub:file="):
        return FileStub(spec[len("stub:file="):], vocab=vocab)
    if spec.startswith("stub:"):
        raise ValueError(f"unknown stub spec {spec!r}")
    return CausalLMAdapter(spec, vocab=vocab)


def softmax(row) -> np.ndarray:
    logits = np.asarray(row, dtype=np.float64)
    logits = logits - logits.max()
    probs = np.exp(logits)
    return probs / probs.sum()
