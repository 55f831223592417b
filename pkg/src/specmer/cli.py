"""Command-line entrypoint.

Subcommands: ``index`` (build/stats), ``generate``, ``analyze``,
``speedup``, ``verify`` (coupling/sequence), and ``sweep``. Exit codes:
0 success, 1 usage, 2 data error, 3 remote error. Every output file is
accompanied by a run manifest recording the resolved config, input
checksums, the seed, and output hashes; identical manifests imply
byte-identical sequence outputs.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import itertools
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .analysis import (
    SpeedupParams,
    diversity,
    expected_speedup,
    expected_speedup_batch,
    expected_speedup_serial,
    library_stats,
)
from .coupling import empirical_marginal, exact_marginal
from .decode import DecodeConfig, GenerationResult, iter_library
from .errors import DataError, RemoteError, SpecmerError
from .kmer import build_index, load_index, save_index
from .lm import NgramModel, SamplerConfig, parse_model_descriptor
from .msa import load_fasta, parse_fasta, ungap
from .oracle import compare_empirical, exact_model_distribution
from .rng import Rng
from .vocab import Vocabulary, decode as decode_ids, default_vocabulary, encode

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_REMOTE = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _write_manifest(primary_out, command: str, config: dict, seed,
                    inputs: dict, outputs: dict, timings: dict) -> str:
    manifest = {
        "tool_version": __version__,
        "command": command,
        "config": config,
        "seed": seed,
        "input_checksums": {k: _sha256_file(v) for k, v in inputs.items() if v},
        "outputs": {k: _sha256_file(v) for k, v in outputs.items() if v},
        "timings": timings,
    }
    path = str(primary_out) + ".manifest.json"
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
        fh.write("\n")
    return path


def _parse_k(text) -> tuple:
    if isinstance(text, (list, tuple)):
        return tuple(int(k) for k in text)
    return tuple(int(part) for part in str(text).split(",") if part)


def _read_at(value: str) -> str:
    if value.startswith("@"):
        with open(value[1:], "r", encoding="utf-8") as fh:
            return fh.read()
    return value


def _text_to_ids(value: str, vocab: Vocabulary) -> list:
    """Context/wild-type input: literal residues or @file (text or FASTA)."""
    text = _read_at(value)
    if text.lstrip().startswith(">"):
        record = parse_fasta(text).records[0]
        ids, _ = ungap(record, vocab)
        return ids
    return encode("".join(text.split()), vocab)


def _emit(payload: dict, as_json: bool, lines=None):
    if as_json:
        print(json.dumps(payload, sort_keys=True))
    else:
        for line in lines if lines is not None else (
            f"{k}: {v}" for k, v in payload.items()
        ):
            print(line)


# --- index -----------------------------------------------------------------


def _cmd_index_build(args) -> int:
    t0 = time.perf_counter()
    msa = load_fasta(args.msa)
    if args.dedupe:
        msa = msa.dedupe()
    vocab = default_vocabulary()
    index = build_index(msa, _parse_k(args.k), vocab)
    save_index(index, args.out)
    timings = {"build_seconds": time.perf_counter() - t0}
    _write_manifest(
        args.out,
        command="index build",
        config={"msa": args.msa, "k": list(index.k_values), "dedupe": args.dedupe},
        seed=None,
        inputs={"msa": args.msa},
        outputs={"index": args.out},
        timings=timings,
    )
    payload = {
        "out": args.out,
        "sequences": msa.sequence_count,
        "k_values": list(index.k_values),
        "totals": {str(k): index.totals[k] for k in index.k_values},
        "empty_k": list(index.empty_k),
    }
    _emit(payload, args.json)
    return EXIT_OK


def _cmd_index_stats(args) -> int:
    index = load_index(args.path)
    payload = {
        "path": args.path,
        "k_values": list(index.k_values),
        "totals": {str(k): index.totals[k] for k in index.k_values},
        "distinct": {str(k): len(index.counts[k]) for k in index.k_values},
        "source": index.source,
        "empty_k": list(index.empty_k),
    }
    if not args.json:
        lines = [f"index {args.path}"]
        for k in index.k_values:
            top = sorted(
                index.counts[k].items(), key=lambda kv: (-kv[1], kv[0])
            )[:5]
            motifs = ", ".join(
                "".join(index.vocab.symbol_of(t) for t in window) + f"={count}"
                for window, count in top
            )
            lines.append(
                f"  k={k}: total {index.totals[k]}, distinct "
                f"{len(index.counts[k])}, top [{motifs}]"
            )
        _emit(payload, False, lines)
    else:
        _emit(payload, True)
    return EXIT_OK


# --- generate ----------------------------------------------------------------


def _load_config_defaults(args) -> dict:
    if not getattr(args, "config", None):
        return {}
    with open(args.config, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _pick(args, cfg_file: dict, name: str, default):
    value = getattr(args, name.replace("-", "_"), None)
    if value is not None:
        return value
    if name in cfg_file:
        return cfg_file[name]
    return default


def _cmd_generate(args) -> int:
    cfg_file = _load_config_defaults(args)

    draft_desc = _pick(args, cfg_file, "draft", None)
    target_desc = _pick(args, cfg_file, "target", None)
    if target_desc is None:
        raise _UsageError("--target is required")
    index_path = _pick(args, cfg_file, "index", None)

    vocab = default_vocabulary()
    index = load_index(index_path) if index_path else None
    if index is not None:
        vocab = index.vocab
    target = parse_model_descriptor(target_desc, vocab=vocab)
    vocab = target.vocab
    draft = parse_model_descriptor(draft_desc, vocab=vocab) if draft_desc else None

    context_arg = _pick(args, cfg_file, "context", "")
    context = _text_to_ids(context_arg, vocab) if context_arg else []
    wild_type_arg = _pick(args, cfg_file, "wild-type", None)
    wild_type = _text_to_ids(wild_type_arg, vocab) if wild_type_arg else None

    max_len = _pick(args, cfg_file, "max-len", None)
    if max_len is None:
        max_len = len(wild_type) if wild_type else 256

    candidates = int(_pick(args, cfg_file, "candidates", 1))
    k_values = _parse_k(_pick(args, cfg_file, "k", "1,3,5"))
    seed = int(_pick(args, cfg_file, "seed", 0))
    n = int(_pick(args, cfg_file, "n", 200))
    cfg = DecodeConfig(
        context=tuple(context),
        max_len=int(max_len),
        draft_len=int(_pick(args, cfg_file, "gamma", 5)),
        num_candidates=candidates,
        sampler=SamplerConfig(
            temperature=float(_pick(args, cfg_file, "temp", 1.0)),
            top_p=float(_pick(args, cfg_file, "top-p", 0.95)),
        ),
        k_values=k_values,
        seed=seed,
        boundary_windows=not _pick(args, cfg_file, "no-boundary-windows", False),
        bonus_token=not _pick(args, cfg_file, "no-bonus-token", False),
        warp_mode=_pick(args, cfg_file, "warp", "both"),
    )

    method = _pick(args, cfg_file, "method", None)
    if method is None:
        if draft is None:
            method = "baseline"
        elif candidates > 1 and index is not None:
            method = "specmer"
        else:
            method = "speculative"
    if method in ("speculative", "specmer") and draft is None:
        raise _UsageError(f"method {method} needs --draft")
    if method == "specmer" and candidates > 1 and index is None:
        raise _UsageError("method specmer with candidates > 1 needs --index")

    out_path = _pick(args, cfg_file, "out", None)
    trace_path = _pick(args, cfg_file, "trace", None)
    if out_path is None:
        raise _UsageError("--out is required")

    t0 = time.perf_counter()
    produced = 0
    trace_fh = open(trace_path, "w", encoding="utf-8") if trace_path else None
    try:
        with open(out_path, "w", encoding="utf-8") as fasta_fh:
            for i, result in iter_library(
                method, n, cfg, draft=draft, target=target, index=index
            ):
                produced += 1
                header = (
                    f">gen_{i:04d} method={method} seed={seed} "
                    f"gamma={cfg.draft_len} c={candidates} "
                    f"alpha={result.trace.acceptance_ratio:.4f}"
                )
                fasta_fh.write(header + "\n")
                fasta_fh.write(decode_ids(result.sequence, vocab) + "\n")
                if trace_fh is not None:
                    line = {"index": i}
                    line.update(result.to_dict())
                    trace_fh.write(json.dumps(line, sort_keys=True) + "\n")
    finally:
        if trace_fh is not None:
            trace_fh.close()

    timings = {"generate_seconds": time.perf_counter() - t0}
    resolved = {
        "method": method,
        "draft": draft_desc,
        "target": target_desc,
        "index": index_path,
        "context_len": len(context),
        "max_len": cfg.max_len,
        "gamma": cfg.draft_len,
        "candidates": candidates,
        "temperature": cfg.sampler.temperature,
        "top_p": cfg.sampler.top_p,
        "k": list(k_values),
        "n": n,
        "boundary_windows": cfg.boundary_windows,
        "bonus_token": cfg.bonus_token,
        "warp": cfg.warp_mode,
    }
    inputs = {}
    if index_path:
        inputs["index"] = index_path
    _write_manifest(
        out_path,
        command="generate",
        config=resolved,
        seed=seed,
        inputs=inputs,
        outputs={"sequences": out_path, "traces": trace_path},
        timings=timings,
    )
    _emit(
        {"out": out_path, "trace": trace_path, "produced": produced,
         "failed": n - produced},
        args.json,
    )
    return EXIT_OK


# --- analyze -----------------------------------------------------------------


def _results_from_trace(path) -> list:
    results = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                results.append(GenerationResult.from_dict(json.loads(line)))
    if not results:
        raise DataError(f"{path}: no trace lines")
    return results


def _results_from_fasta(path, vocab: Vocabulary, context_len: int) -> list:
    from .decode import DecodeTrace

    msa = load_fasta(path)
    stop = vocab.render.get("<eos>", "2")
    results = []
    for record in msa.records:
        text = record.aligned
        ends_with_stop = bool(stop) and text.endswith(stop)
        if ends_with_stop:
            text = text[: -len(stop)]
        ids = encode(text, vocab)
        if ends_with_stop:
            ids.append(vocab.eos_id)
        results.append(
            GenerationResult(
                sequence=ids,
                context_len=min(context_len, len(ids)),
                trace=DecodeTrace(),
                method="unknown",
            )
        )
    return results


def _cmd_analyze(args) -> int:
    vocab = default_vocabulary()
    index = load_index(args.index) if args.index else None
    if index is not None:
        vocab = index.vocab
    target = parse_model_descriptor(args.target, vocab=vocab)
    vocab = target.vocab

    if args.trace:
        results = _results_from_trace(args.trace)
    elif args.seqs:
        context_ids = _text_to_ids(args.context, vocab) if args.context else []
        results = _results_from_fasta(args.seqs, vocab, len(context_ids))
    else:
        raise _UsageError("need --trace or --seqs")

    stats = library_stats(results, target, index=index)
    payload = stats.to_dict()
    if args.wild_type:
        wt = _text_to_ids(args.wild_type, vocab)
        payload["diversity"] = diversity(results, wt, vocab.eos_id)
    payload["extensions"] = {}

    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=1, sort_keys=True)
            fh.write("\n")
        inputs = {}
        if args.trace:
            inputs["trace"] = args.trace
        if args.seqs:
            inputs["seqs"] = args.seqs
        _write_manifest(
            args.out,
            command="analyze",
            config={"target": args.target, "index": args.index},
            seed=None,
            inputs=inputs,
            outputs={"stats": args.out},
            timings={},
        )
    summary = {
        "n": payload["n"],
        "mean_nll": payload["mean_nll"],
        "top20_nll": payload["top20_nll"],
        "top5_nll": payload["top5_nll"],
        "accept_ratio": payload["accept_ratio"],
        "mean_kmer_score": payload["mean_kmer_score"],
        "out": args.out,
    }
    _emit(payload if args.json else summary, args.json)
    return EXIT_OK


# --- speedup ------------------------------------------------------------------


def _cmd_speedup(args) -> int:
    params = SpeedupParams(
        alpha=args.alpha,
        gamma=args.gamma,
        candidates=args.candidates,
        cost_coeff=args.ce,
        batch_cost=args.xi,
        m_p=args.mp,
        m_q=args.mq,
        m_k=args.mk,
    )
    values = {
        "vanilla": expected_speedup(params),
        "batch": expected_speedup_batch(params),
        "serial": expected_speedup_serial(params),
    }
    if args.mode:
        values = {args.mode: values[args.mode]}
    _emit(
        values,
        args.json,
        [f"{mode}: {value:.6f}" for mode, value in values.items()],
    )
    return EXIT_OK


# --- verify -------------------------------------------------------------------


def _random_pair(size: int, rng: Rng):
    gen = rng.generator
    return gen.dirichlet(np.ones(size)), gen.dirichlet(np.ones(size))


def _cmd_verify_coupling(args) -> int:
    root = Rng(args.seed)
    worst_exact = 0.0
    for i in range(args.pairs):
        p, q = _random_pair(args.vocab_size, root.split("pair", i))
        deviation = float(np.abs(exact_marginal(p, q) - q).max())
        worst_exact = max(worst_exact, deviation)

    p, q = _random_pair(args.vocab_size, root.split("pair", 0))
    emp = empirical_marginal(p, q, args.trials, root.split("mc"))
    sigma = np.sqrt(np.maximum(q * (1 - q), 1e-300) / args.trials)
    ratios = np.abs(emp - q) / sigma
    worst_mc = float(ratios.max())

    ok = worst_exact <= 1e-12 and worst_mc <= 4.0
    payload = {
        "pairs": args.pairs,
        "trials": args.trials,
        "max_exact_deviation": worst_exact,
        "max_mc_sigma": worst_mc,
        "pass": ok,
    }
    _emit(
        payload,
        args.json,
        [
            f"exact enumeration: max |marginal - q| = {worst_exact:.3e} over "
            f"{args.pairs} pairs",
            f"monte carlo ({args.trials} draws): max deviation = "
            f"{worst_mc:.2f} sigma",
            f"pass: {ok}",
        ],
    )
    return EXIT_OK if ok else EXIT_DATA


def _synthetic_pair(vocab: Vocabulary, seed: int):
    """Seeded bigram/trigram pair over a tiny alphabet for self-checks."""
    gen = Rng(seed).split("corpus").generator
    residues = list(vocab.residue_ids())
    rows = [
        [residues[int(t)] for t in gen.integers(0, len(residues), size=12)]
        for _ in range(30)
    ]
    draft = NgramModel.fit(rows, order=2, vocab=vocab, smoothing=0.1)
    target = NgramModel.fit(rows, order=3, vocab=vocab, smoothing=0.1)
    return draft, target


def _cmd_verify_sequence(args) -> int:
    from .decode import speculative_generate
    from .vocab import AMINO_ACIDS

    residues = AMINO_ACIDS[: args.vocab_size]
    vocab = Vocabulary.from_residues(residues)
    if args.draft and args.target:
        draft = parse_model_descriptor(args.draft, vocab=vocab)
        target = parse_model_descriptor(args.target, vocab=vocab)
    else:
        draft, target = _synthetic_pair(vocab, args.seed)

    sampler = SamplerConfig(temperature=args.temp, top_p=args.top_p)
    exact = exact_model_distribution(target, [], args.len, sampler)
    cfg = DecodeConfig(
        context=(),
        max_len=args.len,
        draft_len=args.gamma,
        num_candidates=1,
        sampler=sampler,
        seed=args.seed,
    )
    root = Rng(args.seed)
    samples = [
        speculative_generate(draft, target, cfg, root.split("sequence", i)).sequence
        for i in range(args.samples)
    ]
    report = compare_empirical(samples, exact)
    _emit(
        report,
        args.json,
        [
            f"tv: {report['tv']:.6f}",
            f"chi2_p: {report['chi2_p']:.6f}",
            f"out_of_space: {report['out_of_space']:.6f}",
        ],
    )
    return EXIT_OK


# --- sweep ---------------------------------------------------------------------


def _config_hash(cell: dict) -> str:
    canonical = json.dumps(cell, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()[:16]


def expand_grid(grid: dict) -> list:
    """Cross product of the gamma/temperature/k/candidates lists, deduplicated
    by config hash."""
    gammas = grid.get("gamma", [5])
    temps = grid.get("temperature", [1.0])
    k_sets = [_parse_k(k) for k in grid.get("k", [[1, 3, 5]])]
    cands = grid.get("candidates", [1])

    cells = []
    seen = set()
    for gamma, temp, k_set, c in itertools.product(gammas, temps, k_sets, cands):
        cell = {
            "gamma": int(gamma),
            "temperature": float(temp),
            "k": list(k_set),
            "candidates": int(c),
        }
        h = _config_hash(cell)
        if h in seen:
            continue
        seen.add(h)
        cell["config_hash"] = h
        cells.append(cell)
    return cells


def _cmd_sweep(args) -> int:
    grid_text = _read_at(args.grid)
    grid = json.loads(grid_text)
    cells = expand_grid(grid)

    os.makedirs(args.out_dir, exist_ok=True)
    vocab = default_vocabulary()
    index = load_index(args.index) if args.index else None
    if index is not None:
        vocab = index.vocab
    target = parse_model_descriptor(args.target, vocab=vocab)
    vocab = target.vocab
    context = _text_to_ids(args.context, vocab) if args.context else []

    def run_cell(cell: dict) -> dict:
        row = dict(cell)
        row["k"] = ",".join(str(k) for k in cell["k"])
        try:
            draft = parse_model_descriptor(args.draft, vocab=vocab)
            cell_index = index
            cfg = DecodeConfig(
                context=tuple(context),
                max_len=args.max_len,
                draft_len=cell["gamma"],
                num_candidates=cell["candidates"],
                sampler=SamplerConfig(temperature=cell["temperature"], top_p=args.top_p),
                k_values=tuple(cell["k"]),
                seed=args.seed,
            )
            method = "specmer" if cell["candidates"] > 1 else "speculative"
            if method == "specmer" and cell_index is None:
                raise DataError("sweep cell with candidates > 1 needs --index")
            results = [
                r
                for _, r in iter_library(
                    method, args.n, cfg, draft=draft, target=target, index=cell_index
                )
            ]
            stats = library_stats(results, target, index=cell_index)
            row.update(
                {
                    "mean_nll": stats.mean_nll,
                    "top20_nll": stats.top20_nll,
                    "top5_nll": stats.top5_nll,
                    "accept_ratio": stats.accept_ratio,
                    "accepted": stats.accepted,
                    "rejected": stats.rejected,
                    "mean_kmer_score": stats.mean_kmer_score,
                    "tokens_per_second": stats.tokens_per_second,
                    "n": stats.n,
                    "error": "",
                }
            )
        except Exception as exc:  # noqa: BLE001 - cell isolation
            row["error"] = f"{type(exc).__name__}: {exc}"
        return row

    workers = args.workers or int(os.environ.get("SPECMER_WORKERS", 0)) or (
        os.cpu_count() or 1
    )
    with ThreadPoolExecutor(max_workers=workers) as pool:
        rows = list(pool.map(run_cell, cells))

    rows.sort(key=lambda r: (r.get("mean_nll") is None, r.get("mean_nll", 0.0)))
    fields = [
        "gamma", "temperature", "k", "candidates", "mean_nll", "top20_nll",
        "top5_nll", "accept_ratio", "accepted", "rejected", "mean_kmer_score",
        "tokens_per_second", "n", "config_hash", "error",
    ]
    csv_path = os.path.join(args.out_dir, "sweep.csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    json_path = os.path.join(args.out_dir, "sweep.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(rows, fh, indent=1, sort_keys=True)
        fh.write("\n")
    _write_manifest(
        json_path,
        command="sweep",
        config={"grid": grid, "n": args.n, "max_len": args.max_len},
        seed=args.seed,
        inputs={"index": args.index} if args.index else {},
        outputs={"csv": csv_path, "json": json_path},
        timings={},
    )
    _emit({"cells": len(rows), "csv": csv_path, "json": json_path}, args.json)
    return EXIT_OK


# --- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="specmer", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build or inspect motif indices")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)
    p_build = index_sub.add_parser("build")
    p_build.add_argument("--msa", required=True)
    p_build.add_argument("--k", default="1,3,5")
    p_build.add_argument("--out", required=True)
    p_build.add_argument("--dedupe", action="store_true")
    p_build.add_argument("--json", action="store_true")
    p_build.set_defaults(func=_cmd_index_build)
    p_stats = index_sub.add_parser("stats")
    p_stats.add_argument("path")
    p_stats.add_argument("--json", action="store_true")
    p_stats.set_defaults(func=_cmd_index_stats)

    p_gen = sub.add_parser("generate", help="generate a sequence library")
    p_gen.add_argument("--draft")
    p_gen.add_argument("--target")
    p_gen.add_argument("--index")
    p_gen.add_argument("--context")
    p_gen.add_argument("--wild-type")
    p_gen.add_argument("--gamma", type=int)
    p_gen.add_argument("--candidates", type=int)
    p_gen.add_argument("--temp", type=float)
    p_gen.add_argument("--top-p", type=float)
    p_gen.add_argument("--k")
    p_gen.add_argument("--n", type=int)
    p_gen.add_argument("--max-len", type=int)
    p_gen.add_argument("--seed", type=int)
    p_gen.add_argument("--out")
    p_gen.add_argument("--trace")
    p_gen.add_argument("--method",
                       choices=["baseline", "speculative", "specmer"])
    p_gen.add_argument("--warp", choices=["both", "target-only"])
    p_gen.add_argument("--no-boundary-windows", action="store_true", default=None)
    p_gen.add_argument("--no-bonus-token", action="store_true", default=None)
    p_gen.add_argument("--config")
    p_gen.add_argument("--json", action="store_true")
    p_gen.set_defaults(func=_cmd_generate)

    p_an = sub.add_parser("analyze", help="score a generated library")
    p_an.add_argument("--seqs")
    p_an.add_argument("--trace")
    p_an.add_argument("--target", required=True)
    p_an.add_argument("--index")
    p_an.add_argument("--context")
    p_an.add_argument("--wild-type")
    p_an.add_argument("--out")
    p_an.add_argument("--json", action="store_true")
    p_an.set_defaults(func=_cmd_analyze)

    p_sp = sub.add_parser("speedup", help="evaluate the wall-time speedup models")
    p_sp.add_argument("--alpha", type=float, required=True)
    p_sp.add_argument("--gamma", type=int, required=True)
    p_sp.add_argument("--ce", type=float)
    p_sp.add_argument("--xi", type=float, default=1.0)
    p_sp.add_argument("--candidates", type=int, default=1)
    p_sp.add_argument("--mp", type=float)
    p_sp.add_argument("--mq", type=float)
    p_sp.add_argument("--mk", type=float, default=0.0)
    p_sp.add_argument("--mode", choices=["vanilla", "batch", "serial"])
    p_sp.add_argument("--json", action="store_true")
    p_sp.set_defaults(func=_cmd_speedup)

    p_ver = sub.add_parser("verify", help="statistical self-checks")
    ver_sub = p_ver.add_subparsers(dest="verify_command", required=True)
    p_vc = ver_sub.add_parser("coupling")
    p_vc.add_argument("--trials", type=int, default=1_000_000)
    p_vc.add_argument("--vocab-size", type=int, default=6)
    p_vc.add_argument("--pairs", type=int, default=10)
    p_vc.add_argument("--seed", type=int, default=0)
    p_vc.add_argument("--json", action="store_true")
    p_vc.set_defaults(func=_cmd_verify_coupling)
    p_vs = ver_sub.add_parser("sequence")
    p_vs.add_argument("--vocab-size", type=int, default=4)
    p_vs.add_argument("--len", type=int, default=4)
    p_vs.add_argument("--draft")
    p_vs.add_argument("--target")
    p_vs.add_argument("--samples", type=int, default=100_000)
    p_vs.add_argument("--gamma", type=int, default=4)
    p_vs.add_argument("--temp", type=float, default=1.0)
    p_vs.add_argument("--top-p", type=float, default=1.0)
    p_vs.add_argument("--seed", type=int, default=3)
    p_vs.add_argument("--json", action="store_true")
    p_vs.set_defaults(func=_cmd_verify_sequence)

    p_sw = sub.add_parser("sweep", help="run a hyperparameter grid")
    p_sw.add_argument("--grid", required=True,
                      help="JSON document or @file with gamma/temperature/k/candidates lists")
    p_sw.add_argument("--draft", required=True)
    p_sw.add_argument("--target", required=True)
    p_sw.add_argument("--index")
    p_sw.add_argument("--context")
    p_sw.add_argument("--n", type=int, default=20)
    p_sw.add_argument("--max-len", type=int, default=64)
    p_sw.add_argument("--top-p", type=float, default=0.95)
    p_sw.add_argument("--seed", type=int, default=0)
    p_sw.add_argument("--out-dir", required=True)
    p_sw.add_argument("--workers", type=int)
    p_sw.add_argument("--json", action="store_true")
    p_sw.set_defaults(func=_cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except RemoteError as exc:
        print(f"remote error: {exc}", file=sys.stderr)
        return EXIT_REMOTE
    except (DataError, SpecmerError, OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
