"""Command-line surface for the augmentation pipeline.

Exit codes: 0 success, 2 input or validation error, 3 language-model
endpoint failure. Data goes to files or stdout; logs go to stderr.
"""

from __future__ import annotations

import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from random import Random

import click

from . import audiodict, evaluate
from .alignment import load_ctm
from .augment import (
    AugmentConfig,
    AugmentMode,
    adab_record_bytes,
    augment_pairs,
)
from .candidates import HttpPredictor, MockPredictor
from .errors import AlignedAugError, ProtocolError, ServerUnreachable, Timeout
from .evaluate import ScoredExample, SigTestConfig, average_runs, wer_counts
from .features import (
    FbankConfig,
    extract_fbank,
    filter_corpus,
    load_manifest,
    load_utterance,
    save_manifest,
    write_features,
)
from .schedule import PRESETS, MixtureSchedule

EXIT_INPUT = 2
EXIT_DEPENDENCY = 3

# Published end-to-end training-time ratios (relative to the specaugment
# baseline) shown next to measured augmentation-only overhead for context.
REFERENCE_TIME_RATIOS = {
    "specaugment": 1.0,
    "lm-only": 2.0,
    "dict-only": 1.2,
    "ada-lm": 2.4,
    "ada-rt": 1.3,
}


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    """Map library errors to the exit-code contract."""
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ServerUnreachable, Timeout, ProtocolError) as exc:
            _fail(str(exc), EXIT_DEPENDENCY)
        except (AlignedAugError, OSError, ValueError) as exc:
            _fail(str(exc), EXIT_INPUT)

    return wrapper


def _load_config_file(path: str) -> dict[str, str]:
    out = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise click.UsageError(f"{path}:{line_no}: expected key=value")
        key, value = line.split("=", 1)
        out[key.strip().replace("-", "_")] = value.strip()
    return out


@click.group()
@click.version_option()
@click.option(
    "--config",
    "config_path",
    type=click.Path(exists=True, dir_okay=False),
    default=None,
    help="Flat key=value file providing defaults for any flag of any command.",
)
@click.pass_context
def main(ctx, config_path):
    """On-the-fly aligned data augmentation for speech recognition corpora."""
    if config_path:
        defaults = _load_config_file(config_path)
        ctx.default_map = {
            cmd: dict(defaults) for cmd in main.commands  # same flat defaults everywhere
        }


def _schedule_from_flags(schedule, p_aligned_sent, f_aligned_tok, p_dict_sent, f_dict_tok):
    if schedule != "custom":
        return PRESETS[schedule]
    missing = [
        name
        for name, v in (
            ("--p-aligned-sent", p_aligned_sent),
            ("--f-aligned-tok", f_aligned_tok),
            ("--p-dict-sent", p_dict_sent),
            ("--f-dict-tok", f_dict_tok),
        )
        if v is None
    ]
    if missing:
        raise click.UsageError(f"--schedule custom requires {', '.join(missing)}")
    return MixtureSchedule(p_aligned_sent, f_aligned_tok, p_dict_sent, f_dict_tok)


def _make_predictor(mode: AugmentMode, lm_mock: str | None, lm_endpoint: str | None, timeout: float):
    if mode not in (AugmentMode.ADA_LM, AugmentMode.LM_ONLY):
        return None
    if lm_mock:
        return MockPredictor.from_tsv(lm_mock)
    if lm_endpoint:
        return HttpPredictor(lm_endpoint, timeout=timeout)
    raise click.UsageError(f"mode {mode.value} needs --lm-mock or --lm-endpoint")


# ---------------------------------------------------------------------------
# build-dict / inspect-dict
# ---------------------------------------------------------------------------

def _echo_stats(st: audiodict.DictStats) -> None:
    click.echo(f"n_keys\t{st.n_keys}")
    click.echo(f"n_segments\t{st.n_segments}")
    click.echo(f"total_frames\t{st.total_frames}")
    for size in sorted(st.pool_histogram):
        click.echo(f"pool_size_{size}\t{st.pool_histogram[size]}")


@main.command("build-dict")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ctm", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--max-pool", type=int, default=None, help="Cap pool sizes by reservoir sampling.")
@click.option("--min-frames", type=int, default=1, help="Drop spans shorter than this.")
@click.option("--seed", type=int, default=0, help="Reservoir sampling seed.")
@_guard
def build_dict_cmd(manifest, ctm, out, max_pool, min_frames, seed):
    """Build the audio dictionary from a manifest plus CTM alignments."""
    corpus = load_manifest(manifest)
    alignments = load_ctm(ctm)
    opts = audiodict.BuildOptions(max_pool=max_pool, min_frames=min_frames, seed=seed)
    d = audiodict.build(corpus, alignments, opts)
    audiodict.save(d, out)
    _echo_stats(audiodict.stats(d))


@main.command("inspect-dict")
@click.option("--dict", "dict_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--figures", type=click.Path(file_okay=False), default=None,
              help="Directory to render the pool-size histogram into.")
@_guard
def inspect_dict_cmd(dict_path, figures):
    """Print stats of a saved dictionary."""
    d = audiodict.load(dict_path)
    st = audiodict.stats(d)
    _echo_stats(st)
    if figures:
        from . import report

        fig_dir = Path(figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        out = report.save_pool_histogram(st, fig_dir / "pool_sizes.png")
        click.echo(f"wrote {out}", err=True)


# ---------------------------------------------------------------------------
# augment
# ---------------------------------------------------------------------------

_WORKER_STATE: dict = {}


def _worker_init(dict_path, ctm_path, cfg, epoch, predictor_spec):
    d = audiodict.load(dict_path) if dict_path else None
    alignments = {a.utt_id: a for a in load_ctm(ctm_path)} if ctm_path else {}
    if predictor_spec is None:
        predictor = None
    elif predictor_spec[0] == "mock":
        predictor = MockPredictor.from_tsv(predictor_spec[1])
    else:
        predictor = HttpPredictor(predictor_spec[1], timeout=predictor_spec[2])
    _WORKER_STATE.update(
        d=d, alignments=alignments, cfg=cfg, epoch=epoch, predictor=predictor
    )


def _worker_task(entry_tuple):
    from .features import ManifestEntry

    utt_id, feat_path, transcript = entry_tuple
    entry = ManifestEntry(utt_id, Path(feat_path), tuple(transcript))
    u = load_utterance(entry)
    a = _WORKER_STATE["alignments"].get(utt_id)
    out, trace = next(
        iter(
            augment_pairs(
                [(u, a)],
                _WORKER_STATE["d"],
                _WORKER_STATE["predictor"],
                _WORKER_STATE["cfg"],
                _WORKER_STATE["epoch"],
            )
        )
    )
    return adab_record_bytes(out), trace.to_json()


def _iter_augmented(corpus, ctm_path, dict_path, cfg, epoch, predictor_spec, workers):
    """Yield (adab_bytes, trace_json) in manifest order.

    The single-worker path runs inline; a pool maps the same pure
    per-utterance function, so outputs are byte-identical either way.
    """
    tasks = [(e.utt_id, str(e.feature_path), e.transcript) for e in corpus.entries]
    if workers <= 1:
        _worker_init(dict_path, ctm_path, cfg, epoch, predictor_spec)
        for t in tasks:
            yield _worker_task(t)
        return
    with ProcessPoolExecutor(
        max_workers=workers,
        initializer=_worker_init,
        initargs=(dict_path, ctm_path, cfg, epoch, predictor_spec),
    ) as pool:
        chunk = max(1, len(tasks) // (workers * 4))
        yield from pool.map(_worker_task, tasks, chunksize=chunk)


def _mode_option(required=True):
    return click.option(
        "--mode",
        type=click.Choice([m.value for m in AugmentMode]),
        required=required,
        default=None if required else "ada-rt",
    )


@main.command("augment")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ctm", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dict", "dict_path", type=click.Path(exists=True, dir_okay=False), default=None)
@_mode_option()
@click.option("--schedule", type=click.Choice(["libri100", "libri960", "custom"]), default="libri100")
@click.option("--p-aligned-sent", type=float, default=None)
@click.option("--f-aligned-tok", type=float, default=None)
@click.option("--p-dict-sent", type=float, default=None)
@click.option("--f-dict-tok", type=float, default=None)
@click.option("--seed", type=int, default=0)
@click.option("--epoch", type=int, default=0)
@click.option("--out-dir", type=click.Path(file_okay=False), default=None)
@click.option("--stream", is_flag=True, help="Emit ADAB records on stdout instead of files.")
@click.option("--lm-endpoint", envvar="ADA_LM_ENDPOINT", default=None,
              help="Masked-LM server base URL (env ADA_LM_ENDPOINT).")
@click.option("--lm-mock", type=click.Path(exists=True, dir_okay=False), default=None,
              help="TSV candidate table standing in for the LM server.")
@click.option("--lm-timeout", type=float, default=30.0)
@click.option("--lm-top-k", type=int, default=5)
@click.option("--lm-temperature", type=float, default=1.0)
@click.option("--lm-argmax", is_flag=True, help="Always take the top candidate.")
@click.option("--lm-retry", is_flag=True,
              help="Try lower-ranked candidates before masking out-of-dictionary picks.")
@click.option("--no-exclude-original", is_flag=True,
              help="Allow dictionary sampling to return the span being replaced.")
@click.option("--freq-mask-param", type=int, default=30)
@click.option("--n-freq-masks", type=int, default=2)
@click.option("--time-mask-param", type=int, default=40)
@click.option("--n-time-masks", type=int, default=2)
@click.option("--mask-value", type=float, default=0.0)
@click.option("--max-frames", type=int, default=3000)
@click.option("--trace", "trace_path", type=click.Path(dir_okay=False), default=None)
@click.option("--workers", type=int, default=1)
@_guard
def augment_cmd(
    manifest, ctm, dict_path, mode, schedule,
    p_aligned_sent, f_aligned_tok, p_dict_sent, f_dict_tok,
    seed, epoch, out_dir, stream, lm_endpoint, lm_mock, lm_timeout,
    lm_top_k, lm_temperature, lm_argmax, lm_retry, no_exclude_original,
    freq_mask_param, n_freq_masks, time_mask_param, n_time_masks, mask_value,
    max_frames, trace_path, workers,
):
    """Augment a corpus; one output record per manifest entry."""
    if bool(out_dir) == bool(stream):
        raise click.UsageError("choose exactly one of --out-dir or --stream")
    mode = AugmentMode(mode)
    if mode in (AugmentMode.ADA_RT, AugmentMode.DICT_ONLY, AugmentMode.ADA_LM) and not dict_path:
        raise click.UsageError(f"mode {mode.value} requires --dict")
    sched = _schedule_from_flags(schedule, p_aligned_sent, f_aligned_tok, p_dict_sent, f_dict_tok)
    _make_predictor(mode, lm_mock, lm_endpoint, lm_timeout)  # validate flags up front
    predictor_spec = None
    if mode in (AugmentMode.ADA_LM, AugmentMode.LM_ONLY):
        predictor_spec = ("mock", lm_mock) if lm_mock else ("http", lm_endpoint, lm_timeout)

    cfg = AugmentConfig(
        mode=mode,
        freq_mask_param=freq_mask_param,
        n_freq_masks=n_freq_masks,
        time_mask_param=time_mask_param,
        n_time_masks=n_time_masks,
        mask_value=mask_value,
        schedule=sched,
        lm_top_k=lm_top_k,
        lm_temperature=lm_temperature,
        lm_argmax=lm_argmax,
        lm_retry=lm_retry,
        exclude_original=not no_exclude_original,
        max_frames=max_frames,
        base_seed=seed,
    )
    corpus = load_manifest(manifest)

    trace_fh = None
    if out_dir:
        out_path = Path(out_dir)
        out_path.mkdir(parents=True, exist_ok=True)
        if trace_path is None:
            trace_path = str(out_path / "trace.jsonl")
    if trace_path:
        trace_fh = open(trace_path, "w", encoding="utf-8")

    n = 0
    try:
        if stream:
            sink = sys.stdout.buffer
            for record, trace_line in _iter_augmented(
                corpus, ctm, dict_path, cfg, epoch, predictor_spec, workers
            ):
                sink.write(record)
                if trace_fh:
                    trace_fh.write(trace_line + "\n")
                n += 1
            sink.flush()
        else:
            import io

            from .augment import read_adab_records
            from .features import CorpusManifest, ManifestEntry

            entries = []
            for record, trace_line in _iter_augmented(
                corpus, ctm, dict_path, cfg, epoch, predictor_spec, workers
            ):
                u = next(read_adab_records(io.BytesIO(record)))
                feat_name = f"{u.utt_id}.adaf"
                write_features(u.features, out_path / feat_name)
                entries.append(ManifestEntry(u.utt_id, Path(feat_name), u.transcript))
                if trace_fh:
                    trace_fh.write(trace_line + "\n")
                n += 1
            save_manifest(CorpusManifest(tuple(entries)), out_path / "manifest.tsv")
    finally:
        if trace_fh:
            trace_fh.close()
    click.echo(f"augmented {n} utterances", err=True)


# ---------------------------------------------------------------------------
# bench
# ---------------------------------------------------------------------------

@main.command("bench")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--ctm", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--dict", "dict_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--mode", "modes", type=click.Choice([m.value for m in AugmentMode]),
              multiple=True, default=tuple(m.value for m in AugmentMode),
              help="Mode(s) to time; specaugment is always included as the baseline.")
@click.option("--repeat", type=int, default=3)
@click.option("--seed", type=int, default=0)
@click.option("--lm-mock", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--lm-endpoint", envvar="ADA_LM_ENDPOINT", default=None)
@click.option("--lm-timeout", type=float, default=30.0)
@click.option("--figures", type=click.Path(file_okay=False), default=None)
@_guard
def bench_cmd(manifest, ctm, dict_path, modes, repeat, seed, lm_mock, lm_endpoint, lm_timeout, figures):
    """Time augmentation overhead per mode, normalized to specaugment.

    The reference_end_to_end column repeats published whole-training-run
    ratios for context; measured numbers cover augmentation only and are not
    directly comparable.
    """
    corpus = load_manifest(manifest)
    if not corpus.entries:
        raise click.UsageError("empty manifest")
    alignments = {a.utt_id: a for a in load_ctm(ctm)}
    d = audiodict.load(dict_path)
    pairs = [(load_utterance(e), alignments.get(e.utt_id)) for e in corpus.entries]

    wanted = ["specaugment"] + [m for m in modes if m != "specaugment"]
    results = []
    for mode_name in wanted:
        mode = AugmentMode(mode_name)
        predictor = _make_predictor(mode, lm_mock, lm_endpoint, lm_timeout)
        cfg = AugmentConfig(mode=mode, base_seed=seed)
        samples = []
        for r in range(repeat):
            t0 = time.perf_counter()
            for _ in augment_pairs(pairs, d, predictor, cfg, epoch=r):
                pass
            samples.append((time.perf_counter() - t0) / len(pairs))
        results.append((mode_name, samples))

    base_mean = sum(results[0][1]) / len(results[0][1])
    click.echo("mode\trepeats\tmean_s_per_utt\tratio_vs_specaugment\treference_end_to_end\tsamples_s")
    means, ratios, names = [], [], []
    for mode_name, samples in results:
        mean = sum(samples) / len(samples)
        ratio = mean / base_mean
        ref = REFERENCE_TIME_RATIOS.get(mode_name, "")
        sample_txt = ",".join(format(s, ".6g") for s in samples)
        click.echo(f"{mode_name}\t{len(samples)}\t{mean:.6g}\t{ratio:.4f}\t{ref}\t{sample_txt}")
        names.append(mode_name)
        means.append(mean)
        ratios.append(ratio)
    if figures:
        from . import report

        fig_dir = Path(figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        out = report.save_bench_chart(names, means, ratios, fig_dir / "bench.png")
        click.echo(f"wrote {out}", err=True)


# ---------------------------------------------------------------------------
# wer / sigtest
# ---------------------------------------------------------------------------

@main.command("wer")
@click.option("--ref", "ref_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--hyp", "hyp_paths", required=True, multiple=True,
              type=click.Path(exists=True, dir_okay=False),
              help="Hypothesis TSV; repeat for multiple runs of one system.")
@click.option("--scores", "scores_path", type=click.Path(dir_okay=False), default=None,
              help="Write per-utterance scores (input format of sigtest).")
@click.option("--figures", type=click.Path(file_okay=False), default=None)
@_guard
def wer_cmd(ref_path, hyp_paths, scores_path, figures):
    """Micro word error rate of one or more runs against a reference."""
    refs = evaluate.load_trans_tsv(ref_path)
    runs = [evaluate.load_trans_tsv(p) for p in hyp_paths]
    for p, hyp in zip(hyp_paths, runs):
        if set(hyp) != set(refs):
            raise click.UsageError(f"{p}: utterance ids differ from the reference")

    per_utt: dict[str, list[float]] = {utt: [] for utt in refs}
    click.echo("run\terrors\tref_tokens\twer")
    for run_idx, hyp in enumerate(runs, 1):
        total_err = 0
        total_ref = 0
        for utt, ref_tokens in refs.items():
            s, d, i, ref_len = wer_counts(ref_tokens, hyp[utt])
            per_utt[utt].append(float(s + d + i))
            total_err += s + d + i
            total_ref += ref_len
        click.echo(f"{run_idx}\t{total_err}\t{total_ref}\t{total_err / total_ref:.6f}")

    if scores_path:
        examples = [
            ScoredExample(utt, len(refs[utt]), tuple(errs)) for utt, errs in per_utt.items()
        ]
        evaluate.save_scores(examples, scores_path)
    if figures:
        from . import report

        fig_dir = Path(figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        wers = [
            sum(errs) / len(errs) / len(refs[utt])
            for utt, errs in per_utt.items()
            if refs[utt]
        ]
        out = report.save_wer_histogram(wers, fig_dir / "wer_per_utt.png")
        click.echo(f"wrote {out}", err=True)


@main.command("sigtest")
@click.option("--scores-a", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--scores-b", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--shuffles", type=int, default=1000)
@click.option("--swap-prob", type=float, default=0.5)
@click.option("--alpha", type=float, default=0.01)
@click.option("--comparisons", type=int, default=1,
              help="Number of pairwise comparisons for the Bonferroni correction.")
@click.option("--seed", type=int, default=0)
@click.option("--figures", type=click.Path(file_okay=False), default=None)
@_guard
def sigtest_cmd(scores_a, scores_b, shuffles, swap_prob, alpha, comparisons, seed, figures):
    """Approximate randomization test between two systems' score files."""
    ex_a = {e.utt_id: e for e in evaluate.load_scores(scores_a)}
    ex_b = {e.utt_id: e for e in evaluate.load_scores(scores_b)}
    if set(ex_a) != set(ex_b):
        raise click.UsageError("score files cover different utterance ids")
    utts = list(ex_a)
    a = [average_runs(ex_a[u]) for u in utts]
    b = [average_runs(ex_b[u]) for u in utts]
    ref_lens = []
    for u in utts:
        if ex_a[u].ref_len != ex_b[u].ref_len:
            raise click.UsageError(f"{u}: reference lengths differ between systems")
        ref_lens.append(ex_a[u].ref_len)

    cfg = SigTestConfig(n_shuffles=shuffles, swap_probability=swap_prob,
                        alpha=alpha, n_comparisons=comparisons)
    denom = float(sum(ref_lens))
    observed = abs(sum(a) - sum(b)) / denom
    rng = Random(seed)
    p = evaluate.randomization_test(a, b, ref_lens, cfg, rng)
    exact = len(utts) <= 30 and 2 ** len(utts) <= shuffles
    corrected = evaluate.bonferroni(alpha, comparisons)

    click.echo("n_examples\twer_a\twer_b\tstatistic\tp_value\tmethod\talpha\tcomparisons\talpha_corrected\tsignificant")
    click.echo(
        f"{len(utts)}\t{sum(a) / denom:.6f}\t{sum(b) / denom:.6f}\t{observed:.6f}"
        f"\t{p:.6g}\t{'exact' if exact else 'monte-carlo'}\t{alpha}\t{comparisons}"
        f"\t{corrected:.6g}\t{'yes' if p < corrected else 'no'}"
    )
    if figures:
        from . import report
        from .evaluate import _null_statistics

        fig_dir = Path(figures)
        fig_dir.mkdir(parents=True, exist_ok=True)
        _, stats = _null_statistics(a, b, denom, cfg, Random(seed))
        out = report.save_null_histogram(stats, observed, fig_dir / "null_distribution.png")
        click.echo(f"wrote {out}", err=True)


# ---------------------------------------------------------------------------
# extract-fbank / filter-corpus
# ---------------------------------------------------------------------------

@main.command("extract-fbank")
@click.option("--in", "in_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="16 kHz mono 16-bit PCM: .wav container or headerless raw.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False))
@click.option("--n-mels", type=int, default=80)
@click.option("--window-ms", type=float, default=25.0)
@click.option("--hop-ms", type=float, default=10.0)
@click.option("--fft-size", type=int, default=512)
@click.option("--fmin", type=float, default=20.0)
@click.option("--fmax", type=float, default=7600.0)
@click.option("--preemphasis", type=float, default=0.97)
@click.option("--energy-floor", type=float, default=1e-10)
@_guard
def extract_fbank_cmd(in_path, out_path, n_mels, window_ms, hop_ms, fft_size,
                      fmin, fmax, preemphasis, energy_floor):
    """Extract log-mel features from PCM audio into an ADAF file."""
    import numpy as np

    from .errors import BadSampleRate

    samples, rate = _read_pcm(in_path)
    if rate != 16000:
        raise BadSampleRate(f"{in_path}: {rate} Hz, expected 16000")
    cfg = FbankConfig(
        n_mels=n_mels, window_ms=window_ms, hop_ms=hop_ms, fft_size=fft_size,
        fmin=fmin, fmax=fmax, preemphasis=preemphasis, energy_floor=energy_floor,
    )
    m = extract_fbank(np.asarray(samples, dtype=np.float64), cfg)
    write_features(m, out_path)
    click.echo(f"{m.n_frames}\t{m.n_dims}")


def _read_pcm(path: str) -> tuple["object", int]:
    """Read .wav (PCM only, via the stdlib) or headerless s16le raw audio."""
    import numpy as np

    p = Path(path)
    if p.suffix.lower() == ".wav":
        import wave

        with wave.open(str(p), "rb") as wf:
            if wf.getnchannels() != 1:
                raise click.UsageError(f"{path}: expected mono audio")
            if wf.getsampwidth() != 2:
                raise click.UsageError(f"{path}: expected 16-bit samples")
            rate = wf.getframerate()
            raw = wf.readframes(wf.getnframes())
        return np.frombuffer(raw, dtype="<i2").astype(np.float64), rate
    raw = p.read_bytes()
    return np.frombuffer(raw, dtype="<i2").astype(np.float64), 16000


@main.command("filter-corpus")
@click.option("--manifest", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Filtered manifest path; defaults to stdout.")
@click.option("--max-frames", type=int, default=3000)
@click.option("--max-units", type=int, default=80)
@_guard
def filter_corpus_cmd(manifest, out_path, max_frames, max_units):
    """Drop over-long entries (more than --max-frames or --max-units)."""
    corpus = load_manifest(manifest)
    kept = filter_corpus(corpus, max_frames=max_frames, max_units=max_units)
    if out_path:
        save_manifest(kept, out_path)
        click.echo(f"kept\t{len(kept)}")
        click.echo(f"removed\t{len(corpus) - len(kept)}")
    else:
        for e in kept.entries:
            click.echo(f"{e.utt_id}\t{e.feature_path}\t{' '.join(e.transcript)}")
        click.echo(f"kept {len(kept)}, removed {len(corpus) - len(kept)}", err=True)


if __name__ == "__main__":
    main()
