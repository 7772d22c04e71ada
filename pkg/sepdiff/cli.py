import argparse
import dataclasses
import sys
import time
from typing import List, Optional

import numpy as np
from tqdm import tqdm

from . import __version__
from .audio import AudioBuffer, WavFormat, read_wav, scan_dataset, write_wav
from .config import dump_config, load_config
from .diffusion import SamplerConfig, TRACE_HEADER, alpha_beta, make_schedule, refinement_scales, separate, trace_rows
from .dsp import ChunkPlan, chunk_count, design_butterworth_hp, magnitude_db, noise_power_gain
from .errors import InvalidArgumentError, SepDiffError
from .fileio import write_csv
from .metrics import (AblationGrid, evaluate_estimates, evaluate_model, parse_cutoff, report, run_ablation,
                      write_eval_csv)
from .model import PRESETS, ModelConfig, SeparationModel, load_model, parameter_count, preset, read_model_config
from .output import is_quiet, output, set_quiet
from .streams import SubStream, make_rng
from .synth import SynthSpec, synthesize
from .training import TrainingConfig, train


def print_config(title: str, config):
    output("config", f"{title}:\n{dump_config(config)}")


# --- shared argument groups --------------------------------------------------

def _common(parser: argparse.ArgumentParser):
    parser.add_argument("--quiet", action="store_true", help="Only print warnings and errors")


def _sampler_args(parser: argparse.ArgumentParser, seed: bool = True):
    group = parser.add_argument_group("sampling")
    group.add_argument("--sampler-config", help="YAML file with SamplerConfig keys")
    group.add_argument("--steps", type=int, help="Number of sampling steps T (default 50)")
    group.add_argument("--eta", type=float, help="Refinement noise scale (default 0.4; 0 is deterministic)")
    group.add_argument("--cutoff-hz", help="High-pass cutoff for refinement noise in Hz, or 'none' (default 5000)")
    if seed:
        group.add_argument("--seed", type=int, help="Run seed (default 0)")
    group.add_argument("--chunk-seconds", type=float, default=3.0, help="Chunk length in seconds")
    group.add_argument("--overlap", type=float, default=0.2, help="Chunk overlap fraction")
    group.add_argument("--workers", type=int, default=1, help="Chunks processed in parallel")


def sampler_config(args) -> SamplerConfig:
    cfg = load_config(SamplerConfig, args.sampler_config, steps=args.steps, eta=args.eta,
                      seed=getattr(args, "seed", None))
    if args.cutoff_hz is not None:
        cfg = dataclasses.replace(cfg, cutoff_hz=parse_cutoff(args.cutoff_hz))
    return cfg


def chunk_plan(args, config: ModelConfig) -> ChunkPlan:
    return ChunkPlan.from_seconds(args.chunk_seconds, config.sample_rate, args.overlap,
                                  multiple_of=config.total_downsampling)


def _model_config(args) -> ModelConfig:
    return load_config(ModelConfig, args.model_config, base=preset(args.preset))


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"Expected comma-separated integers, got '{text}'")


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InvalidArgumentError(f"Expected comma-separated numbers, got '{text}'")


# --- commands ------------------------------------------------------------------

def cmd_synth(args) -> int:
    spec = load_config(SynthSpec, args.spec, seed=args.seed, track_count=args.tracks,
                       test_track_count=args.test_tracks, duration_s=args.duration,
                       sample_rate=args.sample_rate)
    print_config("Synthesis", spec)
    synthesize(spec, args.out, workers=args.workers)
    return 0


def cmd_train(args) -> int:
    config = load_config(TrainingConfig, args.config, seed=args.seed, total_steps=args.total_steps,
                         batch_size=args.batch_size, learning_rate=args.learning_rate)
    items = scan_dataset(args.dataset)
    if args.init:
        model = load_model(args.init)
        output("info", f"Continuing from {args.init}")
    else:
        model = SeparationModel(_model_config(args), seed=config.seed)
    print_config("Model", model.config)
    print_config("Training", config)
    train(model, items, config, args.out)
    return 0


def cmd_separate(args) -> int:
    model = load_model(args.model)
    cfg = sampler_config(args)
    plan = chunk_plan(args, model.config)
    mixture = read_wav(args.input, channels=model.channel_count)
    if mixture.sample_rate != model.sample_rate:
        raise InvalidArgumentError(
            f"{args.input} is at {mixture.sample_rate} Hz but the model expects {model.sample_rate} Hz")
    cfg.validate_for(mixture.sample_rate)
    print_config("Sampler", cfg)
    output("info", f"{args.input}: {mixture.duration:.2f} s, {chunk_count(mixture.length, plan)} chunk(s) "
                   f"of {plan.chunk_len} samples")

    bar = tqdm(total=chunk_count(mixture.length, plan), desc="separate", unit="chunk", disable=is_quiet())
    started = time.perf_counter()
    estimate, traces = separate(mixture, model, cfg, plan, workers=args.workers,
                                on_chunk_done=lambda _: bar.update(1))
    elapsed = time.perf_counter() - started
    bar.close()

    write_wav(args.output, estimate, WavFormat(args.format))
    if args.trace:
        write_csv(args.trace, "trace", TRACE_HEADER, trace_rows(traces))
    output("summary", f"Wrote {args.output} in {elapsed:.2f} s "
                      f"(real-time factor {elapsed / mixture.duration:.3f})")
    return 0


@dataclasses.dataclass(frozen=True)
class EstimateSource:
    """Where `eval --estimates` reads references and estimates from."""
    dataset: str
    estimates: str
    tracks: int
    out: str


def cmd_eval(args) -> int:
    items = scan_dataset(args.dataset)
    if args.estimates:
        print_config("Evaluation", EstimateSource(dataset=args.dataset, estimates=args.estimates,
                                                  tracks=len(items), out=args.out))
        result = evaluate_estimates(items, args.estimates)
    else:
        model = load_model(args.model)
        cfg = sampler_config(args)
        print_config("Sampler", cfg)
        result = evaluate_model(items, model, cfg, chunk_plan(args, model.config), repeats=args.repeats,
                                workers=args.workers, estimates_out=args.write_estimates)
    write_eval_csv(args.out, result)
    report(result)
    return 0


def cmd_ablate(args) -> int:
    model = load_model(args.model)
    base = sampler_config(args)
    grid = AblationGrid(steps=tuple(_int_list(args.steps_grid)), etas=tuple(_float_list(args.eta_grid)),
                        cutoffs_hz=tuple(parse_cutoff(v) for v in args.cutoff_grid.split(",")))
    for cutoff in grid.cutoffs_hz:
        dataclasses.replace(base, cutoff_hz=cutoff).validate_for(model.sample_rate)
    items = scan_dataset(args.dataset)
    print_config("Ablation grid", grid)
    print_config("Base sampler", base)
    results = run_ablation(items, model, grid, base, chunk_plan(args, model.config), args.out,
                           repeats=args.repeats, workers=args.workers)
    output("summary", f"{len(results)} of {len(grid.cells())} cells evaluated; results in {args.out}")
    return 0


SCHEDULE_HEADER = ["t", "sigma", "alpha", "beta"]
FILTER_HEADER = ["b0", "b1", "b2", "a1", "a2"]


def cmd_schedule_dump(args) -> int:
    schedule = make_schedule(args.steps)
    header = SCHEDULE_HEADER + (["delta", "beta_prime"] if args.eta is not None else [])
    rows = []
    for t, sigma in enumerate(schedule.sigmas):
        alpha, beta = alpha_beta(sigma)
        row = [t, sigma, float(alpha), float(beta)]
        if args.eta is not None:
            # scales of the step that leaves sigma_t; t = 0 has none
            row += list(refinement_scales(args.eta, sigma, schedule.sigmas[t - 1])) if t else ["", ""]
        rows.append(row)
    write_csv(args.out, "schedule", header, rows)
    output("summary", f"Wrote {len(rows)} noise levels (T={args.steps}) to {args.out}")
    return 0


def cmd_dsp_design(args) -> int:
    filt = design_butterworth_hp(args.cutoff_hz, args.sample_rate, args.order)
    rows = [[s.b0, s.b1, s.b2, s.a1, s.a2] for s in filt.sections]
    write_csv(args.out, "filter", FILTER_HEADER, rows)
    output("info", f"noise power gain {noise_power_gain(filt):.9g}")
    if args.response:
        freqs = np.linspace(0.0, args.sample_rate / 2, args.points)
        write_csv(args.response, "response", ["frequency_hz", "magnitude_db"],
                  [[f, g] for f, g in zip(freqs, magnitude_db(filt, freqs))])
        output("info", f"Wrote {args.points}-point magnitude response to {args.response}")
    output("summary", f"Wrote {len(rows)} sections of the order-{filt.order} high-pass "
                      f"({args.cutoff_hz:g} Hz at {args.sample_rate} Hz) to {args.out}")
    return 0


def cmd_model_info(args) -> int:
    config = read_model_config(args.model) if args.model else _model_config(args)
    counts = parameter_count(config)
    print_config("Model", config)
    output("summary", f"{counts.total:,} parameters")
    output("info_detail", f"conditioner {counts.conditioner:,}\ngenerator {counts.generator:,}\n"
                          f"auxiliary heads {counts.heads:,}\nfrozen {counts.frozen:,}")
    return 0


def cmd_benchmark(args) -> int:
    if args.model:
        model = load_model(args.model)
    else:
        model = SeparationModel(_model_config(args), seed=args.seed or 0)
    cfg = sampler_config(args)
    plan = chunk_plan(args, model.config)
    rng = make_rng(cfg.seed, SubStream.SYNTHESIS)
    frames = int(round(args.seconds * model.sample_rate))
    mixture = AudioBuffer(0.1 * rng.standard_normal((model.channel_count, frames)), model.sample_rate)
    print_config("Sampler", cfg)

    times = []
    for _ in tqdm(range(args.repeats), desc="benchmark", unit="run", disable=is_quiet()):
        started = time.perf_counter()
        separate(mixture, model, cfg, plan, workers=args.workers)
        times.append(time.perf_counter() - started)
    mean, std = float(np.mean(times)), float(np.std(times))
    output("summary", f"{args.seconds:g} s of audio: {mean:.3f} ± {std:.3f} s per run over {args.repeats} run(s) "
                      f"(real-time factor {mean / mixture.duration:.3f})")
    return 0


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sepdiff", description="Conditioned diffusion vocal separation with filtered stochastic refinement")
    parser.add_argument("--version", action="version", version=f"sepdiff {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="Write a synthetic vocals/accompaniment dataset")
    _common(p)
    p.add_argument("--spec", help="YAML file with SynthSpec keys")
    p.add_argument("--out", required=True, help="Output directory")
    p.add_argument("--seed", type=int)
    p.add_argument("--tracks", type=int, help="Training track count")
    p.add_argument("--test-tracks", type=int, help="Test track count")
    p.add_argument("--duration", type=float, help="Track length in seconds")
    p.add_argument("--sample-rate", type=int)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="Train a model on <dataset>/<track>/{mixture,vocals}.wav")
    _common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="Model file (.npz)")
    p.add_argument("--config", help="YAML file with TrainingConfig keys")
    p.add_argument("--preset", default="toy", choices=sorted(PRESETS))
    p.add_argument("--model-config", help="YAML file overriding ModelConfig keys of the preset")
    p.add_argument("--init", help="Start from the weights of an existing model file")
    p.add_argument("--seed", type=int)
    p.add_argument("--total-steps", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--learning-rate", type=float)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("separate", help="Extract vocals from one mixture")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--format", default=WavFormat.FLOAT32.value, choices=[f.value for f in WavFormat])
    p.add_argument("--trace", help="Write per-step diagnostics CSV here")
    _sampler_args(p)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("eval", help="Score a model or precomputed estimates on a dataset")
    _common(p)
    p.add_argument("--dataset", required=True)
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--model")
    source.add_argument("--estimates", help="Directory of <track>/vocals.wav estimates")
    p.add_argument("--out", required=True, help="Results CSV")
    p.add_argument("--repeats", type=int, default=5, help="Evaluation repeats when eta > 0")
    p.add_argument("--write-estimates", help="Also write the separated vocals here")
    _sampler_args(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="Sweep steps x eta x cutoff and record median SDR per cell")
    _common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True, help="Results CSV; existing cells are skipped")
    p.add_argument("--steps-grid", default="20,50,100")
    p.add_argument("--eta-grid", default="0,0.2,0.4,0.8")
    p.add_argument("--cutoff-grid", default="none,600,2000,5000")
    p.add_argument("--repeats", type=int, default=5)
    _sampler_args(p)
    p.set_defaults(func=cmd_ablate)

    schedule = sub.add_parser("schedule", help="Noise schedule tools")
    schedule_sub = schedule.add_subparsers(dest="action", required=True)
    p = schedule_sub.add_parser("dump", help="Write t, sigma, alpha and beta for every noise level")
    _common(p)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--eta", type=float, help="Also write the refinement scales for this eta")
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_schedule_dump)

    dsp = sub.add_parser("dsp", help="Filter tools")
    dsp_sub = dsp.add_subparsers(dest="action", required=True)
    p = dsp_sub.add_parser("design", help="Design the refinement high-pass and write its biquad coefficients")
    _common(p)
    p.add_argument("--cutoff-hz", type=float, default=5000.0)
    p.add_argument("--rate", "--sample-rate", dest="sample_rate", type=int, default=44100)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--format", choices=["csv"], default="csv")
    p.add_argument("--out", required=True, help="Section coefficients b0, b1, b2, a1, a2")
    p.add_argument("--response", help="Also write the magnitude response here")
    p.add_argument("--points", type=int, default=512, help="Frequencies in the magnitude response")
    p.set_defaults(func=cmd_dsp_design)

    model = sub.add_parser("model", help="Model tools")
    model_sub = model.add_subparsers(dest="action", required=True)
    p = model_sub.add_parser("info", help="Print configuration and parameter counts")
    _common(p)
    p.add_argument("--model", help="Read the configuration from a model file")
    p.add_argument("--preset", default="toy", choices=sorted(PRESETS))
    p.add_argument("--model-config")
    p.set_defaults(func=cmd_model_info)

    p = sub.add_parser("benchmark", help="Time sampling of a fixed-length chunk")
    _common(p)
    p.add_argument("--model", help="Model file; a randomly initialised preset otherwise")
    p.add_argument("--preset", default="toy", choices=sorted(PRESETS))
    p.add_argument("--model-config")
    p.add_argument("--seconds", type=float, default=12.0)
    p.add_argument("--repeats", type=int, default=3)
    _sampler_args(p)
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    set_quiet(args.quiet)
    try:
        return args.func(args)
    except SepDiffError as e:
        output("error", str(e))
        return e.exit_code
    except KeyboardInterrupt:
        output("warning", "Interrupted")
        return 130
    except Exception as e:
        output("error", f"Unexpected {type(e).__name__}: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
