"""Command-line interface: calibrate, run, synth, eval, compare.

Exit codes: 0 success, 1 input or format error (including usage errors),
2 domain failure such as a failed calibration. Alerts are data, never
failures: cmd_run exits 0 however many warnings fired. Every file argument
accepts "-" for standard input/output. Output files are written atomically
(temp file + rename), so a failing run leaves no partial outputs behind.

Data outputs (stdout and files) are byte-reproducible given identical
inputs, flags, and seed; diagnostics on stderr may include timing and are
not. Profile creation stamps honor SOURCE_DATE_EPOCH.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile
from contextlib import contextmanager
from dataclasses import dataclass, replace

from . import io as dio
from .calibration import (
    CalibrationConfig,
    CalibrationProfile,
    calibrate,
    generalized_profile,
)
from .errors import CalibrationError, ConfigError, DrowsyError
from .eval import (
    CHANNELS,
    aggregate,
    compare,
    evaluate_channel,
    population_doc,
    render_population,
    render_report,
    report_doc,
)
from .metrics import samples_from_frames
from .pipeline import ClassifierSource, PipelineConfig, run_session
from .synth import iter_session


@dataclass(frozen=True, slots=True)
class GlobalConfig:
    """Every tunable with its default; each field has a matching flag."""

    buffer_capacity: int = 15
    ear_factor: float = 0.75
    mar_factor: float = 1.40
    head_factor: float = 1.25
    sustain_eyes_s: float = 1.0
    sustain_mouth_s: float = 1.5
    sustain_head_s: float = 2.0
    sustain_presence_s: float = 3.0
    sustain_perclos_s: float = 0.0
    rearm_frames: int = 15
    perclos_window_s: float = 30.0
    perclos_limit: float = 20.0
    generalized_ear: float = 0.21
    generalized_mar: float = 0.60
    generalized_head: float = 0.80
    calibration_duration_s: float = 5.0
    min_samples: int = 30
    seed: int = 0

    def __post_init__(self):
        # converting validates every duration/count/factor invariant
        self.pipeline_config()
        self.calibration_config()
        self.generalized()

    def pipeline_config(self) -> PipelineConfig:
        return PipelineConfig(
            buffer_capacity=self.buffer_capacity,
            sustain_eyes_s=self.sustain_eyes_s,
            sustain_mouth_s=self.sustain_mouth_s,
            sustain_head_s=self.sustain_head_s,
            sustain_presence_s=self.sustain_presence_s,
            sustain_perclos_s=self.sustain_perclos_s,
            rearm_frames=self.rearm_frames,
            perclos_window_s=self.perclos_window_s,
            perclos_limit=self.perclos_limit,
        )

    def calibration_config(self) -> CalibrationConfig:
        return CalibrationConfig(
            duration_s=self.calibration_duration_s,
            min_samples=self.min_samples,
            ear_factor=self.ear_factor,
            mar_factor=self.mar_factor,
            head_factor=self.head_factor,
        )

    def generalized(self) -> CalibrationProfile:
        return generalized_profile(
            ear_threshold=self.generalized_ear,
            mar_threshold=self.generalized_mar,
            head_drop_limit=self.generalized_head,
        )


_DEFAULTS = GlobalConfig()

_PIPELINE_FLAGS = (
    ("--buffer-capacity", "buffer_capacity", int, "smoothing buffer length in frames"),
    ("--sustain-eyes", "sustain_eyes_s", float, "seconds eyes must stay closed before alerting"),
    ("--sustain-mouth", "sustain_mouth_s", float, "seconds a yawn must last before alerting"),
    ("--sustain-head", "sustain_head_s", float, "seconds of head-down before alerting"),
    ("--sustain-presence", "sustain_presence_s", float, "seconds without a face before alerting"),
    ("--sustain-perclos", "sustain_perclos_s", float, "seconds over the PERCLOS limit before alerting"),
    ("--rearm-frames", "rearm_frames", int, "condition-free frames before a channel re-arms"),
    ("--perclos-window", "perclos_window_s", float, "PERCLOS rolling window in seconds"),
    ("--perclos-limit", "perclos_limit", float, "PERCLOS alarm threshold in percent"),
)

_FACTOR_FLAGS = (
    ("--ear-factor", "ear_factor", float, "eye threshold as a fraction of baseline EAR"),
    ("--mar-factor", "mar_factor", float, "mouth threshold as a multiple of baseline MAR"),
    ("--head-factor", "head_factor", float, "head limit as a multiple of baseline head drop"),
)

_GENERALIZED_FLAGS = (
    ("--gen-ear", "generalized_ear", float, "generalized EAR threshold"),
    ("--gen-mar", "generalized_mar", float, "generalized MAR threshold"),
    ("--gen-head", "generalized_head", float, "generalized head-drop limit"),
)


class _Parser(argparse.ArgumentParser):
    # usage problems are input errors (exit 1); 2 is reserved for domain failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _add_flags(parser: argparse.ArgumentParser, specs) -> None:
    for flag, field_name, typ, help_text in specs:
        parser.add_argument(
            flag,
            dest=field_name,
            type=typ,
            default=getattr(_DEFAULTS, field_name),
            help=f"{help_text} (default {getattr(_DEFAULTS, field_name)})",
        )


def _config_from(args: argparse.Namespace) -> GlobalConfig:
    values = {
        name: getattr(args, name)
        for name in GlobalConfig.__dataclass_fields__
        if hasattr(args, name)
    }
    return replace(_DEFAULTS, **values)


@contextmanager
def _open_in(path: str):
    if path == "-":
        yield sys.stdin
    else:
        with open(path, "r", encoding="utf-8") as fp:
            yield fp


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".drowsy-", suffix=".part")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fp:
            yield fp
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    os.replace(tmp, path)


# --- subcommands ---------------------------------------------------------------

def cmd_calibrate(args: argparse.Namespace) -> int:
    config = _config_from(args).calibration_config()
    with _open_in(args.input) as src:
        samples = list(samples_from_frames(dio.read_frames(src)))
    profile = calibrate(samples, config)
    with _open_out(args.out) as sink:
        dio.write_profile(sink, profile)
    print(
        f"calibrated over {profile.frames_used} frames covering {profile.duration_s:.3f} s\n"
        f"baseline:  ear={profile.baseline_ear:.6f} mar={profile.baseline_mar:.6f} "
        f"head_drop={profile.baseline_head_drop:.6f}\n"
        f"threshold: ear={profile.ear_threshold:.6f} mar={profile.mar_threshold:.6f} "
        f"head_drop={profile.head_drop_limit:.6f}",
        file=sys.stderr,
    )
    return 0


def cmd_run(args: argparse.Namespace) -> int:
    config = _config_from(args).pipeline_config()
    with _open_in(args.profile) as src:
        profile = dio.read_profile(src)
    classifier = None
    if args.external:
        with _open_in(args.external) as src:
            classifier = ClassifierSource.external(dio.load_external_states(src))

    with _open_in(args.input) as frames_in, _open_out(args.out) as events_out:
        def on_event(event):
            dio.write_events(events_out, [event])
            if args.bell:
                sys.stderr.write("\a")
                sys.stderr.flush()

        if args.records:
            with _open_out(args.records) as records_out:
                result = run_session(
                    dio.read_frames(frames_in),
                    profile,
                    config,
                    classifier,
                    on_event=on_event,
                    on_record=lambda rec: dio.write_records(records_out, [rec]),
                    collect=False,
                )
        else:
            result = run_session(
                dio.read_frames(frames_in),
                profile,
                config,
                classifier,
                on_event=on_event,
                collect=False,
            )

    s = result.summary
    alerts = " ".join(f"{kind}={count}" for kind, count in sorted(s.alerts.items()))
    final = "n/a" if s.final_perclos is None else f"{s.final_perclos:.2f}%"
    print(
        f"frames={s.frames} faceless={s.faceless_frames} {alerts} "
        f"final_perclos={final} throughput={s.throughput_fps:.0f} fps",
        file=sys.stderr,
    )
    return 0


def cmd_synth(args: argparse.Namespace) -> int:
    with _open_in(args.script) as src:
        script = dio.read_script(src)
    if args.seed is not None:
        script = replace(script, seed=args.seed)
    with _open_out(args.out) as frames_out, _open_out(args.labels) as labels_out:
        n = 0
        for frame, label in iter_session(script):
            dio.write_frames(frames_out, [frame])
            dio.write_labels(labels_out, [label])
            n += 1
    print(f"generated {n} frames at {script.fps:g} fps (seed {script.seed})", file=sys.stderr)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    with _open_in(args.pred) as src:
        predictions = list(dio.read_states(src))
    with _open_in(args.labels) as src:
        labels = list(dio.read_states(src))
    result = evaluate_channel(predictions, labels, args.channel)
    m = result.matrix
    rp = "n/a" if result.recall_positive is None else f"{result.recall_positive:.2f}%"
    rn = "n/a" if result.recall_negative is None else f"{result.recall_negative:.2f}%"
    print(
        f"channel: {args.channel}\n"
        f"frames evaluated: {m.total} (excluded {result.excluded})\n"
        f"accuracy: {result.accuracy:.2f}%\n"
        f"confusion: tp={m.tp} tn={m.tn} fp={m.fp} fn={m.fn}\n"
        f"recall positive: {rp}\n"
        f"recall negative: {rn}"
    )
    if args.json:
        doc = {
            "format_version": 1,
            "channel": args.channel,
            "accuracy": result.accuracy,
            "matrix": {"tp": m.tp, "tn": m.tn, "fp": m.fp, "fn": m.fn},
            "recall_positive": result.recall_positive,
            "recall_negative": result.recall_negative,
            "excluded": result.excluded,
        }
        with _open_out(args.json) as sink:
            sink.write(json.dumps(doc, sort_keys=True, indent=2))
            sink.write("\n")
    return 0


def _compare_one(frames_path, labels_path, profile, external_path, gconfig):
    with open(frames_path, "r", encoding="utf-8") as src:
        frames = list(dio.read_frames(src))
    with open(labels_path, "r", encoding="utf-8") as src:
        labels = list(dio.read_states(src))
    external = None
    if external_path:
        with open(external_path, "r", encoding="utf-8") as src:
            external = dio.load_external_states(src)
    if profile is None:
        cutoff = gconfig.calibration_duration_s
        head = [f for f in frames if f.t <= cutoff]
        profile = calibrate(samples_from_frames(head), gconfig.calibration_config())
    return compare(
        frames,
        labels,
        personalized=profile,
        generalized=gconfig.generalized(),
        external_states=external,
        config=gconfig.pipeline_config(),
    )


def cmd_compare(args: argparse.Namespace) -> int:
    gconfig = _config_from(args)
    if os.path.isdir(args.input):
        suffix = ".frames.jsonl"
        stems = sorted(
            name[: -len(suffix)]
            for name in os.listdir(args.input)
            if name.endswith(suffix)
        )
        if not stems:
            raise ConfigError(f"no *{suffix} files under {args.input}")
        reports = []
        for stem in stems:
            base = os.path.join(args.input, stem)
            profile = None
            if os.path.exists(base + ".profile.json"):
                with open(base + ".profile.json", "r", encoding="utf-8") as src:
                    profile = dio.read_profile(src)
            external = base + ".external.jsonl"
            reports.append(
                _compare_one(
                    base + suffix,
                    base + ".labels.jsonl",
                    profile,
                    external if os.path.exists(external) else None,
                    gconfig,
                )
            )
        agg = aggregate(reports)
        sys.stdout.write(render_population(agg))
        doc = population_doc(agg)
    else:
        if not args.labels or not args.profile:
            raise ConfigError("single-stream compare requires --labels and --profile")
        with _open_in(args.profile) as src:
            profile = dio.read_profile(src)
        report = _compare_one(args.input, args.labels, profile, args.external, gconfig)
        sys.stdout.write(render_report(report))
        doc = report_doc(report)
    if args.json:
        with _open_out(args.json) as sink:
            sink.write(json.dumps(doc, sort_keys=True, indent=2))
            sink.write("\n")
    return 0


# --- parser wiring ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="drowsy", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")

    p = sub.add_parser("calibrate", help="derive a personalized profile from a neutral recording")
    p.add_argument("--input", required=True, help="landmark frame stream (JSONL, or -)")
    p.add_argument("--out", default="-", help="profile destination (default stdout)")
    p.add_argument(
        "--duration",
        dest="calibration_duration_s",
        type=float,
        default=_DEFAULTS.calibration_duration_s,
        help=f"required recording coverage in seconds (default {_DEFAULTS.calibration_duration_s})",
    )
    p.add_argument(
        "--min-samples",
        dest="min_samples",
        type=int,
        default=_DEFAULTS.min_samples,
        help=f"minimum face-present frames (default {_DEFAULTS.min_samples})",
    )
    _add_flags(p, _FACTOR_FLAGS)
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("run", help="stream frames through the monitoring pipeline")
    p.add_argument("--input", required=True, help="landmark frame stream (JSONL, or -)")
    p.add_argument("--profile", required=True, help="calibration profile (JSON, or -)")
    p.add_argument("--external", help="external per-frame classifier states (JSONL)")
    p.add_argument("--out", default="-", help="alert event log destination (default stdout)")
    p.add_argument("--records", help="per-frame record log destination")
    p.add_argument("--bell", action="store_true", help="ring the terminal bell on each alert")
    _add_flags(p, _PIPELINE_FLAGS)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", help="generate a labeled synthetic session from a script")
    p.add_argument("--script", required=True, help="session script (JSON, or -)")
    p.add_argument("--out", required=True, help="frame stream destination")
    p.add_argument("--labels", required=True, help="ground-truth label destination")
    p.add_argument("--seed", type=int, default=None, help="override the script seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("eval", help="score per-frame predictions against labels")
    p.add_argument("--pred", required=True, help="prediction stream (records or labels JSONL)")
    p.add_argument("--labels", required=True, help="ground-truth labels (JSONL)")
    p.add_argument("--channel", required=True, choices=CHANNELS)
    p.add_argument("--json", help="also write the report as JSON to this path")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser(
        "compare",
        help="generalized vs personalized (vs external) over one stream or a population dir",
    )
    p.add_argument(
        "--input",
        required=True,
        help="frame stream, or a directory of <stem>.frames.jsonl / .labels.jsonl "
        "[/ .profile.json / .external.jsonl] per driver",
    )
    p.add_argument("--labels", help="label stream (single-stream mode)")
    p.add_argument("--profile", help="personalized profile (single-stream mode)")
    p.add_argument("--external", help="external classifier states (single-stream mode)")
    p.add_argument("--json", help="also write the report as JSON to this path")
    p.add_argument(
        "--calib-duration",
        dest="calibration_duration_s",
        type=float,
        default=_DEFAULTS.calibration_duration_s,
        help="seconds of leading frames used to auto-calibrate drivers without a profile "
        f"(default {_DEFAULTS.calibration_duration_s})",
    )
    p.add_argument(
        "--min-samples",
        dest="min_samples",
        type=int,
        default=_DEFAULTS.min_samples,
        help=f"minimum face-present frames for auto-calibration (default {_DEFAULTS.min_samples})",
    )
    _add_flags(p, _PIPELINE_FLAGS)
    _add_flags(p, _FACTOR_FLAGS)
    _add_flags(p, _GENERALIZED_FLAGS)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CalibrationError as exc:
        print(f"drowsy: {exc}", file=sys.stderr)
        return 2
    except DrowsyError as exc:
        print(f"drowsy: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"drowsy: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
