"""Command-line front end: analytic sweeps, Monte Carlo scenarios, figure
data export, and two-process reconciliation.

Exit codes: 0 success/MATCH, 1 usage error, 2 reconciliation MISMATCH,
3 channel ABORT, 4 internal failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import attacks, channel, detection, protocol
from .density_ops import DiagonalDensityMatrix, hs_distance_sq, weak_distance
from .photon_stats import (
    IntensityParam,
    PhotonStatsError,
    poisson_distribution,
    tmcc_distribution,
    tmcc_moments,
)
from .source import PulseSampler, SourceConfig, write_pulse_log

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_MISMATCH = 2
EXIT_ABORT = 3
EXIT_INTERNAL = 4

CONFIG_ENV = "TMCC_QKD_CONFIG"


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in row) + "\n")


def _load_config_defaults(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    """Fill in unset flags from a JSON config file (flags always win)."""
    path = args.config or os.environ.get(CONFIG_ENV)
    if not path:
        return
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        parser.error(f"cannot read config file {path}: {exc}")
    for key, value in data.items():
        attr = key.replace("-", "_")
        if attr == "lambda":
            attr = "lam"
        if hasattr(args, attr) and getattr(args, attr) is None:
            setattr(args, attr, value)


def _intensity(args, parser) -> IntensityParam:
    if args.lam is None:
        parser.error("--lambda is required for this command")
    try:
        return IntensityParam(float(args.lam))
    except PhotonStatsError as exc:
        parser.error(str(exc))


def _outdir(args, parser) -> Path:
    if args.out is None:
        parser.error("--out is required for this command")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _figure_rows(figure: int, lam: IntensityParam):
    moments = tmcc_moments(lam)
    if figure == 1:
        tmcc = tmcc_distribution(lam)
        pois = poisson_distribution(moments.mean)
        size = max(tmcc.probs.size, pois.probs.size)
        return (
            ["n", "p_tmcc", "p_poisson"],
            [(n, tmcc.prob(n), pois.prob(n)) for n in range(size)],
        )
    if figure == 2:
        rows = []
        for x in np.linspace(0.05, 10.0, 100):
            m = tmcc_moments(IntensityParam(float(x)))
            rows.append((m.mean, m.mandel_q))
        return ["mean_n", "mandel_q"], rows
    if figure == 3:
        rows = []
        for mean in np.linspace(8.0 / 50.0, 8.0, 50):
            lam_m = attacks.lambda_for_mean(float(mean))
            m = tmcc_moments(lam_m)
            rows.append((m.mean, m.variance, m.mean))  # Poisson variance = mean
        return ["mean_n", "sigma2_tmcc", "sigma2_poisson"], rows
    if figure in (5, 6):
        original = DiagonalDensityMatrix(tmcc_distribution(lam))
        rows = []
        for p_sq in np.linspace(1.0, 0.0, 21):
            r = attacks.SplitRatio.from_p_squared(float(p_sq))
            bob = DiagonalDensityMatrix(attacks.split_marginal_bob(lam, r))
            eve = DiagonalDensityMatrix(attacks.split_marginal_eve(lam, r))
            rows.append(
                (
                    r.p,
                    hs_distance_sq(bob, original),
                    hs_distance_sq(eve, original),
                    weak_distance(bob, original),
                )
            )
        if figure == 6:
            return ["p", "weak_dist"], [(p, w) for p, _, _, w in rows]
        return ["p", "hs_dist_bob", "hs_dist_eve", "weak_dist"], rows
    raise ValueError(f"unknown figure {figure}")


def cmd_stats(args, parser) -> int:
    figure = args.figure if args.figure is not None else 1
    lam = IntensityParam(float(args.lam)) if args.lam is not None else IntensityParam(2.0)
    if args.out is None:
        parser.error("--out is required for stats")
    header, rows = _figure_rows(figure, lam)
    _write_csv(Path(args.out), header, rows)
    return EXIT_OK


def cmd_figures(args, parser) -> int:
    out = _outdir(args, parser)
    lam = IntensityParam(float(args.lam)) if args.lam is not None else IntensityParam(2.0)
    for figure in (1, 2, 3, 5, 6):
        header, rows = _figure_rows(figure, lam)
        _write_csv(out / f"figure{figure}.csv", header, rows)
    return EXIT_OK


def _run_scenario(args, parser, sampler, outdir: Path, lam: IntensityParam) -> int:
    pulses = sampler.sample_batch(args.pulses)
    write_pulse_log(outdir / "pulses.csv", pulses)
    threshold = int(math.floor(tmcc_moments(lam).mean))
    alice, bob = protocol.extract_keys(pulses, threshold)
    (outdir / "alice.key").write_text(alice.to_bitstring() + "\n")
    (outdir / "bob.key").write_text(bob.to_bitstring() + "\n")
    thresholds = detection.calibrate_thresholds(
        lam, pulses=args.pulses, trials=args.calibration_trials, seed=args.seed + 1
    )
    report = detection.detect([p.n_b for p in pulses], lam, thresholds)
    (outdir / "report.txt").write_text(report.to_text())
    print(report.to_text(), end="")
    return EXIT_OK


def _scenario_args(args, parser):
    lam = _intensity(args, parser)
    if args.pulses is None or args.pulses < 2:
        parser.error("--pulses must be >= 2")
    cfg = SourceConfig(lam, noise_epsilon=args.epsilon or 0.0, seed=args.seed)
    return lam, cfg, _outdir(args, parser)


def cmd_simulate(args, parser) -> int:
    lam, cfg, outdir = _scenario_args(args, parser)
    return _run_scenario(args, parser, PulseSampler(cfg), outdir, lam)


def cmd_attack_split(args, parser) -> int:
    lam = _intensity(args, parser)
    if args.sweep:
        out = Path(args.out) if args.out else None
        if out is None:
            parser.error("--out is required")
        header, rows = _figure_rows(5, lam)
        _write_csv(out if out.suffix else out / "split_sweep.csv", header, rows)
        return EXIT_OK
    if args.split_p2 is None:
        parser.error("--split-p2 is required without --sweep")
    lam, cfg, outdir = _scenario_args(args, parser)
    r = attacks.SplitRatio.from_p_squared(args.split_p2)
    return _run_scenario(args, parser, attacks.SplitPulseSampler(cfg, r), outdir, lam)


def cmd_attack_clone(args, parser) -> int:
    lam, cfg, outdir = _scenario_args(args, parser)
    strategy = attacks.CloneStrategy(args.clone_strategy or "tmcc-clone")
    return _run_scenario(args, parser, attacks.ClonePulseSampler(cfg, strategy), outdir, lam)


def cmd_detect(args, parser) -> int:
    lam = _intensity(args, parser)
    if args.pulse_log is None:
        parser.error("--pulse-log is required for detect")
    counts = []
    with open(args.pulse_log) as fh:
        header = fh.readline().strip().split(",")
        try:
            idx = header.index("n_b")
        except ValueError:
            parser.error("pulse log lacks an n_b column")
        for line in fh:
            counts.append(int(line.strip().split(",")[idx]))
    thresholds = detection.calibrate_thresholds(
        lam, pulses=max(len(counts), detection.MIN_PULSES),
        trials=args.calibration_trials, seed=args.seed + 1,
    )
    report = detection.detect(counts, lam, thresholds)
    if args.out:
        Path(args.out).write_text(report.to_text())
    print(report.to_text(), end="")
    return EXIT_OK


def _load_key(path: str, parser) -> protocol.KeyMaterial:
    try:
        text = Path(path).read_text().strip()
    except OSError as exc:
        parser.error(f"cannot read key file {path}: {exc}")
    if text and set(text) - {"0", "1"}:
        parser.error(f"key file {path} must contain only 0/1 characters")
    return protocol.KeyMaterial.from_bits([int(c) for c in text])


def _split_hostport(value: str, parser):
    host, _, port = value.rpartition(":")
    if not host or not port.isdigit():
        parser.error(f"expected host:port, got {value!r}")
    return host, int(port)


def _exchange_exit(verdict: channel.ExchangeVerdict) -> int:
    if verdict is channel.ExchangeVerdict.MATCH:
        return EXIT_OK
    if verdict is channel.ExchangeVerdict.MISMATCH:
        return EXIT_MISMATCH
    return EXIT_ABORT


def cmd_reconcile_serve(args, parser) -> int:
    if args.listen is None or args.key is None:
        parser.error("reconcile-serve requires --listen and --key")
    key = _load_key(args.key, parser)
    host, port = _split_hostport(args.listen, parser)
    transcript = channel.Transcript() if args.transcript else None
    verdict = channel.serve_reconciliation(host, port, key, args.timeout_secs, transcript)
    if transcript is not None:
        transcript.dump_hex(args.transcript)
    print(f"verdict={verdict.value}")
    return _exchange_exit(verdict)


def cmd_reconcile_connect(args, parser) -> int:
    if args.peer is None or args.key is None:
        parser.error("reconcile-connect requires --peer and --key")
    key = _load_key(args.key, parser)
    host, port = _split_hostport(args.peer, parser)
    transcript = channel.Transcript() if args.transcript else None
    verdict = channel.connect_reconciliation(host, port, key, args.timeout_secs, transcript)
    if transcript is not None:
        transcript.dump_hex(args.transcript)
    print(f"verdict={verdict.value}")
    return _exchange_exit(verdict)


class _Parser(argparse.ArgumentParser):
    """argparse parser with the documented usage-error exit code (1)."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tmcc-qkd", description=__doc__)
    parser.add_argument("--config", help=f"JSON config file (or ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, pulses=False):
        p.add_argument("--lambda", dest="lam", type=float, default=None)
        p.add_argument("--epsilon", type=float, default=None)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        if pulses:
            p.add_argument("--pulses", type=int, default=None)
            p.add_argument("--calibration-trials", type=int, default=200)

    p = sub.add_parser("stats", help="analytic figure data (figures 1, 2, 3, 5, 6) as CSV")
    common(p)
    p.add_argument("--figure", type=int, choices=(1, 2, 3, 5, 6), default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("figures", help="emit all figure CSVs into a directory")
    common(p)
    p.set_defaults(func=cmd_figures)

    p = sub.add_parser("simulate", help="clean end-to-end run: pulses, keys, detection report")
    common(p, pulses=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("attack-split", help="beam-splitting attack scenario or --sweep data")
    common(p, pulses=True)
    p.add_argument("--split-p2", type=float, default=None, help="fraction p^2 kept by Bob")
    p.add_argument("--sweep", action="store_true")
    p.set_defaults(func=cmd_attack_split)

    p = sub.add_parser("attack-clone", help="state-cloning attack scenario")
    common(p, pulses=True)
    p.add_argument(
        "--clone-strategy",
        choices=[s.value for s in attacks.CloneStrategy],
        default=None,
    )
    p.set_defaults(func=cmd_attack_clone)

    p = sub.add_parser("detect", help="detection report from an existing pulse log")
    common(p)
    p.add_argument("--pulse-log", default=None)
    p.add_argument("--calibration-trials", type=int, default=200)
    p.set_defaults(func=cmd_detect)

    for name, fn in (("reconcile-serve", cmd_reconcile_serve), ("reconcile-connect", cmd_reconcile_connect)):
        p = sub.add_parser(name, help="two-process XOR-code reconciliation")
        p.add_argument("--key", default=None, help="key file of 0/1 characters")
        p.add_argument("--listen", default=None, help="host:port to bind (serve)")
        p.add_argument("--peer", default=None, help="host:port to connect (connect)")
        p.add_argument("--timeout-secs", type=float, default=channel.DEFAULT_TIMEOUT)
        p.add_argument("--transcript", default=None, help="write hex frame transcript here")
        p.set_defaults(func=fn)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _load_config_defaults(args, parser)
    try:
        return args.func(args, parser)
    except (PhotonStatsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
