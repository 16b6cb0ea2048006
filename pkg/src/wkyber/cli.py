"""Command-line surface: every experiment as a CSV-emitting verb.

Verbs: ber | coeff-dist | codeword-error | ker | failure-prob | sigma |
exchange.  Identical flags and seed produce byte-identical output; files are
written atomically.  Exit codes: 0 success, 2 usage error, 3 precision-guard
trip inside the analysis engine.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile

import numpy as np

from .bch import codeword_error_prob
from .modem import (ChannelPlan, NoiseSource, ber_4qam, demodulate_symbols,
                    modulate_words, snr_db_to_linear, transmit)
from .params import get_params
from .protocol import run_session
from .reliability import (PrecisionLossError, failure_prob_rows,
                          ker_monte_carlo, sigma_vs_snr)
from .transport import (cbd_pmf_padded, coeff_error_dist, receive_blocks,
                        send_blocks)


def _parse_grid(spec: str):
    try:
        start, stop, step = (float(p) for p in spec.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must be start:stop:step, got {spec!r}")
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad grid {spec!r}")
    out = []
    x = start
    while x <= stop + 1e-9:
        out.append(round(x, 9))
        x += step
    return out


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


def _emit(rows, header, out_path):
    text = "\n".join([",".join(header)]
                     + [",".join(_fmt(c) for c in row) for row in rows]) + "\n"
    if out_path in (None, "-"):
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(out_path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, out_path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------------------
# verbs


def cmd_ber(args):
    rows = []
    for point, snr in enumerate(args.grid):
        analytic = ber_4qam(snr_db_to_linear(snr))
        bits = max(2, args.trials)
        nwords = (bits + 1) // 2
        noise = NoiseSource(args.seed * 7919 + point)
        words = np.random.default_rng(args.seed + point).integers(0, 4, nwords)
        rx = demodulate_symbols(transmit(modulate_words(words), snr, noise))
        flips = rx ^ words
        nerr = int(((flips & 1) + (flips >> 1)).sum())
        rows.append((snr, analytic, nerr / (2 * nwords)))
    _emit(rows, ["snr_db", "ber_analytic", "ber_empirical"], args.out)


def cmd_coeff_dist(args):
    dist = coeff_error_dist(args.snr_lsb)
    cbd2 = cbd_pmf_padded(2)
    rows = [(off, p, c) for off, p, c in
            zip(range(-3, 4), dist.pmf, cbd2)]
    _emit(rows, ["offset", "channel_pmf", "cbd2_pmf"], args.out)


def cmd_codeword_error(args):
    rows = []
    for point, snr in enumerate(args.grid):
        p_b = ber_4qam(snr_db_to_linear(snr))
        analytic = codeword_error_prob(p_b)
        noise = NoiseSource(args.seed * 31337 + point)
        rng = np.random.default_rng(args.seed + point)
        msgs = rng.integers(0, 1 << 10, args.trials)  # 10-bit payloads
        got, failed = receive_blocks(send_blocks(msgs, snr, noise), args.trials)
        # unrecovered = decode failure or silent miscorrection; together these
        # are exactly the >t-bit-flips event the analytic tail counts
        wrong = int(((got != msgs) | failed).sum())
        rows.append((snr, analytic, wrong / args.trials))
    _emit(rows, ["snr_db", "pce_analytic", "pce_empirical"], args.out)


def cmd_ker(args):
    params = get_params(args.params)
    rows = []
    for point, snr_msb in enumerate(args.grid):
        ct_plan = ChannelPlan(snr_msb, args.snr_lsb)
        pk_plan = (ChannelPlan(snr_msb, snr_msb) if args.version == "v1"
                   else ct_plan)
        pt = ker_monte_carlo(args.version, params, (pk_plan, ct_plan),
                             args.trials, seed=args.seed * 104729 + point,
                             fo_policy=args.fo_policy, workers=args.workers)
        rows.append((pt.snr_msb_db, pt.snr_lsb_db, args.version, params.k,
                     pt.trials, pt.failures, pt.ker))
    _emit(rows, ["snr_msb_db", "snr_lsb_db", "version", "k", "trials",
                 "failures", "ker"], args.out)


def cmd_failure_prob(args):
    rows = failure_prob_rows(args.snr_lsb)
    _emit(rows, ["scheme", "k", "snr_lsb_db", "channel_variant",
                 "log2_failure_prob"], args.out)


def cmd_sigma(args):
    pairs = sigma_vs_snr(args.grid)
    crossing = None
    for (s0, v0), (s1, v1) in zip(pairs, pairs[1:]):
        if v0 >= 1.0 > v1:
            crossing = (s0, s1)
    if crossing:
        print(f"note: sigma crosses 1.0 between {crossing[0]:g} dB and "
              f"{crossing[1]:g} dB", file=sys.stderr)
    _emit(pairs, ["snr_db", "sigma"], args.out)


def cmd_exchange(args):
    params = get_params(args.params)
    ct_plan = ChannelPlan(args.snr_msb, args.snr_lsb)
    pk_plan = (ChannelPlan(args.snr_msb, args.snr_msb) if args.version == "v1"
               else ct_plan)
    rows = []
    warned = set()
    for i in range(args.trials):
        tr = run_session(args.version, params, (pk_plan, ct_plan),
                         seed=args.seed * 65537 + i, fo_policy=args.fo_policy)
        for w in tr.policy_warnings:
            if w not in warned:
                warned.add(w)
                print(f"policy warning: {w}", file=sys.stderr)
        rows.append((i, tr.version, tr.k,
                     tr.pk_plan.snr_msb_db, tr.pk_plan.snr_lsb_db,
                     tr.ct_plan.snr_msb_db, tr.ct_plan.snr_lsb_db,
                     "match" if tr.outcome else "mismatch",
                     tr.bch_failures,
                     ";".join(tr.policy_warnings)))
    _emit(rows, ["session_id", "version", "k", "pk_snr_msb_db", "pk_snr_lsb_db",
                 "ct_snr_msb_db", "ct_snr_lsb_db", "outcome", "bch_failures",
                 "policy_warnings"], args.out)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="wkyber",
        description="AWGN-channel key exchange simulator and analysis tool")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p, grid_default=None):
        p.add_argument("--params", default="768", choices=["512", "768", "1024"],
                       help="parameter set (default 768)")
        p.add_argument("--version", default="v1", choices=["v1", "v2"])
        p.add_argument("--snr-msb", dest="snr_msb", type=float, default=10.0,
                       help="SNR of the BCH-protected path, dB")
        p.add_argument("--snr-lsb", dest="snr_lsb", type=float, default=-10.0,
                       help="SNR of the exposed 2-bit path, dB")
        p.add_argument("--trials", type=int, default=1000,
                       help="bits / codewords / sessions per point")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--out", default=None, help="output file (default stdout)")
        p.add_argument("--fo-policy", dest="fo_policy", default="msb-only",
                       choices=["msb-only", "exact"],
                       help="re-encryption comparison policy (v1 KEM)")
        p.add_argument("--workers", type=int, default=None,
                       help="parallel workers for Monte Carlo")
        if grid_default:
            p.add_argument("--grid", type=_parse_grid, default=_parse_grid(grid_default),
                           help=f"start:stop:step (default {grid_default})")

    p = sub.add_parser("ber", help="analytic vs simulated 4QAM bit error rate")
    common(p, grid_default="0:10:2")
    p.set_defaults(func=cmd_ber)

    p = sub.add_parser("coeff-dist",
                       help="channel coefficient-error PMF vs the binomial law")
    common(p)
    p.set_defaults(func=cmd_coeff_dist)

    p = sub.add_parser("codeword-error",
                       help="analytic vs simulated BCH codeword failure rate")
    common(p, grid_default="-2:4:1")
    p.set_defaults(func=cmd_codeword_error)

    p = sub.add_parser("ker", help="Monte Carlo key error rate over an "
                                   "MSB-path SNR grid")
    common(p, grid_default="6:15:3")
    p.set_defaults(func=cmd_ker)

    p = sub.add_parser("failure-prob",
                       help="analytic decryption failure probabilities")
    common(p)
    p.set_defaults(func=cmd_failure_prob)

    p = sub.add_parser("sigma", help="channel error deviation vs SNR "
                                     "(hand-off to lattice estimators)")
    common(p, grid_default="-15:0:1")
    p.set_defaults(func=cmd_sigma)

    p = sub.add_parser("exchange", help="run full sessions and print transcripts")
    common(p)
    p.set_defaults(func=cmd_exchange)
    return top


def main(argv=None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    # argparse mistakes "-15:0:1" for an option; fold grid values in
    merged = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok == "--grid" and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            merged.append(f"--grid={argv[i + 1]}")
            skip = True
        else:
            merged.append(tok)
    args = build_parser().parse_args(merged)
    try:
        args.func(args)
    except PrecisionLossError as exc:
        print(f"precision guard tripped: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
