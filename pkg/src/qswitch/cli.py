"""Command-line front end: figure-style sweeps as CSV, protocol runs as text.

Sweep commands emit CSV (UTF-8, Unix newlines, header row, 12 significant
digits) with the swept variable columns first, then the released key
information c, the noiseless Holevo quantity, and, when transmission noise
is configured, the noisy Holevo quantity.  Rows whose bath configuration
the channel family cannot represent leave the noisy column empty and warn
on stderr.
"""

import argparse
import sys

import numpy as np

from . import __version__, channels, information, protocol

_DEFAULT_T = 0.1
_DEFAULT_TIME = 0.5
_DEFAULT_GAMMA0 = 1.0
_DEFAULT_STEPS = 50


def _fmt(value):
    return f"{value:.12g}"


def _emit_csv(out, header, rows):
    lines = [",".join(header)]
    lines.extend(",".join(row) for row in rows)
    text = "\n".join(lines) + "\n"
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _bath_channel(r, T, t, gamma0):
    cfg = channels.BathConfig(r=r, T=T, t=t, gamma0=gamma0)
    return channels.sgad_kraus(channels.squeezed_bath_params(cfg))


def _noisy_cell(psi, r, T, t, gamma0):
    """Formatted noisy Holevo value, or empty cell + stderr warning."""
    try:
        ks = _bath_channel(r, T, t, gamma0)
    except channels.ProviderDomainError as exc:
        print(f"warning: {exc}", file=sys.stderr)
        return ""
    return _fmt(information.holevo(information.signal_ensemble(psi, ks)))


def _noiseless_chi(psi):
    return information.holevo(information.signal_ensemble(psi))


def cmd_sweep_key(args):
    grid = np.linspace(args.min, args.max, args.steps)
    noisy = args.T is not None or args.t is not None or args.r is not None
    T = _DEFAULT_T if args.T is None else args.T
    t = _DEFAULT_TIME if args.t is None else args.t
    r = 0.0 if args.r is None else args.r
    header = ["key_info", "c", "chi_noiseless"] + (["chi_noisy"] if noisy else [])
    rows = []
    for target in grid:
        psi = information.psi_for_key_information(target)
        row = [
            _fmt(target),
            _fmt(information.key_information(psi)),
            _fmt(_noiseless_chi(psi)),
        ]
        if noisy:
            row.append(_noisy_cell(psi, r, T, t, args.gamma0))
        rows.append(row)
    _emit_csv(args.out, header, rows)
    return 0


def cmd_sweep_psi(args):
    grid = np.linspace(args.min, args.max, args.steps)
    header = ["psi", "c", "chi_noiseless", "chi_noisy"]
    rows = []
    for psi in grid:
        rows.append(
            [
                _fmt(psi),
                _fmt(information.key_information(psi)),
                _fmt(_noiseless_chi(psi)),
                _noisy_cell(psi, args.r, args.T, args.t, args.gamma0),
            ]
        )
    _emit_csv(args.out, header, rows)
    return 0


def cmd_sweep_squeezing(args):
    psi = (
        information.psi_for_key_information(1.0) if args.psi is None else args.psi
    )
    grid = np.linspace(args.min, args.max, args.steps)
    header = ["squeezing", "c", "chi_noiseless", "chi_noisy"]
    c_cell = _fmt(information.key_information(psi))
    chi0_cell = _fmt(_noiseless_chi(psi))
    rows = []
    for r in grid:
        rows.append(
            [_fmt(r), c_cell, chi0_cell, _noisy_cell(psi, r, args.T, args.t, args.gamma0)]
        )
    _emit_csv(args.out, header, rows)
    return 0


def cmd_sweep_rt(args):
    psi = (
        information.psi_for_key_information(1.0) if args.psi is None else args.psi
    )
    r_grid = np.linspace(args.r_min, args.r_max, args.steps)
    t_steps = args.steps if args.t_steps is None else args.t_steps
    t_grid = np.linspace(args.t_min, args.t_max, t_steps)
    header = ["squeezing", "time", "c", "chi_noiseless", "chi_noisy"]
    c_cell = _fmt(information.key_information(psi))
    chi0_cell = _fmt(_noiseless_chi(psi))
    rows = []
    for r in r_grid:
        for t in t_grid:
            rows.append(
                [
                    _fmt(r),
                    _fmt(t),
                    c_cell,
                    chi0_cell,
                    _noisy_cell(psi, r, args.T, t, args.gamma0),
                ]
            )
    _emit_csv(args.out, header, rows)
    return 0


def _parse_messages(text, n):
    """'random' -> None; otherwise hex digits, MSB first, 4 bits each,
    carrying at least the 2n message bits."""
    if text == "random":
        return None
    try:
        bits = "".join(f"{int(ch, 16):04b}" for ch in text)
    except ValueError:
        raise ValueError(f"--messages must be 'random' or hex digits, got {text!r}")
    if len(bits) < 2 * n:
        raise ValueError(
            f"--messages supplies {len(bits)} bits but n={n} needs {2 * n}"
        )
    pairs = [(int(bits[2 * i]), int(bits[2 * i + 1])) for i in range(n)]
    return np.array(pairs, dtype=np.uint8)


def cmd_protocol(args):
    if args.n < 2:
        raise ValueError(f"--n must be at least 2, got {args.n}")
    if args.trials < 1:
        raise ValueError(f"--trials must be at least 1, got {args.trials}")
    noisy = args.T is not None or args.t is not None or args.r is not None
    channel = None
    if noisy:
        channel = _bath_channel(
            0.0 if args.r is None else args.r,
            _DEFAULT_T if args.T is None else args.T,
            _DEFAULT_TIME if args.t is None else args.t,
            args.gamma0,
        )
    messages = _parse_messages(args.messages, args.n)
    config = protocol.SessionConfig(
        n=args.n,
        psi=args.psi,
        channel=channel,
        scrambled=args.scramble,
        reveal_perm=args.reveal_perm,
        attack=args.attack,
        messages=messages,
        seed=args.seed,
    )
    result = protocol.run_session(config)
    accuracy = result.accuracy
    if args.trials > 1:
        if args.attack == "collusion" and args.psi is None and channel is None:
            rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(args.seed)))
            accuracy = protocol.collusion_mc(args.n, args.trials, rng)
        else:
            total = accuracy
            for extra in range(1, args.trials):
                rerun = protocol.SessionConfig(
                    n=args.n,
                    psi=args.psi,
                    channel=channel,
                    scrambled=args.scramble,
                    reveal_perm=args.reveal_perm,
                    attack=args.attack,
                    messages=messages,
                    seed=args.seed + extra,
                )
                total += protocol.run_session(rerun).accuracy
            accuracy = total / args.trials
    if args.out:
        result.transcript.write(args.out)
    if args.reveal_perm is None:
        perm_released = args.scramble and args.attack is None
    else:
        perm_released = args.reveal_perm
    scrambled = "yes" if args.scramble else "no"
    revealed = "yes" if (not args.scramble or perm_released) else "no"
    parts = [f"n={args.n}", f"scrambled={scrambled}", f"revealed={revealed}"]
    if args.attack:
        parts.append(f"attack={args.attack}")
    if args.trials > 1:
        parts.append(f"trials={args.trials}")
    parts.append(f"accuracy={_fmt(accuracy)}")
    print(" ".join(parts))
    return 0


def _add_noise_flags(p, explicit_defaults):
    """Bath flags; with explicit_defaults the channel is always on."""
    if explicit_defaults:
        p.add_argument("--T", type=float, default=_DEFAULT_T, help="bath temperature")
        p.add_argument("--t", type=float, default=_DEFAULT_TIME, help="interaction time")
    else:
        p.add_argument(
            "--T", type=float, default=None, help="bath temperature (enables noise)"
        )
        p.add_argument(
            "--t", type=float, default=None, help="interaction time (enables noise)"
        )
    p.add_argument("--gamma0", type=float, default=_DEFAULT_GAMMA0, help="spontaneous rate")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="qswitch",
        description="Controlled-key dense-coding simulator and analysis sweeps.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser(
        "sweep-key",
        help="Holevo quantity against released key information",
    )
    p.add_argument("--min", type=float, default=0.0, help="lowest key information")
    p.add_argument("--max", type=float, default=2.0, help="highest key information")
    p.add_argument("--steps", type=int, default=_DEFAULT_STEPS)
    _add_noise_flags(p, explicit_defaults=False)
    p.add_argument("--r", type=float, default=None, help="bath squeezing (enables noise)")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep_key)

    p = sub.add_parser("sweep-psi", help="Holevo quantity along the state family")
    p.add_argument("--min", type=float, default=0.0)
    p.add_argument("--max", type=float, default=float(np.pi / 2))
    p.add_argument("--steps", type=int, default=_DEFAULT_STEPS)
    _add_noise_flags(p, explicit_defaults=True)
    p.add_argument("--r", type=float, default=0.0, help="bath squeezing")
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep_psi)

    p = sub.add_parser("sweep-squeezing", help="noisy Holevo quantity against squeezing")
    p.add_argument("--min", type=float, default=-0.5)
    p.add_argument("--max", type=float, default=0.5)
    p.add_argument("--steps", type=int, default=_DEFAULT_STEPS)
    p.add_argument(
        "--psi",
        type=float,
        default=None,
        help="state parameter (default: the one worth 1 bit of key)",
    )
    _add_noise_flags(p, explicit_defaults=True)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep_squeezing)

    p = sub.add_parser(
        "sweep-rt", help="noisy Holevo quantity over the squeezing/time grid"
    )
    p.add_argument("--r-min", type=float, default=0.0)
    p.add_argument("--r-max", type=float, default=0.5)
    p.add_argument("--t-min", type=float, default=0.05)
    p.add_argument("--t-max", type=float, default=3.0)
    p.add_argument("--steps", type=int, default=_DEFAULT_STEPS, help="points per axis")
    p.add_argument("--t-steps", type=int, default=None, help="override time-axis points")
    p.add_argument(
        "--psi",
        type=float,
        default=None,
        help="state parameter (default: the one worth 1 bit of key)",
    )
    p.add_argument("--T", type=float, default=_DEFAULT_T, help="bath temperature")
    p.add_argument("--gamma0", type=float, default=_DEFAULT_GAMMA0)
    p.add_argument("--out", default=None, help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep_rt)

    p = sub.add_parser("protocol", help="run one session end to end")
    p.add_argument("--n", type=int, required=True, help="number of pairs (>= 2)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--psi",
        type=float,
        default=None,
        help="prepare mixed pairs at this state parameter (default: pure)",
    )
    p.add_argument("--scramble", action="store_true", help="scramble the pair order")
    p.add_argument(
        "--reveal-perm",
        action=argparse.BooleanOptionalAction,
        default=None,
        help="release the scrambled ordering (default: yes unless attacking)",
    )
    p.add_argument("--attack", choices=("collusion",), default=None)
    p.add_argument(
        "--trials", type=int, default=1, help="Monte-Carlo repetitions of the session"
    )
    p.add_argument(
        "--messages",
        default="random",
        help="'random' or hex digits, 4 bits each MSB first, at least 2n bits",
    )
    _add_noise_flags(p, explicit_defaults=False)
    p.add_argument("--r", type=float, default=None, help="bath squeezing (enables noise)")
    p.add_argument("--out", default=None, help="write the session transcript here")
    p.set_defaults(func=cmd_protocol)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, protocol.ProtocolError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
