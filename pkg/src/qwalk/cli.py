"""
Command-line entry point: ``qwalk <command> [options]``.

Every command writes one report file (CSV or JSON). Exit status is 0 on
success, 2 when an option is invalid and 1 when a numerical routine fails.
"""

from __future__ import annotations

import argparse
import ast
import math
import operator
import re
import sys
from typing import Callable

import numpy as np

from qwalk import __version__
from qwalk.analysis import (
    default_horizon,
    double_step_operator,
    band_spacing_spread,
    eigenstate_population,
    grover_degeneracy,
    lambda_sweep,
    spectrum_report,
    transfer_time,
)
from qwalk.ctqw import (
    ChainHamiltonian,
    SpinChainSystem,
    christandl_hamiltonian,
    ctqw_evolve,
    spin_oracle_evolve,
    spin_state,
    single_excitation_amplitudes,
)
from qwalk.errors import NumericsError, QwalkError
from qwalk.io import atomic_write, csv_text, dumps_report, resolve_output
from qwalk.protocols import (
    CONVERSION_MODES,
    ballistic_program,
    christandl_program,
    ctqw_to_dtqw,
    weak_coupling_program,
)
from qwalk.walk import NAMED_COINS, WalkState, evolve

__all__ = ["main", "build_parser", "parse_angle"]

COMMANDS = ("simulate", "spectrum", "sweep", "weakcoupling", "convert", "grover2d", "oracle")
_AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


class UsageError(Exception):
    """Bad option value; carries the flag name."""

    def __init__(self, flag: str, message: str) -> None:
        super().__init__(f"{flag}: {message}")
        self.flag = flag


# ------------------------------------------------------------------ angles

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}


def _eval_node(node: ast.AST, names: dict[str, float]) -> float:
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, names)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id in names:
        return names[node.id]
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_node(node.left, names), _eval_node(node.right, names))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _eval_node(node.operand, names)
        return -v if isinstance(node.op, ast.USub) else v
    raise ValueError("unsupported expression")


def parse_angle(text: str, n: int | None = None) -> float:
    """Evaluate an angle such as ``0.05``, ``pi/4`` or ``pi/2N``.

    ``pi/2N`` is read as ``pi / (2 N)``: a number glued to ``N`` or ``pi``
    binds tighter than division. ``N`` is the cycle length.
    """
    s = text.strip().replace(" ", "")
    # "2N" -> "(2*N)", "2pi" -> "(2*pi)"
    s = re.sub(r"(\d+(?:\.\d*)?)(N|pi)\b", r"(\1*\2)", s)
    names = {"pi": math.pi}
    if n is not None:
        names["N"] = float(n)
    try:
        value = _eval_node(ast.parse(s, mode="eval"), names)
    except (SyntaxError, ValueError, ZeroDivisionError, TypeError) as exc:
        raise ValueError(f"cannot parse angle {text!r}") from exc
    if not math.isfinite(value):
        raise ValueError(f"angle {text!r} is not finite")
    return value


# ------------------------------------------------------------------ parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qwalk",
        description="Coined quantum walk state-transfer simulations.",
    )
    parser.add_argument("--version", action="version", version=f"qwalk {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def common(p: argparse.ArgumentParser, fmt: str = "json") -> None:
        p.add_argument("--output", "-o", help="report path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=fmt)

    def cycle(p: argparse.ArgumentParser, n: int = 30) -> None:
        p.add_argument("--n", type=int, default=n, help="cycle length N (even)")

    p = sub.add_parser("simulate", help="transfer trace for a coin protocol")
    cycle(p)
    p.add_argument("--protocol", choices=("christandl", "ballistic", "weak"), default="christandl")
    p.add_argument("--lambda", dest="lam", type=float, default=0.03)
    p.add_argument("--theta", default="pi/4", help="uniform coin angle (weak protocol)")
    p.add_argument("--epsilon", default="pi/2N", help="end-coin offset (weak protocol)")
    p.add_argument("--steps", type=int, help="double steps (default: 2*ceil(pi/(2 lambda)))")
    p.add_argument("--initial-coin", choices=sorted(NAMED_COINS) + ["custom"], default="right")
    p.add_argument("--alpha", type=complex, default=1.0, help="right-mover amplitude (custom)")
    p.add_argument("--beta", type=complex, default=0.0, help="left-mover amplitude (custom)")
    p.add_argument("--source", type=int, default=1)
    p.add_argument("--target", type=int)
    p.add_argument("--coin-map", choices=("identity", "swap"), default="identity",
                   help="expected arrival coin map for the coin_fidelity column")
    common(p, "csv")

    p = sub.add_parser("spectrum", help="eigenphases of the double step")
    cycle(p)
    p.add_argument("--protocol", choices=("christandl", "ballistic", "weak"), default="christandl")
    p.add_argument("--lambda", dest="lam", type=float, default=0.03)
    p.add_argument("--theta", default="pi/4")
    p.add_argument("--epsilon", default="pi/2N")
    common(p)

    p = sub.add_parser("sweep", help="peak transfer probability versus lambda")
    cycle(p)
    p.add_argument("--lambda-min", type=float, default=0.005)
    p.add_argument("--lambda-max", type=float, default=5.0)
    p.add_argument("--points", type=int, default=40)
    p.add_argument("--margin", type=float, default=0.1, help="extra horizon fraction")
    p.add_argument("--workers", type=int, default=1)
    common(p, "csv")

    p = sub.add_parser("weakcoupling", help="weakly coupled ends: populations and transfer")
    cycle(p)
    p.add_argument("--theta", default="pi/4")
    p.add_argument("--epsilon", default="pi/2N")
    p.add_argument("--end-axis", choices=sorted(_AXES), default="y")
    p.add_argument("--one-end", action="store_true", help="apply --end-axis at position 2 only")
    p.add_argument("--steps", type=int, help="trace length (default: twice the peak time)")
    common(p)

    p = sub.add_parser("convert", help="map a chain Hamiltonian onto coins")
    cycle(p)
    p.add_argument("--lambda", dest="lam", type=float, default=0.03,
                   help="engineered chain rate (used when no --hopping is given)")
    p.add_argument("--hopping", help="comma-separated complex hoppings, e.g. '0.5+0.5j,1'")
    p.add_argument("--diagonal", help="comma-separated on-site energies")
    p.add_argument("--mode", choices=CONVERSION_MODES, default="exact")
    common(p)

    p = sub.add_parser("grover2d", help="Grover walk on a square torus")
    p.add_argument("--side", type=int, default=4)
    p.add_argument("--steps", type=int, default=200)
    common(p)

    p = sub.add_parser("oracle", help="spin-chain versus chain-walk comparison")
    p.add_argument("--n", type=int, default=8, help="number of spins")
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--seed", type=int, help="random couplings in [0.5, 1.5) instead of engineered")
    p.add_argument("--alpha", type=complex, default=1.0)
    p.add_argument("--beta", type=complex, default=0.0)
    p.add_argument("--points", type=int, default=21)
    p.add_argument("--t-max", type=float, help="default: pi/lambda, or 10/max J with --seed")
    common(p)
    return parser


# ------------------------------------------------------------------ helpers


def _angle(args, name: str) -> float:
    try:
        return parse_angle(getattr(args, name), args.n)
    except ValueError as exc:
        raise UsageError(f"--{name}", str(exc)) from None


def _check_cycle(args, minimum: int = 6) -> None:
    if args.n < minimum or args.n % 2:
        raise UsageError("--n", f"must be an even integer >= {minimum}, got {args.n}")


def _check_lambda(args) -> None:
    if not (args.lam > 0 and math.isfinite(args.lam)):
        raise UsageError("--lambda", f"must be positive, got {args.lam}")


def _vertex(args, flag: str, value: int) -> int:
    if value % 2 == 0 or not 0 < value < args.n:
        raise UsageError(flag, f"must be an odd position between 1 and {args.n - 1}, got {value}")
    return value


def _program(args):
    if args.protocol == "christandl":
        _check_lambda(args)
        return christandl_program(args.n, args.lam)
    if args.protocol == "ballistic":
        return ballistic_program(args.n)
    theta, eps = _angle(args, "theta"), _angle(args, "epsilon")
    if not 0 < eps <= math.pi / 2:
        raise UsageError("--epsilon", f"must lie in (0, pi/2], got {eps}")
    return weak_coupling_program(args.n, theta, eps)


def _initial_coin(args) -> np.ndarray:
    if args.initial_coin != "custom":
        return np.array(NAMED_COINS[args.initial_coin], dtype=np.complex128)
    c = np.array([args.alpha, args.beta], dtype=np.complex128)
    if abs(np.linalg.norm(c) - 1.0) > 1e-10:
        raise UsageError("--alpha", "|alpha|^2 + |beta|^2 must equal 1")
    return c


def _complex_list(flag: str, text: str) -> list[complex]:
    try:
        return [complex(v.strip().replace("i", "j")) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(flag, f"cannot parse {text!r} as comma-separated numbers") from None


def _trace_rows(trace):
    return zip(
        trace.times.tolist(),
        trace.p_source,
        trace.p_target,
        trace.p_rest,
        trace.coin_fidelity,
    )


TRACE_HEADER = ("t", "p_source", "p_target", "p_rest", "coin_fidelity")


# ------------------------------------------------------------------ commands
# each returns (params, data, csv header, csv rows)


def cmd_simulate(args):
    _check_cycle(args, 6 if args.protocol == "christandl" else 4)
    if args.protocol == "weak":
        _check_cycle(args, 8)
    program = _program(args)
    source = _vertex(args, "--source", args.source)
    target = _vertex(args, "--target", args.n - 1 if args.target is None else args.target)
    if source == target:
        raise UsageError("--target", "must differ from --source")
    if args.steps is None:
        steps = 2 * math.ceil(math.pi / (2 * args.lam)) if args.protocol == "christandl" else args.n
    else:
        steps = args.steps
    if steps < 0:
        raise UsageError("--steps", "must be >= 0")
    coin = _initial_coin(args)
    cmap = np.eye(2) if args.coin_map == "identity" else np.array([[0, 1], [-1, 0]])
    trace = evolve(
        WalkState.localized(args.n, source, coin),
        program,
        steps,
        source=source,
        target=target,
        expected_coin_map=cmap,
    )
    params = {
        "n": args.n,
        "protocol": args.protocol,
        "lambda": args.lam,
        "steps": steps,
        "initial_coin": args.initial_coin,
        "coin": [[float(c.real), float(c.imag)] for c in coin],
        "source": source,
        "target": target,
        "coin_map": args.coin_map,
    }
    if args.protocol == "weak":
        params.update(theta=_angle(args, "theta"), epsilon=_angle(args, "epsilon"))
    return params, trace.to_dict(), TRACE_HEADER, _trace_rows(trace)


def cmd_spectrum(args):
    _check_cycle(args, 8 if args.protocol == "weak" else 6)
    report = spectrum_report(double_step_operator(_program(args)))
    data = report.to_dict()
    data["class_sizes"] = report.class_sizes
    data["band_spacing_spread"] = band_spacing_spread(report)
    params = {"n": args.n, "protocol": args.protocol, "lambda": args.lam}
    rows = ((i, float(p)) for i, p in enumerate(report.phases))
    return params, data, ("index", "phase"), rows


def cmd_sweep(args):
    _check_cycle(args)
    if not 0 < args.lambda_min < args.lambda_max:
        raise UsageError("--lambda-min", "need 0 < lambda-min < lambda-max")
    if args.points < 2:
        raise UsageError("--points", "must be >= 2")
    if args.margin < 0:
        raise UsageError("--margin", "must be >= 0")
    lams = np.geomspace(args.lambda_min, args.lambda_max, args.points)
    report = lambda_sweep(
        args.n,
        lams,
        horizon_rule=lambda n, lam: default_horizon(n, lam, args.margin),
        max_workers=args.workers,
    )
    params = {
        "n": args.n,
        "lambda_min": args.lambda_min,
        "lambda_max": args.lambda_max,
        "points": args.points,
        "margin": args.margin,
    }
    rows = zip(
        report.lambdas,
        report.peak_fidelities,
        report.peak_times.tolist(),
        report.horizons.tolist(),
    )
    return params, report.to_dict(), ("lambda", "peak_fidelity", "peak_time", "horizon"), rows


def cmd_weakcoupling(args):
    _check_cycle(args, 8)
    theta, eps = _angle(args, "theta"), _angle(args, "epsilon")
    if not 0 < eps <= math.pi / 2:
        raise UsageError("--epsilon", f"must lie in (0, pi/2], got {eps}")
    program = weak_coupling_program(
        args.n, theta, eps, end_axis=_AXES[args.end_axis], both_ends=not args.one_end
    )
    start = WalkState.localized(args.n, 1)
    pop = eigenstate_population(double_step_operator(program), start)
    data = {"population": pop.to_dict(), "top4_weight": pop.top_weight(4)}
    if args.steps is None:
        peak_time, peak_p = transfer_time(program, start)
        steps = 2 * peak_time
        data.update(peak_time=peak_time, peak_probability=peak_p)
    else:
        if args.steps < 0:
            raise UsageError("--steps", "must be >= 0")
        steps = args.steps
    trace = evolve(start, program, steps)
    data["trace"] = trace.to_dict()
    params = {
        "n": args.n,
        "theta": theta,
        "epsilon": eps,
        "end_axis": args.end_axis,
        "one_end": args.one_end,
        "steps": steps,
    }
    return params, data, TRACE_HEADER, _trace_rows(trace)


def cmd_convert(args):
    if args.hopping is None:
        _check_cycle(args)
        _check_lambda(args)
        h = christandl_hamiltonian(args.n // 2, 2 * args.lam)
    else:
        hop = _complex_list("--hopping", args.hopping)
        if args.diagonal is None:
            diag = [0.0] * (len(hop) + 1)
        else:
            d = _complex_list("--diagonal", args.diagonal)
            if any(x.imag for x in d):
                raise UsageError("--diagonal", "on-site energies must be real")
            diag = [x.real for x in d]
        if len(diag) != len(hop) + 1 or len(hop) < 2:
            raise UsageError("--hopping", "need at least 2 hoppings and one more diagonal entry")
        h = ChainHamiltonian(diag, hop)
    result = ctqw_to_dtqw(h, mode=args.mode)
    specs = result.program.specs
    rows = [
        (x, float(s.theta), *map(float, s.axis), float(s.phase)) for x, s in enumerate(specs)
    ]
    data = {
        "mass_angles": result.mass_angles.tolist(),
        "vector_potential_angles": result.vector_potential_angles.tolist(),
        "scalar_angles": result.scalar_angles.tolist(),
        "degenerate_edges": list(result.degenerate_edges),
        "coins": [
            {"position": r[0], "theta": r[1], "axis": list(r[2:5]), "phase": r[5]} for r in rows
        ],
    }
    params = {
        "mode": args.mode,
        "diagonal": h.diagonal.tolist(),
        "hopping": [[float(c.real), float(c.imag)] for c in h.hopping],
    }
    return params, data, ("position", "theta", "axis_x", "axis_y", "axis_z", "phase"), rows


def cmd_grover2d(args):
    if args.steps < 1:
        raise UsageError("--steps", "must be >= 1")
    try:
        frac, avg = grover_degeneracy(args.side, args.steps)
    except QwalkError as exc:
        if isinstance(exc, NumericsError):
            raise
        raise UsageError("--side", str(exc)) from None
    data = {
        "fraction_pm1": frac,
        "time_avg_origin_prob": avg,
        "uniform_prob": 1.0 / args.side**2,
    }
    params = {"side": args.side, "steps": args.steps}
    rows = [(frac, avg, 1.0 / args.side**2)]
    return params, data, ("fraction_pm1", "time_avg_origin_prob", "uniform_prob"), rows


def cmd_oracle(args):
    if not 2 <= args.n <= 14:
        raise UsageError("--n", f"number of spins must be in [2, 14], got {args.n}")
    if args.points < 1:
        raise UsageError("--points", "must be >= 1")
    if abs(abs(args.alpha) ** 2 + abs(args.beta) ** 2 - 1) > 1e-10:
        raise UsageError("--alpha", "|alpha|^2 + |beta|^2 must equal 1")
    if args.seed is None:
        _check_lambda(args)
        chain = christandl_hamiltonian(args.n, args.lam)
        t_max = math.pi / args.lam if args.t_max is None else args.t_max
    else:
        rng = np.random.default_rng(args.seed)
        chain = ChainHamiltonian(np.zeros(args.n), rng.uniform(0.5, 1.5, args.n - 1))
        t_max = 10 / np.abs(chain.hopping).max() if args.t_max is None else args.t_max
    system = SpinChainSystem.from_chain(chain)
    times = np.linspace(0.0, t_max, args.points)
    site1 = np.zeros(args.n)
    site1[0] = 1.0
    rows = []
    for t in times:
        fid, _ = spin_oracle_evolve(system, args.alpha, args.beta, float(t))
        spin_amp = single_excitation_amplitudes(spin_state(system, 1.0, 0.0, float(t)), args.n)
        dev = float(np.abs(spin_amp - ctqw_evolve(chain, site1, float(t))).max())
        rows.append((float(t), fid, dev))
    data = {
        "times": [r[0] for r in rows],
        "fidelity": [r[1] for r in rows],
        "max_amplitude_deviation": [r[2] for r in rows],
        "couplings": list(system.couplings),
    }
    params = {
        "n": args.n,
        "lambda": args.lam,
        "seed": args.seed,
        "alpha": [args.alpha.real, args.alpha.imag],
        "beta": [args.beta.real, args.beta.imag],
        "points": args.points,
        "t_max": float(t_max),
    }
    return params, data, ("t", "fidelity", "max_amplitude_deviation"), rows


HANDLERS: dict[str, Callable] = {
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
    "sweep": cmd_sweep,
    "weakcoupling": cmd_weakcoupling,
    "convert": cmd_convert,
    "grover2d": cmd_grover2d,
    "oracle": cmd_oracle,
}


def run(args: argparse.Namespace) -> str:
    """Execute a parsed command and return the report text."""
    params, data, header, rows = HANDLERS[args.command](args)
    if args.format == "json":
        return dumps_report(args.command, params, data, __version__)
    return csv_text(header, rows)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        text = run(args)
    except UsageError as exc:
        parser.error(str(exc))  # exits with status 2
    except NumericsError as exc:
        print(f"qwalk: numerical failure: {exc}", file=sys.stderr)
        return 1
    except QwalkError as exc:
        parser.error(str(exc))
    if args.output == "-":
        sys.stdout.write(text)
    else:
        path = resolve_output(args.output, f"{args.command}.{args.format}")
        atomic_write(path, text)
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
