"""Command-line front end.

Subcommands: ``solve`` (config file driven), ``reproduce`` (tables 1-3),
``bench`` (query method vs repeated phase estimation) and ``probcheck``
(Monte Carlo check of the overlap probability laws).

Exit codes: 0 success, 1 usage / malformed config, 2 invalid input,
3 no eigenvalue found (or a failed probability check).
"""

from __future__ import annotations

import argparse
import configparser
import csv
import dataclasses
import io
import math
import sys
from dataclasses import dataclass, field

from .experiments import bench_type2, probcheck, reproduce, scaling_exponent
from .hamiltonian import HamiltonianFormatError, PauliSum, build_h2_jw, build_heisenberg, load_pauli_file
from .solver import SolverConfig, solve_type2

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NOT_FOUND = 0, 1, 2, 3

SOLVE_COLUMNS = ("trial", "initial_state", "overlap_p", "fidelity_F", "measured_eigenvalue", "queries")


class UsageError(Exception):
    """Malformed command line or config file (exit 1)."""


class InvalidInput(Exception):
    """Well-formed but unusable input (exit 2)."""


def fmt(x) -> str:
    """Fixed 6-decimal formatting, scientific below 1e-4; integers and strings pass through."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if x != 0 and abs(x) < 1e-4:
            return f"{x:.6e}"
        return f"{x:.6f}"
    return str(x)


# config --------------------------------------------------------------------

@dataclass
class HeisenbergParams:
    n: int = 4
    jx: float = 0.2365
    jy: float = 0.8237
    jz: float = 0.3689
    h: float = 0.7326
    periodic: bool = True


@dataclass
class RunConfig:
    """Everything a ``solve`` run needs. ``hamiltonian`` is ``h2``, ``heisenberg`` or a file path."""

    hamiltonian: str
    solver: SolverConfig
    heisenberg: HeisenbergParams = field(default_factory=HeisenbergParams)
    out: str | None = None
    shots: int = 100_000

    def validate(self) -> None:
        if self.hamiltonian == "heisenberg" and self.heisenberg.n < 2:
            raise InvalidInput("heisenberg.n must be >= 2")
        if self.shots < 1000:
            raise InvalidInput("shots must be >= 1000")

    def build_hamiltonian(self) -> PauliSum:
        if self.hamiltonian == "h2":
            return build_h2_jw()
        if self.hamiltonian == "heisenberg":
            p = self.heisenberg
            return build_heisenberg(p.n, p.jx, p.jy, p.jz, p.h, p.periodic)
        try:
            return load_pauli_file(self.hamiltonian)
        except OSError as exc:
            raise InvalidInput(f"cannot read Hamiltonian file: {exc}") from None
        except HamiltonianFormatError as exc:
            raise InvalidInput(f"{self.hamiltonian}: {exc}") from None


_SOLVER_FIELDS = {f.name: f for f in dataclasses.fields(SolverConfig)}
_HEIS_FIELDS = {f.name: f for f in dataclasses.fields(HeisenbergParams)}
_RUN_KEYS = {"hamiltonian", "out", "shots"}
_OPTIONAL_FLOATS = {"p_floor", "residual_tol"}


def _line_of(text: str, section: str, key: str | None = None) -> int:
    """1-based line of [section] (or of key inside it); 0 if not found."""
    current = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if key is None and current == section:
                return lineno
            continue
        if current == section and key is not None:
            name = line.split("=", 1)[0].split(":", 1)[0].strip().lower()
            if name == key:
                return lineno
    return 0


def _convert(value: str, kind, where: str):
    try:
        if kind is bool:
            low = value.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind is int:
            return int(value)
        if kind is float:
            out = float(value)
            if not math.isfinite(out):
                raise ValueError
            return out
        return value.strip()
    except ValueError:
        raise InvalidInput(f"{where}: bad value {value!r}") from None


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    try:
        parser.read_string(text, source=source)
    except configparser.MissingSectionHeaderError as exc:
        raise UsageError(f"{source}:{exc.lineno}: missing [section] header") from None
    except configparser.ParsingError as exc:
        lineno = exc.errors[0][0]
        bad = text.splitlines()[lineno - 1].strip()
        raise UsageError(f"{source}:{lineno}: expected 'key = value', got {bad!r}") from None
    except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
        raise UsageError(f"{source}:{exc.lineno}: {exc}") from None
    except configparser.Error as exc:
        raise UsageError(f"{source}: {exc}") from None

    for section in parser.sections():
        if section not in ("solver", "heisenberg"):
            raise UsageError(f"{source}:{_line_of(text, section)}: unknown section [{section}]")
    if not parser.has_section("solver"):
        raise UsageError(f"{source}:1: missing [solver] section")

    solver_kw, run_kw = {}, {}
    for key, value in parser.items("solver"):
        where = f"{source}:{_line_of(text, 'solver', key)}"
        if key in _RUN_KEYS:
            run_kw[key] = _convert(value, int if key == "shots" else str, where)
        elif key in _OPTIONAL_FLOATS:
            solver_kw[key] = None if value.strip() == "" else _convert(value, float, where)
        elif key in _SOLVER_FIELDS:
            kind = {"int": int, "float": float, "str": str}[_SOLVER_FIELDS[key].type]
            solver_kw[key] = _convert(value, kind, where)
        else:
            raise UsageError(f"{where}: unknown key {key!r} in [solver]")
    for key in ("hamiltonian", "lambda0"):
        if key not in run_kw and key not in solver_kw:
            raise UsageError(f"{source}:{_line_of(text, 'solver')}: missing required key {key!r}")

    heis_kw = {}
    if parser.has_section("heisenberg"):
        for key, value in parser.items("heisenberg"):
            where = f"{source}:{_line_of(text, 'heisenberg', key)}"
            if key not in _HEIS_FIELDS:
                raise UsageError(f"{where}: unknown key {key!r} in [heisenberg]")
            kind = {"int": int, "float": float, "bool": bool}[_HEIS_FIELDS[key].type]
            heis_kw[key] = _convert(value, kind, where)

    out = run_kw.get("out") or None
    return RunConfig(run_kw["hamiltonian"], SolverConfig(**solver_kw), HeisenbergParams(**heis_kw),
                     out, run_kw.get("shots", 100_000))


def dump_config(cfg: RunConfig) -> str:
    """Effective configuration as INI text; parse_config(dump_config(c)) == c."""
    def val(v):
        if v is None:
            return ""
        if isinstance(v, bool):
            return "true" if v else "false"
        if isinstance(v, float):
            return repr(v)
        return str(v)

    lines = ["[solver]", f"hamiltonian = {cfg.hamiltonian}"]
    for name in _SOLVER_FIELDS:
        lines.append(f"{name} = {val(getattr(cfg.solver, name))}")
    lines.append(f"out = {val(cfg.out)}")
    lines.append(f"shots = {cfg.shots}")
    lines += ["", "[heisenberg]"]
    for name in _HEIS_FIELDS:
        lines.append(f"{name} = {val(getattr(cfg.heisenberg, name))}")
    return "\n".join(lines) + "\n"


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None
    return parse_config(text, source=path)


# output ----------------------------------------------------------------------

def write_csv(rows, header, out: str | None) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def _err(msg: str) -> None:
    print(msg, file=sys.stderr)


# commands --------------------------------------------------------------------

_OVERRIDES = ("seed", "r", "delta", "epsilon", "strategy", "mode", "trials")


def cmd_solve(args) -> int:
    cfg = load_config(args.config)
    changes = {k: getattr(args, k) for k in _OVERRIDES if getattr(args, k) is not None}
    if changes:
        cfg.solver = dataclasses.replace(cfg.solver, **changes)
    if args.out is not None:
        cfg.out = args.out
    cfg.validate()
    h = cfg.build_hamiltonian()
    try:
        cfg.solver.validate(h.num_qubits)
    except ValueError as exc:
        raise InvalidInput(str(exc)) from None
    if args.dump_config:
        with open(args.dump_config, "w") as fh:
            fh.write(dump_config(cfg))

    result = solve_type2(h, cfg.solver)
    rows = [(rec.trial, rec.initial_state, rec.overlap, rec.fidelity, rec.measured_eigenvalue, rec.queries)
            for rec in result.trial_records]
    write_csv(rows, SOLVE_COLUMNS, cfg.out)
    if result.found:
        _err(f"found eigenvalue {result.eigenvalue:.6f} (F = {result.fidelity_vs_reference:.4f}, "
             f"{result.queries_used} queries)")
        return EXIT_OK
    _err(f"no eigenvalue found near {cfg.solver.lambda0} ({result.queries_used} queries)")
    return EXIT_NOT_FOUND


def cmd_reproduce(args) -> int:
    rep = reproduce(args.table, r=args.r, delta=args.delta, mode=args.mode,
                    random_states=args.random_states, seed=args.seed)
    rows = [(args.table, row.kind, row.state, row.overlap, row.fidelity) for row in rep.rows]
    write_csv(rows, ("table", "kind", "initial_state", "overlap_p", "fidelity_F"), args.out)
    for line in rep.summary():
        _err(line)
    return EXIT_OK


def cmd_bench(args) -> int:
    limit = 5 if args.mode == "circuit" else 10
    if not 1 <= args.n_min <= args.n_max <= limit:
        raise InvalidInput(f"need 1 <= n-min <= n-max <= {limit} in {args.mode} mode")
    rows = bench_type2(range(args.n_min, args.n_max + 1), reps=args.reps, mode=args.mode,
                       seed=args.seed, delta=args.delta, r=args.r)
    write_csv(rows, ("n", "method", "mean_oracle_calls"), args.out)
    if args.n_max > args.n_min:
        for method in ("query", "qpe-sampling"):
            _err(f"{method}: log-log slope {scaling_exponent(rows, method):.3f}")
    return EXIT_OK


def cmd_probcheck(args) -> int:
    if args.shots < 1000:
        raise InvalidInput("shots must be >= 1000")
    if args.N < 2 or not 1 <= args.m <= args.N:
        raise InvalidInput("need N >= 2 and 1 <= m <= N")
    res = probcheck(args.N, args.m, args.shots, args.seed)
    print(f"N={res.N} m={res.m} shots={res.shots}")
    print(f"formula={fmt(res.formula)}")
    print(f"empirical={fmt(res.empirical)}")
    print(f"z={res.z:.3f}")
    return EXIT_OK if abs(res.z) <= 4 else EXIT_NOT_FOUND


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qbeig", description="Eigenvalues near a point via phase estimation + fixed-point search.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="run the solver from a config file")
    s.add_argument("config")
    s.add_argument("--seed", type=int)
    s.add_argument("--r", type=int)
    s.add_argument("--delta", type=float)
    s.add_argument("--epsilon", type=float)
    s.add_argument("--trials", type=int)
    s.add_argument("--strategy", choices=("basis", "random"))
    s.add_argument("--mode", choices=("circuit", "ideal"))
    s.add_argument("--out")
    s.add_argument("--dump-config", metavar="PATH", help="write the effective config here")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reproduce", help="sweep initial states for tables 1-3")
    r.add_argument("table", type=int, choices=(1, 2, 3))
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--r", type=int, default=7)
    r.add_argument("--delta", type=float, default=0.01)
    r.add_argument("--mode", choices=("circuit", "ideal"), default="circuit")
    r.add_argument("--random-states", type=int, default=11)
    r.add_argument("--out")
    r.set_defaults(func=cmd_reproduce)

    b = sub.add_parser("bench", help="oracle-call scaling: query method vs repeated phase estimation")
    b.add_argument("--n-min", type=int, default=2)
    b.add_argument("--n-max", type=int, default=8)
    b.add_argument("--reps", type=int, default=200)
    b.add_argument("--mode", choices=("circuit", "ideal"), default="ideal")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--r", type=int, default=7)
    b.add_argument("--delta", type=float, default=0.01)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bench)

    c = sub.add_parser("probcheck", help="Monte Carlo check of the overlap probability formulas")
    c.add_argument("--N", type=int, default=16)
    c.add_argument("--m", type=int, default=1)
    c.add_argument("--shots", type=int, default=100_000)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=cmd_probcheck)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _err(f"error: {exc}")
        return EXIT_USAGE
    except InvalidInput as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        _err(f"invalid input: {exc}")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
