"""Command-line front end: ``flagsdp <command> ...``.

Exit statuses: 0 success or accepted, 1 rejected, 2 usage error, 3 I/O or
parse error.
"""

from __future__ import annotations

import argparse
import shlex
import subprocess
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import certificate as cert
from . import sdp
from .algebra import QuantumGraph, parse_quantum, to_ind
from .densities import (
    StepGraphon,
    builtin_graphon,
    count_induced,
    is_prime,
    paley_graph,
    parse_graphon,
    step_graphon_of,
    t_hom,
    t_ind_graph,
)
from .graphs import GraphNotationError, automorphism_count, enumerate_flags, enumerate_graphs, format_graph, parse_graph

EXIT_OK, EXIT_REJECTED, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

# best known lower bound for the induced P_4 density (a blow-up of QR(17))
P4_REFERENCE = Fraction(80, 4877)


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[Path] = field(default_factory=list)
    out: Path | None = None
    n: int | None = None
    max_labels: int | None = None
    dedup_types: bool = False
    split: bool = False
    delta: list[str] = field(default_factory=list)
    solver_cmd: str | None = None
    den_cap: int = 10**4
    pin: Path | None = None

    def validate(self) -> None:
        if self.n is not None and not 1 <= self.n <= 7:
            raise UsageError(f"--n must be between 1 and 7, got {self.n}")
        if self.max_labels is not None and self.n is not None and not 1 <= self.max_labels <= self.n:
            raise UsageError(f"--l must be between 1 and N={self.n}, got {self.max_labels}")
        if self.den_cap < 1:
            raise UsageError("--den-cap must be positive")
        for p in self.inputs + ([self.pin] if self.pin else []):
            if not p.is_file():
                raise FileNotFoundError(f"no such file: {p}")
        if self.out is not None and not self.out.parent.is_dir():
            raise FileNotFoundError(f"output directory does not exist: {self.out.parent}")


def load_graphon(spec: str) -> StepGraphon:
    """A graphon file path, or a builtin name such as ``k5`` or ``complement(k2uk2)``."""
    path = Path(spec)
    if path.is_file():
        return parse_graphon(path.read_text())
    return builtin_graphon(spec)


def _decimal(x: Fraction, digits: int = 10) -> str:
    return f"{float(x):.{digits}g}"


# -- commands -------------------------------------------------------------------


def cmd_enumerate(args) -> int:
    if args.sigma is not None:
        if args.m is None:
            raise UsageError("--sigma needs --m")
        sigma = parse_graph(args.sigma)
        if sigma.k != sigma.n:
            raise UsageError("--sigma must be fully labeled")
        graphs = enumerate_flags(sigma, args.m)
    else:
        if args.n is None:
            raise UsageError("enumerate needs --n or --sigma/--m")
        if not 1 <= args.n <= 7:
            raise UsageError("--n must be between 1 and 7")
        graphs = enumerate_graphs(args.n)
    for g in graphs:
        print(f"{format_graph(g)}\t{automorphism_count(g)}")
    return EXIT_OK


def cmd_density(args) -> int:
    h = parse_graph(args.graph)
    w = load_graphon(args.graphon)
    value = t_hom(h, w) if args.kind == "hom" else t_ind_graph(h, w)
    print(f"{value}\t{_decimal(value)}")
    return EXIT_OK


def _target(args) -> QuantumGraph:
    q = parse_quantum(args.target, args.basis)
    if q.k != 0:
        raise UsageError("--target must be unlabeled")
    return to_ind(q) if args.basis == "plain" else q


def cmd_build_sdp(args) -> int:
    cfg = RunConfig(
        "build-sdp",
        out=Path(args.out),
        n=args.n,
        max_labels=args.l,
        dedup_types=args.dedup_types,
        split=args.split,
        delta=args.delta or [],
        solver_cmd=args.solver_cmd,
    )
    cfg.validate()
    if args.reduce and not cfg.solver_cmd:
        raise UsageError("--reduce needs --solver-cmd")
    target = _target(args)
    w0s = [load_graphon(s) for s in cfg.delta]
    bases = sdp.build_bases(cfg.n, cfg.max_labels, cfg.dedup_types, cfg.split, w0s)
    problem = sdp.assemble(
        sdp.objective_for(target, cfg.n), bases, cfg.n, not args.no_nonnegativity, target, args.name
    )
    cfg.out.write_text(sdp.emit_sdpa(problem))
    manifest_path = cfg.out.with_name(cfg.out.name + ".manifest.json")
    manifest_path.write_text(sdp.dump_manifest(problem))
    print(f"wrote {cfg.out} ({len(problem.classes)} variables, blocks {problem.block_sizes})")
    print(f"wrote {manifest_path}")
    if cfg.solver_cmd and args.reduce:
        return _solve_reduced(problem, cfg, args)
    if cfg.solver_cmd:
        sol_path = cfg.out.with_name(cfg.out.name + ".sol")
        command = cfg.solver_cmd.format(input=shlex.quote(str(cfg.out)), output=shlex.quote(str(sol_path)))
        done = subprocess.run(command, shell=True)
        if done.returncode != 0 and not sol_path.exists():
            print(f"solver failed with status {done.returncode}", file=sys.stderr)
            return EXIT_IO
        return _ingest(sol_path, problem, cfg.out.with_name(cfg.out.name + ".cert"), args.name)
    return EXIT_OK


def _solve_reduced(problem: sdp.SdpProblem, cfg: RunConfig, args) -> int:
    stem = cfg.out.stem + "-reduced"
    reduced, s = sdp.facial_reduction(problem, cfg.solver_cmd, cfg.out.parent, args.reduce, stem=stem)
    manifest_path = cfg.out.with_name(stem + ".dat-s.manifest.json")
    manifest_path.write_text(sdp.dump_manifest(reduced))
    print(f"reduced blocks {reduced.block_sizes}; wrote {cfg.out.with_name(stem + '.dat-s')} and {manifest_path}")
    return _ingest(cfg.out.with_name(stem + ".sol"), reduced, cfg.out.with_name(cfg.out.name + ".cert"), args.name)


def _ingest(solution: Path, problem: sdp.SdpProblem, out: Path, name: str | None) -> int:
    s = sdp.parse_solution(solution.read_text(), problem)
    c = sdp.extract_certificate(s, problem, name)
    out.write_text(cert.save_certificate(c))
    print(f"floating bound: {s.bound:.12g}")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_ingest(args) -> int:
    cfg = RunConfig("ingest", inputs=[Path(args.solution), Path(args.manifest)], out=Path(args.out))
    cfg.validate()
    problem = sdp.problem_from_manifest(Path(args.manifest).read_text())
    return _ingest(Path(args.solution), problem, cfg.out, args.name)


def cmd_round(args) -> int:
    cfg = RunConfig(
        "round",
        inputs=[Path(args.certificate)],
        out=Path(args.out),
        den_cap=args.den_cap,
        pin=Path(args.pin) if args.pin else None,
    )
    cfg.validate()
    c = cert.read_certificate(cfg.inputs[0])
    pins = cert.parse_pins(cfg.pin.read_text()) if cfg.pin else {}
    cert.check_pins(c, pins)
    bound = Fraction(args.bound) if args.bound else None
    if args.eigen and args.project:
        raise UsageError("--eigen and --project are alternatives")
    rounder = cert.eigen_round if args.eigen else cert.project_round if args.project else cert.round_to_rational
    rounded = rounder(c, cfg.den_cap, pins, bound)
    cfg.out.write_text(cert.save_certificate(rounded))
    print(f"wrote {cfg.out} (bound {rounded.bound})")
    return EXIT_OK


def cmd_verify(args) -> int:
    cfg = RunConfig("verify", inputs=[Path(args.certificate)])
    cfg.validate()
    c = cert.read_certificate(cfg.inputs[0])
    report = cert.verify(c)
    print(f"certificate: {c.name}, claim t({cert.format_target(c.target)}) <= {c.bound}, N = {c.n}")
    print(report.summary())
    return EXIT_OK if report.accepted else EXIT_REJECTED


def cmd_paley(args) -> int:
    q = args.q
    if not (is_prime(q) and q % 4 == 1 and q <= 17):
        raise UsageError(f"q must be a prime = 1 (mod 4) with q <= 17, got {q}")
    g = paley_graph(q)
    p4 = parse_graph("{ab, bc, cd}_{4,0}")
    value = t_ind_graph(p4, step_graphon_of(g))
    print(f"QR({q}): {g.n} vertices, {g.num_edges} edges")
    print(f"edges: {format_graph(g)}" if q <= 13 else f"edges: {g.num_edges} (not listed)")
    print(f"t_ind(P4; QR({q})) = {value} = {_decimal(value)}")
    print(f"reference lower bound from a blow-up of QR(17): {P4_REFERENCE} = {_decimal(P4_REFERENCE)}")
    print("note: the blow-up itself is not specified, so the reference value is not reproduced here")
    return EXIT_OK


def cmd_oracle(args) -> int:
    h, g = parse_graph(args.pattern), parse_graph(args.host)
    count, density = count_induced(h, g)
    print(f"induced copies: {count}\tdensity: {density}\t{_decimal(density)}")
    return EXIT_OK


# -- parser ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="flagsdp", description="Flag-algebra SDP bounds for induced subgraph densities.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("enumerate", help="list graphs or flags up to isomorphism")
    p.add_argument("--n", type=int)
    p.add_argument("--sigma", help="fully labeled type, e.g. '{}_{1,1}'")
    p.add_argument("--m", type=int, help="flag size for --sigma")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("density", help="exact density of a graph in a step graphon")
    p.add_argument("graph")
    p.add_argument("graphon", help="graphon file or builtin (k5, k2uk2, paley13, 'const 1/2', complement(...))")
    p.add_argument("--kind", choices=("ind", "hom"), default="ind")
    p.set_defaults(func=cmd_density)

    p = sub.add_parser("build-sdp", help="emit the SDP in sparse SDPA format")
    p.add_argument("--target", required=True, help="graph or quantum graph whose density is maximized")
    p.add_argument("--basis", choices=("ind", "plain"), default="ind", help="basis of --target")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--l", type=int, required=True)
    p.add_argument("--dedup-types", action="store_true")
    p.add_argument("--split", action="store_true")
    p.add_argument("--delta", nargs="+", metavar="GRAPHON")
    p.add_argument("--no-nonnegativity", action="store_true", help="omit the x >= 0 rows")
    p.add_argument("--solver-cmd", help="template with {input} and {output}, run after emission")
    p.add_argument("--reduce", type=int, default=0, metavar="ROUNDS", help="facial reduction rounds (re-solves)")
    p.add_argument("--name", default="sdp")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_build_sdp)

    p = sub.add_parser("ingest", help="turn a solver solution into a floating certificate")
    p.add_argument("solution")
    p.add_argument("--manifest", required=True)
    p.add_argument("--name")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("round", help="round a floating certificate to rationals")
    p.add_argument("certificate")
    p.add_argument("--den-cap", type=int, default=10**4)
    p.add_argument("--pin", help="file of 'block i j value' lines (1-based)")
    p.add_argument("--eigen", action="store_true", help="round in each block's eigenbasis (PSD by construction)")
    p.add_argument("--project", action="store_true", help="zero the tight slacks exactly after rounding")
    p.add_argument("--bound", help="exact bound to claim instead of the rounded one")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_round)

    p = sub.add_parser("verify", help="exact verification of a certificate")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("paley", help="induced P4 density of the Paley graph QR(q)")
    p.add_argument("q", type=int)
    p.set_defaults(func=cmd_paley)

    p = sub.add_parser("oracle", help="count induced copies of a pattern in a host graph")
    p.add_argument("pattern")
    p.add_argument("host")
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, GraphNotationError, cert.CertificateFormatError, sdp.SolutionFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (sdp.SdpError, cert.CertificateError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
