"""Command-line entry point and reproducible run manifests.

Every artifact embeds the manifest that produced it: the exact argv,
normalized parameters, seed and generator, precision settings, library
version, input-file digests, and the run timestamp.  ``rerun`` replays
a manifest (carrying over its original timestamp), which makes the
regenerated artifact byte-identical to the original; this is the
determinism contract the test suite pins down.

Exit codes: 0 success, 2 precondition/usage violations, 3 precision-cap
or otherwise undecidable outcomes.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

from . import __version__
from .certreal import CertReal, as_certreal
from .conditions import FrequencyView, bc_margins, lc_margins, margins_csv, nc_profile
from .construct import ConstructParams, perturb_system
from .diophantine import best_approximations, mu_estimate, scatter_csv
from .exceptions import (
    CertificateFailure,
    DomainNotCertified,
    OrderingUndecided,
    PrecisionCapExceeded,
    WindowExhausted,
)
from .hardy import helson_demo
from .randomsys import (
    GENERATOR_NAME,
    a_event_sweep,
    b_event_sweep,
    box_property_certified,
    density_fit,
    exp_sum_deviation,
    pairwise_gap_audit,
    remove_exceptional,
    sample_grid,
    sample_primes,
)
from .serial import canonical_json, certreal_payload, sha256_hex
from .systems import (
    PrimeSystem,
    Provenance,
    classical_primes,
    count_functions,
    enumerate_integers,
    min_gap_exponent,
)
from .zeta import DensityEnvelope, PrimeCountEnvelope, log_zeta, z_eval, zeta_euler, zeta_sum

EXIT_OK = 0
EXIT_PRECONDITION = 2
EXIT_UNDECIDED = 3


@dataclass
class RunManifest:
    command: str
    argv: List[str]
    parameters: dict
    seed: Optional[int]
    generator: str
    precision_bits: int
    precision_cap: int
    library_version: str
    timestamp: str
    input_digests: dict

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "argv": list(self.argv),
            "parameters": self.parameters,
            "seed": self.seed,
            "generator": self.generator,
            "precision_bits": self.precision_bits,
            "precision_cap": self.precision_cap,
            "library_version": self.library_version,
            "timestamp": self.timestamp,
            "input_digests": self.input_digests,
        }


def load_primes_file(path: str) -> PrimeSystem:
    """One decimal literal per line, '#' comments, strictly increasing."""
    primes = []
    labels = []
    text = Path(path).read_text(encoding="utf-8")
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            primes.append(CertReal.from_decimal(line))
        except Exception as exc:
            raise ValueError(f"{path}:{ln}: malformed decimal literal {line!r}") from exc
        labels.append(line)
    if not primes:
        raise ValueError(f"{path}: no primes found")
    return PrimeSystem(primes, labels=labels,
                       provenance=Provenance("explicit", {"path": str(path)}))


def _digest(path: Optional[str]) -> dict:
    if path is None:
        return {}
    return {str(path): sha256_hex(Path(path).read_bytes())}


def _timestamp() -> str:
    return datetime.datetime.now(datetime.timezone.utc).strftime(
        "%Y-%m-%dT%H:%M:%SZ")


def _write_artifact(payload: dict, out: Optional[str]) -> None:
    text = canonical_json(payload)
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")


def _write_csv(text: str, manifest: RunManifest, out: Optional[str]) -> None:
    header = "# manifest=" + json.dumps(manifest.to_json(), sort_keys=True,
                                        separators=(",", ":")) + "\n"
    body = header + text
    if out is None:
        sys.stdout.write(body)
    else:
        Path(out).write_text(body, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="beurling",
        description="Beurling prime systems: enumeration, gap conditions, "
                    "zeta evaluation, perturbation and sampling experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded=False):
        p.add_argument("--precision-bits", type=int, default=128)
        p.add_argument("--precision-cap", type=int, default=4096)
        p.add_argument("--out", type=str, default=None)
        p.add_argument("--format", choices=("json", "csv"), default="json")
        if seeded:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("gen", help="enumerate the integers of a prime system")
    p.add_argument("--primes-file", type=str, default=None)
    p.add_argument("--classical", type=float, default=None,
                   help="use ordinary primes up to this limit")
    p.add_argument("--limit", type=float, required=True)
    common(p)

    p = sub.add_parser("conditions", help="gap-condition margin profiles")
    p.add_argument("--primes-file", type=str, default=None)
    p.add_argument("--classical", type=float, default=None)
    p.add_argument("--limit", type=float, required=True)
    p.add_argument("--bc", type=str, default=None, metavar="c1,c2")
    p.add_argument("--lc", type=str, default=None, metavar="c,delta")
    p.add_argument("--nc", type=str, default=None, metavar="n1,n2",
                   help="profile range of starting indices")
    common(p)

    p = sub.add_parser("zeta", help="evaluate the zeta function and companions")
    p.add_argument("--primes-file", type=str, default=None)
    p.add_argument("--classical", type=float, default=None)
    p.add_argument("--mode", choices=("euler", "sum", "log", "Z"), default="euler")
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--cutoff", type=float, default=None)
    p.add_argument("--limit", type=float, default=None,
                   help="snapshot bound for the sum mode")
    p.add_argument("--envelope-K", type=float, default=None)
    p.add_argument("--envelope-a", type=float, default=None)
    p.add_argument("--envelope-b", type=float, default=None)
    common(p)

    p = sub.add_parser("perturb", help="perturb a target system with certificates")
    p.add_argument("--primes-file", type=str, default=None)
    p.add_argument("--classical", type=float, default=None)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--cutoff", type=float, default=10_000.0)
    p.add_argument("--sigma-inf", type=str, default="auto")
    p.add_argument("--epsilon", type=float, default=None)
    common(p, seeded=True)

    p = sub.add_parser("sample", help="randomized inverse-li construction")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--sweep", type=str, default=None, metavar="K,J,M",
                   help="event ranges: k_max, j cap, m_max")
    p.add_argument("--cutoff", type=float, default=None,
                   help="snapshot bound for B-events and audits")
    common(p, seeded=True)

    p = sub.add_parser("dioph", help="best Beurling-rational approximations")
    p.add_argument("--target", type=str, required=True)
    p.add_argument("--limit", type=float, required=True)
    p.add_argument("--primes-file", type=str, default=None)
    p.add_argument("--classical", type=float, default=None)
    p.add_argument("--top-k", type=int, default=10)
    common(p)

    p = sub.add_parser("helson", help="outer-function counterexample demo")
    p.add_argument("--count", type=int, default=60)
    p.add_argument("--epsilon", type=float, default=0.25)
    p.add_argument("--limits", type=str, default="10,100,1000")
    p.add_argument("--s-eval", type=str, default="1.0")
    common(p, seeded=True)

    p = sub.add_parser("rerun", help="replay a manifest byte-identically")
    p.add_argument("--manifest", type=str, required=True,
                   help="a previous artifact (or bare manifest) JSON file")
    p.add_argument("--out", type=str, default=None)
    return parser


def _resolve_system(args) -> PrimeSystem:
    if getattr(args, "primes_file", None):
        return load_primes_file(args.primes_file)
    if getattr(args, "classical", None) is not None:
        return classical_primes(args.classical)
    raise ValueError("either --primes-file or --classical is required")


def _parse_pair(text, what):
    try:
        a, b = text.split(",")
        return float(a), float(b)
    except Exception as exc:
        raise ValueError(f"malformed {what}: {text!r}") from exc


def parse_target(text: str) -> CertReal:
    """Small expression parser: pi, e, sqrt(k), log(k), decimals, p/q."""
    text = text.strip()
    if text == "pi":
        return CertReal.pi()
    if text == "e":
        return CertReal.e()
    if text.startswith("sqrt(") and text.endswith(")"):
        return CertReal.from_decimal(text[5:-1]).sqrt()
    if text.startswith("log(") and text.endswith(")"):
        return CertReal.from_decimal(text[4:-1]).log()
    if "/" in text:
        num, den = text.split("/", 1)
        from fractions import Fraction
        return as_certreal(Fraction(int(num), int(den)))
    return CertReal.from_decimal(text)


def _make_manifest(args, argv, timestamp=None) -> RunManifest:
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "out") and v is not None}
    return RunManifest(
        command=args.command,
        argv=list(argv),
        parameters={k: (v if isinstance(v, (int, float, str, bool)) else str(v))
                    for k, v in params.items()},
        seed=getattr(args, "seed", None),
        generator=GENERATOR_NAME,
        precision_bits=getattr(args, "precision_bits", 128),
        precision_cap=getattr(args, "precision_cap", 4096),
        library_version=__version__,
        timestamp=timestamp if timestamp is not None else _timestamp(),
        input_digests=_digest(getattr(args, "primes_file", None)),
    )


# -- subcommand bodies ----------------------------------------------------


def _run_gen(args, manifest: RunManifest) -> None:
    system = _resolve_system(args)
    snap = enumerate_integers(system, args.limit, max_bits=args.precision_cap)
    n, pi = count_functions(snap, as_certreal(args.limit),
                            max_bits=args.precision_cap)
    gap = min_gap_exponent(snap, 0, max_bits=args.precision_cap) \
        if len(snap) > 1 else None
    payload = {
        "manifest": manifest.to_json(),
        "snapshot": snap.to_json(),
        "counts": {"N": n, "pi": pi},
        "min_gap": None if gap is None else
            {"value": gap.value.to_float(), "index": gap.index},
    }
    if args.format == "csv":
        lines = ["n,value"]
        for i, e in enumerate(snap.entries, start=1):
            lines.append(f"{i},{e.value.to_float()!r}")
        _write_csv("\n".join(lines) + "\n", manifest, args.out)
        return
    _write_artifact(payload, args.out)


def _run_conditions(args, manifest: RunManifest) -> None:
    system = _resolve_system(args)
    snap = enumerate_integers(system, args.limit, max_bits=args.precision_cap)
    view = FrequencyView.from_snapshot(snap)
    reports = {}
    csv_text = None
    if args.bc:
        c1, c2 = _parse_pair(args.bc, "--bc")
        rep = bc_margins(view, as_certreal(c1), as_certreal(c2),
                         max_bits=args.precision_cap)
        reports["bc"] = rep.to_json()
        csv_text = margins_csv(view, rep)
    if args.lc:
        c, delta = _parse_pair(args.lc, "--lc")
        rep = lc_margins(view, as_certreal(c), as_certreal(delta),
                         max_bits=args.precision_cap)
        reports["lc"] = rep.to_json()
        if csv_text is None:
            csv_text = margins_csv(view, rep)
    if args.nc:
        n1, n2 = (int(v) for v in _parse_pair(args.nc, "--nc"))
        entries = []
        for n in range(n1, min(n2, len(view) - 1) + 1):
            res = nc_profile(view, n, max_bits=args.precision_cap)
            entries.append({"n": n, "value": res.value.to_float(),
                            "argmin_m": res.argmin_m,
                            "upper_bound_only": res.upper_bound_only})
        reports["nc"] = entries
    if not reports:
        raise ValueError("request at least one of --bc/--lc/--nc")
    if args.format == "csv":
        if csv_text is None:
            raise ValueError("csv output needs a margin profile (--bc or --lc)")
        _write_csv(csv_text, manifest, args.out)
        return
    _write_artifact({"manifest": manifest.to_json(), "reports": reports}, args.out)


def _run_zeta(args, manifest: RunManifest) -> None:
    system = _resolve_system(args)
    s = complex(args.sigma, args.t)
    evaluations = []
    if args.mode == "euler":
        env = PrimeCountEnvelope(args.envelope_K) if args.envelope_K is not None else None
        ev = zeta_euler(system, s, prime_cutoff=args.cutoff, envelope=env,
                        max_bits=args.precision_cap)
    elif args.mode == "sum":
        if args.limit is None:
            raise ValueError("sum mode needs --limit")
        snap = enumerate_integers(system, args.limit, max_bits=args.precision_cap)
        env = None
        if args.envelope_a is not None and args.envelope_b is not None:
            env = DensityEnvelope(args.envelope_a, args.envelope_b)
        ev = zeta_sum(snap, s, envelope=env, max_bits=args.precision_cap)
    elif args.mode == "log":
        env = PrimeCountEnvelope(args.envelope_K) if args.envelope_K is not None else None
        ev = log_zeta(system, s, prime_cutoff=args.cutoff, envelope=env,
                      max_bits=args.precision_cap)
    else:
        env = PrimeCountEnvelope(args.envelope_K) if args.envelope_K is not None else None
        ev = z_eval(system, s, prime_cutoff=args.cutoff, envelope=env,
                    max_bits=args.precision_cap)
    evaluations.append(ev.to_json())
    _write_artifact({"manifest": manifest.to_json(), "evaluations": evaluations},
                    args.out)


def _run_perturb(args, manifest: RunManifest) -> None:
    system = _resolve_system(args)
    sigma_inf = None if args.sigma_inf == "auto" else float(args.sigma_inf)
    params = ConstructParams(A=args.A, cutoff=args.cutoff, seed=args.seed,
                             sigma_inf=sigma_inf, epsilon=args.epsilon,
                             max_bits=args.precision_cap)
    result = perturb_system(system, params)
    payload = {
        "manifest": manifest.to_json(),
        "params": {"A": args.A, "cutoff": args.cutoff,
                   "sigma_inf": result.sigma_inf, "epsilon": result.epsilon,
                   "x0": result.x0, "seed": args.seed},
        "primes": [certreal_payload(p, dps=50) for p in result.system.primes],
        "certificate": result.certificate.to_json(),
        "steps": [s.to_json() for s in result.steps],
    }
    _write_artifact(payload, args.out)


def _parse_sweep(text, count):
    if text is None:
        return min(count, 20), 3, 10
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"malformed --sweep: {text!r}")
    return int(parts[0]), int(parts[1]), int(parts[2])


def _run_sample(args, manifest: RunManifest) -> None:
    k_max, j_cap, m_max = _parse_sweep(args.sweep, args.count)
    k_max = min(k_max, args.count)
    system = sample_primes(args.seed, args.count)
    grid = sample_grid(max(args.count, k_max))
    box_ok = box_property_certified(system, max_bits=args.precision_cap)
    if not box_ok:
        raise CertificateFailure("box property violated (unsound sampling)")

    a_records = a_event_sweep(system, grid, k_max, m_max) if k_max >= 1 else []
    cutoff = args.cutoff if args.cutoff is not None else max(
        500.0, system.primes[-1].to_float() * 1.5)
    b_records = b_event_sweep(system, args.A, cutoff, grid=grid, k_max=k_max,
                              max_bits=args.precision_cap)
    thinned = remove_exceptional(system, b_records, max_bits=args.precision_cap)

    deviations = []
    for k in (max(1, k_max // 2), k_max):
        for t in (0.0, 7.5):
            deviations.append(exp_sum_deviation(
                system, grid.x(k), t, grid=grid).to_json())

    snap = enumerate_integers(system, cutoff, max_bits=args.precision_cap)
    audit = pairwise_gap_audit(snap, args.A, max_bits=args.precision_cap) \
        if len(snap) > 1 else None
    density = density_fit(snap) if len(snap) >= 100 else None

    payload = {
        "manifest": manifest.to_json(),
        "system": system.to_json(),
        "box_property": box_ok,
        "events": {
            "A": [r.to_json() for r in a_records],
            "B": [r.to_json() for r in b_records],
            "removed_indices": sorted({r.k for r in b_records if r.triggered}),
            "post_removal_count": len(thinned.primes),
        },
        "deviations": deviations,
        "gap_audit": None if audit is None else audit.to_json(),
        "density": None if density is None else density.to_json(),
    }
    if args.format == "csv":
        lines = ["kind,k,index,statistic,threshold,triggered"]
        for r in a_records + b_records:
            lines.append(f"{r.kind},{r.k},{r.index},{r.statistic!r},"
                         f"{r.threshold!r},{int(r.triggered)}")
        _write_csv("\n".join(lines) + "\n", manifest, args.out)
        return
    _write_artifact(payload, args.out)


def _run_dioph(args, manifest: RunManifest) -> None:
    system = _resolve_system(args)
    snap = enumerate_integers(system, args.limit, max_bits=args.precision_cap)
    target = parse_target(args.target)
    best = best_approximations(target, snap, top_k=args.top_k,
                               max_bits=args.precision_cap)
    mu = None
    mu_csv = None
    exact = any(r.exact_hit for r in best)
    if not exact and len(snap) > 50:
        est = mu_estimate(target, snap, max_bits=args.precision_cap)
        mu = est.to_json()
        mu_csv = scatter_csv(est)
    payload = {
        "manifest": manifest.to_json(),
        "target": args.target,
        "best": [r.to_json() for r in best],
        "mu": mu,
    }
    if args.format == "csv":
        if mu_csv is None:
            raise ValueError("csv output needs a scatter (non-exact target)")
        _write_csv(mu_csv, manifest, args.out)
        return
    _write_artifact(payload, args.out)


def _run_helson(args, manifest: RunManifest) -> None:
    limits = [float(v) for v in args.limits.split(",")]
    s_evals = [float(v) for v in args.s_eval.split(",")]
    system = sample_primes(args.seed, args.count)
    snap = enumerate_integers(system, max(limits), max_bits=args.precision_cap)
    report = helson_demo(snap, args.epsilon, limits, s_eval_list=s_evals,
                         max_bits=args.precision_cap)
    _write_artifact({"manifest": manifest.to_json(), "report": report.to_json()},
                    args.out)


_RUNNERS = {
    "gen": _run_gen,
    "conditions": _run_conditions,
    "zeta": _run_zeta,
    "perturb": _run_perturb,
    "sample": _run_sample,
    "dioph": _run_dioph,
    "helson": _run_helson,
}


def _run_rerun(args) -> None:
    payload = json.loads(Path(args.manifest).read_text(encoding="utf-8"))
    manifest_json = payload.get("manifest", payload)
    argv = list(manifest_json["argv"])
    parser = build_parser()
    replay = parser.parse_args(argv)
    if args.out is not None:
        replay.out = args.out
    manifest = _make_manifest(replay, argv, timestamp=manifest_json["timestamp"])
    _RUNNERS[replay.command](replay, manifest)


def dispatch(argv: List[str]) -> int:
    """Run one invocation; returns the exit status (artifacts on disk)."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "rerun":
            _run_rerun(args)
        else:
            manifest = _make_manifest(args, argv)
            _RUNNERS[args.command](args, manifest)
    except (OrderingUndecided, PrecisionCapExceeded, WindowExhausted,
            CertificateFailure, DomainNotCertified) as exc:
        print(f"error (undecided/precision): {exc}", file=sys.stderr)
        return EXIT_UNDECIDED
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    return EXIT_OK


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
