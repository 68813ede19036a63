"""Batch front end: construct, estimate, certify, symbolic, compare, partition.

Every run writes its artifacts plus a manifest.json into the --emit directory.
Exit codes: 0 ok, 2 parse, 3 precondition, 4 certificate failed, 5 resource, 6 construction.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import logging
import sys
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

from .errors import LabError, MalformedInputError, PreconditionError
from .intervals import CompactSet, as_fraction, as_rational, fmt_rational, hausdorff
from .partition import Partition, verify_properties
from .perturbation import (ParamSet, PinRecord, construct, random_ball_member, validate_FK, verify_fixg)
from .plmap import PLMap
from . import lab, solenoid, symbolic

log = logging.getLogger("attractorlab")

EXIT_OK, EXIT_CERT = 0, 4


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _q(x) -> dict:
    return {"exact": fmt_rational(x), "approx": float(as_fraction(x))}


class Run:
    """Collects inputs, verdicts and outputs; writes artifacts and the manifest."""

    def __init__(self, args, command: str):
        self.args = args
        self.command = command
        self.out = Path(args.emit)
        self.out.mkdir(parents=True, exist_ok=True)
        self.inputs: dict = {}
        self.config: dict = {}
        self.verdicts: dict = {}
        self.outputs: list = []
        self.notes: list = []

    def read(self, path) -> str:
        p = Path(path)
        try:
            data = p.read_bytes()
        except OSError as exc:
            raise MalformedInputError(f"cannot read {path}: {exc.strerror}") from exc
        self.inputs[str(path)] = hashlib.sha256(data).hexdigest()
        return data.decode()

    def load_map(self, path) -> PLMap:
        return PLMap.from_json(self.read(path))

    def load_json(self, path):
        text = self.read(path)
        try:
            return json.loads(text)
        except json.JSONDecodeError as exc:
            raise MalformedInputError(f"{path}: JSON parse error at line {exc.lineno} col {exc.colno}: {exc.msg}") from exc

    def emit_json(self, name: str, obj) -> None:
        body = dict(obj) if isinstance(obj, dict) else {"data": obj}
        body["manifest"] = "manifest.json"
        (self.out / name).write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")
        self.outputs.append(name)

    def emit_rows(self, stem: str, rows: list[dict]) -> None:
        """Tabular output in the --format chosen (csv carries the manifest in a comment line)."""
        if self.args.format == "csv":
            buf = io.StringIO()
            buf.write("# manifest: manifest.json\n")
            if rows:
                w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
                w.writeheader()
                w.writerows(rows)
            name = stem + ".csv"
            (self.out / name).write_text(buf.getvalue())
            self.outputs.append(name)
        else:
            self.emit_json(stem + ".json", {"rows": rows})

    def verdict(self, name: str, ok) -> bool:
        self.verdicts[name] = bool(ok)
        return bool(ok)

    def finish(self) -> int:
        manifest = {
            "command": self.command,
            "inputs": dict(sorted(self.inputs.items())),
            "seed": self.args.seed,
            "config": self.config,
            "tool_version": _version(),
            "verdicts": self.verdicts,
            "outputs": self.outputs,
            "notes": self.notes,
            "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        }
        (self.out / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
        return EXIT_OK if all(self.verdicts.values()) else EXIT_CERT


def _estimator_config(args, run: Run) -> lab.EstimatorConfig:
    kw = {}
    if args.config:
        kw = run.load_json(args.config)
        if not isinstance(kw, dict):
            raise MalformedInputError("estimator config must be a JSON object")
    for name in ("samples", "N", "r", "eps", "delta", "tau", "burn_in", "workers"):
        v = getattr(args, name, None)
        if v is not None:
            kw[name] = v
    if getattr(args, "stratified", False):
        kw["stratified"] = True
    kw.setdefault("seed", args.seed)
    kw.setdefault("precision_bits", args.precision_bits)
    try:
        cfg = lab.EstimatorConfig.from_json(kw)
    except TypeError as exc:
        raise MalformedInputError(f"bad estimator config: {exc}") from exc
    run.config["estimator"] = cfg.to_json()
    return cfg


# -- commands -------------------------------------------------------------------------------------


def cmd_construct(args) -> int:
    run = Run(args, "construct")
    f = run.load_map(args.map)
    run.config.update({"K": args.K, "gamma0": fmt_rational(as_rational(args.gamma)), "m_cap": args.m_cap,
                       "piece_cap": args.piece_cap})
    verdict = validate_FK(f, args.K)
    run.verdict("seed map in F_K", verdict.passed)
    if not verdict.passed:
        run.notes.extend(verdict.reasons)
        run.finish()
        raise PreconditionError("; ".join(verdict.reasons))
    C = construct(f, args.K, as_rational(args.gamma), m_cap=args.m_cap, piece_cap=args.piece_cap)
    p = C.params
    run.config["gamma"] = fmt_rational(p.gamma)
    if p.gamma_halvings:
        run.notes.append(f"gamma shrunk {p.gamma_halvings} time(s) from {fmt_rational(p.gamma0)} to {fmt_rational(p.gamma)}")
    if C.retries:
        run.notes.append(f"pin collision: m_K raised {C.retries} time(s)")
    run.emit_json("tilde.json", C.tilde.to_json())
    run.emit_json("hat.json", C.hat.to_json())
    run.emit_json("params.json", {"params": p.to_json(), "certificates": [c.to_json() for c in C.certificates]})
    run.emit_json("pins.json", {"pins": [pin.to_json() for pin in C.pins]})
    for c in C.certificates:
        run.verdict(c.name, c.holds)
    if args.sample_g:
        g = random_ball_member(C.hat, p.rho, args.seed)
        rep = verify_fixg(g, C.hat, p, C.partition, C.pins, check_plain=True)
        run.verdict("g in rho-ball with block containments", rep.passed)
        run.emit_json("g.json", g.to_json())
    return run.finish()


def _load_construction(run: Run, d: Path):
    hat = PLMap.from_json(run.read(d / "hat.json"))
    params = ParamSet.from_json(run.load_json(d / "params.json")["params"])
    pins = [PinRecord.from_json(x) for x in run.load_json(d / "pins.json")["pins"]]
    return hat, params, pins


def cmd_certify(args) -> int:
    run = Run(args, "certify")
    g = run.load_map(args.map)
    if args.certificate:
        data = run.read(args.certificate)
        cert = solenoid.verify_certificate(g, solenoid.SolenoidCertificate.from_json(data), strict=not args.weak)
    elif args.construction:
        hat, params, pins = _load_construction(run, Path(args.construction))
        P = Partition(params.m_K)
        rep = verify_fixg(g, hat, params, P, pins, check_plain=True)
        run.verdict("g in rho-ball with block containments", rep.passed)
        cert = solenoid.certificate_from_construction(g, [(P, pins)])
    else:
        raise MalformedInputError("certify needs --certificate or --construction")
    run.config["strict"] = not args.weak
    for i, lv in enumerate(cert.levels):
        run.verdict(f"level {i} cycles", lv.cycle_ok)
        run.verdict(f"level {i} forward invariant", lv.invariant_ok)
        run.verdict(f"level {i} nested", lv.nesting_ok)
    run.verdict("diameters strictly decreasing", solenoid.strictly_decreasing(cert.diam_trend))
    run.emit_json("certificate.json", cert.to_json())
    return run.finish()


def cmd_estimate(args) -> int:
    run = Run(args, "estimate")
    f = run.load_map(args.map)
    cfg = _estimator_config(args, run)
    run.config["kind"] = args.kind
    if args.kind in ("omega", "sigma"):
        if args.x0 is None:
            raise MalformedInputError(f"--x0 is required for {args.kind}")
        x0 = as_rational(args.x0)
        run.config["x0"] = fmt_rational(x0)
        st = lab.sample_orbit(f, x0, cfg.N, cfg.precision_bits, cfg.r, cfg.schedule)
        bins = lab.omega_bins(st, cfg.burn_in) if args.kind == "omega" else lab.sigma_bins(st, cfg.tau)
        est = lab.bins_to_set(bins, cfg.nbins)
        if args.format == "csv":
            run.emit_rows("orbit_stats", list(csv.DictReader(io.StringIO(st.to_csv()))))
    elif args.kind == "essential":
        if not args.U:
            raise MalformedInputError("--U (JSON list of [lo, hi]) is required for essential")
        U = CompactSet.from_json(args.U)
        rep = lab.essential_test(f, U, cfg)
        run.verdict("recheck", rep.recheck())
        run.emit_json("essential.json", {
            "U": U.to_json(), "verdict": rep.verdict, "eps": fmt_rational(rep.eps), "delta": fmt_rational(rep.delta),
            "horizons": list(rep.horizons), "fractions": [_q(x) for x in rep.fractions]})
        return run.finish()
    else:
        est = {"milnor": lab.milnor_estimate, "stat": lab.stat_attractor_estimate,
               "phys": lab.phys_attractor_estimate}[args.kind](f, cfg)
    run.emit_json("estimate.json", {"kind": args.kind, "set": est.to_json(), "measure": _q(est.measure) if est else _q(0)})
    return run.finish()


def cmd_compare(args) -> int:
    run = Run(args, "compare")
    f = run.load_map(args.map)
    cfg = _estimator_config(args, run)
    est = lab.estimate_all(f, cfg)
    sets = {"milnor": est.milnor, "stat": est.stat, "phys": est.phys}
    dist = {}
    for a_name, b_name in (("milnor", "stat"), ("milnor", "phys"), ("stat", "phys")):
        A, B = sets[a_name], sets[b_name]
        dist[f"{a_name}-{b_name}"] = _q(hausdorff(A, B)) if A and B else None
    chain = est.chain()
    for k, v in chain.items():
        run.verdict(k, v)
    report = {"chain": chain, "distances": dist, "sets": {k: v.to_json() for k, v in sets.items()},
              "r": fmt_rational(cfg.r)}
    if args.certificate:
        cert = solenoid.SolenoidCertificate.from_json(run.read(args.certificate))
        U = cert.levels[0].union
        d = hausdorff(est.milnor, U) if est.milnor else None
        report["milnor_vs_certificate"] = _q(d) if d is not None else None
        run.verdict("d_H(milnor, certificate) <= 2r", d is not None and d <= 2 * as_rational(cfg.r))
    run.emit_json("compare.json", report)
    return run.finish()


def cmd_symbolic(args) -> int:
    run = Run(args, "symbolic")
    c = symbolic.CSeq.parse(args.c)
    plan = symbolic.BlockPlan(c, n_max=args.nmax, shift=args.shift)
    run.config.update({"c": args.c, "nmax": args.nmax, "shift": args.shift, "max_len": args.max_len, "K": args.K})
    rows = symbolic.frequency_rows(plan, args.nmax, args.max_len)
    if args.format == "csv":
        run.emit_rows("freq", rows)
    else:
        run.emit_json("freq.json", {"rows": rows})
    sv = symbolic.sigma_symbolic(plan, args.K, args.nmax)
    run.verdict("sigma bounds", sv.passed)
    run.emit_json("sigma.json", {
        "K": sv.K, "zeros_ok": sv.zeros_ok, "ones_ok": sv.ones_ok, "nonconstant_ok": sv.nonconstant_ok,
        "zeros": [{"n": n, "count": str(cn), "freq": fmt_rational(fr), "lower": str(lb)} for n, cn, fr, lb in sv.zeros],
    })
    return run.finish()


def cmd_partition(args) -> int:
    run = Run(args, "partition")
    P = Partition(args.m)
    rep = verify_properties(P, args.n)
    run.config.update({"m": args.m, "n": rep.n})
    for k, v in rep.as_dict().items():
        run.verdict(k, v)
    body = {"properties": rep.as_dict()}
    if args.blocks:
        body["partition"] = P.to_json()
    else:
        body.update({"m": P.m, "M": P.M, "eta": fmt_rational(P.eta)})
    run.emit_json("partition.json", body)
    return run.finish()


# -- parser ------------------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="attractorlab", description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--precision-bits", type=int, default=lab.DEFAULT_PRECISION_BITS)
    ap.add_argument("--piece-cap", type=int, default=10**6)
    ap.add_argument("--emit", default=".", help="output directory")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build tilde/hat maps with exact certificates")
    p.add_argument("--map", required=True)
    p.add_argument("--K", type=int, default=1)
    p.add_argument("--gamma", default="1/8")
    p.add_argument("--m-cap", type=int, default=24)
    p.add_argument("--sample-g", action="store_true", help="also emit a seeded map g in the rho-ball")
    p.set_defaults(func=cmd_construct)

    def est_opts(p):
        p.add_argument("--map", required=True)
        p.add_argument("--config")
        p.add_argument("--samples", type=int)
        p.add_argument("--N", type=int)
        p.add_argument("--r")
        p.add_argument("--eps")
        p.add_argument("--delta")
        p.add_argument("--tau")
        p.add_argument("--burn-in", dest="burn_in", type=int)
        p.add_argument("--workers", type=int)
        p.add_argument("--stratified", action="store_true")

    p = sub.add_parser("estimate", help="omega/sigma for one orbit, or milnor/stat/phys/essential")
    est_opts(p)
    p.add_argument("--what", "--kind", dest="kind", choices=("omega", "sigma", "milnor", "stat", "phys", "essential"), default="milnor")
    p.add_argument("--x0")
    p.add_argument("--U")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("compare", help="milnor/stat/phys on one map with the inclusion chain")
    est_opts(p)
    p.add_argument("--certificate")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("certify", help="verify a solenoid certificate")
    p.add_argument("--map", required=True)
    p.add_argument("--certificate")
    p.add_argument("--construction", help="directory written by construct")
    p.add_argument("--weak", action="store_true", help="closed instead of interior containment")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("symbolic", help="exact word frequencies of x_c")
    p.add_argument("--c", default="(1)")
    p.add_argument("--nmax", type=int, default=3)
    p.add_argument("--shift", type=int, default=symbolic.DEFAULT_SHIFT)
    p.add_argument("--max-len", type=int, default=2)
    p.add_argument("--K", type=int, default=1)
    p.set_defaults(func=cmd_symbolic)

    p = sub.add_parser("partition", help="build P_m and check its six properties")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--blocks", action="store_true", help="include every block in the report")
    p.set_defaults(func=cmd_partition)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except LabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
