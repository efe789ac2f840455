"""Command-line entry point: ``frostman {gen,supercover,certify,check,energy,dim}``.

Exit codes: 0 success, 2 hypothesis violated, 3 precondition failure,
4 decay or construction bound violated.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io as _io
import math
import sys
from importlib import metadata


from . import io
from .covering import supercover_bounded, supercover_geometric
from .errors import BoundViolation, FrostmanError, HypothesisError, PreconditionError
from .frostman import (
    FrostmanHypothesis,
    adversarial_search,
    certify_teor1,
    certify_teor2,
    certify_teor3,
    estimate_constant,
)
from .gauge import GaugeFunction
from .measures import (
    RadialProfile,
    cantor_cloud,
    energy_integral,
    energy_trend,
    generate_example,
)

EXIT_OK, EXIT_HYPOTHESIS, EXIT_PRECONDITION, EXIT_DECAY = 0, 2, 3, 4


def tool_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def parse_list(text: str, kind=float) -> list:
    """``"4..8"`` (integers, inclusive), ``"0.1:0.5:0.1"`` (range) or ``"0.5,0.6"``."""
    text = text.strip()
    if ".." in text:
        lo, hi = text.split("..")
        return [kind(v) for v in range(int(lo), int(hi) + 1)]
    if ":" in text:
        lo, hi, step = (float(v) for v in text.split(":"))
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [kind(round(lo + k * step, 12)) for k in range(n)]
    return [kind(v) for v in text.split(",") if v.strip()]


class Run:
    """Collects inputs and outputs of one command for its manifest."""

    def __init__(self, args):
        self.args = args
        self.inputs: dict[str, str] = {}
        self.outputs: list[str] = []

    def read(self, path: str) -> dict:
        with open(path, "rb") as fh:
            raw = fh.read()
        self.inputs[path] = "sha256:" + hashlib.sha256(raw).hexdigest()
        return io.load(path)

    def emit(self, text: str, path: str | None):
        if path:
            io.write_atomic(path, text)
            self.outputs.append(path)
        else:
            sys.stdout.write(text)

    def manifest(self) -> dict:
        args = {k: v for k, v in vars(self.args).items() if k not in ("func", "manifest", "command")}
        return {
            "command": self.args.command,
            "args": args,
            "seed": int(getattr(self.args, "seed", 0) or 0),
            "tool_version": tool_version(),
            "input_hashes": self.inputs,
            "outputs": self.outputs,
        }


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def cmd_gen(args, run: Run) -> int:
    kind = args.kind
    if kind == "cantor":
        mu = generate_example("cantor", level=args.level, dim=args.dim, ratio=args.ratio)
        cloud = cantor_cloud(args.level, args.dim, args.ratio)
    elif kind == "power_law":
        mu = generate_example("power_law", beta=args.beta, n=args.n)
        cloud = mu.support_cloud(1.0 / args.n)
    elif kind == "grid_gradient":
        m = parse_list(args.m, int)
        comps = generate_example("grid_gradient", f=args.f, orders=m, h=args.h, n=args.n, dim=len(m))
        mu = comps[0] if len(comps) == 1 else None
        cloud = None
        if mu is None:
            run.emit(io.dumps({"components": [io.measure_to_json(c) for c in comps]}), args.out)
            return EXIT_OK
    else:
        mu = generate_example("random", seed=args.seed, n=args.n, sign_mix=args.sign_mix, dim=args.dim)
        cloud = mu.support_cloud(args.resolution)
    if args.cloud_out:
        if cloud is None:
            cloud = mu.support_cloud(args.resolution)
        run.emit(io.dumps(io.cloud_to_json(cloud)), args.cloud_out)
    run.emit(io.dumps(io.measure_to_json(mu)), args.out)
    return EXIT_OK


def _gauge_or_alpha(args, run: Run):
    if args.gauge:
        return io.gauge_from_json(run.read(args.gauge))
    if args.alpha is None:
        raise PreconditionError("one of --alpha or --gauge is required")
    return float(args.alpha)


def cmd_supercover(args, run: Run) -> int:
    cloud = io.cloud_from_json(run.read(args.cloud))
    alpha = _gauge_or_alpha(args, run)
    if args.mode == "geometric":
        fam, rep = supercover_geometric(cloud, alpha, args.eps, args.a, seed=args.seed, iterations=args.iterations)
        ok = rep.constants["decay_ok"] and not rep.constants["tail_ratio_violations"]
    else:
        fam, rep = supercover_bounded(cloud, alpha, args.eps, args.a, q=args.q, seed=args.seed,
                                      iterations=args.iterations)
        ok = rep.constants["label_bound_ok"] and rep.constants["sum_bound_ok"]
    ok = ok and rep.valid_supercover and rep.disjoint_labels
    if args.out:
        run.emit(io.dumps(io.family_to_json(fam)), args.out)
        run.emit(io.dumps(rep.to_dict()), args.report)
    else:
        run.emit(io.dumps({"family": io.family_to_json(fam), "report": rep.to_dict()}), args.report)
    return EXIT_OK if ok else EXIT_DECAY


def _default_hypothesis(args, mu, A, alpha, lemma):
    if lemma == "teor3":
        beta = alpha if isinstance(alpha, float) else 1.0
        profile = RadialProfile("power_tail", (beta + 1.0,))
    else:
        profile = RadialProfile("plateau")
    weight = GaugeFunction.power(1.0)
    K = estimate_constant(mu, profile, alpha, weight, seed=args.seed, iterations=args.iters, r_min=A.resolution)
    return FrostmanHypothesis(profile, alpha, weight, max(K, 1e-300))


def cmd_certify(args, run: Run) -> int:
    mu = io.measure_from_json(run.read(args.measure))
    A = io.cloud_from_json(run.read(args.set))
    alpha = _gauge_or_alpha(args, run)
    if args.hypothesis:
        hyp = io.hypothesis_from_json(run.read(args.hypothesis))
        hyp.gauge_sum = alpha
        source = "file"
    else:
        hyp = _default_hypothesis(args, mu, A, alpha, args.lemma)
        source = "adversarial"
    if args.lemma == "teor1":
        cert = certify_teor1(mu, A, alpha, args.eps, hyp, seed=args.seed)
    elif args.lemma == "teor2":
        cert = certify_teor2(mu, A, alpha, args.eps, hyp, seed=args.seed, q=args.q)
    else:
        cert = certify_teor3(mu, A, alpha, args.eps, hyp, seed=args.seed, N=args.N)
    cert.constants["hypothesis_source"] = source
    run.emit(io.dumps(cert.to_dict()), args.out)
    if cert.valid:
        return EXIT_OK
    if any(r.startswith("hypothesis") for r in cert.reasons):
        return EXIT_HYPOTHESIS
    return EXIT_DECAY


def cmd_check(args, run: Run) -> int:
    mu = io.measure_from_json(run.read(args.measure))
    hyp = io.hypothesis_from_json(run.read(args.hypothesis))
    res = adversarial_search(mu, hyp, seed=args.seed, iterations=args.iters, family_size_max=args.family_size)
    violated = res.worst_ratio > 1.0 + 1e-9
    doc = {"worst_ratio": res.worst_ratio, "violated": violated, "witness": io.family_to_json(res.witness)}
    run.emit(io.dumps(doc), args.out)
    return EXIT_HYPOTHESIS if violated else EXIT_OK


def _refinements(args):
    """Measures at successive refinement levels for the energy and dimension sweeps."""
    levels = parse_list(args.levels, int)
    if args.kind == "cantor":
        return levels, [generate_example("cantor", level=L, dim=args.dim, ratio=args.ratio) for L in levels]
    return levels, [generate_example("power_law", beta=args.beta, n=n) for n in levels]


def energy_table(measures, alphas) -> list[dict]:
    rows = []
    for alpha in alphas:
        vals = [energy_integral(m, alpha) for m in measures]
        trend = energy_trend(vals)
        rows.append({"alpha": alpha, **trend})
    return rows


def cmd_energy(args, run: Run) -> int:
    levels, measures = _refinements(args)
    rows = energy_table(measures, parse_list(args.alphas))
    if args.csv:
        buf = _io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["alpha"] + [f"level_{L}" for L in levels] + ["increment_ratio", "verdict"])
        for r in rows:
            writer.writerow([r["alpha"]] + r["values"] + [r["increment_ratio"], r["verdict"]])
        io.write_atomic(args.csv, buf.getvalue())
        run.outputs.append(args.csv)
    run.emit(io.dumps({"levels": levels, "rows": rows}), args.out)
    return EXIT_OK


def dimension_sweep(measures, A, alphas, epsilon, seed=0, iters=1000):
    """Largest alpha whose energy settles over refinements and whose teor1 certificate holds."""
    finest = measures[-1]
    rows = []
    best = None
    for alpha in alphas:
        trend = energy_trend([energy_integral(m, alpha) for m in measures])
        row = {"alpha": alpha, "energy": trend["verdict"], "increment_ratio": trend["increment_ratio"]}
        if trend["verdict"] == "cauchy":
            profile, weight = RadialProfile("plateau"), GaugeFunction.power(1.0)
            K = estimate_constant(finest, profile, alpha, weight, seed=seed, iterations=iters, r_min=A.resolution)
            hyp = FrostmanHypothesis(profile, alpha, weight, max(K, 1e-300))
            try:
                cert = certify_teor1(finest, A, alpha, epsilon, hyp, seed=seed)
                row.update({"constant": K, "certificate": cert.valid, "slack": cert.slack})
            except FrostmanError as exc:
                row.update({"certificate": False, "error": str(exc)})
        else:
            row["certificate"] = None
        if row["energy"] == "cauchy" and row["certificate"]:
            best = alpha
        rows.append(row)
    return best, rows


def cmd_dim(args, run: Run) -> int:
    levels, measures = _refinements(args)
    finest = measures[-1]
    if args.kind == "cantor":
        A = cantor_cloud(levels[-1], args.dim, args.ratio)
    else:
        A = finest.support_cloud(1.0 / levels[-1])
    best, rows = dimension_sweep(measures, A, parse_list(args.alphas), args.eps, seed=args.seed, iters=args.iters)
    if args.csv:
        buf = _io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=["alpha", "energy", "increment_ratio", "certificate", "slack",
                                                 "constant", "error"])
        writer.writeheader()
        for r in rows:
            writer.writerow(r)
        io.write_atomic(args.csv, buf.getvalue())
        run.outputs.append(args.csv)
    run.emit(io.dumps({"estimate": best, "rows": rows}), args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="frostman", description="Covering and Frostman-type certificates on point clouds.")
    p.add_argument("--manifest", help="write the run manifest here instead of stderr")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate an example measure")
    g.add_argument("--kind", required=True, choices=["cantor", "power_law", "grid_gradient", "random"])
    g.add_argument("--level", type=int, default=5)
    g.add_argument("--dim", type=int, default=1)
    g.add_argument("--ratio", type=float, default=1.0 / 3.0)
    g.add_argument("--beta", type=float, default=0.5)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--f", default="x^2", help="expression in x, y, z for grid_gradient")
    g.add_argument("--m", default="1", help="difference order per axis, comma separated")
    g.add_argument("--h", type=float, default=0.1)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sign-mix", type=float, default=0.5)
    g.add_argument("--resolution", type=float, default=1e-12)
    g.add_argument("--out")
    g.add_argument("--cloud-out")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("supercover", help="build a supercovering of a cloud")
    s.add_argument("--cloud", required=True)
    s.add_argument("--alpha", type=float)
    s.add_argument("--gauge")
    s.add_argument("--eps", type=float, required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--mode", choices=["geometric", "bounded"], default="geometric")
    s.add_argument("--q", type=float, default=0.5)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--iterations", type=int, default=100)
    s.add_argument("--out", help="family JSON (report goes to --report or stdout)")
    s.add_argument("--report")
    s.set_defaults(func=cmd_supercover)

    c = sub.add_parser("certify", help="run a certification pipeline")
    c.add_argument("--lemma", required=True, choices=["teor1", "teor2", "teor3"])
    c.add_argument("--measure", required=True)
    c.add_argument("--set", required=True)
    c.add_argument("--alpha", type=float)
    c.add_argument("--gauge")
    c.add_argument("--hypothesis")
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--q", type=float, default=0.5)
    c.add_argument("--N", type=int, default=1)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--iters", type=int, default=2000, help="adversarial iterations when no hypothesis is given")
    c.add_argument("--out")
    c.set_defaults(func=cmd_certify)

    k = sub.add_parser("check", help="stress-test a Frostman hypothesis")
    k.add_argument("--measure", required=True)
    k.add_argument("--hypothesis", required=True)
    k.add_argument("--iters", type=int, default=1000)
    k.add_argument("--seed", type=int, default=0)
    k.add_argument("--family-size", type=int, default=8)
    k.add_argument("--out")
    k.set_defaults(func=cmd_check)

    for name, helptext, fn in (("energy", "energy table over refinement levels", cmd_energy),
                               ("dim", "desk-scale lower dimension estimate", cmd_dim)):
        e = sub.add_parser(name, help=helptext)
        e.add_argument("--kind", choices=["cantor", "power_law"], default="cantor")
        e.add_argument("--levels", default="4..8", help="Cantor levels or power-law atom counts")
        e.add_argument("--dim", type=int, default=1)
        e.add_argument("--ratio", type=float, default=1.0 / 3.0)
        e.add_argument("--beta", type=float, default=0.3)
        e.add_argument("--alphas", default="0.5,0.6,0.7" if name == "energy" else "0.1:1.2:0.1")
        e.add_argument("--seed", type=int, default=0)
        e.add_argument("--csv")
        e.add_argument("--out")
        if name == "dim":
            e.add_argument("--eps", type=float, default=0.1)
            e.add_argument("--iters", type=int, default=1000)
        e.set_defaults(func=fn)
    return p


def _validate(args):
    """Reject bad flag combinations before anything is written."""
    if args.command == "gen":
        if args.n is None:
            args.n = {"power_law": 1000, "grid_gradient": 11, "random": 100}.get(args.kind, 0)
        if args.kind == "power_law" and args.beta >= 1:
            raise PreconditionError(f"beta = {args.beta} >= 1 is not integrable")
    if args.command in ("supercover", "certify"):
        if (args.alpha is None) == (args.gauge is None):
            raise PreconditionError("give exactly one of --alpha or --gauge")
    if args.command == "supercover" and args.out and not args.report:
        raise PreconditionError("--out needs --report for the covering report")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            raise
        # usage errors are precondition failures, not hypothesis violations
        sys.stderr.write(io.dumps({"command": None, "args": {"argv": list(sys.argv[1:] if argv is None else argv)},
                                   "exit_code": EXIT_PRECONDITION}))
        return EXIT_PRECONDITION
    run = Run(args)
    try:
        _validate(args)
        code = args.func(args, run)
    except HypothesisError as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        code = EXIT_HYPOTHESIS
    except BoundViolation as exc:
        print(f"bound violated: {exc}", file=sys.stderr)
        code = EXIT_DECAY
    except (FrostmanError, OSError, KeyError, ValueError) as exc:
        print(f"precondition failure: {exc}", file=sys.stderr)
        code = EXIT_PRECONDITION
    manifest = run.manifest()
    manifest["exit_code"] = code
    if args.manifest:
        io.write_atomic(args.manifest, io.dumps(manifest))
    else:
        sys.stderr.write(io.dumps(manifest))
    return code


if __name__ == "__main__":
    sys.exit(main())
