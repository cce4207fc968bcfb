"""Command-line interface.

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 failed suite.
Reports go to stdout as JSON, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import channel as ch
from . import files, linalg, monotones, preorder, verify
from .povm import InvalidPovm, classify, random_povm, random_sharp_povm, random_trivial_povm

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_SUITE = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def fuzzifying_doc(op: ch.FuzzifyingOperation) -> dict:
    return {
        "mu": op.mu,
        "dist": op.dist,
        "in_dim": op.in_dim,
        "out_dim": op.out_dim,
        "choi": files.encode_matrix(op.channel.choi),
    }


def _emit(doc, out):
    out.write(files.dumps(doc) + "\n")


def cmd_validate(args, out):
    p = files.load_povm(args.file)
    _emit({"valid": True, "dim": p.dim, "outcomes": p.outcomes}, out)


def cmd_classify(args, out):
    c = classify(files.load_povm(args.file))
    doc = {k: v for k, v in c.as_dict().items() if k != "unit_eigenvectors"}
    if c.unit_eigenvectors is not None:
        doc["eigenvectors"] = [[[float(z.real), float(z.imag)] for z in v] for v in c.unit_eigenvectors]
    _emit(doc, out)


def cmd_corr(args, out):
    p, z = files.load_povm(args.p), files.load_povm(args.z)
    if args.state:
        rho = files.density_from_doc(files.load_json(args.state))
        try:
            rho = linalg.density(rho)
        except ValueError as exc:
            raise files.FormatError(f"state: {exc}") from exc
        value = monotones.degree_of_correlation(p, z, rho)
        _emit({"state": "file", "jointly_distributed": value is not None, "value": value}, out)
    else:
        _emit({"state": "uniform", "jointly_distributed": True,
               "value": monotones.uniform_correlation(p, z)}, out)


def cmd_tune(args, out):
    p, z = files.load_povm(args.p), files.load_povm(args.z)
    rep = monotones.tuning_degree(p, z)
    _emit({"value": rep.value, "gap": rep.gap, "trivial_bound": rep.lower, "guessing_bound": rep.upper,
           "optimizer": fuzzifying_doc(rep.optimizer)}, out)


def cmd_guess(args, out):
    rep = monotones.optimal_guessing(files.load_povm(args.z))
    _emit({"value": rep.value, "dual_value": rep.dual_value, "gap": rep.gap,
           "certificate_trace": float(np.trace(rep.certificate).real),
           "measurement": files.povm_to_doc(rep.measurement)}, out)


def verdict_doc(v: preorder.ConvertibilityVerdict) -> dict:
    doc = {"status": v.status, "violation": v.violation, "residual": v.residual}
    if v.transformation is not None:
        doc["transformation"] = fuzzifying_doc(v.transformation)
    if v.witness is not None:
        w = v.witness
        doc["witness"] = {"lhs": w.lhs, "rhs": w.rhs, "margin": w.margin, "beta": w.beta,
                          "reference": files.povm_to_doc(w.reference)}
    return doc


def cmd_compare(args, out):
    p, q = files.load_povm(args.p), files.load_povm(args.q)
    if p.outcomes != q.outcomes:
        raise files.FormatError(f"outcome counts differ: {p.outcomes} vs {q.outcomes}")
    _emit(verdict_doc(preorder.is_sharper(p, q)), out)


def cmd_robustness(args, out):
    rep = monotones.tunability_robustness(files.load_povm(args.file), refs=args.refs, seed=args.seed)
    _emit({"lower": rep.lower, "upper": rep.upper, "exact": rep.exact, "methods": rep.methods,
           "reference": files.povm_to_doc(rep.reference) if rep.reference is not None else None}, out)


def cmd_random(args, out):
    makers = {"general": random_povm, "sharp": random_sharp_povm, "trivial": random_trivial_povm}
    try:
        p = makers[args.kind](args.dim, args.outcomes, args.seed)
    except ValueError as exc:
        raise files.FormatError(str(exc)) from exc
    text = files.dumps(files.povm_to_doc(p)) + "\n"
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_verify(args, out):
    rep = verify.run_suite(args.suite, args.trials, args.seed)
    _emit(rep.as_dict(), out)
    if not rep.passed:
        raise _Fail(EXIT_SUITE, f"suite {args.suite}: {len(rep.failures)} of {rep.trials} trials failed")


def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be a non-negative integer")
    return value


def _pos_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sharpkit", description="Sharpness of quantum measurements.")
    parser.add_argument("--json", action="store_true", help="JSON output (the only format; accepted for scripts)")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check a POVM file")
    s.add_argument("file")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("classify", help="sharp / trivial / projective / rank-one")
    s.add_argument("file")
    s.set_defaults(run=cmd_classify)

    s = sub.add_parser("corr", help="degree of correlation between two POVMs")
    s.add_argument("p")
    s.add_argument("z")
    group = s.add_mutually_exclusive_group()
    group.add_argument("--state", help="density matrix file")
    group.add_argument("--uniform", action="store_true", help="maximally mixed state (default)")
    s.set_defaults(run=cmd_corr)

    s = sub.add_parser("tune", help="tuning degree of P with respect to reference Z")
    s.add_argument("p")
    s.add_argument("z")
    s.set_defaults(run=cmd_tune)

    s = sub.add_parser("guess", help="guessing probability of the ensemble induced by Z")
    s.add_argument("z")
    s.set_defaults(run=cmd_guess)

    s = sub.add_parser("compare", help="decide whether P can be fuzzified into Q")
    s.add_argument("p")
    s.add_argument("q")
    s.set_defaults(run=cmd_compare)

    s = sub.add_parser("robustness", help="tunability robustness interval")
    s.add_argument("file")
    s.add_argument("--refs", type=_nonneg_int, default=4)
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.set_defaults(run=cmd_robustness)

    s = sub.add_parser("random", help="sample a POVM file")
    s.add_argument("--dim", type=_pos_int, required=True)
    s.add_argument("--outcomes", type=_pos_int, required=True)
    s.add_argument("--seed", type=_nonneg_int, required=True)
    s.add_argument("--kind", choices=("general", "sharp", "trivial"), default="general")
    s.add_argument("-o", "--output")
    s.set_defaults(run=cmd_random)

    s = sub.add_parser("verify", help="run a randomized property suite")
    s.add_argument("--suite", choices=verify.SUITE_NAMES, required=True)
    s.add_argument("--trials", type=_pos_int, default=100)
    s.add_argument("--seed", type=_nonneg_int, default=0)
    s.set_defaults(run=cmd_verify)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    try:
        args.run(args, out)
    except _Fail as exc:
        err.write(f"error: {exc}\n")
        return exc.code
    except (files.FormatError, InvalidPovm) as exc:
        err.write(f"invalid input: {exc}\n")
        return EXIT_INPUT
    except linalg.SolverFailure as exc:
        err.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER
    except ValueError as exc:
        err.write(f"invalid input: {exc}\n")
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
