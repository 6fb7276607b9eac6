"""``combctl`` command line: run experiments, validate files, emit fixtures.

Exit status is 0 when everything passes, 1 when a check fails and 2 for
usage or parse errors.
"""
import argparse
import json
import os
import sys
import time

import numpy as np

from . import experiments
from .channels import kraus_set, validate_channel
from .combs import CombKraus, check_comb_choi, comb_kraus_conditions, identity_comb, uniform_shape
from .controllization.neutralization import antisym_state, prepare_traceout_comb
from .controllization.randomization import clifford_set, maps_paulis_to_paulis, pauli_set
from .errors import CombctlError
from .sampling import haar_unitary, random_density, random_kraus
from .serialization import (
    ParseError,
    channel_from_json,
    channel_to_json,
    comb_from_json,
    comb_to_json,
    dumps,
    load,
    matrix_to_json,
)

FIXTURES = ("haar-unitary", "random-cptp", "antisym-state", "pauli-set", "clifford-set",
            "identity-comb", "neutralization-comb")
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _parser():
    p = argparse.ArgumentParser(prog="combctl", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment and write its report")
    r.add_argument("--experiment", choices=experiments.EXPERIMENTS)
    r.add_argument("--config", help="JSON config file; flags override its entries")
    r.add_argument("--out", help="output directory (report JSON and CSV); stdout if omitted")
    r.add_argument("--seed", type=int)
    r.add_argument("--set", choices=("pauli", "clifford"), dest="rset")
    r.add_argument("--mode", choices=("average", "sampled"))
    r.add_argument("--timing", action="store_true", help="include wall time in the report")

    v = sub.add_parser("validate", help="check a channel or comb JSON file")
    v.add_argument("path")

    f = sub.add_parser("fixture", help="write a seeded test object")
    f.add_argument("kind", choices=FIXTURES)
    f.add_argument("--out", help="output file; stdout if omitted")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--d", type=int, default=2)
    f.add_argument("--d-out", type=int)
    f.add_argument("--rank", type=int, default=2)
    f.add_argument("--slots", type=int, default=1)
    return p


def _write(text: str, path=None):
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w") as fh:
        fh.write(text)


def cmd_run(args) -> int:
    cfg = {}
    if args.config:
        cfg = load(args.config)
        if not isinstance(cfg, dict):
            raise ParseError("config must be a JSON object")
    if args.experiment:
        cfg["experiment"] = args.experiment
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.rset:
        cfg["set"] = args.rset
    if args.mode:
        cfg["mode"] = args.mode
    start = time.perf_counter()
    try:
        report = experiments.run(cfg)
    except experiments.ConfigError as exc:
        raise UsageError(str(exc)) from exc
    elapsed = time.perf_counter() - start
    if args.timing:
        report["wall_time"] = elapsed
    print(f"{report['experiment']}: {'PASS' if report['passed'] else 'FAIL'} ({elapsed:.2f}s)", file=sys.stderr)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write(dumps(report), os.path.join(args.out, f"{report['experiment']}.json"))
        csv = experiments.to_csv(report)
        if csv:
            _write(csv, os.path.join(args.out, f"{report['experiment']}.csv"))
    else:
        _write(dumps(report))
    if not report["passed"]:
        for row in report["rows"]:
            if row.get("pass") is False:
                print(f"failing row: {json.dumps(row, sort_keys=True)}", file=sys.stderr)
        for name, ok in report["verdicts"].items():
            if not ok:
                print(f"failing verdict: {name}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_validate(args) -> int:
    obj = load(args.path)
    if not isinstance(obj, dict):
        raise ParseError("expected a JSON object")
    if "dims" in obj:
        comb = comb_from_json(obj)
        ok = True
        if isinstance(comb, CombKraus):
            kr = comb_kraus_conditions(comb)
            print(f"kraus levels: {', '.join(f'{r:.3e}' for r in kr.levels)}; final: {kr.final:.3e}")
            ok = kr.valid
            comb = comb.to_choi()
        rep = check_comb_choi(comb)
        print(f"cp: {rep.cp} (min eigenvalue {rep.min_eigenvalue:.3e})")
        print(f"chain (k = N..0): {', '.join(f'{r:.3e}' for r in rep.chain)}")
        print(f"normalization: {rep.normalization:.3e}")
        ok = ok and rep.valid
        print(f"comb: {'PASS' if ok else 'FAIL'}")
    else:
        rep = validate_channel(channel_from_json(obj))
        print(f"cp: {rep.cp} (min eigenvalue {rep.min_eigenvalue:.3e})")
        print(f"tp: {rep.tp} (residual {rep.tp_residual:.3e})")
        ok = rep.cptp
        print(f"channel: {'PASS' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_fixture(args) -> int:
    d = args.d
    if not 2 <= d <= 4:
        raise UsageError("--d must be between 2 and 4")
    kind = args.kind
    if kind == "haar-unitary":
        obj = matrix_to_json(haar_unitary(d, args.seed))
    elif kind == "random-cptp":
        d_out = args.d_out or d
        obj = channel_to_json(kraus_set(random_kraus(d, d_out, args.rank, args.seed)))
    elif kind == "antisym-state":
        obj = matrix_to_json(antisym_state(d))
    elif kind in ("pauli-set", "clifford-set"):
        rset = pauli_set() if kind == "pauli-set" else clifford_set()
        if d != 2:
            raise UsageError("randomization sets are defined for d = 2")
        if not all(maps_paulis_to_paulis(u) for u in rset.unitaries):
            print("set element does not normalize the Pauli group", file=sys.stderr)
            return EXIT_FAIL
        obj = {"name": rset.name, "unitaries": [matrix_to_json(u) for u in rset.unitaries]}
    else:
        shape = uniform_shape(args.slots, d)
        if shape.side > 3 ** 8:
            raise UsageError(f"comb side {shape.side} exceeds the budget")
        if kind == "identity-comb":
            obj = comb_to_json(identity_comb(shape))
        else:
            obj = comb_to_json(prepare_traceout_comb(random_density(d ** args.slots, seed=args.seed), shape))
    _write(dumps(obj), args.out)
    return EXIT_OK


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    handlers = {"run": cmd_run, "validate": cmd_validate, "fixture": cmd_fixture}
    try:
        return handlers[args.command](args)
    except (UsageError, ParseError) as exc:
        print(f"combctl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CombctlError as exc:
        print(f"combctl: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
