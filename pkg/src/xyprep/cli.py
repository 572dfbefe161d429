"""Command-line interface.

Exit codes: 0 success, 1 errors, 2 fit diagnostics (e.g. no crossing).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .decoder import DecoderConfig, build_graphs, decode, detector_defects, VERTICAL, HORIZONTAL
from .engine import FastEngine
from .framesim import NoiseParams, run_shot, adjudicate
from .lattice import build_code
from .matching import solve_mwpm, BOUNDARY
from .prep import NEW, PLUS_L, PLUS_I_L, STANDARD, init_pattern, measurement_pattern
from . import experiments as xp
from . import repstruct as rs


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="xyprep", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a Monte Carlo experiment")
    run_p.add_argument("--config", help="JSON config file (overridden by flags)")
    run_p.add_argument("--protocol", choices=[STANDARD, NEW, xp.MEMORY])
    run_p.add_argument("--target", choices=[PLUS_L, PLUS_I_L], default=PLUS_L)
    run_p.add_argument("--d", type=int, nargs="+")
    run_p.add_argument("--p", type=float, nargs="+")
    run_p.add_argument("--eta", default="inf")
    run_p.add_argument("--pm-mode", choices=["zero", "equal_p"], default="zero")
    run_p.add_argument("--shots", type=int, default=20000)
    run_p.add_argument("--seed", type=int, default=2024)
    run_p.add_argument("--workers", type=int, default=1)
    run_p.add_argument("--out", required=True)

    thr_p = sub.add_parser("threshold", help="crossing fit on a results CSV")
    thr_p.add_argument("--in", dest="inp", required=True)
    thr_p.add_argument("--out")
    thr_p.add_argument("--d", type=int, nargs="+")
    thr_p.add_argument("--protocol")

    fit_p = sub.add_parser("fit-subthreshold", help="subthreshold scaling fit")
    fit_p.add_argument("--in", dest="inp", required=True)
    fit_p.add_argument("--out")
    fit_p.add_argument("--protocol")

    lam_p = sub.add_parser("lambda", help="error-suppression factor at fixed p")
    lam_p.add_argument("--in", dest="inp", required=True)
    lam_p.add_argument("--p", type=float, required=True)
    lam_p.add_argument("--out")
    lam_p.add_argument("--protocol")

    ver_p = sub.add_parser("verify", help="exact repetition-structure verification")
    ver_p.add_argument("--d", type=int, default=3)
    ver_p.add_argument("--exhaustive", action="store_true")

    ins_p = sub.add_parser("inspect", help="dump an initialization pattern as JSON")
    ins_p.add_argument("--d", type=int, required=True)
    ins_p.add_argument("--protocol", choices=[STANDARD, NEW], required=True)
    ins_p.add_argument("--target", choices=[PLUS_L, PLUS_I_L], default=PLUS_L)

    tr_p = sub.add_parser("decode-trace", help="dump one decoded shot as JSON")
    tr_p.add_argument("--config", required=True, help="JSON: protocol,target,d,p,eta,pm_mode")
    tr_p.add_argument("--shot-seed", type=int, required=True)

    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except xp.NoCrossingError as exc:
        print(f"fit diagnostic: {exc}", file=sys.stderr)
        return 2
    except (ValueError, FileNotFoundError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _dispatch(args) -> int:
    if args.command == "run":
        conf = {}
        if args.config:
            with open(args.config) as fh:
                conf = json.load(fh)
        protocol = args.protocol or conf.get("protocol")
        d_list = tuple(args.d or conf.get("d_list") or ())
        p_list = tuple(args.p or conf.get("p_list") or ())
        if not protocol or not d_list or not p_list:
            raise ValueError("protocol, --d and --p are required (flags or config file)")
        cfg = xp.ExperimentConfig(
            protocol=protocol,
            target=args.target if args.target else conf.get("target", PLUS_L),
            d_list=d_list,
            p_list=p_list,
            eta=xp.parse_eta(str(conf.get("eta", args.eta))),
            pm_mode=conf.get("pm_mode", args.pm_mode),
            shots=int(conf.get("shots", args.shots)),
            master_seed=int(conf.get("master_seed", args.seed)),
        )
        rows = xp.run_experiment(
            cfg, out_path=args.out, workers=args.workers,
            progress=lambda r: print(
                f"d={r.d} p={r.p:g}: p_L={r.p_l:.4g} ({r.failures}/{r.shots})", flush=True
            ),
        )
        print(f"{len(rows)} rows -> {args.out}")
        return 0

    if args.command in ("threshold", "fit-subthreshold", "lambda"):
        rows = xp.read_rows(args.inp)
        if getattr(args, "protocol", None):
            rows = [r for r in rows if r.protocol == args.protocol]
        if not rows:
            raise ValueError("no matching rows in the input CSV")
        if args.command == "threshold":
            fit = xp.estimate_threshold(rows, d_list=args.d)
        elif args.command == "fit-subthreshold":
            fit = xp.fit_subthreshold(rows)
        else:
            fit = xp.lambda_factor(rows, args.p)
        payload = {"kind": fit.kind, "params": fit.params, "stderr": fit.stderr,
                   "warnings": fit.warnings, "rows_used": len(fit.rows_used)}
        text = json.dumps(payload, indent=2)
        if getattr(args, "out", None):
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        print(text)
        return 0

    if args.command == "verify":
        return _verify(args.d, args.exhaustive)

    if args.command == "inspect":
        layout = build_code(args.d)
        pat = init_pattern(layout, args.protocol, args.target)
        print(json.dumps(pat.to_json_dict(), indent=2))
        return 0

    if args.command == "decode-trace":
        with open(args.config) as fh:
            conf = json.load(fh)
        layout = build_code(int(conf["d"]))
        pattern = xp.pattern_for(layout, conf.get("protocol", NEW), conf.get("target", PLUS_L))
        p = float(conf["p"])
        pm = p if conf.get("pm_mode", "zero") == "equal_p" else 0.0
        noise = NoiseParams(p=p, eta=xp.parse_eta(str(conf.get("eta", "inf"))), pm=pm)
        rounds = layout.d if pm > 0 else 0
        graphs = build_graphs(DecoderConfig(layout=layout, pattern=pattern, noise=noise, rounds=rounds))
        rec = run_shot(layout, pattern, noise, rounds, seed=args.shot_seed)
        trace = {
            "shot_seed": args.shot_seed,
            "events": sorted([int(s), int(r)] for (s, r) in rec.detector_set.events),
            "true_frame": {
                "x": np.nonzero(rec.true_frame.x)[0].tolist(),
                "z": np.nonzero(rec.true_frame.z)[0].tolist(),
            },
        }
        for which in (VERTICAL, HORIZONTAL):
            g = graphs.graph(which)
            from .decoder import _matching_graph

            sol = solve_mwpm(_matching_graph(g), detector_defects(g, rec.detector_set))
            trace[f"matching_{which}"] = {
                "pairs": [[int(u), int(v)] for (u, v) in sol.pairs],
                "total_weight": sol.total_weight,
            }
        corr = decode(graphs, rec.detector_set)
        failure = adjudicate(rec, corr, layout, pattern)
        trace["correction"] = {
            "x": np.nonzero(corr.x)[0].tolist(),
            "z": np.nonzero(corr.z)[0].tolist(),
        }
        trace["failure"] = int(failure)
        print(json.dumps(trace, indent=2))
        return 0

    raise ValueError(f"unhandled command {args.command}")


def _verify(d: int, exhaustive: bool) -> int:
    """Repetition-structure verification report (Theorem 1 machinery)."""
    ok = True
    for dd in ([d] if not exhaustive else [3, 5, 7, 9, 11]):
        layout = build_code(dd)
        for target in (PLUS_L, PLUS_I_L):
            pat = init_pattern(layout, NEW, target)
            cm = rs.build_check_matrix(layout, pat)
            dec = rs.reduce_to_reps(cm, layout)
            good = (
                rs.verify_row_space(cm, dec)
                and len(dec.rep2_blocks) == (dd - 1) // 2
                and len(dec.rep4_blocks) == ((dd - 1) // 2) ** 2
                and len(dec.repd_chain) == dd
            )
            ok &= good
            print(
                f"d={dd} target={target}: REP(2) x{len(dec.rep2_blocks)}, "
                f"REP(4) x{len(dec.rep4_blocks)}, chain length {len(dec.repd_chain)}, "
                f"row space {'preserved' if good else 'BROKEN'}"
            )
        try:
            rs.reduce_to_reps(rs.build_check_matrix(layout, init_pattern(layout, STANDARD, PLUS_L)), layout)
            print(f"d={dd} standard: unexpectedly reduced (BUG)")
            ok = False
        except rs.ReductionError:
            print(f"d={dd} standard: no repetition structure (expected)")
    if exhaustive or d == 3:
        layout = build_code(3)
        pat = init_pattern(layout, NEW, PLUS_L)
        chain = set(rs.reduce_to_reps(rs.build_check_matrix(layout, pat), layout).repd_chain)
        n_fail = 0
        fail_min = []
        for z in range(512):
            err = np.array([(z >> q) & 1 for q in range(9)], dtype=np.uint8)
            success = rs.ml_oracle(layout, pat, err)
            cw = int(sum(err[q] for q in chain))
            expected = 1 if cw <= 1 else 0
            if success != expected:
                print(f"oracle mismatch on pattern {z:09b}")
                ok = False
            if not success and all(err[q] == 0 for q in range(9) if q not in chain):
                fail_min.append(int(err.sum()))
            n_fail += 1 - success
        least = min(fail_min)
        count = sum(1 for w in fail_min if w == least)
        print(
            f"d=3 exhaustive: {n_fail} oracle failures of 512; least-weight "
            f"chain-supported failing classes: {count} (binomial predicts "
            f"{rs.count_minweight_faults(3)})"
        )
        ok &= count == rs.count_minweight_faults(3)
    print("PASS" if ok else "FAIL")
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
