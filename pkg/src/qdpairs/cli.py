"""Command line entry point: ``qdpairs {sweep,dressed-scan,point,validate-config}``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time

from qdpairs.sweep import (
    POINT_FIELDS,
    ConfigError,
    atomic_write,
    csv_text,
    dressed_scan,
    evaluate_point,
    load_config,
    run_sweep,
    scan_fieldnames,
    write_metadata,
)

EXIT_CONFIG = 2
EXIT_IO = 3


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON config file")
    common.add_argument("--n-max", type=int, default=None, help="photon truncation per mode")
    common.add_argument("--branch", choices=("upper", "lower"), default=None,
                        help="one-excitation branch used as the cascade intermediate")
    common.add_argument("--out", default=None, help="output CSV path (overrides config)")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="qdpairs", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)
    sw = sub.add_parser("sweep", parents=[common], help="EoF map over the configured grid")
    sw.add_argument("--workers", type=int, default=1)
    sub.add_parser("dressed-scan", parents=[common], help="a_j and |gamma| versus delta_B")
    pt = sub.add_parser("point", parents=[common], help="single parameter point (axes ignored)")
    pt.add_argument("--dump-rho", default=None, help="write the steady state as CSV (i,j,re,im)")
    pt.add_argument("--dump-pairs", default=None, help="write the pair matrix as CSV")
    sub.add_parser("validate-config", parents=[common], help="parse and check a config file")
    return ap


def _fmt_eof(x) -> str:
    return "undefined (no pair flux)" if isinstance(x, float) and math.isnan(x) else f"{x:.6f}"


def _write_csv(path, fields, records) -> None:
    atomic_write(path, csv_text(fields, records))


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        max_axes = 1 if args.command == "dressed-scan" else 2
        cfg = load_config(args.config, max_axes=max_axes)
        cfg = cfg.with_overrides(n_max=args.n_max, branch=args.branch, output=args.out)
        if args.command == "sweep" and args.workers < 1:
            raise ConfigError("--workers must be >= 1")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        if args.command == "validate-config":
            n = len(cfg.grid())
            print(f"config ok: {n} grid point(s), axes "
                  f"{[a.name for a in cfg.axes]}, branch {cfg.branch.value}, n_max {cfg.n_max}")
            return 0

        if args.command == "point":
            p = cfg.params_at(*[a.start for a in cfg.axes])
            rec, ss, pm = evaluate_point(p, cfg.n_max, cfg.branch, cfg.filter_width,
                                         return_state=True)
            print(f"EoF: {_fmt_eof(rec['eof'])}  concurrence: {rec['concurrence']:.6f}  "
                  f"status: {rec['status']}")
            if cfg.output:
                _write_csv(cfg.output, list(POINT_FIELDS), [rec])
            if args.dump_rho and ss is not None:
                ss.to_csv(args.dump_rho)
            if args.dump_pairs and pm is not None:
                pm.to_csv(args.dump_pairs)
            return 0

        if args.command == "dressed-scan":
            rows = dressed_scan(cfg)
            text = csv_text(scan_fieldnames(), rows)
            if cfg.output:
                atomic_write(cfg.output, text)
                if cfg.metadata:
                    write_metadata(cfg.output, cfg)
                print(f"wrote {len(rows)} rows to {cfg.output}")
            else:
                sys.stdout.write(text)
            return 0

        t0 = time.perf_counter()
        result = run_sweep(cfg, workers=args.workers)
        elapsed = time.perf_counter() - t0
        summ = result.summary()
        if cfg.output:
            _write_csv(cfg.output, result.fieldnames, result.records)
            if cfg.metadata:
                write_metadata(cfg.output, cfg, {"summary": summ})
        where = json.dumps(summ["argmax"]) if summ["argmax"] else "n/a"
        print(f"grid {'x'.join(map(str, summ['shape']))} ({summ['points']} points, "
              f"{summ['failed']} failed) in {elapsed:.1f} s")
        print(f"max EoF {_fmt_eof(summ['max_eof'])} at {where}")
        if cfg.output:
            print(f"wrote {cfg.output}")
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
