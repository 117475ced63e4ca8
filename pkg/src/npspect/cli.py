"""Command line entry point ``npspect``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import assembly, oracle, spectral, symbol, verify
from .assembly import AssemblyError, CacheError, MatrixKind
from .config import CACHE_ENV, ConfigError, ExperimentConfig, cache_directory, load_config
from .material import Classification, EssSpecPrediction, LameParams, kappa0, predict_essential_spectrum
from .spectral import EigenError

log = logging.getLogger("npspect")

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_ASSEMBLY = 4
EXIT_EIGENSOLVE = 5
EXIT_IO = 6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(verify._jsonable(obj), indent=2) + "\n")


def _random_samples(cfg: ExperimentConfig, rng: np.random.Generator):
    out = []
    for s in cfg.surfaces():
        v = rng.normal(size=(cfg.classify_samples, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        poles = np.array([[0, 0, 1.0], [0, 0, -1.0]])
        out.append(s.point(np.vstack([v, poles])))
    return out


def _levels(spectra, prediction: EssSpecPrediction, eps: float, labels):
    if len(spectra) >= 3:
        rep = spectral.detect_essential_spectrum(spectra, prediction, eps, labels)
        return [lv.to_dict() for lv in rep.levels], rep.passed
    levels = [{"grid": lab, "size": len(sp), "capture": spectral.capture_fraction(sp, prediction, eps),
               "coverage": spectral.interval_coverage(sp, prediction, eps)} for sp, lab in zip(spectra, labels)]
    return levels, None


def _fit_mask(lab, surfaces, size, field, family, values):
    if family == "all":
        return None
    vals, frac = lab.fractions(surfaces, size, field)
    if len(vals) != len(values) or not np.allclose(vals, values, atol=1e-9):
        raise EigenError("eigenvalue families do not match the spectrum")
    return frac < verify.TANGENTIAL_FRACTION if family == "tangential" else frac >= verify.TANGENTIAL_FRACTION


def cmd_spectrum(args) -> int:
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    if args.output:
        cfg.output = Path(args.output)
    if args.workers:
        cfg.workers = args.workers
    cache = cache_directory(cfg)
    if args.no_cache:
        cache = None
    rng = np.random.default_rng(cfg.seed)
    field = cfg.field()
    surfaces = cfg.surfaces()
    samples = _random_samples(cfg, rng)
    if not field.check_classification(samples):
        log.error("config error: material.kind: field values contradict classification %s",
                  field.classification.value)
        return EXIT_CONFIG
    try:
        cfg.output.mkdir(parents=True, exist_ok=True)
        (cfg.output / "resolved.cfg").write_text(cfg.to_ini())
    except OSError as exc:
        log.error("io error: %s", exc)
        return EXIT_IO

    lab = verify.Lab(cfg.workers, cache)
    labels = [f"{a}x{b}" for a, b in cfg.ladder]
    spectra = {}
    try:
        for kind in cfg.matrix_kinds():
            spectra[kind] = [lab.spectrum(surfaces, size, field, kind) for size in cfg.ladder]
            for sp, lab_name in zip(spectra[kind], labels):
                log.info("%s %s: %d eigenvalues, max |imag| %.2e", kind.value, lab_name, len(sp), sp.imag_max)
    except (AssemblyError, CacheError) as exc:
        log.error("assembly error: %s", exc)
        return EXIT_ASSEMBLY
    except EigenError as exc:
        log.error("eigensolve error: %s", exc)
        return EXIT_EIGENSOLVE
    except MemoryError:
        log.error("assembly error: out of memory")
        return EXIT_ASSEMBLY

    primary = cfg.primary_kind()
    prediction = predict_essential_spectrum(field, samples)
    report = {"config": cfg.to_ini(), "prediction": prediction.to_dict(), "primary": primary.value,
              "eps": cfg.eps, "ladder": [], "fits": [], "oracle": None, "cache_hits": lab.cache_hits,
              "assembled": lab.assembled}
    target = prediction
    if primary is MatrixKind.MODIFIED:
        target = EssSpecPrediction((-1.0, 0.0, 1.0), ())
        report["prediction_modified"] = target.to_dict()
    if primary is not MatrixKind.SINGLE_LAYER:
        levels, verdict = _levels(spectra[primary], target, cfg.eps, labels)
        report["ladder"] = levels
        report["verdict"] = verdict
    finest = spectra[primary][-1]
    for fit in cfg.fits:
        try:
            mask = _fit_mask(lab, surfaces, cfg.ladder[-1], field, fit.family, finest.values) \
                if primary is MatrixKind.SYMMETRIZED else None
            res = spectral.decay_fit(finest, fit.tip, fit.side, fit.window, fit.mode, mask=mask)
            entry = {"name": fit.name, "family": fit.family, **res.to_dict()}
        except ValueError as exc:
            entry = {"name": fit.name, "tip": fit.tip, "side": fit.side, "exponent": None, "residual": None,
                     "error": str(exc)}
        except EigenError as exc:
            log.error("eigensolve error: %s", exc)
            return EXIT_EIGENSOLVE
        report["fits"].append(entry)
    if cfg.oracle_jmax > 0:
        if cfg.geometry["kind"] == "sphere" and field.classification is Classification.CONSTANT \
                and primary in (MatrixKind.SYMMETRIZED, MatrixKind.NP):
            params = LameParams(cfg.material["lambda"], cfg.material["mu"])
            report["oracle"] = oracle.match_spectrum_to_oracle(finest, params, cfg.oracle_jmax).to_dict()
        else:
            log.warning("oracle matching needs a constant-material sphere; skipped")

    try:
        for kind, seq in spectra.items():
            name = "spectrum.csv" if kind is primary else f"spectrum_{kind.value}.csv"
            with open(cfg.output / name, "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["grid_id", "index", "value"])
                for sp, lab_name in zip(seq, labels):
                    for i, v in enumerate(sp.values):
                        w.writerow([lab_name, i, repr(float(v))])
        _write_json(cfg.output / "report.json", report)
    except OSError as exc:
        log.error("io error: %s", exc)
        return EXIT_IO
    log.info("wrote %s", cfg.output)
    return EXIT_OK


def cmd_verify(args) -> int:
    seed, workers, cache = 0, 1, os.environ.get(CACHE_ENV)
    if args.config:
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            log.error("config error: %s", exc)
            return EXIT_CONFIG
        seed, workers = cfg.seed, cfg.workers
        cache = cache or cfg.cache_dir
    lab = verify.Lab(workers, cache)
    try:
        verdicts = verify.run_suite(args.suite, lab, seed=seed)
    except (AssemblyError, CacheError) as exc:
        log.error("assembly error: %s", exc)
        return EXIT_ASSEMBLY
    except EigenError as exc:
        log.error("eigensolve error: %s", exc)
        return EXIT_EIGENSOLVE
    for v in verdicts:
        log.info("%s", v.line())
    doc = {"suite": args.suite, "passed": all(v.passed for v in verdicts),
           "verdicts": [v.to_dict() for v in verdicts]}
    text = json.dumps(verify._jsonable(doc), indent=2)
    if args.output:
        try:
            Path(args.output).write_text(text + "\n")
        except OSError as exc:
            log.error("io error: %s", exc)
            return EXIT_IO
    else:
        print(text)
    return EXIT_OK if doc["passed"] else EXIT_VERIFY_FAILED


def _complex(m: np.ndarray) -> dict:
    return {"real": m.real.tolist(), "imag": m.imag.tolist()}


def cmd_symbol(args) -> int:
    try:
        params = LameParams(args.lam, args.mu)
        k = kappa0(params)
        xi = tuple(float(x) for x in args.xi.split(","))
        if len(xi) != 2:
            raise ValueError("--xi needs two comma separated components")
        sig_b = symbol.np_symbol(None, xi, params)
        doc = {
            "lambda": params.lam, "mu": params.mu, "kappa0": k, "xi": list(xi),
            "lame_symbol": symbol.lame_symbol((*xi, 0.0), params).tolist(),
            "single_layer_symbol": symbol.single_layer_symbol(xi, params).tolist(),
            "np_symbol": _complex(sig_b),
            "np_symbol_eigenvalues": np.linalg.eigvalsh(sig_b).tolist(),
            "modified_symbol_eigenvalues": np.linalg.eigvalsh(symbol.modified_symbol(None, xi, params)).tolist(),
            "branches": {"directions": args.directions,
                         "values": symbol.symbol_branches(None, params, args.directions).tolist()},
        }
        if args.numeric:
            doc["single_layer_symbol_numeric"] = symbol.single_layer_symbol(xi, params,
                                                                            "numeric_line_integral").tolist()
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    text = json.dumps(doc, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def cmd_oracle_dump(args) -> int:
    try:
        params = LameParams(args.lam, args.mu)
        kappa0(params)
    except ValueError as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    if args.output:
        try:
            oracle.export_oracle_csv(args.output, args.jmax, params)
        except OSError as exc:
            log.error("io error: %s", exc)
            return EXIT_IO
    else:
        w = csv.writer(sys.stdout)
        w.writerow(["j", "multiplicity", "lambda0", "lambdaPlus", "lambdaMinus"])
        for t in oracle.oracle_table(args.jmax, params):
            w.writerow([t.j, t.multiplicity, repr(t.lambda0), repr(t.lambdaPlus), repr(t.lambdaMinus)])
    return EXIT_OK


def cmd_cache(args) -> int:
    root = Path(args.dir) if args.dir else cache_directory()
    files = sorted(root.glob("*.npsm")) if root.is_dir() else []
    try:
        if args.action == "inspect":
            rows = []
            for f in files:
                try:
                    head = assembly.cache_header(f)
                    rows.append({"file": f.name, "bytes": f.stat().st_size, "kind": head["kind"].value,
                                 "basis": head["basis"], "d": head["d"], "n": head["n"],
                                 "build_hash": f"{head['build_hash']:016x}"})
                except CacheError as exc:
                    rows.append({"file": f.name, "error": str(exc)})
            print(json.dumps({"directory": str(root), "entries": rows}, indent=2))
        else:
            for f in files:
                f.unlink()
            log.info("removed %d cache files from %s", len(files), root)
    except OSError as exc:
        log.error("io error: %s", exc)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="npspect", description="Elastic Neumann-Poincare spectra on surfaces and curves.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("spectrum", help="assemble, eigensolve and report over a refinement ladder")
    s.add_argument("--config", required=True)
    s.add_argument("--output", help="override run.output")
    s.add_argument("--workers", type=int, help="override run.workers")
    s.add_argument("--no-cache", action="store_true", help="do not read or write the matrix cache")
    s.set_defaults(func=cmd_spectrum)

    s = sub.add_parser("verify", help="run an acceptance suite and emit JSON verdicts")
    s.add_argument("--suite", required=True, choices=sorted(verify.SUITES))
    s.add_argument("--config", help="optional config supplying seed, workers and cache directory")
    s.add_argument("--output", help="write verdicts here instead of stdout")
    s.set_defaults(func=cmd_verify)

    s = sub.add_parser("symbol", help="dump principal symbols and eigenvalue branches as JSON")
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--xi", default="1,0", help="tangential frequency xi1,xi2")
    s.add_argument("--directions", type=int, default=16)
    s.add_argument("--numeric", action="store_true", help="also evaluate the single-layer symbol numerically")
    s.add_argument("--output")
    s.set_defaults(func=cmd_symbol)

    s = sub.add_parser("oracle-dump", help="sphere eigenvalue table as CSV")
    s.add_argument("--lam", type=float, default=1.0)
    s.add_argument("--mu", type=float, default=1.0)
    s.add_argument("--jmax", type=int, default=10)
    s.add_argument("--output")
    s.set_defaults(func=cmd_oracle_dump)

    s = sub.add_parser("cache", help="inspect or clear the matrix cache")
    s.add_argument("action", choices=("inspect", "clear"))
    s.add_argument("--dir", help=f"cache directory (default ${CACHE_ENV} or .npspect-cache)")
    s.set_defaults(func=cmd_cache)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
