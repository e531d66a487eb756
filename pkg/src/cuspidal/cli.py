"""Batch command-line surface: ingest JSON specs, run the engines, emit
line-buffered JSON reports.

Report files are JSON lines: a header record, one record per input row in
input order, and a closing summary.  Output bytes are deterministic for a
fixed config and tool version (wall-clock timing goes to stderr only).

Exit codes: 0 completed, 2 config error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Tuple

from . import __version__
from .config import (
    ConfigError,
    fraction_to_json,
    load_json_file,
    parse_field,
    parse_fraction,
    parse_scalar,
    scalar_to_json,
)
from .cosets import (
    DecompositionError,
    FiniteLevelMatrix,
    bruhat_decompose,
    cartan_representative,
    iwahori_factor,
    mackey_cosets,
)
from .enveloping import EnvelopingElement, OreWitnessNotFound, ore_witness
from .intertwine import (
    ConjugationParams,
    Mat2,
    TableBuildError,
    certify_divergence,
)
from .padic import PrecisionLossError
from .series import RadiusParams, TailNotCertifiableError, char_binomial, char_exp_log, validate_radius
from .vanishing import h0_vanishing_check
from .weights import (
    CuspidalModuleSpec,
    check_cuspidality,
    degree,
    weyl_condition,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3


# -- row workers (module level so --jobs can fork them) ---------------------


def _row_cuspidality(payload: str) -> str:
    cfg = json.loads(payload)
    spec_field = parse_field(cfg, "")
    mu = tuple(
        parse_scalar(spec_field, entry, f"mu[{k}]") for k, entry in enumerate(cfg["mu"])
    )
    mspec = CuspidalModuleSpec(
        spec_field, len(mu) - 1, mu, window_radius=cfg.get("window_radius", 8)
    )
    report = check_cuspidality(mspec)
    row: Dict[str, Any] = {
        "mu": [scalar_to_json(m) for m in mu],
        "cuspidal": report.cuspidal,
        "degree": degree(mspec, mspec.window_radius),
        "weyl_separation": weyl_condition(mu),
    }
    if report.failing_root is not None:
        row["failing_root"] = list(report.failing_root)
    if report.failing_weight is not None:
        row["failing_weight"] = list(report.failing_weight.nu)
    if report.notes:
        row["notes"] = report.notes
    return json.dumps(row, sort_keys=True)


def _row_certify(payload: str) -> str:
    cfg = json.loads(payload)
    spec_field = parse_field(cfg, "")
    radius = RadiusParams(
        field=spec_field,
        kappa=int(cfg["radius"]["kappa"]),
        m0=int(cfg["radius"]["m0"]),
        m=int(cfg["radius"]["m"]),
        lambda_s=parse_fraction(cfg["radius"]["lambda_s"], "radius.lambda_s"),
    )
    mu = (
        parse_scalar(spec_field, cfg["mu"][0], "mu[0]"),
        parse_scalar(spec_field, cfg["mu"][1], "mu[1]"),
    )
    params = ConjugationParams(
        a=parse_scalar(spec_field, cfg.get("a", 0), "a"),
        b=parse_scalar(spec_field, cfg.get("b", 0), "b"),
        m0m=radius.m0m,
    )
    lam = tuple(cfg.get("lambda", [0, 0]))
    row: Dict[str, Any] = {
        "mu": [scalar_to_json(m) for m in mu],
        "a": scalar_to_json(params.a),
        "b": scalar_to_json(params.b),
        "case": params.case_tag,
    }
    try:
        result = certify_divergence(
            mu, params, radius, int(cfg["horizon"]),
            seeds=cfg.get("seeds"), lam=lam,
        )
    except (TableBuildError, ValueError, ZeroDivisionError, PrecisionLossError) as exc:
        row["status"] = "skipped"
        row["reason"] = str(exc)
        return json.dumps(row, sort_keys=True)
    row["hypotheses"] = result.precheck.results
    row["precheck_pass"] = result.precheck.all_pass
    if not result.precheck.all_pass:
        failed = [k for k, v in result.precheck.results.items() if not v]
        row["status"] = "skipped"
        row["reason"] = "precheck failed: " + ", ".join(failed)
        return json.dumps(row, sort_keys=True)
    row["status"] = "ok"
    row["inside_threshold"] = result.inside_threshold
    row["oracle_zero_residual"] = result.oracle.all_zero
    cert = result.certificate
    row["certificate"] = {
        "verdict": cert.verdict,
        "slope": fraction_to_json(cert.asymptotic_slope),
        "witness": list(cert.witness) if cert.witness else None,
        "horizon": cert.horizon,
    }
    return json.dumps(row, sort_keys=True)


def _parse_level_matrix(p: int, level: int, rows, path: str) -> FiniteLevelMatrix:
    try:
        entries = tuple(
            tuple(int(x, 10) if isinstance(x, str) else int(x) for x in row)
            for row in rows
        )
    except (TypeError, ValueError):
        raise ConfigError(f"{path}: matrix entries must be integers or digit strings")
    if len(entries) != 2 or any(len(r) != 2 for r in entries):
        raise ConfigError(f"{path}: expected a 2x2 matrix")
    try:
        return FiniteLevelMatrix(p, level, entries)
    except DecompositionError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _row_decompose(payload: str) -> str:
    cfg = json.loads(payload)
    p = int(cfg["p"])
    level = int(cfg["level"])
    kind = cfg["kind"]
    row: Dict[str, Any] = {"kind": kind}
    if kind == "bruhat":
        g = _parse_level_matrix(p, level, cfg["matrix"], "matrix")
        rep = bruhat_decompose(g)
        row.update(
            cell=rep.cell,
            factors=[list(map(list, f.entries)) for f in rep.factors],
            reconstruction_ok=rep.verify(g),
        )
    elif kind == "iwahori":
        g = _parse_level_matrix(p, level, cfg["matrix"], "matrix")
        um, t, up = iwahori_factor(g)
        row.update(
            factors=[list(map(list, f.entries)) for f in (um, t, up)],
            reconstruction_ok=(um * t * up).entries == g.entries,
        )
    elif kind == "cartan":
        spec_field = parse_field(cfg, "")
        entries = cfg["matrix"]
        mat = Mat2(
            spec_field,
            (
                (
                    parse_scalar(spec_field, entries[0], "matrix[0]"),
                    parse_scalar(spec_field, entries[1], "matrix[1]"),
                ),
                (
                    parse_scalar(spec_field, entries[2], "matrix[2]"),
                    parse_scalar(spec_field, entries[3], "matrix[3]"),
                ),
            ),
        )
        rep = cartan_representative(mat)
        row.update(gap=rep.gap, reconstruction_ok=rep.verify(mat))
    elif kind == "mackey":
        spec_field = parse_field(cfg, "")
        labels = mackey_cosets(spec_field, int(cfg["j_max"]))
        row.update(
            labels=[{"j": l.j, "roundtrip_ok": l.roundtrip_ok} for l in labels]
        )
    else:
        raise ConfigError(f"unknown decomposition kind {kind!r}")
    return json.dumps(row, sort_keys=True)


def _row_char_eval(payload: str) -> str:
    cfg = json.loads(payload)
    spec_field = parse_field(cfg, "")
    mu = parse_scalar(spec_field, cfg["mu"], "mu")
    x = parse_scalar(spec_field, cfg["x"], "x")
    method = cfg.get("method", "both")
    row: Dict[str, Any] = {"mu": scalar_to_json(mu), "x": scalar_to_json(x)}
    try:
        if method in ("binomial", "both"):
            res = char_binomial(mu, x, int(cfg.get("terms", 64)))
            row["binomial"] = scalar_to_json(res.value)
            row["tail_valuation"] = fraction_to_json(res.tail_valuation)
        if method in ("exp_log", "both"):
            val = char_exp_log(mu, x, digits=cfg.get("digits"))
            row["exp_log"] = scalar_to_json(val)
        if method == "both":
            res = char_binomial(mu, x, int(cfg.get("terms", 64)))
            val = char_exp_log(mu, x, digits=cfg.get("digits"))
            row["agree"] = bool(res.value == val)
        row["status"] = "ok"
    except (ValueError, TailNotCertifiableError, PrecisionLossError) as exc:
        row["status"] = "error"
        row["reason"] = str(exc)
    return json.dumps(row, sort_keys=True)


def _parse_conjugator(spec_field, obj, path: str) -> Mat2:
    kind = obj.get("type", "identity")
    if kind == "identity":
        return Mat2.identity(spec_field)
    param = parse_scalar(spec_field, obj.get("param", 0), path + ".param")
    if kind == "upper":
        return Mat2.upper_unipotent(spec_field, param)
    if kind == "lower":
        return Mat2.lower_unipotent(spec_field, param)
    raise ConfigError(f"{path}: unknown conjugator type {kind!r}")


def _row_h0check(payload: str) -> str:
    cfg = json.loads(payload)
    spec_field = parse_field(cfg, "")
    mu = tuple(
        parse_scalar(spec_field, entry, f"mu[{k}]") for k, entry in enumerate(cfg["mu"])
    )
    mspec = CuspidalModuleSpec(
        spec_field, len(mu) - 1, mu, window_radius=cfg.get("window_radius", 10)
    )
    conjugators = [
        _parse_conjugator(spec_field, obj, f"conjugators[{k}]")
        for k, obj in enumerate(cfg.get("conjugators", [{"type": "identity"}]))
    ]
    report = h0_vanishing_check(mspec, conjugators)
    row = {
        "mu": [scalar_to_json(m) for m in mu],
        "all_injective": report.all_injective,
        "rows": [
            {
                "generator": list(r.generator),
                "conjugator": r.conjugator_index,
                "injective": r.injective,
                "kernel_dim": r.kernel_dim,
            }
            for r in report.rows
        ],
    }
    return json.dumps(row, sort_keys=True)


def _row_ore(payload: str) -> str:
    cfg = json.loads(payload)
    s = EnvelopingElement.gen_e().scale(parse_fraction(cfg.get("s_coeff", 1), "s_coeff"))
    delta = EnvelopingElement(
        {
            (int(a), int(b), int(c)): parse_fraction(q, "delta")
            for a, b, c, q in cfg["delta"]
        }
    )
    row: Dict[str, Any] = {
        "delta": [[a, b, c, fraction_to_json(q)] for (a, b, c), q in sorted(delta.terms.items())]
    }
    try:
        witness = ore_witness(s, delta, degree_budget=int(cfg.get("degree_budget", 6)))
    except OreWitnessNotFound as exc:
        row["status"] = "not_found"
        row["reason"] = str(exc)
        return json.dumps(row, sort_keys=True)
    verified = (s * witness.delta_prime - delta * witness.s_prime).is_zero()
    row.update(
        status="ok",
        power=witness.power,
        delta_prime=[
            [a, b, c, fraction_to_json(q)]
            for (a, b, c), q in sorted(witness.delta_prime.terms.items())
        ],
        verified=verified,
    )
    return json.dumps(row, sort_keys=True)


_WORKERS = {
    "cuspidality": _row_cuspidality,
    "certify": _row_certify,
    "decompose": _row_decompose,
    "char-eval": _row_char_eval,
    "h0-check": _row_h0check,
    "ore-witness": _row_ore,
}


# -- row assembly per command ----------------------------------------------


def _field_echo(cfg: Dict[str, Any]) -> Dict[str, Any]:
    return {
        "p": cfg["p"],
        "e": cfg.get("e", 1),
        "precision": cfg.get("precision", 64),
    }


def _rows_cuspidality(cfg, args) -> List[str]:
    base = _field_echo(cfg)
    base["window_radius"] = cfg.get("window_radius", 8)
    mu_list = cfg.get("mu_list")
    if mu_list is None:
        mu_list = [cfg["mu"]] if "mu" in cfg else []
    return [json.dumps({**base, "mu": mu}) for mu in mu_list]


def _rows_certify(cfg, args) -> List[str]:
    base = _field_echo(cfg)
    base["radius"] = cfg["radius"]
    base["horizon"] = args.horizon
    points = list(cfg.get("points", []))
    grid = cfg.get("grid")
    if grid:
        seed = int(os.environ.get("PADIC_SEED", "0"))
        rng = random.Random(seed)
        combos = [
            {"mu": m, "a": a, "b": b}
            for m in grid["mu"]
            for a in grid["a"]
            for b in grid["b"]
        ]
        samples = grid.get("samples")
        if samples is not None and samples < len(combos):
            combos = rng.sample(combos, samples)
        points.extend(combos)
    rows = []
    for pt in points:
        row = dict(base)
        row.update(pt)
        rows.append(json.dumps(row))
    return rows


def _rows_decompose(cfg, args) -> List[str]:
    rows = []
    p = cfg["p"]
    for m in cfg.get("bruhat", []):
        rows.append(json.dumps({"p": p, "level": args.level, "kind": "bruhat", "matrix": m}))
    for m in cfg.get("iwahori", []):
        rows.append(json.dumps({"p": p, "level": args.level, "kind": "iwahori", "matrix": m}))
    for m in cfg.get("cartan", []):
        rows.append(
            json.dumps({**_field_echo(cfg), "level": args.level, "kind": "cartan", "matrix": m})
        )
    if "mackey_jmax" in cfg:
        rows.append(
            json.dumps(
                {**_field_echo(cfg), "level": args.level, "kind": "mackey", "j_max": cfg["mackey_jmax"]}
            )
        )
    return rows


def _rows_char_eval(cfg, args) -> List[str]:
    base = _field_echo(cfg)
    return [json.dumps({**base, **ev}) for ev in cfg.get("evaluations", [])]


def _rows_h0check(cfg, args) -> List[str]:
    base = _field_echo(cfg)
    base["window_radius"] = cfg.get("window_radius", 10)
    base["conjugators"] = cfg.get("conjugators", [{"type": "identity"}])
    return [json.dumps({**base, "mu": s["mu"]}) for s in cfg.get("specs", [])]


def _rows_ore(cfg, args) -> List[str]:
    return [json.dumps(pair) for pair in cfg.get("pairs", [])]


_ROW_BUILDERS = {
    "cuspidality": _rows_cuspidality,
    "certify": _rows_certify,
    "decompose": _rows_decompose,
    "char-eval": _rows_char_eval,
    "h0-check": _rows_h0check,
    "ore-witness": _rows_ore,
}


def _detect_invariant_violation(command: str, row: Dict[str, Any]) -> bool:
    if command == "certify":
        return row.get("status") == "ok" and not row.get("oracle_zero_residual", True)
    if command == "decompose":
        if "reconstruction_ok" in row and not row["reconstruction_ok"]:
            return True
        return any(not l["roundtrip_ok"] for l in row.get("labels", []))
    if command == "ore-witness":
        return row.get("status") == "ok" and not row.get("verified", True)
    return False


def run_command(command: str, args) -> int:
    try:
        cfg = load_json_file(args.spec)
        if args.precision is not None:
            cfg["precision"] = args.precision
        payloads = _ROW_BUILDERS[command](cfg, args)
    except (ConfigError, KeyError, TypeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    worker = _WORKERS[command]
    started = time.monotonic()
    try:
        if args.jobs > 1 and len(payloads) > 1:
            with ProcessPoolExecutor(max_workers=args.jobs) as pool:
                results = list(pool.map(worker, payloads))
        else:
            results = [worker(p) for p in payloads]
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    elapsed = time.monotonic() - started

    spec_bytes = open(args.spec, "rb").read()
    header = {
        "type": "header",
        "command": command,
        "version": __version__,
        "input_hash": hashlib.sha256(spec_bytes).hexdigest(),
        "rows": len(results),
    }
    violation = False
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", encoding="utf-8")
    try:
        print(json.dumps(header, sort_keys=True), file=out, flush=True)
        for idx, res in enumerate(results):
            row = json.loads(res)
            violation = violation or _detect_invariant_violation(command, row)
            record = {"type": "row", "index": idx, **row}
            print(json.dumps(record, sort_keys=True), file=out, flush=True)
        summary = {
            "type": "summary",
            "rows": len(results),
            "invariant_violation": violation,
            "timing": None,
        }
        print(json.dumps(summary, sort_keys=True), file=out, flush=True)
    finally:
        if out is not sys.stdout:
            out.close()
    print(f"{command}: {len(results)} rows in {elapsed:.3f}s", file=sys.stderr)
    return EXIT_INVARIANT if violation else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cuspidal",
        description="exact p-adic certificates: cuspidality, intertwiner divergence, decompositions",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _WORKERS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--spec", required=True, help="JSON input file")
        cmd.add_argument("--out", default=None, help="report file (default stdout)")
        cmd.add_argument("--horizon", type=int, default=500, help="scan horizon N")
        cmd.add_argument("--precision", type=int, default=None, help="precision cap override")
        cmd.add_argument("--jobs", type=int, default=1, help="parallel row workers")
        cmd.add_argument("--level", type=int, default=1, help="congruence level k")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return run_command(args.command, args)


if __name__ == "__main__":
    sys.exit(main())
