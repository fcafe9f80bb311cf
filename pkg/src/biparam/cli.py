"""Command-line front end.

    biparam transition --config chain.json [--output csv|json] [--digits N]

Subcommands: ``transition``, ``marginal``, ``waiting``, ``warranty``,
``compare`` and ``run`` (everything the config asks for).  Results go to
stdout, diagnostics to stderr.  Exit status is 0 on success, 2 for
configuration/validation problems and 3 for numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .chain import marginal_distribution
from .config import ConfigError, Job, parse_config
from .resolvent import METHODS, transition
from .waiting import extract_waiting_transforms, survival, waiting_cdf_at
from .warranty import expected_warranty_expense

log = logging.getLogger("biparam")

COMMANDS = ("transition", "marginal", "waiting", "warranty", "compare", "run")
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3
THREADS_ENV = "BIPARAM_MAX_THREADS"


def _max_workers() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


def _fan_out(fn, items, workers: int):
    items = list(items)
    if workers == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))


def _solve(job: Job, at, method: str):
    return transition(job.generator, at, method, cfg=job.inversion, pde_steps=job.pde_steps)


def _matrix(p) -> list[list[float]]:
    return [[float(x) for x in row] for row in np.asarray(p)]


def _check_command(job: Job, command: str):
    if command == "marginal" and job.initial is None:
        raise ConfigError("the marginal command needs an 'initial' vector", field="initial")
    if command == "warranty":
        if job.policy is None:
            raise ConfigError("the warranty command needs a 'policy' block", field="policy")
    if command in ("warranty", "run") and job.policy is not None and job.generator.n != 2:
        raise ConfigError("warranty pricing needs a 2-state chain", field="policy")
    if command == "waiting" and job.generator.n != 2 and not job.rates:
        raise ConfigError("the waiting command needs a 2-state chain or 'waitingRates'",
                          field="waitingRates")


def _transitions(job: Job, workers: int, with_pi: bool):
    def one(at):
        P = _solve(job, at, job.method)
        entry = {"t": at.t, "u": at.u, "method": P.method, "p": _matrix(P.p),
                 "rangeWarning": P.range_warning, "tolerance": P.tolerance}
        if with_pi and job.initial is not None:
            entry["pi"] = [float(x) for x in marginal_distribution(job.initial, P).pi]
        return entry

    return _fan_out(one, job.queries, workers)


def _compare(job: Job, workers: int):
    def one(at):
        mats = {m: _solve(job, at, m).p for m in METHODS}
        pairs = {f"{a}-{b}": float(np.abs(mats[a] - mats[b]).max())
                 for a, b in itertools.combinations(METHODS, 2)}
        out = {"t": at.t, "u": at.u}
        out.update({m: _matrix(p) for m, p in mats.items()})
        out["deviations"] = pairs
        out["maxDeviation"] = max(pairs.values())
        return out

    return _fan_out(one, job.queries, workers)


def _waiting(job: Job, workers: int):
    laws = extract_waiting_transforms(job.generator) if job.generator.n == 2 else ()

    def one(at):
        out = {"t": at.t, "u": at.u}
        if laws:
            if at.on_boundary:
                out["cdf"] = {job.labels[w.from_state]: 0.0 for w in laws}
            else:
                out["cdf"] = {job.labels[w.from_state]: waiting_cdf_at(w, at, job.inversion)
                              for w in laws}
        if job.rates:
            out["survival"] = {job.labels[r.state]: survival(r, at) for r in job.rates}
        return out

    return _fan_out(one, job.queries, workers)


def _expense(job: Job):
    laws = extract_waiting_transforms(job.generator)
    report = expected_warranty_expense(job.policy, laws[job.policy.from_state], job.inversion)
    return {"ewe": report.ewe, "baseCost": report.base_cost,
            "probabilities": list(report.probabilities),
            "contributions": list(report.contributions)}


def execute(job: Job, command: str = "run", workers: int = 1) -> dict:
    """Compute the results block for ``command``."""
    _check_command(job, command)
    results = {}
    if command in ("transition", "marginal", "run"):
        results["transitions"] = _transitions(job, workers, with_pi=True)
    if command == "waiting":
        results["waiting"] = _waiting(job, workers)
    if command == "warranty" or (command == "run" and job.policy is not None):
        results["expense"] = _expense(job)
    if command == "compare" or (command == "run" and job.compare):
        results["compare"] = _compare(job, workers)
    return results


def run(config, command: str = "run", digits=None, output=None):
    """Parse ``config`` (JSON text or mapping) and compute.

    Returns ``(exit_code, document, message)``.  ``document`` mirrors the
    configuration with an added ``results`` block; it is ``None`` on failure,
    in which case ``message`` says why.
    """
    if command not in COMMANDS:
        return EXIT_CONFIG, None, f"unknown command {command!r}"
    try:
        job = parse_config(config, digits=digits, output=output)
        workers = _max_workers()
        _check_command(job, command)
    except ConfigError as exc:
        return EXIT_CONFIG, None, str(exc)
    try:
        results = execute(job, command, workers)
    except Exception as exc:  # noqa: BLE001 - every solver failure maps to one exit code
        return EXIT_NUMERIC, None, f"numerical failure: {exc}"
    doc = job.raw.model_dump(by_alias=True, exclude_none=True, mode="json")
    doc["output"] = job.output
    if digits is not None:
        doc.setdefault("inversion", {})["targetDecimalDigits"] = job.inversion.target_digits
    doc["results"] = results
    return EXIT_OK, doc, None


def render_json(doc: dict) -> str:
    # repr-based float output round-trips bit for bit
    return json.dumps(doc, indent=2, allow_nan=True) + "\n"


def render_csv(doc: dict, command: str) -> str:
    """Flatten one table of the results block.

    ``transition``/``marginal``/``run`` write ``t,u,i,j,p,method,range_warning``
    (``marginal`` writes ``t,u,j,pi`` instead), ``compare`` writes one row per
    entry with the three solver values, ``waiting`` one row per state and
    ``warranty`` one row per region plus a total.
    """
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    res = doc["results"]
    labels = doc.get("states") or [str(i) for i in range(len(doc["generator"]))]
    r = repr
    if command == "marginal":
        w.writerow(["t", "u", "j", "pi"])
        for e in res["transitions"]:
            for j, v in enumerate(e["pi"]):
                w.writerow([r(e["t"]), r(e["u"]), labels[j], r(v)])
    elif command in ("transition", "run"):
        w.writerow(["t", "u", "i", "j", "p", "method", "range_warning"])
        for e in res["transitions"]:
            for i, row in enumerate(e["p"]):
                for j, v in enumerate(row):
                    w.writerow([r(e["t"]), r(e["u"]), labels[i], labels[j], r(v),
                                e["method"], str(e["rangeWarning"]).lower()])
    elif command == "compare":
        w.writerow(["t", "u", "i", "j", *METHODS, "max_deviation"])
        for e in res["compare"]:
            for i, j in itertools.product(range(len(labels)), repeat=2):
                vals = [e[m][i][j] for m in METHODS]
                w.writerow([r(e["t"]), r(e["u"]), labels[i], labels[j],
                            *map(r, vals), r(max(vals) - min(vals))])
    elif command == "waiting":
        w.writerow(["t", "u", "state", "cdf", "survival"])
        for e in res["waiting"]:
            cdf, surv = e.get("cdf", {}), e.get("survival", {})
            for label in labels:
                if label in cdf or label in surv:
                    w.writerow([r(e["t"]), r(e["u"]), label,
                                r(cdf[label]) if label in cdf else "",
                                r(surv[label]) if label in surv else ""])
    elif command == "warranty":
        ex = res["expense"]
        w.writerow(["region", "t_limit", "u_limit", "cost", "probability", "contribution"])
        for k, reg in enumerate(doc["policy"]["regions"]):
            w.writerow([k, r(reg["tLimit"]), r(reg["uLimit"]), r(reg["cost"]),
                        r(ex["probabilities"][k]), r(ex["contributions"][k])])
        w.writerow(["total", "", "", "", "", r(ex["ewe"])])
    return buf.getvalue()


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS,
                        help="JSON run configuration")
    common.add_argument("--output", choices=("csv", "json"), default=argparse.SUPPRESS)
    common.add_argument("--digits", type=int, metavar="N", default=argparse.SUPPRESS,
                        help="target decimal digits of the Laplace inversion")
    parser = argparse.ArgumentParser(
        prog="biparam", parents=[common],
        description="Transition probabilities, waiting regions and warranty costs "
                    "for two-parameter Markov chains.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "transition": "P(t, u) at every query point",
        "marginal": "P(t, u) and pi(t, u) = pi(0, 0) P(t, u)",
        "waiting": "waiting-region CDFs and survival probabilities",
        "warranty": "expected warranty expense of the policy",
        "compare": "run all three solvers and report deviations",
        "run": "everything the configuration asks for",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    path = getattr(args, "config", None)
    if path is None:
        print("biparam: error: --config PATH is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        print(f"biparam: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code, doc, message = run(text, args.command, getattr(args, "digits", None),
                             getattr(args, "output", None))
    if code != EXIT_OK:
        print(f"biparam: {message}", file=sys.stderr)
        return code
    for e in doc["results"].get("transitions", []):
        if e["rangeWarning"]:
            log.warning("P(%g, %g) has entries outside [0, 1]", e["t"], e["u"])
    if doc["output"] == "csv":
        sys.stdout.write(render_csv(doc, args.command))
    else:
        sys.stdout.write(render_json(doc))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
