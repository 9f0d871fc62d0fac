"""Command-line front end: ``weyl``, ``act``, ``verify`` and ``gkdim``.

Every command prints JSON (``verify`` prints one JSON object per line).  Exit
codes: 0 pass, 1 check failure, 2 usage or parse error, 3 numerical ambiguity
(truncation contact or an ambiguous rank decision).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import corep, fock, gkdim, weyl
from .closure import METHODS
from .corep import AlgebraSpec
from .fock import TruncationError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_AMBIGUOUS = 0, 1, 2, 3


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    family: weyl.Family
    rank: int
    word: list[int]
    normal_form: weyl.NormalForm | None = None
    t: tuple[complex, ...] = ()
    q: float = 0.5
    cutoff: int = 16
    k_max: int = 12
    tol: float = 1e-8
    quotient_m: int | None = None
    entry: tuple[int, int] | None = None
    dense: bool = False
    method: str = "exact"
    out: Path | None = None
    seed: int = 0

    @property
    def spec(self) -> AlgebraSpec:
        return AlgebraSpec(self.family, self.rank, self.q, self.t, self.cutoff)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--family", required=True, choices=["A", "C", "D"])
    common.add_argument("--rank", required=True, type=int)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--word", help='reduced word, e.g. "1 2 3 4 2"')
    src.add_argument("--normal-form", dest="normal_form", help='parts "r,k,eps;..."')
    common.add_argument("--t", default=None, help="torus parameters, comma separated unit complex numbers")
    common.add_argument("--q", type=float, default=0.5)
    common.add_argument("--kmax", type=int, default=12)
    common.add_argument("--cutoff", type=int, default=None, help="default: kmax + 4")
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--quotient", type=int, default=None, metavar="M")
    common.add_argument("--entry", default=None, metavar="K,L")
    common.add_argument("--dense", action="store_true")
    common.add_argument("--method", choices=METHODS, default="exact")
    common.add_argument("--out", type=Path, default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="qgk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("weyl", parents=[common], help="element matrix, length, normal form")
    sub.add_parser("act", parents=[common], help="paths of one generator entry")
    sub.add_parser("verify", parents=[common], help="identity checks, one JSON line each")
    sub.add_parser("gkdim", parents=[common], help="growth report")
    return parser


def _parse_entry(text: str, N: int) -> tuple[int, int]:
    parts = text.replace(" ", "").split(",")
    if len(parts) != 2 or not all(p.lstrip("-").isdigit() for p in parts):
        raise UsageError(f'--entry expects "k,l", got {text!r}')
    k, l = int(parts[0]), int(parts[1])
    if not (1 <= k <= N and 1 <= l <= N):
        raise UsageError(f"--entry indices must lie in 1..{N}")
    return k, l


def make_config(args: argparse.Namespace) -> RunConfig:
    try:
        family = weyl.check_rank(args.family, args.rank)
        nf = None
        if args.normal_form is not None:
            nf = weyl.parse_normal_form(family, args.rank, args.normal_form)
            word = nf.word()
        else:
            word = weyl.parse_word(args.word or "")
            bad = [i for i in word if not 1 <= i <= args.rank]
            if bad:
                raise UsageError(f"generator index {bad[0]} out of range 1..{args.rank}")
        t = corep.parse_torus(args.t, args.rank) if args.t else ()
        cutoff = args.kmax + 4 if args.cutoff is None else args.cutoff
        cfg = RunConfig(args.command, family, args.rank, word, nf, t, args.q, cutoff, args.kmax,
                        args.tol, args.quotient, None, args.dense, args.method, args.out, args.seed)
        cfg.spec  # validates q, t and cutoff
        if args.entry is not None:
            cfg.entry = _parse_entry(args.entry, cfg.spec.N)
    except UsageError:
        raise
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return cfg


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out is not None:
        cfg.out.write_text(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def _complex(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


# --- commands -----------------------------------------------------------------

def cmd_weyl(cfg: RunConfig) -> int:
    w = weyl.word_to_element(cfg.family, cfg.rank, cfg.word)
    reduced = weyl.is_reduced(cfg.family, cfg.rank, cfg.word)
    nf = weyl.normal_form(w)
    report = {
        "family": cfg.family.value,
        "rank": cfg.rank,
        "word": cfg.word,
        "is_reduced": reduced,
        "length": weyl.length(w),
        "matrix": w.matrix(),
        "normal_form": weyl.format_normal_form(nf),
        "normal_form_word": nf.word(),
    }
    if cfg.quotient_m is not None:
        if not 1 <= cfg.quotient_m <= cfg.rank:
            raise UsageError(f"--quotient must lie in 1..{cfg.rank}")
        S = weyl.parabolic_subset(cfg.family, cfg.rank, cfg.rank - cfg.quotient_m + 1)
        report["quotient_m"] = cfg.quotient_m
        report["parabolic_subset"] = sorted(S)
        report["min_coset_rep"] = weyl.is_min_coset_rep(w, S)
    _emit(cfg, _dumps(report))
    return EXIT_PASS


def cmd_act(cfg: RunConfig) -> int:
    spec = cfg.spec
    action = corep.word_action(spec, cfg.word)
    entries = [cfg.entry] if cfg.entry else action.entries()
    out = []
    for k, l in entries:
        op = action.entry(k, l)
        item = {
            "entry": [k, l],
            "zero": op.is_zero,
            "text": str(op),
            "paths": [{"scalar": _complex(p.scalar), "legs": [str(leg) for leg in p.legs]} for p in op.paths],
        }
        if cfg.dense:
            mat = fock.dense_matrix(op, spec.q, spec.cutoff)
            item["dense"] = {"cutoff": spec.cutoff, "real": np.round(mat.real, 15).tolist(),
                             "imag": np.round(mat.imag, 15).tolist()}
        out.append(item)
    report = {"family": cfg.family.value, "rank": cfg.rank, "word": cfg.word, "q": spec.q,
              "t": [_complex(z) for z in spec.t], "entries": out}
    _emit(cfg, _dumps(report))
    return EXIT_PASS


def verify_checks(cfg: RunConfig) -> list[dict]:
    """Every identity check for the configured module, as JSON-ready dicts."""
    spec = cfg.spec
    nf = cfg.normal_form or weyl.normal_form(weyl.word_to_element(cfg.family, cfg.rank, cfg.word))
    rows: list[dict] = []

    def add(kind, label, ok, detail=""):
        rows.append({"check": kind, "label": label, "ok": bool(ok), "detail": detail})

    for c in gkdim.lemma_checks(spec, nf, seed=cfg.seed):
        add(c.kind, c.label, c.ok, c.detail)
    rows_allowed = gkdim.quotient_rows(spec, cfg.quotient_m) if cfg.quotient_m else None
    cert = gkdim.hitting_polynomials(spec, nf, rows=rows_allowed, seed=cfg.seed)
    for c in cert.checks:
        add(c.kind, c.label, c.ok, c.detail)
    for i in range(1, cfg.rank + 1):
        err = corep.unitarity_defect(spec, i, cutoff=min(spec.cutoff, 8))
        add("unitarity", f"s{i}", err <= 1e-12, f"defect {err:.3g}")
    L = len(nf.word())
    small = max(2, min(4, spec.cutoff))
    err = corep.bracketing_defect(spec, nf.word(), cutoff=small, seed=cfg.seed) if L else 0.0
    add("bracketing", "left vs right fold", err <= 1e-12, f"defect {err:.3g}")
    return rows


def cmd_verify(cfg: RunConfig) -> int:
    rows = verify_checks(cfg)
    failed = sum(not r["ok"] for r in rows)
    lines = [json.dumps(r, sort_keys=True) for r in rows]
    lines.append(json.dumps({"summary": True, "checks_passed": len(rows) - failed,
                             "checks_failed": failed, "pass": failed == 0}, sort_keys=True))
    _emit(cfg, "\n".join(lines))
    return EXIT_PASS if failed == 0 else EXIT_FAIL


def cmd_gkdim(cfg: RunConfig) -> int:
    report = gkdim.gk_report(cfg.spec, cfg.word, cfg.k_max, tol=cfg.tol, quotient_m=cfg.quotient_m,
                             method=cfg.method, seed=cfg.seed)
    if cfg.out is not None and cfg.out.suffix.lower() == ".csv":
        _emit(cfg, report.to_csv())
    else:
        _emit(cfg, report.to_json())
    if report.pass_:
        return EXIT_PASS
    if report.series.ambiguous:
        return EXIT_AMBIGUOUS
    return EXIT_FAIL


COMMANDS = {"weyl": cmd_weyl, "act": cmd_act, "verify": cmd_verify, "gkdim": cmd_gkdim}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PASS if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        if cfg.command != "weyl" and not weyl.is_reduced(cfg.family, cfg.rank, cfg.word):
            raise UsageError(f"word {cfg.word} is not reduced")
        return COMMANDS[cfg.command](cfg)
    except (UsageError, gkdim.QuotientError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TruncationError as exc:
        print(f"ambiguous: {exc}", file=sys.stderr)
        return EXIT_AMBIGUOUS


if __name__ == "__main__":
    sys.exit(main())
