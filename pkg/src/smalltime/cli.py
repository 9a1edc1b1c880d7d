"""Command-line front end.

Every command writes one JSON report to stdout (or ``--out``). Exit codes:
0 success / consistent, 1 configuration or usage error, 2 numerical or model
error, 3 verification verdict other than CONSISTENT.
"""

import argparse
import csv
import os
import sys

from . import config
from .asymptotics import classify, implied_vol_asymptote
from .errors import ConfigError, DomainError, SmallTimeError
from .impliedvol import atm_implied_vol
from .mc import (POWER_WITH_LOG, PURE_POWER, Mean, MedianOfMeans, estimate_call, fit_rate,
                 price_curve)
from .model import OrderTag
from .sampler import RngStream, is_heavy_tailed

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_VERDICT = 0, 1, 2, 3

CONSISTENT, INCONSISTENT, INCONCLUSIVE = "CONSISTENT", "INCONSISTENT", "INCONCLUSIVE"


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors; the contract reserves 2 for numerics
    def error(self, message):
        raise _UsageError(message)


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must lie in [0, 2**64)")
    return value


def _default_seed():
    env = os.environ.get("SMALLTIME_SEED")
    if env is None:
        return 0
    try:
        return _seed(env)
    except argparse.ArgumentTypeError as exc:
        raise _UsageError(f"SMALLTIME_SEED: {exc}") from None


def parse_grid(text):
    """``"a:b"`` is the dyadic grid ``2**-a .. 2**-b``; otherwise comma-separated T values."""
    text = text.strip()
    try:
        if ":" in text:
            a, b = (int(p) for p in text.split(":"))
            if b <= a:
                raise ValueError
            return [2.0 ** -k for k in range(a, b + 1)]
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"grid must be 'a:b' with a < b or a comma-separated list, got {text!r}") from None


def _emit(report, out):
    text = config.dumps(report)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)


def _classification(model, strike):
    res = classify(model, strike)
    block = {"order": {"tag": res.order.tag.value, "exponent": res.order.exponent},
             "coefficient": res.coefficient,
             "moneyness_theta": res.moneyness_theta,
             "implied_vol_asymptote": None}
    try:
        iv = implied_vol_asymptote(model)
        block["implied_vol_asymptote"] = {"form": iv.form.value, "coefficient": iv.coefficient,
                                          "exponent": iv.exponent}
    except (DomainError, SmallTimeError):
        # no implied volatility at s0 <= 0 or off the supported regimes
        pass
    return res, block


def _estimator_for(model, n_paths, blocks):
    if not is_heavy_tailed(model) and blocks is None:
        return Mean()
    if blocks is None:
        blocks = 64 if n_paths >= 64 * 1000 else 8
    return MedianOfMeans(blocks)


def _estimator_json(est):
    if isinstance(est, Mean):
        return {"type": "Mean"}
    return {"type": "MedianOfMeans", "blocks": est.blocks}


def _estimate_json(est):
    return {"value": est.value, "half_width": est.half_width, "n_paths": est.n_paths,
            "estimator": _estimator_json(est.estimator), "seed": est.seed}


def cmd_analyze(args):
    model, strike = config.load_config(args.config)
    _, block = _classification(model, strike)
    return {"command": "analyze", "model": model, "strike": strike,
            "classification": block}, EXIT_OK


def verdict(rows, fit, nominal_exponent, tol, margin):
    """Verdict from per-maturity rows (decreasing ``T``) and the rate fit.

    CONSISTENT iff the fitted exponent is within ``margin`` of the nominal one
    and the ratios at the two smallest maturities lie in ``[1 - tol, 1 + tol]``.
    Otherwise INCONCLUSIVE when the relative half-width at either of those
    maturities exceeds ``tol``, else INCONSISTENT.
    """
    tail = rows[-2:]
    ratios_ok = all(r["ratio"] is not None and abs(r["ratio"] - 1.0) <= tol for r in tail)
    exponent_ok = (nominal_exponent is None or fit is None
                   or abs(fit.exponent_hat - nominal_exponent) <= margin)
    if ratios_ok and exponent_ok:
        return CONSISTENT
    wide = any(r["asymptote_value"] > 0 and r["half_width"] / r["asymptote_value"] > tol
               for r in tail)
    return INCONCLUSIVE if wide else INCONSISTENT


def cmd_verify(args):
    model, strike = config.load_config(args.config)
    res, block = _classification(model, strike)
    coeff = res.coefficient if args.expect_coeff is None else args.expect_coeff
    block["expected_coefficient"] = coeff
    estimator = _estimator_for(model, args.paths, args.blocks)
    rng = RngStream(args.seed)
    curve = price_curve(model, strike, args.grid, args.paths, estimator, rng,
                        workers=args.workers)
    rows = []
    for T, est in curve:
        asym = coeff * res.order.rate(T)
        ratio = est.value / asym if asym > 0 else (1.0 if est.value == 0 else None)
        rows.append({"T": T, "mc_value": est.value, "half_width": est.half_width,
                     "asymptote_value": asym, "ratio": ratio})
    fit = None
    tag = res.order.tag
    if tag is not OrderTag.TRIVIAL and all(r["mc_value"] > 0 for r in rows):
        fit = fit_rate([(r["T"], r["mc_value"]) for r in rows],
                       POWER_WITH_LOG if tag is OrderTag.T_LOG_T else PURE_POWER,
                       [r["half_width"] for r in rows])
    nominal = None if tag is OrderTag.T_LOG_T else res.order.nominal_exponent
    if tag is not OrderTag.TRIVIAL and fit is None:
        result = INCONCLUSIVE
    else:
        result = verdict(rows, fit, nominal, args.tol, args.margin)
    if args.csv_out:
        with open(args.csv_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["T", "mc_value", "half_width", "asymptote_value", "ratio"])
            for r in rows:
                w.writerow([_g(r[k]) for k in ("T", "mc_value", "half_width",
                                                 "asymptote_value", "ratio")])
    report = {"command": "verify", "model": model, "strike": strike,
              "classification": block, "estimator": _estimator_json(estimator),
              "n_paths": args.paths, "tol": args.tol, "margin": args.margin, "rows": rows,
              "fit": fit, "verdict": result, "seed": args.seed}
    return report, EXIT_OK if result == CONSISTENT else EXIT_VERDICT


def _g(x):
    return "" if x is None else format(x, ".17g")


def cmd_implied_vol(args):
    r = atm_implied_vol(args.price, args.s0, args.maturity)
    return {"command": "implied-vol", "price": args.price, "s0": args.s0,
            "maturity": args.maturity, "sigma_impl": r.sigma_impl, "infinite": r.infinite,
            "residual": r.residual, "iterations": r.iterations}, EXIT_OK


def cmd_mc_price(args):
    model, strike = config.load_config(args.config)
    estimator = _estimator_for(model, args.paths, args.blocks)
    est = estimate_call(model, strike, args.maturity, args.paths, estimator,
                        RngStream(args.seed), workers=args.workers)
    return {"command": "mc-price", "model": model, "strike": strike,
            "maturity": args.maturity, "estimate": _estimate_json(est),
            "seed": args.seed}, EXIT_OK


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def _header_columns(header, lineno):
    names = [c.strip() for c in header]
    value = "mc_value" if "mc_value" in names else "value"
    if "T" not in names or value not in names:
        raise ConfigError("header must name columns 'T' and 'value' (or 'mc_value')",
                          f"/{lineno}")
    cols = [names.index("T"), names.index(value)]
    if "half_width" in names:
        cols.append(names.index("half_width"))
    return cols


def read_curve_csv(path):
    """``(points, half_widths)`` from a curve CSV.

    Without a header the columns are ``T,value[,half_width]``. With a header
    the columns ``T``, ``value`` (or ``mc_value``) and optionally
    ``half_width`` are picked by name, so ``verify --csv-out`` files work.
    """
    points, hws = [], []
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", "") from None
    cols = None
    with fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not any(c.strip() for c in row):
                continue
            if lineno == 1 and not _is_number(row[0]):
                cols = _header_columns(row, lineno)
                continue
            row = [c.strip() for c in row]
            if cols is None:
                row = [c for c in row if c]
                if len(row) not in (2, 3):
                    raise ConfigError(f"line {lineno}: expected 2 or 3 columns", f"/{lineno}")
                picked = row
            else:
                if len(row) <= max(cols):
                    raise ConfigError(f"line {lineno}: too few columns", f"/{lineno}")
                picked = [row[i] for i in cols]
            try:
                vals = [float(c) for c in picked]
            except ValueError:
                raise ConfigError(f"line {lineno}: non-numeric entry", f"/{lineno}") from None
            points.append((vals[0], vals[1]))
            hws.append(vals[2] if len(vals) == 3 else None)
    if any(h is None for h in hws):
        hws = None
    return points, hws


def cmd_fit_rate(args):
    points, hws = read_curve_csv(args.csv)
    fit = fit_rate(points, args.model_class, hws)
    return {"command": "fit-rate", "points": [list(p) for p in points],
            "half_widths": hws, "fit": fit}, EXIT_OK


def build_parser():
    p = _Parser(prog="smalltime", description="Small-maturity call asymptotics and checks.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, paths=None):
        sp.add_argument("--out", help="also write the JSON report to this file")
        if paths is not None:
            sp.add_argument("--paths", type=int, default=paths)
            sp.add_argument("--seed", type=_seed, default=None,
                            help="RNG seed (default: $SMALLTIME_SEED or 0)")
            sp.add_argument("--workers", type=int, default=1)
            sp.add_argument("--blocks", type=int, default=None,
                            help="median-of-means block count (forces the robust estimator)")

    a = sub.add_parser("analyze", help="classify a model (no simulation)")
    a.add_argument("config")
    common(a)
    a.set_defaults(func=cmd_analyze)

    v = sub.add_parser("verify", help="compare Monte Carlo prices with the leading term")
    v.add_argument("config")
    v.add_argument("--grid", type=parse_grid, default=parse_grid("4:8"),
                   help="'a:b' for 2^-a..2^-b, or comma-separated maturities (default 4:8)")
    v.add_argument("--tol", type=float, default=0.05, help="relative ratio tolerance")
    v.add_argument("--margin", type=float, default=0.05, help="exponent margin")
    v.add_argument("--expect-coeff", type=float, default=None,
                   help="override the expected leading coefficient")
    v.add_argument("--csv-out", help="write the per-maturity rows as CSV")
    common(v, paths=200_000)
    v.set_defaults(func=cmd_verify)

    iv = sub.add_parser("implied-vol", help="ATM Black-Scholes implied volatility")
    iv.add_argument("--price", type=float, required=True)
    iv.add_argument("--s0", type=float, required=True)
    iv.add_argument("--maturity", type=float, required=True)
    common(iv)
    iv.set_defaults(func=cmd_implied_vol)

    m = sub.add_parser("mc-price", help="Monte Carlo call price at one maturity")
    m.add_argument("config")
    m.add_argument("--maturity", type=float, required=True)
    common(m, paths=1_000_000)
    m.set_defaults(func=cmd_mc_price)

    f = sub.add_parser("fit-rate", help="fit a rate to a T,value[,half_width] CSV")
    f.add_argument("--csv", required=True)
    f.add_argument("--model-class", choices=[PURE_POWER, POWER_WITH_LOG], default=PURE_POWER)
    common(f)
    f.set_defaults(func=cmd_fit_rate)
    return p


def _error(kind, message, pointer=None):
    body = {"error": kind, "message": message}
    if pointer is not None:
        body["pointer"] = pointer
    sys.stderr.write(config.dumps(body))


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "seed", 0) is None:
            args.seed = _default_seed()
    except _UsageError as exc:
        _error("UsageError", str(exc))
        return EXIT_CONFIG
    try:
        report, code = args.func(args)
    except ConfigError as exc:
        _error("ConfigError", exc.reason, exc.pointer)
        return EXIT_CONFIG
    except (SmallTimeError, ValueError, ArithmeticError) as exc:
        _error(type(exc).__name__, str(exc))
        return EXIT_NUMERIC
    _emit(report, args.out)
    return code


if __name__ == "__main__":
    sys.exit(main())
