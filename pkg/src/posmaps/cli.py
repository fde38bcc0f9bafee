"""Command-line front end: JSON in, JSON out.

Exit codes: 0 ran to a verdict, 1 ``verify`` rejected a certificate,
2 invalid input, 3 iteration budget exhausted.

Every response echoes its input so that ``posmaps verify`` can re-check the
certificate offline.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys

import numpy as np
from jsonschema import Draft202012Validator
from jsonschema.exceptions import best_match

from . import __version__
from .decomp import DEFAULT_EPS_SCHEDULE, decompose_general, verify_decomposition
from .errors import NoConvergence, PosMapsError
from .extremal import classify, kadison_extract, on_boundary, preserves_cone
from .lorentz import minkowski_j
from .numkit import lambda_min
from .positivity import (
    is_ccp,
    is_cp,
    is_positive,
    is_unital,
    is_trace_preserving,
    interior_report,
)
from .ppt import partial_transpose, separability_verdict
from .qmap import QubitMap, apply, from_kraus, random_map
from .scaling import bistochastic_residuals, scale_to_bistochastic, scaled_map
from .slemma import SLemmaOutcome, check_outcome, decide, reformulated_decide

log = logging.getLogger("posmaps")

EXIT_OK, EXIT_REJECTED, EXIT_INVALID, EXIT_BUDGET = 0, 1, 2, 3
COMMANDS = ("check", "scale", "decompose", "slemma", "extreme", "ppt", "random", "verify")
RANDOM_KINDS = ("interior", "cp", "ccp", "boundary", "nonpositive")
MAP_COMMANDS = ("check", "scale", "decompose", "extreme")


class InputError(Exception):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message


# ------------------------------------------------------------------- schemas

_NUM = {"type": "number"}
_COMPLEX = {"oneOf": [_NUM, {"type": "array", "prefixItems": [_NUM, _NUM], "items": False,
                            "minItems": 2}]}


def _matrix(entry, n=None):
    row = {"type": "array", "items": entry, "minItems": 1}
    mat = {"type": "array", "items": row, "minItems": 1}
    if n is not None:
        row.update(minItems=n, maxItems=n)
        mat.update(minItems=n, maxItems=n)
    return mat


_QUBIT_MAP = {
    "oneOf": [
        {"type": "object", "properties": {"ptm": _matrix(_NUM, 4)}, "required": ["ptm"],
         "additionalProperties": False},
        {"type": "object",
         "properties": {"kraus": {"type": "array", "items": _matrix(_COMPLEX, 2)},
                        "co_kraus": {"type": "array", "items": _matrix(_COMPLEX, 2)}},
         "anyOf": [{"required": ["kraus"]}, {"required": ["co_kraus"]}],
         "additionalProperties": False},
    ]
}

SCHEMAS = {
    "check": _QUBIT_MAP,
    "scale": _QUBIT_MAP,
    "decompose": _QUBIT_MAP,
    "extreme": {"oneOf": [_QUBIT_MAP["oneOf"][1],
                          {"type": "object", "properties": {"ptm": _matrix(_NUM)},
                           "required": ["ptm"], "additionalProperties": False}]},
    "slemma": {"oneOf": [
        {"type": "object",
         "properties": {"F": _matrix(_NUM), "G": _matrix(_NUM),
                        "xbar": {"type": "array", "items": _NUM, "minItems": 1}},
         "required": ["F", "G"], "additionalProperties": False},
        {"type": "object", "properties": {"M": _matrix(_NUM), "N": _matrix(_NUM)},
         "required": ["M", "N"], "additionalProperties": False},
    ]},
    "ppt": {"type": "object", "properties": {"rho": _matrix(_COMPLEX, 4)}, "required": ["rho"],
            "additionalProperties": False},
    "random": {"type": "object",
               "properties": {"kind": {"enum": list(RANDOM_KINDS)},
                              "t": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                              "seed": {"type": "integer", "minimum": 0}},
               "additionalProperties": False},
    "verify": {"type": "object",
               "properties": {"command": {"enum": [c for c in COMMANDS if c != "verify"]},
                              "input": {}, "result": {"type": "object"}, "version": {},
                              "options": {"type": "object"}},
               "required": ["command", "input", "result"], "additionalProperties": False},
}


def _path(error):
    out = "$"
    for p in error.absolute_path:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _known_fields(schema):
    if "oneOf" in schema:
        return set().union(*(_known_fields(s) for s in schema["oneOf"]))
    return set(schema.get("properties", {}))


def validate(command, doc, prefix="$"):
    """Raise :class:`InputError` pointing at the first offending field."""
    schema = SCHEMAS[command]
    if isinstance(doc, dict):
        for key in doc:
            if key not in _known_fields(schema):
                raise InputError(f"{prefix}.{key}", "unknown field")
    err = best_match(Draft202012Validator(schema).iter_errors(doc))
    if err is None:
        return
    # a failed oneOf is reported from the branch that got furthest
    while err.context:
        err = max(err.context, key=lambda e: (len(e.absolute_path), e.validator != "oneOf"))
    raise InputError(prefix + _path(err)[1:], err.message)


# ------------------------------------------------------------- conversions

def _complex_matrix(rows, path):
    out = np.array([[complex(*e) if isinstance(e, list) else complex(e) for e in r] for r in rows])
    if out.ndim != 2:
        raise InputError(path, "rows have unequal length")
    return out


def _real_square(rows, path):
    try:
        M = np.array(rows, dtype=float)
    except ValueError:
        raise InputError(path, "rows have unequal length") from None
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InputError(path, f"expected a square matrix, got shape {M.shape}")
    return M


def load_map(doc) -> QubitMap:
    if "ptm" in doc:
        return QubitMap(np.array(doc["ptm"], dtype=float))
    kraus = [_complex_matrix(k, f"$.kraus[{i}]") for i, k in enumerate(doc.get("kraus", []))]
    co = [_complex_matrix(k, f"$.co_kraus[{i}]") for i, k in enumerate(doc.get("co_kraus", []))]
    if not kraus and not co:
        raise InputError("$", "at least one Kraus or co-Kraus operator is required")
    return from_kraus(kraus, co)


def to_json(x):
    """Plain Python structure; complex entries become ``[re, im]`` pairs."""
    if isinstance(x, dict):
        return {str(k): to_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_json(v) for v in x]
    if isinstance(x, np.ndarray):
        return to_json(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def dumps(x, indent=2, _level=0):
    """JSON text with floats at 17 significant digits (non-finite as ``null``)."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(x, list):
        if not x:
            return "[]"
        if all(not isinstance(v, (list, dict)) for v in x):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in x) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in x) + "\n" + end + "]"
    if isinstance(x, bool) or x is None:
        return json.dumps(x)
    if isinstance(x, float):
        return format(x, ".17g") if math.isfinite(x) else "null"
    return json.dumps(x)


# ---------------------------------------------------------------- commands

def cmd_check(doc, opts):
    m = load_map(doc)
    pos = is_positive(m)
    inter = interior_report(m)
    cp, cpm = is_cp(m, opts.tol)
    ccp, ccpm = is_ccp(m, opts.tol)
    out = {
        "positive": pos.positive,
        "orientation": pos.orientation,
        "g_star": pos.g_star,
        "mu": pos.mu,
        "threshold": pos.threshold,
        "interior": inter.interior,
        "interior_margin": inter.relative_margin,
        "boundary_band": inter.boundary_band,
        "cp": bool(cp), "cp_min_eigenvalue": cpm,
        "ccp": bool(ccp), "ccp_min_eigenvalue": ccpm,
        "unital": is_unital(m, opts.tol),
        "trace_preserving": is_trace_preserving(m, opts.tol),
    }
    if pos.violating_state is not None:
        out["violating_state"] = pos.violating_state
        out["violating_eigenvalue"] = pos.violating_eigenvalue
    return out


def cmd_scale(doc, opts):
    m = load_map(doc)
    res = scale_to_bistochastic(m, tol=opts.tol, max_iter=opts.max_iter)
    return {
        "A": res.A, "B": res.B, "sigma0": res.sigma0, "scaled_ptm": res.scaled.ptm,
        "iterations": res.iterations, "scheme": res.scheme,
        "residual_unital": res.residual_unital, "residual_tp": res.residual_tp,
        "fixed_point_residual": res.fixed_point_residual, "warnings": res.warnings,
    }


def cmd_decompose(doc, opts):
    m = load_map(doc)
    rep = decompose_general(m, eps_schedule=opts.eps, tol=opts.tol, max_iter=opts.max_iter)
    d = rep.decomposition
    return {
        "kraus": d.kraus, "co_kraus": d.co_kraus, "n_terms": d.n_terms,
        "residual": rep.residual, "path": rep.path, "eps": rep.eps,
        "scaling_iterations": rep.scaling_iterations, "attempts": rep.attempts,
    }


def _slemma_pair(doc):
    if "F" in doc:
        F, G = _real_square(doc["F"], "$.F"), _real_square(doc["G"], "$.G")
    else:
        F, G = _real_square(doc["M"], "$.M"), -_real_square(doc["N"], "$.N")
    if F.shape != G.shape:
        raise InputError("$", f"matrix shapes differ: {F.shape} vs {G.shape}")
    return F, G


def cmd_slemma(doc, opts):
    F, G = _slemma_pair(doc)
    if "F" in doc:
        if "xbar" in doc:
            xbar = np.array(doc["xbar"], dtype=float)
            if xbar.shape != (F.shape[0],):
                raise InputError("$.xbar", f"expected length {F.shape[0]}")
        else:
            xbar = np.linalg.eigh(0.5 * (G + G.T))[1][:, -1]
        out = decide(F, G, xbar, tol=opts.tol, seed=opts.seed)
        return {"verdict": out.verdict, "g_star": out.g_star, "mu": out.mu, "Q": out.Q,
                "witness": out.witness, "margin": out.margin, "threshold": out.threshold,
                "xbar": xbar}
    out = reformulated_decide(F, -G, tol=opts.tol, seed=opts.seed)
    return {"verdict": out.kind, "t": out.t, "lambda_t": out.lambda_t, "x": out.x,
            "margin": out.margin, "corner": out.corner}


def cmd_extreme(doc, opts):
    if "ptm" in doc:
        L = _real_square(doc["ptm"], "$.ptm")
    else:
        L = load_map(doc).ptm
    v = classify(L)
    out = {"kind": v.kind, "rank": v.rank}
    for name in ("mu", "u", "v", "delta", "eps", "delta_kind"):
        if getattr(v, name) is not None:
            out[name] = getattr(v, name)
    if v.kind == "automorphism" and L.shape == (4, 4):
        try:
            V, is_co = kadison_extract(QubitMap(L))
            out["kadison"] = {"V": V, "is_co": is_co}
        except PosMapsError as exc:
            out["kadison"] = {"error": type(exc).__name__, "message": str(exc)}
    return out


def cmd_ppt(doc, opts):
    rho = _complex_matrix(doc["rho"], "$.rho")
    v = separability_verdict(rho)
    return {"verdict": v.verdict, "separable": v.separable,
            "min_pt_eigenvalue": v.min_pt_eigenvalue, "pt_eigenvalues": v.pt_eigenvalues}


def cmd_random(doc, opts):
    kind = doc.get("kind", opts.kind)
    t = doc.get("t", opts.t)
    seed = doc.get("seed", opts.seed)
    m = random_map(seed, kind, t)
    return {"ptm": m.ptm, "kind": kind, "t": t, "seed": seed}


# ----------------------------------------------------------------- verify

def _verify_check(inp, res, opts):
    m = load_map(inp)
    L = m.ptm
    if res["positive"]:
        J = minkowski_j(4)
        lm = lambda_min(L.T @ J @ L - res["mu"] * J)
        ok = res["mu"] >= 0 and lm >= -res["threshold"] and (L[0, 0] > 0 or not np.any(L))
        return ok, {"certificate_min_eigenvalue": lm}
    phi = np.array([complex(*e) for e in res["violating_state"]])
    img = apply(m, np.outer(phi, phi.conj()))
    lm = float(np.linalg.eigvalsh(0.5 * (img + img.conj().T))[0])
    return lm < 0, {"witness_min_eigenvalue": lm}


def _verify_scale(inp, res, opts):
    m = load_map(inp)
    A = _complex_matrix(res["A"], "$.result.A")
    B = _complex_matrix(res["B"], "$.result.B")
    ru, rt = bistochastic_residuals(scaled_map(m, A, B))
    pd = bool(np.linalg.eigvalsh(A)[0] > 0 and np.linalg.eigvalsh(B)[0] > 0)
    return pd and max(ru, rt) <= opts.tol, {"residual_unital": ru, "residual_tp": rt}


def _verify_decompose(inp, res, opts):
    m = load_map(inp)
    kraus = [_complex_matrix(k, "$.result.kraus") for k in res["kraus"]]
    co = [_complex_matrix(k, "$.result.co_kraus") for k in res["co_kraus"]]
    from .decomp import Decomposition

    r = verify_decomposition(m, Decomposition(kraus, co))
    claimed = res["residual"]
    consistent = abs(r - claimed) <= 1e-12 + 1e-6 * abs(claimed)
    return consistent and len(kraus) + len(co) <= 4, {"residual": r, "claimed": claimed}


def _verify_slemma(inp, res, opts):
    F, G = _slemma_pair(inp)
    if "F" in inp:
        feasible = res["verdict"] == "feasible"
        mu = res["mu"]
        w = None if feasible else np.array(res["witness"], dtype=float)
        ok, margin = check_outcome(F, G, SLemmaOutcome(feasible, res["g_star"], mu, witness=w),
                                   tol=opts.tol)
        return bool(ok), {"margin": margin}
    if res["verdict"] == "witness":
        t = res["t"]
        lm = lambda_min((1 - t) * F + t * G)
        return lm >= -opts.tol * (1 + np.linalg.norm(F) + np.linalg.norm(G)), {"lambda_t": lm}
    x = np.array(res["x"], dtype=float)
    vals = (float(x @ F @ x), float(x @ -G @ x))
    return max(vals) < 0, {"xMx": vals[0], "xNx": vals[1]}


def _verify_extreme(inp, res, opts):
    L = _real_square(inp["ptm"], "$.input.ptm") if "ptm" in inp else load_map(inp).ptm
    kind = res["kind"]
    if kind == "not_in_cone":
        return not preserves_cone(L).preserves, {}
    if kind == "automorphism":
        J = minkowski_j(L.shape[0])
        r = float(np.linalg.norm(L.T @ J @ L - res["mu"] * J))
        return r <= 1e-9 * np.linalg.norm(L) ** 2 and res["mu"] > 0, {"residual": r}
    if kind == "rank_one_extreme":
        u, v = np.array(res["u"]), np.array(res["v"])
        r = float(np.linalg.norm(L - np.outer(u, v)))
        ok = r <= 1e-9 * np.linalg.norm(L) and on_boundary(u) and on_boundary(v)
        return ok, {"residual": r}
    if "delta" not in res:
        return not np.any(L), {}
    D = np.array(res["delta"], dtype=float)
    plus, minus = preserves_cone(L + D).preserves, preserves_cone(L - D).preserves
    return plus and minus and np.any(D), {"plus": plus, "minus": minus}


def _verify_ppt(inp, res, opts):
    rho = _complex_matrix(inp["rho"], "$.input.rho")
    ev = np.linalg.eigvalsh(partial_transpose(0.5 * (rho + rho.conj().T)))
    ok = abs(ev[0] - res["min_pt_eigenvalue"]) <= 1e-12 and (ev[0] < -1e-10) == (not res["separable"])
    return ok, {"min_pt_eigenvalue": float(ev[0])}


def _verify_random(inp, res, opts):
    m = random_map(res["seed"], res["kind"], res["t"])
    r = float(np.linalg.norm(m.ptm - np.array(res["ptm"])))
    return r == 0.0, {"difference": r}


VERIFIERS = {
    "check": _verify_check, "scale": _verify_scale, "decompose": _verify_decompose,
    "slemma": _verify_slemma, "extreme": _verify_extreme, "ppt": _verify_ppt,
    "random": _verify_random,
}


def cmd_verify(doc, opts):
    inner = doc["command"]
    if inner != "random":
        validate(inner, doc["input"], prefix="$.input")
    ok, details = VERIFIERS[inner](doc["input"], doc["result"], opts)
    return {"verified": bool(ok), "command": inner, "details": details}


HANDLERS = {
    "check": cmd_check, "scale": cmd_scale, "decompose": cmd_decompose, "slemma": cmd_slemma,
    "extreme": cmd_extreme, "ppt": cmd_ppt, "random": cmd_random, "verify": cmd_verify,
}


# ------------------------------------------------------------------- driver

def run_one(command, doc, opts):
    """Returns ``(exit_code, response)`` for a single request document."""
    if (command in MAP_COMMANDS and isinstance(doc, dict) and doc.get("command") == "random"
            and isinstance(doc.get("result"), dict) and "ptm" in doc["result"]):
        # output of `random` piped straight in
        doc = {"ptm": doc["result"]["ptm"]}
    base = {"command": command, "version": __version__, "input": doc}
    try:
        validate(command, doc)
        result = HANDLERS[command](doc, opts)
    except InputError as exc:
        return EXIT_INVALID, {**base, "error": {"kind": "InvalidInput", "path": exc.path,
                                                "message": exc.message}}
    except NoConvergence as exc:
        return EXIT_BUDGET, {**base, "error": {"kind": "NoConvergence", "message": str(exc),
                                               "iterations": exc.iterations,
                                               "best_residual": exc.best_residual}}
    except (PosMapsError, ValueError) as exc:
        return EXIT_INVALID, {**base, "error": {"kind": type(exc).__name__, "path": "$",
                                                "message": str(exc)}}
    code = EXIT_OK
    if command == "verify" and not result["verified"]:
        code = EXIT_REJECTED
    return code, {**base, "options": opts.echo(), "result": to_json(result)}


def _eps_list(text):
    try:
        vals = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated list of floats: {text!r}") from None
    if not vals or any(not 0.0 < v < 1.0 for v in vals):
        raise argparse.ArgumentTypeError("eps values must lie in (0, 1)")
    return vals


def build_parser():
    p = argparse.ArgumentParser(prog="posmaps", description="Positive qubit maps: tests, "
                                "scaling, decompositions and certificates.")
    p.add_argument("--version", action="version", version=f"posmaps {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("files", nargs="*", help="JSON input files (stdin if none)")
        s.add_argument("--tol", type=float, default=1e-9)
        s.add_argument("--max-iter", type=int, default=10000)
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--eps", type=_eps_list, default=DEFAULT_EPS_SCHEDULE,
                       help="regularization schedule for boundary maps, e.g. 1e-2,1e-4,1e-6")
        s.add_argument("--batch", action="store_true", help="input is a JSON array of requests")
        s.add_argument("--quiet", action="store_true")
        if name == "random":
            s.add_argument("--kind", choices=RANDOM_KINDS, default="interior")
            s.add_argument("--t", type=float, default=0.3)
    return p


def _read_inputs(args):
    if args.command == "random" and not args.files:
        return [("<args>", {})]
    if not args.files:
        return [("<stdin>", sys.stdin.read())]
    out = []
    for f in args.files:
        with open(f, encoding="utf-8") as fh:
            out.append((f, fh.read()))
    return out


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.tol <= 0 or args.max_iter < 1 or args.seed < 0:
        print(dumps({"version": __version__, "error": {
            "kind": "InvalidInput", "path": "options",
            "message": "--tol must be > 0, --max-iter >= 1, --seed >= 0"}}))
        return EXIT_INVALID

    def echo():
        return {"tol": args.tol, "max_iter": args.max_iter, "seed": args.seed,
                "eps": list(args.eps)}

    args.echo = echo
    responses, codes = [], []
    for name, text in _read_inputs(args):
        if isinstance(text, str):
            try:
                doc = json.loads(text)
            except json.JSONDecodeError as exc:
                codes.append(EXIT_INVALID)
                responses.append({"version": __version__, "source": name, "error": {
                    "kind": "InvalidJSON", "path": "$", "message": str(exc)}})
                continue
        else:
            doc = text
        if args.batch:
            if not isinstance(doc, list):
                codes.append(EXIT_INVALID)
                responses.append({"version": __version__, "source": name, "error": {
                    "kind": "InvalidInput", "path": "$", "message": "--batch expects an array"}})
                continue
            items = [run_one(args.command, item, args) for item in doc]
            codes.append(max((c for c, _ in items), default=EXIT_OK))
            responses.append([{"index": i, "exit_code": c, **r} for i, (c, r) in enumerate(items)])
        else:
            code, resp = run_one(args.command, doc, args)
            codes.append(code)
            responses.append(resp)
        if codes[-1] != EXIT_OK and not args.quiet:
            log.warning("%s: exit code %d", name, codes[-1])
    out = responses[0] if len(responses) == 1 else responses
    print(dumps(to_json(out)))
    return max(codes)


if __name__ == "__main__":
    sys.exit(main())
