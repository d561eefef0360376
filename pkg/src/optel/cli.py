"""Command-line interface: ``optel <command> ...``.

State files are JSON objects ``{"re": 4x4, "im": 4x4, "basis": "AB-comp"}``
in the basis |00>, |01>, |10>, |11> with party A first. Reports go to stdout
as JSON; all floats are written with 17 significant digits so that files
round-trip bit for bit.

Exit codes: 0 ok, 1 verify failure, 2 invalid input, 3 solver failure,
4 degenerate normal form.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import teleport, verify
from .errors import (
    ConsistencyError,
    ConvergenceError,
    DegenerateNormalFormError,
    InvalidStateError,
    SolverError,
)
from .fstar import solve_dual, solve_primal
from .measures import analyze
from .normal_form import normal_form
from .qmat import HERM_TOL, random_density, validate_density

BASIS_TAG = "AB-comp"

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INVALID = 2
EXIT_SOLVER = 3
EXIT_DEGENERATE = 4


def fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialize non-finite value {x!r}")
    return format(float(x), ".17g")


def _to_jsonable(obj):
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return {"re": _to_jsonable(obj.real), "im": _to_jsonable(obj.imag)}
        return _to_jsonable(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, dict):
        return {str(k): _to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_jsonable(v) for v in obj]
    return obj


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with floats at 17 significant digits."""
    obj = _to_jsonable(obj)
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return fmt_float(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def state_record(rho: np.ndarray) -> dict:
    rho = np.asarray(rho, dtype=complex)
    return {"re": rho.real, "im": rho.imag, "basis": BASIS_TAG}


def write_state(path: Path, rho: np.ndarray) -> None:
    path.write_text(dumps(state_record(rho)) + "\n")


def read_state(path: str | Path, tol: float = HERM_TOL) -> np.ndarray:
    """Load and validate a state file; every problem surfaces as InvalidStateError."""
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise InvalidStateError(f"cannot read state file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InvalidStateError(f"state file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict) or "re" not in data:
        raise InvalidStateError("state file must be an object with 're' and 'im' arrays")
    basis = data.get("basis", BASIS_TAG)
    if basis != BASIS_TAG:
        raise InvalidStateError(f"unsupported basis tag {basis!r}; expected {BASIS_TAG!r}")
    try:
        re = np.asarray(data["re"], dtype=float)
        im = np.asarray(data.get("im", np.zeros((4, 4))), dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidStateError(f"state arrays are not numeric: {exc}") from exc
    if re.shape != (4, 4) or im.shape != (4, 4):
        raise InvalidStateError(f"state arrays must be 4x4, got {re.shape} and {im.shape}")
    return validate_density(re + 1j * im, tol=tol)


def _emit(payload, out: str | None) -> None:
    text = dumps(payload) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_analyze(args) -> int:
    rho = read_state(args.state, args.tol)
    rep = analyze(rho)
    _emit(
        {
            "singlet_fraction": rep.singlet_fraction,
            "psi_max": rep.achieving_me_state,
            "concurrence": rep.concurrence,
            "negativity": rep.negativity,
            "entangled": rep.entangled,
            "near_boundary": rep.near_boundary,
            "teleport_fidelity": rep.teleport_fidelity,
        },
        args.out,
    )
    return EXIT_OK


def cmd_fstar(args) -> int:
    rho = read_state(args.state)
    sol = solve_primal(rho, tol=args.tol)
    dual = solve_dual(rho, tol=args.tol)
    ext = sol.constraint_extremes()
    _emit(
        {
            "fstar": sol.fstar,
            "teleport_fidelity": sol.teleport_fidelity,
            "entangled": sol.entangled,
            "filter_A": sol.filter_A,
            "filter_trivial": sol.filter_trivial,
            "rank_gap": sol.rank_gap,
            "duality_gap": sol.duality_gap,
            "x_opt": sol.x_opt,
            "xpt_min_eigenvalue": ext["xpt_min"],
            "dual": {
                "g": dual.g,
                "mixing_p": dual.mixing_p,
                "rho_z": dual.rho_z,
                "z": dual.z,
            },
            "primal_dual_mismatch": abs(sol.fstar - dual.g),
        },
        args.out,
    )
    return EXIT_OK


def cmd_normal_form(args) -> int:
    rho = read_state(args.state, args.tol)
    res = normal_form(rho)
    _emit(
        {
            "bell_coefficients": res.bell_coefficients,
            "fidelity_nf": res.fidelity_nf,
            "success_prob": res.success_prob,
            "filter_A": res.filter_A,
            "filter_B": res.filter_B,
            "entangled": res.entangled,
            "rho_nf": res.rho_nf,
            "iterations": res.iterations,
        },
        args.out,
    )
    return EXIT_OK


def cmd_bloch_image(args) -> int:
    rho = read_state(args.state, args.tol)
    img = teleport.bloch_image(rho, args.mode, args.n, args.seed)
    out = Path(args.out)
    rows = ["nx,ny,nz,ox,oy,oz"]
    for d, o in img.samples:
        rows.append(",".join(fmt_float(v) for v in (*d, *o)))
    out.write_text("\n".join(rows) + "\n")
    sidecar = out.with_suffix(".json")
    sidecar.write_text(
        dumps({"m": img.m, "c": img.c, "avg_fidelity": img.avg_fidelity, "mode": args.mode}) + "\n"
    )
    sys.stderr.write(f"wrote {len(img.samples)} samples to {out} and summary to {sidecar}\n")
    return EXIT_OK


def cmd_random(args) -> int:
    if args.ensemble != "hilbert-schmidt":
        raise InvalidStateError(f"unknown ensemble {args.ensemble!r}")
    if not 1 <= args.rank <= 4:
        raise InvalidStateError(f"rank must be in 1..4, got {args.rank}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(args.seed)
    width = max(4, len(str(args.count - 1)))
    for i in range(args.count):
        write_state(out / f"state_{i:0{width}d}.json", random_density(rng, rank=args.rank))
    sys.stderr.write(f"wrote {args.count} states to {out}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = verify.run_all(n=args.n, seed=args.seed)
    ok = True
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status}  {r.name}  ({r.checked} cases)")
        if not r.passed:
            ok = False
            print(dumps({"suite": r.name, "detail": r.detail, "case": r.case}))
    return EXIT_OK if ok else EXIT_VERIFY


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optel",
        description="Two-qubit entanglement measures, optimal LOCC singlet fraction, teleportation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_state(p, tol_help="validation tolerance for the input state"):
        p.add_argument("state", help="state file (JSON with re/im arrays)")
        p.add_argument("--tol", type=float, default=HERM_TOL, help=tol_help)
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        return p

    p = with_state(sub.add_parser("analyze", help="singlet fraction, concurrence, negativity"))
    p.set_defaults(func=cmd_analyze)

    p = with_state(
        sub.add_parser("fstar", help="optimal LOCC singlet fraction, filter and dual"),
        tol_help="certified duality gap target",
    )
    p.set_defaults(func=cmd_fstar, tol=1e-8)

    p = with_state(sub.add_parser("normal-form", help="Bell-diagonal normal form under filtering"))
    p.set_defaults(func=cmd_normal_form)

    p = sub.add_parser("bloch-image", help="teleportation channel image as CSV")
    p.add_argument("state")
    p.add_argument("--mode", choices=teleport.PREPROCESSING, default="LU")
    p.add_argument("--n", type=int, default=500, help="number of sampled input directions")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=HERM_TOL)
    p.add_argument("--out", required=True, help="CSV path; summary goes to the same stem .json")
    p.set_defaults(func=cmd_bloch_image)

    p = sub.add_parser("random", help="Hilbert-Schmidt random states as state files")
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--rank", type=int, default=4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--ensemble", default="hilbert-schmidt", choices=["hilbert-schmidt"])
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_random)

    p = sub.add_parser("verify", help="run the randomized invariant suites")
    p.add_argument("--n", type=int, default=200, help="states per suite")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InvalidStateError as exc:
        sys.stderr.write(f"invalid input: {exc}\n")
        return EXIT_INVALID
    except DegenerateNormalFormError as exc:
        sys.stderr.write(f"degenerate normal form: {exc}\n")
        return EXIT_DEGENERATE
    except (SolverError, ConvergenceError, ConsistencyError) as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_SOLVER
    except OSError as exc:
        sys.stderr.write(f"I/O error: {exc}\n")
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
