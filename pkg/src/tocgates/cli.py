"""Command-line front end.

Thin HTTP client over the service layer: by default the FastAPI app is
mounted in-process (no sockets), and ``--server URL`` points the same
commands at a remote instance.  All frequencies on the command line are
plain MHz/kHz and times are ns/ps as stated in each flag's help.

Exit status: 0 success, 2 configuration/usage error, 3 physics error
(no pulse solution, infeasible gate time, integration failure).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PHYSICS = 3

CONFIG_DIR_ENV = "TOCGATES_CONFIG_DIR"


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from starlette.testclient import TestClient

    from .service import app
    return TestClient(app, base_url="http://tocgates.internal",
                      raise_server_exceptions=False)


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code >= 400:
        try:
            body = resp.json()
        except ValueError:
            body = {}
        message = body.get("message") or body.get("detail") or resp.text
        error_type = body.get("error_type", "config")
        code = EXIT_PHYSICS if error_type == "physics" else EXIT_CONFIG
        raise CliError(f"{error_type} error: {message}", code)
    return resp.json()


def _load_config(path: str | None) -> dict | None:
    if path is None:
        return None
    if not os.path.exists(path):
        cfg_dir = os.environ.get(CONFIG_DIR_ENV)
        if cfg_dir and os.path.exists(os.path.join(cfg_dir, path)):
            path = os.path.join(cfg_dir, path)
        else:
            raise CliError(f"config file not found: {path}", EXIT_CONFIG)
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise CliError(f"config file {path} is not valid JSON: {exc}",
                       EXIT_CONFIG) from exc


def _emit_recipe(result: dict, out: str | None) -> None:
    if out is None:
        sys.stdout.write(result["csv"])
        return
    with open(out, "w") as fh:
        fh.write(result["csv"])
    sidecar = dict(result["metadata"])
    sidecar.update(recipe=result["recipe"], columns=result["columns"],
                   n_rows=result["csv"].count("\n") - 1)
    with open(out + ".meta.json", "w") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {out} ({sidecar['n_rows']} rows) and {out}.meta.json")


def _print_json(obj: dict) -> None:
    print(json.dumps(obj, indent=2, sort_keys=True))


def _add_common(p: argparse.ArgumentParser, recipe: bool = False) -> None:
    p.add_argument("--server", metavar="URL",
                   help="base URL of a running service (default: in-process)")
    if recipe:
        p.add_argument("--out", metavar="PATH",
                       help="output CSV path (stdout when omitted); a "
                            "metadata sidecar PATH.meta.json is written too")
        p.add_argument("--jobs", type=int, default=1, metavar="N",
                       help="worker processes for sweep cells (default 1)")
        p.add_argument("--dt-ps", type=float, default=None, metavar="X",
                       help="integration step in picoseconds")
        p.add_argument("--bessel-order", type=int, default=15, metavar="N",
                       help="Jacobi-Anger truncation order (default 15)")
        p.add_argument("--no-decoherence", action="store_true",
                       help="disable all collapse channels")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="tocgates",
        description="Time-optimal pulse synthesis and open-system gate "
                    "simulation for DFS-encoded transmon qubits. "
                    "Frequencies are plain MHz (the 2*pi is internal).")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="synthesize a pulse for a named gate")
    p.add_argument("--gate", required=True, help="H, S, T or CP")
    p.add_argument("--omega-mhz", type=float, required=True,
                   help="effective Rabi frequency Omega/2pi in MHz")
    p.add_argument("--delta-mhz", type=float, default=None,
                   help="drive detuning delta/2pi in MHz (required for "
                        "S/T/CP; forced for H when omitted)")
    p.add_argument("--gamma-rad", type=float, default=None,
                   help="conditional phase in rad (CP only)")
    _add_common(p)

    p = sub.add_parser("gate-time", help="closed-form gate time")
    p.add_argument("--gate", required=True, help="H, S, T or CP")
    p.add_argument("--omega-mhz", type=float, required=True,
                   help="effective Rabi frequency Omega/2pi in MHz")
    p.add_argument("--delta-mhz", type=float, default=0.0,
                   help="detuning delta/2pi in MHz (default 0)")
    p.add_argument("--gamma-rad", type=float, default=None,
                   help="conditional phase in rad (CP only)")
    p.add_argument("--optimize", action="store_true",
                   help="scan the detuning range for the fastest gate")
    p.add_argument("--delta-min-mhz", type=float, default=0.0,
                   help="scan lower bound in MHz (with --optimize)")
    p.add_argument("--delta-max-mhz", type=float, default=50.0,
                   help="scan upper bound in MHz (with --optimize)")
    _add_common(p)

    p = sub.add_parser("dynamics",
                       help="single-gate population/fidelity time series")
    p.add_argument("--gate", required=True, help="H, S or T")
    p.add_argument("--config", metavar="PATH",
                   help="device config JSON (default: built-in pair)")
    p.add_argument("--n-samples", type=int, default=400,
                   help="rows in the output time series (default 400)")
    _add_common(p, recipe=True)

    p = sub.add_parser("sweep",
                       help="gate fidelity over the (Delta12, g12) plane")
    p.add_argument("--gate", required=True, help="H, S or T")
    p.add_argument("--delta12-min-mhz", type=float, default=400.0)
    p.add_argument("--delta12-max-mhz", type=float, default=650.0)
    p.add_argument("--n-delta12", type=int, default=26)
    p.add_argument("--g12-min-mhz", type=float, default=10.0)
    p.add_argument("--g12-max-mhz", type=float, default=20.0)
    p.add_argument("--n-g12", type=int, default=21)
    p.add_argument("--rate-khz", type=float, default=4.0,
                   help="decay/dephasing rate per transmon in kHz")
    _add_common(p, recipe=True)

    p = sub.add_parser("robustness",
                       help="gate fidelity vs static frequency drift")
    p.add_argument("--gate", default="H", help="H, S or T (default H)")
    p.add_argument("--beta-min", type=float, default=-0.1)
    p.add_argument("--beta-max", type=float, default=0.1)
    p.add_argument("--n-points", type=int, default=41)
    p.add_argument("--config", metavar="PATH")
    _add_common(p, recipe=True)

    p = sub.add_parser("tau2-surface",
                       help="CP gate time over (gamma, delta2/Omega)")
    p.add_argument("--gamma-min-rad", type=float, default=0.05)
    p.add_argument("--gamma-max-rad", type=float, default=6.233185)
    p.add_argument("--n-gamma", type=int, default=50)
    p.add_argument("--ratio-min", type=float, default=0.0)
    p.add_argument("--ratio-max", type=float, default=4.0)
    p.add_argument("--n-ratio", type=int, default=41)
    p.add_argument("--g24-mhz", type=float, default=7.0)
    p.add_argument("--omega-mhz", type=float, default=None,
                   help="override the effective Rabi frequency in MHz")
    _add_common(p, recipe=True)

    p = sub.add_parser("cp-sweep",
                       help="CP state fidelity over (Delta24, g24)")
    p.add_argument("--delta24-min-mhz", type=float, default=550.0)
    p.add_argument("--delta24-max-mhz", type=float, default=650.0)
    p.add_argument("--n-delta24", type=int, default=5)
    p.add_argument("--g24-min-mhz", type=float, default=5.0)
    p.add_argument("--g24-max-mhz", type=float, default=9.0)
    p.add_argument("--n-g24", type=int, default=5)
    p.add_argument("--gamma-rad", type=float, default=1.5707963267948966,
                   help="conditional phase (default pi/2)")
    _add_common(p, recipe=True)

    p = sub.add_parser("cp-dynamics",
                       help="CP gate population/fidelity time series")
    p.add_argument("--gamma-rad", type=float, default=1.5707963267948966,
                   help="conditional phase (default pi/2)")
    p.add_argument("--two-pair", action="store_true",
                   help="drop spectator couplings and restrict noise to the "
                        "driven pair")
    p.add_argument("--n-samples", type=int, default=400)
    p.add_argument("--config", metavar="PATH")
    _add_common(p, recipe=True)

    p = sub.add_parser("validate",
                       help="run the invariant suite on a device config")
    p.add_argument("--config", metavar="PATH",
                   help="device config JSON (default: built-in pair)")
    p.add_argument("--bessel-order", type=int, default=15)
    _add_common(p)

    return ap


def _recipe_common(args, default_dt_ps: float) -> dict:
    return {
        "dt_ps": args.dt_ps if args.dt_ps is not None else default_dt_ps,
        "decoherence": not args.no_decoherence,
        "bessel_order": args.bessel_order,
        "jobs": args.jobs,
    }


def _dispatch(args) -> int:
    with _client(args.server) as client:
        cmd = args.command
        if cmd == "synth":
            out = _post(client, "/synth", {
                "gate": args.gate, "omega_mhz": args.omega_mhz,
                "delta_mhz": args.delta_mhz, "gamma_rad": args.gamma_rad})
            _print_json(out)
        elif cmd == "gate-time":
            if args.optimize:
                out = _post(client, "/optimal-detuning", {
                    "gate": args.gate, "omega_mhz": args.omega_mhz,
                    "delta_min_mhz": args.delta_min_mhz,
                    "delta_max_mhz": args.delta_max_mhz,
                    "gamma_rad": args.gamma_rad})
            else:
                out = _post(client, "/gate-time", {
                    "gate": args.gate, "omega_mhz": args.omega_mhz,
                    "delta_mhz": args.delta_mhz,
                    "gamma_rad": args.gamma_rad})
            _print_json(out)
        elif cmd == "dynamics":
            payload = _recipe_common(args, default_dt_ps=0.5)
            payload.pop("jobs")
            payload.update(gate=args.gate, n_samples=args.n_samples,
                           config=_load_config(args.config))
            _emit_recipe(_post(client, "/recipes/dynamics", payload), args.out)
        elif cmd == "sweep":
            payload = _recipe_common(args, default_dt_ps=1.0)
            payload.update(
                gate=args.gate,
                delta12_min_mhz=args.delta12_min_mhz,
                delta12_max_mhz=args.delta12_max_mhz,
                n_delta12=args.n_delta12,
                g12_min_mhz=args.g12_min_mhz, g12_max_mhz=args.g12_max_mhz,
                n_g12=args.n_g12, rate_khz=args.rate_khz)
            _emit_recipe(_post(client, "/recipes/sweep", payload), args.out)
        elif cmd == "robustness":
            payload = _recipe_common(args, default_dt_ps=1.0)
            payload.update(gate=args.gate, beta_min=args.beta_min,
                           beta_max=args.beta_max, n_points=args.n_points,
                           config=_load_config(args.config))
            _emit_recipe(_post(client, "/recipes/robustness", payload),
                         args.out)
        elif cmd == "tau2-surface":
            payload = {
                "gamma_min_rad": args.gamma_min_rad,
                "gamma_max_rad": args.gamma_max_rad, "n_gamma": args.n_gamma,
                "ratio_min": args.ratio_min, "ratio_max": args.ratio_max,
                "n_ratio": args.n_ratio, "g24_mhz": args.g24_mhz,
                "omega_mhz": args.omega_mhz}
            _emit_recipe(_post(client, "/recipes/tau2-surface", payload),
                         args.out)
        elif cmd == "cp-sweep":
            payload = _recipe_common(args, default_dt_ps=1.0)
            payload.update(
                delta24_min_mhz=args.delta24_min_mhz,
                delta24_max_mhz=args.delta24_max_mhz,
                n_delta24=args.n_delta24,
                g24_min_mhz=args.g24_min_mhz, g24_max_mhz=args.g24_max_mhz,
                n_g24=args.n_g24, gamma_rad=args.gamma_rad)
            _emit_recipe(_post(client, "/recipes/cp-sweep", payload), args.out)
        elif cmd == "cp-dynamics":
            payload = _recipe_common(args, default_dt_ps=1.0)
            payload.pop("jobs")
            payload.update(gamma_rad=args.gamma_rad,
                           include_spectators=not args.two_pair,
                           noise_sites=[1, 3] if args.two_pair else None,
                           n_samples=args.n_samples,
                           config=_load_config(args.config))
            _emit_recipe(_post(client, "/recipes/cp-dynamics", payload),
                         args.out)
        elif cmd == "validate":
            report = _post(client, "/validate", {
                "config": _load_config(args.config),
                "bessel_order": args.bessel_order})
            _print_json(report)
            if not report.get("ok"):
                return EXIT_PHYSICS
        else:  # pragma: no cover - argparse enforces the choices
            return EXIT_CONFIG
    return EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return _dispatch(args)
    except CliError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except httpx.HTTPError as exc:
        print(f"transport error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
