"""Command-line front end.

    semiblind run   --mode dd --ebn0-db 10 --n-trials 200 --out results.csv
    semiblind sweep --mode dd,aba,training-only --ebn0-db 0,10,20,30
    semiblind check

Every simulation flag mirrors a configuration field; defaults can also come
from a key=value config file (--config), with explicit flags taking
precedence. By default the simulation runs in-process; --server URL sends the
identical request to a running service instead.

Exit codes: 0 success, 1 invalid configuration/usage, 2 self-check failure.
"""

import argparse
import sys

import httpx
from pydantic import ValidationError

from .harness import MODES, ConfigError
from .service.app import handle_check, handle_run, handle_sweep
from .service.schemas import CheckResponse, RunResponse, SimRequest


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; this CLI reserves 2 for failed self checks.
    def error(self, message):
        raise _UsageError(message)


def _parse_scalar_or_list(text: str, kind):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise _UsageError(f"empty value {text!r}")
    vals = [kind(p) for p in parts]
    return vals[0] if len(vals) == 1 else vals


_LIST_KEYS = {"ebn0_db": float, "mode": str}
_FLOAT_KEYS = {"decay", "doppler_rho", "anneal_factor", "mu_alpha", "mu_beta"}
_OPT_FLOAT_KEYS = {"mu_train", "mu_blind", "noise_var"}
_INT_KEYS = {"n_tx", "n_rx", "n_subcarriers", "cp_len", "n_paths", "training_len",
             "n_blind_passes", "n_frames", "n_trials", "seed"}
_STR_KEYS = {"modulation"}


def _coerce(key: str, raw: str):
    if key in _LIST_KEYS:
        return _parse_scalar_or_list(raw, _LIST_KEYS[key])
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key in _OPT_FLOAT_KEYS:
        return None if raw.lower() in ("none", "") else float(raw)
    if key in _STR_KEYS:
        return raw
    raise _UsageError(f"unknown config key {key!r}")


def _read_config_file(path: str) -> dict:
    out = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise _UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, raw = (s.strip() for s in line.split("=", 1))
                out[key] = _coerce(key, raw)
    except OSError as exc:
        raise _UsageError(f"cannot read config file {path}: {exc}") from exc
    return out


def _add_sim_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("simulation")
    g.add_argument("--n-tx", type=int, help="transmit antennas")
    g.add_argument("--n-rx", type=int, help="receive antennas")
    g.add_argument("--n-subcarriers", type=int, help="OFDM subcarriers per frame")
    g.add_argument("--cp-len", type=int, help="cyclic prefix length")
    g.add_argument("--n-paths", type=int, help="channel taps")
    g.add_argument("--decay", type=float, help="power-delay profile constant")
    g.add_argument("--doppler-rho", type=float, help="AR(1) tap correlation per frame")
    g.add_argument("--training-len", type=int, help="known subcarriers at frame-0 start")
    g.add_argument("--modulation", choices=["bpsk", "qpsk"])
    g.add_argument("--ebn0-db", metavar="DB[,DB...]", help="Eb/N0 point(s)")
    g.add_argument("--mode", metavar="|".join(MODES), help="estimation mode(s), comma-separated")
    g.add_argument("--n-blind-passes", type=int, help="blind sweeps per frame (dd/aba)")
    g.add_argument("--mu-train", type=_none_or_float, help="training LMS step (default auto)")
    g.add_argument("--mu-blind", type=_none_or_float, help="blind LMS base step (default auto)")
    g.add_argument("--anneal-factor", type=float, help="per-pass blind step multiplier")
    g.add_argument("--mu-alpha", type=float, help="nonlinearity gain adaptation step")
    g.add_argument("--mu-beta", type=float, help="nonlinearity slope adaptation step")
    g.add_argument("--n-frames", type=int, help="frames per trial")
    g.add_argument("--n-trials", type=int, help="Monte Carlo trials")
    g.add_argument("--seed", type=int, help="base RNG seed")
    g.add_argument("--noise-var", type=_none_or_float, help="fixed noise variance (overrides Eb/N0)")
    p.add_argument("--config", metavar="FILE", help="key=value defaults file")
    p.add_argument("--server", metavar="URL", help="send the request to a running service")


def _none_or_float(raw: str):
    return None if raw.lower() in ("none", "") else float(raw)


def _build_request(args) -> SimRequest:
    merged = _read_config_file(args.config) if args.config else {}
    for key in SimRequest.model_fields:
        val = getattr(args, key, None)
        if val is None:
            continue
        if key in _LIST_KEYS and isinstance(val, str):
            val = _parse_scalar_or_list(val, _LIST_KEYS[key])
        merged[key] = val
    try:
        return SimRequest(**merged)
    except ValidationError as exc:
        raise _UsageError(str(exc)) from exc


def _require_scalars(req: SimRequest) -> SimRequest:
    update = {}
    for key in ("ebn0_db", "mode"):
        val = getattr(req, key)
        if isinstance(val, list):
            if len(val) != 1:
                raise _UsageError(f"'run' takes a single {key}; use 'sweep' for lists")
            update[key] = val[0]
    return req.model_copy(update=update) if update else req


def _emit_csv(csv: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(csv)
    else:
        sys.stdout.write(csv)


def _post(server: str, path: str, req: SimRequest) -> RunResponse:
    url = server.rstrip("/") + path
    resp = httpx.post(url, json=req.model_dump(mode="json"), timeout=600.0)
    if resp.status_code != 200:
        raise _UsageError(f"{url} returned {resp.status_code}: {resp.text}")
    return RunResponse.model_validate(resp.json())


def _print_check(report: CheckResponse) -> int:
    for c in report.checks:
        status = "PASS" if c.passed else "FAIL"
        print(f"[{status}] {c.name:24s} max_error={c.max_error:.3e}  tol={c.tolerance:g}")
    if report.passed:
        print(f"self-check passed in {report.runtime_s:.2f}s")
        return 0
    print(f"self-check FAILED after {report.runtime_s:.2f}s")
    return 2


def main(argv=None) -> int:
    parser = _Parser(prog="semiblind",
                     description="Semi-blind MIMO-OFDM channel estimation simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p_run = sub.add_parser("run", help="one mode at one Eb/N0; CSV to stdout or --out")
    _add_sim_args(p_run)
    p_run.add_argument("--out", metavar="FILE", help="write CSV here instead of stdout")

    p_sweep = sub.add_parser("sweep", help="cartesian sweep over modes and Eb/N0 points")
    _add_sim_args(p_sweep)
    p_sweep.add_argument("--out", metavar="FILE", help="write CSV here instead of stdout")

    p_check = sub.add_parser("check", help="run the numerical self checks")
    p_check.add_argument("--server", metavar="URL")

    try:
        args = parser.parse_args(argv)
        if args.command == "check":
            if args.server:
                resp = httpx.get(args.server.rstrip("/") + "/check", timeout=600.0)
                if resp.status_code != 200:
                    raise _UsageError(f"/check returned {resp.status_code}: {resp.text}")
                report = CheckResponse.model_validate(resp.json())
            else:
                report = handle_check()
            return _print_check(report)

        req = _build_request(args)
        if args.command == "run":
            req = _require_scalars(req)
            result = _post(args.server, "/run", req) if args.server else handle_run(req)
        else:
            result = _post(args.server, "/sweep", req) if args.server else handle_sweep(req)
        _emit_csv(result.csv, args.out)
        return 0
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except httpx.HTTPError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
