"""Command-line entry points.

    proxtrace init --data-dir DIR [--with-keys] [--demo-tokens]
    proxtrace issue-codes --config FILE --count N
    proxtrace extract-edges --config FILE [--include-open]
    proxtrace build-graph --config FILE --t-start S --t-end E --out FILE
    proxtrace calibrate-rssi [--samples FILE]
    proxtrace run-scenario --scenario FILE --base-url URL
    proxtrace daily-jobs --config FILE
    proxtrace serve --config FILE [--seed-demo]
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import crypto, rssi
from .config import PlatformConfig, load_config
from .platform import Platform
from .tempgraph import save_graph

DEFAULT_PORTAL_TOKENS = {
    "demo-health-token": "health-center",
    "demo-board-token": "advisory-board",
    "demo-ops-token": "ops",
}


def _cmd_init(args) -> int:
    data_dir = Path(args.data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)
    config = {
        "data_dir": str(data_dir),
        "auth_salt": "env:PROXTRACE_AUTH_SALT",
        "phone_salt": "env:PROXTRACE_PHONE_SALT",
    }
    if args.with_keys:
        private_pem, public_pem = crypto.generate_keypair()
        private_path = data_dir / "private_key.pem"
        private_path.write_text(private_pem, encoding="utf-8")
        (data_dir / "public_key.pem").write_text(public_pem, encoding="utf-8")
        config["public_key_pem"] = str(data_dir / "public_key.pem")
        print(f"wrote keypair; move {private_path} offline", file=sys.stderr)
    if args.demo_tokens:
        config["portal_tokens"] = DEFAULT_PORTAL_TOKENS
    out = Path(args.out) if args.out else data_dir / "config.json"
    out.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    print(str(out))
    return 0


def _cmd_issue_codes(args) -> int:
    platform = Platform(load_config(args.config))
    for code in platform.identity.issue_codes(args.count):
        print(code)
    return 0


def _cmd_extract_edges(args) -> int:
    platform = Platform(load_config(args.config))
    reports = platform.run_preprocessing(include_open=args.include_open)
    for report in reports:
        print(f"{report.csv_path}: {report.rows_written} rows, "
              f"{report.entries_skipped} entries skipped")
    return 0


def _cmd_build_graph(args) -> int:
    platform = Platform(load_config(args.config))
    graph = platform.build_graph(args.t_start, args.t_end)
    save_graph(graph, Path(args.out))
    print(f"{args.out}: {len(graph.vertices)} vertices, "
          f"{len(graph.edges)} edges")
    return 0


def _cmd_calibrate_rssi(args) -> int:
    path = Path(args.samples) if args.samples else rssi.bundled_campaign_path()
    samples = rssi.load_samples_csv(path)
    result = rssi.calibrate_threshold(samples)
    print(json.dumps(result.__dict__, indent=2))
    return 0


def _cmd_run_scenario(args) -> int:
    from .simfleet import HttpGateway, ScenarioConfig, run_scenario

    scenario = ScenarioConfig.load(args.scenario)
    gateway = HttpGateway(args.base_url)
    codes = list(args.invite_codes or [])
    if not codes:
        raise SystemExit("pass --invite-codes, one unused code per device")
    report = run_scenario(scenario, gateway, codes)
    print(json.dumps({"totals": report.totals(),
                      "devices": {n: r.__dict__
                                  for n, r in report.devices.items()}},
                     indent=2, default=str))
    return 0


def _cmd_daily_jobs(args) -> int:
    platform = Platform(load_config(args.config))
    platform.run_preprocessing(include_open=True)
    print(json.dumps(platform.run_daily_jobs(), indent=2))
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .server import create_app

    if args.config:
        config = load_config(args.config)
    else:
        if not args.seed_demo:
            raise SystemExit("pass --config, or --seed-demo for a demo server")
        data_dir = Path(args.data_dir or "demo-data")
        private_pem, public_pem = crypto.generate_keypair()
        data_dir.mkdir(parents=True, exist_ok=True)
        (data_dir / "private_key.pem").write_text(private_pem,
                                                  encoding="utf-8")
        config = PlatformConfig(
            data_dir=data_dir,
            auth_salt="demo-auth-salt",
            phone_salt="demo-phone-salt",
            public_key_pem=public_pem,
            portal_tokens=dict(DEFAULT_PORTAL_TOKENS),
            expose_test_hooks=True)
    if args.port:
        config = config.with_overrides(port=args.port)
    if args.host:
        config = config.with_overrides(host=args.host)
    if args.expose_test_hooks:
        config = config.with_overrides(expose_test_hooks=True)

    summary = None
    if args.seed_demo:
        from .demo import seed_demo
        summary = seed_demo(config)

    platform = Platform(config)
    platform.demo_summary = summary
    app = create_app(platform)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="proxtrace")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="write a starter config")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--out")
    p.add_argument("--with-keys", action="store_true")
    p.add_argument("--demo-tokens", action="store_true")
    p.set_defaults(fn=_cmd_init)

    p = sub.add_parser("issue-codes", help="mint invite codes")
    p.add_argument("--config", required=True)
    p.add_argument("--count", type=int, default=1)
    p.set_defaults(fn=_cmd_issue_codes)

    p = sub.add_parser("extract-edges", help="preprocess raw segments")
    p.add_argument("--config", required=True)
    p.add_argument("--include-open", action="store_true")
    p.set_defaults(fn=_cmd_extract_edges)

    p = sub.add_parser("build-graph", help="build and save an interval graph")
    p.add_argument("--config", required=True)
    p.add_argument("--t-start", type=int, required=True)
    p.add_argument("--t-end", type=int, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_build_graph)

    p = sub.add_parser("calibrate-rssi",
                       help="derive the proximity threshold from a campaign")
    p.add_argument("--samples")
    p.set_defaults(fn=_cmd_calibrate_rssi)

    p = sub.add_parser("run-scenario",
                       help="drive a simulated fleet against a live backend")
    p.add_argument("--scenario", required=True)
    p.add_argument("--base-url", default="http://127.0.0.1:8470")
    p.add_argument("--invite-codes", nargs="*")
    p.set_defaults(fn=_cmd_run_scenario)

    p = sub.add_parser("daily-jobs", help="run score and scan-progress jobs")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_daily_jobs)

    p = sub.add_parser("serve", help="run the HTTP server")
    p.add_argument("--config")
    p.add_argument("--data-dir")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--seed-demo", action="store_true")
    p.add_argument("--expose-test-hooks", action="store_true")
    p.set_defaults(fn=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
