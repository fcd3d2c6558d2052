"""Command-line entry points: generate synthetic datasets, serve the planning
API, and run a scripted end-to-end plan for smoke checks."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from datetime import datetime
from pathlib import Path

from .dataset import load_planning_data
from .network import DEFAULT_WALK_SPEED_MPS
from .regions import DEFAULT_THRESHOLD_M
from .session import CreatePayload, PlanSession
from .synthetic import SyntheticSpec, generate_synthetic
from .trips import DEFAULT_UNIFY_RADIUS_M


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="shuttleplan")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a synthetic dataset with planted structure")
    gen.add_argument("out_dir")
    gen.add_argument("--seed", type=int, default=7)
    gen.add_argument("--directions", type=int, default=4)
    gen.add_argument("--spots-per-direction", type=int, default=3)
    gen.add_argument("--orders-per-spot", type=int, default=20)
    gen.add_argument("--angular-spread", type=float, default=10.0)

    env = os.environ
    serve = sub.add_parser("serve", help="run the planning API")
    serve.add_argument("--port", type=int, default=int(env.get("SHUTTLEPLAN_PORT", 8040)))
    serve.add_argument("--host", default=env.get("SHUTTLEPLAN_HOST", "127.0.0.1"))
    serve.add_argument("--data-dir", default=env.get("SHUTTLEPLAN_DATA_DIR"))
    serve.add_argument("--session-log-dir", default=env.get("SHUTTLEPLAN_SESSION_LOG_DIR", "./sessions"))
    serve.add_argument("--walk-speed", type=float,
                       default=float(env.get("SHUTTLEPLAN_WALK_SPEED", DEFAULT_WALK_SPEED_MPS)))
    serve.add_argument("--threshold-default", type=float,
                       default=float(env.get("SHUTTLEPLAN_THRESHOLD_DEFAULT", DEFAULT_THRESHOLD_M)))

    plan = sub.add_parser("plan", help="run one scripted planning pass over a dataset directory")
    plan.add_argument("data_dir")
    plan.add_argument("--k", type=int, default=None)
    plan.add_argument("--seed", type=int, default=0)
    plan.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD_M)
    plan.add_argument("--departure", default=None, help="ISO timestamp; default = busiest histogram bin")
    plan.add_argument("--out", default=None, help="write the export bundle JSON here")

    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(message)s")

    if args.command == "generate":
        spec = SyntheticSpec(
            directions=args.directions,
            spots_per_direction=args.spots_per_direction,
            orders_per_spot=args.orders_per_spot,
            angular_spread_deg=args.angular_spread,
        )
        dataset = generate_synthetic(spec, args.seed)
        dataset.write(args.out_dir)
        print(f"wrote {len(dataset.trips)} trips, {len(dataset.network.nodes)} nodes to {args.out_dir}")
        return 0

    if args.command == "serve":
        import uvicorn

        from .server import create_app

        app = create_app(
            session_log_dir=args.session_log_dir,
            data_dir=args.data_dir,
            threshold_default=args.threshold_default,
            walk_speed_default=args.walk_speed,
        )
        uvicorn.run(app, host=args.host, port=args.port)
        return 0

    if args.command == "plan":
        return _run_plan(args)

    return 2


def _run_plan(args: argparse.Namespace) -> int:
    base = Path(args.data_dir)
    data = load_planning_data(
        base / "trips.csv",
        base / "nodes.csv",
        base / "edges.csv",
        base / "profiles.json",
        overrides_path=(base / "overrides.csv") if (base / "overrides.csv").exists() else None,
        unify_radius_m=DEFAULT_UNIFY_RADIUS_M,
    )
    payload = CreatePayload(
        trips=str(base / "trips.csv"),
        nodes=str(base / "nodes.csv"),
        edges=str(base / "edges.csv"),
        profiles=str(base / "profiles.json"),
    )
    session = PlanSession("cli", data, payload)

    k = args.k
    if k is None:
        curve = session.silhouette_curve(2, min(12, len(data.spots) - 1), args.seed)
        k = curve.best_k
        print(f"silhouette curve peak at k={k}")
    session.set_k(k, args.seed)
    session.build_regions(args.threshold)
    n_regions = sum(len(r) for r in session.regional.values())
    print(f"k={k}: {n_regions} regions across {len(session.regional)} directions")

    for d in sorted(session.regional):
        trips_d = session.direction_trips(d)
        if not trips_d:
            continue
        if args.departure:
            depart = datetime.fromisoformat(args.departure)
        else:
            hist = session.histogram(d, 5)
            depart = max(hist, key=lambda bc: bc[1])[0]
        try:
            session.add_candidate(d, depart, None)
        except Exception as exc:  # keep going; some directions may lack profiles
            print(f"direction {d}: cannot string a route ({exc})")
            continue
        payload_d = session.candidate_payload(d, session.candidates[d][-1])
        m = payload_d["metrics"]
        print(
            f"direction {d}: depart {depart.time()} "
            f"dura {m['driving_dura'] / 60.0:.1f} min dist {m['driving_dist'] / 1000.0:.2f} km "
            f"reach800 {m['walk_reach800']:.2f} nums {m['nums']}"
        )
        for w in payload_d["warnings"]:
            print(f"  warning: {w}")

    if args.out:
        bundle = session.export_bundle()
        Path(args.out).write_text(json.dumps(bundle, sort_keys=True), encoding="utf-8")
        print(f"export bundle ({len(bundle['files'])} files) -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
