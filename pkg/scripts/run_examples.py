"""Run every scenario in scenarios/ through the CLI driver and print a summary table.

    python3 scripts/run_examples.py [--out DIR]
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
import time
from pathlib import Path

from funcjohn import cli

ROOT = Path(__file__).resolve().parents[1]
EXIT_NAMES = {cli.EXIT_OK: "ok", cli.EXIT_SEPARATOR: "separator", cli.EXIT_SOLVER: "solver", cli.EXIT_INPUT: "input"}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "out" / "examples"))
    args = ap.parse_args(argv)
    out = Path(args.out)
    print(f"{'scenario':<24} {'exit':<10} {'status':<12} {'objective':>16} {'time':>7}")
    for path in sorted((ROOT / "scenarios").glob("*.json")):
        t0 = time.perf_counter()
        with contextlib.redirect_stdout(io.StringIO()), contextlib.redirect_stderr(io.StringIO()):
            code = cli.run(path, out=str(out))
        dt = time.perf_counter() - t0
        res = out / f"{path.stem}.result.json"
        status, obj = "-", "-"
        if res.exists() and res.stat().st_mtime >= time.time() - dt - 1:
            doc = json.loads(res.read_text())
            status = doc["status"]
            obj = f"{doc['objective']:.10g}" if isinstance(doc["objective"], float) else str(doc["objective"])
        print(f"{path.stem:<24} {EXIT_NAMES.get(code, code):<10} {status:<12} {obj:>16} {dt:>6.1f}s")
    print(f"outputs in {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
