"""Subprocess entry point for benchmark cells.

Reads one JSON job from stdin ({benchmark, matrix, data_dir, policy}),
executes the cell in this interpreter, and writes the result payload as
JSON on stdout. Exit status 0 means the cell ran and passed its
admission gate; anything else means no usable measurement. Nothing but
the payload may be printed on stdout.
"""

import json
import sys

from .harness import TimingPolicy, execute_cell


def main() -> int:
    job = json.load(sys.stdin)
    try:
        policy = TimingPolicy(
            warmup_runs=int(job["policy"]["warmup_runs"]),
            measured_runs=int(job["policy"]["measured_runs"]),
            aggregator=job["policy"]["aggregator"])
        payload = execute_cell(job["benchmark"], job["matrix"],
                               job["data_dir"], policy)
    except Exception as exc:
        json.dump({"ok": False, "benchmark": job.get("benchmark"),
                   "matrix": job.get("matrix"),
                   "error": f"{type(exc).__name__}: {exc}"}, sys.stdout)
        sys.stdout.write("\n")
        return 1
    json.dump(payload, sys.stdout)
    sys.stdout.write("\n")
    return 0 if payload["ok"] else 1


if __name__ == "__main__":
    sys.exit(main())
