"""Benchmark harness: grids, timing, result files and reporting.

Runs benchmark x matrix x configuration grids. Every cell executes in a
fresh interpreter subprocess (the configuration's interpreter and flag
set), performs its setup untimed, times only the kernel invocation
under the given policy, and is admitted only if a checksum of the
kernel's result matches an independently computed reference. Cell
results land in ``results/<config>/<benchmark>__<matrix>.time``; the
aggregator folds the tree into the space-separated ``spark.dat`` with
one ``id benchmark matrix reftime time`` line per cell, and the
reporter turns that into per-matrix speedup charts plus a CSV.

The reference implementations used for the admission gate live here,
not in the dense oracle module: they must scale to the full-size
inputs, so they are built on numpy/scipy instead of brute-force dense
loops. They share no code with the kernels.
"""

from __future__ import annotations

import json
import math
import os
import shlex
import statistics
import subprocess
import sys
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import splu

from . import matio
from .arr_kernels import _mperm_fill, asm_numeric, asm_symbolic, cmck, trmat
from .core import (
    CsrMatrix,
    ParameterError,
    SparkBenchError,
    build_ortho,
    csr_to_linked,
)
from .matio import gen_tri_mesh, read_matrix_market, symmetrize_lower
from .ptr_kernels import (
    JacobiParams,
    PcgParams,
    dsolve,
    jacit,
    pcg,
    spmatmat,
    spmatvec,
)


class HarnessError(SparkBenchError):
    """Configuration, input or result-tree problem in the harness."""


class OracleMismatchError(HarnessError):
    """A kernel result failed its admission checksum; no record emitted."""


# Fixed workloads. Timed work must not depend on anything but the input
# matrix, so these are constants of the harness contract.
SPMATMAT_COLS = 8
PCG_TIMED_ITERATIONS = 30
ASM_MESH = (160, 160)

_GATE_RTOL = 1e-6
CORRUPT_ENV = "SPARKBENCH_CORRUPT"


@dataclass
class BenchConfig:
    """One build configuration: an interpreter and its flag string.

    ``id`` names the configuration ("base" is the reference everything
    is ratioed against); ``build_flags`` is passed to the interpreter
    verbatim (the CFLAGS analog) and ``compiler_override`` replaces the
    interpreter executable itself (the CC analog).
    """

    id: str
    build_flags: str = ""
    compiler_override: str = None

    def __post_init__(self):
        if not self.id or any(ch.isspace() for ch in self.id):
            raise ParameterError(
                f"config id {self.id!r} must be nonempty without whitespace")


@dataclass
class BenchRecord:
    """One aggregated measurement: a line of spark.dat."""

    id: str
    benchmark: str
    matrix: str
    reftime: float
    time: float

    def __post_init__(self):
        for name in (self.id, self.benchmark, self.matrix):
            if not name or any(ch.isspace() for ch in name):
                raise ParameterError(
                    f"record field {name!r} must be nonempty without whitespace")
        if not (self.reftime > 0.0 and self.time > 0.0):
            raise ParameterError("reftime and time must be positive")

    def format_line(self) -> str:
        return (f"{self.id} {self.benchmark} {self.matrix} "
                f"{self.reftime:.6f} {self.time:.6f}")

    @classmethod
    def parse_line(cls, line: str) -> "BenchRecord":
        if line != line.strip():
            raise HarnessError(f"stray whitespace in record line {line!r}")
        parts = line.split(" ")
        if len(parts) != 5 or "" in parts:
            raise HarnessError(f"expected 5 single-space fields, got {line!r}")
        try:
            reftime = float(parts[3])
            tm = float(parts[4])
        except ValueError:
            raise HarnessError(f"bad time field in {line!r}") from None
        return cls(parts[0], parts[1], parts[2], reftime, tm)


def speedup(record: BenchRecord) -> float:
    """reftime / time; 1.0 is parity with the reference configuration."""
    return record.reftime / record.time


@dataclass
class TimingPolicy:
    warmup_runs: int = 3
    measured_runs: int = 7
    aggregator: str = "median"

    def __post_init__(self):
        if self.warmup_runs < 0:
            raise ParameterError("warmup_runs must be non-negative")
        if self.measured_runs < 3:
            raise ParameterError("measured_runs must be at least 3")
        if self.aggregator not in ("median", "min"):
            raise ParameterError(f"unknown aggregator {self.aggregator!r}")

    def aggregate(self, runs: list) -> float:
        if self.aggregator == "median":
            return statistics.median(runs)
        return min(runs)

    @classmethod
    def parse(cls, text: str) -> "TimingPolicy":
        """Parse the CLI form 'warmups,runs,aggregator'."""
        parts = text.split(",")
        if len(parts) != 3:
            raise ParameterError(f"policy {text!r} is not 'warmups,runs,agg'")
        return cls(int(parts[0]), int(parts[1]), parts[2])


# --- deterministic operands and checksums ---------------------------------

def probe_vector(n: int, salt: int = 0) -> list:
    """Deterministic dense vector with entries in [1, 2)."""
    return [1.0 + ((i * 31 + salt * 17) % 97) / 97.0 for i in range(n)]


def probe_dense(n: int, k: int) -> list:
    return [[1.0 + ((i + 13 * c) % 53) / 53.0 for c in range(k)]
            for i in range(n)]


def _weight(i: int) -> float:
    return 0.5 + ((i * 2654435761) & 0xFFFFF) / 2097152.0


def weighted_checksum(values) -> float:
    """Order-sensitive digest: sum of entries under a fixed weight ramp."""
    acc = 0.0
    for i, v in enumerate(values):
        acc += _weight(i) * float(v)
    return acc


def _np_checksum(arr) -> float:
    arr = np.asarray(arr, dtype=np.float64).ravel()
    idx = np.arange(arr.size, dtype=np.int64)
    w = 0.5 + ((idx * 2654435761) & 0xFFFFF) / 2097152.0
    return float(np.dot(w, arr))


def _checksums_match(got: dict, want: dict) -> bool:
    if set(got) != set(want):
        return False
    for key, a in got.items():
        b = want[key]
        if not (math.isfinite(a) and math.isfinite(b)):
            return False
        if abs(a - b) > _GATE_RTOL * max(1.0, abs(a), abs(b)):
            return False
    return True


def _scipy_csr(m: CsrMatrix):
    return sp.csr_matrix(
        (np.asarray(m.values, dtype=np.float64),
         np.asarray(m.col_ind, dtype=np.int64),
         np.asarray(m.row_ptr, dtype=np.int64)),
        shape=(m.n_rows, m.n_cols))


# --- per-benchmark setup / run / digest / reference -----------------------

def _setup_spmatvec(m):
    return {"linked": csr_to_linked(m), "x": probe_vector(m.n_rows),
            "scipy": _scipy_csr(m)}


def _ref_spmatvec(state):
    y = state["scipy"] @ np.asarray(state["x"])
    return {"y": _np_checksum(y)}


def _setup_spmatmat(m):
    return {"linked": csr_to_linked(m),
            "B": probe_dense(m.n_rows, SPMATMAT_COLS),
            "scipy": _scipy_csr(m)}


def _ref_spmatmat(state):
    y = state["scipy"] @ np.asarray(state["B"])
    return {"y": _np_checksum(y)}


def _setup_jacit(m):
    n = m.n_rows
    return {"linked": csr_to_linked(m), "b": probe_vector(n, salt=1),
            "x0": [0.0] * n, "params": JacobiParams(),
            "scipy": _scipy_csr(m)}


def _ref_jacit(state):
    a = state["scipy"]
    d = a.diagonal()
    if np.any(d == 0.0):
        raise HarnessError("zero diagonal in jacit input")
    b = np.asarray(state["b"])
    x = np.asarray(state["x0"], dtype=np.float64)
    for _ in range(state["params"].iterations):
        x = (b - (a @ x - d * x)) / d
    return {"x": _np_checksum(x)}


def _ortho_from_splu(lu_obj):
    """Merge a sparse LU object's factors into orthogonal storage.

    The unit diagonal of L is dropped (it is implicit in the solve) and
    U keeps its explicit diagonal. Both factors land in one matrix whose
    row map and column map are the inverses of the factorization's row
    and column permutations, so that the solve's gather phase applies
    the row permutation and the scatter phase undoes the column one.
    """
    n = lu_obj.shape[0]
    combined = ((lu_obj.L - sp.identity(n, format="csc")) + lu_obj.U).tocsr()
    combined.sort_indices()
    indptr, indices, data = combined.indptr, combined.indices, combined.data
    rows = []
    for i in range(n):
        row = []
        has_diag = False
        for k in range(indptr[i], indptr[i + 1]):
            j = int(indices[k])
            v = float(data[k])
            if j == i:
                has_diag = True
                row.append((j, v))
            elif v != 0.0:
                row.append((j, v))
        if not has_diag:
            raise HarnessError(f"factor row {i} lost its diagonal")
        rows.append(row)
    inv_r = np.empty(n, dtype=np.int64)
    inv_r[lu_obj.perm_r] = np.arange(n)
    inv_c = np.empty(n, dtype=np.int64)
    inv_c[lu_obj.perm_c] = np.arange(n)
    return build_ortho(n, rows, [int(v) for v in inv_r], [int(v) for v in inv_c])


def _setup_dsolve(m):
    a = _scipy_csr(m).tocsc()
    lu_obj = splu(a)
    return {"ortho": _ortho_from_splu(lu_obj), "lu_obj": lu_obj,
            "rhs": probe_vector(m.n_rows, salt=2)}


def _ref_dsolve(state):
    x = state["lu_obj"].solve(np.asarray(state["rhs"]))
    return {"x": _np_checksum(x)}


def _setup_pcg(m):
    return {"linked": csr_to_linked(m), "b": probe_vector(m.n_rows, salt=3),
            "params": PcgParams(max_iterations=PCG_TIMED_ITERATIONS,
                                tolerance=1e-300),
            "scipy": _scipy_csr(m)}


def _ref_pcg(state):
    a = state["scipy"]
    d = a.diagonal()
    if np.any(d == 0.0):
        raise HarnessError("zero diagonal in pcg input")
    b = np.asarray(state["b"])
    params = state["params"]
    b_norm = float(np.linalg.norm(b))
    x = np.zeros_like(b)
    r = b.copy()
    z = r / d
    p = z.copy()
    rz = float(r @ z)
    used = 0
    for it in range(1, params.max_iterations + 1):
        q = a @ p
        alpha = rz / float(p @ q)
        x += alpha * p
        r -= alpha * q
        used = it
        if float(np.linalg.norm(r)) / b_norm <= params.tolerance:
            break
        z = r / d
        rz_new = float(r @ z)
        beta = rz_new / rz
        rz = rz_new
        p = z + beta * p
    return {"x": _np_checksum(x), "iterations": float(used)}


def _digest_pcg(state, result):
    x, iterations, _ = result
    return {"x": weighted_checksum(x), "iterations": float(iterations)}


def _setup_asm(_unused):
    mesh = gen_tri_mesh(*ASM_MESH)
    k, slots = asm_symbolic(mesh)
    return {"mesh": mesh, "row_ptr": k.row_ptr, "col_ind": k.col_ind,
            "slots": slots, "n": k.n_rows, "zeros": [0.0] * k.nnz}


def _run_asm(state):
    k = CsrMatrix(state["n"], state["n"], state["row_ptr"],
                  state["col_ind"], state["zeros"].copy())
    asm_numeric(state["mesh"], k, state["slots"])
    return k


def _ref_asm(state):
    mesh = state["mesh"]
    nodes = np.asarray(mesh.nodes, dtype=np.float64)
    elems = np.asarray(mesh.elements, dtype=np.int64)
    p1 = nodes[elems[:, 0]]
    p2 = nodes[elems[:, 1]]
    p3 = nodes[elems[:, 2]]
    det = ((p2[:, 0] - p1[:, 0]) * (p3[:, 1] - p1[:, 1])
           - (p3[:, 0] - p1[:, 0]) * (p2[:, 1] - p1[:, 1]))
    area = np.abs(det) / 2.0
    bb = np.stack([p2[:, 1] - p3[:, 1], p3[:, 1] - p1[:, 1],
                   p1[:, 1] - p2[:, 1]], axis=1)
    cc = np.stack([p3[:, 0] - p2[:, 0], p1[:, 0] - p3[:, 0],
                   p2[:, 0] - p1[:, 0]], axis=1)
    kloc = (np.einsum("ei,ej->eij", bb, bb) + np.einsum("ei,ej->eij", cc, cc))
    kloc /= (4.0 * area)[:, None, None]
    values = np.zeros(len(state["col_ind"]))
    slots = np.asarray(state["slots"], dtype=np.int64)
    np.add.at(values, slots.ravel(), kloc.reshape(len(elems), 9).ravel())
    return {"values": _np_checksum(values)}


def _setup_trmat(m):
    return {"m": m, "scipy": _scipy_csr(m)}


def _ref_trmat(state):
    t = state["scipy"].transpose().tocsr()
    t.sort_indices()
    return {"row_ptr": _np_checksum(t.indptr), "col_ind": _np_checksum(t.indices),
            "values": _np_checksum(t.data)}


def _digest_trmat(state, result):
    return {"row_ptr": weighted_checksum(result.row_ptr),
            "col_ind": weighted_checksum(result.col_ind),
            "values": weighted_checksum(result.values)}


def _reference_cm(n, ia, ja):
    """Independent Cuthill-McKee with the same tie-break rules.

    Queue-based rather than window-based; used only to gate the kernel.
    """
    deg = [max(0, ia[i + 1] - ia[i] - 1) for i in range(n)]
    seed_order = sorted(range(n), key=lambda v: (deg[v], v))
    seen = [False] * n
    order = []
    for s in seed_order:
        if seen[s]:
            continue
        seen[s] = True
        q = deque([s])
        while q:
            v = q.popleft()
            order.append(v)
            nbrs = sorted(
                (ja[k] for k in range(ia[v], ia[v + 1])
                 if ja[k] != v and not seen[ja[k]]),
                key=lambda u: (deg[u], u))
            for u in nbrs:
                seen[u] = True
                q.append(u)
    forward = [0] * n
    for new, old in enumerate(order):
        forward[old] = new
    return forward


def _setup_cmck(m):
    return {"sym": symmetrize_lower(m)}


def _run_cmck(state):
    return cmck(state["sym"], check_pattern=False)


def _ref_cmck(state):
    sym = state["sym"]
    fwd = _reference_cm(sym.n_rows, sym.row_ptr, sym.col_ind)
    return {"forward": weighted_checksum(fwd)}


def _setup_mperm(m):
    sym = symmetrize_lower(m)
    return {"sym": sym, "perm": cmck(sym, check_pattern=False)}


def _run_mperm(state):
    return _mperm_fill(state["sym"], state["perm"])


def _digest_mperm(state, result):
    iao, jao, ao = result
    n = state["sym"].n_rows
    js = list(jao)
    vs = list(ao)
    for ii in range(n):
        lo, hi = iao[ii], iao[ii + 1]
        if hi - lo > 1:
            seg = sorted(zip(js[lo:hi], vs[lo:hi]))
            for k, (c, v) in enumerate(seg, start=lo):
                js[k] = c
                vs[k] = v
    return {"row_ptr": weighted_checksum(iao),
            "col_ind": weighted_checksum(js),
            "values": weighted_checksum(vs)}


def _ref_mperm(state):
    sym = state["sym"]
    inv = np.asarray(state["perm"].inverse, dtype=np.int64)
    a = _scipy_csr(sym)
    b = a[inv][:, inv].tocsr()
    b.sort_indices()
    return {"row_ptr": _np_checksum(b.indptr), "col_ind": _np_checksum(b.indices),
            "values": _np_checksum(b.data)}


@dataclass(frozen=True)
class Benchmark:
    """A runnable kernel entry: setup, timed body, digest and reference."""

    name: str
    family: str
    needs_matrix: bool
    setup: callable
    run: callable
    digest: callable
    reference: callable


def _simple_digest(key):
    def digest(state, result):
        if key == "flat":
            return {"y": weighted_checksum(
                v for row in result for v in row)}
        return {key: weighted_checksum(result)}
    return digest


BENCHMARKS = {b.name: b for b in [
    Benchmark("SPMATVEC", "pointer", True, _setup_spmatvec,
              lambda s: spmatvec(s["linked"], s["x"]),
              _simple_digest("y"), _ref_spmatvec),
    Benchmark("SPMATMAT", "pointer", True, _setup_spmatmat,
              lambda s: spmatmat(s["linked"], s["B"]),
              _simple_digest("flat"), _ref_spmatmat),
    Benchmark("JACIT", "pointer", True, _setup_jacit,
              lambda s: jacit(s["linked"], s["b"], s["x0"], s["params"]),
              _simple_digest("x"), _ref_jacit),
    Benchmark("DSOLVE", "pointer", True, _setup_dsolve,
              lambda s: dsolve(s["ortho"], s["rhs"]),
              _simple_digest("x"), _ref_dsolve),
    Benchmark("PCG", "pointer", True, _setup_pcg,
              lambda s: pcg(s["linked"], s["b"], s["params"]),
              _digest_pcg, _ref_pcg),
    Benchmark("ASM", "array", False, _setup_asm, _run_asm,
              lambda s, r: {"values": weighted_checksum(r.values)}, _ref_asm),
    Benchmark("TRMAT", "array", True, _setup_trmat,
              lambda s: trmat(s["m"]),
              _digest_trmat, _ref_trmat),
    Benchmark("CMCK", "array", True, _setup_cmck, _run_cmck,
              lambda s, r: {"forward": weighted_checksum(r.forward)}, _ref_cmck),
    Benchmark("MPERM", "array", True, _setup_mperm, _run_mperm,
              _digest_mperm, _ref_mperm),
]}

BENCHMARK_ORDER = list(BENCHMARKS)
POINTER_BENCHMARKS = [n for n, b in BENCHMARKS.items() if b.family == "pointer"]
ARRAY_BENCHMARKS = [n for n, b in BENCHMARKS.items() if b.family == "array"]


def load_matrix(data_dir, name: str) -> CsrMatrix:
    path = matio.matrix_path(data_dir, name)
    if not path.exists():
        raise HarnessError(
            f"matrix {name!r} not found at {path}; run the gen command first")
    m, _meta = read_matrix_market(path)
    return m


def execute_cell(benchmark: str, matrix: str, data_dir, policy: TimingPolicy) -> dict:
    """Set up, time and gate one (benchmark, matrix) cell, in-process.

    Setup and reference computation are untimed; only the kernel call
    sits between clock reads. The digest of the final run must match the
    independent reference or the cell is rejected (ok=False, no usable
    seconds). A test hook (CORRUPT_ENV naming the benchmark) falsifies
    the digest to exercise exactly that rejection path.
    """
    if benchmark not in BENCHMARKS:
        raise HarnessError(f"unknown benchmark {benchmark!r}")
    bench = BENCHMARKS[benchmark]
    if bench.needs_matrix:
        if matrix == "none":
            raise HarnessError(f"{benchmark} requires a matrix input")
        m = load_matrix(data_dir, matrix)
    else:
        if matrix != "none":
            raise HarnessError(f"{benchmark} takes no matrix; use 'none'")
        m = None

    state = bench.setup(m)
    ref = bench.reference(state)

    for _ in range(policy.warmup_runs):
        bench.run(state)
    runs = []
    result = None
    for _ in range(policy.measured_runs):
        t0 = time.perf_counter_ns()
        result = bench.run(state)
        t1 = time.perf_counter_ns()
        runs.append((t1 - t0) / 1e9)

    got = bench.digest(state, result)
    if os.environ.get(CORRUPT_ENV) == benchmark:
        got = {k: v + 1.0 for k, v in got.items()}

    seconds = policy.aggregate(runs)
    med, mn = statistics.median(runs), min(runs)
    dispersion_ok = not (policy.measured_runs >= 5 and mn > 0 and med / mn > 1.5)
    ok = _checksums_match(got, ref)
    return {
        "benchmark": benchmark,
        "matrix": matrix,
        "ok": ok,
        "error": None if ok else "oracle checksum mismatch: "
                 + json.dumps({"got": got, "want": ref}, sort_keys=True),
        "seconds": seconds,
        "runs": runs,
        "aggregator": policy.aggregator,
        "warmup_runs": policy.warmup_runs,
        "measured_runs": policy.measured_runs,
        "dispersion_ok": dispersion_ok,
        "checksums": got,
        "ref_checksums": ref,
    }


def _runner_command(config: BenchConfig) -> list:
    interp = config.compiler_override or sys.executable
    return [interp, *shlex.split(config.build_flags), "-m", "sparkbench._runner"]


def run_cell_subprocess(benchmark: str, matrix: str, config: BenchConfig,
                        policy: TimingPolicy, data_dir) -> dict:
    """Execute one cell in the configuration's interpreter; returns payload."""
    job = {
        "benchmark": benchmark,
        "matrix": matrix,
        "data_dir": os.fspath(data_dir),
        "policy": {"warmup_runs": policy.warmup_runs,
                   "measured_runs": policy.measured_runs,
                   "aggregator": policy.aggregator},
    }
    proc = subprocess.run(
        _runner_command(config), input=json.dumps(job),
        capture_output=True, text=True)
    if proc.returncode != 0 and not proc.stdout.strip():
        raise HarnessError(
            f"runner failed for {benchmark}/{matrix} under {config.id}: "
            f"{proc.stderr.strip()[-500:]}")
    try:
        payload = json.loads(proc.stdout)
    except json.JSONDecodeError:
        raise HarnessError(
            f"runner produced no result for {benchmark}/{matrix} under "
            f"{config.id}: {proc.stderr.strip()[-500:]}") from None
    payload["config"] = config.id
    return payload


def run_benchmark(benchmark: str, matrix: str, config: BenchConfig,
                  policy: TimingPolicy, data_dir) -> float:
    """Run one cell under a configuration and return aggregate seconds."""
    payload = run_cell_subprocess(benchmark, matrix, config, policy, data_dir)
    if not payload.get("ok"):
        raise OracleMismatchError(
            payload.get("error") or f"cell {benchmark}/{matrix} rejected")
    return payload["seconds"]


def time_file_path(results_root, config_id: str, benchmark: str,
                   matrix: str) -> Path:
    return Path(results_root) / config_id / f"{benchmark}__{matrix}.time"


def write_time_file(path, payload: dict) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        f"benchmark {payload['benchmark']}",
        f"matrix {payload['matrix']}",
        f"config {payload['config']}",
        f"seconds {payload['seconds']:.6f}",
        f"aggregator {payload['aggregator']}",
        f"warmup_runs {payload['warmup_runs']}",
        f"measured_runs {payload['measured_runs']}",
        f"dispersion_ok {'true' if payload['dispersion_ok'] else 'false'}",
        "runs " + " ".join(f"{t:.9f}" for t in payload["runs"]),
        "checksum " + " ".join(
            f"{k}={payload['checksums'][k]!r}" for k in sorted(payload["checksums"])),
        "ref_checksum " + " ".join(
            f"{k}={payload['ref_checksums'][k]!r}" for k in sorted(payload["ref_checksums"])),
    ]
    path.write_text("\n".join(lines) + "\n", encoding="ascii", newline="\n")


def parse_time_file(path) -> dict:
    out = {}
    for line in Path(path).read_text(encoding="ascii").splitlines():
        key, _, rest = line.partition(" ")
        out[key] = rest
    try:
        out["seconds"] = float(out["seconds"])
        out["runs"] = [float(t) for t in out["runs"].split()]
    except (KeyError, ValueError):
        raise HarnessError(f"malformed time file {path}") from None
    return out


def run_suite(configs: list, benchmarks: list, matrices: list,
              policy: TimingPolicy, data_dir, results_root) -> list:
    """Run the whole grid, config-major, writing the results tree.

    Cells failing setup or the admission gate produce a .err file
    instead of a .time file and the suite continues. Returns a list of
    (config id, benchmark, matrix, status string) tuples in run order.
    """
    results_root = Path(results_root)
    ids = [c.id for c in configs]
    if len(set(ids)) != len(ids):
        raise HarnessError("duplicate configuration ids")
    if "base" not in ids and not (results_root / "base").exists():
        raise HarnessError(
            "reference configuration 'base' is neither in the config list "
            "nor already measured on disk")
    for name in benchmarks:
        if name not in BENCHMARKS:
            raise HarnessError(f"unknown benchmark {name!r}")

    outcomes = []
    for config in configs:
        (results_root / config.id).mkdir(parents=True, exist_ok=True)
        for name in benchmarks:
            bench = BENCHMARKS[name]
            cell_inputs = matrices if bench.needs_matrix else ["none"]
            for mat in cell_inputs:
                tpath = time_file_path(results_root, config.id, name, mat)
                epath = tpath.with_suffix(".err")
                try:
                    payload = run_cell_subprocess(name, mat, config, policy,
                                                  data_dir)
                    if not payload.get("ok"):
                        raise OracleMismatchError(
                            payload.get("error") or "cell rejected")
                    write_time_file(tpath, payload)
                    if epath.exists():
                        epath.unlink()
                    status = "ok"
                except Exception as exc:
                    epath.parent.mkdir(parents=True, exist_ok=True)
                    epath.write_text(f"{type(exc).__name__}: {exc}\n",
                                     encoding="utf-8")
                    if tpath.exists():
                        tpath.unlink()
                    status = f"failed: {type(exc).__name__}"
                outcomes.append((config.id, name, mat, status))
    return outcomes


def aggregate(results_root, out_path=None) -> tuple:
    """Fold the results tree into spark.dat.

    One line per measured cell: ``id benchmark matrix reftime time``,
    single spaces, %.6f seconds, sorted by (id, benchmark, matrix), LF
    line endings. reftime is the base configuration's seconds for the
    same (benchmark, matrix); cells without a base measurement are
    skipped with a warning. Returns (path written, warnings).
    """
    results_root = Path(results_root)
    if not (results_root / "base").is_dir():
        raise HarnessError(f"no base results under {results_root}")
    cells = {}
    for cfg_dir in sorted(p for p in results_root.iterdir() if p.is_dir()):
        for tf in sorted(cfg_dir.glob("*.time")):
            d = parse_time_file(tf)
            cells[(cfg_dir.name, d["benchmark"], d["matrix"])] = d["seconds"]
    base_times = {(b, m): s for (i, b, m), s in cells.items() if i == "base"}
    lines = []
    warnings = []
    for key in sorted(cells):
        cid, bench, mat = key
        ref = base_times.get((bench, mat))
        if ref is None:
            warnings.append(f"no base measurement for {bench} {mat}; "
                            f"skipping {cid}")
            continue
        lines.append(BenchRecord(cid, bench, mat, ref, cells[key]).format_line())
    if out_path is None:
        out_path = results_root.parent / "exp" / "data" / "spark.dat"
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text("".join(line + "\n" for line in lines),
                        encoding="ascii", newline="\n")
    return out_path, warnings


def parse_spark_dat(path) -> list:
    records = []
    for line in Path(path).read_text(encoding="ascii").splitlines():
        if line:
            records.append(BenchRecord.parse_line(line))
    return records


# --- reporting -------------------------------------------------------------

_PALETTE = ["#4878a8", "#b85c48", "#58915b", "#8868a0", "#a88a3c", "#5b8a8f"]


def _nice_ceiling(v: float) -> float:
    for step in (0.25, 0.5, 1.0, 2.0, 5.0, 10.0):
        for mult in range(1, 41):
            if step * mult >= v:
                return step * mult
    return v


def _bar_chart_svg(title: str, bench_names: list, series: list,
                   values: dict) -> str:
    """Grouped speedup bars, one group per benchmark, one bar per config.

    Pointer-family and array-family benchmarks are visually separated so
    the two families can be compared at a glance. Pure function of its
    inputs.
    """
    bar_w = 16
    group_pad = 24
    group_w = max(56, len(series) * bar_w + group_pad)
    margin_l, margin_r, margin_t, margin_b = 64, 150, 46, 78
    plot_w = group_w * len(bench_names)
    plot_h = 300
    width = margin_l + plot_w + margin_r
    height = margin_t + plot_h + margin_b

    vmax = max([values.get((b, s), 0.0) for b in bench_names for s in series]
               + [1.0])
    y_top = _nice_ceiling(max(1.25, vmax * 1.1))

    def ypix(v):
        return margin_t + plot_h - (v / y_top) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" '
        f'height="{height}" viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="#ffffff"/>',
        f'<text x="{margin_l}" y="24" font-family="sans-serif" '
        f'font-size="15" fill="#222222">{title}</text>',
    ]

    tick_step = y_top / 5.0
    for t in range(6):
        v = tick_step * t
        y = ypix(v)
        parts.append(f'<line x1="{margin_l}" y1="{y:.2f}" '
                     f'x2="{margin_l + plot_w}" y2="{y:.2f}" '
                     f'stroke="#dddddd" stroke-width="1"/>')
        parts.append(f'<text x="{margin_l - 8}" y="{y + 4:.2f}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'fill="#555555" text-anchor="end">{v:.2f}</text>')
    uy = ypix(1.0)
    parts.append(f'<line x1="{margin_l}" y1="{uy:.2f}" '
                 f'x2="{margin_l + plot_w}" y2="{uy:.2f}" '
                 f'stroke="#888888" stroke-width="1.2" stroke-dasharray="6 3"/>')
    parts.append(f'<text x="{margin_l + plot_w + 6}" y="{uy + 4:.2f}" '
                 f'font-family="sans-serif" font-size="11" '
                 f'fill="#555555">1.00</text>')

    families = [BENCHMARKS[b].family if b in BENCHMARKS else "array"
                for b in bench_names]
    for gi, bench in enumerate(bench_names):
        gx = margin_l + gi * group_w
        bx = gx + (group_w - len(series) * bar_w) / 2.0
        for si, sid in enumerate(series):
            v = values.get((bench, sid))
            if v is None:
                continue
            y = ypix(v)
            h = margin_t + plot_h - y
            parts.append(
                f'<rect x="{bx + si * bar_w:.2f}" y="{y:.2f}" '
                f'width="{bar_w - 2}" height="{h:.2f}" '
                f'fill="{_PALETTE[si % len(_PALETTE)]}"/>')
        parts.append(
            f'<text x="{gx + group_w / 2:.2f}" y="{margin_t + plot_h + 16}" '
            f'font-family="sans-serif" font-size="11" fill="#222222" '
            f'text-anchor="middle">{bench}</text>')
        if gi + 1 < len(bench_names) and families[gi] != families[gi + 1]:
            sx = margin_l + (gi + 1) * group_w
            parts.append(f'<line x1="{sx}" y1="{margin_t}" x2="{sx}" '
                         f'y2="{margin_t + plot_h + 24}" stroke="#aaaaaa" '
                         f'stroke-width="1" stroke-dasharray="3 3"/>')

    spans = {}
    for fam, gi in zip(families, range(len(bench_names))):
        spans.setdefault(fam, [gi, gi])[1] = gi
    for fam, (lo, hi) in sorted(spans.items()):
        cx = margin_l + (lo + hi + 1) * group_w / 2.0
        label = {"pointer": "pointer-traversal kernels",
                 "array": "indirection-array kernels"}.get(fam, fam)
        parts.append(f'<text x="{cx:.2f}" y="{margin_t + plot_h + 38}" '
                     f'font-family="sans-serif" font-size="11" '
                     f'fill="#777777" text-anchor="middle">{label}</text>')

    lx = margin_l + plot_w + 24
    for si, sid in enumerate(series):
        ly = margin_t + 10 + si * 20
        parts.append(f'<rect x="{lx}" y="{ly - 10}" width="12" height="12" '
                     f'fill="{_PALETTE[si % len(_PALETTE)]}"/>')
        parts.append(f'<text x="{lx + 18}" y="{ly}" font-family="sans-serif" '
                     f'font-size="12" fill="#222222">{sid}</text>')

    parts.append(f'<text x="{margin_l}" y="{height - 10}" '
                 f'font-family="sans-serif" font-size="11" fill="#777777">'
                 f'speedup = reference time / configuration time; dashed line '
                 f'is parity with base</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def report(spark_dat, out_dir) -> tuple:
    """Emit speedups.csv and one grouped-bar SVG per matrix.

    Returns (csv path, list of svg paths, notices). Empty input yields a
    header-only CSV and a notice instead of charts.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = parse_spark_dat(spark_dat)
    non_base = [r for r in records if r.id != "base"]

    csv_path = out_dir / "speedups.csv"
    csv_lines = ["id,benchmark,matrix,speedup"]
    for r in non_base:
        csv_lines.append(f"{r.id},{r.benchmark},{r.matrix},{speedup(r):.6f}")
    csv_path.write_text("".join(line + "\n" for line in csv_lines),
                        encoding="ascii", newline="\n")

    notices = []
    if not non_base:
        notices.append("no non-base records; nothing to chart")
        return csv_path, [], notices

    series = sorted({r.id for r in non_base})
    matrices = sorted({r.matrix for r in non_base})
    svg_paths = []
    for mat in matrices:
        rows = [r for r in non_base if r.matrix == mat]
        present = {r.benchmark for r in rows}
        bench_names = [b for b in BENCHMARK_ORDER if b in present]
        bench_names += sorted(present - set(bench_names))
        values = {(r.benchmark, r.id): speedup(r) for r in rows}
        svg = _bar_chart_svg(f"speedups on {mat}", bench_names, series, values)
        path = out_dir / f"{mat}.svg"
        path.write_text(svg, encoding="ascii", newline="\n")
        svg_paths.append(path)
    return csv_path, svg_paths, notices


# --- verification driver ----------------------------------------------------

def _close(a: float, b: float, tol: float) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _vec_close(got, want, tol: float) -> bool:
    return len(got) == len(want) and all(
        _close(a, b, tol) for a, b in zip(got, want))


def _csr_equal(a: CsrMatrix, b: CsrMatrix) -> bool:
    return (a.n_rows == b.n_rows and a.n_cols == b.n_cols
            and a.row_ptr == b.row_ptr and a.col_ind == b.col_ind
            and a.values == b.values)


def _dominant_fixture(rng) -> CsrMatrix:
    """Random banded matrix with a strictly dominant diagonal."""
    n = rng.randint(2, 24)
    bands = []
    for _ in range(rng.randint(1, 4)):
        off = rng.randint(1 - n, n - 1)
        if off != 0:
            bands.append((off, rng.uniform(0.3, 1.0), (-1.0, 1.0)))
    m = matio.gen_banded(n, bands, seed=rng.randint(0, 1 << 30))
    triples = []
    row_abs = [0.0] * n
    for i, j, v in m.triples():
        if i != j:
            triples.append((i, j, v))
            row_abs[i] += abs(v)
    for i in range(n):
        triples.append((i, i, 1.0 + row_abs[i]))
    return CsrMatrix.from_triples(n, n, triples)


def verify_fixtures(seed: int = 2024, count: int = 40) -> list:
    """Check every kernel against its oracle on small seeded fixtures.

    Returns (label, ok, detail) tuples in a fixed order; ok is True or
    False. The output is a pure function of the arguments.
    """
    import random
    import tempfile

    from . import oracles
    from .arr_kernels import asm_assemble, bandwidth, mperm
    from .core import csr_to_ortho, linked_to_csr, ortho_to_csr
    from .matio import gen_arrow, gen_spd
    from .ptr_kernels import lu_factor_for_dsolve

    rng = random.Random(seed)
    labels = ["conversions", "spmatvec", "spmatmat", "jacit", "dsolve",
              "trmat", "cmck", "mperm", "matrixmarket"]
    bad = {k: "" for k in labels}

    def note(label, why):
        if not bad[label]:
            bad[label] = why

    for t in range(count):
        m = _dominant_fixture(rng)
        n = m.n_rows
        dense = oracles.dense_of(m)

        lk = csr_to_linked(m)
        if not _csr_equal(linked_to_csr(lk), m):
            note("conversions", f"fixture {t}: linked round trip differs")
        if not _csr_equal(ortho_to_csr(csr_to_ortho(m)), m):
            note("conversions", f"fixture {t}: orthogonal round trip differs")

        x = probe_vector(n, salt=t)
        if not _vec_close(spmatvec(lk, x), oracles.dense_matvec(dense, x), 1e-12):
            note("spmatvec", f"fixture {t}: product differs")

        k = 1 + t % 4
        bmat = probe_dense(n, k)
        got = spmatmat(lk, bmat)
        want = oracles.dense_matmat(dense, bmat)
        if not all(_vec_close(g, w, 1e-12) for g, w in zip(got, want)):
            note("spmatmat", f"fixture {t}: product differs")

        rhs = probe_vector(n, salt=t + 1)
        xj = jacit(lk, rhs, [0.0] * n, JacobiParams(iterations=3))
        xd = [0.0] * n
        for _ in range(3):
            xd = oracles.dense_jacobi_sweep(dense, rhs, xd)
        if not _vec_close(xj, xd, 1e-12):
            note("jacit", f"fixture {t}: sweeps diverge from oracle")

        lu = lu_factor_for_dsolve(m)
        xs = dsolve(lu, rhs)
        resid = [g - b for g, b in
                 zip(oracles.dense_matvec(dense, xs), rhs)]
        if any(abs(r) > 1e-9 * max(1.0, abs(b)) for r, b in zip(resid, rhs)):
            note("dsolve", f"fixture {t}: residual too large")
        if not _vec_close(xs, oracles.dense_lu_solve(dense, rhs), 1e-9):
            note("dsolve", f"fixture {t}: solution differs from oracle")

        tm = trmat(m)
        if not _csr_equal(tm, oracles.csr_of(oracles.dense_transpose(dense))):
            note("trmat", f"fixture {t}: transpose differs")
        if not _csr_equal(trmat(tm), m):
            note("trmat", f"fixture {t}: double transpose not identity")

        sym = symmetrize_lower(m)
        perm = cmck(sym)
        if sorted(perm.forward) != list(range(n)):
            note("cmck", f"fixture {t}: forward map is not a permutation")

        bsym, _bv = mperm(sym, perm, rhs)
        dsym = oracles.dense_permute_sym(oracles.dense_of(sym), perm.forward)
        if not _csr_equal(bsym, oracles.csr_of(dsym)):
            note("mperm", f"fixture {t}: permuted matrix differs")

        with tempfile.TemporaryDirectory() as tmp:
            p = Path(tmp) / "rt.mtx"
            matio.write_matrix_market(p, m)
            back, _meta = read_matrix_market(p)
            if not _csr_equal(back, m):
                note("matrixmarket", f"fixture {t}: file round trip differs")

    results = [(label, not bad[label],
                f"{count} fixtures" if not bad[label] else bad[label])
               for label in labels]

    why = ""
    for t in range(10):
        spd = gen_spd(rng.randint(6, 40), seed=rng.randint(0, 1 << 30))
        lks = csr_to_linked(spd)
        b = probe_vector(spd.n_rows, salt=t)
        xsol, used, rel = pcg(lks, b, PcgParams())
        ax = oracles.dense_matvec(oracles.dense_of(spd), xsol)
        num = math.sqrt(sum((a - bb) ** 2 for a, bb in zip(ax, b)))
        den = math.sqrt(sum(bb * bb for bb in b))
        if abs(rel - num / den) > 1e-10 * max(1.0, rel):
            why = why or f"trial {t}: reported residual {rel} vs recomputed {num / den}"
        if used < PcgParams().max_iterations and rel > PcgParams().tolerance:
            why = why or f"trial {t}: stopped early above tolerance"
    results.append(("pcg", not why, "10 fixtures" if not why else why))

    why = ""
    for nx, ny in [(2, 2), (3, 2), (4, 4), (5, 3)]:
        mesh = gen_tri_mesh(nx, ny)
        kmat = asm_assemble(mesh)
        want = oracles.dense_assemble(mesh)
        got = oracles.dense_of(kmat)
        diff = max(abs(a - b) for a, b in zip(got.cells, want.cells))
        if diff > 1e-12:
            why = why or f"mesh {nx}x{ny}: max deviation {diff}"
    results.append(("asm", not why, "4 meshes" if not why else why))

    why = ""
    for n in (50, 120):
        full = [(off, 1.0, (-1.0, 1.0)) for off in (-2, -1, 1, 2)]
        banded = symmetrize_lower(matio.gen_banded(n, full, seed=n))
        pb = cmck(banded)
        bw0 = bandwidth(banded)
        bw1 = bandwidth(mperm(banded, pb, [0.0] * n)[0])
        if bw1 > bw0:
            why = why or f"banded n={n}: bandwidth grew {bw0} -> {bw1}"
        arrow = symmetrize_lower(gen_arrow(n, seed=n))
        pa = cmck(arrow)
        aw0 = bandwidth(arrow)
        aw1 = bandwidth(mperm(arrow, pa, [0.0] * n)[0])
        if aw1 >= aw0:
            why = why or f"arrow n={n}: bandwidth not reduced {aw0} -> {aw1}"
    results.append(("cmck_bandwidth", not why, "2 sizes" if not why else why))

    return results


def verify_matrix(data_dir, name: str) -> tuple:
    """Gate every matrix-driven kernel once on a full-size input.

    Uses the harness admission checksums (the oracle module's dense
    routines do not scale this far). Returns (label, ok, detail) where
    ok is None when the matrix file has not been generated.
    """
    path = matio.matrix_path(data_dir, name)
    label = f"scale:{name}"
    if not path.exists():
        return label, None, "not generated; skipped"
    m, meta = read_matrix_market(path)
    problems = []
    if name in matio.TABLE1_EXPECTED:
        rep = matio.validate_characteristics(meta, matio.TABLE1_EXPECTED[name])
        problems.extend(rep.failures)
    gated = 0
    for bname in BENCHMARK_ORDER:
        bench = BENCHMARKS[bname]
        if not bench.needs_matrix:
            continue
        try:
            state = bench.setup(m)
            ref = bench.reference(state)
            got = bench.digest(state, bench.run(state))
        except Exception as exc:
            problems.append(f"{bname}: {type(exc).__name__}: {exc}")
            continue
        if _checksums_match(got, ref):
            gated += 1
        else:
            problems.append(f"{bname}: checksum mismatch")
    if problems:
        return label, False, "; ".join(problems)
    return label, True, f"{gated} kernel gates"


# --- configuration files ---------------------------------------------------

DEFAULT_CONFIGS = [
    BenchConfig("base", "", None),
    BenchConfig("opt1", "-O", None),
    BenchConfig("opt2", "-OO", None),
]


def parse_config_file(path) -> list:
    """Read configuration blocks of ``id``/``cflags``/``cc`` lines.

    Each block starts with an ``id`` line; ``cflags`` and ``cc`` are
    optional within a block. Blank lines and '#' comments are ignored.
    """
    configs = []
    current = None
    for lineno, raw in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(" ")
        rest = rest.strip()
        if key == "id":
            if current is not None:
                configs.append(current)
            current = BenchConfig(rest)
        elif key == "cflags":
            if current is None:
                raise HarnessError(f"{path}:{lineno}: cflags before id")
            current.build_flags = rest
        elif key == "cc":
            if current is None:
                raise HarnessError(f"{path}:{lineno}: cc before id")
            current.compiler_override = rest or None
        else:
            raise HarnessError(f"{path}:{lineno}: unknown key {key!r}")
    if current is not None:
        configs.append(current)
    if not configs:
        raise HarnessError(f"{path}: no configurations defined")
    return configs
